"""Minimal SVG charts. Presentation only: the CSV/JSON outputs are the record."""
from xml.sax.saxutils import escape

W, H = 480, 320
ML, MR, MT, MB = 56, 16, 28, 44


def _frame(title, xlabel, ylabel, ymax):
    pw, ph = W - ML - MR, H - MT - MB
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
        'font-family="sans-serif" font-size="11">',
        f'<text x="{W / 2:.1f}" y="16" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<line x1="{ML}" y1="{MT + ph}" x2="{ML + pw}" y2="{MT + ph}" stroke="black"/>',
        f'<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{MT + ph}" stroke="black"/>',
        f'<text x="{ML + pw / 2:.1f}" y="{H - 8}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{MT + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {MT + ph / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for i in range(5):
        v = ymax * i / 4
        y = MT + ph - ph * i / 4
        parts.append(f'<text x="{ML - 4}" y="{y + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    return parts, pw, ph


def histogram(edges, heights, title="Weighted power at ESS", xlabel="power", ylabel="mass"):
    ymax = max(max(heights), 1e-12) * 1.05
    parts, pw, ph = _frame(title, xlabel, ylabel, ymax)
    lo, hi = edges[0], edges[-1]
    for i, h in enumerate(heights):
        x0 = ML + pw * (edges[i] - lo) / (hi - lo)
        x1 = ML + pw * (edges[i + 1] - lo) / (hi - lo)
        bh = ph * h / ymax
        parts.append(f'<rect x="{x0:.2f}" y="{MT + ph - bh:.2f}" width="{max(x1 - x0 - 1, 0.5):.2f}" '
                     f'height="{bh:.2f}" fill="steelblue"/>')
    for v in (lo, (lo + hi) / 2, hi):
        x = ML + pw * (v - lo) / (hi - lo)
        parts.append(f'<text x="{x:.1f}" y="{MT + ph + 14}" text-anchor="middle">{v:.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def line(xs, ys, title, xlabel, ylabel):
    ymax = max(max(ys), 1e-12) * 1.05
    parts, pw, ph = _frame(title, xlabel, ylabel, ymax)
    x0, x1 = min(xs), max(xs)
    span = (x1 - x0) or 1.0
    pts = " ".join(f"{ML + pw * (x - x0) / span:.2f},{MT + ph - ph * y / ymax:.2f}"
                   for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
    for v in (x0, (x0 + x1) / 2, x1):
        x = ML + pw * (v - x0) / span
        parts.append(f'<text x="{x:.1f}" y="{MT + ph + 14}" text-anchor="middle">{v:.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
