import json
import time
from pathlib import Path

import pytest

from esslab.model import CetParams, ModelParams
from esslab.montecarlo import SimSpec, simulate_pipeline, simulate_power_lattice

DATA = Path(__file__).parent / "data"

LATTICE_D = (0.0, 0.2, 0.5, 0.8, 1.2)
LATTICE_S = (4, 10, 20, 64, 200)
LATTICE_SEED = 42
LATTICE_REPLICATES = 1_000_000

_ACCEPTANCE = []


class _Lattice(dict):
    elapsed = 0.0


def load_json(name):
    return json.loads((DATA / name).read_text())


@pytest.fixture(scope="session")
def power_lattice():
    """Monte Carlo rejection rates on the oracle lattice, keyed by (d, s).

    The wall time of the whole lattice is kept as ``.elapsed`` (seconds).
    """
    out = _Lattice()
    start = time.perf_counter()
    for s in LATTICE_S:
        for d, est in zip(LATTICE_D, simulate_power_lattice(
                LATTICE_D, s, 0.05, replicates=LATTICE_REPLICATES, seed=LATTICE_SEED)):
            out[(d, s)] = est
    out.elapsed = time.perf_counter() - start
    return out


@pytest.fixture(scope="session")
def pipeline_b05_s70_cet():
    """Two-stage procedure at b=0.5, d=0.5, s=70 with bound equal to d."""
    spec = SimSpec(ModelParams(0.5, 0.5, 200.0, cet=CetParams(1.0)), 1_000_000, seed=11)
    return simulate_pipeline(spec, s=70)


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(name, ok, detail=""):
        _ACCEPTANCE.append((name, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
