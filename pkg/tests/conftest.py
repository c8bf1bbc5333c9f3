import json
from pathlib import Path

import numpy as np
import pytest

from condemit.coupling import pair_couplings
from condemit.geometry import AtomEnsemble

PHI1 = 2 * np.pi / 3
PHI2 = np.pi / 4.4


@pytest.fixture(scope="session")
def oracles():
    return json.loads((Path(__file__).parent / "fixtures" / "oracles.json").read_text())


@pytest.fixture(scope="session")
def paper_ensemble():
    return AtomEnsemble.paper_geometry()


@pytest.fixture(scope="session")
def paper_couplings(paper_ensemble):
    return pair_couplings(paper_ensemble, paper_mode=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_density(rng, dim, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one acceptance line: ``report(id, name, passed, detail)``."""
    def _record(cid, name, passed, detail):
        _ACCEPTANCE.append((str(cid), name, bool(passed), detail))
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, name, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {cid:>3} {name}: {detail}")
