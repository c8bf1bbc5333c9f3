import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from condemit.coupling import dipole_coupling, find_pair, pair_couplings
from condemit.geometry import AtomEnsemble


def test_paper_pair_against_high_precision(oracles):
    ref = oracles["coupling_2pi_over_3_psi0"]
    c = dipole_coupling(2 * np.pi / 3, 0.0, 1.0)
    assert c.delta_omega == pytest.approx(float(ref["delta_omega"]), abs=1e-13)
    assert c.delta_gamma == pytest.approx(float(ref["delta_gamma"]), abs=1e-13)


def test_small_separation_limit(oracles):
    c = dipole_coupling(1e-3, 0.0)
    assert abs(c.delta_gamma - 1.0) < 1e-5
    assert c.delta_gamma == pytest.approx(float(oracles["coupling_1e-3_psi0"]["delta_gamma"]), rel=1e-9)


def test_magic_angle_keeps_far_field_term_only():
    c = dipole_coupling(np.pi, np.arccos(1 / np.sqrt(3)))
    assert c.delta_gamma == pytest.approx(0.0, abs=1e-15)
    assert c.delta_omega == pytest.approx(-1 / np.pi, abs=1e-15)


def test_scales_with_gamma():
    a = dipole_coupling(2.0, 0.4, 1.0)
    b = dipole_coupling(2.0, 0.4, 3.5)
    assert b.delta_gamma == pytest.approx(3.5 * a.delta_gamma, rel=1e-14)
    assert b.delta_omega == pytest.approx(3.5 * a.delta_omega, rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_nonpositive_separation_rejected(x):
    with pytest.raises(ValueError):
        dipole_coupling(x, 0.0)


@given(st.floats(1e-3, 100), st.floats(0, np.pi))
def test_depends_on_cos_squared_only(x, psi):
    a = dipole_coupling(x, psi)
    b = dipole_coupling(x, np.pi - psi)
    # pi - psi is itself rounded; the near-field 1/x^3 term amplifies that ulp
    tol = 1e-14 * max(1.0, x ** -3)
    assert a.delta_gamma == pytest.approx(b.delta_gamma, abs=tol)
    assert a.delta_omega == pytest.approx(b.delta_omega, abs=tol)


def test_dissipative_coupling_bounded(rng):
    x = rng.uniform(1e-3, 100, 10_000)
    psi = rng.uniform(0, np.pi, 10_000)
    dg = np.array([dipole_coupling(a, b).delta_gamma for a, b in zip(x, psi)])
    assert np.all(np.abs(dg) <= 1.0 + 1e-12)


def test_perpendicular_dipoles_oscillate():
    x = np.linspace(np.pi / 2, 3 * np.pi, 200)[1:-1]
    dg = np.array([dipole_coupling(v, np.pi / 2).delta_gamma for v in x])
    assert np.any(np.sign(dg[1:]) != np.sign(dg[:-1]))


def test_pair_couplings_paper_mode(paper_ensemble):
    full = pair_couplings(paper_ensemble, paper_mode=False)
    paper = pair_couplings(paper_ensemble, paper_mode=True)
    assert [c.pair for c in full] == [(0, 1), (0, 2), (1, 2)]
    assert all(c.is_zero for c in paper if 2 in c.pair)
    assert not any(c.is_zero for c in full)
    assert find_pair(paper, 1, 0) == find_pair(full, 0, 1)
    assert all(c.psi == 0.0 for c in full)


def test_pair_angle_for_perpendicular_dipole():
    ens = AtomEnsemble.from_dipole_angle([(0, 0), (0.2, 0)], np.pi / 2)
    (c,) = pair_couplings(ens)
    assert c.psi == pytest.approx(np.pi / 2)
