import numpy as np
import pytest
from scipy.optimize import brentq

from condemit.correlations import (
    CorrelationTrace,
    conditional_state,
    detection_coefficients,
    g1,
    g1_map,
    g3_analytical,
    g3_analytical_map,
    g3_numerical,
    g3_numerical_map,
)
from condemit.coupling import PairCoupling, find_pair, pair_couplings, zero_couplings
from condemit.dynamics import DensityOperator, HilbertSpace
from condemit.geometry import AtomEnsemble, make_detector

from conftest import PHI1, PHI2

COINCIDENT = AtomEnsemble([(0, 0), (0, 0), (0, 0)])


def test_coefficients_all_phases_zero():
    c = detection_coefficients(COINCIDENT, 0.4, 1.9)
    assert c.c_Ge == pytest.approx(2.0)
    assert c.c_Sg == pytest.approx(2 * np.sqrt(2))
    assert c.c_Ag == pytest.approx(0.0)


def test_coefficients_paper_config(paper_ensemble, oracles):
    c = detection_coefficients(paper_ensemble, PHI1, PHI2)
    assert abs(c.c_Ge) == pytest.approx(float(oracles["abs_c_ge_paper"]), abs=1e-13)
    assert abs(c.c_Ge) == pytest.approx(0.507, abs=2e-3)
    assert c.phi_Sg is not None and c.phi_Ag is not None


def test_coefficients_detector_exchange(paper_ensemble):
    a = detection_coefficients(paper_ensemble, PHI1, PHI2)
    b = detection_coefficients(paper_ensemble, PHI2, PHI1)
    for x, y in ((a.c_Ge, b.c_Ge), (a.c_Sg, b.c_Sg), (a.c_Ag, b.c_Ag)):
        assert abs(x) == pytest.approx(abs(y), abs=1e-14)


def test_coefficients_translation_invariant(paper_ensemble):
    a = detection_coefficients(paper_ensemble, PHI1, PHI2)
    b = detection_coefficients(paper_ensemble.translated((0.37, -1.2)), PHI1, PHI2)
    np.testing.assert_allclose([a.c_Ge, a.c_Sg, a.c_Ag], [b.c_Ge, b.c_Sg, b.c_Ag], atol=1e-12)


def test_phases_undefined_without_ge_amplitude():
    # delta_21 - delta_22 = pi makes c_Ge vanish
    ens = AtomEnsemble([(0, 0), (0.5, 0), (3.1, 0)])
    c = detection_coefficients(ens, np.pi / 2, 0.0)
    assert abs(c.c_Ge) < 1e-14
    assert c.phi_Sg is None and c.phi_Ag is None


def test_ground_state_conditions_to_zero(paper_ensemble):
    sp = HilbertSpace(3)
    dets = [make_detector(paper_ensemble, PHI1), make_detector(paper_ensemble, PHI2)]
    rho = conditional_state(DensityOperator.from_ket(sp.ground()), dets)
    assert np.all(rho.matrix == 0)


def test_conditioned_state_structure(paper_ensemble):
    sp = HilbertSpace(3)
    d1, d2 = make_detector(paper_ensemble, PHI1), make_detector(paper_ensemble, PHI2)
    rho = conditional_state(DensityOperator.from_ket(sp.fully_excited()), [d1, d2])
    basis = np.stack([sp.dicke("G", (1,)), sp.dicke("S", (0,)), sp.dicke("A", (0,))], axis=1)
    proj = basis @ basis.conj().T
    np.testing.assert_allclose(proj @ rho.matrix @ proj, rho.matrix, atol=1e-14)
    pops = np.einsum("im,ij,jm->m", basis.conj(), rho.matrix, basis).real
    c = detection_coefficients(paper_ensemble, PHI1, PHI2)
    w = (d1.dipole_factor * d2.dipole_factor) ** 2
    np.testing.assert_allclose(pops, w * np.abs([c.c_Ge, c.c_Sg, c.c_Ag]) ** 2, atol=1e-13)
    assert rho.hermiticity_error() <= 1e-12 and rho.min_eigenvalue() >= -1e-10


def test_conditioning_order_irrelevant(paper_ensemble):
    sp = HilbertSpace(3)
    d1, d2 = make_detector(paper_ensemble, PHI1), make_detector(paper_ensemble, PHI2)
    rho0 = DensityOperator.from_ket(sp.fully_excited())
    np.testing.assert_allclose(conditional_state(rho0, [d1, d2]).matrix,
                               conditional_state(rho0, [d2, d1]).matrix, atol=1e-14)


def test_analytical_decays_away(paper_ensemble, paper_couplings):
    c = detection_coefficients(paper_ensemble, PHI1, PHI2)
    det = make_detector(paper_ensemble, 1.1)
    uncoupled = PairCoupling(0.0, 0.0)
    assert g3_analytical(c, uncoupled, det, 20.0) < 1e-12 * g3_analytical(c, uncoupled, det, 0.0)
    # the subradiant mode only decays at 2(gamma - dgamma) ~ 0.75 gamma
    pair = find_pair(paper_couplings)
    v0 = g3_analytical(c, pair, det, 0.0)
    assert g3_analytical(c, pair, det, 20.0) > 1e-12 * v0
    assert g3_analytical(c, pair, det, 40.0) < 1e-12 * v0
    with pytest.raises(ValueError):
        g3_analytical(c, pair, det, -0.1)


def test_uncoupled_symmetric_only_config_matches_numerics(paper_ensemble):
    # both clicks at pi/2 leave no antisymmetric amplitude
    c = detection_coefficients(paper_ensemble, np.pi / 2, np.pi / 2)
    assert abs(c.c_Ag) < 1e-14
    zero = zero_couplings(paper_ensemble)
    times = np.linspace(0, 3, 31)
    for phi3 in (0.4, 1.3, 2.2):
        det = make_detector(paper_ensemble, phi3)
        ana = g3_analytical(c, PairCoupling(0.0, 0.0), det, times)
        num = g3_numerical(paper_ensemble, zero, np.pi / 2, np.pi / 2, det, times)
        np.testing.assert_allclose(ana, num, rtol=1e-10, atol=1e-14)
        # both surviving modes decay at 2 gamma
        np.testing.assert_allclose(num / num[0], np.exp(-2 * times), rtol=1e-10)


def test_numerical_zero_along_dipole(paper_ensemble, paper_couplings):
    vals = g3_numerical(paper_ensemble, paper_couplings, PHI1, PHI2, 0.0, np.linspace(0, 5, 11))
    np.testing.assert_array_equal(vals, 0.0)


def test_coincident_uncoupled_single_rate():
    times = np.linspace(0, 4, 21)
    vals = g3_numerical(COINCIDENT, zero_couplings(COINCIDENT), 0.7, 2.0, 1.2, times)
    np.testing.assert_allclose(vals / vals[0], np.exp(-2 * times), rtol=1e-12)


def test_analytical_and_numerical_agree_full_circle(paper_ensemble, paper_couplings):
    angles = np.linspace(0, 2 * np.pi, 37, endpoint=False)
    times = np.linspace(0, 5, 21)
    ana = g3_analytical_map(paper_ensemble, find_pair(paper_couplings), PHI1, PHI2, angles, times)
    num = g3_numerical_map(paper_ensemble, paper_couplings, PHI1, PHI2, angles, times)
    assert np.max(np.abs(ana - num) / np.maximum(ana, 1e-12)) <= 1e-8


def test_full_mode_differs_slightly(paper_ensemble):
    angles = np.linspace(0.1, 3.0, 7)
    times = np.linspace(0, 2, 5)
    paper = g3_numerical_map(paper_ensemble, pair_couplings(paper_ensemble, True), PHI1, PHI2, angles, times)
    full = g3_numerical_map(paper_ensemble, pair_couplings(paper_ensemble, False), PHI1, PHI2, angles, times)
    rel = np.abs(full - paper) / paper
    assert 0 < rel.max() < 0.1


def test_g1_initial_pattern(paper_ensemble, paper_couplings):
    for phi in (0.3, 1.0, 2.5):
        assert g1(paper_ensemble, paper_couplings, phi, 0.0) == pytest.approx(3 * np.sin(phi) ** 2, rel=1e-13)
    np.testing.assert_array_equal(g1(paper_ensemble, paper_couplings, 0.0, np.linspace(0, 3, 5)), 0.0)


def test_g1_independent_atoms(paper_ensemble):
    angles = np.array([0.5, 1.2, 2.9])
    times = np.linspace(0, 3, 7)
    vals = g1_map(paper_ensemble, zero_couplings(paper_ensemble), angles, times)
    expected = 3 * np.sin(angles)[:, None] ** 2 * np.exp(-2 * times)[None, :]
    np.testing.assert_allclose(vals, expected, rtol=1e-12, atol=1e-15)


def test_g1_rejects_negative_time(paper_ensemble, paper_couplings):
    with pytest.raises(ValueError):
        g1(paper_ensemble, paper_couplings, 1.0, -1.0)


def test_g3_symmetries(paper_ensemble, paper_couplings):
    times = np.linspace(0, 2, 9)
    for phi3 in (0.3, 1.56, 2.85, 4.0):
        a = g3_numerical(paper_ensemble, paper_couplings, PHI1, PHI2, phi3, times)
        b = g3_numerical(paper_ensemble, paper_couplings, PHI2, PHI1, phi3, times)
        c = g3_numerical(paper_ensemble, paper_couplings, -PHI1, -PHI2, -phi3, times)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)
        np.testing.assert_allclose(a, c, rtol=0, atol=1e-12)
        assert np.all(a >= -1e-12)


def test_subradiant_amplitude_linear_in_separation():
    def c_ag(r12):
        ens = AtomEnsemble([(0, 0), (r12, 0), (4, 0)])
        return abs(detection_coefficients(ens, PHI1, PHI2).c_Ag)

    eps = np.array([1 / 100, 1 / 200, 1 / 400, 1 / 800])
    dev = np.array([abs(c_ag(e) / c_ag(e / 2) - 2.0) for e in eps])
    # first-order correction: the deviation halves with the separation
    np.testing.assert_allclose(dev[1:] / dev[:-1], 0.5, rtol=0.15)
    assert np.all(dev[1:] < 0.02)
    assert c_ag(1e-6) / 1e-6 == pytest.approx(c_ag(2e-6) / 2e-6, rel=1e-5)


def test_birth_and_death_true_zero(paper_ensemble, paper_couplings):
    """With no antisymmetric amplitude, G3 can touch zero at a finite time."""
    grid = np.linspace(0, np.pi, 37)
    best = min(((abs(detection_coefficients(paper_ensemble, a, b).c_Ag), a, b)
                for a in grid for b in grid), key=lambda x: x[0])
    _, p1, p2 = best
    c = detection_coefficients(paper_ensemble, p1, p2)
    assert abs(c.c_Ag) < 1e-12
    cpl = find_pair(paper_couplings)
    gam, dg, dw = 1.0, cpl.delta_gamma, cpl.delta_omega

    def mode_amplitudes(phi3):
        # G3 ~ |a e^{-gamma t} + b e^{(i dOmega - gamma - dgamma) t}|^2 once c_Ag = 0
        ph = make_detector(paper_ensemble, phi3).phases
        a = c.c_Ge * np.exp(1j * (ph[2] - ph[0]))
        b = c.c_Sg * (1 + np.exp(1j * (ph[1] - ph[0]))) / np.sqrt(2)
        return a, b

    def t_equal(phi3):
        a, b = mode_amplitudes(phi3)
        return np.log(abs(b) / abs(a)) / dg

    def mismatch(phi3):
        a, b = mode_amplitudes(phi3)
        return np.angle(-b / a * np.exp(1j * dw * t_equal(phi3)))

    phis = np.linspace(0.05, np.pi - 0.05, 2000)
    ok = [t_equal(p) > 0 for p in phis]
    m = np.array([mismatch(p) for p in phis])
    roots = [brentq(mismatch, phis[i], phis[i + 1]) for i in range(len(phis) - 1)
             if ok[i] and ok[i + 1] and m[i] * m[i + 1] < 0 and abs(m[i] - m[i + 1]) < 1]
    assert roots
    phi3 = roots[0]
    t_star = t_equal(phi3)
    times = np.array([0.0, t_star - 0.05, t_star, t_star + 0.05])
    vals = g3_numerical(paper_ensemble, paper_couplings, p1, p2, phi3, times)
    assert t_star > 0
    assert vals[2] < 1e-10 * vals[0]
    assert vals[1] > vals[2] and vals[3] > vals[2]


def test_trace_validation():
    with pytest.raises(ValueError):
        CorrelationTrace(0.0, [0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        CorrelationTrace(0.0, [0.0, 1.0], [1.0])
