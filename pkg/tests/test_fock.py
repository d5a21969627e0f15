import math

import numpy as np
import pytest

from combsense import fock
from combsense.interference import PhaseSet


def geometric_mean_photons(x, cutoff):
    """Renormalized truncated series sum(n x^2n)/sum(x^2n), the analytic
    value of the truncated squeezed-vacuum mean photon number."""
    n = np.arange(cutoff + 1)
    w = x ** (2 * n)
    return float(np.sum(n * w) / np.sum(w))


def test_tmsv_vacuum_limit():
    state = fock.tmsv_pure_state(fock.SqueezeParams(g=0.0, phi_g=1.3), cutoff=5)
    pops = state.populations()
    assert pops[0, 0] == pytest.approx(1.0, abs=1e-14)
    assert np.sum(pops) == pytest.approx(1.0, abs=1e-14)
    assert fock.number_expectation(state, "I") == pytest.approx(0.0, abs=1e-14)


def test_tmsv_is_normalized_pure_and_hermitian():
    state = fock.tmsv_pure_state(fock.SqueezeParams(g=1.0), cutoff=40)
    assert state.trace() == pytest.approx(1.0, abs=1e-12)
    assert state.purity() == pytest.approx(1.0, abs=1e-12)
    # Hermiticity is checked at construction; double-check here
    assert np.max(np.abs(state.matrix - state.matrix.conj().T)) < 1e-12


def test_tmsv_mean_photons_g1():
    state = fock.tmsv_pure_state(fock.SqueezeParams(g=1.0, phi_g=0.7), cutoff=40)
    expected = math.sinh(1.0) ** 2
    for mode in ("S", "I"):
        assert fock.number_expectation(state, mode) == pytest.approx(expected,
                                                                     abs=1e-6)


def test_tmsv_mean_photons_g17_truncation_limited():
    # At g=1.7 a cutoff of 40 is truncation-limited: the state's mean must
    # equal the renormalized truncated series exactly, and approach
    # sinh^2(1.7) = 6.9994 from below as the cutoff grows.
    x = math.tanh(1.7)
    state = fock.tmsv_pure_state(fock.SqueezeParams(g=1.7, phi_g=math.pi), 40)
    mean = fock.number_expectation(state, "I")
    assert mean == pytest.approx(geometric_mean_photons(x, 40), abs=1e-10)
    assert abs(mean - math.sinh(1.7) ** 2) < 0.25
    coarse = fock.number_expectation(
        fock.tmsv_pure_state(fock.SqueezeParams(g=1.7), 20), "I")
    assert abs(mean - math.sinh(1.7) ** 2) < abs(coarse - math.sinh(1.7) ** 2)


def test_tmsv_population_ratio():
    state = fock.tmsv_pure_state(fock.SqueezeParams(g=0.5), cutoff=2)
    pops = state.populations()
    assert pops[1, 1] / pops[0, 0] == pytest.approx(math.tanh(0.5) ** 2,
                                                    abs=1e-12)


def test_tmsv_off_diagonal_structure():
    state = fock.tmsv_pure_state(fock.SqueezeParams(g=0.8, phi_g=0.3), cutoff=6)
    t = state.as_tensor()
    for a in range(7):
        for b in range(7):
            for c in range(7):
                for d in range(7):
                    if (a == b and c == d):
                        continue
                    assert abs(t[a, b, c, d]) < 1e-14


def test_tmsv_errors():
    with pytest.raises(ValueError, match="cutoff too small"):
        fock.tmsv_pure_state(fock.SqueezeParams(g=0.5), cutoff=0)
    with pytest.raises(ValueError):
        fock.SqueezeParams(g=float("nan"))
    with pytest.raises(ValueError):
        fock.SqueezeParams(g=float("inf"))


def test_squeeze_level_db():
    assert fock.SqueezeParams(g=1.7).level_db == pytest.approx(14.77, abs=0.01)
    assert fock.SqueezeParams(g=2.3).level_db == pytest.approx(19.98, abs=0.01)


def test_fock_state_second_moment():
    state = fock.fock_basis_state(2, 0, cutoff=4)
    assert fock.second_moment(state, "S") == pytest.approx(4.0, abs=1e-14)
    assert fock.second_moment(state, "I") == pytest.approx(0.0, abs=1e-14)


def test_transceiver_vacuum_limit():
    state = fock.build_transceiver_density(0.0, 0.0, PhaseSet(), cutoff=4)
    pops = state.populations()
    assert pops[0, 0] == pytest.approx(1.0, abs=1e-14)
    assert fock.number_expectation(state, "I") == pytest.approx(0.0, abs=1e-14)


def test_transceiver_baseline_matches_geometric_sum():
    # y=0: thermal-like state with idler mean 2x^2/(1-x^2)
    x = math.tanh(0.34)
    state = fock.build_transceiver_density(x, 0.0, PhaseSet(), cutoff=30)
    assert state.trace() == pytest.approx(1.0, abs=1e-10)
    expected = 2 * x * x / (1 - x * x)
    assert fock.number_expectation(state, "I") == pytest.approx(expected,
                                                                abs=1e-9)
    # the signal mode holds half the photons at y=0
    assert fock.number_expectation(state, "S") == pytest.approx(expected / 2,
                                                                abs=1e-9)


def test_transceiver_trace_matches_analytic_formula():
    # The merged-basis matrix is not unit trace at y > 0; its exact trace is
    # 1 + 2 sum_k (x^2 y)^k cos(k Phi).
    x, y = math.tanh(0.34), math.tanh(0.2)
    for phi in (0.0, 1.1, math.pi):
        phases = PhaseSet(phi_s=phi)
        state = fock.build_transceiver_density(x, y, phases, cutoff=28)
        assert state.trace() == pytest.approx(
            fock.transceiver_trace_formula(x, y, phi), abs=1e-10)


def test_transceiver_populations_depend_only_on_total_phase():
    x, y = 0.4, 0.25
    total = 1.234
    variants = [
        PhaseSet(phi_s=total),
        PhaseSet(phi_s=0.5, phi_i=total - 0.5),
        PhaseSet(phi_s=2.0, phi_S=0.9, phi_I=2.0 - 0.9 - 0.4 - total, phi_r=-0.4),
        PhaseSet(phi_r=0.3, phi_xi=0.5, phi_g=total - 0.8),
    ]
    pops = [fock.build_transceiver_density(x, y, ph, 18).populations()
            for ph in variants]
    for ph in variants:
        assert ph.total() == pytest.approx(total, abs=1e-12)
    for p in pops[1:]:
        assert np.max(np.abs(p - pops[0])) < 1e-13


def test_transceiver_hermitian_and_positive_diagonal():
    state = fock.build_transceiver_density(0.5, 0.3, PhaseSet(phi_s=0.7), 16)
    assert np.min(np.diagonal(state.matrix).real) >= -1e-12
    assert fock.second_moment(state, "I") >= fock.number_expectation(state, "I") ** 2


def test_transceiver_divergence_error():
    with pytest.raises(ValueError, match="divergent"):
        fock.build_transceiver_density(1.0, 0.0, PhaseSet(), 10)
    with pytest.raises(ValueError, match="divergent"):
        fock.build_transceiver_density(0.3, 1.2, PhaseSet(), 10)


def test_truncation_tail():
    assert fock.truncation_tail(0.0, 0.0, 10) == 0.0
    bound = 0.5**40 / (1 - 0.25)
    assert 0.0 < fock.truncation_tail(0.5, 0.0, 20) <= bound * (1 + 1e-12)
    assert fock.truncation_tail(0.9, 0.0, 50) < fock.truncation_tail(0.9, 0.0, 5)
    with pytest.raises(ValueError):
        fock.truncation_tail(1.0, 0.0, 10)


def test_auto_cutoff():
    k = fock.auto_cutoff(0.3, 0.2)
    assert fock.truncation_tail(0.3, 0.2, k) < 1e-10
    assert fock.truncation_tail(0.3, 0.2, k - 1) >= 1e-10
    with pytest.raises(ValueError, match="insufficient"):
        fock.auto_cutoff(0.99, 0.0)


def test_idler_moment_series_matches_closed_form():
    # The series rule resums to the closed-form count; spot values from the
    # algebraic simplification at Phi = 0 and pi.
    x, y = math.tanh(0.34), math.tanh(0.2)
    base = 2 * x * x / (1 - x * x)
    assert fock.idler_moment_series(x, y, 0.0) == pytest.approx(
        base * (1 + y) / (1 - y), rel=1e-12)
    assert fock.idler_moment_series(x, y, math.pi) == pytest.approx(
        base * (1 - y) / (1 + y), rel=1e-12)
    # 0.3584 = 0.3226/0.9, the reference interference point
    assert fock.idler_moment_series(x, y, 0.0) == pytest.approx(0.3584, abs=2e-4)


def test_idler_moment_series_trace_rule_kernel():
    # power=0 exposes the rule's trace: the interference kernel
    # (1-y^2)/(1+y^2-2y cos Phi)
    x, y, phi = 0.45, 0.3, 0.9
    expected = (1 - y * y) / (1 + y * y - 2 * y * math.cos(phi))
    assert fock.idler_moment_series(x, y, phi, power=0) == pytest.approx(
        expected, rel=1e-12)


def test_idler_moment_series_second_moment_identity():
    for x in (0.2, 0.5):
        for y in (0.0, 0.35):
            for phi in (0.0, 1.3, 2.9):
                m1 = fock.idler_moment_series(x, y, phi, power=1)
                m2 = fock.idler_moment_series(x, y, phi, power=2)
                assert m2 / m1 == pytest.approx(
                    (1 + 2 * x * x) / (1 - x * x), rel=1e-12)


def test_merged_matrix_differs_from_series_rule_at_finite_y():
    # Documented boundary-term gap: the merged-basis matrix trace route and
    # the series rule coincide at y=0 but not at y>0 (the closed-form counts
    # follow the series rule).
    x, y = math.tanh(0.34), math.tanh(0.2)
    state0 = fock.build_transceiver_density(x, 0.0, PhaseSet(), 30)
    assert fock.number_expectation(state0, "I") == pytest.approx(
        fock.idler_moment_series(x, 0.0, 0.0), abs=1e-9)
    state = fock.build_transceiver_density(x, y, PhaseSet(), 30)
    matrix_route = fock.number_expectation(state, "I")
    series_route = fock.idler_moment_series(x, y, 0.0)
    assert abs(matrix_route - series_route) > 0.01


def test_transceiver_matrix_positive_semidefinite():
    state = fock.build_transceiver_density(0.45, 0.3, PhaseSet(phi_s=1.2), 9)
    eigs = np.linalg.eigvalsh(state.matrix)
    assert eigs.min() >= -1e-12
    # rank one: a pure projector up to normalization
    assert np.sum(eigs > 1e-10) == 1
