import math

import numpy as np
import pytest
from scipy.linalg import expm

from combsense import fock, wigner
from combsense.interference import PhaseSet

SET20DB_X = math.tanh(2.3 * 0.2)        # g=2.3, eta=0.2
SET20DB_Y = math.tanh(1.2264 * 0.2)     # gtilde from the reference channel
SET20DB_PHASES = PhaseSet(phi_s=math.pi / 2, phi_g=math.pi)


def test_point_roundtrip():
    pt = wigner.PhaseSpacePoint.from_rotated(0.7, -1.2, 0.3, 0.9)
    back = wigner.PhaseSpacePoint.from_rotated(pt.x_plus, pt.x_minus,
                                               pt.y_plus, pt.y_minus)
    assert back.alpha == pytest.approx(pt.alpha, abs=1e-14)
    assert back.beta == pytest.approx(pt.beta, abs=1e-14)
    pt2 = wigner.PhaseSpacePoint.from_quadratures(pt.x_s, pt.y_s, pt.x_i, pt.y_i)
    assert pt2.alpha == pytest.approx(pt.alpha, abs=1e-14)


def test_wigner_tmsv_vacuum_peak():
    origin = wigner.PhaseSpacePoint(0.0, 0.0)
    val = wigner.wigner_tmsv(origin, fock.SqueezeParams(g=0.0))
    assert val == pytest.approx((2 / math.pi) ** 2, rel=1e-14)


def test_wigner_tmsv_squeezed_along_x_plus():
    # phi_g = pi squeezes x_+: W falls off faster along x_+ than along x_-
    params = fock.SqueezeParams(g=1.0, phi_g=math.pi)
    along_plus = wigner.wigner_tmsv(
        wigner.PhaseSpacePoint.from_rotated(1.0, 0.0), params)
    along_minus = wigner.wigner_tmsv(
        wigner.PhaseSpacePoint.from_rotated(0.0, 1.0), params)
    assert along_plus < along_minus
    # slice second moments follow the e^{-4g} anisotropy pattern
    xs = np.linspace(-12, 12, 3001)
    w_plus = [wigner.wigner_tmsv(wigner.PhaseSpacePoint.from_rotated(x, 0.0),
                                 params) for x in xs]
    w_minus = [wigner.wigner_tmsv(wigner.PhaseSpacePoint.from_rotated(0.0, x),
                                  params) for x in xs]
    m_plus = np.sum(xs**2 * w_plus) / np.sum(w_plus)
    m_minus = np.sum(xs**2 * w_minus) / np.sum(w_minus)
    assert m_plus / m_minus == pytest.approx(math.exp(-4.0), rel=1e-6)


def test_wigner_tmsv_matches_parity_oracle():
    params = fock.SqueezeParams(g=1.0, phi_g=math.pi)
    state = fock.tmsv_pure_state(params, cutoff=40)
    worst = 0.0
    for xp in np.linspace(-1.5, 1.5, 5):
        for xm in np.linspace(-1.5, 1.5, 5):
            pt = wigner.PhaseSpacePoint.from_rotated(xp, xm)
            worst = max(worst, abs(wigner.wigner_tmsv(pt, params)
                                   - wigner.wigner_from_density(state, pt)))
    assert worst < 1e-6


def test_wigner_tmsv_unit_normalization():
    assert wigner.normalization_quadrature_gaussian(
        fock.SqueezeParams(g=0.0)) == pytest.approx(1.0, abs=1e-3)
    assert wigner.normalization_quadrature_gaussian(
        fock.SqueezeParams(g=1.0, phi_g=math.pi)) == pytest.approx(1.0, abs=1e-3)


def test_parity_oracle_basics():
    origin = wigner.PhaseSpacePoint(0.0, 0.0)
    vac = fock.build_transceiver_density(0.0, 0.0, PhaseSet(), 6)
    assert wigner.wigner_from_density(vac, origin) == pytest.approx(
        (2 / math.pi) ** 2, rel=1e-12)
    one = fock.fock_basis_state(1, 0, cutoff=6)
    assert wigner.wigner_from_density(one, origin) < 0.0


def test_displacement_matrix_against_expm():
    dim = 40
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    for alpha in (0.4 + 0.3j, -0.9 + 0.1j):
        lag = wigner.displacement_matrix(alpha, dim)
        ref = expm(alpha * a.conj().T - np.conj(alpha) * a)
        assert np.max(np.abs(lag[:20, :20] - ref[:20, :20])) < 1e-10


def test_series_matches_parity_oracle_three_parameter_sets():
    sets = [
        (0.3, 0.15, PhaseSet(phi_s=0.4)),
        (SET20DB_X, SET20DB_Y, SET20DB_PHASES),
        (0.5, 0.3, PhaseSet(phi_i=1.0, phi_g=0.6, phi_r=-0.4)),
    ]
    for x, y, phases in sets:
        cutoff = max(fock.auto_cutoff(x, y, 1e-12), 26)
        state = fock.build_transceiver_density(x, y, phases, cutoff)
        worst = 0.0
        for xp in np.linspace(-1.8, 1.8, 5):
            for xm in np.linspace(-1.8, 1.8, 5):
                pt = wigner.PhaseSpacePoint.from_rotated(xp, xm)
                series = wigner.wigner_transceiver_series(pt, x, y, phases,
                                                          cutoff)
                oracle = wigner.wigner_from_density(state, pt)
                worst = max(worst, abs(series - oracle))
        assert worst < 1e-6


def test_series_vacuum_value():
    pt = wigner.PhaseSpacePoint(0.0, 0.0)
    val = wigner.wigner_transceiver_series(pt, 0.0, 0.0, PhaseSet(), 8)
    assert val == pytest.approx((2 / math.pi) ** 2, rel=1e-12)


def test_series_convergence_errors():
    pt = wigner.PhaseSpacePoint(0.0, 0.0)
    with pytest.raises(wigner.SeriesConvergenceError, match="tail"):
        wigner.wigner_transceiver_series(pt, 0.9, 0.1, PhaseSet(), 6)
    far = wigner.PhaseSpacePoint(9.0 + 0.0j, 0.0)
    with pytest.raises(wigner.SeriesConvergenceError, match="past the cutoff"):
        wigner.wigner_transceiver_series(far, 0.2, 0.1, PhaseSet(), 14)
    state = fock.build_transceiver_density(0.2, 0.1, PhaseSet(), 14)
    with pytest.raises(wigner.SeriesConvergenceError):
        wigner.wigner_from_density(state, far)


def test_transceiver_displaced_and_nongaussian():
    cutoff = max(fock.auto_cutoff(SET20DB_X, SET20DB_Y, 1e-12), 28)
    axes = wigner.GridAxes(x_plus=(-2.5, 2.5, 11), x_minus=(-2.5, 2.5, 11))
    grid = wigner.wigner_grid(axes, lambda pt: wigner.wigner_transceiver_series(
        pt, SET20DB_X, SET20DB_Y, SET20DB_PHASES, cutoff))
    peak = np.unravel_index(np.argmax(grid.values), grid.values.shape)
    assert peak != (5, 5)  # displaced from the origin
    # non-Gaussian: record (do not assert) the most negative value
    w_min = float(grid.values.min())
    assert math.isfinite(w_min)
    print(f"transceiver Wigner minimum on grid: {w_min:.3e}")


def test_vacuum_grid_symmetry():
    axes = wigner.GridAxes(x_plus=(-2.0, 2.0, 9), x_minus=(-2.0, 2.0, 9))
    grid = wigner.wigner_grid(axes, lambda pt: wigner.wigner_transceiver_series(
        pt, 0.0, 0.0, PhaseSet(), 26))
    vals = grid.values
    assert np.max(np.abs(vals - vals[::-1, :])) < 1e-12
    assert np.max(np.abs(vals - vals[:, ::-1])) < 1e-12
    assert np.max(np.abs(vals - vals.T)) < 1e-12


def test_series_normalization_equals_trace():
    x, y = 0.35, 0.2
    phases = PhaseSet(phi_s=0.8, phi_g=0.5)
    total = wigner.normalization_quadrature_series(x, y, phases, term_cutoff=16)
    trace = fock.transceiver_trace_formula(x, y, phases.total())
    assert total / trace == pytest.approx(1.0, abs=1e-3)


def test_grid_rows_deterministic_order():
    axes = wigner.GridAxes(x_plus=(0.0, 1.0, 2), x_minus=(0.0, 1.0, 2))
    grid = wigner.wigner_grid(axes, lambda pt: 1.0)
    rows = list(grid.rows())
    assert [r[:2] for r in rows] == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0),
                                     (1.0, 1.0)]


def _fd_weights(order, points):
    """Stencil weights for the order-th derivative on symmetric points."""
    import math as _math
    a = np.vander(points, increasing=True).T
    rhs = np.zeros(len(points))
    rhs[order] = _math.factorial(order)
    return np.linalg.solve(a, rhs)


def _mixed_fd(j, k, alpha, h):
    """Central-difference d_u^j d_v^k exp(-4 u v) at (alpha, conj(alpha)),
    treating u and v as independent variables, Richardson-extrapolated."""
    u0, v0 = alpha, np.conj(alpha)

    def stencil(order):
        half = order // 2 + 1
        pts = np.arange(-half, half + 1, dtype=float)
        return pts, _fd_weights(order, pts)

    pu, wu = stencil(j)
    pv, wv = stencil(k)

    def evaluate(step):
        us = u0 + pu * step
        vs = v0 + pv * step
        grid = np.exp(-4.0 * np.outer(us, vs))
        return (wu @ grid @ wv) / step ** (j + k)

    d1, d2 = evaluate(h), evaluate(h / 2)
    return (4.0 * d2 - d1) / 3.0


def test_derivative_table_against_finite_differences():
    # secondary check of the analytic derivative tables: central differences
    # on exp(-4 u v) with u, v treated as independent variables.  Step 1e-3
    # is roundoff-limited beyond total order 3 (eps/h^4 ~ 1e-4), so the
    # higher orders use a larger step; Richardson keeps truncation below it.
    for alpha in (0.3 + 0.2j, -0.5 + 0.1j):
        table = wigner._derivative_table(alpha, 6)
        gauss = math.exp(-4.0 * abs(alpha) ** 2)
        for j in range(7):
            for k in range(7):
                total = j + k
                if total > 6:
                    continue
                h, tol = (1e-3, 1e-6) if total <= 3 else (0.05, 1e-3)
                fd = _mixed_fd(j, k, alpha, h)
                analytic = table[j, k] * gauss
                assert abs(fd - analytic) <= tol * max(1.0, abs(analytic)), \
                    (j, k, alpha)


def test_alternative_prefactor_exposed():
    # the 4/pi^4 convention is exposed for comparison but is not
    # unit-normalized (off by the pi^2 the kernel integrals contribute)
    assert wigner.PREFACTOR_ALT == pytest.approx(4.0 / math.pi**4, rel=1e-15)
    assert wigner.PREFACTOR_UNIT_NORM / wigner.PREFACTOR_ALT \
        == pytest.approx(math.pi**2, rel=1e-13)
    origin = wigner.PhaseSpacePoint(0.0, 0.0)
    scaled = wigner.wigner_tmsv(origin, fock.SqueezeParams(0.0),
                                normalization=wigner.PREFACTOR_ALT)
    assert scaled == pytest.approx((2 / math.pi) ** 2 / math.pi**2, rel=1e-13)


def test_kernel_integral_reduction_by_quadrature():
    # third route: the per-mode kernel integral
    #   (1/pi) int d^2u e^{-|u|^2} e^{2(u* a - u a*)} (u*)^j u^k
    # evaluated by brute 2-D trapezoid, against its analytic reduction
    # (1/2)^j (-1/2)^k d_a^j d_a*^k e^{-4|a|^2} used by the series evaluator.
    axis = np.linspace(-6.0, 6.0, 121)
    w = np.gradient(axis)
    ur = axis[:, None]
    ui = axis[None, :]
    u = ur + 1j * ui
    weight = (w[:, None] * w[None, :]) * np.exp(-np.abs(u) ** 2) / math.pi
    for alpha in (0.4 + 0.3j, -0.7 + 0.1j):
        phase = np.exp(2.0 * (np.conj(u) * alpha - u * np.conj(alpha)))
        table = wigner._derivative_table(alpha, 4)
        gauss = math.exp(-4.0 * abs(alpha) ** 2)
        for j in range(5):
            for k in range(5):
                quad = np.sum(weight * phase * np.conj(u) ** j * u**k)
                analytic = (0.5**j) * ((-0.5) ** k) * table[j, k] * gauss
                assert abs(quad - analytic) < 1e-8, (j, k, alpha)
