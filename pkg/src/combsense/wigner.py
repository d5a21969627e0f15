"""Wigner quasi-probability functions of the transceiver and reference states.

Two independent evaluation routes are implemented and cross-checked:

* the analytic series for the transceiver state, with the phase-space kernel
  integrals reduced to derivative polynomials of exp(-4|alpha|^2) (a stable
  two-term recurrence, ``_derivative_table``);
* displaced-parity evaluation on a truncated Fock density matrix, via
  associated-Laguerre matrix elements of the displacement operator.

Normalization convention: 4/pi^2 for a two-mode Wigner function of unit
trace (vacuum peak (2/pi)^2).  An alternative 4/pi^4 constant appears in
some treatments of the same kernel; it does not integrate to one and is
exposed only for comparison.  The integral of the transceiver Wigner equals
the state's trace, which for the merged-basis state differs from one at
finite reflected squeezing; ``enforce`` hooks below renormalize numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .fock import (SqueezeParams, TruncatedTwoModeState,
                   transceiver_amplitudes, truncation_tail)
from .interference import PhaseSet

PREFACTOR_UNIT_NORM = 4.0 / math.pi**2
PREFACTOR_ALT = 4.0 / math.pi**4

DISPLACEMENT_TAIL_TOL = 1e-10
REALITY_TOL = 1e-10


class SeriesConvergenceError(RuntimeError):
    """Raised when a truncated phase-space evaluation cannot meet tolerance."""


@dataclass(frozen=True)
class PhaseSpacePoint:
    """Mode-S and mode-I phase-space coordinates (dimensionless)."""

    alpha: complex
    beta: complex

    @classmethod
    def from_quadratures(cls, x_s: float, y_s: float, x_i: float,
                         y_i: float) -> "PhaseSpacePoint":
        return cls(alpha=(x_s + 1j * y_s) / math.sqrt(2.0),
                   beta=(x_i + 1j * y_i) / math.sqrt(2.0))

    @classmethod
    def from_rotated(cls, x_plus: float, x_minus: float, y_plus: float = 0.0,
                     y_minus: float = 0.0) -> "PhaseSpacePoint":
        s = 1.0 / math.sqrt(2.0)
        return cls.from_quadratures(
            x_s=s * (x_plus + x_minus), y_s=s * (y_plus + y_minus),
            x_i=s * (x_plus - x_minus), y_i=s * (y_plus - y_minus))

    @property
    def x_s(self) -> float:
        return math.sqrt(2.0) * self.alpha.real

    @property
    def y_s(self) -> float:
        return math.sqrt(2.0) * self.alpha.imag

    @property
    def x_i(self) -> float:
        return math.sqrt(2.0) * self.beta.real

    @property
    def y_i(self) -> float:
        return math.sqrt(2.0) * self.beta.imag

    @property
    def x_plus(self) -> float:
        return (self.x_s + self.x_i) / math.sqrt(2.0)

    @property
    def x_minus(self) -> float:
        return (self.x_s - self.x_i) / math.sqrt(2.0)

    @property
    def y_plus(self) -> float:
        return (self.y_s + self.y_i) / math.sqrt(2.0)

    @property
    def y_minus(self) -> float:
        return (self.y_s - self.y_i) / math.sqrt(2.0)


def wigner_tmsv(point: PhaseSpacePoint, params: SqueezeParams,
                normalization: float = PREFACTOR_UNIT_NORM) -> float:
    """Closed-form two-mode squeezed vacuum Wigner function.

    W = N exp(-2|alpha cosh g - beta* sinh g e^{i phi_g}|^2)
          exp(-2|beta cosh g - alpha* sinh g e^{i phi_g}|^2).

    The relative sign in the second factor is fixed by the covariance matrix
    of the dual-Fock state (a printed variant with "-beta cosh g" cancels all
    cross terms, yielding an isotropic Gaussian at every squeezing phase);
    this form matches the displaced-parity oracle and squeezes along x_+ for
    phi_g = pi.
    """
    c, s = math.cosh(params.g), math.sinh(params.g)
    e = complex(math.cos(params.phi_g), math.sin(params.phi_g))
    t1 = point.alpha * c - np.conj(point.beta) * s * e
    t2 = point.beta * c - np.conj(point.alpha) * s * e
    return normalization * math.exp(-2.0 * (abs(t1) ** 2 + abs(t2) ** 2))


def _derivative_table(alpha: complex, order: int) -> np.ndarray:
    """H[j, k] with d_a^j d_a*^k exp(-4 a a*) = exp(-4|a|^2) H[j, k].

    Recurrence: H[0, k] = (-4 a)^k; H[j+1, k] = -4 a* H[j, k] - 4 k H[j, k-1].
    """
    h = np.zeros((order + 1, order + 1), dtype=complex)
    h[0, :] = (-4.0 * alpha) ** np.arange(order + 1)
    ac = -4.0 * np.conj(alpha)
    for j in range(order):
        h[j + 1, 0] = ac * h[j, 0]
        h[j + 1, 1:] = ac * h[j, 1:] - 4.0 * np.arange(1, order + 1) * h[j, :-1]
    return h


def _poisson_upper_tail(lam: float, n: int) -> float:
    """Bound on P[Poisson(lam) >= n]; used to detect displacement past cutoff."""
    if lam == 0.0:
        return 0.0
    if n <= lam + 1:
        return 1.0
    log_t = -lam + n * math.log(lam) - float(gammaln(n + 1))
    return math.exp(log_t) / (1.0 - lam / (n + 1))


def _check_displacement(alpha: complex, beta: complex, dim: int) -> None:
    worst = max(_poisson_upper_tail(abs(alpha) ** 2, dim),
                _poisson_upper_tail(abs(beta) ** 2, dim))
    if worst > DISPLACEMENT_TAIL_TOL:
        raise SeriesConvergenceError(
            f"displacement |alpha|={abs(alpha):.3g}, |beta|={abs(beta):.3g} "
            f"pushes weight past the cutoff {dim - 1} (tail estimate {worst:.2e})")


def _series_from_amplitudes(psi: np.ndarray, alpha: complex, beta: complex,
                            normalization: float) -> float:
    dim = psi.shape[0]
    _check_displacement(alpha, beta, dim)
    idx = np.arange(dim)
    u = (-0.5) ** idx * np.exp(-0.5 * gammaln(idx + 1.0))
    pt = psi * u[:, None] * u[None, :]
    ha = _derivative_table(alpha, dim - 1)
    hb = _derivative_table(beta, dim - 1)
    val = np.einsum("AB,CD,AC,BD->", pt, pt.conj(), ha, hb, optimize=True)
    if abs(val.imag) > REALITY_TOL * max(1.0, abs(val.real)):
        raise SeriesConvergenceError(
            f"series produced imaginary residue {val.imag:.2e}")
    r2 = abs(alpha) ** 2 + abs(beta) ** 2
    return normalization * math.exp(-2.0 * r2) * val.real


def wigner_transceiver_series(point: PhaseSpacePoint, x: float, y: float,
                              phases: PhaseSet, term_cutoff: int,
                              normalization: float = PREFACTOR_UNIT_NORM) -> float:
    """Analytic series for the transceiver Wigner function.

    Evaluates the sextuple sum over (n, n', p, p', q, q') with the kernel
    integrals expanded into derivative polynomials of exp(-4(|a|^2+|b|^2)).
    The phase convention matches ``fock.build_transceiver_density`` so this
    equals the displaced-parity evaluation of that state.
    """
    tail = truncation_tail(x, y, term_cutoff)
    if tail > 1e-10:
        raise SeriesConvergenceError(
            f"series not converged at cutoff {term_cutoff}: tail estimate {tail:.2e}")
    psi = transceiver_amplitudes(x, y, phases, term_cutoff)
    return _series_from_amplitudes(psi, point.alpha, point.beta, normalization)


def displacement_matrix(alpha: complex, dim: int) -> np.ndarray:
    """Fock matrix <m|D(alpha)|n> via associated Laguerre polynomials."""
    m = np.arange(dim)[:, None]
    n = np.arange(dim)[None, :]
    aa = abs(alpha) ** 2
    lower = np.minimum(m, n)
    diff = np.abs(m - n)
    lag = eval_genlaguerre(lower, diff, aa)
    logmag = 0.5 * (gammaln(lower + 1.0) - gammaln(lower + diff + 1.0)) - aa / 2.0
    base = np.where(m >= n, alpha, -np.conj(alpha)) ** diff
    return np.exp(logmag) * base * lag


def wigner_from_density(state: TruncatedTwoModeState,
                        point: PhaseSpacePoint) -> float:
    """Displaced-parity Wigner value (2/pi)^2 Tr[rho D Pi D^dagger] per mode."""
    dim = state.dim
    _check_displacement(point.alpha, point.beta, dim)
    parity = (-1.0) ** np.arange(dim)
    ds = displacement_matrix(point.alpha, dim)
    di = displacement_matrix(point.beta, dim)
    ms = (ds * parity[None, :]) @ ds.conj().T
    mi = (di * parity[None, :]) @ di.conj().T
    rho = state.as_tensor()
    val = np.einsum("ABCD,CA,DB->", rho, ms, mi, optimize=True)
    if abs(val.imag) > REALITY_TOL * max(1.0, abs(val.real)):
        raise SeriesConvergenceError(
            f"parity evaluation produced imaginary residue {val.imag:.2e}")
    return (2.0 / math.pi) ** 2 * val.real


@dataclass(frozen=True)
class GridAxes:
    """Axis specs for the plotted (x_+, x_-) plane; the remaining two
    rotated quadratures are held fixed (default 0, the plane plotted in
    practice)."""

    x_plus: tuple[float, float, int]
    x_minus: tuple[float, float, int]
    y_plus: float = 0.0
    y_minus: float = 0.0

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        lo1, hi1, n1 = self.x_plus
        lo2, hi2, n2 = self.x_minus
        if n1 < 2 or n2 < 2:
            raise ValueError("grid axes need at least 2 points")
        return np.linspace(lo1, hi1, n1), np.linspace(lo2, hi2, n2)


@dataclass(frozen=True)
class WignerGrid:
    axes: GridAxes
    values: np.ndarray  # shape (n_plus, n_minus), real

    def rows(self):
        """(x_plus, x_minus, w) triples in deterministic row-major order."""
        xp, xm = self.axes.points()
        for i, a in enumerate(xp):
            for j, b in enumerate(xm):
                yield float(a), float(b), float(self.values[i, j])


def wigner_grid(axes: GridAxes,
                evaluate: Callable[[PhaseSpacePoint], float]) -> WignerGrid:
    """Fill the grid with the selected Wigner evaluator."""
    xp, xm = axes.points()
    values = np.empty((xp.size, xm.size))
    for i, a in enumerate(xp):
        for j, b in enumerate(xm):
            point = PhaseSpacePoint.from_rotated(a, b, axes.y_plus, axes.y_minus)
            values[i, j] = evaluate(point)
    if not np.all(np.isfinite(values)):
        raise SeriesConvergenceError("non-finite Wigner value on grid")
    return WignerGrid(axes=axes, values=values)


def normalization_quadrature_gaussian(params: SqueezeParams, n: int = 33,
                                      sigmas: float = 6.0) -> float:
    """4-D trapezoid quadrature of the closed-form TMSV Wigner function.

    The mesh lives in the rotated quadratures (x_+, x_-, y_+, y_-), where the
    state's principal axes lie for phi_g in {0, pi} (and trivially for the
    vacuum); each axis gets a window of +-sigmas of its own standard
    deviation so squeezed directions stay resolved.
    """
    if params.g > 0.0 and params.phi_g not in (0.0, math.pi):
        raise ValueError("rotated-mesh quadrature assumes phi_g in {0, pi}")
    wide = math.exp(params.g) / math.sqrt(2.0)
    narrow = math.exp(-params.g) / math.sqrt(2.0)
    if params.phi_g == math.pi:
        stds = (narrow, wide, wide, narrow)  # (x_+, x_-, y_+, y_-)
    else:
        stds = (wide, narrow, narrow, wide)
    axes = [np.linspace(-sigmas * s, sigmas * s, n) for s in stds]
    weights = [_trapezoid_weights(a) for a in axes]
    xp = axes[0][:, None, None, None]
    xm = axes[1][None, :, None, None]
    yp = axes[2][None, None, :, None]
    ym = axes[3][None, None, None, :]
    # alpha = (x_s + i y_s)/sqrt2 with x_s = (x_+ + x_-)/sqrt2, etc.
    alpha = ((xp + xm) + 1j * (yp + ym)) / 2.0
    beta = ((xp - xm) + 1j * (yp - ym)) / 2.0
    c, s = math.cosh(params.g), math.sinh(params.g)
    e = complex(math.cos(params.phi_g), math.sin(params.phi_g))
    t1 = alpha * c - np.conj(beta) * s * e
    t2 = beta * c - np.conj(alpha) * s * e
    wig = PREFACTOR_UNIT_NORM * np.exp(-2.0 * (np.abs(t1) ** 2 + np.abs(t2) ** 2))
    weight = (weights[0][:, None, None, None] * weights[1][None, :, None, None]
              * weights[2][None, None, :, None] * weights[3][None, None, None, :])
    # d^2 alpha d^2 beta = (1/4) dx_s dy_s dx_i dy_i; the +- rotation has unit Jacobian
    return 0.25 * float(np.sum(wig * weight))


def normalization_quadrature_series(x: float, y: float, phases: PhaseSet,
                                    term_cutoff: int, half_width: float = 6.0,
                                    n: int = 61) -> float:
    """Trapezoid quadrature of the transceiver series over a product window.

    Exploits the per-mode factorization of the series: the 4-D integral is a
    contraction of two 2-D quadrature tables.  Equals the state's trace up to
    window/truncation error.
    """
    psi = transceiver_amplitudes(x, y, phases, term_cutoff)
    dim = psi.shape[0]
    idx = np.arange(dim)
    u = (-0.5) ** idx * np.exp(-0.5 * gammaln(idx + 1.0))
    pt = psi * u[:, None] * u[None, :]
    axis = np.linspace(-half_width, half_width, n)
    w = _trapezoid_weights(axis)
    q_table = np.zeros((dim, dim), dtype=complex)
    for i, xq in enumerate(axis):
        for j, yq in enumerate(axis):
            a = (xq + 1j * yq) / math.sqrt(2.0)
            q_table += (w[i] * w[j] * math.exp(-2.0 * abs(a) ** 2)) \
                * _derivative_table(a, dim - 1)
    q_table *= 0.5  # d^2 alpha = (1/2) dx dy
    val = np.einsum("AB,CD,AC,BD->", pt, pt.conj(), q_table, q_table,
                    optimize=True)
    return PREFACTOR_UNIT_NORM * float(val.real)


def _trapezoid_weights(axis: np.ndarray) -> np.ndarray:
    h = axis[1] - axis[0]
    w = np.full(axis.size, h)
    w[0] = w[-1] = h / 2.0
    return w
