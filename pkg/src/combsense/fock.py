"""Truncated two-mode Fock-space states and brute-force traces.

Basis layout: the joint state of modes S and I at photon cutoff ``N`` lives
on a dense complex matrix of dimension (N+1)^2, flat index a*(N+1)+b for the
ket |a>_S |b>_I.

Two evaluation routes are provided for the transceiver observables:

* ``build_transceiver_density`` assembles the merged-basis density matrix
  exactly as written (amplitudes x^(n+p) y^q accumulated into |n+q, n+p>),
  which is the object the Wigner cross-checks run against.
* ``idler_moment_series`` sums the photo-count trace rule term by term,
  keeping the (n, p) registers diagonal and the reflected-mode coherences
  (q, q') unconstrained.  This is the summation that the closed forms in
  ``combsense.interference`` resum analytically, and it is the oracle used
  by the validation suite.

The two routes agree at gtilde = 0 but differ at finite gtilde by boundary
terms of the merged basis (the matrix trace is 1 + 2 sum_k (x^2 y)^k cos kPhi,
see ``transceiver_trace_formula``); the tests pin both behaviours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .interference import PhaseSet

HERMITICITY_TOL = 1e-12
AUTO_CUTOFF_CAP = 60


class ConvergenceError(ValueError):
    """A truncation cap cannot meet the requested tolerance."""


@dataclass(frozen=True)
class SqueezeParams:
    """Two-mode squeezing amplitude g >= 0 and phase phi_g (radians).
    The squeezing level is -10 log10 exp(-2g) dB."""

    g: float
    phi_g: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.g):
            raise ValueError("squeezing amplitude g must be finite")
        if self.g < 0:
            raise ValueError("squeezing amplitude g must be >= 0")

    @property
    def level_db(self) -> float:
        return -10.0 * math.log10(math.exp(-2.0 * self.g))


class TruncatedTwoModeState:
    """Density matrix of two bosonic modes in a cutoff Fock basis."""

    def __init__(self, cutoff: int, matrix: np.ndarray):
        dim = (cutoff + 1) ** 2
        if matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {matrix.shape} != ({dim}, {dim})")
        herm = np.max(np.abs(matrix - matrix.conj().T))
        if herm > HERMITICITY_TOL:
            raise ValueError(f"matrix not Hermitian (deviation {herm:.3e})")
        diag = np.diagonal(matrix)
        if np.min(diag.real) < -1e-12:
            raise ValueError("negative diagonal element")
        self.cutoff = cutoff
        self.matrix = matrix

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    def as_tensor(self) -> np.ndarray:
        """View with indices [a, b, a', b'] for |a,b><a',b'|."""
        d = self.dim
        return self.matrix.reshape(d, d, d, d)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        """Tr[rho^2], computed as the squared Frobenius norm (rho Hermitian)."""
        return float(np.sum(np.abs(self.matrix) ** 2))

    def populations(self) -> np.ndarray:
        """Diagonal P[a, b] = <a,b|rho|a,b> as a real (dim, dim) array."""
        d = self.dim
        return np.diagonal(self.matrix).real.reshape(d, d).copy()


def fock_basis_state(n_s: int, n_i: int, cutoff: int) -> TruncatedTwoModeState:
    """Pure |n_s, n_i><n_s, n_i| product Fock state."""
    if not (0 <= n_s <= cutoff and 0 <= n_i <= cutoff):
        raise ValueError("occupation outside cutoff")
    d = cutoff + 1
    m = np.zeros((d * d, d * d), dtype=complex)
    k = n_s * d + n_i
    m[k, k] = 1.0
    return TruncatedTwoModeState(cutoff, m)


def tmsv_pure_state(params: SqueezeParams, cutoff: int) -> TruncatedTwoModeState:
    """Two-mode squeezed vacuum |psi><psi| with <n,n|psi> ~ e^{i n phi_g} tanh^n g / cosh g,
    truncated at ``cutoff`` and renormalized."""
    if cutoff < 1:
        raise ValueError("cutoff too small")
    n = np.arange(cutoff + 1)
    amps = np.exp(1j * n * params.phi_g) * np.tanh(params.g) ** n / np.cosh(params.g)
    amps = amps / np.linalg.norm(amps)
    d = cutoff + 1
    psi = np.zeros(d * d, dtype=complex)
    psi[n * d + n] = amps
    return TruncatedTwoModeState(cutoff, np.outer(psi, psi.conj()))


def transceiver_amplitudes(x: float, y: float, phases: PhaseSet,
                           cutoff: int) -> np.ndarray:
    """Merged-basis amplitude table psi[A, B] of the transceiver state.

    psi[A, B] = (1-x^2) sqrt(1-y^2) *
        sum_{n,p,q >= 0, n+q=A, n+p=B} x^(n+p) y^q e^{i(n th_n + p th_p + q th_q)}
    with th_n = phi_S+phi_I+phi_g, th_p = phi_i+phi_g,
    th_q = phi_s+phi_r+phi_g+phi_xi.
    """
    if not (0.0 <= x < 1.0 and 0.0 <= y < 1.0):
        raise ValueError("series divergent: require 0 <= x, y < 1")
    th_n = phases.phi_S + phases.phi_I + phases.phi_g
    th_p = phases.phi_i + phases.phi_g
    th_q = phases.phi_s + phases.phi_r + phases.phi_g + phases.phi_xi
    d = cutoff + 1
    idx = np.arange(d)
    zx = (x * np.exp(1j * th_p)) ** idx          # p-register amplitudes x^p
    zq = (y * np.exp(1j * th_q)) ** idx          # q-register amplitudes y^q
    zn = (x * np.exp(1j * th_n)) ** idx          # n-register amplitudes x^n
    psi = np.zeros((d, d), dtype=complex)
    for n in range(d):
        # ket |n+q, n+p>: shift the outer product of the q and p chains
        block = np.outer(zq[: d - n], zx[: d - n]) * zn[n]
        psi[n:, n:] += block
    psi *= (1.0 - x * x) * math.sqrt(1.0 - y * y)
    return psi


def build_transceiver_density(x: float, y: float, phases: PhaseSet,
                              cutoff: int) -> TruncatedTwoModeState:
    """Transceiver density matrix in the merged dual-Fock basis.

    The state is the pure projector onto the amplitude table of
    ``transceiver_amplitudes``; expanding the projector reproduces the
    sextuple sum over (n, n', p, p', q, q') with weights x^(n+p+n'+p') y^(q+q')
    and prefactor (1-x^2)^2 (1-y^2).  Not renormalized: the truncation-free
    trace is ``transceiver_trace_formula`` (unity only at y=0).
    """
    if cutoff < 1:
        raise ValueError("cutoff too small")
    psi = transceiver_amplitudes(x, y, phases, cutoff).reshape(-1)
    return TruncatedTwoModeState(cutoff, np.outer(psi, psi.conj()))


def transceiver_trace_formula(x: float, y: float, phi: float,
                              terms: int = 200) -> float:
    """Exact trace of the untruncated merged-basis state:
    1 + 2 sum_{k>=1} (x^2 y)^k cos(k Phi)."""
    t = x * x * y
    k = np.arange(1, terms + 1)
    return float(1.0 + 2.0 * np.sum(t**k * np.cos(k * phi)))


def number_expectation(state: TruncatedTwoModeState, mode: str) -> float:
    """Tr[n_mode rho] for mode "S" or "I"."""
    pops = state.populations()
    n = np.arange(state.dim, dtype=float)
    if mode == "S":
        return float(np.sum(pops * n[:, None]))
    if mode == "I":
        return float(np.sum(pops * n[None, :]))
    raise ValueError(f"mode must be 'S' or 'I', got {mode!r}")


def second_moment(state: TruncatedTwoModeState, mode: str) -> float:
    """Tr[(n_mode)^2 rho]."""
    pops = state.populations()
    n2 = np.arange(state.dim, dtype=float) ** 2
    if mode == "S":
        return float(np.sum(pops * n2[:, None]))
    if mode == "I":
        return float(np.sum(pops * n2[None, :]))
    raise ValueError(f"mode must be 'S' or 'I', got {mode!r}")


def truncation_tail(x: float, y: float, cutoff: int) -> float:
    """Geometric-tail bound on the probability mass dropped at ``cutoff``:
    x^(2K)/(1-x^2) + y^(2K)/(1-y^2).  Monotone decreasing in the cutoff."""
    if not (0.0 <= x < 1.0 and 0.0 <= y < 1.0):
        raise ValueError("require 0 <= x, y < 1")
    tail = 0.0
    if x > 0.0:
        tail += x ** (2 * cutoff) / (1.0 - x * x)
    if y > 0.0:
        tail += y ** (2 * cutoff) / (1.0 - y * y)
    return tail


def auto_cutoff(x: float, y: float, tol: float = 1e-10,
                cap: int = AUTO_CUTOFF_CAP) -> int:
    """Smallest cutoff whose truncation tail is below ``tol``; errors when the
    cap (default 60) is insufficient."""
    for k in range(1, cap + 1):
        if truncation_tail(x, y, k) < tol:
            return k
    raise ConvergenceError(
        f"cutoff cap {cap} insufficient for x={x:.4g}, y={y:.4g} at tol={tol:.1e}")


def _series_cutoff(x: float, y: float, power: int, tol: float) -> int:
    """Index cutoff making the dropped series terms < tol (crude bound)."""
    k = 8
    while k < 512:
        xt = (2.0 * k) ** power * x ** (2 * k) / max((1.0 - x * x) ** 2, 1e-12)
        yt = y**k / max(1.0 - y, 1e-12)
        if xt + yt < tol:
            return k
        k += 8
    return 512


def idler_moment_series(x: float, y: float, phi: float, power: int = 1,
                        cutoff: int | None = None) -> float:
    """Brute-force idler moment <n_I^power> under the photo-count trace rule.

    Sums (1-x^2)^2 (1-y^2) * sum_{n,p<=K} (n+p)^power x^(2(n+p))
    * |sum_{q<=K} (y e^{i Phi})^q|^2 term by term.  power=0 gives the rule's
    trace (the interference Poisson kernel), 1 the photo-count, 2 the second
    moment.  Independent of the analytic resummation in ``interference``.
    """
    if not (0.0 <= x < 1.0 and 0.0 <= y < 1.0):
        raise ValueError("series divergent: require 0 <= x, y < 1")
    if power not in (0, 1, 2):
        raise ValueError("power must be 0, 1 or 2")
    k = cutoff if cutoff is not None else max(_series_cutoff(x, y, power, 1e-15), 64)
    n = np.arange(k + 1)
    xp = x ** (2.0 * n)
    tot = (n[:, None] + n[None, :]).astype(float)
    part_np = float(np.sum(tot**power * xp[:, None] * xp[None, :]))
    zq = (y * np.exp(1j * phi)) ** n
    part_q = float(np.abs(np.sum(zq)) ** 2)
    return (1.0 - x * x) ** 2 * (1.0 - y * y) * part_np * part_q
