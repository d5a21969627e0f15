"""Closed-form observables of the comb-interferometer transceiver.

Mean idler photo-counts, interference visibility, perturbative limits,
spectral weights of the comb teeth, renormalized squeezing of the returned
probe, propagation phases, and pulse overlaps.  Everything here is a pure
function of its arguments; the truncated-Fock cross-checks live in
``combsense.fock``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

C_LIGHT = 299_792_458.0  # m/s

# The perturbative count formula is a g << 1 expansion; above this the cubic
# truncation is no longer meaningful and a warning is emitted.
PERTURBATIVE_G_LIMIT = 0.3


@dataclass(frozen=True)
class CombSpec:
    """Frequency-comb geometry.

    lambda_c   center wavelength (m)
    omega_rep  angular repetition frequency (rad/s)
    tau        pulse width (s)
    teeth_m    index range half-width M; teeth run m = -M..M (2M+1 total)
    omega_ceo  carrier-envelope offset (rad/s); must be 0 for this protocol
    """

    lambda_c: float
    omega_rep: float
    tau: float
    teeth_m: int
    omega_ceo: float = 0.0

    def __post_init__(self):
        if self.lambda_c <= 0:
            raise ValueError("lambda_c must be positive")
        if self.omega_rep <= 0:
            raise ValueError("omega_rep must be positive")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.teeth_m < 0:
            raise ValueError("teeth_m must be >= 0")
        if self.omega_ceo != 0.0:
            raise ValueError("omega_ceo must be 0 (zero carrier-envelope offset)")

    @property
    def omega_c(self) -> float:
        return 2.0 * math.pi * C_LIGHT / self.lambda_c

    def omega(self, m: int) -> float:
        """Angular frequency of tooth m."""
        self._check_tooth(m)
        return self.omega_c + m * self.omega_rep + self.omega_ceo

    def wavelength(self, m: int) -> float:
        return 2.0 * math.pi * C_LIGHT / self.omega(m)

    def _check_tooth(self, m: int) -> None:
        if abs(m) > self.teeth_m:
            raise ValueError(f"tooth index {m} outside -{self.teeth_m}..{self.teeth_m}")


def spectral_weight(m: int, comb: CombSpec) -> float:
    """Gaussian spectral weight eta_m of comb tooth m.

    eta_m = exp(-m^2 w_rep^2 tau^2 / 4) normalized over the symmetric range
    m = -M..M so the weights sum to one.  (Normalizing over m = 1..M cannot
    reproduce eta_0 ~ 0.2 for an 11-tooth comb; the symmetric sum gives 0.222.)
    """
    comb._check_tooth(m)
    return float(_weights(comb)[m + comb.teeth_m])


def spectral_weights(comb: CombSpec) -> np.ndarray:
    """All eta_m for m = -M..M, in index order."""
    return _weights(comb)


def _weights(comb: CombSpec) -> np.ndarray:
    m = np.arange(-comb.teeth_m, comb.teeth_m + 1)
    w = np.exp(-(m.astype(float) ** 2) * comb.omega_rep**2 * comb.tau**2 / 4.0)
    return w / w.sum()


@dataclass(frozen=True)
class PhaseSet:
    """All phases that assemble into the interference phase.

    phi_s is the distance-dependent propagation phase of the probe signal;
    phi_i, phi_S, phi_I are local propagation phases; phi_r the target
    reflection phase; phi_xi the accumulated noise phase (an input, not
    derived); phi_g the squeezing phase.
    """

    phi_s: float = 0.0
    phi_i: float = 0.0
    phi_S: float = 0.0
    phi_I: float = 0.0
    phi_r: float = 0.0
    phi_xi: float = 0.0
    phi_g: float = 0.0

    def total(self) -> float:
        """Non-perturbative interference phase (includes noise and squeezing)."""
        return (
            self.phi_s + self.phi_i - self.phi_S - self.phi_I
            + self.phi_r + self.phi_xi + self.phi_g
        )

    def perturbative(self) -> float:
        """Perturbative interference phase (omits phi_xi and phi_g)."""
        return self.phi_s + self.phi_i - self.phi_S - self.phi_I + self.phi_r


@dataclass(frozen=True)
class Overlaps:
    """Spatiotemporal overlaps of the merged pulses at the two junctions."""

    o_s: float = 1.0
    o_i: float = 1.0
    tau_ii: float = 0.0   # delay between the two idler pulses (s)
    tau_isr: float = 0.0  # delay between idler and reflected signal (s)
    tau_srs: float = 0.0  # delay between reflected and new signal (s)
    sigma_t: float = 1.0

    def __post_init__(self):
        for name in ("o_s", "o_i"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.sigma_t <= 0:
            raise ValueError("sigma_t must be positive")

    @classmethod
    def from_delays(cls, tau_ii: float, tau_srs: float, sigma_t: float,
                    tau_isr: float = 0.0) -> "Overlaps":
        """Derive Gaussian overlaps from pulse time delays."""
        return cls(
            o_s=overlap_from_delay(tau_srs, sigma_t),
            o_i=overlap_from_delay(tau_ii, sigma_t),
            tau_ii=tau_ii, tau_isr=tau_isr, tau_srs=tau_srs, sigma_t=sigma_t,
        )


@dataclass(frozen=True)
class DetectorSpec:
    """Detection and collection efficiencies; mu_coll=None means `derive it
    from the beam geometry` (see linkbudget.collection_efficiency)."""

    mu_d: float
    mu_coll: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.mu_d <= 1.0:
            raise ValueError("mu_d must be in [0, 1]")
        if self.mu_coll is not None and not 0.0 <= self.mu_coll <= 1.0:
            raise ValueError("mu_coll must be in [0, 1]")


@dataclass(frozen=True)
class PathIdentityFidelity:
    """Mode-matching coefficients of the two merge junctions; perfect
    alignment is t_x = t_y = 1.  Imperfect matching leaks amplitude into
    orthogonal dummy modes and is folded into the interference term as
    multiplicative |t_x|, |t_y| factors on the overlaps."""

    t_x: complex = 1.0 + 0.0j
    t_y: complex = 1.0 + 0.0j

    def __post_init__(self):
        if abs(self.t_x) > 1.0 + 1e-12 or abs(self.t_y) > 1.0 + 1e-12:
            raise ValueError("|t_x| and |t_y| must be <= 1")

    def effective_overlaps(self, o_s: float, o_i: float) -> tuple[float, float]:
        return abs(self.t_x) * o_s, abs(self.t_y) * o_i


def renormalized_squeezing(g: float, det: DetectorSpec, r: float, ell: float,
                           z0: float, d: float) -> float:
    """Renormalized squeezing amplitude of the returned probe.

    gtilde = g * mu_coll * r * ell * z0/d, capped at g: the 1/d law is a
    far-field result and the returned squeezing cannot exceed the transmitted
    one, so for short ranges the total renormalization factor saturates at 1
    (a distance-independent plateau as d -> 0).
    """
    if d <= 0:
        raise ValueError("distance d must be positive")
    if det.mu_coll is None:
        raise ValueError("DetectorSpec.mu_coll is unset; compute it from the beam first")
    factor = det.mu_coll * r * ell * z0 / d
    return g * min(factor, 1.0)


def photocount(g_eta: float, gtilde_eta: float, phi: float,
               o_s: float = 1.0, o_i: float = 1.0, mu_d: float = 1.0) -> float:
    """Mean idler photo-count of the transceiver (chopper on).

    N = 2 mu_d sinh^2(g eta) * {1 + 2 O_S O_I y (cos Phi - y) /
        (1 + y^2 - 2 y cos Phi)},  y = tanh(gtilde eta).
    """
    if g_eta < 0 or gtilde_eta < 0:
        raise ValueError("squeezing amplitudes must be >= 0")
    y = math.tanh(gtilde_eta)
    c = math.cos(phi)
    bracket = 1.0 + 2.0 * o_s * o_i * y * (c - y) / (1.0 + y * y - 2.0 * y * c)
    return 2.0 * mu_d * math.sinh(g_eta) ** 2 * bracket


def baseline_photocount(g_eta: float, mu_d: float = 1.0) -> float:
    """Chopper-off photo-count baseline 2 mu_d sinh^2(g eta)."""
    if g_eta < 0:
        raise ValueError("g_eta must be >= 0")
    return 2.0 * mu_d * math.sinh(g_eta) ** 2


def visibility(gtilde_eta: float, o_s: float = 1.0, o_i: float = 1.0) -> float:
    """Fringe visibility V = 2 O y / (1 + O y^2), O = O_S O_I, y = tanh(gtilde eta).

    Coincides with (N_max - N_min)/(N_max + N_min) of `photocount` at O = 1;
    for O < 1 the two printed formulas differ at O(y^2 (1-O)).
    """
    if gtilde_eta < 0:
        raise ValueError("gtilde_eta must be >= 0")
    y = math.tanh(gtilde_eta)
    o = o_s * o_i
    return 2.0 * o * y / (1.0 + o * y * y)


def perturbative_photocount(g: float, eta: float, r: float, psi: float,
                            o_s: float = 1.0, o_i: float = 1.0,
                            mu_d: float = 1.0, chopper_on: bool = True) -> float:
    """Low-gain photo-count: 2 mu_d g^2 eta^2, plus the induced-coherence term
    4 O_S O_I mu_d g^3 eta^3 r cos(Psi) when the chopper is on."""
    if g >= PERTURBATIVE_G_LIMIT:
        warnings.warn(
            f"perturbative_photocount called with g={g:.3g} >= {PERTURBATIVE_G_LIMIT}; "
            "the cubic truncation is unreliable here", stacklevel=2)
    n = 2.0 * mu_d * g * g * eta * eta
    if chopper_on:
        n += 4.0 * o_s * o_i * mu_d * g**3 * eta**3 * r * math.cos(psi)
    return n


def propagation_phase(omega: float, d: float, refractive_profile=None,
                      panels: int = 1000) -> float:
    """Round-trip propagation phase 2 w d / c, optionally with a
    height-dependent refractive index: (2 w / c) * integral_0^d n(z) dz
    (trapezoid quadrature, >= 1000 panels)."""
    if d < 0:
        raise ValueError("distance must be >= 0")
    if refractive_profile is None or d == 0.0:
        return 2.0 * omega * d / C_LIGHT
    z = np.linspace(0.0, d, max(panels, 1000) + 1)
    n = np.asarray([refractive_profile(zi) for zi in z], dtype=float)
    return 2.0 * omega / C_LIGHT * float(np.trapezoid(n, z))


def overlap_from_delay(delay: float, sigma_t: float) -> float:
    """Gaussian pulse overlap exp(-delay^2 / sigma_t^2)."""
    if sigma_t <= 0:
        raise ValueError("sigma_t must be positive")
    return math.exp(-(delay / sigma_t) ** 2)


def count_rate(n_per_pulse: float, pulse_rate: float, duty_cycle: float) -> float:
    """Photo-count rate in 1/s for a pulse train with the given duty cycle."""
    if not 0.0 <= duty_cycle <= 1.0:
        raise ValueError("duty_cycle must be in [0, 1]")
    return n_per_pulse * pulse_rate * duty_cycle


def strong_squeezing_asymptotics(g_eta: float, gtilde_eta: float) -> tuple[float, float]:
    """Large-squeezing scales: (e^{2 g eta}/2 photo-count proxy,
    1 - 2 e^{-4 gtilde eta} visibility asymptote).  For ratio tests only."""
    return math.exp(2.0 * g_eta) / 2.0, 1.0 - 2.0 * math.exp(-4.0 * gtilde_eta)
