"""Gaussian-beam diffraction, target return, atmospheric attenuation, and
Kolmogorov turbulence point estimates.

Converts physical scenario parameters into the quantities the interference
formulas consume: the collection efficiency, the round-trip attenuation, and
the Rayleigh-range geometry behind the renormalized squeezing amplitude.
Turbulence numbers are standalone estimates; they do not feed back into the
squeezing chain.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

QUADRATURE_PANELS = 1000


@dataclass(frozen=True)
class BeamSpec:
    """Gaussian beam: waist w0 and wavelength (both m)."""

    w0: float
    wavelength: float

    def __post_init__(self):
        if self.w0 <= 0 or self.wavelength <= 0:
            raise ValueError("w0 and wavelength must be positive")

    @property
    def rayleigh_range(self) -> float:
        """z0 = pi w0^2 / lambda."""
        return math.pi * self.w0**2 / self.wavelength

    @property
    def divergence(self) -> float:
        """Far-field half-angle theta = lambda / (pi w0)."""
        return self.wavelength / (math.pi * self.w0)


@dataclass(frozen=True)
class TargetSpec:
    """Target at distance d with amplitude reflection coefficient r e^{i phi_r}
    and geometric cross section (m^2)."""

    d: float
    r: float
    phi_r: float = 0.0
    cross_section: float = math.inf

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("target distance must be positive")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError("reflection amplitude r must be in [0, 1]")
        if self.cross_section < 0:
            raise ValueError("cross_section must be >= 0")

    @classmethod
    def from_reflectance(cls, d: float, r_squared: float, phi_r: float = 0.0,
                         cross_section: float = math.inf) -> "TargetSpec":
        if not 0.0 <= r_squared <= 1.0:
            raise ValueError("reflectance r^2 must be in [0, 1]")
        return cls(d=d, r=math.sqrt(r_squared), phi_r=phi_r,
                   cross_section=cross_section)


@dataclass(frozen=True)
class AtmosphereSpec:
    """Atmospheric channel: either a round-trip scalar transmission ``ell``
    or an extinction profile alpha(z) in 1/m; optionally a Cn^2(z) profile
    (m^-2/3), a direct coherence diameter r0 (m), and the accumulated noise
    phase phi_xi (an input parameter of the model, never derived here)."""

    ell: float | None = None
    alpha_profile: Callable[[float], float] | None = None
    cn2_profile: Callable[[float], float] | None = None
    r0: float | None = None
    phi_xi: float = 0.0

    def __post_init__(self):
        if self.ell is not None and not 0.0 < self.ell <= 1.0:
            raise ValueError("round-trip transmission ell must be in (0, 1]")
        if self.r0 is not None and self.r0 <= 0:
            raise ValueError("r0 must be positive")


class Illumination(Enum):
    FULL = "FullIllumination"
    PARTIAL = "PartialIllumination"


def beam_radius(z: float, beam: BeamSpec) -> float:
    """w(z) = w0 sqrt(1 + z^2/z0^2)."""
    if z < 0:
        raise ValueError("z must be >= 0")
    return beam.w0 * math.sqrt(1.0 + (z / beam.rayleigh_range) ** 2)


def return_field(x: float, y: float, beam: BeamSpec, target: TargetSpec,
                 e0: float = 1.0) -> complex:
    """Field at the station after reflection off the target and the trip back.

    r e^{i phi_r} E0 [w0/w(2d)] exp(-(x^2+y^2)/w^2(2d)) exp(i k (x^2+y^2)/2R(2d))
    with R(2d) = 2d + z0^2/(2d).  The on-axis amplitude falls off as 1/d in
    the far field.
    """
    d = target.d
    w2d = beam_radius(2.0 * d, beam)
    r2 = x * x + y * y
    k = 2.0 * math.pi / beam.wavelength
    radius_curv = 2.0 * d + beam.rayleigh_range**2 / (2.0 * d)
    amp = target.r * e0 * beam.w0 / w2d * math.exp(-r2 / w2d**2)
    return amp * complex(math.cos(target.phi_r + k * r2 / (2.0 * radius_curv)),
                         math.sin(target.phi_r + k * r2 / (2.0 * radius_curv)))


def collection_efficiency(beam: BeamSpec, target: TargetSpec) -> float:
    """mu_coll = [w0 / w'(0)]^2 for the reflected beam re-expanding from a
    waist w'0 = w(d) with its own Rayleigh range z'0 = pi w(d)^2 / lambda."""
    w_at_target = beam_radius(target.d, beam)
    z0p = math.pi * w_at_target**2 / beam.wavelength
    w_back = w_at_target * math.sqrt(1.0 + (target.d / z0p) ** 2)
    return (beam.w0 / w_back) ** 2


def roundtrip_attenuation(atm: AtmosphereSpec, d: float,
                          omega: float | None = None) -> float:
    """ell = exp[-2 * integral_0^d alpha(z) dz], or the scalar passthrough.

    The profile is integrated by trapezoid quadrature with >= 1000 panels.
    ``omega`` is accepted for profiles that need it (ignored by scalar input).
    """
    if d <= 0:
        raise ValueError("distance must be positive")
    if atm.alpha_profile is None:
        if atm.ell is None:
            raise ValueError("AtmosphereSpec has neither ell nor alpha_profile")
        return atm.ell
    z = np.linspace(0.0, d, QUADRATURE_PANELS + 1)
    alpha = np.asarray([atm.alpha_profile(zi) for zi in z], dtype=float)
    if np.min(alpha) < 0:
        raise ValueError("negative extinction coefficient in profile")
    return float(np.exp(-2.0 * np.trapezoid(alpha, z)))


def coherence_diameter(atm: AtmosphereSpec, wavelength: float,
                       d_i: float, d: float) -> float:
    """Coherence diameter r0 = 0.186 [lambda^2 / integral_{d_i}^{d} Cn^2 dz]^(3/5)."""
    if not d > d_i >= 0:
        raise ValueError("require d > d_i >= 0")
    if atm.cn2_profile is None:
        raise ValueError("AtmosphereSpec has no Cn2 profile")
    z = np.linspace(d_i, d, QUADRATURE_PANELS + 1)
    cn2 = np.asarray([atm.cn2_profile(zi) for zi in z], dtype=float)
    if np.min(cn2) < 0:
        raise ValueError("negative Cn2 in profile")
    integral = float(np.trapezoid(cn2, z))
    if integral == 0.0:
        raise ValueError("no turbulence: r0 undefined (infinite)")
    return 0.186 * (wavelength**2 / integral) ** 0.6


def beam_wander_rms(wavelength: float, d: float, w0: float, r0: float) -> float:
    """rms lateral beam displacement (lambda d / 2 w0) (w0/r0)^(5/6)."""
    _require_positive(wavelength=wavelength, d=d, w0=w0, r0=r0)
    return wavelength * d / (2.0 * w0) * (w0 / r0) ** (5.0 / 6.0)


def beam_spread_rms(wavelength: float, d: float, r0: float) -> float:
    """rms turbulent beam spread 2 lambda d / (pi r0), the worst case r0 << w0.

    Implements the formula as printed; note that at (1560 nm, 100 km,
    r0 = 5 cm) it evaluates to 1.99 m, not the 1.2 m sometimes quoted
    alongside it.
    """
    _require_positive(wavelength=wavelength, d=d, r0=r0)
    return 2.0 * wavelength * d / (math.pi * r0)


def illumination_check(beam: BeamSpec, target: TargetSpec) -> Illumination:
    """FULL when the target cross section covers the illumination spot
    pi w(d)^2 (closed boundary); the 1/d renormalized-squeezing law is only
    asserted for full illumination."""
    spot = math.pi * beam_radius(target.d, beam) ** 2
    return Illumination.FULL if target.cross_section >= spot else Illumination.PARTIAL


def spread_warning(beam: BeamSpec, target: TargetSpec, r0: float) -> bool:
    """Emit (and report) a warning when turbulent spread exceeds 10% of the
    diffraction-limited spot at the target."""
    spread = beam_spread_rms(beam.wavelength, target.d, r0)
    w_at_target = beam_radius(target.d, beam)
    if spread > 0.1 * w_at_target:
        warnings.warn(
            f"turbulent beam spread {spread:.3g} m exceeds 10% of the spot "
            f"radius {w_at_target:.3g} m; the 1/d squeezing law ignores it",
            stacklevel=2)
        return True
    return False


def load_profile_csv(path) -> Callable[[float], float]:
    """Two-column CSV (z_meters, value) -> linearly interpolated profile."""
    zs: list[float] = []
    vals: list[float] = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                z, v = float(row[0]), float(row[1])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"bad profile row {row!r} in {path}") from exc
            zs.append(z)
            vals.append(v)
    if len(zs) < 2:
        raise ValueError(f"profile {path} needs at least two samples")
    z_arr = np.asarray(zs)
    v_arr = np.asarray(vals)
    order = np.argsort(z_arr)
    z_arr, v_arr = z_arr[order], v_arr[order]

    def profile(z: float) -> float:
        return float(np.interp(z, z_arr, v_arr))

    return profile


def _require_positive(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if value <= 0:
            raise ValueError(f"{name} must be positive")
