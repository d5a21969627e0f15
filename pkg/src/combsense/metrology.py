"""Phase-estimation uncertainty of the comb interferometer vs the standard
quantum limit, and quantum-advantage region scans.

Detector efficiency is deliberately absent from the moments here (the
photo-count module owns it); the moment formulas are per-pulse, unit
efficiency.  Cells where the count carries no phase information (sin Phi = 0)
get an infinite-uncertainty sentinel rather than an exception so region scans
stay total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .scenario import SensingScenario

VARIANCE_TOL = -1e-12


@dataclass(frozen=True)
class MetrologyInputs:
    """x = tanh(g eta), y = tanh(gtilde eta), and the operating phase."""

    x: float
    y: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.x < 1.0 and 0.0 <= self.y < 1.0):
            raise ValueError("require 0 <= x, y < 1")

    @property
    def mean_signal_photons(self) -> float:
        """sinh^2(gtilde eta) = y^2/(1-y^2)."""
        return self.y**2 / (1.0 - self.y**2)


def moments(inputs: MetrologyInputs) -> tuple[float, float, float]:
    """(mean, second moment, |d mean / d Phi|) of the idler photo-count.

    mean   = [2x^2/(1-x^2)] [1 + 2y(cos Phi - y)/(1 + y^2 - 2y cos Phi)]
    dphi   = 4x^2 y (1-y^2) |sin Phi| / [(1-x^2)(1 + y^2 - 2y cos Phi)^2]
    second = [(1+2x^2)/(1-x^2)] mean
    """
    x, y, phi = inputs.x, inputs.y, inputs.phi
    c = math.cos(phi)
    denom = 1.0 + y * y - 2.0 * y * c
    base = 2.0 * x * x / (1.0 - x * x)
    mean = base * (1.0 + 2.0 * y * (c - y) / denom)
    dphi = (4.0 * x * x * y * (1.0 - y * y) * abs(math.sin(phi))
            / ((1.0 - x * x) * denom * denom))
    second = (1.0 + 2.0 * x * x) / (1.0 - x * x) * mean
    return mean, second, dphi


def phase_uncertainty(inputs: MetrologyInputs) -> float:
    """Delta Phi = sqrt(<N^2> - <N>^2) / |d<N>/dPhi|; inf when the slope is 0."""
    mean, second, dphi = moments(inputs)
    variance = second - mean * mean
    if variance < VARIANCE_TOL:
        raise ArithmeticError(f"negative variance {variance:.3e}")
    if dphi == 0.0:
        return math.inf
    return math.sqrt(max(variance, 0.0)) / dphi


def sql_uncertainty(gtilde_eta: float) -> float:
    """Standard quantum limit 1/sqrt(N_s) with N_s = sinh^2(gtilde eta) mean
    photons in the signal pulse."""
    if gtilde_eta < 0:
        raise ValueError("gtilde_eta must be >= 0")
    if gtilde_eta == 0.0:
        return math.inf
    return 1.0 / math.sinh(gtilde_eta)


def advantage_ratio(g: float, channel_ratio: float, eta: float,
                    phi: float) -> float:
    """Delta Phi / Delta Phi_SQL for squeezing g through a channel with
    gtilde = channel_ratio * g, at comb weight eta.

    Total: cells where the uncertainty is undefined (zero slope, or the
    closed-form variance turning negative outside its positivity domain
    y <= 1/(1+4x^2)) come back as inf, i.e. `no demonstrable advantage`.
    """
    x = math.tanh(g * eta)
    y = math.tanh(channel_ratio * g * eta)
    try:
        dphi_q = phase_uncertainty(MetrologyInputs(x=x, y=y, phi=phi))
    except ArithmeticError:
        return math.inf
    dphi_sql = sql_uncertainty(channel_ratio * g * eta)
    if math.isinf(dphi_sql):
        return math.inf
    if math.isinf(dphi_q):
        return math.inf
    return dphi_q / dphi_sql


def advantage_region(phi_axis: Sequence[float], g_axis: Sequence[float],
                     scenario: "SensingScenario",
                     eta: float | None = None) -> np.ndarray:
    """Boolean matrix [i_phi, j_g]: does the interferometer beat the SQL?

    ``eta`` defaults to the scenario's central-tooth spectral weight; pass
    eta=1 for the flat-weight convention (the two conventions disagree near
    the advantage boundary, so scans expose both).  Infinite-uncertainty
    cells are False.
    """
    ratio = scenario.channel_ratio()
    eta_val = scenario.eta(scenario.tooth_index) if eta is None else eta
    out = np.zeros((len(phi_axis), len(g_axis)), dtype=bool)
    for i, phi in enumerate(phi_axis):
        for j, g in enumerate(g_axis):
            r = advantage_ratio(g, ratio, eta_val, phi)
            out[i, j] = math.isfinite(r) and r < 1.0
    return out


def advantage_vs_distance(d_axis: Sequence[float], squeezing_list: Sequence[float],
                          scenario: "SensingScenario", phi: float = math.pi / 4,
                          eta: float | None = None,
                          as_ratio: bool = False) -> np.ndarray:
    """Delta Phi_SQL - Delta Phi (or the ratio) per (distance, squeezing) cell.

    The channel ratio is re-derived per distance (1/d far-field law with the
    near-field cap), so shrinking returns show up as a shrinking advantage.
    """
    eta_val = scenario.eta(scenario.tooth_index) if eta is None else eta
    out = np.full((len(d_axis), len(squeezing_list)), np.nan)
    for i, d in enumerate(d_axis):
        ratio = scenario.channel_ratio(d=d)
        for j, g in enumerate(squeezing_list):
            x = math.tanh(g * eta_val)
            y = math.tanh(ratio * g * eta_val)
            try:
                dphi_q = phase_uncertainty(MetrologyInputs(x=x, y=y, phi=phi))
            except ArithmeticError:
                dphi_q = math.inf
            dphi_sql = sql_uncertainty(ratio * g * eta_val)
            if as_ratio:
                out[i, j] = dphi_q / dphi_sql if math.isfinite(dphi_q) else math.inf
            else:
                out[i, j] = (dphi_sql - dphi_q
                             if math.isfinite(dphi_q) and math.isfinite(dphi_sql)
                             else -math.inf)
    return out
