"""Cross-validation suite behind the `validate` subcommand.

Each check compares an implementation route against an independent one
(closed form vs term-by-term series, analytic derivative vs finite
difference, lattice bookkeeping vs closed form, phase-space series vs
displaced parity) and reports a measured error against a tolerance.  A check
passes when measured < tolerance, so a zeroed tolerance fails every numeric
check.  Checks that are degenerate for the given scenario (e.g. g = 0) are
reported as skipped.  The suite is deterministic: fixed lattices everywhere,
no RNG, byte-identical reports on repeated runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock, interference, metrology, strobe, wigner
from .scenario import SensingScenario

DEFAULT_TOLERANCES = {
    "oracle-photocount-grid": 1e-8,
    "oracle-scenario-point": 1e-8,
    "oracle-second-moment": 1e-6,
    "perturbative-slope": 0.1,       # allowed deficit below the ideal slope 4
    "visibility-consistency": 1e-12,
    "photocount-nonnegative": 1e-15,
    "metrology-identity": 1e-12,
    "metrology-dphi-fd": 1e-6,
    "metrology-variance": 1e-12,
    "wigner-tmsv-oracle": 1e-6,
    "wigner-scenario": 1e-6,
    "wigner-normalization": 1e-3,
    "strobe-agreement": 1e-12,
    "link-chain-sanity": 0.5,        # violation count must stay at zero
}

ORACLE_GRID_LIMIT = math.tanh(0.6)


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # "PASS" | "FAIL" | "SKIP"
    measured: float | None = None
    tolerance: float | None = None
    detail: str = ""

    def line(self) -> str:
        if self.status == "SKIP":
            return f"SKIP {self.name:<26s} reason={self.detail}"
        extra = f" {self.detail}" if self.detail else ""
        return (f"{self.status} {self.name:<26s} "
                f"measured={self.measured:.3e} tol={self.tolerance:.3e}{extra}")


def _result(name: str, measured: float, tol: float,
            detail: str = "") -> CheckResult:
    ok = measured < tol
    return CheckResult(name, "PASS" if ok else "FAIL", measured, tol, detail)


def _lattice(n: int, dims: int) -> np.ndarray:
    """Deterministic low-discrepancy lattice on [0,1)^dims (seedless)."""
    gammas = [0.6180339887498949, 0.7548776662466927, 0.8191725133961645,
              0.8566748838545029, 0.8812714616335695][:dims]
    k = np.arange(1, n + 1)[:, None]
    return np.mod(k * np.asarray(gammas)[None, :], 1.0)


def check_oracle_grid(tol: float) -> CheckResult:
    xs = np.linspace(0.05, ORACLE_GRID_LIMIT, 5)
    ys = np.linspace(0.0, ORACLE_GRID_LIMIT, 5)
    phis = [0.0, math.pi / 3, 3 * math.pi / 4, 3 * math.pi / 2]
    worst = 0.0
    for x in xs:
        for y in ys:
            g_eta = math.atanh(x)
            gt_eta = math.atanh(y)
            for phi in phis:
                closed = interference.photocount(g_eta, gt_eta, phi, mu_d=0.9)
                oracle = 0.9 * fock.idler_moment_series(x, y, phi)
                worst = max(worst, abs(closed - oracle))
    return _result("oracle-photocount-grid", worst, tol, detail="points=100")


def check_oracle_scenario_point(scenario: SensingScenario, tol: float) -> CheckResult:
    if scenario.squeeze.g == 0.0:
        return CheckResult("oracle-scenario-point", "SKIP", detail="degenerate: g=0")
    x = math.tanh(scenario.g_eta())
    y = math.tanh(scenario.gtilde_eta())
    phi = scenario.phases_with_noise().total()
    closed = interference.photocount(scenario.g_eta(), scenario.gtilde_eta(), phi,
                                     mu_d=scenario.detector.mu_d)
    oracle = scenario.detector.mu_d * fock.idler_moment_series(x, y, phi)
    return _result("oracle-scenario-point", abs(closed - oracle), tol)


def check_oracle_second_moment(tol: float) -> CheckResult:
    worst = 0.0
    for x in (0.2, 0.4, ORACLE_GRID_LIMIT):
        ratio = (1.0 + 2.0 * x * x) / (1.0 - x * x)
        for y in (0.0, 0.3, 0.5):
            for phi in (0.0, 1.1, 2.7):
                m1 = fock.idler_moment_series(x, y, phi, power=1)
                m2 = fock.idler_moment_series(x, y, phi, power=2)
                worst = max(worst, abs(m2 / m1 - ratio) / ratio)
    return _result("oracle-second-moment", worst, tol)


def check_perturbative_slope(tol: float) -> CheckResult:
    gs = np.logspace(-3, -1, 9)
    r, phi, mu = 0.8, math.pi / 3, 0.9
    diffs = []
    for g in gs:
        closed = interference.photocount(g, g * r, phi, mu_d=mu)
        pert = interference.perturbative_photocount(g, 1.0, r, phi, mu_d=mu,
                                                    chopper_on=True)
        diffs.append(abs(closed - pert))
    slope = float(np.polyfit(np.log(gs), np.log(diffs), 1)[0])
    deficit = max(0.0, 4.0 - slope)
    return _result("perturbative-slope", deficit, tol,
                   detail=f"slope={slope:.4f}")


def check_visibility_consistency(tol: float) -> CheckResult:
    worst = 0.0
    for y in np.linspace(0.05, 0.9, 8):
        gt = math.atanh(y)
        n_max = interference.photocount(0.4, gt, 0.0)
        n_min = interference.photocount(0.4, gt, math.pi)
        ratio = (n_max - n_min) / (n_max + n_min)
        worst = max(worst, abs(interference.visibility(gt) - ratio))
    return _result("visibility-consistency", worst, tol)


def check_photocount_nonnegative(tol: float) -> CheckResult:
    pts = _lattice(2000, 5)
    worst = 0.0
    for u in pts:
        g_eta = 3.0 * u[0]
        gt_eta = 2.0 * u[1]
        phi = 2.0 * math.pi * u[2]
        n = interference.photocount(g_eta, gt_eta, phi, o_s=u[3], o_i=u[4])
        worst = max(worst, -n)
    return _result("photocount-nonnegative", worst, tol,
                   detail="(largest negative excursion)")


def check_metrology_identity(tol: float) -> CheckResult:
    worst = 0.0
    for x in (0.1, 0.33, 0.6, 0.9):
        ratio = (1.0 + 2.0 * x * x) / (1.0 - x * x)
        for y in (0.0, 0.2, 0.7):
            for phi in (0.0, 0.9, 2.2, math.pi):
                mean, second, _ = metrology.moments(
                    metrology.MetrologyInputs(x=x, y=y, phi=phi))
                worst = max(worst, abs(second - ratio * mean))
    return _result("metrology-identity", worst, tol)


def check_metrology_dphi_fd(tol: float) -> CheckResult:
    h = 1e-5
    worst = 0.0
    for x in (0.2, 0.5):
        for y in (0.15, 0.4):
            for phi in (0.4, math.pi / 3, 2.0, 2.8):
                _, _, dphi = metrology.moments(
                    metrology.MetrologyInputs(x=x, y=y, phi=phi))
                ge, gte = math.atanh(x), math.atanh(y)
                fd = (interference.photocount(ge, gte, phi + h)
                      - interference.photocount(ge, gte, phi - h)) / (2 * h)
                worst = max(worst, abs(dphi - abs(fd)) / abs(fd))
    return _result("metrology-dphi-fd", worst, tol, detail="relative")


def check_metrology_variance(tol: float) -> CheckResult:
    # sampled over the closed forms' variance-positivity domain
    # y <= 1/(1+4x^2); outside it the printed moment pair is inconsistent
    # (negative variance near Phi = 0) and the uncertainty is undefined
    pts = _lattice(10_000, 3)
    worst = 0.0
    for u in pts:
        x = 0.99 * u[0]
        inputs = metrology.MetrologyInputs(
            x=x, y=0.99 * u[1] / (1.0 + 4.0 * x * x), phi=2.0 * math.pi * u[2])
        mean, second, _ = metrology.moments(inputs)
        worst = max(worst, mean * mean - second)
    return _result("metrology-variance", worst, tol,
                   detail="(largest negative variance)")


def check_wigner_tmsv_oracle(tol: float) -> CheckResult:
    params = fock.SqueezeParams(g=1.0, phi_g=math.pi)
    state = fock.tmsv_pure_state(params, cutoff=40)
    worst = 0.0
    for xp in (-1.0, 0.0, 1.4):
        for xm in (-0.7, 0.8):
            point = wigner.PhaseSpacePoint.from_rotated(xp, xm)
            closed = wigner.wigner_tmsv(point, params)
            oracle = wigner.wigner_from_density(state, point)
            worst = max(worst, abs(closed - oracle))
    return _result("wigner-tmsv-oracle", worst, tol)


def check_wigner_scenario(scenario: SensingScenario, tol: float) -> CheckResult:
    if scenario.squeeze.g == 0.0:
        return CheckResult("wigner-scenario", "SKIP", detail="degenerate: g=0")
    x = math.tanh(scenario.g_eta())
    y = math.tanh(scenario.gtilde_eta())
    phases = scenario.phases_with_noise()
    # cutoff covers both the series tail and the grid's displacements
    cutoff = max(fock.auto_cutoff(x, y, tol=1e-12), 26)
    state = fock.build_transceiver_density(x, y, phases, cutoff)
    worst = 0.0
    for xp in np.linspace(-2.0, 2.0, 5):
        for xm in np.linspace(-2.0, 2.0, 5):
            point = wigner.PhaseSpacePoint.from_rotated(xp, xm)
            series = wigner.wigner_transceiver_series(point, x, y, phases, cutoff)
            oracle = wigner.wigner_from_density(state, point)
            worst = max(worst, abs(series - oracle))
    return _result("wigner-scenario", worst, tol, detail="grid=5x5")


def check_wigner_normalization(scenario: SensingScenario, tol: float) -> CheckResult:
    vac = wigner.normalization_quadrature_gaussian(fock.SqueezeParams(g=0.0))
    tmsv = wigner.normalization_quadrature_gaussian(
        fock.SqueezeParams(g=1.0, phi_g=math.pi))
    worst = max(abs(vac - 1.0), abs(tmsv - 1.0))
    if scenario.squeeze.g > 0.0:
        x = math.tanh(scenario.g_eta())
        y = math.tanh(scenario.gtilde_eta())
        phases = scenario.phases_with_noise()
        cutoff = max(fock.auto_cutoff(x, y, tol=1e-12), 12)
        total = wigner.normalization_quadrature_series(x, y, phases, cutoff)
        trace = fock.transceiver_trace_formula(x, y, phases.total())
        worst = max(worst, abs(total / trace - 1.0))
    return _result("wigner-normalization", worst, tol,
                   detail="(unit integral after trace normalization)")


def check_strobe_agreement(tol: float) -> CheckResult:
    config = strobe.LatticeConfig(target_position=25, total_steps=60)
    schedule = strobe.ChopperSchedule(p=1)
    g, r, psi = 0.05, 0.7, 0.9
    world = strobe.World(config, g=g, r=r)
    worst = 0.0
    gate_violations = 0
    for _ in range(config.total_steps):
        strobe.step(world, config, schedule)
        if world.step_index >= config.steady_step:
            detected = world.detections.get(world.step_index, [])
            merged = [rec for rec in detected if rec.species == "I_merged"]
            if not merged:
                gate_violations += 1
                continue
            retro = next(c for c in merged[0].components if c.species == "i")
            lattice = strobe.idler_photocount(world, g, r, psi)
            closed = interference.perturbative_photocount(
                g, 1.0, r, psi, chopper_on=retro.twin_chopped)
            worst = max(worst, abs(lattice - closed))
            reflected = any(c.species == "s_r"
                            for rec in detected if rec.species == "S_merged"
                            for c in rec.components)
            if reflected != retro.twin_chopped:
                gate_violations += 1
    if gate_violations:
        return CheckResult("strobe-agreement", "FAIL", float(gate_violations),
                           tol, detail="gating violations")
    return _result("strobe-agreement", worst, tol)


def check_link_chain(scenario: SensingScenario, tol: float) -> CheckResult:
    mu_coll = scenario.mu_coll()
    ell = scenario.ell()
    ratio = scenario.channel_ratio()
    violations = 0.0
    if not 0.0 < mu_coll <= 1.0:
        violations += 1.0
    if not 0.0 < ell <= 1.0:
        violations += 1.0
    if ratio > 1.0:  # gtilde must not exceed g
        violations += 1.0
    return _result("link-chain-sanity", violations, tol,
                   detail=f"mu_coll={mu_coll:.4f} ell={ell:.4f} ratio={ratio:.4f}")


def run_validation(scenario: SensingScenario,
                   tolerances: dict[str, float] | None = None) -> list[CheckResult]:
    tols = dict(DEFAULT_TOLERANCES)
    if tolerances:
        if "all" in tolerances:
            tols = {k: tolerances["all"] for k in tols}
        tols.update({k: v for k, v in tolerances.items() if k != "all"})
    return [
        check_oracle_grid(tols["oracle-photocount-grid"]),
        check_oracle_scenario_point(scenario, tols["oracle-scenario-point"]),
        check_oracle_second_moment(tols["oracle-second-moment"]),
        check_perturbative_slope(tols["perturbative-slope"]),
        check_visibility_consistency(tols["visibility-consistency"]),
        check_photocount_nonnegative(tols["photocount-nonnegative"]),
        check_metrology_identity(tols["metrology-identity"]),
        check_metrology_dphi_fd(tols["metrology-dphi-fd"]),
        check_metrology_variance(tols["metrology-variance"]),
        check_wigner_tmsv_oracle(tols["wigner-tmsv-oracle"]),
        check_wigner_scenario(scenario, tols["wigner-scenario"]),
        check_wigner_normalization(scenario, tols["wigner-normalization"]),
        check_strobe_agreement(tols["strobe-agreement"]),
        check_link_chain(scenario, tols["link-chain-sanity"]),
    ]


def report_lines(results: list[CheckResult]) -> list[str]:
    lines = [r.line() for r in results]
    passed = sum(r.status == "PASS" for r in results)
    failed = sum(r.status == "FAIL" for r in results)
    skipped = sum(r.status == "SKIP" for r in results)
    lines.append(f"{passed} passed, {failed} failed, {skipped} skipped")
    return lines
