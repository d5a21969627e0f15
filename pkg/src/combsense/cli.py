"""Command-line interface.

Subcommands: photocount-sweep, visibility-map, wigner, metrology, strobe,
link-budget, validate.  All delimited output goes to stdout or --out; the
optional --figure renders the same rows to a PNG.  Exit codes: 0 success,
1 usage error, 2 validation failure, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import fock, interference, linkbudget, metrology, strobe, wigner
from .report import render_figure, write_csv
from .scenario import (ScenarioError, SensingScenario, load_scenario,
                       reference_scenario)
from .validate import DEFAULT_TOLERANCES, report_lines, run_validation

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3


class UsageError(ValueError):
    pass


def parse_range(text: str) -> np.ndarray:
    """LO:HI:N -> inclusive linspace with N points."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"range {text!r} is not LO:HI:N")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"range {text!r} is not LO:HI:N") from exc
    if n < 1:
        raise UsageError("range needs at least one point")
    return np.linspace(lo, hi, n)


def parse_grid(text: str) -> tuple[np.ndarray, np.ndarray]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"grid {text!r} is not LO:HI:N,LO:HI:N")
    return parse_range(parts[0]), parse_range(parts[1])


def _load(args) -> SensingScenario:
    if args.scenario is None:
        return reference_scenario()
    return load_scenario(args.scenario)


def _emit(args, header, rows, figure_kind: str | None) -> None:
    rows = list(rows)
    write_csv(header, rows, out=args.out)
    if getattr(args, "figure", None):
        if figure_kind is None:
            raise UsageError("this subcommand has no figure rendering")
        render_figure(figure_kind, header, rows, args.figure)


def cmd_photocount_sweep(args) -> int:
    scenario = _load(args)
    axis_values = parse_range(args.range)
    obs = scenario.overlaps
    mu_d = scenario.detector.mu_d
    phi0 = scenario.phases_with_noise().total()
    rows = []
    for v in axis_values:
        if args.axis == "distance":
            g_eta = scenario.g_eta()
            gt_eta = scenario.gtilde_eta(d=v * 1e3)
            phi = phi0
        elif args.axis == "phase":
            g_eta = scenario.g_eta()
            gt_eta = scenario.gtilde_eta()
            phi = v
        else:  # squeezing
            g_eta = v * scenario.eta()
            gt_eta = v * scenario.channel_ratio() * scenario.eta()
            phi = phi0
        count = interference.photocount(g_eta, gt_eta, phi, obs.o_s, obs.o_i, mu_d)
        n_max = interference.photocount(g_eta, gt_eta, 0.0, obs.o_s, obs.o_i, mu_d)
        n_min = interference.photocount(g_eta, gt_eta, math.pi, obs.o_s, obs.o_i, mu_d)
        rows.append((v, count, n_max, n_min,
                     interference.baseline_photocount(g_eta, mu_d),
                     interference.visibility(gt_eta, obs.o_s, obs.o_i)))
    axis_name = {"distance": "d_km", "phase": "phi", "squeezing": "g"}[args.axis]
    _emit(args, (axis_name, "count", "n_max", "n_min", "baseline", "visibility"),
          rows, "lines")
    return EXIT_OK


def cmd_visibility_map(args) -> int:
    scenario = _load(args)
    r2_axis, d_axis = parse_grid(args.grid)
    obs = scenario.overlaps
    rows = []
    for r2 in r2_axis:
        if not 0.0 <= r2 <= 1.0:
            raise UsageError("reflectance axis must stay in [0, 1]")
        for d_km in d_axis:
            gt_eta = scenario.gtilde_eta(d=d_km * 1e3, r=math.sqrt(r2))
            rows.append((r2, d_km,
                         interference.visibility(gt_eta, obs.o_s, obs.o_i)))
    _emit(args, ("reflectance", "d_km", "visibility"), rows, "heatmap")
    return EXIT_OK


def cmd_wigner(args) -> int:
    scenario = _load(args)
    xp_axis, xm_axis = parse_grid(args.grid)
    axes = wigner.GridAxes(
        x_plus=(float(xp_axis[0]), float(xp_axis[-1]), xp_axis.size),
        x_minus=(float(xm_axis[0]), float(xm_axis[-1]), xm_axis.size))
    if args.which == "tmsv":
        params = scenario.squeeze
        grid = wigner.wigner_grid(
            axes, lambda pt: wigner.wigner_tmsv(pt, params))
    else:
        x = math.tanh(scenario.g_eta())
        y = math.tanh(scenario.gtilde_eta())
        phases = scenario.phases_with_noise()
        span = max(abs(xp_axis).max(), abs(xm_axis).max())
        # capped: an out-of-range grid surfaces as a convergence error (exit 3)
        cutoff = min(max(fock.auto_cutoff(x, y, tol=1e-12),
                         _displacement_cutoff(span)), 48)
        grid = wigner.wigner_grid(
            axes,
            lambda pt: wigner.wigner_transceiver_series(pt, x, y, phases, cutoff))
        state = fock.build_transceiver_density(x, y, phases, cutoff)
        worst = 0.0
        for frac in (0.1, 0.3, 0.5, 0.7, 0.9):  # fixed, deterministic spots
            i = int(frac * (xp_axis.size - 1))
            j = int(frac * (xm_axis.size - 1))
            pt = wigner.PhaseSpacePoint.from_rotated(
                float(xp_axis[i]), float(xm_axis[j]))
            worst = max(worst, abs(grid.values[i, j]
                                   - wigner.wigner_from_density(state, pt)))
        if worst >= 1e-6:
            print(f"wigner spot-check failed: max deviation {worst:.3e}",
                  file=sys.stderr)
            return EXIT_VALIDATION
    _emit(args, ("x_plus", "x_minus", "w"), list(grid.rows()), "heatmap")
    return EXIT_OK


def _displacement_cutoff(span: float) -> int:
    """Photon cutoff comfortably above the largest grid displacement."""
    lam = span * span / 2.0  # |alpha|^2 at the grid corner
    return int(math.ceil(lam + 8.0 * math.sqrt(lam + 1.0) + 10.0))


def cmd_metrology(args) -> int:
    scenario = _load(args)
    eta = None if args.eta == "comb" else float(args.eta)
    if args.mode == "region":
        if not args.grid:
            raise UsageError("metrology --mode region needs --grid")
        phi_axis, g_axis = parse_grid(args.grid)
        region = metrology.advantage_region(phi_axis, g_axis, scenario, eta=eta)
        rows = [(phi, g, int(region[i, j]))
                for i, phi in enumerate(phi_axis)
                for j, g in enumerate(g_axis)]
        _emit(args, ("phi", "g", "advantage"), rows, "region")
    else:
        if not args.range:
            raise UsageError("metrology --mode distance needs --range")
        d_axis = parse_range(args.range) * 1e3
        squeezings = [float(s) for s in args.squeezing.split(",")]
        delta = metrology.advantage_vs_distance(
            d_axis, squeezings, scenario, phi=args.phi, eta=eta)
        rows = [(d / 1e3, g, delta[i, j])
                for i, d in enumerate(d_axis)
                for j, g in enumerate(squeezings)]
        _emit(args, ("d_km", "g", "delta"), rows, "heatmap")
    return EXIT_OK


def cmd_strobe(args) -> int:
    scenario = _load(args)
    config = strobe.LatticeConfig(target_position=args.target_position,
                                  total_steps=args.steps)
    schedule = None if args.chopper_p == 0 \
        else strobe.ChopperSchedule(p=args.chopper_p)
    dump_fh = open(args.dump, "w") if args.dump else None
    try:
        world = strobe.run(config, schedule, g=scenario.squeeze.g,
                           r=scenario.target.r, phi_r=scenario.target.phi_r,
                           dump=dump_fh)
    finally:
        if dump_fh:
            dump_fh.close()
    # find the most recent gated-on and gated-off detections
    gated: dict[bool, int] = {}
    for step_idx in sorted(world.detections, reverse=True):
        if step_idx < config.steady_step:
            break
        merged = [r for r in world.detections[step_idx]
                  if r.species == "I_merged"]
        if not merged:
            continue
        retro = next(c for c in merged[0].components if c.species == "i")
        gated.setdefault(retro.twin_chopped, step_idx)
        if len(gated) == 2 or schedule is None:
            break
    obs = scenario.overlaps
    rows = []
    for psi in parse_range(args.range):
        row = [psi]
        for flag in (True, False):
            if flag in gated:
                row.append(strobe.idler_photocount(
                    world, scenario.squeeze.g, scenario.target.r, psi,
                    obs.o_s, obs.o_i, scenario.detector.mu_d,
                    at_step=gated[flag]))
            else:
                row.append(float("nan"))
        rows.append(tuple(row))
    _emit(args, ("psi", "count_gated", "count_ungated"), rows, "lines")
    return EXIT_OK


def cmd_link_budget(args) -> int:
    scenario = _load(args)
    beam, target = scenario.beam, scenario.target
    z0 = beam.rayleigh_range
    w_d = linkbudget.beam_radius(target.d, beam)
    z0p = math.pi * w_d**2 / beam.wavelength
    w_back = w_d * math.sqrt(1.0 + (target.d / z0p) ** 2)
    eta0 = scenario.eta(0)
    gt = scenario.squeeze.g * scenario.channel_ratio()
    n_max = interference.photocount(
        scenario.g_eta(), scenario.gtilde_eta(), 0.0,
        scenario.overlaps.o_s, scenario.overlaps.o_i, scenario.detector.mu_d)
    rows = [
        ("rayleigh_range_m", z0),
        ("beam_radius_at_target_m", w_d),
        ("return_rayleigh_range_m", z0p),
        ("return_radius_at_station_m", w_back),
        ("collection_efficiency", scenario.mu_coll()),
        ("roundtrip_attenuation", scenario.ell()),
        ("eta0", eta0),
        ("g_eta0", scenario.squeeze.g * eta0),
        ("gtilde", gt),
        ("gtilde_eta0", gt * eta0),
        ("visibility", interference.visibility(
            scenario.gtilde_eta(), scenario.overlaps.o_s, scenario.overlaps.o_i)),
        ("n_max", n_max),
        ("count_rate_hz", interference.count_rate(
            n_max, scenario.comb.omega_rep / (4.0 * math.pi), 0.5)),
        ("illumination", linkbudget.illumination_check(beam, target).value),
    ]
    if scenario.atmosphere.r0 is not None:
        r0 = scenario.atmosphere.r0
        rows.append(("beam_wander_rms_m", linkbudget.beam_wander_rms(
            beam.wavelength, target.d, beam.w0, r0)))
        rows.append(("beam_spread_rms_m", linkbudget.beam_spread_rms(
            beam.wavelength, target.d, r0)))
    _emit(args, ("quantity", "value"), rows, None)
    return EXIT_OK


def cmd_validate(args) -> int:
    scenario = _load(args)
    overrides: dict[str, float] = {}
    for item in args.tolerance or []:
        if "=" not in item:
            raise UsageError(f"--tolerance {item!r} is not NAME=VALUE")
        name, value = item.split("=", 1)
        if name != "all" and name not in DEFAULT_TOLERANCES:
            raise UsageError(f"unknown tolerance {name!r}")
        overrides[name] = float(value)
    results = run_validation(scenario, overrides)
    text = "\n".join(report_lines(results)) + "\n"
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_VALIDATION if any(r.status == "FAIL" for r in results) else EXIT_OK


def fourier_visibility(scan: list[tuple[float, float]],
                       n_cut: int | None = None) -> float:
    """Fringe visibility from a uniformly sampled position scan.

    V = sqrt(2 sum_{n=1}^{N} |F(q_n)|^2) / F(0), where F is the discrete
    Fourier transform of the counts and each retained momentum includes its
    mirror bin.  N defaults to the half spectrum, which makes V exact for a
    pure sinusoidal fringe.
    """
    if len(scan) < 8:
        raise ValueError("need at least 8 samples")
    pos = np.asarray([p for p, _ in scan], dtype=float)
    counts = np.asarray([c for _, c in scan], dtype=float)
    steps = np.diff(pos)
    if steps.size == 0 or np.any(
            np.abs(steps - steps[0]) > 1e-9 * max(abs(steps[0]), 1e-300)):
        raise ValueError("non-uniform sampling")
    spectrum = np.fft.fft(counts)
    k = counts.size
    if spectrum[0] == 0.0:
        return 0.0
    n_cut = k // 2 if n_cut is None else min(n_cut, k // 2)
    total = 0.0
    for n in range(1, n_cut + 1):
        total += abs(spectrum[n]) ** 2
        mirror = k - n
        if mirror != n:
            total += abs(spectrum[mirror]) ** 2
    return float(math.sqrt(2.0 * total) / abs(spectrum[0]))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="combsense",
        description="Entangled-frequency-comb remote-sensing simulator")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p, figure=True):
        p.add_argument("--scenario", help="scenario INI (default: bundled reference)")
        p.add_argument("--out", help="output path (default: stdout)")
        if figure:
            p.add_argument("--figure", help="also render a PNG of the output")

    p = sub.add_parser("photocount-sweep", help="counts/visibility along one axis")
    common(p)
    p.add_argument("--axis", choices=("distance", "phase", "squeezing"),
                   required=True)
    p.add_argument("--range", required=True, metavar="LO:HI:N",
                   help="km for distance, rad for phase")
    p.set_defaults(func=cmd_photocount_sweep)

    p = sub.add_parser("visibility-map", help="visibility vs reflectance and range")
    common(p)
    p.add_argument("--grid", required=True, metavar="R0:R1:N,D0:D1:N",
                   help="reflectance axis, distance axis (km)")
    p.set_defaults(func=cmd_visibility_map)

    p = sub.add_parser("wigner", help="Wigner function on the (x_+, x_-) plane")
    common(p)
    p.add_argument("--which", choices=("transceiver", "tmsv"), default="transceiver")
    p.add_argument("--grid", required=True, metavar="P0:P1:N,M0:M1:N")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("metrology", help="quantum-advantage scans")
    common(p)
    p.add_argument("--mode", choices=("region", "distance"), required=True)
    p.add_argument("--grid", metavar="PHI0:PHI1:N,G0:G1:N",
                   help="region mode: phase axis, squeezing axis")
    p.add_argument("--range", metavar="D0:D1:N", help="distance mode: km axis")
    p.add_argument("--squeezing", default="0.5,1.0,1.7",
                   help="distance mode: comma-separated g values")
    p.add_argument("--phi", type=float, default=math.pi / 4,
                   help="distance mode operating point (rad)")
    p.add_argument("--eta", default="comb",
                   help="'comb' for the central-tooth weight, or a number")
    p.set_defaults(func=cmd_metrology)

    p = sub.add_parser("strobe", help="stroboscopic lattice run")
    common(p)
    p.add_argument("--target-position", type=int, default=25)
    p.add_argument("--steps", type=int, default=70)
    p.add_argument("--chopper-p", type=int, default=1,
                   help="train length; 0 disables the chopper")
    p.add_argument("--range", default="0:6.2831853:25", metavar="LO:HI:N",
                   help="interference-phase sweep")
    p.add_argument("--dump", help="write per-step JSONL world dumps here")
    p.set_defaults(func=cmd_strobe)

    p = sub.add_parser("link-budget", help="beam/channel chain for the scenario")
    common(p, figure=False)
    p.set_defaults(func=cmd_link_budget)

    p = sub.add_parser("validate", help="run all oracle cross-checks")
    common(p, figure=False)
    p.add_argument("--tolerance", action="append", metavar="NAME=VALUE",
                   help="override a check tolerance ('all=X' rescales every check)")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ScenarioError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (wigner.SeriesConvergenceError, fock.ConvergenceError) as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
