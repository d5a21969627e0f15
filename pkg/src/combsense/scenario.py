"""Scenario files: one fully specified sensing run, loaded from flat INI.

Sections mirror the parameter groups 1:1 ([squeeze], [comb], [beam],
[target], [atmosphere], [detector], [overlaps], [phases]); values accept SI
unit suffixes ("1560nm", "250MHz", "100km", "0.5ns", "90%", "45deg").  Keys
are case-sensitive (phi_S and phi_s are different phases).  Missing optional
keys fall back to the bundled reference scenario's values; the required core
(squeeze.g, comb geometry, beam waist, target range/reflectance, detector
efficiency) must be present.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass
from importlib import resources

from .fock import SqueezeParams
from .interference import (CombSpec, DetectorSpec, Overlaps, PhaseSet,
                           renormalized_squeezing, spectral_weight)
from .linkbudget import (AtmosphereSpec, BeamSpec, TargetSpec,
                         collection_efficiency, load_profile_csv,
                         roundtrip_attenuation)

_LENGTH = {"m": 1.0, "km": 1e3, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}
_TIME = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12}
_FREQ = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12}
_ANGLE = {"rad": 1.0, "deg": math.pi / 180.0}
_AREA = {"m2": 1.0, "cm2": 1e-4}
_BARE: dict[str, float] = {}

# section -> key -> unit table (None = path string).  Unknown keys rejected.
_SCHEMA: dict[str, dict[str, dict | None]] = {
    "squeeze": {"g": _BARE, "phi_g": _ANGLE},
    "comb": {"lambda_c": _LENGTH, "rep_rate": _FREQ, "omega_rep": _BARE,
             "tau": _TIME, "teeth": _BARE, "ceo": _FREQ, "omega_ceo": _BARE,
             "tooth_index": _BARE},
    "beam": {"w0": _LENGTH},
    "target": {"d": _LENGTH, "r2": _BARE, "r": _BARE, "phi_r": _ANGLE,
               "cross_section": _AREA},
    "atmosphere": {"ell": _BARE, "phi_xi": _ANGLE, "r0": _LENGTH,
                   "alpha_csv": None, "cn2_csv": None},
    "detector": {"mu_d": _BARE, "mu_coll": _BARE},
    "overlaps": {"o_s": _BARE, "o_i": _BARE, "sigma_t": _TIME,
                 "tau_ii": _TIME, "tau_isr": _TIME, "tau_srs": _TIME},
    "phases": {"phi_s": _ANGLE, "phi_i": _ANGLE, "phi_S": _ANGLE,
               "phi_I": _ANGLE},
}

_REQUIRED = ["squeeze.g", "comb.lambda_c", "comb.rep_rate|comb.omega_rep",
             "comb.tau", "comb.teeth", "beam.w0", "target.d",
             "target.r2|target.r", "detector.mu_d"]

# Reference-scenario values fill every optional key.
_DEFAULTS: dict[tuple[str, str], str] = {
    ("squeeze", "phi_g"): "0",
    ("comb", "ceo"): "0Hz",
    ("comb", "tooth_index"): "0",
    ("target", "phi_r"): "0",
    ("target", "cross_section"): "25m2",
    ("atmosphere", "ell"): "0.64",
    ("atmosphere", "phi_xi"): "0",
    ("detector", "mu_coll"): "0.65",
    ("overlaps", "o_s"): "1",
    ("overlaps", "o_i"): "1",
    ("overlaps", "tau_ii"): "0s",
    ("overlaps", "tau_isr"): "0s",
    ("overlaps", "tau_srs"): "0s",
    ("phases", "phi_s"): "0",
    ("phases", "phi_i"): "0",
    ("phases", "phi_S"): "0",
    ("phases", "phi_I"): "0",
}


class ScenarioError(ValueError):
    """Malformed scenario file (missing, unknown, or out-of-range keys)."""


def parse_quantity(text: str, units: dict[str, float], key: str) -> float:
    """Parse '100km', '90%', '0.65' according to the key's unit table."""
    raw = text.strip()
    if raw.endswith("%"):
        return _parse_float(raw[:-1], key) / 100.0
    for suffix in sorted(units, key=len, reverse=True):
        if raw.endswith(suffix):
            return _parse_float(raw[: -len(suffix)], key) * units[suffix]
    return _parse_float(raw, key)


def _parse_float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ScenarioError(f"cannot parse value {text!r} for key {key!r}") from exc


@dataclass(frozen=True)
class SensingScenario:
    """One fully specified sensing run."""

    squeeze: SqueezeParams
    comb: CombSpec
    beam: BeamSpec
    target: TargetSpec
    atmosphere: AtmosphereSpec
    detector: DetectorSpec
    overlaps: Overlaps
    phases: PhaseSet
    tooth_index: int = 0

    def __post_init__(self):
        self.comb._check_tooth(self.tooth_index)

    def eta(self, m: int | None = None) -> float:
        return spectral_weight(self.tooth_index if m is None else m, self.comb)

    def mu_coll(self) -> float:
        """Explicit scenario value, or derived from the beam geometry."""
        if self.detector.mu_coll is not None:
            return self.detector.mu_coll
        return collection_efficiency(self.beam, self.target)

    def ell(self, d: float | None = None) -> float:
        dist = self.target.d if d is None else d
        return roundtrip_attenuation(self.atmosphere, dist,
                                     self.comb.omega(self.tooth_index))

    def channel_ratio(self, d: float | None = None, r: float | None = None) -> float:
        """gtilde/g for this channel: mu_coll * r * ell * min(z0/d, 1)."""
        dist = self.target.d if d is None else d
        refl = self.target.r if r is None else r
        det = DetectorSpec(mu_d=self.detector.mu_d, mu_coll=self.mu_coll())
        return renormalized_squeezing(1.0, det, refl, self.ell(d),
                                      self.beam.rayleigh_range, dist)

    def g_eta(self, m: int | None = None) -> float:
        return self.squeeze.g * self.eta(m)

    def gtilde_eta(self, m: int | None = None, d: float | None = None,
                   r: float | None = None) -> float:
        return self.squeeze.g * self.channel_ratio(d=d, r=r) * self.eta(m)

    def phases_with_noise(self) -> PhaseSet:
        """PhaseSet completed with the reflection, noise, and squeezing phases
        stored on the target/atmosphere/squeeze specs."""
        return PhaseSet(
            phi_s=self.phases.phi_s, phi_i=self.phases.phi_i,
            phi_S=self.phases.phi_S, phi_I=self.phases.phi_I,
            phi_r=self.target.phi_r, phi_xi=self.atmosphere.phi_xi,
            phi_g=self.squeeze.phi_g)


def load_scenario(path) -> SensingScenario:
    """Parse and validate a scenario file."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    return _build(parser, str(path))


def loads_scenario(text: str, name: str = "<string>") -> SensingScenario:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise ScenarioError(f"{name}: {exc}") from exc
    return _build(parser, name)


def reference_scenario_text() -> str:
    """The bundled reference scenario (the standard 100 km / 15 dB run)."""
    return resources.files("combsense").joinpath(
        "scenarios/fig3_reference.ini").read_text()


def reference_scenario() -> SensingScenario:
    return loads_scenario(reference_scenario_text(), "fig3_reference")


def _build(parser: configparser.ConfigParser, name: str) -> SensingScenario:
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ScenarioError(f"{name}: unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ScenarioError(f"{name}: unknown key {key!r} in [{section}]")

    missing = []
    for req in _REQUIRED:
        alternatives = req.split("|")
        if not any(parser.has_option(*alt.split(".")) for alt in alternatives):
            missing.append(req)
    if missing:
        raise ScenarioError(f"{name}: missing required keys: {', '.join(missing)}")

    def has(section: str, key: str) -> bool:
        return parser.has_option(section, key)

    def get(section: str, key: str) -> float:
        if has(section, key):
            return parse_quantity(parser[section][key], _SCHEMA[section][key], key)
        return parse_quantity(_DEFAULTS[(section, key)],
                              _SCHEMA[section][key], key)

    teeth = get("comb", "teeth")
    if teeth != int(teeth) or int(teeth) < 1 or int(teeth) % 2 == 0:
        raise ScenarioError(f"{name}: comb.teeth must be an odd positive integer")
    tooth_index = get("comb", "tooth_index")
    if tooth_index != int(tooth_index):
        raise ScenarioError(f"{name}: comb.tooth_index must be an integer")

    if has("target", "r") and has("target", "r2"):
        raise ScenarioError(f"{name}: give target.r or target.r2, not both")
    if has("target", "r"):
        r_amp = get("target", "r")
    else:
        r2 = get("target", "r2")
        if not 0.0 <= r2 <= 1.0:
            raise ScenarioError(f"{name}: target.r2 must be in [0, 1]")
        r_amp = math.sqrt(r2)

    if has("comb", "omega_rep"):
        omega_rep = get("comb", "omega_rep")
    else:
        omega_rep = 2.0 * math.pi * get("comb", "rep_rate")
    if has("comb", "omega_ceo"):
        omega_ceo = get("comb", "omega_ceo")
    else:
        omega_ceo = 2.0 * math.pi * get("comb", "ceo")

    alpha_csv = parser["atmosphere"].get("alpha_csv") \
        if parser.has_section("atmosphere") else None
    cn2_csv = parser["atmosphere"].get("cn2_csv") \
        if parser.has_section("atmosphere") else None
    r0 = get("atmosphere", "r0") if has("atmosphere", "r0") else None

    if has("detector", "mu_coll") and parser["detector"]["mu_coll"].strip() == "auto":
        mu_coll = None
    else:
        mu_coll = get("detector", "mu_coll")

    try:
        squeeze = SqueezeParams(g=get("squeeze", "g"), phi_g=get("squeeze", "phi_g"))
        comb = CombSpec(lambda_c=get("comb", "lambda_c"), omega_rep=omega_rep,
                        tau=get("comb", "tau"), teeth_m=(int(teeth) - 1) // 2,
                        omega_ceo=omega_ceo)
        beam = BeamSpec(w0=get("beam", "w0"), wavelength=comb.lambda_c)
        target = TargetSpec(d=get("target", "d"), r=r_amp,
                            phi_r=get("target", "phi_r"),
                            cross_section=get("target", "cross_section"))
        atmosphere = AtmosphereSpec(
            ell=None if alpha_csv else get("atmosphere", "ell"),
            alpha_profile=load_profile_csv(alpha_csv) if alpha_csv else None,
            cn2_profile=load_profile_csv(cn2_csv) if cn2_csv else None,
            r0=r0, phi_xi=get("atmosphere", "phi_xi"))
        detector = DetectorSpec(mu_d=get("detector", "mu_d"), mu_coll=mu_coll)
        sigma_t = get("overlaps", "sigma_t") if has("overlaps", "sigma_t") \
            else comb.tau
        overlaps = Overlaps(o_s=get("overlaps", "o_s"), o_i=get("overlaps", "o_i"),
                            tau_ii=get("overlaps", "tau_ii"),
                            tau_isr=get("overlaps", "tau_isr"),
                            tau_srs=get("overlaps", "tau_srs"), sigma_t=sigma_t)
        phases = PhaseSet(phi_s=get("phases", "phi_s"), phi_i=get("phases", "phi_i"),
                          phi_S=get("phases", "phi_S"), phi_I=get("phases", "phi_I"),
                          phi_r=target.phi_r, phi_xi=atmosphere.phi_xi,
                          phi_g=squeeze.phi_g)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{name}: {exc}") from exc

    return SensingScenario(squeeze=squeeze, comb=comb, beam=beam, target=target,
                           atmosphere=atmosphere, detector=detector,
                           overlaps=overlaps, phases=phases,
                           tooth_index=int(tooth_index))


def save_scenario(scenario: SensingScenario, path) -> None:
    """Write a scenario back out.  Raw SI floats at full precision, so
    load_scenario(save_scenario(s)) == s field-for-field."""
    if scenario.atmosphere.alpha_profile or scenario.atmosphere.cn2_profile:
        raise ScenarioError("cannot save scenarios with CSV-backed profiles")
    atm_lines = [f"ell = {scenario.atmosphere.ell!r}",
                 f"phi_xi = {scenario.atmosphere.phi_xi!r}"]
    if scenario.atmosphere.r0 is not None:
        atm_lines.append(f"r0 = {scenario.atmosphere.r0!r}")
    mu_coll = scenario.detector.mu_coll
    lines = ["[squeeze]",
             f"g = {scenario.squeeze.g!r}",
             f"phi_g = {scenario.squeeze.phi_g!r}",
             "",
             "[comb]",
             f"lambda_c = {scenario.comb.lambda_c!r}",
             f"omega_rep = {scenario.comb.omega_rep!r}",
             f"tau = {scenario.comb.tau!r}",
             f"teeth = {2 * scenario.comb.teeth_m + 1}",
             f"omega_ceo = {scenario.comb.omega_ceo!r}",
             f"tooth_index = {scenario.tooth_index}",
             "",
             "[beam]",
             f"w0 = {scenario.beam.w0!r}",
             "",
             "[target]",
             f"d = {scenario.target.d!r}",
             f"r = {scenario.target.r!r}",
             f"phi_r = {scenario.target.phi_r!r}",
             f"cross_section = {scenario.target.cross_section!r}",
             "",
             "[atmosphere]", *atm_lines,
             "",
             "[detector]",
             f"mu_d = {scenario.detector.mu_d!r}",
             f"mu_coll = {'auto' if mu_coll is None else repr(mu_coll)}",
             "",
             "[overlaps]",
             f"o_s = {scenario.overlaps.o_s!r}",
             f"o_i = {scenario.overlaps.o_i!r}",
             f"sigma_t = {scenario.overlaps.sigma_t!r}",
             f"tau_ii = {scenario.overlaps.tau_ii!r}",
             f"tau_isr = {scenario.overlaps.tau_isr!r}",
             f"tau_srs = {scenario.overlaps.tau_srs!r}",
             "",
             "[phases]",
             f"phi_s = {scenario.phases.phi_s!r}",
             f"phi_i = {scenario.phases.phi_i!r}",
             f"phi_S = {scenario.phases.phi_S!r}",
             f"phi_I = {scenario.phases.phi_I!r}",
             ""]
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
