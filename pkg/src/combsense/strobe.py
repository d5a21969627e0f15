"""Discrete stroboscopic simulation of the perturbative pulse-train protocol.

Pulses live on a 1-D integer lattice (site spacing = one repetition period of
light travel).  Fixed geometry: nonlinear crystal at 0, dichroic mirror at +1
(retro-reflects pump and idler, passes signal), chopper at +2 (absorbs
right-moving signal pulses while blocking), target at +x_T, pre-detection
site at -1 (the two merge junctions), idler detector at -2, absorbing block
beyond.  A returning probe pulse is held two steps at the station (delay
line plus reverse crystal pass) before continuing left.

Amplitudes are tracked symbolically as (order in g, real coefficient, phase)
rather than floating wavefunctions; the photo-count is assembled from the
pulse bookkeeping and must agree with the closed-form perturbative count.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

from .interference import perturbative_photocount

SPECIES = ("pump", "s", "i", "S", "I", "s_r", "S_merged", "I_merged")

CRYSTAL_POS = 0
DICHROIC_POS = 1
CHOPPER_POS = 2
PREDETECT_POS = -1
DETECTOR_POS = -2
BLOCK_POS = -3


@dataclass
class PulseRecord:
    uid: int
    species: str
    birth_step: int
    position: int
    direction: str  # "L" or "R"
    amplitude_order: int
    coeff: float = 1.0
    phase: float = 0.0
    hold: int = 0
    delayed: bool = False
    twin_uid: int | None = None
    twin_chopped: bool = False
    components: list["PulseRecord"] = field(default_factory=list)


@dataclass(frozen=True)
class ChopperSchedule:
    """Blocks trains of p consecutive pulses, then unblocks the next p."""

    p: int
    offset: int = 0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("chopper train length p must be >= 1")

    def blocking(self, step: int) -> bool:
        return ((step + self.offset) // self.p) % 2 == 0


@dataclass(frozen=True)
class LatticeConfig:
    """Geometry and run length.  target_position is the lattice index of the
    target (>= 3 so the chopper fits between dichroic and target)."""

    target_position: int
    total_steps: int

    def __post_init__(self):
        if self.target_position < 3:
            raise ValueError("target_position must be >= 3")
        if self.total_steps <= 2 * self.target_position + 3:
            raise ValueError("total_steps must exceed 2*target_position + 3 "
                             "(stationary regime never reached)")

    @property
    def steady_step(self) -> int:
        """First step with a full interference configuration at the detector."""
        return 2 * self.target_position + 4


class World:
    """Mutable pulse-train state; advance with ``step``."""

    def __init__(self, config: LatticeConfig, g: float, r: float,
                 phi_r: float = 0.0):
        if g < 0 or not 0.0 <= r <= 1.0:
            raise ValueError("require g >= 0 and r in [0, 1]")
        self.config = config
        self.g = g
        self.r = r
        self.phi_r = phi_r
        self.step_index = 0
        self.records: list[PulseRecord] = []
        self.detections: dict[int, list[PulseRecord]] = {}
        self._uid = 0
        self._spawn_forward()  # pump train starts at t_0

    def new_uid(self) -> int:
        self._uid += 1
        return self._uid

    def find(self, uid: int) -> PulseRecord | None:
        for rec in self.records:
            if rec.uid == uid:
                return rec
        return None

    def at_site(self, position: int) -> list[PulseRecord]:
        return [r for r in self.records if r.position == position]

    def _spawn_forward(self) -> None:
        self.records.append(PulseRecord(self.new_uid(), "pump", self.step_index,
                                        CRYSTAL_POS, "R", 0))
        if self.g > 0:
            s = PulseRecord(self.new_uid(), "s", self.step_index, CRYSTAL_POS,
                            "R", 1)
            i = PulseRecord(self.new_uid(), "i", self.step_index, CRYSTAL_POS,
                            "R", 1)
            s.twin_uid, i.twin_uid = i.uid, s.uid
            self.records += [s, i]

    def _spawn_reverse(self, birth: int) -> None:
        if self.g <= 0:
            return
        big_s = PulseRecord(self.new_uid(), "S", birth, CRYSTAL_POS, "L", 1)
        big_i = PulseRecord(self.new_uid(), "I", birth, CRYSTAL_POS, "L", 1)
        big_s.twin_uid, big_i.twin_uid = big_i.uid, big_s.uid
        self.records += [big_s, big_i]


def step(world: World, config: LatticeConfig,
         schedule: ChopperSchedule | None) -> World:
    """Advance every pulse one lattice site and apply the site rules."""
    now = world.step_index + 1

    survivors: list[PulseRecord] = []
    for rec in world.records:
        if rec.hold > 0:
            rec.hold -= 1
        else:
            rec.position += 1 if rec.direction == "R" else -1
        if rec.position < BLOCK_POS or rec.position > config.target_position:
            raise RuntimeError(
                f"pulse {rec.species} escaped lattice bounds at {rec.position}; "
                "config too small")
        survivors.append(rec)
    world.records = survivors

    removed: set[int] = set()
    spawn_reverse = False
    for rec in world.records:
        if rec.uid in removed:
            continue
        # dichroic: retro-reflect right-moving pump and idler, pass signal
        if rec.position == DICHROIC_POS and rec.direction == "R" \
                and rec.species in ("pump", "i"):
            rec.direction = "L"
            rec.hold = 1
        # chopper: absorb right-moving signal while blocking
        elif rec.position == CHOPPER_POS and rec.direction == "R" \
                and rec.species == "s" and schedule is not None \
                and schedule.blocking(now):
            removed.add(rec.uid)
            twin = world.find(rec.twin_uid) if rec.twin_uid else None
            if twin is not None:
                twin.twin_chopped = True
        # target: reflect with amplitude r and phase phi_r
        elif rec.position == config.target_position and rec.direction == "R" \
                and rec.species == "s":
            if world.r == 0.0:
                removed.add(rec.uid)
            else:
                rec.species = "s_r"
                rec.direction = "L"
                rec.coeff *= world.r
                rec.phase += world.phi_r
        # returning probe: one-period delay line plus reverse crystal pass
        elif rec.position == CRYSTAL_POS and rec.direction == "L" \
                and rec.species == "s_r" and not rec.delayed:
            rec.hold = 2
            rec.delayed = True
        # reverse pump pass generates the left-moving pair
        elif rec.position == CRYSTAL_POS and rec.direction == "L" \
                and rec.species == "pump":
            spawn_reverse = True

    world.records = [r for r in world.records if r.uid not in removed]
    if spawn_reverse:
        world._spawn_reverse(now)

    _merge_site(world, now)

    # detection and absorption
    detected = [r for r in world.records if r.position == DETECTOR_POS]
    if detected:
        world.detections[now] = detected
    world.records = [r for r in world.records if r.position > BLOCK_POS]

    world.step_index = now
    world._spawn_forward()
    return world


def _merge_site(world: World, now: int) -> None:
    """Path identity at the pre-detection site: (i, I) -> I_merged and
    (s_r, S) -> S_merged when co-located left-movers."""
    here = [r for r in world.records
            if r.position == PREDETECT_POS and r.direction == "L"]
    for pair, merged_species in ((("i", "I"), "I_merged"),
                                 (("s_r", "S"), "S_merged")):
        parts = [r for r in here if r.species in pair]
        if len(parts) >= 2 and {r.species for r in parts} == set(pair):
            merged = PulseRecord(
                world.new_uid(), merged_species, now, PREDETECT_POS, "L",
                min(p.amplitude_order for p in parts),
                components=sorted(parts, key=lambda p: p.species))
            world.records = [r for r in world.records if r not in parts]
            world.records.append(merged)


def run(config: LatticeConfig, schedule: ChopperSchedule | None, g: float,
        r: float, phi_r: float = 0.0,
        dump=None) -> World:
    """Run the full stroboscopic evolution; optionally JSONL-dump every step."""
    world = World(config, g=g, r=r, phi_r=phi_r)
    if dump is not None:
        dump_world(world, dump)
    for _ in range(config.total_steps):
        step(world, config, schedule)
        if dump is not None:
            dump_world(world, dump)
    return world


def idler_photocount(world: World, g: float, r: float, psi: float,
                     o_s: float = 1.0, o_i: float = 1.0, mu_d: float = 1.0,
                     eta: float = 1.0, at_step: int | None = None) -> float:
    """Photo-count assembled from the pulse records at the detector.

    Baseline 2 mu_d g^2 eta^2 comes from the two order-g^2 configurations
    (the reverse pair's idler, and the retro idler whose twin is in flight);
    the induced-coherence term 4 O_S O_I mu_d g^3 eta^3 r cos(psi) is added
    only when the detected idler's twin signal was chopped and the reflected
    probe pulse is present in the merged signal record.
    """
    if g >= 0.3:
        warnings.warn(f"lattice photo-count called with g={g:.3g} >= 0.3; "
                      "the cubic bookkeeping is unreliable here", stacklevel=2)
    now = world.step_index if at_step is None else at_step
    if now < world.config.steady_step:
        raise RuntimeError(
            f"stationary regime starts at step {world.config.steady_step}; "
            f"world is at {now}")
    detected = world.detections.get(now, [])
    idler = [rec for rec in detected if rec.species == "I_merged"]
    if not idler:
        raise RuntimeError("no merged idler record at the detector")
    retro = next(c for c in idler[0].components if c.species == "i")
    signal = [rec for rec in detected if rec.species == "S_merged"]
    reflected_present = any(
        c.species == "s_r" for rec in signal for c in rec.components)
    interfere = retro.twin_chopped and reflected_present
    count = 2.0 * mu_d * g * g * eta * eta
    if interfere:
        count += 4.0 * o_s * o_i * mu_d * g**3 * eta**3 * r * math.cos(psi)
    return count


def agrees_with_closed_form(world: World, g: float, r: float, psi: float,
                            o_s: float = 1.0, o_i: float = 1.0,
                            mu_d: float = 1.0, eta: float = 1.0,
                            tol: float = 1e-12) -> bool:
    """Does the lattice count match `perturbative_photocount` for the gating
    realized at the current detector step?"""
    lattice = idler_photocount(world, g, r, psi, o_s, o_i, mu_d, eta)
    retro = next(c for rec in world.detections[world.step_index]
                 if rec.species == "I_merged"
                 for c in rec.components if c.species == "i")
    closed = perturbative_photocount(g, eta, r, psi, o_s, o_i, mu_d,
                                     chopper_on=retro.twin_chopped)
    return abs(lattice - closed) <= tol


def chopper_feasibility(rotation_hz: float, omega_rep: float) -> int:
    """Train length p = round(f_rep / (2 f_chop)) for a mechanical chopper."""
    if rotation_hz <= 0:
        raise ValueError("rotation rate must be positive")
    rep_hz = omega_rep / (2.0 * math.pi)
    p = round(rep_hz / (2.0 * rotation_hz))
    if p < 1:
        raise ValueError("chopper faster than rep rate")
    return p


def dump_world(world: World, fh) -> None:
    """One JSON line per live pulse (merged records list their components)."""
    for rec in sorted(world.records, key=lambda r: r.uid):
        fh.write(json.dumps({
            "step": world.step_index,
            "species": rec.species,
            "birth": rec.birth_step,
            "position": rec.position,
            "direction": rec.direction,
            "order": rec.amplitude_order,
            "phase": rec.phase,
            "components": [c.species for c in rec.components],
        }, sort_keys=True) + "\n")
