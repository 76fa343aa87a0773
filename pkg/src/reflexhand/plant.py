"""Reduced-order physics for the hand, the cylinder, and the two bins.

The model is deliberately event-driven rather than a rigid-body engine:
1-D grip mechanics (aperture, pad compression, friction hold) combined
with 3-D point kinematics for the wrist and the object. The cylinder
stands upright; the hand grips its protruding top section between a thumb
pad and a finger pad whose contact plane sits at wrist height.

Grip force comes from pad compression past the object diameter. A grip
holds when twice the friction force matches the loaded object weight;
otherwise the cylinder slides down along its axis relative to the pads,
mildly eroding the contact, until it either re-sticks or slides past the
pads entirely. The thumb sensor reads the contact force less a
velocity-proportional unloading while sliding, which is what makes slips
visible as pressure drops. Squeezing past the eject limit with an
off-center grip squirts the cylinder out along the finger axis.

All state advances at a fixed 1 ms step with no hidden time sources, so
identical command and arm-motion streams produce identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Tuple

from .tactile import ContactSide

TICK_RATE_HZ = 1000
DT = 1.0 / TICK_RATE_HZ
ALUMINUM_DENSITY = 2700.0  # kg/m^3


class ObjectStatus(IntEnum):
    IN_START_BIN = 0
    HELD = 1
    SLIPPING = 2
    FREE_FALL = 3
    SETTLED_OUT = 4
    IN_END_BIN = 5
    EJECTED = 6


class RegionClass(IntEnum):
    IN_START_BIN = 0
    NEAR_END_BIN = 1
    IN_END_BIN = 2
    ELSEWHERE = 3


@dataclass
class SceneSpec:
    """Task geometry and object properties.

    Bins sit on the table (z = 0) with their interior floors at table
    height; the object is an upright cylinder resting in the start bin.
    """

    start_bin_center: Tuple[float, float] = (0.0, 0.0)
    start_bin_size: Tuple[float, float, float] = (0.038, 0.038, 0.076)  # w, d, wall h
    end_bin_center: Tuple[float, float] = (0.175, 0.0)
    end_bin_size: Tuple[float, float, float] = (0.038, 0.038, 0.051)
    object_length: float = 0.12
    object_diameter: float = 0.02
    object_mass: Optional[float] = None  # None: solid aluminum default
    friction_mu: float = 0.4
    eject_force_limit: float = 25.0
    gravity: float = 9.81
    vicinity_radius: float = 0.05

    def resolved_mass(self) -> float:
        if self.object_mass is not None:
            return self.object_mass
        return object_mass_default(self)


@dataclass
class PlantParams:
    """Hand and contact-model parameters (all configurable)."""

    aperture_max: float = 0.10
    motor_v_max: float = 7.2
    close_time_s: float = 1.0  # full aperture travel at maximum voltage
    motor_deadband: float = 0.05  # fraction of v_max below which the motor stalls
    contact_stiffness: float = 2000.0  # N/m of pad compression
    finger_length: float = 0.08
    finger_reach: float = 0.06  # proximal pad edge offset from wrist along +y
    pad_halfheight: float = 0.005
    touch_margin: float = 0.003  # glancing-contact detection distance
    capture_halfwidth: float = 0.015  # lateral self-centering range
    escape_slip: float = 0.03  # relative slide that ends the grip
    slip_grip_erosion: float = 0.25  # contact-force fraction lost at full slide
    slip_unload_gain: float = 2.0  # sensed-force unloading per m/s of slide
    offcenter_tolerance: float = 0.2  # fraction of finger length from pad center
    eject_speed_lateral: float = 0.3
    eject_speed_down: float = 0.2


@dataclass
class HandState:
    aperture: float = 0.10
    aperture_rate: float = 0.0
    grip_force: float = 0.0
    wrist_x: float = 0.0
    wrist_y: float = -0.25
    wrist_z: float = 0.15

    @property
    def wrist_pos(self) -> Tuple[float, float, float]:
        return (self.wrist_x, self.wrist_y, self.wrist_z)


@dataclass
class ObjectState:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.06
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0
    status: ObjectStatus = ObjectStatus.IN_START_BIN
    mass: float = 0.1018

    @property
    def pos(self) -> Tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(slots=True)
class ContactGeometry:
    """What the finger wrap and thumb pad feel this tick."""

    touching: bool
    side: ContactSide
    fraction: float
    grip_force: float


def object_mass_default(scene: SceneSpec) -> float:
    """Mass of the solid aluminum cylinder from its dimensions."""
    r = scene.object_diameter / 2.0
    return ALUMINUM_DENSITY * math.pi * r * r * scene.object_length


def hold_satisfied(grip_force: float, mass: float, mu: float, gravity: float) -> bool:
    """Friction from both pads supports the object's weight."""
    return 2.0 * mu * grip_force >= mass * gravity


def classify_region(obj: ObjectState, scene: SceneSpec) -> RegionClass:
    """Scoring region for the object's current position and rest state."""
    if obj.status == ObjectStatus.IN_END_BIN:
        return RegionClass.IN_END_BIN
    ex, ey = scene.end_bin_center
    if math.hypot(obj.x - ex, obj.y - ey) <= scene.vicinity_radius:
        return RegionClass.NEAR_END_BIN
    if obj.status == ObjectStatus.IN_START_BIN:
        return RegionClass.IN_START_BIN
    return RegionClass.ELSEWHERE


def _inside_footprint(
    x: float, y: float, center: Tuple[float, float], size: Tuple[float, float, float],
    radius: float,
) -> bool:
    return (
        abs(x - center[0]) <= size[0] / 2.0 - radius
        and abs(y - center[1]) <= size[1] / 2.0 - radius
    )


class Plant:
    """Owns hand and object state and advances them one tick at a time."""

    def __init__(
        self,
        scene: SceneSpec,
        params: PlantParams,
        hand: Optional[HandState] = None,
        obj: Optional[ObjectState] = None,
    ) -> None:
        self.scene = scene
        self.params = params
        self.hand = hand if hand is not None else HandState(aperture=params.aperture_max)
        if obj is None:
            sx, sy = scene.start_bin_center
            obj = ObjectState(
                x=sx, y=sy, z=scene.object_length / 2.0,
                status=ObjectStatus.IN_START_BIN, mass=scene.resolved_mass(),
            )
        self.obj = obj
        # grip bookkeeping
        self.gripped = False
        self.grip_fraction = 0.5
        self._grip_offset_y = 0.0
        self._grip_offset_z = 0.0
        self.slip_dist = 0.0
        self._slide_v = 0.0
        # perturbation state
        self.mass_mult = 1.0
        self.mu_mult = 1.0
        self._mass_mult_remaining = -1  # -1: persistent
        self._mu_mult_remaining = -1
        self.ever_held = False
        self.last_release_reason: Optional[str] = None  # opened | escape | eject

    # -- perturbations ------------------------------------------------------

    def apply_perturbation(
        self, kind: str, magnitude: float, duration_ticks: Optional[int] = None
    ) -> None:
        remaining = -1 if duration_ticks is None else int(duration_ticks)
        if kind == "mass_multiplier":
            self.mass_mult = magnitude
            self._mass_mult_remaining = remaining
        elif kind == "friction_multiplier":
            self.mu_mult = magnitude
            self._mu_mult_remaining = remaining
        else:
            raise ValueError(f"unknown perturbation kind {kind!r}")

    def _tick_perturbations(self) -> None:
        if self._mass_mult_remaining > 0:
            self._mass_mult_remaining -= 1
            if self._mass_mult_remaining == 0:
                self.mass_mult = 1.0
        if self._mu_mult_remaining > 0:
            self._mu_mult_remaining -= 1
            if self._mu_mult_remaining == 0:
                self.mu_mult = 1.0

    # -- helpers ------------------------------------------------------------

    def _rest_status(self) -> ObjectStatus:
        obj, scene = self.obj, self.scene
        r = scene.object_diameter / 2.0
        if _inside_footprint(obj.x, obj.y, scene.start_bin_center, scene.start_bin_size, r):
            return ObjectStatus.IN_START_BIN
        if _inside_footprint(obj.x, obj.y, scene.end_bin_center, scene.end_bin_size, r):
            return ObjectStatus.IN_END_BIN
        return ObjectStatus.SETTLED_OUT

    def _resting_in_bin(self) -> Optional[Tuple[float, float, float]]:
        """Size of the bin currently containing the resting object, if any."""
        if self.obj.status == ObjectStatus.IN_START_BIN:
            return self.scene.start_bin_size
        if self.obj.status == ObjectStatus.IN_END_BIN:
            return self.scene.end_bin_size
        return None

    def _land(self) -> None:
        obj = self.obj
        obj.z = self.scene.object_length / 2.0
        obj.vx = obj.vy = obj.vz = 0.0
        obj.status = self._rest_status()

    def _release_grip(self, reason: str) -> None:
        self.gripped = False
        self.hand.grip_force = 0.0
        self.slip_dist = 0.0
        self._slide_v = 0.0
        self.last_release_reason = reason

    # -- main step ----------------------------------------------------------

    def step(
        self, motor_voltage: float, arm_vel: Tuple[float, float, float]
    ) -> ContactGeometry:
        hand, obj, scene, par = self.hand, self.obj, self.scene, self.params
        half_len = scene.object_length / 2.0
        r = scene.object_diameter / 2.0

        self._tick_perturbations()

        # wrist kinematics
        hand.wrist_x += arm_vel[0] * DT
        hand.wrist_y += arm_vel[1] * DT
        hand.wrist_z += arm_vel[2] * DT

        # aperture drive with stall dead-band
        v = min(max(motor_voltage, -par.motor_v_max), par.motor_v_max)
        if abs(v) < par.motor_deadband * par.motor_v_max:
            v = 0.0
        closing_speed = (v / par.motor_v_max) * (par.aperture_max / par.close_time_s)
        new_aperture = min(max(hand.aperture - closing_speed * DT, 0.0), par.aperture_max)
        hand.aperture_rate = (new_aperture - hand.aperture) / DT
        hand.aperture = new_aperture

        if obj.status in (ObjectStatus.FREE_FALL, ObjectStatus.EJECTED):
            obj.vz -= scene.gravity * DT
            obj.x += obj.vx * DT
            obj.y += obj.vy * DT
            obj.z += obj.vz * DT
            if obj.z - half_len <= 0.0:
                self._land()
            hand.grip_force = 0.0
            return ContactGeometry(False, ContactSide.NONE, 0.0, 0.0)

        # relative geometry of the object and the finger span
        dx = obj.x - hand.wrist_x
        frac = (obj.y - (hand.wrist_y + par.finger_reach)) / par.finger_length
        obj_bottom = obj.z - half_len
        obj_top = obj.z + half_len
        z_overlap = obj_bottom <= hand.wrist_z <= obj_top
        rest_bin = self._resting_in_bin()
        rim_ok = rest_bin is None or hand.wrist_z >= rest_bin[2] + par.pad_halfheight
        in_span = 0.0 <= frac <= 1.0 and z_overlap and rim_ok

        if not self.gripped:
            can_capture = in_span and abs(dx) <= par.capture_halfwidth
            if can_capture and hand.aperture <= scene.object_diameter:
                self.gripped = True
                self.ever_held = True
                self.grip_fraction = frac
                obj.x = hand.wrist_x  # thin object self-centers between the pads
                self._grip_offset_y = obj.y - hand.wrist_y
                self._grip_offset_z = obj.z - hand.wrist_z
                self.slip_dist = 0.0
                self._slide_v = 0.0

        if self.gripped:
            overlap = scene.object_diameter - hand.aperture
            if overlap <= 0.0:
                self._release_grip("opened")
                if obj.z - half_len > 1e-9:
                    obj.status = ObjectStatus.FREE_FALL
                else:
                    obj.status = self._rest_status()
                return ContactGeometry(False, ContactSide.NONE, 0.0, 0.0)

            erosion = max(
                0.0, 1.0 - par.slip_grip_erosion * self.slip_dist / par.escape_slip
            )
            force = par.contact_stiffness * overlap * erosion
            hand.grip_force = force

            if (
                force > scene.eject_force_limit
                and abs(self.grip_fraction - 0.5) > par.offcenter_tolerance
            ):
                self._release_grip("eject")
                obj.status = ObjectStatus.EJECTED
                obj.vy = par.eject_speed_lateral * (1.0 if self.grip_fraction >= 0.5 else -1.0)
                obj.vz = -par.eject_speed_down
                return ContactGeometry(False, ContactSide.NONE, 0.0, 0.0)

            obj.x = hand.wrist_x
            obj.y = hand.wrist_y + self._grip_offset_y
            tracked_z = hand.wrist_z + self._grip_offset_z - self.slip_dist
            if tracked_z - half_len <= 0.0:
                # floor-supported: no gravity-driven slide, but a rising hand
                # drags the pads up along the object
                obj.z = half_len
                self.slip_dist = max(
                    self.slip_dist, hand.wrist_z + self._grip_offset_z - half_len
                )
                self._slide_v = 0.0
                obj.status = self._rest_status()
            else:
                m_eff = obj.mass * self.mass_mult
                mu_eff = scene.friction_mu * self.mu_mult
                if hold_satisfied(force, m_eff, mu_eff, scene.gravity):
                    self._slide_v = 0.0
                else:
                    accel = scene.gravity - 2.0 * mu_eff * force / m_eff
                    self._slide_v += accel * DT
                    self.slip_dist += self._slide_v * DT
                new_z = hand.wrist_z + self._grip_offset_z - self.slip_dist
                if new_z - half_len <= 0.0:
                    # slid back down onto the floor within the tick
                    obj.z = half_len
                    self.slip_dist = hand.wrist_z + self._grip_offset_z - half_len
                    self._slide_v = 0.0
                    obj.status = self._rest_status()
                else:
                    obj.z = new_z
                    obj.status = (
                        ObjectStatus.HELD if self._slide_v == 0.0 else ObjectStatus.SLIPPING
                    )

            if self.slip_dist >= par.escape_slip:
                slide_v = self._slide_v
                self._release_grip("escape")
                if obj.z - half_len > 1e-9:
                    obj.status = ObjectStatus.FREE_FALL
                    obj.vz = -slide_v
                else:
                    obj.status = self._rest_status()
                return ContactGeometry(False, ContactSide.NONE, 0.0, 0.0)

            # the thumb pad unloads in proportion to slide speed, which is
            # what the slip detectors key on
            sensed = force * max(0.0, 1.0 - par.slip_unload_gain * self._slide_v)
            return ContactGeometry(True, ContactSide.PALMAR, self.grip_fraction, sensed)

        # not gripped: glancing contacts for exploration, no force, no motion
        hand.grip_force = 0.0
        if in_span:
            half_ap = hand.aperture / 2.0
            if abs(dx) < half_ap:
                gap_finger = (half_ap - dx) - r
                gap_thumb = (half_ap + dx) - r
                if min(gap_finger, gap_thumb) <= par.touch_margin:
                    return ContactGeometry(
                        True, ContactSide.PALMAR, min(max(frac, 0.0), 1.0), 0.0
                    )
            elif abs(dx) - half_ap - r <= par.touch_margin:
                return ContactGeometry(
                    True, ContactSide.DORSAL, min(max(frac, 0.0), 1.0), 0.0
                )
        elif (
            z_overlap
            and rim_ok
            and frac > 1.0
            and (frac - 1.0) * par.finger_length <= r + par.touch_margin
            and abs(dx) < hand.aperture / 2.0 + r
        ):
            # bumping the object with the fingertips
            return ContactGeometry(True, ContactSide.DORSAL, 1.0, 0.0)

        return ContactGeometry(False, ContactSide.NONE, 0.0, 0.0)
