"""Trajectory primitives, the built-in reference path, and waypoint sampling.

A trajectory is an ordered chain of line/arc segments (zigzags expand into
lines). Waypoints are sampled at equal arc-length spacing within each
segment (each segment may override the trajectory-wide step), one waypoint
per measurement epoch; velocities come from the analytic tangent so Doppler
synthesis is free of finite-difference artifacts at segment joins. Joins are
C0 only: the reference path has genuine heading discontinuities.
"""

import math
from dataclasses import dataclass, field

import numpy as np

_JOIN_TOL = 1e-9


@dataclass(frozen=True)
class LineSegment:
    start: tuple
    end: tuple
    step_m: float | None = None  # per-epoch spacing override

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)

    def point_at(self, s: float) -> np.ndarray:
        t = s / self.length
        p0 = np.asarray(self.start, dtype=float)
        p1 = np.asarray(self.end, dtype=float)
        return p0 + t * (p1 - p0)

    def tangent_at(self, s: float) -> np.ndarray:
        p0 = np.asarray(self.start, dtype=float)
        p1 = np.asarray(self.end, dtype=float)
        return (p1 - p0) / self.length


@dataclass(frozen=True)
class ArcSegment:
    """Circular arc; positive sweep runs counter-clockwise."""

    center: tuple
    radius_m: float
    angle_start_rad: float
    sweep_rad: float
    step_m: float | None = None  # per-epoch spacing override

    @property
    def length(self) -> float:
        return self.radius_m * abs(self.sweep_rad)

    def _angle(self, s: float) -> float:
        return self.angle_start_rad + math.copysign(s / self.radius_m, self.sweep_rad)

    def point_at(self, s: float) -> np.ndarray:
        a = self._angle(s)
        c = np.asarray(self.center, dtype=float)
        return c + self.radius_m * np.array([math.cos(a), math.sin(a)])

    def tangent_at(self, s: float) -> np.ndarray:
        a = self._angle(s)
        sgn = math.copysign(1.0, self.sweep_rad)
        return np.array([-sgn * math.sin(a), sgn * math.cos(a)])


def zigzag_segments(start, leg_length_m: float, headings_rad,
                    step_m: float | None = None) -> list:
    """Expand a zigzag (straight legs with alternating headings) into lines."""
    segments = []
    p = np.asarray(start, dtype=float)
    for heading in headings_rad:
        q = p + leg_length_m * np.array([math.cos(heading), math.sin(heading)])
        segments.append(LineSegment(tuple(p), tuple(q), step_m=step_m))
        p = q
    return segments


@dataclass(frozen=True)
class TrajectorySpec:
    segments: tuple
    step_length_m: float = 1.0

    def __post_init__(self):
        if not self.segments:
            raise ValueError("trajectory needs at least one segment")
        for i, seg in enumerate(self.segments):
            if seg.length <= 0.0:
                raise ValueError(f"degenerate segment {i} (zero length)")
        for prev, nxt in zip(self.segments, self.segments[1:]):
            gap = np.linalg.norm(prev.point_at(prev.length) - nxt.point_at(0.0))
            if gap > _JOIN_TOL:
                raise ValueError(f"segments not connected end-to-start (gap {gap:.3g} m)")

    @property
    def total_length(self) -> float:
        return sum(seg.length for seg in self.segments)

    def locate(self, s: float):
        """Segment containing arc length s, and the offset into it."""
        remaining = s
        for seg in self.segments:
            if remaining <= seg.length:
                return seg, remaining
            remaining -= seg.length
        return self.segments[-1], self.segments[-1].length

    def point_at(self, s: float) -> np.ndarray:
        seg, off = self.locate(s)
        return seg.point_at(off)

    def tangent_at(self, s: float) -> np.ndarray:
        seg, off = self.locate(s)
        return seg.tangent_at(off)


@dataclass(frozen=True)
class WaypointState:
    epoch_index: int
    position: np.ndarray = field(repr=False)
    velocity: np.ndarray = field(repr=False)


def build_reference_trajectory() -> TrajectorySpec:
    """The built-in demo path: straight descent, 220-degree turn, zigzag.

    Line (27.5, 25) -> (27.5, 12.5) at 1 m per epoch; counter-clockwise arc
    of radius 12.5 m around (27.5, 0) from 90 deg to -50 deg at 2 deg per
    epoch; then three 8 m zigzag legs with headings -60/+60/-60 deg at 1 m
    per epoch. The epoch grid reproduces the reference scenario exactly, so
    the vehicle slows through the turn (4.36 m/s) relative to the straights
    (10 m/s at the 100 ms refresh period).
    """
    arc = ArcSegment(center=(27.5, 0.0), radius_m=12.5,
                     angle_start_rad=math.radians(90.0),
                     sweep_rad=math.radians(220.0),
                     step_m=12.5 * math.radians(2.0))
    arc_end = tuple(arc.point_at(arc.length))
    legs = zigzag_segments(arc_end, 8.0,
                           [math.radians(a) for a in (-60.0, 60.0, -60.0)])
    segments = (LineSegment((27.5, 25.0), (27.5, 12.5)), arc, *legs)
    return TrajectorySpec(segments=segments, step_length_m=1.0)


def sample_waypoints(spec: TrajectorySpec, refresh_period_s: float) -> list:
    """Per-segment equally spaced waypoints with analytic tangent velocities.

    Each segment is walked at its own step (falling back to the trajectory
    step); its terminal point is always included, so the path ends exactly at
    the final endpoint and joins are preserved. Identical points emitted by
    consecutive segments collapse into one waypoint. Only a segment's last
    hop may be shorter than its step.
    """
    positions = []
    velocities = []
    for seg in spec.segments:
        step = seg.step_m if seg.step_m is not None else spec.step_length_m
        speed = step / refresh_period_s
        offsets = list(np.arange(0.0, seg.length + _JOIN_TOL, step))
        if seg.length - offsets[-1] > _JOIN_TOL:
            offsets.append(seg.length)
        for off in offsets:
            pos = seg.point_at(off)
            if positions and np.linalg.norm(pos - positions[-1]) <= _JOIN_TOL:
                continue
            positions.append(pos)
            velocities.append(speed * seg.tangent_at(off))

    if len(positions) < 3:
        raise ValueError("trajectory too short: fewer than 3 waypoints")

    return [WaypointState(epoch_index=i, position=p, velocity=v)
            for i, (p, v) in enumerate(zip(positions, velocities))]
