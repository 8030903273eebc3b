import math

import numpy as np
import pytest

from bistatrack.trajectory import (
    ArcSegment,
    LineSegment,
    TrajectorySpec,
    build_reference_trajectory,
    sample_waypoints,
)


@pytest.fixture(scope="module")
def reference():
    return build_reference_trajectory()


@pytest.fixture(scope="module")
def waypoints(reference):
    return sample_waypoints(reference, 0.1)


def test_first_waypoint_is_path_start(waypoints):
    assert np.allclose(waypoints[0].position, (27.5, 25.0))


def test_arc_passes_through_due_west_point(reference):
    arc = reference.segments[1]
    s_180 = arc.radius_m * math.radians(180.0 - 90.0)
    assert np.allclose(arc.point_at(s_180), (15.0, 0.0), atol=1e-12)


def test_last_waypoint_is_path_end(waypoints):
    assert np.allclose(waypoints[-1].position, (47.53, -16.50), atol=0.01)


def test_reference_epoch_grid(waypoints):
    # 14 line points (13 at 1 m + the short hop to the arc start), 110 arc
    # points at 2 deg each, 24 zigzag points at 1 m; joins deduplicated
    assert len(waypoints) == 14 + 110 + 24


def test_line_portion_velocity_points_south(waypoints):
    on_line = [wp for wp in waypoints if wp.position[1] >= 12.5 - 1e-9]
    assert len(on_line) == 14
    for wp in on_line:
        assert np.allclose(wp.velocity, (0.0, -10.0))


def test_reference_arc_advances_two_degrees_per_epoch(waypoints):
    center = np.array([27.5, 0.0])
    a = np.arctan2(*((waypoints[20].position - center)[::-1]))
    b = np.arctan2(*((waypoints[21].position - center)[::-1]))
    assert math.degrees(b - a) == pytest.approx(2.0, abs=1e-9)


def test_uniform_step_arc_advances_step_over_radius():
    # an arc sampled at the trajectory-wide 1 m step turns 1/12.5 rad per epoch
    arc = ArcSegment(center=(0.0, 0.0), radius_m=12.5,
                     angle_start_rad=math.pi / 2, sweep_rad=math.radians(220.0))
    wps = sample_waypoints(TrajectorySpec(segments=(arc,), step_length_m=1.0), 0.1)
    a = math.atan2(wps[0].position[1], wps[0].position[0])
    b = math.atan2(wps[1].position[1], wps[1].position[0])
    assert (b - a) == pytest.approx(1.0 / 12.5, rel=1e-9)
    assert math.degrees(b - a) == pytest.approx(4.584, abs=1e-3)


def test_speed_constant_within_each_segment(reference, waypoints):
    # straights run at 10 m/s, the reference arc at its own 4.36 m/s
    arc_step = reference.segments[1].step_m
    for wp in waypoints:
        speed = np.linalg.norm(wp.velocity)
        assert speed == pytest.approx(10.0, abs=1e-6) \
            or speed == pytest.approx(arc_step / 0.1, abs=1e-6)


def test_velocity_is_unit_tangent_times_speed(waypoints):
    # on the arc the velocity is perpendicular to the radius
    center = np.array([27.5, 0.0])
    for wp in waypoints[20:100]:
        radial = wp.position - center
        assert abs(np.dot(radial, wp.velocity)) < 1e-9 * 12.5 * 10.0


def test_no_duplicate_waypoints(waypoints):
    for a, b in zip(waypoints, waypoints[1:]):
        assert np.linalg.norm(b.position - a.position) > 1e-9


def test_arc_length_spacing_is_exact(reference):
    # per-segment arc-length spacing is exact; Euclidean chords shrink only
    # at path kinks and on the curved segment
    wps = sample_waypoints(reference, 0.1)
    arc = reference.segments[1]
    chord_expected = 2 * 12.5 * math.sin(math.radians(1.0))
    chords = [np.linalg.norm(b.position - a.position)
              for a, b in zip(wps[15:120], wps[16:121])]
    assert np.allclose(chords, chord_expected, atol=1e-9)


def test_single_point_spec_rejected():
    spec = TrajectorySpec(segments=(LineSegment((0, 0), (0, 1.0)),),
                          step_length_m=1.0)
    with pytest.raises(ValueError, match="fewer than 3"):
        sample_waypoints(spec, 0.1)


def test_degenerate_segment_rejected():
    with pytest.raises(ValueError, match="degenerate"):
        TrajectorySpec(segments=(LineSegment((0, 0), (0, 0)),))


def test_disconnected_segments_rejected():
    with pytest.raises(ValueError, match="connected"):
        TrajectorySpec(segments=(LineSegment((0, 0), (0, 5.0)),
                                 LineSegment((1, 5.0), (1, 9.0))))


def test_arc_tangent_direction_follows_sweep_sign():
    ccw = ArcSegment(center=(0, 0), radius_m=2.0, angle_start_rad=0.0,
                     sweep_rad=math.pi)
    cw = ArcSegment(center=(0, 0), radius_m=2.0, angle_start_rad=0.0,
                    sweep_rad=-math.pi)
    assert np.allclose(ccw.tangent_at(0.0), (0.0, 1.0))
    assert np.allclose(cw.tangent_at(0.0), (0.0, -1.0))


def test_segment_terminal_always_included():
    # a 2.5 m line at 1 m steps ends exactly at its endpoint
    spec = TrajectorySpec(segments=(LineSegment((0, 0), (2.5, 0.0)),),
                          step_length_m=1.0)
    wps = sample_waypoints(spec, 0.1)
    assert len(wps) == 4
    assert np.allclose(wps[-1].position, (2.5, 0.0))
