"""Experiment configuration: JSON loading, validation, and defaults.

Config files are JSON with sections ``system``, ``geometry``, ``trajectory``,
``sweep``, ``seeds``, ``receiver`` and ``sim``; every field is optional and
falls back to the built-in defaults below. Physical quantities are SI except
transmit power (dBm), radar cross section (dBsm) and angles (degrees), which
are converted on load.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from bistatrack.constants import SPEED_OF_LIGHT, dbm_to_watt, dbsm_to_m2
from bistatrack.trajectory import (
    ArcSegment,
    LineSegment,
    TrajectorySpec,
    build_reference_trajectory,
    zigzag_segments,
)


class ConfigError(ValueError):
    """Malformed or invariant-violating configuration."""


@dataclass(frozen=True)
class SystemParams:
    """Waveform, link-budget and tracker parameters."""

    n_tx_antennas: int = 64
    n_rx_antennas: int = 64
    carrier_freq_hz: float = 60e9
    subcarrier_spacing_hz: float = 1e6
    n_subcarriers: int = 512
    n_symbols: int = 64
    cyclic_prefix_s: float = 120.0 / SPEED_OF_LIGHT  # max_range_m / c
    tx_power_w: float = dbm_to_watt(5.0)
    n_users: int = 1
    noise_psd_w_per_hz: float = 2e-21
    rcs_m2: float = dbsm_to_m2(20.0)
    refresh_period_s: float = 0.1
    gate_radius_m: float = 6.0
    fft_oversampling: int = 1
    # max sum range: the reference path peaks near 113 m, so the default
    # keeps the cyclic prefix long enough for every path-geometry pair
    max_range_m: float = 120.0
    max_speed_mps: float = 30.0
    n_select: int = 2
    n_receivers: int = 3

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    @property
    def symbol_period_s(self) -> float:
        return 1.0 / self.subcarrier_spacing_hz + self.cyclic_prefix_s

    @property
    def bandwidth_hz(self) -> float:
        return self.n_subcarriers * self.subcarrier_spacing_hz

    @property
    def noise_variance_w(self) -> float:
        return self.noise_psd_w_per_hz * self.bandwidth_hz


@dataclass(frozen=True)
class NodeGeometry:
    """Transmitter and receiver placements with array orientations."""

    tx_position: tuple = (0.0, 0.0)
    rx_positions: tuple = ((0.0, 25.0), (0.0, -25.0), (55.0, 0.0))
    rx_broadside_rad: tuple = (0.0, 0.0, -math.pi)  # every broadside faces the road
    tx_broadside_rad: float = 0.0


@dataclass(frozen=True)
class SweepSpec:
    power_dbm: tuple = (5.0,)
    modes: tuple = ("fuse",)
    runs: int = 100


@dataclass(frozen=True)
class ReceiverFrontend:
    architecture: str = "digital"  # digital | hda
    n_rf: int = 4
    thbw: float = 1.0


@dataclass(frozen=True)
class SimOptions:
    dtype: str = "complex64"          # frame synthesis precision
    cross_gain_model: bool = False    # keep inter-user beam leakage terms
    music_grid_deg: float = 0.02
    aoa_spatial_correction: bool = False  # cos^2(phi) correction of the AoA CRLB


@dataclass(frozen=True)
class ScenarioConfig:
    system: SystemParams = field(default_factory=SystemParams)
    nodes: NodeGeometry = field(default_factory=NodeGeometry)
    trajectory: TrajectorySpec = field(default_factory=build_reference_trajectory)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    master_seed: int = 1234
    receiver: ReceiverFrontend = field(default_factory=ReceiverFrontend)
    sim: SimOptions = field(default_factory=SimOptions)

    def config_hash(self) -> str:
        """Hash of the resolved configuration, stable under key reordering."""
        blob = json.dumps(resolved_dict(self), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _segment_dict(seg):
    if isinstance(seg, LineSegment):
        out = {"kind": "line", "start": list(seg.start), "end": list(seg.end)}
    else:
        out = {
            "kind": "arc",
            "center": list(seg.center),
            "radius_m": seg.radius_m,
            "angle_start_deg": math.degrees(seg.angle_start_rad),
            "sweep_deg": math.degrees(seg.sweep_rad),
        }
    if seg.step_m is not None:
        out["step_m"] = seg.step_m
    return out


def resolved_dict(cfg: ScenarioConfig) -> dict:
    """Fully resolved configuration as plain JSON-compatible data."""
    sysp = cfg.system
    return {
        "system": {
            "n_tx_antennas": sysp.n_tx_antennas,
            "n_rx_antennas": sysp.n_rx_antennas,
            "carrier_freq_hz": sysp.carrier_freq_hz,
            "subcarrier_spacing_hz": sysp.subcarrier_spacing_hz,
            "n_subcarriers": sysp.n_subcarriers,
            "n_symbols": sysp.n_symbols,
            "cyclic_prefix_s": sysp.cyclic_prefix_s,
            "tx_power_w": sysp.tx_power_w,
            "n_users": sysp.n_users,
            "noise_psd_w_per_hz": sysp.noise_psd_w_per_hz,
            "rcs_m2": sysp.rcs_m2,
            "refresh_period_s": sysp.refresh_period_s,
            "gate_radius_m": sysp.gate_radius_m,
            "fft_oversampling": sysp.fft_oversampling,
            "max_range_m": sysp.max_range_m,
            "max_speed_mps": sysp.max_speed_mps,
            "n_select": sysp.n_select,
            "n_receivers": sysp.n_receivers,
        },
        "geometry": {
            "tx_position": list(cfg.nodes.tx_position),
            "rx_positions": [list(p) for p in cfg.nodes.rx_positions],
            "rx_broadside_deg": [math.degrees(b) for b in cfg.nodes.rx_broadside_rad],
            "tx_broadside_deg": math.degrees(cfg.nodes.tx_broadside_rad),
        },
        "trajectory": {
            "segments": [_segment_dict(s) for s in cfg.trajectory.segments],
            "step_length_m": cfg.trajectory.step_length_m,
        },
        "sweep": {
            "power_dbm": list(cfg.sweep.power_dbm),
            "modes": list(cfg.sweep.modes),
            "runs": cfg.sweep.runs,
        },
        "seeds": {"master": cfg.master_seed},
        "receiver": {
            "architecture": cfg.receiver.architecture,
            "n_rf": cfg.receiver.n_rf,
            "thbw": cfg.receiver.thbw,
        },
        "sim": {
            "dtype": cfg.sim.dtype,
            "cross_gain_model": cfg.sim.cross_gain_model,
            "music_grid_deg": cfg.sim.music_grid_deg,
            "aoa_spatial_correction": cfg.sim.aoa_spatial_correction,
        },
    }


_VALID_MODES = ("oracle", "rx0-only", "rx1-only", "rx2-only", "fuse")


def _reject_unknown(section: dict, known, where: str):
    unknown = set(section) - set(known)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")


def _parse_system(raw: dict) -> SystemParams:
    known = {
        "n_tx_antennas", "n_rx_antennas", "carrier_freq_hz",
        "subcarrier_spacing_hz", "n_subcarriers", "n_symbols",
        "cyclic_prefix_s", "tx_power_dbm", "n_users", "noise_psd_w_per_hz",
        "rcs_dbsm", "refresh_period_s", "gate_radius_m", "fft_oversampling",
        "max_range_m", "max_speed_mps", "n_select", "n_receivers",
    }
    _reject_unknown(raw, known, "system")
    kwargs = {}
    for name in known - {"tx_power_dbm", "rcs_dbsm", "cyclic_prefix_s"}:
        if name in raw:
            kwargs[name] = raw[name]
    if "tx_power_dbm" in raw:
        kwargs["tx_power_w"] = dbm_to_watt(raw["tx_power_dbm"])
    if "rcs_dbsm" in raw:
        kwargs["rcs_m2"] = dbsm_to_m2(raw["rcs_dbsm"])
    max_range = kwargs.get("max_range_m", SystemParams.max_range_m)
    kwargs["cyclic_prefix_s"] = raw.get("cyclic_prefix_s", max_range / SPEED_OF_LIGHT)
    return SystemParams(**kwargs)


def _parse_geometry(raw: dict) -> NodeGeometry:
    _reject_unknown(raw, {"tx_position", "rx_positions", "rx_broadside_deg",
                          "tx_broadside_deg"}, "geometry")
    defaults = NodeGeometry()
    rx_positions = tuple(tuple(map(float, p))
                         for p in raw.get("rx_positions", defaults.rx_positions))
    if "rx_broadside_deg" in raw:
        # wrap to [-pi, pi) so 180 deg and -180 deg mean the same broadside
        broadsides = tuple(
            (math.radians(float(b)) + math.pi) % (2.0 * math.pi) - math.pi
            for b in raw["rx_broadside_deg"])
    else:
        broadsides = defaults.rx_broadside_rad[: len(rx_positions)]
    return NodeGeometry(
        tx_position=tuple(map(float, raw.get("tx_position", defaults.tx_position))),
        rx_positions=rx_positions,
        rx_broadside_rad=broadsides,
        tx_broadside_rad=math.radians(float(raw.get("tx_broadside_deg", 0.0))),
    )


def _parse_segment(raw: dict, index: int):
    kind = raw.get("kind")
    step = raw.get("step_m")
    if kind == "line":
        return [LineSegment(tuple(raw["start"]), tuple(raw["end"]), step_m=step)]
    if kind == "arc":
        return [ArcSegment(center=tuple(raw["center"]), radius_m=raw["radius_m"],
                           angle_start_rad=math.radians(raw["angle_start_deg"]),
                           sweep_rad=math.radians(raw["sweep_deg"]), step_m=step)]
    if kind == "zigzag":
        return zigzag_segments(tuple(raw["start"]), raw["leg_length_m"],
                               [math.radians(h) for h in raw["headings_deg"]],
                               step_m=step)
    raise ConfigError(f"trajectory.segments[{index}].kind: expected line|arc|zigzag, got {kind!r}")


def _parse_trajectory(raw: dict) -> TrajectorySpec:
    _reject_unknown(raw, {"preset", "segments", "step_length_m"}, "trajectory")
    if raw.get("preset", "reference" if "segments" not in raw else None) == "reference":
        base = build_reference_trajectory()
        step = raw.get("step_length_m", base.step_length_m)
        return TrajectorySpec(segments=base.segments, step_length_m=step)
    segments = []
    for i, seg in enumerate(raw.get("segments", [])):
        segments.extend(_parse_segment(seg, i))
    try:
        return TrajectorySpec(segments=tuple(segments),
                              step_length_m=raw.get("step_length_m", 1.0))
    except ValueError as exc:
        raise ConfigError(f"trajectory: {exc}") from exc


def _parse_sweep(raw: dict) -> SweepSpec:
    _reject_unknown(raw, {"power_dbm", "modes", "runs"}, "sweep")
    defaults = SweepSpec()
    modes = tuple(raw.get("modes", defaults.modes))
    for m in modes:
        if m not in _VALID_MODES:
            raise ConfigError(f"sweep.modes: unknown mode {m!r}")
    return SweepSpec(
        power_dbm=tuple(float(p) for p in raw.get("power_dbm", defaults.power_dbm)),
        modes=modes,
        runs=int(raw.get("runs", defaults.runs)),
    )


def _parse_receiver(raw: dict) -> ReceiverFrontend:
    _reject_unknown(raw, {"architecture", "hda"}, "receiver")
    arch = raw.get("architecture", "digital")
    if arch not in ("digital", "hda"):
        raise ConfigError(f"receiver.architecture: expected digital|hda, got {arch!r}")
    hda = raw.get("hda", {})
    _reject_unknown(hda, {"n_rf", "thbw"}, "receiver.hda")
    return ReceiverFrontend(architecture=arch, n_rf=int(hda.get("n_rf", 4)),
                            thbw=float(hda.get("thbw", 1.0)))


def _parse_sim(raw: dict) -> SimOptions:
    _reject_unknown(raw, {"dtype", "cross_gain_model", "music_grid_deg",
                          "aoa_spatial_correction"}, "sim")
    dtype = raw.get("dtype", "complex64")
    if dtype not in ("complex64", "complex128"):
        raise ConfigError(f"sim.dtype: expected complex64|complex128, got {dtype!r}")
    return SimOptions(
        dtype=dtype,
        cross_gain_model=bool(raw.get("cross_gain_model", False)),
        music_grid_deg=float(raw.get("music_grid_deg", 0.02)),
        aoa_spatial_correction=bool(raw.get("aoa_spatial_correction", False)),
    )


def validate_config(cfg: ScenarioConfig) -> None:
    """Check every structural invariant; raise ConfigError naming the field."""
    s = cfg.system
    for name in ("n_tx_antennas", "n_rx_antennas", "n_subcarriers", "n_symbols",
                 "n_users", "n_receivers", "fft_oversampling"):
        if getattr(s, name) < 1:
            raise ConfigError(f"system.{name}: must be a positive count")
    for name in ("carrier_freq_hz", "subcarrier_spacing_hz", "tx_power_w",
                 "noise_psd_w_per_hz", "rcs_m2", "refresh_period_s",
                 "gate_radius_m", "max_range_m", "max_speed_mps"):
        if getattr(s, name) <= 0:
            raise ConfigError(f"system.{name}: must be positive")
    if s.cyclic_prefix_s < s.max_range_m / SPEED_OF_LIGHT:
        raise ConfigError(
            f"system.cyclic_prefix_s: {s.cyclic_prefix_s:.4g} s is below "
            f"max_range_m/c = {s.max_range_m / SPEED_OF_LIGHT:.4g} s")
    if not 1 <= s.n_select <= s.n_receivers:
        raise ConfigError("system.n_select: must satisfy 1 <= n_select <= n_receivers")

    nodes = cfg.nodes
    if len(nodes.rx_positions) != s.n_receivers:
        raise ConfigError(
            f"geometry.rx_positions: {len(nodes.rx_positions)} entries for "
            f"n_receivers = {s.n_receivers}")
    if len(nodes.rx_broadside_rad) != len(nodes.rx_positions):
        raise ConfigError("geometry.rx_broadside_deg: one bearing per receiver required")
    tx = np.asarray(nodes.tx_position, dtype=float)
    for i, p in enumerate(nodes.rx_positions):
        if np.linalg.norm(tx - np.asarray(p, dtype=float)) <= 0.0:
            raise ConfigError(f"geometry.rx_positions[{i}]: zero-length baseline")
    for i, b in enumerate(nodes.rx_broadside_rad):
        if not -math.pi <= b < math.pi:
            raise ConfigError(f"geometry.rx_broadside_deg[{i}]: must lie in [-180, 180)")

    max_step = max((seg.step_m if seg.step_m is not None
                    else cfg.trajectory.step_length_m)
                   for seg in cfg.trajectory.segments)
    implied_speed = max_step / s.refresh_period_s
    if implied_speed > s.max_speed_mps + 1e-12:
        raise ConfigError(
            f"trajectory.step_length_m: implied speed {implied_speed:.3g} m/s "
            f"exceeds max_speed_mps = {s.max_speed_mps:.3g}")

    if cfg.sweep.runs < 1:
        raise ConfigError("sweep.runs: must be at least 1")
    r = cfg.receiver
    if not 1 <= r.n_rf <= s.n_rx_antennas:
        raise ConfigError("receiver.hda.n_rf: must satisfy 1 <= n_rf <= n_rx_antennas")
    if r.thbw <= 0:
        raise ConfigError("receiver.hda.thbw: must be positive")


def config_from_dict(raw: dict) -> ScenarioConfig:
    _reject_unknown(raw, {"system", "geometry", "trajectory", "sweep", "seeds",
                          "receiver", "sim"}, "config")
    seeds = raw.get("seeds", {})
    _reject_unknown(seeds, {"master"}, "seeds")
    cfg = ScenarioConfig(
        system=_parse_system(raw.get("system", {})),
        nodes=_parse_geometry(raw.get("geometry", {})),
        trajectory=_parse_trajectory(raw.get("trajectory", {})),
        sweep=_parse_sweep(raw.get("sweep", {})),
        master_seed=int(seeds.get("master", 1234)),
        receiver=_parse_receiver(raw.get("receiver", {})),
        sim=_parse_sim(raw.get("sim", {})),
    )
    validate_config(cfg)
    return cfg


def with_overrides(cfg: ScenarioConfig, *, modes=None, power_dbm=None,
                   runs=None, seed=None, arch=None) -> ScenarioConfig:
    """Copy of a config with CLI-style overrides applied and revalidated."""
    sweep = cfg.sweep
    if modes is not None or power_dbm is not None or runs is not None:
        sweep = SweepSpec(
            power_dbm=tuple(power_dbm) if power_dbm is not None else sweep.power_dbm,
            modes=tuple(modes) if modes is not None else sweep.modes,
            runs=runs if runs is not None else sweep.runs,
        )
    receiver = cfg.receiver if arch is None else ReceiverFrontend(
        architecture=arch, n_rf=cfg.receiver.n_rf, thbw=cfg.receiver.thbw)
    new = ScenarioConfig(
        system=cfg.system, nodes=cfg.nodes, trajectory=cfg.trajectory,
        sweep=sweep, master_seed=seed if seed is not None else cfg.master_seed,
        receiver=receiver, sim=cfg.sim)
    validate_config(new)
    return new


def load_config(path) -> ScenarioConfig:
    """Load and validate a JSON scenario description."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(raw)


def default_config() -> ScenarioConfig:
    return config_from_dict({})
