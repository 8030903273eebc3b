"""Bistatic-sensing-assisted simultaneous communication and beam tracking.

Monte Carlo simulator and library: per-receiver echo synthesis on the sampled
OFDM grid, MUSIC arrival-angle and delay-Doppler estimation, bistatic
position solving with CRLB/GDOP error modeling, maximum-likelihood fusion,
and a closed-loop kinematic beam tracker scored by achievable spectral
efficiency.
"""

from bistatrack.config import (
    ConfigError,
    NodeGeometry,
    ScenarioConfig,
    SystemParams,
    default_config,
    load_config,
    with_overrides,
)
from bistatrack.runner import run_sweep, write_outputs
from bistatrack.trajectory import build_reference_trajectory, sample_waypoints

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "NodeGeometry",
    "ScenarioConfig",
    "SystemParams",
    "build_reference_trajectory",
    "default_config",
    "load_config",
    "run_sweep",
    "sample_waypoints",
    "with_overrides",
    "write_outputs",
    "__version__",
]
