"""Two-zone OFDMA resource allocation for LED-based VLC attocells."""

from .allocation import (PowerAllocation, Scheme, TrialReport, allocate_channel_inversion,
                         allocate_equal, allocate_waterfilling, place_users, run_trial)
from .channel import (AccessPoint, LinkGeometry, RateModel, Receiver, achievable_rate,
                      channel_gain, concentrator_gain, lambertian_order, sinr, snr)
from .metrics import (MetricSummary, TrialConfig, ase, ase_uniform, eta, fairness_zeta,
                      monte_carlo, user_density)
from .scenario import ScenarioConfig, emit_csv, load_config, rate_map
from .zoning import (ApLayout, IlluminationSpec, ZonePair, ZonePolicy, cell_radius,
                     define_zones, illuminance, illumination_limit, lambda_param,
                     overlap_limit, zone0_radius, zone0_subcarriers)

__version__ = "0.1.0"

__all__ = [
    "PowerAllocation",
    "Scheme",
    "TrialReport",
    "allocate_channel_inversion",
    "allocate_equal",
    "allocate_waterfilling",
    "place_users",
    "run_trial",
    "AccessPoint",
    "LinkGeometry",
    "RateModel",
    "Receiver",
    "achievable_rate",
    "channel_gain",
    "concentrator_gain",
    "lambertian_order",
    "sinr",
    "snr",
    "MetricSummary",
    "TrialConfig",
    "ase",
    "ase_uniform",
    "eta",
    "fairness_zeta",
    "monte_carlo",
    "user_density",
    "ScenarioConfig",
    "emit_csv",
    "load_config",
    "rate_map",
    "ApLayout",
    "IlluminationSpec",
    "ZonePair",
    "ZonePolicy",
    "cell_radius",
    "define_zones",
    "illuminance",
    "illumination_limit",
    "lambda_param",
    "overlap_limit",
    "zone0_radius",
    "zone0_subcarriers",
    "__version__",
]
