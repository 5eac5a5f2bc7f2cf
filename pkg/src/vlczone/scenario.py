"""Scenario configuration, multi-AP rate maps and CSV output.

Configuration is a JSON document.  Lengths are meters, angles degrees and
the detector area square centimeters at this boundary; everything is
converted to SI/radians on load.  Omitted keys take the reference
defaults below.
"""

from __future__ import annotations

import copy
import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any, Mapping, Sequence

import numpy as np

from .allocation import Scheme
from .channel import AccessPoint, RateModel, Receiver, gain_at_distance
from .zoning import ApLayout, IlluminationSpec, ZonePolicy, define_zones

__all__ = [
    "ConfigError",
    "SweepSpec",
    "RateMapSpec",
    "ScenarioConfig",
    "RateMap",
    "Table",
    "DEFAULTS",
    "load_config",
    "load_config_file",
    "dump_config",
    "rate_map",
    "rate_map_table",
    "emit_csv",
    "ZONE_SWEEP_HEADER",
    "ETA_SWEEP_HEADER",
    "RATE_MAP_HEADER",
]

ZONE_SWEEP_HEADER = ("rho", "beta", "theta_deg", "d12_m", "r0_m", "N0", "r1_m", "N1",
                     "Lambda_m", "Gamma_m")
ETA_SWEEP_HEADER = ("rho", "beta", "scheme", "illum", "trials", "eta_mean", "eta_stderr",
                    "zeta_mean")
RATE_MAP_HEADER = ("x_m", "y_m", "serving_ap", "rate_bps", "in_zone0")

DEFAULTS: dict[str, Any] = {
    "room_m": None,
    "d_v_m": 3.5,
    "ap_defaults": {
        "half_angle_deg": 60.0,
        "optical_power_w": 9.0,
        "bandwidth_hz": 20e6,
        "subcarriers": 64,
    },
    "aps": None,
    "receiver": {
        "area_cm2": 1.0,
        "fov_deg": 90.0,
        "refractive_index": 1.5,
        "filter_gain": 1.0,
        "oe_efficiency": 0.53,
        "noise_density_a2_per_hz": 1e-21,
    },
    "rate_model": {"clipping_ratio": 3.0, "rate_constant": 1.0, "half_factor": True},
    "zone_policy": {"rho": 0.5, "beta": 1.0, "radius_step_m": 0.001},
    "illumination": {"enabled": False, "e_min_lx": 200.0, "e_max_lx": 800.0, "i0_cd": None},
    "power": {"scheme": "equal", "budget_domain": "electrical", "benchmark_scheme": None},
    "sweeps": {
        "rho": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
        "beta": [1.0],
        "fairness_beta": [0.9],
        "theta_deg": [30.0, 45.0, 60.0],
        "d12_m": None,
        "d12_points": 26,
        "schemes": ["equal"],
        "illumination": [False],
    },
    "rate_map": {"resolution_m": 0.05, "interference": False, "overlap_limit": False},
    "trials": 10000,
    "seed": 0,
    "workers": 1,
}


class ConfigError(ValueError):
    """Invalid scenario document; the message starts with the key path."""


@dataclass(frozen=True)
class SweepSpec:
    rho: tuple[float, ...]
    beta: tuple[float, ...]
    fairness_beta: tuple[float, ...]
    theta_deg: tuple[float, ...]
    d12: tuple[float, ...] | None
    d12_points: int
    schemes: tuple[Scheme, ...]
    illumination: tuple[bool, ...]


@dataclass(frozen=True)
class RateMapSpec:
    resolution: float = 0.05
    interference: bool = False
    overlap_limit: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    room: tuple[float, float, float] | None
    d_v: float
    aps: tuple[AccessPoint, ...]
    receiver: Receiver
    rate_model: RateModel
    policy: ZonePolicy
    illumination: IlluminationSpec
    scheme: Scheme
    budget_domain: str
    benchmark_scheme: Scheme | None
    sweeps: SweepSpec
    rate_map: RateMapSpec
    trials: int
    seed: int
    workers: int = 1

    @property
    def layout(self) -> ApLayout:
        return ApLayout(self.aps, self.d_v)

    @property
    def primary_ap(self) -> AccessPoint:
        return self.aps[0]


def _merge(defaults: Mapping, doc: Mapping, path: str) -> dict:
    out = copy.deepcopy(dict(defaults))
    for key, value in doc.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"{here}: unknown key")
        if isinstance(defaults[key], dict):
            if not isinstance(value, Mapping):
                raise ConfigError(f"{here}: expected an object")
            out[key] = _merge(defaults[key], value, here)
        else:
            out[key] = value
    return out


def _num(value, path: str, *, positive=False, nonneg=False, integer=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    if positive and value <= 0:
        raise ConfigError(f"{path}: must be positive, got {value}")
    if nonneg and value < 0:
        raise ConfigError(f"{path}: must be non-negative, got {value}")
    if integer:
        if int(value) != value:
            raise ConfigError(f"{path}: must be an integer, got {value}")
        return int(value)
    return float(value)


def _grid(value, path: str, *, allow_none=False) -> tuple[float, ...] | None:
    if value is None and allow_none:
        return None
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{path}: expected a non-empty list")
    return tuple(_num(v, f"{path}[{i}]") for i, v in enumerate(value))


def _build(kind, path: str, **kwargs):
    try:
        return kind(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _scheme(value, path: str) -> Scheme:
    try:
        return Scheme.parse(value)
    except ValueError:
        raise ConfigError(f"{path}: unknown scheme {value!r}") from None


def load_config(document: str | Mapping | None) -> ScenarioConfig:
    """Parse and validate a scenario document (JSON text or a mapping)."""
    if document is None:
        doc: Mapping = {}
    elif isinstance(document, str):
        try:
            doc = json.loads(document) if document.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError(f"<document>: invalid JSON ({exc})") from None
    else:
        doc = document
    if not isinstance(doc, Mapping):
        raise ConfigError("<document>: top level must be an object")
    c = _merge(DEFAULTS, doc, "")

    d_v = _num(c["d_v_m"], "d_v_m", positive=True)
    room = None
    if c["room_m"] is not None:
        if not isinstance(c["room_m"], (list, tuple)) or len(c["room_m"]) != 3:
            raise ConfigError("room_m: expected [length, width, height]")
        room = tuple(_num(v, f"room_m[{i}]", positive=True) for i, v in enumerate(c["room_m"]))

    ad = c["ap_defaults"]
    base = {
        "half_angle_deg": _num(ad["half_angle_deg"], "ap_defaults.half_angle_deg", positive=True),
        "optical_power_w": _num(ad["optical_power_w"], "ap_defaults.optical_power_w", positive=True),
        "bandwidth_hz": _num(ad["bandwidth_hz"], "ap_defaults.bandwidth_hz", positive=True),
        "subcarriers": _num(ad["subcarriers"], "ap_defaults.subcarriers", positive=True, integer=True),
    }
    raw_aps = c["aps"]
    if raw_aps is None:
        raw_aps = [{"id": 1, "position_m": [0.0, 0.0, d_v]}]
    if not isinstance(raw_aps, list) or not raw_aps:
        raise ConfigError("aps: expected a non-empty list")
    aps = []
    for i, entry in enumerate(raw_aps):
        path = f"aps[{i}]"
        if not isinstance(entry, Mapping):
            raise ConfigError(f"{path}: expected an object")
        allowed = {"id", "position_m"} | set(base)
        for key in entry:
            if key not in allowed:
                raise ConfigError(f"{path}.{key}: unknown key")
        merged = {**base, **entry}
        pos = merged.get("position_m")
        if not isinstance(pos, (list, tuple)) or len(pos) != 3:
            raise ConfigError(f"{path}.position_m: expected [x, y, z]")
        pos = tuple(_num(v, f"{path}.position_m[{j}]") for j, v in enumerate(pos))
        if room is not None and not (0 <= pos[0] <= room[0] and 0 <= pos[1] <= room[1]):
            raise ConfigError(f"{path}.position_m: outside the room footprint")
        theta = _num(merged["half_angle_deg"], f"{path}.half_angle_deg", positive=True)
        aps.append(_build(
            AccessPoint, path,
            id=_num(merged.get("id", i + 1), f"{path}.id", integer=True),
            position=pos,
            half_angle=math.radians(theta),
            optical_power=_num(merged["optical_power_w"], f"{path}.optical_power_w", positive=True),
            bandwidth=_num(merged["bandwidth_hz"], f"{path}.bandwidth_hz", positive=True),
            subcarriers=_num(merged["subcarriers"], f"{path}.subcarriers", positive=True, integer=True),
        ))
    try:
        ApLayout(aps, d_v)
    except ValueError as exc:
        raise ConfigError(f"aps: {exc}") from None

    r = c["receiver"]
    receiver = _build(
        Receiver, "receiver",
        detector_area=_num(r["area_cm2"], "receiver.area_cm2", positive=True) * 1e-4,
        fov=math.radians(_num(r["fov_deg"], "receiver.fov_deg", positive=True)),
        refractive_index=_num(r["refractive_index"], "receiver.refractive_index"),
        filter_gain=_num(r["filter_gain"], "receiver.filter_gain"),
        oe_efficiency=_num(r["oe_efficiency"], "receiver.oe_efficiency"),
        noise_density=_num(r["noise_density_a2_per_hz"], "receiver.noise_density_a2_per_hz"),
    )
    rm = c["rate_model"]
    if not isinstance(rm["half_factor"], bool):
        raise ConfigError("rate_model.half_factor: expected true/false")
    model = _build(
        RateModel, "rate_model",
        clipping_ratio=_num(rm["clipping_ratio"], "rate_model.clipping_ratio"),
        rate_constant=_num(rm["rate_constant"], "rate_model.rate_constant"),
        half_factor=rm["half_factor"],
    )
    zp = c["zone_policy"]
    policy = _build(
        ZonePolicy, "zone_policy",
        rho=_num(zp["rho"], "zone_policy.rho"),
        beta=_num(zp["beta"], "zone_policy.beta"),
        radius_step=_num(zp["radius_step_m"], "zone_policy.radius_step_m"),
    )
    il = c["illumination"]
    if not isinstance(il["enabled"], bool):
        raise ConfigError("illumination.enabled: expected true/false")
    illum = _build(
        IlluminationSpec, "illumination",
        enabled=il["enabled"],
        e_min=_num(il["e_min_lx"], "illumination.e_min_lx", positive=True),
        e_max=_num(il["e_max_lx"], "illumination.e_max_lx", positive=True),
        i0=None if il["i0_cd"] is None else _num(il["i0_cd"], "illumination.i0_cd", positive=True),
    )
    if illum.i0 is not None:
        try:
            illum.intensity(d_v)
        except ValueError as exc:
            raise ConfigError(f"illumination.i0_cd: {exc}") from None

    pw = c["power"]
    scheme = _scheme(pw["scheme"], "power.scheme")
    if pw["budget_domain"] not in ("electrical", "optical"):
        raise ConfigError("power.budget_domain: expected 'electrical' or 'optical'")
    bench = None if pw["benchmark_scheme"] is None else _scheme(
        pw["benchmark_scheme"], "power.benchmark_scheme")

    sw = c["sweeps"]
    sweeps = SweepSpec(
        rho=_grid(sw["rho"], "sweeps.rho"),
        beta=_grid(sw["beta"], "sweeps.beta"),
        fairness_beta=_grid(sw["fairness_beta"], "sweeps.fairness_beta"),
        theta_deg=_grid(sw["theta_deg"], "sweeps.theta_deg"),
        d12=_grid(sw["d12_m"], "sweeps.d12_m", allow_none=True),
        d12_points=_num(sw["d12_points"], "sweeps.d12_points", positive=True, integer=True),
        schemes=tuple(_scheme(s, f"sweeps.schemes[{i}]") for i, s in enumerate(
            sw["schemes"] if isinstance(sw["schemes"], list) and sw["schemes"] else
            _fail("sweeps.schemes: expected a non-empty list"))),
        illumination=tuple(_flag(v, f"sweeps.illumination[{i}]") for i, v in enumerate(
            sw["illumination"] if isinstance(sw["illumination"], list) and sw["illumination"] else
            _fail("sweeps.illumination: expected a non-empty list"))),
    )
    for name in ("rho", "beta", "fairness_beta"):
        for i, v in enumerate(getattr(sweeps, name)):
            upper_ok = v < 1 if name == "rho" else v <= 1
            if not (v > 0 and upper_ok):
                raise ConfigError(f"sweeps.{name}[{i}]: out of range ({v})")
    for i, t in enumerate(sweeps.theta_deg):
        if not 0 < t < 90:
            raise ConfigError(f"sweeps.theta_deg[{i}]: must lie in (0, 90)")

    rmp = c["rate_map"]
    rmap = RateMapSpec(
        resolution=_num(rmp["resolution_m"], "rate_map.resolution_m", positive=True),
        interference=_flag(rmp["interference"], "rate_map.interference"),
        overlap_limit=_flag(rmp["overlap_limit"], "rate_map.overlap_limit"),
    )
    return ScenarioConfig(
        room=room, d_v=d_v, aps=tuple(aps), receiver=receiver, rate_model=model,
        policy=policy, illumination=illum, scheme=scheme,
        budget_domain=pw["budget_domain"], benchmark_scheme=bench, sweeps=sweeps,
        rate_map=rmap,
        trials=_num(c["trials"], "trials", positive=True, integer=True),
        seed=_num(c["seed"], "seed", nonneg=True, integer=True),
        workers=_num(c["workers"], "workers", positive=True, integer=True),
    )


def _fail(msg: str):
    raise ConfigError(msg)


def _flag(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true/false")
    return value


def load_config_file(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return load_config(text)


def dump_config(cfg: ScenarioConfig) -> dict:
    """JSON-compatible document that loads back to ``cfg``."""
    rx = cfg.receiver
    return {
        "room_m": None if cfg.room is None else list(cfg.room),
        "d_v_m": cfg.d_v,
        "aps": [{
            "id": ap.id,
            "position_m": list(ap.position),
            "half_angle_deg": math.degrees(ap.half_angle),
            "optical_power_w": ap.optical_power,
            "bandwidth_hz": ap.bandwidth,
            "subcarriers": ap.subcarriers,
        } for ap in cfg.aps],
        "receiver": {
            "area_cm2": rx.detector_area * 1e4,
            "fov_deg": math.degrees(rx.fov),
            "refractive_index": rx.refractive_index,
            "filter_gain": rx.filter_gain,
            "oe_efficiency": rx.oe_efficiency,
            "noise_density_a2_per_hz": rx.noise_density,
        },
        "rate_model": {
            "clipping_ratio": cfg.rate_model.clipping_ratio,
            "rate_constant": cfg.rate_model.rate_constant,
            "half_factor": cfg.rate_model.half_factor,
        },
        "zone_policy": {"rho": cfg.policy.rho, "beta": cfg.policy.beta,
                        "radius_step_m": cfg.policy.radius_step},
        "illumination": {"enabled": cfg.illumination.enabled,
                         "e_min_lx": cfg.illumination.e_min,
                         "e_max_lx": cfg.illumination.e_max,
                         "i0_cd": cfg.illumination.i0},
        "power": {"scheme": cfg.scheme.value, "budget_domain": cfg.budget_domain,
                  "benchmark_scheme": None if cfg.benchmark_scheme is None
                  else cfg.benchmark_scheme.value},
        "sweeps": {
            "rho": list(cfg.sweeps.rho),
            "beta": list(cfg.sweeps.beta),
            "fairness_beta": list(cfg.sweeps.fairness_beta),
            "theta_deg": list(cfg.sweeps.theta_deg),
            "d12_m": None if cfg.sweeps.d12 is None else list(cfg.sweeps.d12),
            "d12_points": cfg.sweeps.d12_points,
            "schemes": [s.value for s in cfg.sweeps.schemes],
            "illumination": list(cfg.sweeps.illumination),
        },
        "rate_map": {"resolution_m": cfg.rate_map.resolution,
                     "interference": cfg.rate_map.interference,
                     "overlap_limit": cfg.rate_map.overlap_limit},
        "trials": cfg.trials,
        "seed": cfg.seed,
        "workers": cfg.workers,
    }


@dataclass(frozen=True)
class RateMap:
    """Probe-user rate over the receive plane.

    ``rate[j, i]`` belongs to the point ``(x[i], y[j])``; ``serving`` holds
    the id of the strongest AP there (-1 outside every light cone) and
    ``zone0`` flags points inside that AP's Zone 0.
    """

    x: np.ndarray
    y: np.ndarray
    rate: np.ndarray
    serving: np.ndarray
    zone0: np.ndarray
    resolution: float
    zone_radii: dict = field(default_factory=dict)

    def zone0_area(self) -> float:
        return float(self.zone0.sum()) * self.resolution ** 2


def _axis(lo: float, hi: float, res: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / res + 1e-9))
    return lo + res * np.arange(n + 1)


def rate_map(cfg: ScenarioConfig, rho: float | None = None) -> RateMap:
    """Rate of a probe user granted all subcarriers of its strongest AP.

    Line-of-sight only.  Co-channel interference from the other APs is
    included when ``cfg.rate_map.interference`` is set.  Zone-0 radii are
    solved per AP with ``rho`` (default ``cfg.policy.rho``); the overlap
    limit is applied only when ``cfg.rate_map.overlap_limit`` is set.
    """
    if not cfg.aps:
        raise ValueError("rate map needs at least one AP")
    res = cfg.rate_map.resolution
    if cfg.room is not None:
        x = _axis(0.0, cfg.room[0], res)
        y = _axis(0.0, cfg.room[1], res)
    else:
        reach = max(cfg.d_v * math.tan(ap.half_angle) for ap in cfg.aps)
        xs = [ap.position[0] for ap in cfg.aps]
        ys = [ap.position[1] for ap in cfg.aps]
        x = _axis(min(xs) - reach, max(xs) + reach, res)
        y = _axis(min(ys) - reach, max(ys) + reach, res)
    gx, gy = np.meshgrid(x, y)

    policy = cfg.policy if rho is None else ZonePolicy(rho, cfg.policy.beta, cfg.policy.radius_step)
    layout = cfg.layout if cfg.rate_map.overlap_limit else None
    model, rx = cfg.rate_model, cfg.receiver

    gains, dists, radii = [], [], {}
    for ap in cfg.aps:
        d = np.hypot(gx - ap.position[0], gy - ap.position[1])
        h = gain_at_distance(d, cfg.d_v, ap.order, rx)
        # Hard-edged light cone: nothing beyond the cell radius.
        h = np.where(d <= cfg.d_v * math.tan(ap.half_angle) * (1 + 1e-12), h, 0.0)
        gains.append(h)
        dists.append(d)
        zones = define_zones(ap, rx, model, layout, policy, cfg.illumination, d_v=cfg.d_v)
        radii[ap.id] = zones.r0
    gains = np.stack(gains)
    dists = np.stack(dists)
    best = np.argmax(gains, axis=0)
    idx = np.arange(best.size).reshape(best.shape)
    h_best = gains.reshape(len(cfg.aps), -1)[best.ravel(), idx.ravel()].reshape(best.shape)
    d_best = dists.reshape(len(cfg.aps), -1)[best.ravel(), idx.ravel()].reshape(best.shape)
    p_sub = np.array([ap.subcarrier_power for ap in cfg.aps])[best]
    b_sub = np.array([ap.subcarrier_bandwidth for ap in cfg.aps])[best]
    n_sub = np.array([ap.subcarriers for ap in cfg.aps])[best]
    gamma = rx.oe_efficiency
    signal = (gamma * p_sub * h_best) ** 2
    noise = model.clipping_ratio * rx.noise_density * b_sub
    interference = np.zeros_like(signal)
    if cfg.rate_map.interference:
        powers = np.array([ap.subcarrier_power for ap in cfg.aps])[:, None, None]
        total = np.sum((gamma * powers * gains) ** 2, axis=0)
        interference = np.maximum(total - signal, 0.0)
    s = signal / (noise + interference)
    rate = model.prefactor * n_sub * b_sub * np.log2(1 + model.rate_constant ** 2 * s)
    covered = h_best > 0
    rate = np.where(covered, rate, 0.0)
    ids = np.array([ap.id for ap in cfg.aps])[best]
    serving = np.where(covered, ids, -1)
    r0_best = np.array([radii[ap.id] for ap in cfg.aps])[best]
    zone0 = covered & (d_best <= r0_best)
    return RateMap(x=x, y=y, rate=rate, serving=serving, zone0=zone0,
                   resolution=res, zone_radii=radii)


@dataclass
class Table:
    header: Sequence[str]
    rows: list[Sequence[Any]] = field(default_factory=list)


def rate_map_table(rmap: RateMap) -> Table:
    table = Table(RATE_MAP_HEADER)
    for j, yv in enumerate(rmap.y):
        for i, xv in enumerate(rmap.x):
            ap_id = int(rmap.serving[j, i])
            table.rows.append((float(xv), float(yv), None if ap_id < 0 else ap_id,
                               float(rmap.rate[j, i]), bool(rmap.zone0[j, i])))
    return table


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, Scheme):
        return value.value
    return str(value)


def emit_csv(results: Table, stream: IO[str] | str | Path) -> None:
    """Write ``results`` as CSV; ``None`` cells become empty fields and
    floats use the shortest round-trip representation."""
    if isinstance(stream, (str, Path)):
        try:
            with open(stream, "w", newline="") as fh:
                emit_csv(results, fh)
        except OSError as exc:
            raise OSError(f"{stream}: {exc.strerror}") from exc
        return
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(results.header)
    for row in results.rows:
        if len(row) != len(results.header):
            raise ValueError(f"row has {len(row)} fields, header has {len(results.header)}")
        writer.writerow([_cell(v) for v in row])
