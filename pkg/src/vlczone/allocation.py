"""User-level step: user placement and per-user power allocation per zone.

Every user holds a single subcarrier.  Power budgets are expressed in the
electrical domain (sum of squared optical subcarrier powers) because the
rate depends on ``P^2``; under that budget water-filling is a concave
program with the usual closed-form water level.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import AccessPoint, RateModel, Receiver, gain_at_distance, rate_per_subcarrier
from .zoning import ZonePair

__all__ = [
    "Zone",
    "Scheme",
    "PlacedUser",
    "PowerAllocation",
    "TrialReport",
    "sample_radii",
    "place_users",
    "effective_gains",
    "allocate_equal",
    "allocate_waterfilling",
    "allocate_channel_inversion",
    "allocate",
    "trial_streams",
    "run_trial",
]


class Zone(str, enum.Enum):
    ZONE0 = "zone0"
    ZONE1 = "zone1"
    FULL_CELL = "full_cell"


class Scheme(str, enum.Enum):
    EQUAL = "equal"
    WATERFILLING = "waterfilling"
    CHANNEL_INVERSION = "inversion"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        aliases = {"water-filling": "waterfilling", "channel-inversion": "inversion",
                   "channel_inversion": "inversion", "water_filling": "waterfilling"}
        key = str(value).strip().lower()
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class PlacedUser:
    zone: Zone
    horizontal_distance: float
    channel_gain: float
    subcarriers: int = 1


@dataclass(frozen=True)
class PowerAllocation:
    scheme: Scheme
    powers: np.ndarray
    budget_domain: str = "electrical"
    excluded: int = 0

    def __post_init__(self):
        if np.any(self.powers < 0):
            raise ValueError("negative power in allocation")


@dataclass(frozen=True)
class TrialReport:
    """Per-user rates (bit/s) of one Monte Carlo trial."""

    zone0_rates: np.ndarray
    zone1_rates: np.ndarray
    benchmark_rates: np.ndarray
    zones: ZonePair
    seed: int
    trial: int = 0
    zone0_radii: np.ndarray | None = None
    zone1_radii: np.ndarray | None = None
    benchmark_radii: np.ndarray | None = None

    def __post_init__(self):
        if len(self.zone0_rates) != self.zones.n0:
            raise ValueError("zone0_rates length differs from N0")
        if len(self.zone1_rates) != self.zones.n1:
            raise ValueError("zone1_rates length differs from N1")
        if len(self.benchmark_rates) != self.zones.n_total:
            raise ValueError("benchmark_rates length differs from N")


def sample_radii(a: float, b: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Area-uniform radii on the annulus ``a <= r < b``."""
    u = rng.random(count)
    return np.sqrt(a * a + (b * b - a * a) * u)


def place_users(interval: tuple[float, float], count: int, rng: np.random.Generator,
                d_v: float, ap: AccessPoint, rx: Receiver,
                zone: Zone = Zone.FULL_CELL) -> list[PlacedUser]:
    a, b = interval
    if not 0.0 <= a < b:
        raise ValueError(f"bad radial interval [{a}, {b})")
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return []
    r = sample_radii(a, b, count, rng)
    h = gain_at_distance(r, d_v, ap.order, rx)
    return [PlacedUser(zone, float(ri), float(hi)) for ri, hi in zip(r, np.atleast_1d(h))]


def _gains(users) -> np.ndarray:
    if len(users) and isinstance(users[0], PlacedUser):
        return np.array([u.channel_gain for u in users], dtype=float)
    return np.asarray(users, dtype=float)


def effective_gains(h, b_sub: float, rx: Receiver, model: RateModel) -> np.ndarray:
    """SNR per unit electrical power, ``(gamma h)^2 / (upsilon N0 B)``."""
    h = np.asarray(h, dtype=float)
    return (rx.oe_efficiency * h) ** 2 / (model.clipping_ratio * rx.noise_density * b_sub)


def allocate_equal(users, p_sub: float) -> PowerAllocation:
    n = len(users)
    if n == 0:
        raise ValueError("no users to allocate")
    return PowerAllocation(Scheme.EQUAL, np.full(n, float(p_sub)))


def _water_levels(g: np.ndarray, budget: float) -> np.ndarray:
    """Electrical powers ``max(0, mu - 1/g)`` summing to ``budget``.

    The water level is found exactly by growing the active set from the
    strongest channel; zero-gain channels never become active.
    """
    e = np.zeros_like(g)
    if budget < 0:
        raise ValueError("budget must be non-negative")
    active = np.flatnonzero(g > 0)
    if active.size == 0:
        raise ValueError("water-filling infeasible: every channel gain is zero")
    if budget == 0:
        return e
    order = active[np.argsort(-g[active], kind="stable")]
    inv = 1.0 / g[order]
    csum = np.cumsum(inv)
    k = np.arange(1, order.size + 1)
    mu = (budget + csum) / k
    # Largest k whose weakest member still sits below the water level.
    ok = mu > inv
    n_active = int(np.flatnonzero(ok)[-1]) + 1
    level = mu[n_active - 1]
    e[order[:n_active]] = level - inv[:n_active]
    return e


def allocate_waterfilling(users, total_budget: float, b_sub: float,
                          rx: Receiver, model: RateModel,
                          budget_domain: str = "electrical") -> PowerAllocation:
    """Sum-rate optimal powers under ``sum(P_l^2) = total_budget``.

    With ``budget_domain="optical"`` the electrical solution is rescaled so
    that ``sum(P_l)`` meets ``total_budget`` instead; this keeps the
    water-filling shape but is not optimal for the optical constraint.
    """
    h = _gains(users)
    if h.size == 0:
        raise ValueError("no users to allocate")
    g = effective_gains(h, b_sub, rx, model)
    if budget_domain == "electrical":
        e = _water_levels(g, total_budget)
        return PowerAllocation(Scheme.WATERFILLING, np.sqrt(e))
    if budget_domain == "optical":
        p = np.sqrt(_water_levels(g, 1.0))
        return PowerAllocation(Scheme.WATERFILLING, p * (total_budget / p.sum()), "optical")
    raise ValueError(f"unknown budget domain {budget_domain!r}")


def allocate_channel_inversion(users, total_budget: float, b_sub: float,
                               rx: Receiver, model: RateModel,
                               budget_domain: str = "electrical") -> PowerAllocation:
    """Powers that equalise the received SNR across users with ``h > 0``.

    Users outside the field of view get zero power and are counted in
    ``excluded``.
    """
    h = _gains(users)
    if h.size == 0:
        raise ValueError("no users to allocate")
    g = effective_gains(h, b_sub, rx, model)
    live = g > 0
    excluded = int(h.size - live.sum())
    if not live.any():
        raise ValueError("channel inversion infeasible: every channel gain is zero")
    if excluded:
        warnings.warn(f"channel inversion: {excluded} user(s) with zero gain excluded",
                      RuntimeWarning, stacklevel=2)
    p = np.zeros_like(h)
    if budget_domain == "electrical":
        inv = 1.0 / g[live]
        p[live] = np.sqrt(inv * (total_budget / inv.sum()))
    elif budget_domain == "optical":
        inv = 1.0 / np.sqrt(g[live])
        p[live] = inv * (total_budget / inv.sum())
    else:
        raise ValueError(f"unknown budget domain {budget_domain!r}")
    return PowerAllocation(Scheme.CHANNEL_INVERSION, p, budget_domain, excluded)


def allocate(scheme: Scheme, h, p_sub: float, b_sub: float, rx: Receiver,
             model: RateModel, budget_domain: str = "electrical") -> PowerAllocation:
    """Allocate a zone of ``len(h)`` single-subcarrier users whose budget is
    ``len(h)`` subcarriers at ``p_sub`` each."""
    scheme = Scheme.parse(scheme)
    n = len(h)
    if scheme is Scheme.EQUAL:
        return allocate_equal(h, p_sub)
    budget = n * p_sub ** 2 if budget_domain == "electrical" else n * p_sub
    if scheme is Scheme.WATERFILLING:
        return allocate_waterfilling(h, budget, b_sub, rx, model, budget_domain)
    return allocate_channel_inversion(h, budget, b_sub, rx, model, budget_domain)


def trial_streams(seed, trial: int = 0, count: int = 3) -> list[np.random.Generator]:
    """Independent generators for one trial, keyed by (seed, trial, stream)."""
    if isinstance(seed, np.random.SeedSequence):
        entropy, base = seed.entropy, tuple(seed.spawn_key)
    else:
        entropy, base = int(seed), ()
    return [np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=base + (trial, i)))
            for i in range(count)]


def _zone_rates(r: np.ndarray, scheme: Scheme, ap: AccessPoint, rx: Receiver,
                model: RateModel, d_v: float, budget_domain: str) -> np.ndarray:
    if r.size == 0:
        return np.zeros(0)
    h = np.atleast_1d(gain_at_distance(r, d_v, ap.order, rx))
    b_sub = ap.subcarrier_bandwidth
    if not np.any(h > 0):
        return np.zeros(r.size)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        alloc = allocate(scheme, h, ap.subcarrier_power, b_sub, rx, model, budget_domain)
    s = effective_gains(h, b_sub, rx, model) * alloc.powers ** 2
    return rate_per_subcarrier(b_sub, s, model)


def run_trial(zones: ZonePair, scheme, ap: AccessPoint, rx: Receiver, model: RateModel,
              seed, d_v: float, trial: int = 0, budget_domain: str = "electrical",
              benchmark_scheme=None, benchmark_stream: int = 2) -> TrialReport:
    """One repetition of the user-level step plus its unzoned benchmark.

    ``N0`` users are dropped uniformly in Zone 0 and ``N1`` in Zone 1, and
    power is split inside each zone from that zone's own budget.  The
    benchmark drops ``N`` users over the whole cell and allocates with
    ``benchmark_scheme`` (defaults to ``scheme``).  Placements come from
    streams 0, 1 and ``benchmark_stream`` of ``(seed, trial)``.
    """
    scheme = Scheme.parse(scheme)
    bench = scheme if benchmark_scheme is None else Scheme.parse(benchmark_scheme)
    streams = trial_streams(seed, trial, 2)
    r0 = sample_radii(0.0, zones.r0, zones.n0, streams[0])
    r1 = sample_radii(zones.r0, zones.r_cell, zones.n1, streams[1])
    # Fresh generator so a benchmark sharing stream 0 replays Zone 0's draws.
    bench_rng = trial_streams(seed, trial, benchmark_stream + 1)[benchmark_stream]
    rb = sample_radii(0.0, zones.r_cell, zones.n_total, bench_rng)
    return TrialReport(
        zone0_rates=_zone_rates(r0, scheme, ap, rx, model, d_v, budget_domain),
        zone1_rates=_zone_rates(r1, scheme, ap, rx, model, d_v, budget_domain),
        benchmark_rates=_zone_rates(rb, bench, ap, rx, model, d_v, budget_domain),
        zones=zones,
        seed=int(seed.entropy) if isinstance(seed, np.random.SeedSequence) else int(seed),
        trial=trial,
        zone0_radii=r0, zone1_radii=r1, benchmark_radii=rb,
    )
