"""Area spectral efficiency, zoning gain, fairness and the Monte Carlo driver."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .allocation import Scheme, TrialReport, run_trial
from .channel import AccessPoint, RateModel, Receiver
from .zoning import ApLayout, IlluminationSpec, ZonePair, ZonePolicy, define_zones

__all__ = [
    "TrialReport",
    "MetricSummary",
    "TrialConfig",
    "DegenerateBenchmarkError",
    "ase",
    "ase_uniform",
    "eta",
    "fairness_zeta",
    "user_density",
    "monte_carlo",
]


class DegenerateBenchmarkError(ZeroDivisionError):
    """The unzoned benchmark delivered zero sum rate."""


def ase(report: TrialReport, bandwidth: float, r_cell: float) -> float:
    """Zoned sum rate per hertz per square meter of cell footprint."""
    if r_cell <= 0:
        raise ValueError("r_cell must be positive")
    total = float(np.sum(report.zone0_rates)) + float(np.sum(report.zone1_rates))
    return total / (math.pi * bandwidth * r_cell ** 2)


def ase_uniform(report: TrialReport, bandwidth: float, r_cell: float) -> float:
    if r_cell <= 0:
        raise ValueError("r_cell must be positive")
    return float(np.sum(report.benchmark_rates)) / (math.pi * bandwidth * r_cell ** 2)


def eta(report: TrialReport) -> float:
    """Zoned-to-benchmark sum-rate ratio (equal to the ratio of the two ASEs)."""
    bench = float(np.sum(report.benchmark_rates))
    if bench <= 0:
        raise DegenerateBenchmarkError("benchmark sum rate is zero")
    return (float(np.sum(report.zone0_rates)) + float(np.sum(report.zone1_rates))) / bench


def fairness_zeta(report: TrialReport) -> float | None:
    """Mean Zone-1 rate over mean Zone-0 rate; ``None`` when Zone 1 is empty."""
    if len(report.zone1_rates) == 0:
        return None
    if len(report.zone0_rates) == 0:
        raise ValueError("fairness needs at least one Zone-0 user")
    return float(np.mean(report.zone1_rates)) / float(np.mean(report.zone0_rates))


def user_density(n_users: int, r0: float) -> float:
    """Users per square meter in a Zone 0 of radius ``r0``."""
    if r0 <= 0:
        raise ValueError("user density undefined for r0 <= 0")
    return n_users / (math.pi * r0 * r0)


@dataclass(frozen=True)
class TrialConfig:
    """Everything one Monte Carlo point needs."""

    ap: AccessPoint
    rx: Receiver
    model: RateModel
    policy: ZonePolicy
    d_v: float
    scheme: Scheme = Scheme.EQUAL
    illumination: IlluminationSpec = IlluminationSpec()
    layout: ApLayout | None = None
    budget_domain: str = "electrical"
    benchmark_scheme: Scheme | None = None

    def zones(self) -> ZonePair:
        return define_zones(self.ap, self.rx, self.model, self.layout, self.policy,
                            self.illumination, d_v=self.d_v)


@dataclass(frozen=True)
class MetricSummary:
    eta_mean: float
    eta_stderr: float
    zeta_mean: float | None
    zeta_stderr: float | None
    ase: float
    ase_uniform: float
    trials: int
    zones: ZonePair
    zeta_trials: int = 0
    eta_samples: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def _stderr(x: np.ndarray) -> float:
    if x.size < 2:
        return 0.0
    return float(np.std(x, ddof=1) / math.sqrt(x.size))


def _run_chunk(args) -> np.ndarray:
    cfg, zones, seed, start, stop = args
    r_cell = zones.r_cell
    bw = cfg.ap.bandwidth
    out = np.empty((stop - start, 4))
    for row, t in enumerate(range(start, stop)):
        try:
            rep = run_trial(zones, cfg.scheme, cfg.ap, cfg.rx, cfg.model, seed, cfg.d_v,
                            trial=t, budget_domain=cfg.budget_domain,
                            benchmark_scheme=cfg.benchmark_scheme)
            z = fairness_zeta(rep)
            out[row] = (eta(rep), math.nan if z is None else z,
                        ase(rep, bw, r_cell), ase_uniform(rep, bw, r_cell))
        except Exception as exc:
            raise RuntimeError(f"trial {t} failed: {exc}") from exc
    return out


def monte_carlo(config: TrialConfig, trials: int = 10_000, seed: int = 0,
                workers: int = 1) -> MetricSummary:
    """Average ``eta`` and ``zeta`` over independent trials.

    Trial ``t`` draws from streams keyed by ``(seed, t)``, so the summary is
    identical for any ``workers`` count.  ``eta`` is computed per trial and
    then averaged; ``zeta`` is averaged over the trials where Zone 1 holds
    users.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    zones = config.zones()
    if workers <= 1:
        rows = _run_chunk((config, zones, seed, 0, trials))
    else:
        bounds = np.linspace(0, trials, workers + 1).astype(int)
        tasks = [(config, zones, seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = np.vstack(list(pool.map(_run_chunk, tasks)))
    etas = rows[:, 0]
    zetas = rows[:, 1][~np.isnan(rows[:, 1])]
    return MetricSummary(
        eta_mean=float(np.mean(etas)),
        eta_stderr=_stderr(etas),
        zeta_mean=float(np.mean(zetas)) if zetas.size else None,
        zeta_stderr=_stderr(zetas) if zetas.size else None,
        ase=float(np.mean(rows[:, 2])),
        ase_uniform=float(np.mean(rows[:, 3])),
        trials=trials,
        zones=zones,
        zeta_trials=int(zetas.size),
        eta_samples=etas,
    )
