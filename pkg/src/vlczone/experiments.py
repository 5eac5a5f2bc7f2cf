"""Experiment drivers behind the CLI subcommands.

Each driver takes a :class:`ScenarioConfig` and returns a :class:`Table`
ready for :func:`emit_csv`.  Rows come out in sweep order.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .allocation import Scheme, run_trial
from .channel import AccessPoint
from .metrics import TrialConfig, ase, ase_uniform, eta, fairness_zeta, monte_carlo
from .scenario import (ETA_SWEEP_HEADER, ZONE_SWEEP_HEADER, ScenarioConfig, Table,
                       rate_map, rate_map_table)
from .zoning import (ApLayout, cell_radius, define_zones, illumination_limit, lambda_param,
                     overlap_limit, zone0_radius, zone0_subcarriers)

__all__ = [
    "zone_sweep",
    "subcarrier_sweep",
    "eta_sweep",
    "fairness_sweep",
    "rate_map_cmd",
    "single_trial",
    "SINGLE_TRIAL_HEADER",
]

SINGLE_TRIAL_HEADER = ("group", "user", "r_m", "rate_bps")


def _finite(x: float):
    return None if math.isinf(x) else x


def zone_sweep(cfg: ScenarioConfig) -> Table:
    """Zone-0 radius against rho for each half-angle, single subcarrier."""
    base = cfg.primary_ap
    d_v = cfg.d_v
    table = Table(ZONE_SWEEP_HEADER)
    for theta_deg in cfg.sweeps.theta_deg:
        theta = math.radians(theta_deg)
        ap = replace(base, half_angle=theta, subcarriers=1)
        m = ap.order
        r_cell = cell_radius(d_v, theta)
        lam = lambda_param(ap, cfg.receiver, cfg.rate_model, ap.optical_power, ap.bandwidth, d_v)
        lim = illumination_limit(cfg.illumination, m, d_v)
        for rho in cfg.sweeps.rho:
            r0 = zone0_radius(rho, 1, 1, lam, m, d_v, r_cell, lim)
            table.rows.append((rho, cfg.policy.beta, theta_deg, None, r0, 1,
                               r_cell - r0, 0, _finite(lim), r_cell))
    return table


def subcarrier_sweep(cfg: ScenarioConfig) -> Table:
    """Subcarriers Zone 0 needs when its radius is pinned to the overlap
    limit of a two-AP layout, over a grid of AP spacings."""
    base = cfg.primary_ap
    d_v = cfg.d_v
    n = base.subcarriers
    table = Table(ZONE_SWEEP_HEADER)
    for theta_deg in cfg.sweeps.theta_deg:
        theta = math.radians(theta_deg)
        ap1 = replace(base, id=1, position=(0.0, 0.0, base.position[2]), half_angle=theta)
        m = ap1.order
        r_cell = cell_radius(d_v, theta)
        lam = lambda_param(ap1, cfg.receiver, cfg.rate_model, ap1.subcarrier_power,
                           ap1.subcarrier_bandwidth, d_v)
        lim = illumination_limit(cfg.illumination, m, d_v)
        grid = cfg.sweeps.d12
        if grid is None:
            grid = np.linspace(r_cell + 0.5, 2 * r_cell, cfg.sweeps.d12_points)
        for d12 in grid:
            ap2 = replace(ap1, id=2, position=(float(d12), 0.0, base.position[2]))
            gamma = overlap_limit(1, ApLayout([ap1, ap2], d_v))
            r0 = max(min(gamma, lim), 0.0)
            for rho in cfg.sweeps.rho:
                n0 = zone0_subcarriers(rho, n, lam, m, d_v, r0)
                if r0 >= r_cell * (1 - 1e-12):
                    n0 = n
                table.rows.append((rho, cfg.policy.beta, theta_deg, float(d12), r0,
                                   n0, r_cell - r0, n - n0, _finite(lim), gamma))
    return table


def _mc_sweep(cfg: ScenarioConfig, betas, trials: int | None, seed: int | None,
              workers: int | None) -> Table:
    trials = cfg.trials if trials is None else trials
    seed = cfg.seed if seed is None else seed
    workers = cfg.workers if workers is None else workers
    layout = cfg.layout if len(cfg.aps) > 1 else None
    table = Table(ETA_SWEEP_HEADER)
    for scheme in cfg.sweeps.schemes:
        for flag in cfg.sweeps.illumination:
            illum = replace(cfg.illumination, enabled=flag)
            for beta in betas:
                for rho in cfg.sweeps.rho:
                    tc = TrialConfig(
                        ap=cfg.primary_ap, rx=cfg.receiver, model=cfg.rate_model,
                        policy=replace(cfg.policy, rho=rho, beta=beta), d_v=cfg.d_v,
                        scheme=scheme, illumination=illum, layout=layout,
                        budget_domain=cfg.budget_domain,
                        benchmark_scheme=cfg.benchmark_scheme)
                    s = monte_carlo(tc, trials, seed, workers)
                    table.rows.append((rho, beta, scheme.value, flag, trials, s.eta_mean,
                                       s.eta_stderr, s.zeta_mean))
    return table


def eta_sweep(cfg: ScenarioConfig, trials=None, seed=None, workers=None) -> Table:
    """Monte Carlo zoning gain over schemes x illumination x beta x rho."""
    return _mc_sweep(cfg, cfg.sweeps.beta, trials, seed, workers)


def fairness_sweep(cfg: ScenarioConfig, trials=None, seed=None, workers=None) -> Table:
    """Same grid as :func:`eta_sweep` over ``sweeps.fairness_beta``; a
    beta below 1 leaves Zone 1 with users so ``zeta_mean`` is defined."""
    return _mc_sweep(cfg, cfg.sweeps.fairness_beta, trials, seed, workers)


def rate_map_cmd(cfg: ScenarioConfig) -> Table:
    return rate_map_table(rate_map(cfg))


def single_trial(cfg: ScenarioConfig, seed=None) -> tuple[Table, dict]:
    """One end-to-end run for the configured policy.

    Returns per-user rates (groups ``zone0``, ``zone1``, ``benchmark``) and
    a summary dict with the zone pair and trial metrics.
    """
    seed = cfg.seed if seed is None else seed
    ap: AccessPoint = cfg.primary_ap
    layout = cfg.layout if len(cfg.aps) > 1 else None
    zones = define_zones(ap, cfg.receiver, cfg.rate_model, layout, cfg.policy,
                         cfg.illumination, d_v=cfg.d_v)
    rep = run_trial(zones, cfg.scheme, ap, cfg.receiver, cfg.rate_model, seed, cfg.d_v,
                    budget_domain=cfg.budget_domain, benchmark_scheme=cfg.benchmark_scheme)
    table = Table(SINGLE_TRIAL_HEADER)
    for group, radii, rates in (("zone0", rep.zone0_radii, rep.zone0_rates),
                                ("zone1", rep.zone1_radii, rep.zone1_rates),
                                ("benchmark", rep.benchmark_radii, rep.benchmark_rates)):
        for i, (r, rate) in enumerate(zip(radii, rates)):
            table.rows.append((group, i, float(r), float(rate)))
    summary = {
        "r0_m": zones.r0, "N0": zones.n0, "r1_m": zones.r1_width, "N1": zones.n1,
        "r_cell_m": zones.r_cell, "realized_rho": zones.realized_rho,
        "eta": eta(rep), "zeta": fairness_zeta(rep),
        "ase": ase(rep, ap.bandwidth, zones.r_cell),
        "ase_uniform": ase_uniform(rep, ap.bandwidth, zones.r_cell),
        "scheme": Scheme.parse(cfg.scheme).value, "seed": seed,
    }
    return table, summary
