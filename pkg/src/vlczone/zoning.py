"""Cell-level step: Zone-0 radius and subcarrier count for one access point.

Zone 0 is the disk around the AP nadir whose edge user, given ``N0`` of the
``N`` equal-power subcarriers, reaches a fraction ``rho`` of the rate a
centre user gets with all ``N``.  Zone 1 is the remaining ring of the cell.
The radius is capped by the overlap-free limit (neighbouring cells) and the
illumination limit (minimum illuminance at the zone edge).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .channel import AccessPoint, RateModel, Receiver

__all__ = [
    "ZonePolicy",
    "IlluminationSpec",
    "ZonePair",
    "ApLayout",
    "cell_radius",
    "overlap_limit",
    "lambda_param",
    "zone0_radius",
    "zone0_subcarriers",
    "illuminance",
    "illumination_limit",
    "subcarrier_cap",
    "define_zones",
]

# Relative slack used when flooring a subcarrier count that should be an
# exact integer but carries round-off from the closed-form radius.
_FLOOR_SLACK = 1e-9


@dataclass(frozen=True)
class ZonePolicy:
    rho: float
    beta: float = 1.0
    radius_step: float = 0.001

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if self.radius_step <= 0:
            raise ValueError("radius_step must be positive")


@dataclass(frozen=True)
class IlluminationSpec:
    """Illuminance span ``[e_min, e_max]`` in lux over Zone 0.

    ``i0`` is the maximal luminous intensity in candela; ``None`` pins it so
    that the nadir illuminance equals ``e_max``.
    """

    enabled: bool = False
    e_min: float = 200.0
    e_max: float = 800.0
    i0: float | None = None

    def __post_init__(self):
        if self.e_min <= 0 or self.e_max <= 0:
            raise ValueError("illuminance bounds must be positive")
        if self.e_max < self.e_min:
            raise ValueError(f"e_max ({self.e_max}) < e_min ({self.e_min})")

    def intensity(self, d_v: float) -> float:
        if self.i0 is None:
            return self.e_max * d_v * d_v
        lo, hi = self.e_min * d_v * d_v, self.e_max * d_v * d_v
        if not lo * (1 - 1e-12) <= self.i0 <= hi * (1 + 1e-12):
            raise ValueError(
                f"i0={self.i0} cd outside [{lo}, {hi}] for d_v={d_v} m")
        return self.i0


@dataclass(frozen=True)
class ZonePair:
    """Result of the cell-level step for one AP.

    ``gamma`` and ``illum_limit`` are the radius caps that were in force;
    ``realized_rho`` is the edge-to-centre rate ratio actually achieved
    after flooring ``n0``.
    """

    r0: float
    n0: int
    r_cell: float
    n_total: int
    gamma: float = math.inf
    illum_limit: float = math.inf
    realized_rho: float = math.nan

    def __post_init__(self):
        if not 0.0 <= self.r0 <= self.r_cell * (1 + 1e-12):
            raise ValueError(f"r0={self.r0} outside [0, r_cell={self.r_cell}]")
        if not 0 <= self.n0 <= self.n_total:
            raise ValueError(f"n0={self.n0} outside [0, {self.n_total}]")

    @property
    def r1_width(self) -> float:
        return max(self.r_cell - self.r0, 0.0)

    @property
    def n1(self) -> int:
        return self.n_total - self.n0


@dataclass(frozen=True)
class ApLayout:
    aps: Sequence[AccessPoint]
    d_v: float
    radii: Sequence[float] | None = field(default=None)

    def __post_init__(self):
        if self.d_v <= 0:
            raise ValueError("d_v must be positive")
        ids = [ap.id for ap in self.aps]
        if len(set(ids)) != len(ids):
            raise ValueError("AP ids must be unique")
        for i, a in enumerate(self.aps):
            for b in self.aps[i + 1:]:
                if _horizontal_distance(a, b) <= 0:
                    raise ValueError(f"APs {a.id} and {b.id} share a position")
        if self.radii is None:
            object.__setattr__(self, "radii", tuple(
                cell_radius(self.d_v, ap.half_angle) for ap in self.aps))

    def index(self, ap_id: int) -> int:
        for i, ap in enumerate(self.aps):
            if ap.id == ap_id:
                return i
        raise KeyError(ap_id)


def _horizontal_distance(a: AccessPoint, b: AccessPoint) -> float:
    return math.hypot(a.position[0] - b.position[0], a.position[1] - b.position[1])


def cell_radius(d_v: float, theta: float) -> float:
    """Radius of the ideal light cone footprint, ``d_v tan(theta)``."""
    if not 0.0 < theta < math.pi / 2:
        raise ValueError("theta must lie in (0, pi/2)")
    return d_v * math.tan(theta)


def overlap_limit(k: int, layout: ApLayout, radii: Sequence[float] | None = None) -> float:
    """Largest Zone-0 radius of AP ``k`` that stays clear of every
    neighbouring cell footprint."""
    radii = layout.radii if radii is None else radii
    i = layout.index(k)
    r_k = radii[i]
    worst = 0.0
    for j, other in enumerate(layout.aps):
        if j == i:
            continue
        d = _horizontal_distance(layout.aps[i], other)
        worst = max(worst, r_k + radii[j] - d)
    return r_k - worst


def lambda_param(ap: AccessPoint, rx: Receiver, model: RateModel,
                 p_sub: float, b_sub: float, d_v: float) -> float:
    """Link-budget constant such that ``SNR(r) = lam / (r^2 + d_v^2)^(m+3)``.

    The filter and concentrator gains are taken at their flat in-FOV values.
    """
    m = ap.order
    num = ((m + 1) * rx.oe_efficiency * p_sub * rx.filter_gain
           * rx.flat_concentrator_gain * d_v ** (m + 1) * rx.detector_area)
    return num * num / (4 * rx.noise_density * model.clipping_ratio * b_sub * math.pi ** 2)


def _closed_snr(lam: float, m: float, d_v: float, r: float) -> float:
    return lam * (d_v * d_v + r * r) ** (-m - 3)


def zone0_radius(rho: float, n0: int, n: int, lam: float, m: float, d_v: float,
                 gamma: float = math.inf, illum_limit: float = math.inf) -> float:
    """Zone-0 radius at which ``n0`` subcarriers deliver ``rho`` of the
    centre rate, capped by ``gamma`` and ``illum_limit``.

    Returns 0 when the link budget cannot meet ``rho`` even at the nadir.
    """
    if n0 < 1 or n0 > n:
        raise ValueError(f"n0 must lie in [1, {n}], got {n0}")
    if lam <= 0:
        raise ValueError("lam must be positive")
    exponent = rho * n / n0
    if exponent == 1.0:
        analytic = 0.0
    else:
        denom = math.expm1(exponent * math.log1p(_closed_snr(lam, m, d_v, 0.0)))
        radicand = (lam / denom) ** (1.0 / (m + 3)) - d_v * d_v
        analytic = math.sqrt(radicand) if radicand > 0 else 0.0
    return min(analytic, gamma, illum_limit)


def zone0_subcarriers(rho: float, n: int, lam: float, m: float, d_v: float,
                      r0: float) -> int:
    """Subcarriers Zone 0 needs so that a user at ``r0`` reaches ``rho`` of
    the centre rate (floored, at most ``n``)."""
    if r0 < 0:
        raise ValueError("r0 must be non-negative")
    ratio = (rho * n * math.log1p(_closed_snr(lam, m, d_v, 0.0))
             / math.log1p(_closed_snr(lam, m, d_v, r0)))
    return min(int(math.floor(ratio * (1 + _FLOOR_SLACK))), n)


def illuminance(i0: float, m: float, d_v: float, r):
    """Horizontal illuminance in lux at horizontal distance ``r``."""
    if i0 <= 0:
        raise ValueError("i0 must be positive")
    return i0 * d_v ** (m + 1) / (r * r + d_v * d_v) ** ((m + 3) / 2)


def illumination_limit(spec: IlluminationSpec, m: float, d_v: float) -> float:
    """Largest radius at which the illuminance still reaches ``e_min``;
    infinite when the constraint is disabled."""
    if not spec.enabled:
        return math.inf
    i0 = spec.intensity(d_v)
    radicand = (i0 * d_v ** (m + 1) / spec.e_min) ** (2 / (m + 3)) - d_v * d_v
    return math.sqrt(max(radicand, 0.0))


def subcarrier_cap(beta: float, n: int) -> int:
    """Integer Zone-0 subcarrier budget ``beta * n`` rounded half-up."""
    return max(1, min(n, int(math.floor(beta * n + 0.5))))


def _realized_rho(n0: int, n: int, lam: float, m: float, d_v: float, r0: float) -> float:
    centre = math.log1p(_closed_snr(lam, m, d_v, 0.0))
    edge = math.log1p(_closed_snr(lam, m, d_v, r0))
    return n0 * edge / (n * centre)


def define_zones(ap: AccessPoint, rx: Receiver, model: RateModel,
                 layout: ApLayout | None, policy: ZonePolicy,
                 illum: IlluminationSpec = IlluminationSpec(),
                 d_v: float | None = None) -> ZonePair:
    """Cell-level resource allocation for ``ap``.

    Starts from the closed-form radius for the subcarrier cap and walks the
    radius down in ``policy.radius_step`` until the required subcarrier count
    fits under the cap.  When Zone 0 ends up covering the whole cell it takes
    the full cap, so no subcarriers are stranded on an empty ring.

    ``layout`` supplies neighbours and the plane separation; pass ``None``
    with ``d_v`` for an isolated AP.
    """
    if layout is None:
        if d_v is None:
            raise ValueError("d_v is required without a layout")
        layout = ApLayout([ap], d_v)
    d_v = layout.d_v
    n = ap.subcarriers
    m = ap.order
    r_cell = cell_radius(d_v, ap.half_angle)
    gamma = max(min(overlap_limit(ap.id, layout), r_cell), 0.0)
    lim = illumination_limit(illum, m, d_v)
    lam = lambda_param(ap, rx, model, ap.subcarrier_power, ap.subcarrier_bandwidth, d_v)
    cap = subcarrier_cap(policy.beta, n)
    rho = policy.rho

    r_lim = zone0_radius(rho, cap, n, lam, m, d_v, gamma, lim)

    r0 = n0 = None
    k = 0
    while True:
        r = r_lim - k * policy.radius_step
        if r < 0:
            break
        cand = zone0_subcarriers(rho, n, lam, m, d_v, r)
        if cand <= cap:
            r0, n0 = r, cand
            break
        k += 1
    if r0 is None:
        r0, n0 = 0.0, min(int(math.floor(rho * n)), cap)
    if r0 >= r_cell * (1 - 1e-12):
        r0, n0 = r_cell, cap

    return ZonePair(r0=r0, n0=n0, r_cell=r_cell, n_total=n, gamma=gamma,
                    illum_limit=lim,
                    realized_rho=_realized_rho(n0, n, lam, m, d_v, r0))
