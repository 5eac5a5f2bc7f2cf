"""Lambertian line-of-sight channel, SNR/SINR and achievable rate.

All functions are pure and accept numpy arrays where a distance or gain
argument is expected, so a whole user population can be evaluated at once.
Angles are radians; areas are square meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "AccessPoint",
    "Receiver",
    "RateModel",
    "LinkGeometry",
    "lambertian_order",
    "concentrator_gain",
    "channel_gain",
    "gain_at_distance",
    "snr",
    "sinr",
    "achievable_rate",
    "rate_per_subcarrier",
]


def lambertian_order(theta: float) -> float:
    """Lambertian index ``m = -1 / log2(cos(theta))`` of an LED with
    half-intensity angle ``theta`` (radians)."""
    if not 0.0 < theta < math.pi / 2:
        raise ValueError(f"half-intensity angle must lie in (0, pi/2), got {theta!r}")
    # log(cos) via log1p(-sin^2)/2 stays accurate for narrow beams.
    log_cos = 0.5 * math.log1p(-math.sin(theta) ** 2)
    return -math.log(2.0) / log_cos


def concentrator_gain(psi, n: float, fov: float):
    """Optical concentrator gain ``n^2 / sin^2(fov)``, zero outside the FOV."""
    gain = n * n / math.sin(fov) ** 2
    psi = np.asarray(psi, dtype=float)
    out = np.where(psi <= fov, gain, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AccessPoint:
    """LED transmitter. ``position`` is (x, y, z) in meters."""

    id: int
    position: tuple[float, float, float]
    half_angle: float
    optical_power: float = 9.0
    bandwidth: float = 20e6
    subcarriers: int = 64

    def __post_init__(self):
        if not 0.0 < self.half_angle < math.pi / 2:
            raise ValueError(f"AP {self.id}: half_angle must lie in (0, pi/2)")
        if self.optical_power <= 0:
            raise ValueError(f"AP {self.id}: optical_power must be positive")
        if self.bandwidth <= 0:
            raise ValueError(f"AP {self.id}: bandwidth must be positive")
        if int(self.subcarriers) != self.subcarriers or self.subcarriers < 1:
            raise ValueError(f"AP {self.id}: subcarriers must be a positive integer")
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))

    @property
    def order(self) -> float:
        return lambertian_order(self.half_angle)

    @property
    def subcarrier_power(self) -> float:
        return self.optical_power / self.subcarriers

    @property
    def subcarrier_bandwidth(self) -> float:
        return self.bandwidth / self.subcarriers


@dataclass(frozen=True)
class Receiver:
    """Upward-facing photodetector (reference defaults, SI units)."""

    detector_area: float = 1e-4
    fov: float = math.pi / 2
    refractive_index: float = 1.5
    filter_gain: float = 1.0
    oe_efficiency: float = 0.53
    noise_density: float = 1e-21

    def __post_init__(self):
        if self.detector_area <= 0:
            raise ValueError("detector_area must be positive")
        if not 0.0 < self.fov <= math.pi / 2:
            raise ValueError("fov must lie in (0, pi/2]")
        if self.refractive_index < 1:
            raise ValueError("refractive_index must be >= 1")
        if not 0.0 < self.filter_gain <= 1.0:
            raise ValueError("filter_gain must lie in (0, 1]")
        if not 0.0 < self.oe_efficiency <= 1.0:
            raise ValueError("oe_efficiency must lie in (0, 1]")
        if self.noise_density <= 0:
            raise ValueError("noise_density must be positive")

    @property
    def flat_concentrator_gain(self) -> float:
        return self.refractive_index ** 2 / math.sin(self.fov) ** 2


@dataclass(frozen=True)
class RateModel:
    """``clipping_ratio`` is the optical-to-electrical power ratio (upsilon);
    ``rate_constant`` is the ``c`` inside ``log2(1 + c^2 SINR)``."""

    clipping_ratio: float = 3.0
    rate_constant: float = 1.0
    half_factor: bool = True

    def __post_init__(self):
        if self.clipping_ratio < 1:
            raise ValueError("clipping_ratio must be >= 1")
        if not 0.0 < self.rate_constant <= 1.0:
            raise ValueError("rate_constant must lie in (0, 1]")

    @property
    def prefactor(self) -> float:
        return 0.5 if self.half_factor else 1.0


@dataclass(frozen=True)
class LinkGeometry:
    """Horizontal offset ``r`` and vertical separation ``d_v`` of a link
    between parallel transmit and receive planes."""

    horizontal_distance: float
    vertical_distance: float
    incidence_angle: float = field(init=False)

    def __post_init__(self):
        if self.horizontal_distance < 0:
            raise ValueError("horizontal_distance must be >= 0")
        if self.vertical_distance <= 0:
            raise ValueError("vertical_distance must be positive")
        object.__setattr__(
            self, "incidence_angle",
            math.atan2(self.horizontal_distance, self.vertical_distance))

    @property
    def distance(self) -> float:
        return math.hypot(self.horizontal_distance, self.vertical_distance)


def gain_at_distance(r, d_v: float, m: float, rx: Receiver):
    """DC gain for horizontal distance(s) ``r``; vectorised form of
    :func:`channel_gain`."""
    r = np.asarray(r, dtype=float)
    d2 = r * r + d_v * d_v
    psi = np.arctan2(r, d_v)
    g = concentrator_gain(psi, rx.refractive_index, rx.fov)
    h = ((m + 1) * rx.detector_area * rx.filter_gain * g * d_v ** (m + 1)
         / (2 * math.pi * d2 ** ((m + 3) / 2)))
    return float(h) if h.ndim == 0 else h


def channel_gain(ap: AccessPoint, rx: Receiver, geom: LinkGeometry) -> float:
    return gain_at_distance(geom.horizontal_distance, geom.vertical_distance,
                            ap.order, rx)


def snr(p_sub, b_sub: float, h, rx: Receiver, model: RateModel):
    """Electrical SNR ``(gamma P h)^2 / (upsilon N0 B)`` of one subcarrier."""
    signal = (rx.oe_efficiency * np.asarray(p_sub, dtype=float) * np.asarray(h, dtype=float)) ** 2
    out = signal / (model.clipping_ratio * rx.noise_density * b_sub)
    return float(out) if np.ndim(out) == 0 else out


def sinr(p_sub: float, b_sub: float, serving_h: float,
         interferer_links: Iterable[tuple[float, float]],
         rx: Receiver, model: RateModel) -> float:
    """SINR with co-channel interferers given as ``(power, gain)`` pairs."""
    gamma = rx.oe_efficiency
    interference = sum((p * h) ** 2 for p, h in interferer_links)
    noise = model.clipping_ratio * rx.noise_density * b_sub
    return (gamma * p_sub * serving_h) ** 2 / (noise + gamma ** 2 * interference)


def achievable_rate(subcarrier_allocs: Sequence[tuple[float, float]],
                    model: RateModel = RateModel()) -> float:
    """Rate in bit/s over ``(bandwidth, sinr)`` pairs."""
    c2 = model.rate_constant ** 2
    total = 0.0
    for bandwidth, s in subcarrier_allocs:
        if s < 0:
            raise ValueError("SINR must be non-negative")
        total += bandwidth * math.log2(1.0 + c2 * s)
    return model.prefactor * total


def rate_per_subcarrier(b_sub: float, sinr_values, model: RateModel):
    """Vectorised single-subcarrier rate, one entry per user."""
    s = np.asarray(sinr_values, dtype=float)
    return model.prefactor * b_sub * np.log2(1.0 + model.rate_constant ** 2 * s)
