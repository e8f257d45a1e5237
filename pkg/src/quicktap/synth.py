"""Seeded synthetic tap traces with planted single/double differences.

Stands in for real participant data: doubles are generated as faster,
heavier contacts (shorter completion, larger contact size and travel),
which is the direction a planned-in-advance double-tap motion should
show. The ``separation`` knob scales every planted class gap; 0 removes
the signal entirely. All parameters are desk-scale inventions, not
measurements.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GenerationError
from .features import DeviceProfile
from .taps import (
    LabeledTap,
    Phase,
    PowerSource,
    TapLabel,
    TapRole,
    TouchSample,
    label_taps,
    segment_taps,
)


@dataclass(frozen=True)
class SynthConfig:
    users: int = 1
    #: primary tap events per user (a double event adds its trailing tap
    #: on top of this count)
    taps_per_user: int = 400
    single_fraction: float = 0.5
    profile: DeviceProfile = DeviceProfile.LAPTOP
    seed: int = 0
    #: scales every planted class gap; 0 = identical class distributions
    separation: float = 1.0
    single_completion_mean_ms: float = 140.0
    double_completion_mean_ms: float = 80.0
    completion_log_sd: float = 0.3
    contact_size_mean: float = 4.0
    contact_size_sd: float = 0.35
    double_contact_gain: float = 0.10
    travel_mean: float = 0.004
    travel_sd: float = 0.0025
    double_travel_gain: float = 1.2
    double_gap_range_us: tuple[int, int] = (40_000, 350_000)
    idle_gap_range_us: tuple[int, int] = (600_000, 1_200_000)
    user_speed_sd: float = 0.08
    user_contact_sd: float = 0.05
    double_tap_threshold_us: int = 500_000
    #: completion clamp; keeps every tap under the segmentation cutoff
    max_completion_us: int = 450_000
    sampling_hz: float | None = None

    def __post_init__(self):
        if self.users < 1 or self.taps_per_user < 1:
            raise ConfigError("users and taps_per_user must be >= 1")
        if not (0.0 < self.single_fraction < 1.0):
            raise ConfigError(f"single_fraction must lie in (0,1), got {self.single_fraction}")
        if self.separation < 0:
            raise ConfigError(f"separation must be >= 0, got {self.separation}")
        for name in (
            "single_completion_mean_ms",
            "double_completion_mean_ms",
            "completion_log_sd",
            "contact_size_mean",
            "contact_size_sd",
            "travel_sd",
            "user_speed_sd",
            "user_contact_sd",
        ):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        lo, hi = self.double_gap_range_us
        if not (0 < lo < hi < self.double_tap_threshold_us):
            raise ConfigError("double gap range must sit strictly inside (0, threshold)")
        lo, hi = self.idle_gap_range_us
        if not (self.double_tap_threshold_us < lo < hi):
            raise ConfigError("idle gap range must sit strictly above the threshold")
        if self.max_completion_us >= self.double_tap_threshold_us:
            raise ConfigError("max_completion_us must stay below the tap-length cutoff")

    @property
    def effective_sampling_hz(self) -> float:
        return self.sampling_hz if self.sampling_hz is not None else self.profile.default_sampling_hz


@dataclass(frozen=True)
class UserTrace:
    user_id: int
    samples: tuple[TouchSample, ...]
    labeled: tuple[LabeledTap, ...]


def _draw_completion_us(rng, cfg: SynthConfig, is_double: bool, user_speed: float) -> int:
    # lognormal parameterized so exp(mu + sd^2/2) equals the target mean
    mean_ms = cfg.single_completion_mean_ms
    if is_double:
        gap = math.log(cfg.single_completion_mean_ms / cfg.double_completion_mean_ms)
        mean_ms = cfg.single_completion_mean_ms * math.exp(-cfg.separation * gap)
    mu = math.log(mean_ms) - 0.5 * cfg.completion_log_sd**2 + user_speed
    ms = float(rng.lognormal(mean=mu, sigma=cfg.completion_log_sd))
    us = int(round(ms * 1000.0))
    return max(1_000, min(us, cfg.max_completion_us))


def _draw_contact(rng, cfg: SynthConfig, is_double: bool, user_contact: float) -> float:
    mean = cfg.contact_size_mean * math.exp(user_contact)
    if is_double:
        mean *= 1.0 + cfg.double_contact_gain * cfg.separation
    return max(0.05, float(rng.normal(mean, cfg.contact_size_sd)))


def _draw_travel(rng, cfg: SynthConfig, is_double: bool) -> tuple[float, float]:
    mean = cfg.travel_mean
    if is_double:
        mean *= 1.0 + cfg.double_travel_gain * cfg.separation
    dx = float(np.clip(rng.normal(mean, cfg.travel_sd), -0.03, 0.03))
    dy = float(np.clip(rng.normal(mean, cfg.travel_sd), -0.03, 0.03))
    return dx, dy


def _tap_samples(
    rng,
    cfg: SynthConfig,
    t0: int,
    is_double: bool,
    user_speed: float,
    user_contact: float,
    power: PowerSource,
) -> list[TouchSample]:
    completion = _draw_completion_us(rng, cfg, is_double, user_speed)
    contact_max = _draw_contact(rng, cfg, is_double, user_contact)
    dx, dy = _draw_travel(rng, cfg, is_double)
    x0 = float(rng.uniform(0.2, 0.8))
    y0 = float(rng.uniform(0.2, 0.8))
    period = 1e6 / cfg.effective_sampling_hz
    times = [t0]
    k = 1
    while t0 + k * period < t0 + completion:
        times.append(int(round(t0 + k * period)))
        k += 1
    times.append(t0 + completion)
    n = len(times)
    peak = n // 2
    samples = []
    for i, t in enumerate(times):
        frac = i / (n - 1) if n > 1 else 1.0
        samples.append(
            TouchSample(
                t_us=t,
                x=x0 + dx * frac,
                y=y0 + dy * frac,
                contact_size=contact_max if i == peak else 0.55 * contact_max,
                phase=Phase.DOWN if i == 0 else (Phase.UP if i == n - 1 else Phase.MOVE),
                power=power,
            )
        )
    return samples


def generate(cfg: SynthConfig) -> list[UserTrace]:
    """Generate one labeled trace per user, deterministic under cfg.seed.

    The planted single/double-first sequence is verified against
    segment_taps + label_taps run over the emitted stream, so the
    generator can never drift from the labeling rules.
    """
    traces = []
    for user in range(cfg.users):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(user,)))
        )
        user_speed = float(rng.normal(0.0, cfg.user_speed_sd))
        user_contact = float(rng.normal(0.0, cfg.user_contact_sd))
        if cfg.profile is DeviceProfile.LAPTOP:
            power = PowerSource.AC if rng.random() < 0.5 else PowerSource.BATTERY
        else:
            power = PowerSource.UNKNOWN
        n_single = int(round(cfg.single_fraction * cfg.taps_per_user))
        n_single = min(max(n_single, 1), cfg.taps_per_user - 1)
        planted = np.array(
            [TapLabel.SINGLE] * n_single
            + [TapLabel.DOUBLE_FIRST] * (cfg.taps_per_user - n_single)
        )
        rng.shuffle(planted)
        stream: list[TouchSample] = []
        t = int(rng.integers(*cfg.idle_gap_range_us))
        for label in planted:
            is_double = label is TapLabel.DOUBLE_FIRST
            first = _tap_samples(rng, cfg, t, is_double, user_speed, user_contact, power)
            stream.extend(first)
            t = first[-1].t_us
            if is_double:
                t += int(rng.integers(*cfg.double_gap_range_us))
                second = _tap_samples(rng, cfg, t, True, user_speed, user_contact, power)
                stream.extend(second)
                t = second[-1].t_us
            t += int(rng.integers(*cfg.idle_gap_range_us))
        taps = segment_taps(stream)
        labeled = label_taps(taps, cfg.double_tap_threshold_us)
        _check_closure(user, planted, labeled)
        traces.append(UserTrace(user_id=user, samples=tuple(stream), labeled=tuple(labeled)))
    return traces


def _check_closure(user: int, planted: np.ndarray, labeled: tuple | list) -> None:
    expected: list[tuple[TapLabel, TapRole]] = []
    for label in planted:
        if label is TapLabel.DOUBLE_FIRST:
            expected.append((TapLabel.DOUBLE_FIRST, TapRole.PRIMARY))
            expected.append((TapLabel.SINGLE, TapRole.DOUBLE_SECOND))
        else:
            expected.append((TapLabel.SINGLE, TapRole.PRIMARY))
    got = [(lt.label, lt.role) for lt in labeled]
    if got != expected:
        raise GenerationError(
            f"user {user}: emitted stream relabels differently than planted "
            f"({len(got)} taps vs {len(expected)} expected)"
        )
