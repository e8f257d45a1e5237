"""Per-tap feature extraction and standardization.

The laptop profile uses eleven features (completion time, max contact
size, mean velocity X/Y, signed displacement X/Y, touch-down and touch-up
locations X/Y, and the AC/battery power flag); the smartphone profile
keeps only completion time and max contact size, since screen coordinates
on a direct-touch surface track UI layout rather than the gesture.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyInputError
from .taps import PowerSource, TapRecord

LAPTOP_FEATURES = (
    "completion_s",
    "max_contact_size",
    "velocity_x",
    "velocity_y",
    "displacement_x",
    "displacement_y",
    "down_x",
    "down_y",
    "up_x",
    "up_y",
    "power_flag",
)

SMARTPHONE_FEATURES = (
    "completion_s",
    "max_contact_size",
)


class DeviceProfile(enum.Enum):
    LAPTOP = "laptop"
    SMARTPHONE = "smartphone"

    @property
    def feature_names(self) -> tuple[str, ...]:
        return LAPTOP_FEATURES if self is DeviceProfile.LAPTOP else SMARTPHONE_FEATURES

    @property
    def feature_count(self) -> int:
        return len(self.feature_names)

    @property
    def default_sampling_hz(self) -> float:
        """Typical sensor rate for the form factor (provenance metadata)."""
        return 90.0 if self is DeviceProfile.LAPTOP else 60.0


@dataclass(frozen=True)
class FeatureVector:
    """Ordered feature values for one tap under a device profile."""

    values: np.ndarray
    tap_id: int


def extract(tap: TapRecord, profile: DeviceProfile) -> FeatureVector:
    """Compute the profile's feature vector for one tap.

    Completion time is in seconds; displacement is signed (up minus down)
    in normalized units per axis; velocity is displacement over completion
    time and defined as 0 for zero-duration taps; the power flag is 0 for
    AC and 1 for battery (unknown counts as AC).
    """
    completion_s = tap.completion_us / 1e6
    if profile is DeviceProfile.SMARTPHONE:
        values = np.array([completion_s, tap.max_contact_size], dtype=np.float64)
        return FeatureVector(values, tap.id)
    dx = tap.up.x - tap.down.x
    dy = tap.up.y - tap.down.y
    if completion_s > 0.0:
        vx, vy = dx / completion_s, dy / completion_s
    else:
        vx, vy = 0.0, 0.0
    power_flag = 1.0 if tap.down.power is PowerSource.BATTERY else 0.0
    values = np.array(
        [
            completion_s,
            tap.max_contact_size,
            vx,
            vy,
            dx,
            dy,
            tap.down.x,
            tap.down.y,
            tap.up.x,
            tap.up.y,
            power_flag,
        ],
        dtype=np.float64,
    )
    return FeatureVector(values, tap.id)


def feature_matrix(taps: list[TapRecord], profile: DeviceProfile) -> np.ndarray:
    """Stack per-tap feature vectors into an (n, d) float64 matrix."""
    if not taps:
        return np.empty((0, profile.feature_count), dtype=np.float64)
    return np.vstack([extract(t, profile).values for t in taps])


@dataclass(frozen=True)
class Scaler:
    """Per-column standardizer fitted with population statistics.

    Columns whose fitted std is 0 map every value to 0 on apply.
    """

    means: np.ndarray
    stds: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        if X.shape[-1] != self.means.shape[0]:
            raise DimensionMismatchError(
                f"scaler has {self.means.shape[0]} columns, data has {X.shape[-1]}"
            )
        safe = np.where(self.stds > 0.0, self.stds, 1.0)
        out = (X - self.means) / safe
        return np.where(self.stds > 0.0, out, 0.0)


def standardize_fit(X: np.ndarray) -> Scaler:
    """Fit per-column mean and population standard deviation.

    A column whose std is zero up to accumulation rounding (relative
    1e-12) is recorded as exactly 0; otherwise a constant column like
    7.7 would standardize to a constant +-1 instead of 0.
    """
    if X.shape[0] == 0:
        raise EmptyInputError("cannot fit a scaler on zero rows")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds = np.where(stds <= np.maximum(np.abs(means), 1.0) * 1e-12, 0.0, stds)
    return Scaler(means=means, stds=stds)


def standardize_apply(scaler: Scaler, fv: FeatureVector) -> FeatureVector:
    """Standardize one feature vector; zero-std columns map to 0."""
    return FeatureVector(scaler.transform(fv.values), fv.tap_id)
