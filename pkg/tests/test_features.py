"""Feature extraction and standardization."""
import json

import numpy as np
import pytest

from quicktap.errors import DimensionMismatchError, EmptyInputError
from quicktap.features import (
    DeviceProfile,
    FeatureVector,
    extract,
    feature_matrix,
    standardize_apply,
    standardize_fit,
)
from quicktap.taps import PowerSource

from conftest import make_tap


class TestExtract:
    def test_stationary_tap_has_zero_motion(self):
        tap = make_tap(0, 0, 100_000, x=0.3, y=0.4)
        fv = extract(tap, DeviceProfile.LAPTOP)
        names = DeviceProfile.LAPTOP.feature_names
        vals = dict(zip(names, fv.values))
        assert vals["displacement_x"] == 0.0
        assert vals["displacement_y"] == 0.0
        assert vals["velocity_x"] == 0.0
        assert vals["velocity_y"] == 0.0

    def test_hand_computed_motion_features(self):
        tap = make_tap(0, 0, 100_000, x=0.20, y=0.30, x_up=0.26, y_up=0.38)
        fv = extract(tap, DeviceProfile.LAPTOP)
        vals = dict(zip(DeviceProfile.LAPTOP.feature_names, fv.values))
        assert vals["completion_s"] == pytest.approx(0.1, abs=1e-12)
        assert vals["displacement_x"] == pytest.approx(0.06, abs=1e-12)
        assert vals["displacement_y"] == pytest.approx(0.08, abs=1e-12)
        assert vals["velocity_x"] == pytest.approx(0.6, abs=1e-12)
        assert vals["velocity_y"] == pytest.approx(0.8, abs=1e-12)
        assert vals["down_x"] == 0.20
        assert vals["up_y"] == 0.38

    def test_smartphone_profile_has_two_values(self):
        tap = make_tap(0, 0, 120_000, contact=2.5)
        fv = extract(tap, DeviceProfile.SMARTPHONE)
        assert fv.values.shape == (2,)
        assert fv.values[0] == pytest.approx(0.12)
        assert fv.values[1] == 2.5

    def test_zero_completion_velocity_is_zero(self):
        tap = make_tap(0, 100, 100, x=0.2, x_up=0.21)
        fv = extract(tap, DeviceProfile.LAPTOP)
        vals = dict(zip(DeviceProfile.LAPTOP.feature_names, fv.values))
        assert vals["velocity_x"] == 0.0
        assert vals["completion_s"] == 0.0

    @pytest.mark.parametrize(
        "power,flag",
        [(PowerSource.AC, 0.0), (PowerSource.BATTERY, 1.0), (PowerSource.UNKNOWN, 0.0)],
    )
    def test_power_flag(self, power, flag):
        tap = make_tap(0, 0, 50_000, power=power)
        fv = extract(tap, DeviceProfile.LAPTOP)
        assert fv.values[-1] == flag

    def test_time_scale_covariance(self):
        # doubling all timestamps halves velocity, displacement unchanged
        a = extract(make_tap(0, 0, 100_000, x=0.2, x_up=0.3), DeviceProfile.LAPTOP)
        b = extract(make_tap(0, 0, 200_000, x=0.2, x_up=0.3), DeviceProfile.LAPTOP)
        names = DeviceProfile.LAPTOP.feature_names
        va, vb = dict(zip(names, a.values)), dict(zip(names, b.values))
        assert vb["velocity_x"] == pytest.approx(va["velocity_x"] / 2.0, rel=1e-12)
        assert vb["displacement_x"] == va["displacement_x"]

    def test_serialization_is_stable(self):
        tap = make_tap(7, 1234, 99_999, x=0.123, y=0.456, x_up=0.2, y_up=0.5, contact=1.7)
        a = extract(tap, DeviceProfile.LAPTOP)
        b = extract(tap, DeviceProfile.LAPTOP)
        assert json.dumps(list(a.values)) == json.dumps(list(b.values))
        assert a.tap_id == 7


class TestScaler:
    def test_single_row_gives_zero_stds(self):
        X = np.array([[1.0, 5.0, -2.0]])
        sc = standardize_fit(X)
        assert np.array_equal(sc.means, X[0])
        assert np.array_equal(sc.stds, np.zeros(3))

    def test_population_std_hand_case(self):
        sc = standardize_fit(np.array([[1.0], [3.0]]))
        assert sc.means[0] == 2.0
        assert sc.stds[0] == 1.0  # population, not sample

    def test_identical_rows_degenerate(self):
        X = np.tile([2.0, -1.0], (5, 1))
        sc = standardize_fit(X)
        assert np.array_equal(sc.stds, np.zeros(2))
        assert np.array_equal(sc.transform(X), np.zeros_like(X))

    def test_empty_input_raises(self):
        with pytest.raises(EmptyInputError):
            standardize_fit(np.empty((0, 3)))

    def test_apply_hand_cases(self):
        sc = standardize_fit(np.array([[1.0], [3.0]]))
        fv = FeatureVector(values=np.array([4.0]), tap_id=0)
        assert standardize_apply(sc, fv).values[0] == 2.0
        fv_mean = FeatureVector(values=np.array([2.0]), tap_id=0)
        assert standardize_apply(sc, fv_mean).values[0] == 0.0

    def test_dimension_mismatch(self):
        sc = standardize_fit(np.ones((3, 2)))
        with pytest.raises(DimensionMismatchError):
            standardize_apply(sc, FeatureVector(values=np.ones(3), tap_id=0))

    def test_fitting_set_maps_to_zero_mean_unit_std(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(200, 6)) * rng.uniform(0.1, 50, size=6) + rng.normal(size=6)
        X[:, 3] = 7.7  # degenerate column
        sc = standardize_fit(X)
        Z = sc.transform(X)
        live = sc.stds > 0
        assert np.all(np.abs(Z[:, live].mean(axis=0)) <= 1e-9)
        assert np.all(np.abs(Z[:, live].std(axis=0) - 1.0) <= 1e-9)
        assert np.all(Z[:, ~live] == 0.0)


def test_feature_matrix_shape_and_order():
    taps = [make_tap(i, i * 1_000_000, i * 1_000_000 + 50_000) for i in range(4)]
    X = feature_matrix(taps, DeviceProfile.SMARTPHONE)
    assert X.shape == (4, 2)
    X_empty = feature_matrix([], DeviceProfile.LAPTOP)
    assert X_empty.shape == (0, 11)
