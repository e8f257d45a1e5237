"""Shared builders for tap/stream test data."""
import numpy as np
import pytest

from quicktap.classifier import ModelWeights
from quicktap.features import DeviceProfile, Scaler
from quicktap.taps import Phase, PowerSource, TouchSample, TapRecord


def sample(t_us, x=0.5, y=0.5, contact=1.0, phase=Phase.MOVE, power=PowerSource.AC):
    return TouchSample(t_us=t_us, x=x, y=y, contact_size=contact, phase=phase, power=power)


def tap_pair(t_down, t_up, x=0.5, y=0.5, x_up=None, y_up=None, contact=1.0,
             power=PowerSource.AC):
    """Minimal two-sample Down/Up stream chunk."""
    return [
        sample(t_down, x, y, contact, Phase.DOWN, power),
        sample(t_up, x_up if x_up is not None else x,
               y_up if y_up is not None else y, contact, Phase.UP, power),
    ]


def make_tap(tap_id, t_down, t_up, x=0.5, y=0.5, x_up=None, y_up=None,
             contact=1.0, power=PowerSource.AC):
    return TapRecord.from_samples(tap_id, tuple(tap_pair(
        t_down, t_up, x, y, x_up, y_up, contact, power)))


def constant_model(profile, logit, pat=0.65):
    """A model that scores every tap at sigmoid(logit)."""
    d = profile.feature_count
    return ModelWeights(
        w=np.zeros(d),
        b=float(logit),
        scaler=Scaler(means=np.zeros(d), stds=np.ones(d)),
        profile=profile,
        pat=pat,
    )


@pytest.fixture
def always_single_model():
    return constant_model(DeviceProfile.SMARTPHONE, logit=10.0)


@pytest.fixture
def always_wait_model():
    return constant_model(DeviceProfile.SMARTPHONE, logit=-10.0)
