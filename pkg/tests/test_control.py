import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import flexboom as fb
from flexboom.control import feedforward_tension_rate

# Cubic torque-to-deflection map identified on the bench prototype
# (torque in N m, deflection in mm), coefficients in descending degree.
PROTOTYPE_MAP = (-1902.0, 1414.0, -302.7, 20.07)


def quintic_profile(t0=0.15, tf=0.327, duration=30.0):
    return fb.FeedforwardProfile.quintic(t0, tf, duration)


def test_gain_validation():
    with pytest.raises(ValueError):
        fb.PDGains(k_p=0.0, k_d=1.0)
    with pytest.raises(ValueError):
        fb.PDGains(k_p=1.0, k_d=-2.0)


def test_quintic_endpoints():
    profile = quintic_profile()
    assert fb.feedforward_tension(profile, 0.0) == 0.15
    assert fb.feedforward_tension(profile, 30.0) == 0.327
    # hold past the end of the maneuver
    assert fb.feedforward_tension(profile, 31.0) == 0.327
    assert fb.feedforward_tension(profile, 1e6) == 0.327


def test_quintic_midpoint_is_mean():
    profile = quintic_profile()
    mid = fb.feedforward_tension(profile, 15.0)
    assert mid == pytest.approx((0.15 + 0.327) / 2.0, rel=1e-15)


def test_quintic_endpoint_derivatives_vanish():
    profile = quintic_profile()
    span = abs(profile.tension_final - profile.tension_initial)
    for t in (0.0, profile.duration):
        assert abs(feedforward_tension_rate(profile, t)) <= 1e-12 * span
        # second derivative of the blend is 60 s - 180 s^2 + 120 s^3
        s = t / profile.duration
        accel = (60.0 * s - 180.0 * s ** 2 + 120.0 * s ** 3) * span \
            / profile.duration ** 2
        assert abs(accel) <= 1e-12 * span


@settings(max_examples=100)
@given(t0=st.floats(min_value=-2.0, max_value=2.0),
       tf=st.floats(min_value=-2.0, max_value=2.0),
       frac=st.floats(min_value=0.0, max_value=1.0))
def test_quintic_monotone_between_endpoints(t0, tf, frac):
    profile = fb.FeedforwardProfile.quintic(t0, tf, 10.0)
    lo = fb.feedforward_tension(profile, 10.0 * frac * 0.5)
    hi = fb.feedforward_tension(profile, 10.0 * (0.5 + frac * 0.5))
    if tf >= t0:
        assert hi >= lo - 1e-12
    else:
        assert hi <= lo + 1e-12


def test_constant_profile():
    profile = fb.FeedforwardProfile.constant(1.0)
    for t in (0.0, 5.0, 500.0):
        assert fb.feedforward_tension(profile, t) == 1.0
        assert feedforward_tension_rate(profile, t) == 0.0


def test_prototype_map_values():
    ref = fb.ReferenceTrajectory.map_composed(PROTOTYPE_MAP)
    profile = quintic_profile()
    w_end, _ = fb.desired_deflection(ref, profile.duration, profile)
    assert w_end == pytest.approx(5.77, abs=0.01)   # mm at 0.327 N m
    w_start, rate_start = fb.desired_deflection(ref, 0.0, profile)
    assert abs(w_start - 0.06) < 0.01               # ~no deflection at 0.15 N m
    assert rate_start == 0.0


def test_map_composed_rate_matches_finite_differences():
    ref = fb.ReferenceTrajectory.map_composed(PROTOTYPE_MAP)
    profile = quintic_profile()
    eps = 1e-6
    for t in (3.0, 11.0, 19.5, 27.0):
        _, rate = fb.desired_deflection(ref, t, profile)
        w_plus, _ = fb.desired_deflection(ref, t + eps, profile)
        w_minus, _ = fb.desired_deflection(ref, t - eps, profile)
        assert rate == pytest.approx((w_plus - w_minus) / (2.0 * eps),
                                     rel=1e-6, abs=1e-9)


def test_map_composed_requires_map_and_profile():
    with pytest.raises(ValueError):
        fb.ReferenceTrajectory(mode="map-composed")
    ref = fb.ReferenceTrajectory.map_composed(PROTOTYPE_MAP)
    with pytest.raises(ValueError):
        fb.desired_deflection(ref, 1.0, None)


def test_quintic_reference_endpoints():
    ref = fb.ReferenceTrajectory.quintic(1.0, 1.5, 100.0)
    assert fb.desired_deflection(ref, 0.0) == (1.0, 0.0)
    w_end, rate_end = fb.desired_deflection(ref, 100.0)
    assert w_end == 1.5 and rate_end == 0.0
    assert fb.desired_deflection(ref, 150.0) == (1.5, 0.0)


def _config(k_p=10.0, k_d=25.0, clamp=False, ff=None, ref=None):
    return fb.ControllerConfig(
        gains=fb.PDGains(k_p=k_p, k_d=k_d),
        feedforward=ff or fb.FeedforwardProfile.constant(1.0),
        reference=ref or fb.ReferenceTrajectory.constant(1.26855),
        clamp_nonnegative=clamp,
    )


def test_zero_error_returns_feedforward():
    cfg = _config()
    sample = fb.control_input(cfg, 3.0, 1.26855, 0.0)
    assert sample.u == 1.0
    assert sample.u_unclamped == 1.0


def test_gain_arithmetic():
    cfg = _config()
    sample = fb.control_input(cfg, 0.0, 1.26855 + 0.1, 0.0)
    assert sample.u == pytest.approx(1.0 - 10.0 * 0.1, abs=1e-12)


def test_clamp_logs_preclamp_value():
    cfg = _config(clamp=True)
    # error big enough to drive the raw command to -0.2 N
    sample = fb.control_input(cfg, 0.0, 1.26855 + 0.12, 0.0)
    assert sample.u_unclamped == pytest.approx(-0.2, abs=1e-12)
    assert sample.u == 0.0


def test_unclamped_negative_passes_through():
    cfg = _config(clamp=False)
    sample = fb.control_input(cfg, 0.0, 1.26855 + 0.12, 0.0)
    assert sample.u == pytest.approx(-0.2, abs=1e-12)


def test_measurements_must_be_finite():
    with pytest.raises(ValueError):
        fb.control_input(_config(), 0.0, float("nan"), 0.0)


def test_duration_consistency_enforced():
    ff = fb.FeedforwardProfile.quintic(0.5, 1.0, 100.0)
    ref = fb.ReferenceTrajectory.quintic(1.0, 1.3, 80.0)
    with pytest.raises(ValueError):
        fb.ControllerConfig(gains=fb.PDGains(10.0, 25.0), feedforward=ff,
                            reference=ref)


@settings(max_examples=25)
@given(k_p=st.floats(min_value=1e-3, max_value=1e3),
       k_d=st.floats(min_value=1e-3, max_value=1e3))
def test_feedback_map_is_very_strictly_passive(k_p, k_d):
    """Seen from rate error to tension, the law is k_d + k_p / s: phase in
    (-90, 0] and strictly positive feedthrough for every gain pair."""
    omega = np.logspace(-3, 3, 200)
    response = k_d + k_p / (1j * omega)
    phase = np.degrees(np.angle(response))
    assert np.all(phase > -90.0)
    assert np.all(phase <= 0.0)
    assert k_d > 0.0


def test_hold_behavior_of_composed_reference():
    ref = fb.ReferenceTrajectory.map_composed(PROTOTYPE_MAP)
    profile = quintic_profile()
    w_end, rate_end = fb.desired_deflection(ref, profile.duration, profile)
    w_later, rate_later = fb.desired_deflection(ref, profile.duration + 50.0, profile)
    assert w_later == w_end
    assert rate_end == 0.0 and rate_later == 0.0
