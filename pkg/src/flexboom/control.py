"""PD tip-deflection control with constant or smooth time-varying feedforward.

The control tension is

    u(t) = T_des(t) - k_p (w_tip - w_des(t)) - k_d (w_rate - w_rate_des(t)),

optionally clamped to stay nonnegative (a cable cannot push).  Because the
measured plant output is the tip deflection *rate*, this PD law acts on the
rate channel as a PI map with feedthrough k_d, which is very strictly
passive for k_p, k_d > 0; that is what buys robust closed-loop stability.

Feedforward tension profiles and deflection references use the quintic
blend 10 s^3 - 15 s^4 + 6 s^5, which starts and ends with zero rate and
zero acceleration.  A reference can also be composed from a fitted
torque-to-deflection polynomial map evaluated along the feedforward
profile (a cubic map over the quintic profile yields a degree-15
polynomial of time); its rate uses the analytic chain rule so that no
numeric differentiation noise enters the derivative gain.

The module is unit agnostic: gains, tensions, deflections, and maps must
simply be supplied in one consistent unit system.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "PDGains",
    "FeedforwardProfile",
    "ReferenceTrajectory",
    "ControllerConfig",
    "ControlSample",
    "quintic_blend",
    "quintic_blend_rate",
    "feedforward_tension",
    "feedforward_tension_rate",
    "desired_deflection",
    "control_input",
    "make_controller",
]


def quintic_blend(s: float) -> float:
    """Blend 10 s^3 - 15 s^4 + 6 s^5 on s in [0, 1]."""
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s))


def quintic_blend_rate(s: float) -> float:
    """d/ds of the quintic blend: 30 s^2 (1 - s)^2, nonnegative on [0, 1]."""
    return 30.0 * s * s * (1.0 - s) * (1.0 - s)


@dataclass(frozen=True)
class PDGains:
    """Proportional and derivative gains; both strictly positive.

    k_d > 0 doubles as the strictly positive feedthrough of the equivalent
    PI-on-rate map, so it is load bearing for the passivity argument, not
    just a tuning preference.
    """

    k_p: float
    k_d: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.k_p) and self.k_p > 0.0):
            raise ValueError(f"k_p must be > 0, got {self.k_p!r}")
        if not (np.isfinite(self.k_d) and self.k_d > 0.0):
            raise ValueError(f"k_d must be > 0, got {self.k_d!r}")


@dataclass(frozen=True)
class FeedforwardProfile:
    """Feedforward tension: constant, or a quintic ramp from T_0 to T_f."""

    mode: str  # "constant" | "quintic"
    tension_final: float
    tension_initial: float = 0.0
    duration: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("constant", "quintic"):
            raise ValueError(f"unknown feedforward mode {self.mode!r}")
        if not (np.isfinite(self.tension_final) and np.isfinite(self.tension_initial)):
            raise ValueError("feedforward tensions must be finite")
        if self.mode == "quintic" and not self.duration > 0.0:
            raise ValueError("quintic feedforward needs duration > 0")

    @classmethod
    def constant(cls, tension: float) -> "FeedforwardProfile":
        return cls(mode="constant", tension_final=tension)

    @classmethod
    def quintic(cls, tension_initial: float, tension_final: float,
                duration: float) -> "FeedforwardProfile":
        return cls(mode="quintic", tension_final=tension_final,
                   tension_initial=tension_initial, duration=duration)

    @property
    def time_varying(self) -> bool:
        return self.mode == "quintic"


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Desired tip deflection: constant, quintic ramp, or map-composed.

    Map-composed mode evaluates a polynomial torque-to-deflection map
    (coefficients in descending degree) along the feedforward profile, so
    it additionally needs the FeedforwardProfile at evaluation time.
    """

    mode: str  # "constant" | "quintic-deflection" | "map-composed"
    w_final: float = 0.0
    w_initial: float = 0.0
    duration: float = 0.0
    map_coefficients: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("constant", "quintic-deflection", "map-composed"):
            raise ValueError(f"unknown reference mode {self.mode!r}")
        if self.mode == "quintic-deflection" and not self.duration > 0.0:
            raise ValueError("quintic-deflection reference needs duration > 0")
        if self.mode == "map-composed" and not self.map_coefficients:
            raise ValueError("map-composed reference needs map coefficients")
        if self.map_coefficients is not None:
            object.__setattr__(self, "map_coefficients",
                               tuple(float(c) for c in self.map_coefficients))

    @classmethod
    def constant(cls, w: float) -> "ReferenceTrajectory":
        return cls(mode="constant", w_final=w)

    @classmethod
    def quintic(cls, w_initial: float, w_final: float, duration: float
                ) -> "ReferenceTrajectory":
        return cls(mode="quintic-deflection", w_final=w_final,
                   w_initial=w_initial, duration=duration)

    @classmethod
    def map_composed(cls, map_coefficients: Sequence[float]) -> "ReferenceTrajectory":
        return cls(mode="map-composed", map_coefficients=tuple(map_coefficients))

    @property
    def time_varying(self) -> bool:
        return self.mode != "constant"


@dataclass(frozen=True)
class ControllerConfig:
    gains: PDGains
    feedforward: FeedforwardProfile
    reference: ReferenceTrajectory
    clamp_nonnegative: bool = False

    def __post_init__(self) -> None:
        if (self.reference.mode == "quintic-deflection"
                and self.feedforward.time_varying
                and self.reference.duration != self.feedforward.duration):
            raise ValueError(
                "time-varying feedforward and reference must share one duration: "
                f"{self.feedforward.duration} != {self.reference.duration}"
            )


def feedforward_tension(profile: FeedforwardProfile, t: float) -> float:
    """Feedforward tension at time t >= 0 (holds the final value past t_f)."""
    if profile.mode == "constant":
        return profile.tension_final
    s = min(max(t / profile.duration, 0.0), 1.0)
    return profile.tension_initial + quintic_blend(s) * (
        profile.tension_final - profile.tension_initial)


def feedforward_tension_rate(profile: FeedforwardProfile, t: float) -> float:
    """Time derivative of the feedforward tension (zero outside [0, t_f])."""
    if profile.mode == "constant" or not 0.0 <= t <= profile.duration:
        return 0.0
    s = t / profile.duration
    return quintic_blend_rate(s) * (
        profile.tension_final - profile.tension_initial) / profile.duration


def desired_deflection(ref: ReferenceTrajectory, t: float,
                       feedforward: FeedforwardProfile | None = None
                       ) -> tuple[float, float]:
    """Desired tip deflection and its rate at time t (holds past t_f)."""
    if ref.mode == "constant":
        return ref.w_final, 0.0
    if ref.mode == "quintic-deflection":
        s = min(max(t / ref.duration, 0.0), 1.0)
        w = ref.w_initial + quintic_blend(s) * (ref.w_final - ref.w_initial)
        if 0.0 <= t <= ref.duration:
            rate = quintic_blend_rate(s) * (ref.w_final - ref.w_initial) / ref.duration
        else:
            rate = 0.0
        return w, rate
    # map-composed
    if feedforward is None:
        raise ValueError("map-composed reference needs the feedforward profile")
    coeffs = np.asarray(ref.map_coefficients, dtype=float)
    tension = feedforward_tension(feedforward, t)
    w = float(np.polyval(coeffs, tension))
    rate = float(np.polyval(np.polyder(coeffs), tension)) \
        * feedforward_tension_rate(feedforward, t)
    return w, rate


class ControlSample(NamedTuple):
    """One evaluation of the control law, pre- and post-clamp."""

    time: float
    feedforward: float
    w_des: float
    w_rate_des: float
    u_unclamped: float
    u: float


def make_controller(cfg: ControllerConfig) -> Callable[[float, float, float], ControlSample]:
    """Bind a config into a fast (t, w_tip, w_rate) -> ControlSample closure."""
    k_p = cfg.gains.k_p
    k_d = cfg.gains.k_d
    ff = cfg.feedforward
    ref = cfg.reference
    clamp = cfg.clamp_nonnegative

    def controller(t: float, w_tip: float, w_rate: float) -> ControlSample:
        t_des = feedforward_tension(ff, t)
        w_des, w_rate_des = desired_deflection(ref, t, ff)
        u_raw = t_des - k_p * (w_tip - w_des) - k_d * (w_rate - w_rate_des)
        u = max(0.0, u_raw) if clamp else u_raw
        return ControlSample(t, t_des, w_des, w_rate_des, u_raw, u)

    return controller


def control_input(cfg: ControllerConfig, t: float, w_tip: float,
                  w_rate: float) -> ControlSample:
    """Evaluate the PD-plus-feedforward law; returns clamped and raw tension."""
    if not (np.isfinite(w_tip) and np.isfinite(w_rate)):
        raise ValueError("tip measurements must be finite")
    return make_controller(cfg)(t, w_tip, w_rate)
