"""Fixed-step closed-loop simulation of the nonlinear boom dynamics.

Classic fourth-order Runge-Kutta with the controller evaluated at every
stage time and stage state (the control law is an explicit function of
time and the tip measurements, so no zero-order hold is emulated).
Divergence is declared when the state norm exceeds 1e6 times its initial
norm or any entry stops being finite; a diverged run is returned with
status rather than raised, since blow-up is a legitimate experimental
outcome here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control import (ControllerConfig, FeedforwardProfile, PDGains,
                      ReferenceTrajectory, make_controller)
from .equilibrium import solve_equilibrium, tension_for_deflection
from .model import (BasisSet, BoomParams, State, StructuralModel,
                    assemble_matrices)

__all__ = [
    "SimScenario",
    "SimResult",
    "initial_state_from_deflection",
    "run_simulation",
    "scenario_suite",
    "SCENARIO_NAMES",
]

_DIVERGENCE_FACTOR = 1e6
_NORM_FLOOR = 1e-6  # so a zero initial state does not make the threshold zero

SCENARIO_NAMES = ("fig7a", "fig7c", "fig8", "fig8-clamped")


@dataclass(frozen=True)
class SimScenario:
    """One closed-loop run: model, controller, initial deflection, timing.

    ``controller`` may be None for an unforced (zero-tension) run.
    ``decimation`` thins the log: one row every that many steps.
    """

    model: StructuralModel
    controller: ControllerConfig | None
    w_init: float
    duration: float = 200.0
    dt: float = 1e-3
    decimation: int = 100
    name: str = "custom"

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.duration < self.dt:
            raise ValueError("duration must be at least one step")
        if self.decimation < 1:
            raise ValueError("decimation must be >= 1")


@dataclass(frozen=True)
class SimResult:
    """Logged closed-loop trajectory.

    All rows are finite unless status is "diverged", in which case the last
    row records the state at the divergence time.
    """

    scenario_name: str
    time: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    q_rate: np.ndarray = field(repr=False)
    tip: np.ndarray = field(repr=False)
    tip_rate: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    u_unclamped: np.ndarray = field(repr=False)
    t_des: np.ndarray = field(repr=False)
    w_des: np.ndarray = field(repr=False)
    w_rate_des: np.ndarray = field(repr=False)
    kinetic: np.ndarray = field(repr=False)
    potential: np.ndarray = field(repr=False)
    status: str = "completed"
    divergence_time: float | None = None

    @property
    def diverged(self) -> bool:
        return self.status == "diverged"

    def final_state(self) -> State:
        return State(q=self.q[-1], q_rate=self.q_rate[-1])


def initial_state_from_deflection(model: StructuralModel, w_init: float,
                                  t_max: float = 2.0) -> State:
    """Rest state whose shape is the held equilibrium with tip at w_init."""
    if w_init == 0.0:
        n = model.mode_count
        return State(q=np.zeros(n), q_rate=np.zeros(n))
    tension = tension_for_deflection(model, w_init, t_max=t_max)
    q = solve_equilibrium(model, tension).modal_coords
    return State(q=q, q_rate=np.zeros(model.mode_count))


def run_simulation(scenario: SimScenario) -> SimResult:
    """Integrate the closed loop with fixed-step RK4 and log decimated rows."""
    model = scenario.model
    n = model.mode_count
    dt = scenario.dt
    n_steps = int(round(scenario.duration / dt))

    spreader_op = model._spreader_op
    tip_force_op = model._tip_force_op
    stiffness_op = model._stiffness_op
    tip_row = model.tip_row
    mass = model.mass_matrix
    stiffness = model.stiffness_matrix

    if scenario.controller is not None:
        controller = make_controller(scenario.controller)
    else:
        controller = None

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        q = x[:n]
        q_rate = x[n:]
        if controller is not None:
            u = controller(t, tip_row @ q, tip_row @ q_rate).u
        else:
            u = 0.0
        out = np.empty(2 * n)
        out[:n] = q_rate
        out[n:] = u * (spreader_op @ q + tip_force_op) - stiffness_op @ q
        return out

    state0 = initial_state_from_deflection(model, scenario.w_init)
    x = state0.as_vector()
    norm0 = max(float(np.linalg.norm(x)), _NORM_FLOOR)
    threshold_sq = (_DIVERGENCE_FACTOR * norm0) ** 2

    n_rows = n_steps // scenario.decimation + 1
    time = np.zeros(n_rows)
    q_log = np.zeros((n_rows, n))
    qr_log = np.zeros((n_rows, n))
    u_log = np.zeros(n_rows)
    uraw_log = np.zeros(n_rows)
    tdes_log = np.zeros(n_rows)
    wdes_log = np.zeros(n_rows)
    wrdes_log = np.zeros(n_rows)
    ke_log = np.zeros(n_rows)
    pe_log = np.zeros(n_rows)

    def log_row(row: int, t: float, x: np.ndarray) -> None:
        q = x[:n]
        q_rate = x[n:]
        time[row] = t
        q_log[row] = q
        qr_log[row] = q_rate
        if controller is not None:
            sample = controller(t, tip_row @ q, tip_row @ q_rate)
            u_log[row] = sample.u
            uraw_log[row] = sample.u_unclamped
            tdes_log[row] = sample.feedforward
            wdes_log[row] = sample.w_des
            wrdes_log[row] = sample.w_rate_des
        ke_log[row] = 0.5 * (q_rate @ mass @ q_rate)
        pe_log[row] = 0.5 * (q @ stiffness @ q)

    log_row(0, 0.0, x)
    row = 1
    status = "completed"
    divergence_time = None

    t = 0.0
    half = 0.5 * dt
    sixth = dt / 6.0
    for k in range(n_steps):
        k1 = rhs(t, x)
        k2 = rhs(t + half, x + half * k1)
        k3 = rhs(t + half, x + half * k2)
        k4 = rhs(t + dt, x + dt * k3)
        x = x + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        t = (k + 1) * dt
        norm_sq = float(x @ x)
        # NaN fails the comparison too, so this catches non-finite states.
        if not norm_sq <= threshold_sq:
            status = "diverged"
            divergence_time = t
            log_row(row, t, x)
            row += 1
            break
        if (k + 1) % scenario.decimation == 0:
            log_row(row, t, x)
            row += 1

    sl = slice(0, row)
    tip = q_log[sl] @ tip_row
    tip_rate = qr_log[sl] @ tip_row
    return SimResult(
        scenario_name=scenario.name,
        time=time[sl], q=q_log[sl], q_rate=qr_log[sl],
        tip=tip, tip_rate=tip_rate,
        u=u_log[sl], u_unclamped=uraw_log[sl],
        t_des=tdes_log[sl], w_des=wdes_log[sl], w_rate_des=wrdes_log[sl],
        kinetic=ke_log[sl], potential=pe_log[sl],
        status=status, divergence_time=divergence_time,
    )


def scenario_suite(params: BoomParams | None = None, mode_count: int = 3,
                   target_tension: float = 1.0, w_init: float = 1.0,
                   duration: float = 200.0, dt: float = 1e-3,
                   ramp_duration: float = 100.0,
                   step_scale: float = 1.0) -> list[SimScenario]:
    """The four benchmark closed-loop scenarios, sharing k_p = 10 N/m.

    fig7a        constant feedforward at the target tension, k_d = 25 N s/m
    fig7c        same constant feedforward, k_d = 50 N s/m (the aggressive
                 rate gain that the smooth feedforward is meant to tame)
    fig8         quintic feedforward and quintic reference over
                 ``ramp_duration``, k_d = 50 N s/m
    fig8-clamped fig8 with the nonnegative-tension clamp enabled

    The commanded step runs from w_init to the equilibrium deflection of
    ``target_tension``; ``step_scale`` stretches that step (the target is
    re-solved so the endpoint remains a true equilibrium).
    """
    params = params or BoomParams()
    model = assemble_matrices(params, BasisSet.with_mode_count(mode_count))
    w_target = solve_equilibrium(model, target_tension).tip_deflection
    if step_scale != 1.0:
        w_target = w_init + step_scale * (w_target - w_init)
        target_tension = tension_for_deflection(model, w_target)
    t_init = tension_for_deflection(model, w_init)

    constant_ref = ReferenceTrajectory.constant(w_target)
    constant_ff = FeedforwardProfile.constant(target_tension)
    ramp_ff = FeedforwardProfile.quintic(t_init, target_tension, ramp_duration)
    ramp_ref = ReferenceTrajectory.quintic(w_init, w_target, ramp_duration)

    def scen(name: str, k_d: float, ff: FeedforwardProfile,
             ref: ReferenceTrajectory, clamp: bool) -> SimScenario:
        cfg = ControllerConfig(
            gains=PDGains(k_p=10.0, k_d=k_d), feedforward=ff,
            reference=ref, clamp_nonnegative=clamp,
        )
        return SimScenario(model=model, controller=cfg, w_init=w_init,
                           duration=duration, dt=dt, name=name)

    return [
        scen("fig7a", 25.0, constant_ff, constant_ref, False),
        scen("fig7c", 50.0, constant_ff, constant_ref, False),
        scen("fig8", 50.0, ramp_ff, ramp_ref, False),
        scen("fig8-clamped", 50.0, ramp_ff, ramp_ref, True),
    ]
