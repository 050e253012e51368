"""Forced equilibria of the tensioned boom and the tension-deflection map.

Holding the cable tension constant at T, the equilibrium modal coordinates
solve (K - spreader_matrix * T / dx) q = h * psi'(L)^T * T.  The resulting
tip deflection grows superlinearly (nearly quadratically) with tension
because the spreader reactions soften the effective stiffness.  The map is
monotone on the verified tension range, so the inverse (tension required
for a target tip deflection) is computed by bracketing root finding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import StructuralModel, actuation_force, tip_deflection

__all__ = [
    "NearSingularStiffness",
    "OutOfRange",
    "EquilibriumPoint",
    "solve_equilibrium",
    "deflection_curve",
    "tension_for_deflection",
    "DEFAULT_TENSION_MAX",
]

# Tension range over which invertibility of the effective stiffness is
# verified for the nominal boom.  CLI commands guard against leaving it.
DEFAULT_TENSION_MAX = 2.0

_COND_LIMIT = 1e12
_RESIDUAL_REL = 1e-9
_RESIDUAL_FLOOR = 1e-12  # N


class NearSingularStiffness(RuntimeError):
    """Effective stiffness is too ill conditioned at the requested tension."""

    def __init__(self, tension: float, condition: float):
        self.tension = tension
        self.condition = condition
        super().__init__(
            f"effective stiffness near singular at tension {tension} N "
            f"(equilibrated condition {condition:.3e}); tension is outside "
            "the valid actuation range"
        )


class OutOfRange(ValueError):
    """Requested value lies outside the achievable range."""


@dataclass(frozen=True)
class EquilibriumPoint:
    tension: float
    modal_coords: np.ndarray
    tip_deflection: float


def _effective_stiffness(model: StructuralModel, tension: float) -> np.ndarray:
    return model.stiffness_matrix - model.spreader_matrix * (tension / model.params.node_spacing)


def solve_equilibrium(model: StructuralModel, tension: float,
                      cond_limit: float = _COND_LIMIT) -> EquilibriumPoint:
    """Equilibrium modal coordinates for a constant cable tension (N).

    The linear solve runs on the diagonally equilibrated system (one
    iterative-refinement pass) and the condition number is estimated on the
    equilibrated matrix, so the check detects the physical approach to
    singularity rather than the intrinsic scaling of the monomial basis.
    """
    if not np.isfinite(tension):
        raise ValueError(f"tension must be finite, got {tension!r}")
    n = model.mode_count
    if tension == 0.0:
        return EquilibriumPoint(0.0, np.zeros(n), 0.0)

    scale = model._scale
    matrix = _effective_stiffness(model, tension)
    scaled = matrix / scale[:, None] / scale[None, :]
    condition = float(np.linalg.cond(scaled))
    if not np.isfinite(condition) or condition > cond_limit:
        raise NearSingularStiffness(tension, condition)

    rhs = model.params.cable_offset * model.tip_slope * tension
    rhs_scaled = rhs / scale
    q_scaled = np.linalg.solve(scaled, rhs_scaled)
    q_scaled += np.linalg.solve(scaled, rhs_scaled - scaled @ q_scaled)
    q = q_scaled / scale

    residual = actuation_force(model, q, tension) - model.stiffness_matrix @ q
    load = np.linalg.norm(model.stiffness_matrix @ q)
    tol = max(_RESIDUAL_REL * load, _RESIDUAL_FLOOR)
    if np.linalg.norm(residual) > tol:
        raise RuntimeError(
            f"equilibrium solve at {tension} N left residual "
            f"{np.linalg.norm(residual):.3e} N above tolerance {tol:.3e} N"
        )
    return EquilibriumPoint(tension, q, tip_deflection(model, q))


def deflection_curve(model: StructuralModel, t_max: float = DEFAULT_TENSION_MAX,
                     samples: int = 200) -> list[EquilibriumPoint]:
    """Equilibria sampled at evenly spaced tensions over [0, t_max]."""
    if samples < 2:
        raise ValueError("need at least two samples")
    return [solve_equilibrium(model, t) for t in np.linspace(0.0, t_max, samples)]


def tension_for_deflection(model: StructuralModel, w_target: float,
                           t_max: float = DEFAULT_TENSION_MAX) -> float:
    """Tension (N) whose equilibrium tip deflection equals w_target (m).

    Bracketing root find on the monotone tension-deflection map; the
    returned tension reproduces w_target to within 1e-6 m.  Raises
    OutOfRange if the target exceeds what t_max can hold (or is negative).
    """
    if w_target == 0.0:
        return 0.0
    w_max = solve_equilibrium(model, t_max).tip_deflection
    if not 0.0 <= w_target <= w_max:
        raise OutOfRange(
            f"target deflection {w_target} m outside achievable range "
            f"[0, {w_max:.6g}] m at tension limit {t_max} N"
        )
    tension = brentq(
        lambda t: solve_equilibrium(model, t).tip_deflection - w_target,
        0.0, t_max, xtol=1e-12, rtol=8.9e-16,
    )
    achieved = solve_equilibrium(model, tension).tip_deflection
    if abs(achieved - w_target) > 1e-6:
        raise RuntimeError(
            f"inverse map did not converge: |{achieved} - {w_target}| > 1e-6 m"
        )
    return float(tension)
