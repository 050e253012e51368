"""Assumed-modes structural model of a cable-actuated cantilever boom.

The boom is an undamped Euler-Bernoulli beam clamped at the root, with
transverse deflection discretized as w(x, t) = psi(x) q(t) over a monomial
basis psi(x) = [x^2, x^3, ...] (each basis function satisfies the clamped
root conditions w(0) = 0, w'(0) = 0).  A single cable runs from the root,
over evenly spaced spreader standoffs, to an attachment post at the tip
offset by ``cable_offset`` from the neutral axis.  Cable tension u enters
the dynamics in two ways:

* a follower moment ``cable_offset * u`` at the tip (generalized force
  h * psi'(L)^T u), and
* transverse kink reactions at the spreaders, linear in both the modal
  coordinates and the tension, collected in the constant spreader matrix
  so the force reads (spreader_matrix / node_spacing) q u.

Mass and stiffness matrices are assembled in closed form (the basis is
polynomial, so the energy integrals are exact); no numeric quadrature is
involved.  All solves against the mass or stiffness matrices are done on
diagonally equilibrated copies: the raw monomial basis spans many orders
of magnitude at full boom length, and equilibration keeps the
factorizations accurate for mode counts up to at least six.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve

__all__ = [
    "BoomParams",
    "BasisSet",
    "State",
    "StructuralModel",
    "evaluate_basis",
    "build_spreader_matrix",
    "zero_spreader_matrix",
    "assemble_matrices",
    "actuation_force",
    "dynamics_rhs",
    "tip_deflection",
    "tip_rate",
    "total_energy",
]

# Relative tolerance for "a spreader node sits at the tip attachment".
_TIP_TOL = 1e-9


@dataclass(frozen=True)
class BoomParams:
    """Physical constants of the boom and its cable rigging.

    Defaults are the nominal simulation values for a 29.4 m deployable
    composite boom.
    """

    length: float = 29.4               # m
    linear_density: float = 0.1        # kg/m
    elastic_modulus: float = 228e9     # Pa
    second_moment: float = 4.99e-10    # m^4
    cable_offset: float = 0.1          # m, standoff of cable from neutral axis
    spreader_count: int = 10
    node_spacing: float = 2.94         # m, distance between cable nodes

    def __post_init__(self) -> None:
        for name in ("length", "linear_density", "elastic_modulus",
                     "second_moment", "cable_offset", "node_spacing"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.spreader_count < 0:
            raise ValueError(f"spreader_count must be >= 0, got {self.spreader_count}")
        if self.spreader_count * self.node_spacing > self.length * (1.0 + _TIP_TOL):
            raise ValueError(
                "spreader nodes must lie on the boom: "
                f"spreader_count * node_spacing = {self.spreader_count * self.node_spacing} "
                f"exceeds length = {self.length}"
            )

    @property
    def bending_stiffness(self) -> float:
        """EI (N m^2)."""
        return self.elastic_modulus * self.second_moment

    def scaled(self, e_scale: float = 1.0, rho_scale: float = 1.0,
               i_scale: float = 1.0) -> "BoomParams":
        """Copy with elastic modulus, linear density, second moment scaled."""
        return BoomParams(
            length=self.length,
            linear_density=self.linear_density * rho_scale,
            elastic_modulus=self.elastic_modulus * e_scale,
            second_moment=self.second_moment * i_scale,
            cable_offset=self.cable_offset,
            spreader_count=self.spreader_count,
            node_spacing=self.node_spacing,
        )


@dataclass(frozen=True)
class BasisSet:
    """Monomial assumed-mode basis x^p, exponents strictly increasing, p >= 2.

    Exponents >= 2 enforce the clamped root: every basis function and its
    first derivative vanish at x = 0.
    """

    exponents: tuple[int, ...] = (2, 3, 4)

    def __post_init__(self) -> None:
        if len(self.exponents) < 1:
            raise ValueError("basis needs at least one exponent")
        if min(self.exponents) < 2:
            raise ValueError(f"minimum exponent is 2, got {min(self.exponents)}")
        if any(b <= a for a, b in zip(self.exponents, self.exponents[1:])):
            raise ValueError(f"exponents must be strictly increasing: {self.exponents}")

    @classmethod
    def with_mode_count(cls, n: int) -> "BasisSet":
        """Default basis for n modes: consecutive monomials x^2 .. x^(n+1)."""
        if n < 1:
            raise ValueError(f"mode count must be >= 1, got {n}")
        return cls(exponents=tuple(range(2, n + 2)))

    @property
    def mode_count(self) -> int:
        return len(self.exponents)


def evaluate_basis(basis: BasisSet, x: float, length: float
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rows psi(x), psi'(x), psi''(x) of the monomial basis.

    Raises ValueError if x lies outside [0, length].
    """
    if not 0.0 <= x <= length:
        raise ValueError(f"x = {x} outside the boom span [0, {length}]")
    p = np.asarray(basis.exponents, dtype=float)
    psi = x ** p
    dpsi = p * x ** (p - 1.0)
    ddpsi = p * (p - 1.0) * x ** (p - 2.0)
    return psi, dpsi, ddpsi


def build_spreader_matrix(params: BoomParams, basis: BasisSet) -> np.ndarray:
    """Spreader reaction matrix of the taut-cable kink model.

    The cable is routed through spreader nodes x_i = i * node_spacing
    (i = 1..spreader_count) and terminates at the tip attachment.  The
    transverse reaction at a node under tension u is the discrete-curvature
    kink force u * (w_prev - 2 w_node + w_next) / node_spacing, with the
    root anchor (w = 0) and the tip attachment (w = w(L)) as the boundary
    neighbors.  A node coincident with the tip attachment contributes no
    reaction row of its own: the kink there belongs to the attachment,
    whose moment is carried by the tip-slope term of the actuation force.

    The assembled matrix enters the dynamics as (spreader_matrix / dx) q u
    and softens the effective stiffness under tension, which is what makes
    the equilibrium tip deflection grow superlinearly with tension.
    """
    p = np.asarray(basis.exponents, dtype=float)
    n = basis.mode_count
    length = params.length
    dx = params.node_spacing
    tol = _TIP_TOL * length

    def psi(x: float) -> np.ndarray:
        return x ** p

    matrix = np.zeros((n, n))
    for i in range(1, params.spreader_count + 1):
        x_node = i * dx
        if x_node >= length - tol:
            continue
        x_prev = (i - 1) * dx
        x_next = (i + 1) * dx
        if i + 1 > params.spreader_count or x_next >= length - tol:
            x_next = length
        matrix += np.outer(psi(x_node), psi(x_prev) - 2.0 * psi(x_node) + psi(x_next))
    return matrix


def zero_spreader_matrix(params: BoomParams, basis: BasisSet) -> np.ndarray:
    """Spreader model with no transverse reactions (tip moment only)."""
    n = basis.mode_count
    return np.zeros((n, n))


@dataclass(frozen=True)
class State:
    """Modal coordinates and rates; non-finite entries mean integration failure."""

    q: np.ndarray
    q_rate: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", np.atleast_1d(np.asarray(self.q, dtype=float)))
        object.__setattr__(self, "q_rate", np.atleast_1d(np.asarray(self.q_rate, dtype=float)))
        if self.q.shape != self.q_rate.shape:
            raise ValueError("q and q_rate must have the same shape")

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.q_rate)))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.q_rate])

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "State":
        x = np.asarray(x, dtype=float)
        n = x.size // 2
        return cls(q=x[:n], q_rate=x[n:])


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StructuralModel:
    """Assembled discretization: immutable after construction, safe to share.

    ``mass_matrix`` and ``stiffness_matrix`` are the raw closed-form energy
    matrices in the monomial coordinates; ``spreader_matrix`` is the cable
    reaction matrix (enters the force as spreader_matrix / node_spacing);
    ``tip_row`` and ``tip_slope`` are psi(L) and psi'(L).

    The underscored fields cache the diagonally equilibrated mass
    factorization and the mass-solved operators used by the dynamics.
    """

    params: BoomParams
    basis: BasisSet
    mass_matrix: np.ndarray = field(repr=False)
    stiffness_matrix: np.ndarray = field(repr=False)
    spreader_matrix: np.ndarray = field(repr=False)
    tip_row: np.ndarray = field(repr=False)
    tip_slope: np.ndarray = field(repr=False)
    _scale: np.ndarray = field(repr=False)
    _mass_chol: tuple = field(repr=False)
    _stiffness_op: np.ndarray = field(repr=False)     # M^-1 K
    _spreader_op: np.ndarray = field(repr=False)      # M^-1 spreader_matrix / dx
    _tip_force_op: np.ndarray = field(repr=False)     # M^-1 h psi'(L)^T

    @property
    def mode_count(self) -> int:
        return self.basis.mode_count

    def evaluate_basis(self, x: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return evaluate_basis(self.basis, x, self.params.length)

    def mass_solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve M x = rhs through the cached equilibrated Cholesky factor."""
        rhs = np.asarray(rhs, dtype=float)
        if rhs.ndim == 1:
            return cho_solve(self._mass_chol, rhs / self._scale) / self._scale
        scaled = rhs / self._scale[:, None]
        return cho_solve(self._mass_chol, scaled) / self._scale[:, None]


SpreaderModel = Callable[[BoomParams, BasisSet], np.ndarray]


def assemble_matrices(params: BoomParams, basis: BasisSet,
                      spreader_model: SpreaderModel = build_spreader_matrix
                      ) -> StructuralModel:
    """Assemble mass, stiffness, spreader, and tip quantities in closed form.

    M_jk = rho * L^(pj+pk+1) / (pj+pk+1) and
    K_jk = EI * pj(pj-1) pk(pk-1) * L^(pj+pk-3) / (pj+pk-3)
    are the exact monomial integrals of the kinetic and strain energies.
    Raises if the mass matrix is not positive definite (impossible for
    valid parameters; guards a broken custom basis).
    """
    p = np.asarray(basis.exponents, dtype=float)
    length = params.length
    rho = params.linear_density
    ei = params.bending_stiffness

    psum = p[:, None] + p[None, :]
    mass = rho * length ** (psum + 1.0) / (psum + 1.0)
    curv = p * (p - 1.0)
    stiffness = ei * np.outer(curv, curv) * length ** (psum - 3.0) / (psum - 3.0)

    tip_row = length ** p
    tip_slope = p * length ** (p - 1.0)
    spreader = spreader_model(params, basis)

    # Equilibrate by the basis scale at the tip before factorizing: the raw
    # matrices are Hilbert-like with columns spanning ~L^(2n) in magnitude.
    scale = length ** p
    mass_eq = mass / scale[:, None] / scale[None, :]
    try:
        mass_chol = cho_factor(mass_eq, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ValueError("mass matrix is not positive definite") from exc

    def msolve(b: np.ndarray) -> np.ndarray:
        if b.ndim == 1:
            return cho_solve(mass_chol, b / scale) / scale
        return cho_solve(mass_chol, b / scale[:, None]) / scale[:, None]

    stiffness_op = msolve(stiffness)
    spreader_op = msolve(spreader / params.node_spacing)
    tip_force_op = msolve(params.cable_offset * tip_slope)

    return StructuralModel(
        params=params,
        basis=basis,
        mass_matrix=_readonly(mass),
        stiffness_matrix=_readonly(stiffness),
        spreader_matrix=_readonly(spreader),
        tip_row=_readonly(tip_row),
        tip_slope=_readonly(tip_slope),
        _scale=_readonly(scale),
        _mass_chol=mass_chol,
        _stiffness_op=_readonly(stiffness_op),
        _spreader_op=_readonly(spreader_op),
        _tip_force_op=_readonly(tip_force_op),
    )


def actuation_force(model: StructuralModel, q: np.ndarray, u: float) -> np.ndarray:
    """Generalized cable force (spreader_matrix / dx) q u + h psi'(L)^T u."""
    q = np.asarray(q, dtype=float)
    return (model.spreader_matrix @ q) * (u / model.params.node_spacing) \
        + (model.params.cable_offset * u) * model.tip_slope


def dynamics_rhs(model: StructuralModel, state: State, u: float) -> State:
    """First-order dynamics: d/dt (q, q_rate) = (q_rate, M^-1 (f(q, u) - K q))."""
    accel = u * (model._spreader_op @ state.q + model._tip_force_op) \
        - model._stiffness_op @ state.q
    return State(q=state.q_rate, q_rate=accel)


def tip_deflection(model: StructuralModel, q: np.ndarray) -> float:
    """Transverse tip deflection w(L) = psi(L) q (m)."""
    return float(model.tip_row @ np.asarray(q, dtype=float))


def tip_rate(model: StructuralModel, q_rate: np.ndarray) -> float:
    """Transverse tip deflection rate (m/s)."""
    return float(model.tip_row @ np.asarray(q_rate, dtype=float))


def total_energy(model: StructuralModel, state: State) -> tuple[float, float]:
    """Kinetic and potential energy (J)."""
    kinetic = 0.5 * float(state.q_rate @ model.mass_matrix @ state.q_rate)
    potential = 0.5 * float(state.q @ model.stiffness_matrix @ state.q)
    return kinetic, potential
