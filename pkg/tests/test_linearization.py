import dataclasses

import numpy as np
import pytest
import scipy.linalg as sla

import flexboom as fb
import oracles


@pytest.fixture(scope="module")
def ss_at_1n(model3):
    return fb.linearize(model3, fb.solve_equilibrium(model3, 1.0))


def test_block_structure(model3, ss_at_1n):
    n = model3.mode_count
    assert np.array_equal(ss_at_1n.a[:n, :n], np.zeros((n, n)))
    assert np.array_equal(ss_at_1n.a[:n, n:], np.eye(n))
    assert np.array_equal(ss_at_1n.a[n:, n:], np.zeros((n, n)))
    assert np.array_equal(ss_at_1n.b[:n], np.zeros(n))
    assert np.array_equal(ss_at_1n.c[:n], np.zeros(n))
    assert np.array_equal(ss_at_1n.c[n:], model3.tip_row)
    assert ss_at_1n.d == 0.0


def test_zero_tension_blocks(model3):
    ss = fb.linearize(model3, fb.solve_equilibrium(model3, 0.0))
    n = model3.mode_count
    expected_ll = model3.mass_solve(-model3.stiffness_matrix)
    np.testing.assert_allclose(ss.a[n:, :n], expected_ll, rtol=1e-12)
    expected_b = model3.mass_solve(model3.params.cable_offset * model3.tip_slope)
    np.testing.assert_allclose(ss.b[n:], expected_b, rtol=1e-12)


@pytest.mark.parametrize("tension", [0.0, 0.5, 1.0])
def test_finite_difference_oracle(model3, tension):
    eq = fb.solve_equilibrium(model3, tension)
    ss = fb.linearize(model3, eq)
    a_fd, b_fd = oracles.fd_jacobians(model3, eq)
    assert oracles.entrywise_close(ss.a, a_fd, rel=1e-6, abs_floor=1e-9)
    assert oracles.entrywise_close(ss.b, b_fd, rel=1e-6, abs_floor=1e-9)


def test_finite_difference_oracle_random_tensions(model3):
    rng = np.random.default_rng(41)
    for tension in rng.uniform(0.0, 2.0, size=10):
        eq = fb.solve_equilibrium(model3, tension)
        ss = fb.linearize(model3, eq)
        a_fd, b_fd = oracles.fd_jacobians(model3, eq)
        assert oracles.entrywise_close(ss.a, a_fd, rel=1e-6, abs_floor=1e-9)
        assert oracles.entrywise_close(ss.b, b_fd, rel=1e-6, abs_floor=1e-9)


def test_eigenvalues_match_generalized_problem(model3):
    ss = fb.linearize(model3, fb.solve_equilibrium(model3, 0.0))
    omega_sq = sla.eigh(model3.stiffness_matrix, model3.mass_matrix,
                        eigvals_only=True)
    expected = np.sort(np.sqrt(omega_sq))
    eigs = ss.eigenvalues()
    assert np.max(np.abs(eigs.real)) <= 1e-6
    actual = np.sort(eigs.imag[eigs.imag > 0.0])
    np.testing.assert_allclose(actual, expected, rtol=1e-9)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
@pytest.mark.parametrize("tension", [0.0, 1.0, 2.0])
def test_eigenvalues_on_imaginary_axis(params, n, tension):
    model = fb.assemble_matrices(params, fb.BasisSet.with_mode_count(n))
    ss = fb.linearize(model, fb.solve_equilibrium(model, tension))
    assert np.max(np.abs(ss.eigenvalues().real)) <= 1e-6


def test_frequencies_soften_with_tension(model3):
    """Consistency with the increasing tension-deflection curve: more
    tension means a softer effective stiffness and a lower first mode."""
    first_modes = []
    tips = []
    for tension in (0.0, 0.5, 1.0, 1.5, 2.0):
        eq = fb.solve_equilibrium(model3, tension)
        ss = fb.linearize(model3, eq)
        eigs = ss.eigenvalues()
        first_modes.append(np.min(eigs.imag[eigs.imag > 0.0]))
        tips.append(eq.tip_deflection)
    assert np.all(np.diff(first_modes) < 0.0)
    assert np.all(np.diff(tips) > 0.0)


def test_anchor_state(model3, ss_at_1n):
    eq = fb.solve_equilibrium(model3, 1.0)
    np.testing.assert_array_equal(ss_at_1n.x_bar[:3], eq.modal_coords)
    assert np.array_equal(ss_at_1n.x_bar[3:], np.zeros(3))
    assert ss_at_1n.t_eq == 1.0


def test_structure_validation_rejects_bad_blocks(ss_at_1n):
    broken = ss_at_1n.a.copy()
    broken[0, 0] = 1.0
    with pytest.raises(ValueError):
        fb.StateSpaceModel(a=broken, b=ss_at_1n.b, c=ss_at_1n.c, d=0.0,
                           t_eq=1.0, x_bar=ss_at_1n.x_bar)


def test_replace_keeps_structure(ss_at_1n):
    n = ss_at_1n.mode_count
    c_position = np.concatenate([ss_at_1n.c[n:], np.zeros(n)])
    variant = dataclasses.replace(ss_at_1n, c=c_position, d=0.1)
    assert variant.d == 0.1
    assert np.array_equal(variant.a, ss_at_1n.a)
