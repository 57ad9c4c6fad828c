import numpy as np
import pytest

from liebridge.control import (MassDriftError, angle_derivative, build_solution, centered_difference,
                               control_at, density_at, fokker_planck_residual, laplacian,
                               propagate_potentials, spectral_derivative)
from liebridge.geometry import make_grid
from liebridge.sinkhorn import solve

from conftest import THETA00, THETA01, so2_preset_problem


def test_endpoint_propagation_is_identity(so2_problem, so2_solved):
    pot, _ = so2_solved
    lp, lh = propagate_potentials(so2_problem, pot, [0.0, 1.0])
    assert np.array_equal(lp[1], pot.log_phi1)
    assert np.array_equal(lh[0], pot.log_phihat0)


def test_rejects_times_outside_horizon(so2_problem, so2_solved):
    with pytest.raises(ValueError):
        propagate_potentials(so2_problem, so2_solved[0], [1.2])


@pytest.mark.parametrize("which", ["so2", "so3"])
def test_two_hop_propagation(which, so2_problem, so2_solved, so3_problem, so3_solved):
    prob, (pot, _) = (so2_problem, so2_solved) if which == "so2" else (so3_problem, so3_solved)
    two = prob.operator(0.25).apply(prob.operator(0.5).apply(pot.log_phihat0, "log"), "log")
    one = prob.operator(0.75).apply(pot.log_phihat0, "log")
    assert np.max(np.abs(two - one)) < 1e-7


def test_uniform_bridge_is_static(uniform_problem):
    pot, _ = solve(uniform_problem)
    sol = build_solution(uniform_problem, pot)
    np.testing.assert_allclose(sol.rho_opt, 1.0, atol=1e-12)
    np.testing.assert_allclose(sol.control, 0.0, atol=1e-12)
    assert fokker_planck_residual(uniform_problem, pot, 0.5, 0.01) < 1e-10


@pytest.mark.parametrize("which", ["so2", "so3"])
def test_boundary_recovery_and_mass(which, so2_problem, so2_solution, so3_problem, so3_solution):
    prob, sol = (so2_problem, so2_solution) if which == "so2" else (so3_problem, so3_solution)
    r0, r1 = prob.rho0.values, prob.rho1.values
    assert np.max(np.abs(sol.rho_opt[0] - r0)) / np.max(r0) < 1e-8
    assert np.max(np.abs(sol.rho_opt[-1] - r1)) / np.max(r1) < 1e-8
    assert len(sol.times) == 21
    assert np.max(np.abs(sol.masses() - 1.0)) < 1e-6


def test_hopf_cole_identities(so2_problem, so2_solution):
    sol = so2_solution
    s2 = so2_problem.sigma**2
    np.testing.assert_array_equal(sol.S, s2 * sol.log_phi)
    np.testing.assert_allclose(np.exp(sol.S / s2) * np.exp(sol.log_phihat), sol.rho_opt, rtol=1e-12)
    np.testing.assert_array_equal(sol.rho_opt, np.exp(sol.log_phi + sol.log_phihat))


def test_midpoint_mass(so2_problem, so2_solution):
    k = int(np.argmin(np.abs(so2_solution.times - 0.5)))
    assert so2_problem.grid.integrate(so2_solution.rho_opt[k]) == pytest.approx(1.0, abs=1e-8)


def test_spectral_gradient_vs_finite_difference(so2_problem, so2_solved):
    lp = so2_solved[0].log_phi1
    spec = spectral_derivative(lp)
    fd = centered_difference(lp, so2_problem.grid.spacing, periodic=True)
    assert np.max(np.abs(spec - fd)) / np.max(np.abs(spec)) < 1e-4


def test_gradient_gap_is_stencil_truncation(so2_problem, so2_solution):
    # at every time the gap is the h^2/6 third-derivative truncation of the stencil
    h = so2_problem.grid.spacing
    for lp in so2_solution.log_phi:
        gap = np.max(np.abs(spectral_derivative(lp) - centered_difference(lp, h, periodic=True)))
        bound = h**2 / 6 * np.max(np.abs(spectral_derivative(lp, 3)))
        assert gap <= 1.05 * bound + 1e-12


def test_spectral_derivative_exact_on_modes():
    g = make_grid("so2", 64)
    f = np.sin(3 * g.nodes) + 0.5 * np.cos(7 * g.nodes)
    np.testing.assert_allclose(spectral_derivative(f), 3 * np.cos(3 * g.nodes) - 3.5 * np.sin(7 * g.nodes),
                               atol=1e-12)
    np.testing.assert_allclose(spectral_derivative(f, 2), -9 * np.sin(3 * g.nodes) - 24.5 * np.cos(7 * g.nodes),
                               atol=1e-11)


def test_so3_class_laplacian_on_characters():
    # chi_l is an eigenfunction of the class-function Laplacian with eigenvalue -l(l+1)
    g = make_grid("so3", 2000)
    for ell in (1, 2, 3):
        chi = np.sin((ell + 0.5) * g.nodes) / np.sin(g.nodes / 2)
        lap = laplacian(g, chi)
        interior = g.nodes > 0.2  # 1/J amplifies stencil error as J = sin^2 -> 0
        np.testing.assert_allclose(lap[interior], -ell * (ell + 1) * chi[interior], atol=2e-3 * ell**2)


def test_control_points_toward_shorter_arc(so2_problem, so2_solution):
    i = int(np.argmin(np.abs(so2_problem.grid.nodes - THETA00)))
    assert so2_solution.control[0][i] < 0


def test_so3_control_pushes_angle_up(so3_problem, so3_solution):
    i = int(np.argmin(np.abs(so3_problem.grid.nodes - 1.0)))
    assert so3_solution.control[0][i] > 0


def test_fokker_planck_residual_refines():
    coarse_p, fine_p = so2_preset_problem(256), so2_preset_problem(512)
    coarse = fokker_planck_residual(coarse_p, solve(coarse_p)[0], 0.5, 0.02)
    fine = fokker_planck_residual(fine_p, solve(fine_p)[0], 0.5, 0.01)
    assert coarse / fine >= 3.0


def test_control_matters(so2_problem, so2_solved):
    pot, _ = so2_solved
    with_ctrl = fokker_planck_residual(so2_problem, pot, 0.5, 0.01)
    without = fokker_planck_residual(so2_problem, pot, 0.5, 0.01, control_scale=0.0)
    assert without > 100 * with_ctrl


def test_so3_fokker_planck_residual_small(so3_problem, so3_solved):
    pot, _ = so3_solved
    with_ctrl = fokker_planck_residual(so3_problem, pot, 0.5, 0.01)
    without = fokker_planck_residual(so3_problem, pot, 0.5, 0.01, control_scale=0.0)
    assert with_ctrl < 0.01 * without


def test_residual_stencil_checked(so2_problem, so2_solved):
    with pytest.raises(ValueError):
        fokker_planck_residual(so2_problem, so2_solved[0], 0.005, 0.01)


def test_shorter_arc(so2_solution):
    traj = so2_solution.argmax_trajectory()
    assert not np.any((traj > np.pi / 2) & (traj < 3 * np.pi / 2))
    cell = so2_solution.grid.spacing
    allowed = (traj >= THETA01 - cell) | (traj <= THETA00 + cell)
    assert np.all(allowed)
    wrapped = np.mod(traj + np.pi, 2 * np.pi) - np.pi
    assert wrapped[0] > 0 > wrapped[-1]  # crosses theta = 0
    assert np.all(np.diff(wrapped) <= 0)


def test_mass_drift_is_fatal():
    g = make_grid("so2", 16)
    with pytest.raises(MassDriftError):
        density_at(g, np.full(16, np.log(1.01)), np.zeros(16))


def test_angle_derivative_dispatch():
    g3 = make_grid("so3", 200)
    f = np.cos(g3.nodes)
    np.testing.assert_allclose(angle_derivative(g3, f), -np.sin(g3.nodes), atol=1e-4)
