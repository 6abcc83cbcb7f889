import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from impulse_morse import make_problem
from impulse_morse.galerkin import build_basis
from impulse_morse.resonance import resonance_det
from impulse_morse.shooting import (IntegrationError, SampledFunction, bisect_solutions,
                                    csv_grid, fd_weights, linear_transfer, polish_slope, shoot,
                                    shooting_map, verify_solution)

from conftest import random_mesh

# reference roots of the shooting map for the benchmark problem (m = 1, x1 = 1/2,
# a = 50 pi^2, b = 3) from scipy's DOP853 at rtol 1e-13; see tests/oracles
EXAMPLE_ROOTS = [
    (-0.5985508805678678, -1.4369218360432112),
    (-0.5712590912724226, -1.4210639555828042),
    (0.016169152627597886, 0.007440387406049161),
    (3.544339319584049, -1.4369218360432146),
    (3.6810084970725874, -1.4635127171552007),
]


def test_cubic_benchmark_exact_shot(cubic_benchmark):
    traj = shoot(cubic_benchmark, 4.0)
    jump = traj.jumps[0]
    assert jump.u == pytest.approx(2.0, abs=1e-14)
    assert jump.slope_before == pytest.approx(4.0, abs=1e-14)
    assert jump.slope_after == pytest.approx(-4.0, abs=1e-13)
    assert abs(traj.u_end) < 1e-13


def test_free_line():
    prob = make_problem([0.3, 0.6], [0.0] * 3, [0.0] * 2)
    for s in (-2.0, 0.0, 1.5):
        assert shooting_map(prob, s) == pytest.approx(s, abs=1e-14)


@given(st.integers(0, 2**32 - 1))
def test_linear_shot_reproduces_transfer_map(seed):
    rng = np.random.default_rng(seed)
    mesh = random_mesh(rng)
    b = rng.uniform(-10, 30, mesh.m)
    prob = make_problem(mesh, np.zeros(mesh.m + 1), b)
    assert shooting_map(prob, 1.0) == pytest.approx(linear_transfer(mesh, b), abs=1e-10)


def test_jumps_are_algebraic(example_problem):
    traj = shoot(example_problem, 3.5)
    for jp in traj.jumps:
        expected = jp.slope_before - example_problem.imp(0, jp.u)
        assert jp.slope_after == pytest.approx(expected, rel=1e-15, abs=1e-15)


def test_samples_land_on_grid(example_problem):
    grids = csv_grid(example_problem.mesh)
    traj = shoot(example_problem, 1.0, samples=grids)
    for (x, _, _), g in zip(traj.segments, grids):
        assert np.array_equal(x, g)
    assert np.unique(np.concatenate(grids)).size == 4096


def test_integrator_order():
    # -u'' = 30 u, u(0) = 0, u'(0) = 1 has u(1) = sin(sqrt 30)/sqrt 30; a problem
    # with genuine truncation error (the cubic benchmark is integrated exactly)
    prob = make_problem([0.5], [30.0, 30.0], [0.0])
    exact = np.sin(np.sqrt(30.0)) / np.sqrt(30.0)
    steps, errs = [], []
    for k in range(16):
        traj = shoot(prob, 1.0, 1e-6 / 2**k, samples=False)
        steps.append(traj.steps)
        errs.append(abs(traj.u_end - exact))
    slope = np.polyfit(np.log(steps), np.log(errs), 1)[0]
    assert abs(-slope - 5.0) <= 0.2 * 5.0
    assert errs[-1] < errs[0]


def test_blow_up_reports_location():
    bad = make_problem([0.5], [-1e4, -1e4], [0.0])
    with pytest.raises(IntegrationError) as err:
        shoot(bad, 1e300)
    assert 0.0 <= err.value.x <= 1.0
    assert "at x =" in str(err.value)


def test_tolerance_must_be_positive(cubic_benchmark):
    with pytest.raises(ValueError):
        shoot(cubic_benchmark, 1.0, integrator_tol=0.0)


def test_bisect_cubic_benchmark(cubic_benchmark):
    roots = bisect_solutions(cubic_benchmark, (-10.0, 10.0), grid=100)
    np.testing.assert_allclose([t.slope for t in roots], [-4.0, 0.0, 4.0], atol=1e-10)


def test_bisect_linear_problems():
    free = make_problem([0.5], [0.0, 0.0], [0.0])
    roots = bisect_solutions(free, (-3.0, 3.0), grid=10)
    assert len(roots) == 1 and abs(roots[0].slope) < 1e-12
    lin = make_problem([0.3, 0.7], [0.0] * 3, [2.0, 1.0])
    assert not resonance_det(lin.mesh, lin.b).in_B
    roots = bisect_solutions(lin, (-3.0, 3.0), grid=11)
    assert len(roots) == 1 and abs(roots[0].slope) < 1e-12


def test_bisect_example_matches_reference(example_problem):
    roots = bisect_solutions(example_problem, (-5.0, 5.0), grid=801, with_samples=False)
    found = [(t.slope, t.node_values()[0]) for t in roots if abs(t.slope) > 1e-9]
    assert len(found) == len(EXAMPLE_ROOTS)
    for (s, u), (s_ref, u_ref) in zip(found, EXAMPLE_ROOTS):
        assert s == pytest.approx(s_ref, abs=1e-9)
        assert u == pytest.approx(u_ref, abs=1e-10)


def test_polish_slope(example_problem):
    s = polish_slope(example_problem, 3.54)
    assert s == pytest.approx(EXAMPLE_ROOTS[3][0], abs=1e-9)


def test_verify_exact_solutions(half_mesh, cubic_benchmark):
    basis = build_basis(half_mesh, 4)
    w1 = basis.from_parts(m_part=[1.0])
    rep = verify_solution(make_problem(half_mesh, [0.0, 0.0], [4.0]), w1)
    assert rep.max_residual < 1e-12
    rep0 = verify_solution(make_problem(half_mesh, [0.0, 0.0], [0.0]), w1)
    assert rep0.jump_residuals[0] == pytest.approx(1.0, abs=1e-12)
    assert not rep0.passes(1e-6)
    zero = verify_solution(cubic_benchmark, basis.zeros())
    assert zero.max_residual == 0.0
    assert verify_solution(cubic_benchmark, basis.from_parts(m_part=[8.0])).max_residual < 1e-12


def test_verify_trajectory_and_samples(cubic_benchmark):
    traj = shoot(cubic_benchmark, 4.0)
    assert verify_solution(cubic_benchmark, traj).max_residual <= 1e-8
    x = np.unique(np.concatenate(csv_grid(cubic_benchmark.mesh)))
    u = np.where(x < 0.5, 4 * x, 4 * (1 - x))
    rep = verify_solution(cubic_benchmark, SampledFunction(x, u))
    assert rep.max_residual <= 1e-8
    assert rep.node_values[0] == pytest.approx(2.0, abs=1e-12)


def test_verify_flags_wrong_candidate(cubic_benchmark):
    x = np.unique(np.concatenate(csv_grid(cubic_benchmark.mesh)))
    u = np.where(x < 0.5, 8 * x, 8 * (1 - x))  # twice the true solution
    rep = verify_solution(cubic_benchmark, SampledFunction(x, u))
    assert rep.jump_residuals[0] == pytest.approx(48.0, rel=1e-9)


def test_verify_example_trajectory(example_problem):
    traj = shoot(example_problem, EXAMPLE_ROOTS[2][0])
    rep = verify_solution(example_problem, traj)
    assert rep.max_residual <= 1e-6
    assert np.all(rep.jump_residuals <= 1e-12)


def test_residuals_nonnegative(example_problem):
    rep = verify_solution(example_problem, shoot(example_problem, 2.0))
    d = rep.to_dict()
    assert min(d["ode_residual"], d["weak_residual"], *d["boundary_residuals"], *d["jump_residuals"]) >= 0
    assert rep.boundary_residuals[1] > 0.1  # slope 2 is not a solution


@given(st.floats(-0.5, 0.5), st.integers(1, 3))
def test_fd_weights_exact_on_polynomials(z, order):
    x = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * 0.1
    w = fd_weights(z * 0.1, x, order)
    for p in range(5):
        exact = np.polyder(np.poly1d([1.0] + [0.0] * p), order)(z * 0.1) if p >= order else 0.0
        assert w @ x**p == pytest.approx(exact, abs=1e-8)
