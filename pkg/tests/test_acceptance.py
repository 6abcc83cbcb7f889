"""Acceptance criteria 1-10.

Each test registers its criterion with the ``acceptance`` fixture, so the run
ends with one PASS/FAIL line per criterion under "acceptance criteria".
"""

import json
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from impulse_morse import benchmark_problem
from impulse_morse.cli import main
from impulse_morse.galerkin import build_basis, energy, gradient, hessian
from impulse_morse.mesh import build_mesh
from impulse_morse.resonance import (corollary_threshold, hessian_at_zero,
                                     nontriviality_certificate, resonance_det,
                                     resonance_path_scan)
from impulse_morse.shooting import bisect_solutions, linear_transfer, verify_solution
from impulse_morse.solver import SolverOptions, saddle_search
from impulse_morse.spectral import fd_dirichlet_ground_state, subinterval_eigenvalue

from conftest import EXAMPLE_A, random_mesh

EXAMPLE_TOML = """\
[mesh]
points = [0.5]

[coefficients]
a = [50, 50]
a_unit = "pi^2"
b = [3]

[nonlinearity]
g = "rational_cubic"
g_params = { scale = "a" }
h = ["cubic_plus_square"]
"""


def _sign_roots(func, lo, hi, steps):
    t = np.linspace(lo, hi, steps)
    v = np.array([func(s) for s in t])
    return [brentq(func, t[i], t[i + 1], xtol=1e-15, rtol=1e-15)
            for i in range(steps - 1) if np.sign(v[i]) != np.sign(v[i + 1])]


def test_c01_resonance_oracle_equivalence(acceptance):
    acceptance(1, "resonance roots equal transfer-map roots")
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst, total = 0.0, 0
    for _ in range(50):
        mesh = random_mesh(rng, m_max=4)
        b0 = rng.uniform(-10, 5, mesh.m)
        b1 = rng.uniform(10, 80, mesh.m)
        scan = resonance_path_scan(mesh, b0, b1, steps=200)
        det_roots = [c.t for c in scan.crossings if c.det_sign_change]
        transfer_roots = _sign_roots(lambda t: linear_transfer(mesh, b0 + t * (b1 - b0)), 0.0, 1.0, 200)
        assert len(det_roots) == len(transfer_roots)
        for r, s in zip(det_roots, transfer_roots):
            gap = float(np.max(np.abs((r - s) * (b1 - b0))))
            worst = max(worst, gap)
            assert gap <= 1e-8
        total += len(det_roots)
    elapsed = time.perf_counter() - t0
    assert total > 50
    assert elapsed < 10.0
    acceptance(1, "resonance roots equal transfer-map roots",
               f"{total} roots, max |db| {worst:.1e}, {elapsed:.1f} s")


def test_c02_determinant_identity(acceptance):
    acceptance(2, "det A = det G (-1)^m det(diag(b) G - I)")
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(500):
        mesh = random_mesh(rng, m_max=6, min_gap=1e-3)
        b = rng.uniform(-50, 100, mesh.m)
        lhs = np.linalg.det(hessian_at_zero(mesh, b))
        rhs = np.linalg.det(mesh.gram) * (-1) ** mesh.m * resonance_det(mesh, b).det_value
        rel = abs(lhs - rhs) / abs(rhs)
        worst = max(worst, rel)
        assert rel <= 1e-9
    acceptance(2, "det A = det G (-1)^m det(diag(b) G - I)", f"max rel err {worst:.1e}")


def test_c03_known_resonance_points(acceptance):
    acceptance(3, "known resonance points and thresholds")
    half = build_mesh([0.5])
    scan = resonance_path_scan(half, [0.0], [8.0], steps=100)
    assert [c.b[0] for c in scan.crossings] == pytest.approx([4.0], abs=1e-10)
    assert resonance_det(half, [4.0]).in_B

    thirds = build_mesh([1 / 3, 2 / 3])
    scan = resonance_path_scan(thirds, [0.0, 0.0], [10.0, 10.0], steps=100)
    assert [c.b[0] for c in scan.crossings] == pytest.approx([3.0, 9.0], abs=1e-10)

    assert abs(corollary_threshold(half, 1) - 4.0) <= 1e-10
    for m in range(1, 7):
        mesh = build_mesh([j / (m + 1) for j in range(1, m + 1)])
        prob = benchmark_problem(mesh, [1.0] * (m + 1), [0.0] * m)
        eq = nontriviality_certificate(mesh, prob).equally_spaced
        assert abs(eq["lambda_1"] - (m + 1) ** 2 * np.pi**2) <= 1e-10
        assert abs(eq["b_threshold"] - 2 * (m + 1)) <= 1e-10
        for j in range(1, m + 1):
            assert abs(corollary_threshold(mesh, j) - 2 * (m + 1)) <= 1e-10
            assert abs(subinterval_eigenvalue(mesh, j, 1) - (m + 1) ** 2 * np.pi**2) <= 1e-10
    acceptance(3, "known resonance points and thresholds", "B = {4}; t = 3, 9; thresholds m = 1..6")


def test_c04_morse_index_path_constancy(acceptance):
    acceptance(4, "m0 constant off B, jumps by multiplicity across B")
    rng = np.random.default_rng(404)
    crossings = 0
    for _ in range(20):
        mesh = random_mesh(rng, m_max=4)
        b0 = rng.uniform(-10, 5, mesh.m)
        b1 = rng.uniform(5, 60, mesh.m)
        scan = resonance_path_scan(mesh, b0, b1, steps=150)
        assert scan.constant_between_crossings
        # between consecutive det sign changes the sampled m0 never moves
        signs = np.sign(scan.det)
        for i in range(len(scan.t) - 1):
            if signs[i] == signs[i + 1]:
                assert scan.m0[i] == scan.m0[i + 1]
        for c in scan.crossings:
            assert abs(c.m0_after - c.m0_before) == c.multiplicity >= 1
        crossings += len(scan.crossings)
    assert crossings > 0
    acceptance(4, "m0 constant off B, jumps by multiplicity across B", f"{crossings} crossings on 20 paths")


def test_c05_gradient_hessian_fd(acceptance):
    acceptance(5, "gradient and Hessian match finite differences")
    t0 = time.perf_counter()
    prob = benchmark_problem([0.5], [EXAMPLE_A] * 2, [3.0])
    basis = build_basis(prob.mesh, 8)
    rng = np.random.default_rng(505)
    eps = 1e-6
    g_worst = h_worst = 0.0
    eye = np.eye(basis.dim) * eps
    for _ in range(20):
        c = rng.uniform(-1, 1, basis.dim)
        g = gradient(prob, basis, c)
        H = hessian(prob, basis, c)
        for i in range(basis.dim):
            fd = (energy(prob, basis, c + eye[i]) - energy(prob, basis, c - eye[i])) / (2 * eps)
            g_worst = max(g_worst, abs(fd - g[i]) / max(1.0, abs(g[i])))
            row = (gradient(prob, basis, c + eye[i]) - gradient(prob, basis, c - eye[i])) / (2 * eps)
            h_worst = max(h_worst, np.max(np.abs(row - H[i])) / max(1.0, np.max(np.abs(H[i]))))
    elapsed = time.perf_counter() - t0
    assert g_worst <= 1e-6
    assert h_worst <= 1e-5
    assert elapsed < 5.0
    acceptance(5, "gradient and Hessian match finite differences",
               f"gradient {g_worst:.1e}, Hessian rows {h_worst:.1e}, {elapsed:.1f} s")


def test_c06_cubic_impulse_benchmark(acceptance, cubic_benchmark):
    title = "cubic impulse benchmark (u = +-8 w1, energy 4)"
    acceptance(6, title)
    roots = bisect_solutions(cubic_benchmark, (-10.0, 10.0), grid=100)
    slopes = [t.slope for t in roots]
    assert slopes == pytest.approx([-4.0, 0.0, 4.0], abs=1e-10)

    basis = build_basis(cubic_benchmark.mesh, 8)
    pts = saddle_search(cubic_benchmark, basis)
    nontrivial = sorted((p for p in pts if not p.trivial), key=lambda p: p.node_values[0])
    assert len(nontrivial) == 2 and len(pts) == 3
    for p, sign in zip(nontrivial, (-1, 1)):
        # the exact solution u = 8 w1 has u(1/2) = 2 and energy 16 / 2 - 2^4 / 4 = 4
        assert p.node_values[0] == pytest.approx(2.0 * sign, abs=1e-8)
        assert p.coeffs.m_part[0] == pytest.approx(8.0 * sign, abs=1e-8)
        assert np.max(np.abs(p.coeffs.sine)) <= 1e-8
        assert p.energy == pytest.approx(4.0, abs=1e-8)
        assert p.verification.max_residual <= 1e-8
        assert verify_solution(cubic_benchmark, p.coeffs).max_residual <= 1e-8
    worst = max(p.verification.max_residual for p in nontrivial)
    acceptance(6, title, f"slopes -4, 0, 4; residual {worst:.1e}")


def test_c07_theorem_end_to_end(acceptance, tmp_path):
    acceptance(7, "benchmark problem: certificate, solve, shooting cross-check")
    t0 = time.perf_counter()
    prob = benchmark_problem([0.5], [EXAMPLE_A] * 2, [3.0])
    cert = nontriviality_certificate(prob.mesh, prob)
    assert cert.conclusion == "nontrivial solution guaranteed"
    assert cert.condition_4_1 and cert.k_saddle == 7

    path = tmp_path / "example.toml"
    path.write_text(EXAMPLE_TOML)
    assert main(["solve", "--problem", str(path), "--out", str(tmp_path), "--jobs", "1"]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["certificate"]["conclusion"] == "nontrivial solution guaranteed"
    nontrivial = [p for p in report["critical_points"] if not p["trivial"]]
    assert nontrivial

    roots = bisect_solutions(prob, (-5.0, 5.0), grid=801, with_samples=False)
    shot_nodes = [t.node_values()[0] for t in roots if abs(t.slope) > 1e-9]
    matched = 0
    worst = 0.0
    for p in nontrivial:
        assert p["verification"]["max_residual"] <= 1e-6
        galerkin = p["refinement"]["galerkin_node_values"][0]
        gap = min(abs(galerkin - u) for u in shot_nodes)
        if gap <= 1e-5:
            matched += 1
            worst = max(worst, gap)
    elapsed = time.perf_counter() - t0
    assert matched >= 1
    assert elapsed < 60.0
    acceptance(7, "benchmark problem: certificate, solve, shooting cross-check",
               f"{matched}/{len(nontrivial)} points re-found, max |du(x1)| {worst:.1e}, {elapsed:.1f} s")


def test_c08_eigenvalue_formula_convergence(acceptance):
    acceptance(8, "closed-form eigenvalue vs finite differences, order 2")
    mesh = build_mesh([0.25, 0.6])
    orders = []
    for j in range(1, mesh.m + 2):
        exact = subinterval_eigenvalue(mesh, j, 1)
        ell = mesh.subinterval_lengths[j - 1]
        hs = [1e-2, 5e-3, 2.5e-3]
        errs = [abs(fd_dirichlet_ground_state(ell, h) - exact) for h in hs]
        order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        orders.append(order)
        assert abs(order - 2.0) <= 0.2 * 2.0
    acceptance(8, "closed-form eigenvalue vs finite differences, order 2",
               "orders " + ", ".join(f"{o:.3f}" for o in orders))


def test_c09_basis_convergence(acceptance, cubic_benchmark):
    acceptance(9, "basis refinement on the cubic benchmark")
    values = []
    for n in (8, 16, 32):
        pts = saddle_search(cubic_benchmark, build_basis(cubic_benchmark.mesh, n), SolverOptions(verify=False))
        values.append(max(float(p.node_values[0]) for p in pts))
    changes = [abs(values[1] - values[0]), abs(values[2] - values[1])]
    # the exact solution lies in M; both changes are at roundoff level, so
    # "decreasing" is read as non-increasing up to one ulp of u(x1)
    assert changes[1] <= changes[0] + 4 * np.spacing(2.0)
    assert changes[1] <= 1e-8
    acceptance(9, "basis refinement on the cubic benchmark",
               f"changes {changes[0]:.1e}, {changes[1]:.1e}")


def test_c10_determinism(acceptance, tmp_path):
    acceptance(10, "solve reports are byte-identical for equal seeds")
    path = tmp_path / "example.toml"
    path.write_text(EXAMPLE_TOML)
    outs = []
    for run, jobs in enumerate(("1", "3")):
        out = tmp_path / f"run{run}"
        assert main(["solve", "--problem", str(path), "--out", str(out), "--seed", "7", "--jobs", jobs]) == 0
        outs.append((out / "report.json").read_bytes())
    assert outs[0] == outs[1]
    acceptance(10, "solve reports are byte-identical for equal seeds", f"{len(outs[0])} bytes")
