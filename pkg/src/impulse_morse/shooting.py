"""Shooting oracle: piecewise integration of ``u'' = -f(x, u)`` with algebraic slope
jumps at the nodes, the exact transfer map of the linearized impulses, and
residual checks of candidate solutions.

Nothing here goes through the Galerkin functional or the Gram matrix, so the
results can be used to cross-check those paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np
from scipy.interpolate import CubicHermiteSpline, make_interp_spline
from scipy.optimize import brentq

from .mesh import ImpulseMesh

SAMPLES_PER_SUBINTERVAL = 2048
WEAK_TEST_MODES = 16
WEAK_QUAD_ORDER = 160

# Dormand-Prince 5(4)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
ORDER = 5


class IntegrationError(RuntimeError):
    """Step size underflow or blow-up; ``x`` is where integration stopped."""

    def __init__(self, message, x):
        super().__init__(f"{message} at x = {x:.17g}")
        self.x = x


# ---------------------------------------------------------------------------
# transfer map of the linearized problem

def linear_transfer(mesh: ImpulseMesh, b) -> float:
    """``u(1)`` for ``u'' = 0``, ``u(0) = 0``, ``u'(0+) = 1`` with slope drops
    ``b_j u(x_j)``.  Zero exactly when ``b`` is in the resonance set."""
    b = np.asarray(b, dtype=float).ravel()
    u, s = 0.0, 1.0
    lengths = mesh.subinterval_lengths
    for j in range(mesh.m):
        u += s * lengths[j]
        s -= b[j] * u
    return float(u + s * lengths[-1])


# ---------------------------------------------------------------------------
# integrator

def _dp45_segment(f, x0, x1, u, v, h, tol, stops, out, stats):
    """Integrate ``(u, v)' = (v, -f(u))`` from ``x0`` to ``x1``, landing exactly on
    every point of ``stops`` (sorted, inside ``(x0, x1]``) and recording
    ``(x, u, v)`` there.  Returns the final state and the step-size proposal."""
    x = x0
    si = 0
    n_stops = len(stops)
    a = _A
    b = _B
    e = _E
    k1u, k1v = v, -f(u)
    while x < x1:
        target = stops[si] if si < n_stops else x1
        step = min(h, target - x)
        landing = step >= target - x
        if step <= 16 * 2.2e-16 * max(1.0, abs(x)):
            raise IntegrationError("step size underflow", x)
        k2u = v + step * a[1][0] * k1v
        k2v = -f(u + step * a[1][0] * k1u)
        k3u = v + step * (a[2][0] * k1v + a[2][1] * k2v)
        k3v = -f(u + step * (a[2][0] * k1u + a[2][1] * k2u))
        k4u = v + step * (a[3][0] * k1v + a[3][1] * k2v + a[3][2] * k3v)
        k4v = -f(u + step * (a[3][0] * k1u + a[3][1] * k2u + a[3][2] * k3u))
        k5u = v + step * (a[4][0] * k1v + a[4][1] * k2v + a[4][2] * k3v + a[4][3] * k4v)
        k5v = -f(u + step * (a[4][0] * k1u + a[4][1] * k2u + a[4][2] * k3u + a[4][3] * k4u))
        k6u = v + step * (a[5][0] * k1v + a[5][1] * k2v + a[5][2] * k3v + a[5][3] * k4v
                          + a[5][4] * k5v)
        k6v = -f(u + step * (a[5][0] * k1u + a[5][1] * k2u + a[5][2] * k3u + a[5][3] * k4u
                             + a[5][4] * k5u))
        u_new = u + step * (b[0] * k1u + b[2] * k3u + b[3] * k4u + b[4] * k5u + b[5] * k6u)
        v_new = v + step * (b[0] * k1v + b[2] * k3v + b[3] * k4v + b[4] * k5v + b[5] * k6v)
        if not (np.isfinite(u_new) and np.isfinite(v_new)) or max(abs(u_new), abs(v_new)) > 1e150:
            raise IntegrationError("solution blow-up", x)
        k7u, k7v = v_new, -f(u_new)
        eu = step * (e[0] * k1u + e[2] * k3u + e[3] * k4u + e[4] * k5u + e[5] * k6u + e[6] * k7u)
        ev = step * (e[0] * k1v + e[2] * k3v + e[3] * k4v + e[4] * k5v + e[5] * k6v + e[6] * k7v)
        su = tol * (1.0 + max(abs(u), abs(u_new)))
        sv = tol * (1.0 + max(abs(v), abs(v_new)))
        err = sqrt(0.5 * ((eu / su) ** 2 + (ev / sv) ** 2))
        if err <= 1.0:
            x = target if landing else x + step
            u, v = float(u_new), float(v_new)
            k1u, k1v = k7u, k7v
            stats["steps"] += 1
            if landing and si < n_stops:
                out.append((x, u, v))
                si += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** (-1.0 / ORDER)))
            if not landing or step >= h:
                h = step * fac
        else:
            stats["rejected"] += 1
            h = step * max(0.2, 0.9 * err ** (-1.0 / ORDER))
    return u, v, h


@dataclass
class Jump:
    x: float
    u: float
    slope_before: float
    slope_after: float


@dataclass
class Trajectory:
    """Samples of ``u`` and ``u'`` per closed subinterval plus the node jumps.

    Nodes appear in two neighbouring segments, with the one-sided slopes.
    """

    slope: float
    segments: list  # list of (x, u, du) arrays, one per subinterval
    jumps: list
    u_end: float
    du_end: float
    steps: int = 0
    rejected: int = 0

    @property
    def x(self) -> np.ndarray:
        return self._flat()[0]

    @property
    def u(self) -> np.ndarray:
        return self._flat()[1]

    @property
    def du(self) -> np.ndarray:
        return self._flat()[2]

    def _flat(self):
        xs, us, ds = [], [], []
        for j, (x, u, d) in enumerate(self.segments):
            sl = slice(None) if j == 0 else slice(1, None)
            xs.append(x[sl])
            us.append(u[sl])
            ds.append(d[sl])
        return np.concatenate(xs), np.concatenate(us), np.concatenate(ds)

    def node_values(self) -> np.ndarray:
        return np.array([jp.u for jp in self.jumps])


def _rhs(problem, j):
    a = float(problem.a[j])
    s = float(problem.g_scale[j])
    g = problem.g
    if g.is_zero:
        return lambda t: a * t
    val = g.scalar_value()
    return lambda t: a * t + s * val(t)


def _integrate(problem, slope, tol, samples):
    mesh = problem.mesh
    nodes = mesh.nodes
    stats = {"steps": 0, "rejected": 0}
    u, v = 0.0, float(slope)
    h = 0.01 * float(np.min(mesh.subinterval_lengths))
    segments, jumps = [], []
    for j in range(mesh.m + 1):
        x0, x1 = float(nodes[j]), float(nodes[j + 1])
        if samples is None:
            stops = ()
        else:
            stops = samples[j][1:]
        out = [(x0, u, v)]
        u, v, h = _dp45_segment(_rhs(problem, j), x0, x1, u, v, h, tol, stops, out, stats)
        if samples is not None:
            arr = np.array(out)
            segments.append((arr[:, 0], arr[:, 1], arr[:, 2]))
        if j < mesh.m:
            before = v
            v = before - (float(problem.b[j]) * u + problem.h[j].scalar_value()(u))
            jumps.append(Jump(x1, u, before, v))
    return Trajectory(float(slope), segments, jumps, u, v, stats["steps"], stats["rejected"])


def sample_grid(mesh: ImpulseMesh, per_subinterval: int = SAMPLES_PER_SUBINTERVAL) -> list:
    """Uniform grid on every closed subinterval (both endpoints included)."""
    nodes = mesh.nodes
    return [np.linspace(nodes[j], nodes[j + 1], per_subinterval) for j in range(mesh.m + 1)]


def csv_grid(mesh: ImpulseMesh, total: int = 4096) -> list:
    """Per-subinterval uniform grids whose union has ``total`` distinct points,
    nodes included; counts are proportional to the subinterval lengths."""
    m = mesh.m
    budget = total + m  # shared nodes are counted twice
    lengths = mesh.subinterval_lengths
    counts = np.maximum(6, np.floor(lengths * budget).astype(int))
    counts[np.argmax(lengths)] += budget - counts.sum()
    nodes = mesh.nodes
    return [np.linspace(nodes[j], nodes[j + 1], counts[j]) for j in range(m + 1)]


def shoot(problem, initial_slope: float, integrator_tol: float = 1e-12, samples=None) -> Trajectory:
    """Integrate the impulsive IVP with ``u(0) = 0``, ``u'(0+) = initial_slope``.

    ``samples`` is a list of per-subinterval grids (default: 2048 uniform points
    per subinterval) that the integrator lands on exactly.  Pass
    ``samples=False`` to only propagate to ``x = 1``.
    """
    if integrator_tol <= 0:
        raise ValueError("integrator_tol must be positive")
    if samples is None:
        samples = sample_grid(problem.mesh)
    elif samples is False:
        samples = None
    return _integrate(problem, initial_slope, integrator_tol, samples)


def shooting_map(problem, slope: float, integrator_tol: float = 1e-12) -> float:
    """``u(1)`` as a function of the initial slope."""
    return _integrate(problem, slope, integrator_tol, None).u_end


def bisect_solutions(problem, slope_range=(-10.0, 10.0), grid: int = 100, tol: float = 1e-12,
                     integrator_tol: float = 1e-12, with_samples: bool = True) -> list:
    """All roots of ``s -> u(1; s)`` bracketed on a uniform slope grid."""
    if grid < 2:
        raise ValueError("grid must be >= 2")
    lo, hi = map(float, slope_range)
    s_grid = np.linspace(lo, hi, grid)
    vals = []
    for s in s_grid:
        try:
            vals.append(shooting_map(problem, s, integrator_tol))
        except IntegrationError:
            vals.append(np.nan)
    vals = np.array(vals)
    roots = []
    for i in range(grid):
        if vals[i] == 0.0:
            roots.append(float(s_grid[i]))
    for i in range(grid - 1):
        va, vb = vals[i], vals[i + 1]
        if not (np.isfinite(va) and np.isfinite(vb)) or va == 0.0 or vb == 0.0:
            continue
        if np.sign(va) != np.sign(vb):
            r = brentq(lambda s: shooting_map(problem, s, integrator_tol),
                       s_grid[i], s_grid[i + 1], xtol=tol, rtol=4 * np.finfo(float).eps,
                       maxiter=200)
            roots.append(float(r))
    roots.sort()
    merged = []
    for r in roots:
        if merged and abs(r - merged[-1]) < 10 * tol:
            continue
        merged.append(r)
    samples = None if with_samples else False
    return [shoot(problem, r, integrator_tol, samples) for r in merged]


def polish_slope(problem, slope: float, integrator_tol: float = 1e-12, max_iter: int = 50,
                 xtol: float = 1e-14) -> float:
    """Secant iteration on the shooting map starting from ``slope``."""
    s0 = float(slope)
    s1 = s0 + max(1e-6, 1e-6 * abs(s0))
    f0 = shooting_map(problem, s0, integrator_tol)
    f1 = shooting_map(problem, s1, integrator_tol)
    for _ in range(max_iter):
        if f1 == 0.0 or f1 == f0:
            break
        s2 = s1 - f1 * (s1 - s0) / (f1 - f0)
        s0, f0 = s1, f1
        s1 = s2
        f1 = shooting_map(problem, s1, integrator_tol)
        if abs(s1 - s0) <= xtol * max(1.0, abs(s1)):
            break
    return s1 if abs(f1) <= abs(f0) else s0


# ---------------------------------------------------------------------------
# residual verification

@dataclass
class SampledFunction:
    """Values of ``u`` on sorted points of ``[0, 1]`` (e.g. read from CSV)."""

    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.x.shape != self.u.shape or self.x.ndim != 1:
            raise ValueError("x and u must be 1-D arrays of equal length")
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("sample points must be strictly increasing")


@dataclass
class ResidualReport:
    ode_residual: float
    jump_residuals: np.ndarray
    boundary_residuals: tuple
    weak_residual: float
    node_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def max_residual(self) -> float:
        vals = [self.ode_residual, self.weak_residual, *self.boundary_residuals]
        if self.jump_residuals.size:
            vals.append(float(np.max(self.jump_residuals)))
        return float(max(vals))

    def passes(self, level: float) -> bool:
        return self.max_residual <= level

    def to_dict(self) -> dict:
        return {
            "ode_residual": self.ode_residual,
            "jump_residuals": self.jump_residuals.tolist(),
            "boundary_residuals": list(self.boundary_residuals),
            "weak_residual": self.weak_residual,
            "max_residual": self.max_residual,
            "node_values": self.node_values.tolist(),
        }


def fd_weights(z: float, x, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``z`` using
    the points ``x`` (Fornberg's recursion)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _centered_derivative(x, y, order):
    """5-point derivative of ``y`` at the interior points ``x[2:-2]``; the
    differences are formed against the centre value to limit cancellation."""
    n = x.size
    out = np.empty(max(n - 4, 0))
    for i in range(2, n - 2):
        xs = x[i - 2: i + 3]
        w = fd_weights(x[i], xs - x[i] + x[i], order)
        out[i - 2] = w @ (y[i - 2: i + 3] - y[i])
    return out


def _centered_weights_uniform_ok(x):
    d = np.diff(x)
    return np.allclose(d, d[0], rtol=1e-6, atol=0)


def _centered(x, y, order):
    n = x.size
    if n < 5:
        return np.zeros(0)
    if _centered_weights_uniform_ok(x):
        # weights from actual positions, vectorized over all stencils
        offs = np.stack([x[k: n - 4 + k] - x[2: n - 2] for k in range(5)])
        W = np.stack([fd_weights(0.0, offs[:, i], order) for i in range(n - 4)], axis=1) \
            if n < 64 else _batched_weights(offs, order)
        diffs = np.stack([y[k: n - 4 + k] - y[2: n - 2] for k in range(5)])
        return np.sum(W * diffs, axis=0)
    return _centered_derivative(x, y, order)


def _batched_weights(offs, order):
    """Weights for many 5-point stencils at once: solve the moment systems."""
    npts, ns = offs.shape
    V = np.stack([offs ** p for p in range(npts)], axis=0)  # (p, k, s)
    rhs = np.zeros((npts, ns))
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    # solve V^T w = rhs per stencil, scaled for conditioning
    scale = np.max(np.abs(offs), axis=0)
    Vs = V / scale[None, None, :] ** np.arange(npts)[:, None, None]
    rs = rhs / scale[None, :] ** np.arange(npts)[:, None]
    A = np.transpose(Vs, (2, 0, 1))  # (s, p, k)
    w = np.linalg.solve(A, np.transpose(rs)[:, :, None])[:, :, 0]
    return w.T


def _segments_from_input(problem, u):
    """Per-subinterval ``(x, u, du or None)`` plus node values and a callable
    for u on each closed subinterval."""
    from .galerkin import CoefficientVector, segment_eval

    mesh = problem.mesh
    grid = sample_grid(mesh)
    segs, interps = [], []
    if isinstance(u, Trajectory):
        if not u.segments:
            raise ValueError("trajectory carries no samples")
        segs = list(u.segments)
        interps = [CubicHermiteSpline(x, uu, du) for x, uu, du in segs]
        nodes = np.array([jp.u for jp in u.jumps])
        slopes = [(jp.slope_before, jp.slope_after) for jp in u.jumps]
        bnd = (abs(float(segs[0][1][0])), abs(float(u.u_end)))
        return segs, interps, nodes, slopes, bnd
    if isinstance(u, CoefficientVector):
        basis = u.basis
        for j in range(mesh.m + 1):
            uu, du = segment_eval(basis, u, j, grid[j])
            segs.append((grid[j], uu, du))
            interps.append(lambda xx, j=j: segment_eval(basis, u, j, xx)[0])
        nodes = u.node_values()
        slopes = [(float(segs[l][2][-1]), float(segs[l + 1][2][0])) for l in range(mesh.m)]
        from .galerkin import eval_u
        bnd = (abs(eval_u(basis, u, 0.0)), abs(eval_u(basis, u, 1.0)))
        return segs, interps, nodes, slopes, bnd
    if isinstance(u, SampledFunction):
        return _segments_from_samples(problem, u)
    raise TypeError(f"cannot verify object of type {type(u).__name__}")


def _segments_from_samples(problem, sf: SampledFunction):
    mesh = problem.mesh
    nodes = mesh.nodes
    eps = 1e-12
    segs, interps = [], []
    for j in range(mesh.m + 1):
        sel = (sf.x >= nodes[j] - eps) & (sf.x <= nodes[j + 1] + eps)
        x, uu = sf.x[sel], sf.u[sel]
        if x.size < 6:
            raise ValueError(f"subinterval {j + 1} has fewer than 6 samples")
        segs.append((x, uu, None))
        interps.append(make_interp_spline(x, uu, k=5))
    node_vals, slopes = [], []
    for l in range(1, mesh.m + 1):
        xl = nodes[l]
        left_x, left_u = segs[l - 1][0], segs[l - 1][1]
        right_x, right_u = segs[l][0], segs[l][1]
        ul = fd_weights(xl, left_x[-5:], 0) @ left_u[-5:]
        ur = fd_weights(xl, right_x[:5], 0) @ right_u[:5]
        node_vals.append(0.5 * (ul + ur))
        sl = fd_weights(xl, left_x[-5:], 1) @ (left_u[-5:] - left_u[-1])
        sr = fd_weights(xl, right_x[:5], 1) @ (right_u[:5] - right_u[0])
        slopes.append((float(sl), float(sr)))
    u0 = fd_weights(0.0, segs[0][0][:5], 0) @ segs[0][1][:5]
    u1 = fd_weights(1.0, segs[-1][0][-5:], 0) @ segs[-1][1][-5:]
    return segs, interps, np.array(node_vals), slopes, (abs(float(u0)), abs(float(u1)))


def weak_residual(problem, interps, node_values, n_test: int = WEAK_TEST_MODES,
                  quad_order: int = WEAK_QUAD_ORDER) -> float:
    """``sup_e |<u, e> - int f(x, u) e - sum_j i_j(u(x_j)) e(x_j)|`` over the
    H-normalized sine modes (k <= n_test per subinterval) and the representers.

    ``<u, e>`` is taken from values of u only: integration by parts for the
    sine modes and the reproducing property for the representers.
    """
    mesh = problem.mesh
    nodes = mesh.nodes
    xm = mesh.interior_points
    G = mesh.gram
    t, wt = np.polynomial.legendre.leggauss(quad_order)
    node_full = np.concatenate(([0.0], node_values, [0.0]))
    k = np.arange(1, n_test + 1, dtype=float)
    worst = 0.0
    m_rhs = np.zeros(mesh.m)
    for j in range(mesh.m + 1):
        lo, hi = nodes[j], nodes[j + 1]
        ell = hi - lo
        x = lo + 0.5 * ell * (t + 1.0)
        w = 0.5 * ell * wt
        ux = np.asarray(interps[j](x), dtype=float)
        fx = problem.f(j, ux)
        kp = k[:, None] * np.pi / ell
        norm = np.sqrt(2.0 * ell) / (k[:, None] * np.pi)
        phi = norm * np.sin(kp * (x[None, :] - lo))
        dphi_lo = (norm * kp)[:, 0]
        dphi_hi = dphi_lo * np.cos(k * np.pi)
        ip = node_full[j + 1] * dphi_hi - node_full[j] * dphi_lo + (kp[:, 0] ** 2) * (phi @ (w * ux))
        res = ip - phi @ (w * fx)
        worst = max(worst, float(np.max(np.abs(res))))
        wv = np.where(x[None, :] < xm[:, None], (1.0 - xm[:, None]) * x[None, :],
                      xm[:, None] * (1.0 - x[None, :]))
        m_rhs += wv @ (w * fx)
    imp = problem.impulses(node_values)
    res_m = node_values - m_rhs - G @ imp
    res_m = res_m / np.sqrt(np.diag(G))
    if res_m.size:
        worst = max(worst, float(np.max(np.abs(res_m))))
    return worst


def verify_solution(problem, u) -> ResidualReport:
    """Strong, jump, boundary and weak residuals of a candidate solution.

    ``u`` may be a :class:`Trajectory`, a Galerkin ``CoefficientVector`` or a
    :class:`SampledFunction`.  The ODE residual uses 5-point central differences
    inside each subinterval (two points kept clear of every node): of ``u'``
    when the candidate carries derivatives, of ``u`` otherwise.
    """
    segs, interps, node_vals, slopes, bnd = _segments_from_input(problem, u)
    ode = 0.0
    for j, (x, uu, du) in enumerate(segs):
        if du is not None:
            upp = _centered(x, du, 1)
        else:
            upp = _centered(x, uu, 2)
        if upp.size:
            res = np.abs(-upp - problem.f(j, uu[2:-2]))
            ode = max(ode, float(np.max(res)))
    imp = problem.impulses(node_vals) if problem.m else np.zeros(0)
    jumps = np.array([abs(after - before + imp[l]) for l, (before, after) in enumerate(slopes)])
    weak = weak_residual(problem, interps, node_vals)
    return ResidualReport(ode, jumps, (float(bnd[0]), float(bnd[1])), weak, np.asarray(node_vals, dtype=float))
