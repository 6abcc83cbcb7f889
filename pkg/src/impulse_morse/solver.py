"""Critical points of the discretized energy: safeguarded Newton and a
multi-start search seeded along the saddle splitting."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .galerkin import (CoefficientVector, GalerkinBasis, build_basis, energy, eval_u, gradient,
                       hessian)
from .shooting import IntegrationError, ResidualReport, polish_slope, shoot, verify_solution
from .spectral import spectral_report

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 100
    gradient_tol: float = 1e-10
    trust_radius_init: float = 1.0
    radii: tuple = (0.5, 2.0, 8.0)
    directions_per_radius: int | None = None  # default 2 * dim + 2
    dedup_distance: float = 1e-5
    seed: int = 0
    jobs: int = 1
    verify: bool = True
    refine_modes: int = 64
    integrator_tol: float = 1e-12

    def __post_init__(self):
        for name in ("gradient_tol", "trust_radius_init", "dedup_distance", "integrator_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.radii or any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")


@dataclass
class Refinement:
    """Shooting polish of a Galerkin critical point."""

    slope: float
    node_values: np.ndarray  # from the polished trajectory
    galerkin_node_values: np.ndarray  # from the re-solve at ``modes``
    discrepancy: float  # max_j |u_shoot(x_j) - u_galerkin(x_j)|
    modes: int

    def to_dict(self) -> dict:
        return {"slope": self.slope, "node_values": self.node_values.tolist(),
                "galerkin_node_values": self.galerkin_node_values.tolist(),
                "discrepancy": self.discrepancy, "modes": self.modes}


@dataclass
class CriticalPoint:
    coeffs: CoefficientVector
    energy: float
    gradient_norm: float
    hessian_inertia: tuple  # (negatives, zeros, positives)
    converged: bool
    trivial: bool
    iterations: int
    verification: ResidualReport | None = None
    refinement: Refinement | None = None
    trajectory: object = field(default=None, repr=False)

    @property
    def node_values(self) -> np.ndarray:
        return self.coeffs.node_values()

    def to_dict(self) -> dict:
        return {
            "node_values": self.node_values.tolist(),
            "energy": self.energy,
            "gradient_norm": self.gradient_norm,
            "inertia": list(self.hessian_inertia),
            "converged": self.converged,
            "trivial": self.trivial,
            "iterations": self.iterations,
            "modes": self.coeffs.basis.n,
            "h_norm": self.coeffs.h_norm(),
            "verification": None if self.verification is None else self.verification.to_dict(),
            "refinement": None if self.refinement is None else self.refinement.to_dict(),
        }


def inertia(H: np.ndarray, rel_tol: float = 1e-10) -> tuple:
    vals = np.linalg.eigvalsh(H)
    tol = rel_tol * max(1.0, float(np.max(np.abs(vals))))
    return int(np.sum(vals < -tol)), int(np.sum(np.abs(vals) <= tol)), int(np.sum(vals > tol))


def _newton_step(H, g):
    vals, vecs = np.linalg.eigh(H)
    scale = max(1.0, float(np.max(np.abs(vals))))
    # near-singular Hessian: shift for this step only
    shift = 1e-8 if np.min(np.abs(vals)) < 1e-10 * scale else 0.0
    vals = vals + shift
    return -(vecs @ ((vecs.T @ g) / vals))


def _lm_step(H, g, mu):
    # minimize 1/2 |g + H p|^2 + mu/2 |p|^2
    n = H.shape[0]
    return -np.linalg.solve(H.T @ H + mu * np.eye(n), H.T @ g)


def _newton(problem, basis, c0, opts: SolverOptions):
    c = np.array(c0, dtype=float)
    g = gradient(problem, basis, c)
    merit = 0.5 * float(g @ g)
    radius = opts.trust_radius_init * max(1.0, float(np.linalg.norm(c)))
    mu = 1e-3
    it = 0
    for it in range(1, opts.max_iters + 1):
        if np.sqrt(2 * merit) <= opts.gradient_tol:
            it -= 1
            break
        H = hessian(problem, basis, c)
        p = _newton_step(H, g)
        pn = np.linalg.norm(p)
        if pn > radius:
            p *= radius / pn
        accepted = False
        alpha = 1.0
        for _ in range(8):
            c_try = c + alpha * p
            g_try = gradient(problem, basis, c_try)
            m_try = 0.5 * float(g_try @ g_try)
            if np.isfinite(m_try) and m_try < (1 - 1e-4 * alpha) * merit:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # least-squares fallback on 1/2 |grad|^2
            for _ in range(12):
                p = _lm_step(H, g, mu * max(1.0, float(np.max(np.abs(H)))) ** 2)
                c_try = c + p
                g_try = gradient(problem, basis, c_try)
                m_try = 0.5 * float(g_try @ g_try)
                if np.isfinite(m_try) and m_try < merit:
                    accepted = True
                    mu = max(mu / 10, 1e-12)
                    break
                mu *= 10
        if not accepted:
            radius *= 0.25
            if radius < 1e-14:
                break
            continue
        if alpha == 1.0 and np.linalg.norm(c_try - c) >= 0.99 * radius:
            radius *= 2.0
        c, g, merit = c_try, g_try, m_try
        if not np.all(np.isfinite(c)) or np.linalg.norm(c) > 1e8:
            break
    return c, g, it


def _finish(problem, basis, c, g, it, opts) -> CriticalPoint:
    cv = CoefficientVector(basis, c)
    gn = float(np.linalg.norm(g))
    return CriticalPoint(
        coeffs=cv,
        energy=float(energy(problem, basis, c)),
        gradient_norm=gn,
        hessian_inertia=inertia(hessian(problem, basis, c)),
        converged=bool(gn <= opts.gradient_tol),
        trivial=bool(cv.h_norm() <= opts.dedup_distance),
        iterations=int(it),
    )


def refine_and_verify(problem, point: CriticalPoint, opts: SolverOptions = SolverOptions()) -> CriticalPoint:
    """Re-solve at ``opts.refine_modes`` modes, polish the initial slope on the
    shooting map and attach the residuals of the polished trajectory."""
    basis = point.coeffs.basis
    if opts.refine_modes and opts.refine_modes != basis.n:
        fine = build_basis(basis.mesh, opts.refine_modes)
        c, g, it = _newton(problem, fine, fine.prolong(point.coeffs).values, opts)
        refined = _finish(problem, fine, c, g, it, opts)
        if not refined.converged and point.converged:
            refined = point
    else:
        refined = point
    fb = refined.coeffs.basis
    slope0 = eval_u(fb, refined.coeffs, 0.0, derivative=True)
    try:
        slope = 0.0 if refined.trivial else polish_slope(problem, slope0, opts.integrator_tol)
        traj = shoot(problem, slope, opts.integrator_tol)
        report = verify_solution(problem, traj)
        disc = float(np.max(np.abs(traj.node_values() - refined.node_values))) if problem.m else 0.0
        ref = Refinement(float(slope), traj.node_values(), refined.node_values, disc, fb.n)
    except IntegrationError as exc:
        log.warning("shooting refinement failed: %s", exc)
        return replace(point, verification=None, refinement=None)
    return replace(point, verification=report, refinement=ref, trajectory=traj)


def newton_critical_point(problem, basis: GalerkinBasis, init, opts: SolverOptions = SolverOptions()) -> CriticalPoint:
    """Damped Newton on the gradient with a least-squares fallback.

    Returns the best iterate; ``converged`` is False after ``max_iters``.
    """
    c0 = init.values if isinstance(init, CoefficientVector) else np.asarray(init, dtype=float)
    c, g, it = _newton(problem, basis, c0, opts)
    point = _finish(problem, basis, c, g, it, opts)
    if opts.verify and point.converged:
        point = refine_and_verify(problem, point, opts)
    return point


def seed_directions(basis: GalerkinBasis, problem, opts: SolverOptions) -> list:
    """Unit (in H) seed directions: +/- every coordinate direction of the
    anti-coercive part H1 (M plus low sine modes on J1), then of H2, then
    random mixed directions."""
    spec = spectral_report(problem.mesh, problem.a)
    mask = basis.direction_classes(spec)
    dim = basis.dim
    gram = basis.gram
    order = list(np.flatnonzero(mask)) + list(np.flatnonzero(~mask))
    dirs = []
    for i in order:
        e = np.zeros(dim)
        e[i] = 1.0 / np.sqrt(gram[i, i])
        dirs.append(e)
        dirs.append(-e)
    want = opts.directions_per_radius or (2 * dim + 2)
    rng = np.random.default_rng(opts.seed)
    while len(dirs) < want:
        d = rng.standard_normal(dim)
        d /= np.sqrt(d @ gram @ d)
        dirs.append(d)
    return dirs[:want] if opts.directions_per_radius else dirs


def saddle_search(problem, basis: GalerkinBasis, opts: SolverOptions = SolverOptions()) -> list:
    """Multi-start Newton from ``rho * e`` over the seed radii and directions.

    Converged points are deduplicated by coefficient distance and returned
    sorted by energy, each with its Hessian inertia (and, if requested, the
    shooting verification).  The trivial point is always tried.
    """
    dirs = seed_directions(basis, problem, opts)
    starts = [np.zeros(basis.dim)] + [r * d for r in opts.radii for d in dirs]

    def run(c0):
        try:
            with np.errstate(all="ignore"):
                c, g, it = _newton(problem, basis, c0, opts)
        except (np.linalg.LinAlgError, FloatingPointError):
            return None
        if not np.all(np.isfinite(g)) or np.linalg.norm(g) > opts.gradient_tol:
            return None
        return c, g, it

    if opts.jobs > 1:
        with ThreadPoolExecutor(max_workers=opts.jobs) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]

    found = []
    for res in results:
        if res is None:
            continue
        c = res[0]
        if any(np.linalg.norm(c - q[0]) <= opts.dedup_distance for q in found):
            continue
        found.append(res)
    if not found:
        log.warning("saddle search: no start converged")
        return []
    points = [_finish(problem, basis, c, g, it, opts) for c, g, it in found]
    if opts.verify:
        points = [refine_and_verify(problem, p, opts) for p in points]
    points.sort(key=lambda p: (p.energy, tuple(np.round(p.node_values, 12))))
    return points
