"""Resonance set of the linearized impulses, Morse index at zero, critical groups,
and nontriviality certificates."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np
from scipy.optimize import brentq

from .mesh import ImpulseMesh, MeshError
from .nonlinearity import sample_sublinear, sample_superlinear
from .spectral import DEFAULT_REL_TOL, spectral_report

DET_TOL = 1e-10
EIG_TOL = 1e-10
COEFFICIENT_GROUP = "G"


def _as_b(mesh: ImpulseMesh, b) -> np.ndarray:
    b = np.asarray(b, dtype=float).ravel()
    if b.size != mesh.m:
        raise MeshError(f"b has length {b.size}, expected m = {mesh.m}")
    return b


@dataclass(frozen=True)
class ResonanceValue:
    det_value: float
    in_B: bool
    threshold: float

    def to_dict(self) -> dict:
        return {"det": self.det_value, "in_B": self.in_B, "threshold": self.threshold}


def resonance_matrix(mesh: ImpulseMesh, b) -> np.ndarray:
    """``R[j, k] = b_j w_k(x_j) - delta_jk``; singular exactly on B."""
    b = _as_b(mesh, b)
    return b[:, None] * mesh.gram - np.eye(mesh.m)


def resonance_det(mesh: ImpulseMesh, b) -> ResonanceValue:
    b = _as_b(mesh, b)
    det = float(np.linalg.det(resonance_matrix(mesh, b)))
    g_inf = float(np.max(np.sum(np.abs(mesh.gram), axis=1)))
    thr = DET_TOL * (1.0 + float(np.max(np.abs(b))) * g_inf) ** mesh.m
    return ResonanceValue(det, abs(det) <= thr, thr)


@dataclass(frozen=True)
class MorseReport:
    A: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    m0: int
    nondegenerate: bool
    tol: float

    @property
    def critical_groups(self):
        """``C_q(Phi, 0)`` for ``q = 0..m``: the coefficient group at ``q = m0``,
        zero elsewhere; undefined when zero is degenerate (``b`` in B)."""
        if not self.nondegenerate:
            return "undefined: b in B"
        m = self.A.shape[0]
        return [COEFFICIENT_GROUP if q == self.m0 else "0" for q in range(m + 1)]

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "m0": self.m0,
            "nondegenerate": self.nondegenerate,
            "critical_groups": self.critical_groups,
        }


def hessian_at_zero(mesh: ImpulseMesh, b) -> np.ndarray:
    """``A = G - G diag(b) G``, the Hessian of the restricted quadratic on M
    in the basis ``w_1..w_m``."""
    b = _as_b(mesh, b)
    G = mesh.gram
    A = G - (G * b) @ G
    return 0.5 * (A + A.T)


def morse_report(mesh: ImpulseMesh, b) -> MorseReport:
    A = hessian_at_zero(mesh, b)
    vals, vecs = np.linalg.eigh(A)
    tol = EIG_TOL * (1.0 + float(np.max(np.sum(np.abs(A), axis=1))))
    m0 = int(np.sum(vals < -tol))
    nondeg = bool(np.all(np.abs(vals) > tol))
    return MorseReport(A, vals, vecs, m0, nondeg, tol)


# ---------------------------------------------------------------------------
# path scans

@dataclass(frozen=True)
class Crossing:
    t: float
    b: np.ndarray
    m0_before: int
    m0_after: int
    multiplicity: int
    det_sign_change: bool

    def to_dict(self) -> dict:
        return {"t": self.t, "b": self.b.tolist(), "m0_before": self.m0_before,
                "m0_after": self.m0_after, "multiplicity": self.multiplicity,
                "det_sign_change": self.det_sign_change}


@dataclass(frozen=True)
class PathScan:
    t: np.ndarray
    det: np.ndarray
    m0: np.ndarray
    crossings: list
    constant_between_crossings: bool

    def to_dict(self) -> dict:
        return {"t": self.t.tolist(), "det": self.det.tolist(), "m0": self.m0.tolist(),
                "crossings": [c.to_dict() for c in self.crossings],
                "constant_between_crossings": self.constant_between_crossings}


def _state(mesh, b):
    rep = morse_report(mesh, b)
    return np.sign(resonance_det(mesh, b).det_value), rep.m0


def resonance_path_scan(mesh: ImpulseMesh, b_start, b_end, steps: int = 100,
                        width: float = 1e-10) -> PathScan:
    """Sample the segment ``b(t) = b_start + t (b_end - b_start)``, locate every
    change of det sign or Morse index and refine it by bisection in ``t``."""
    b0 = _as_b(mesh, b_start)
    b1 = _as_b(mesh, b_end)
    if steps < 2:
        raise ValueError("steps must be >= 2")
    for name, bb in (("b_start", b0), ("b_end", b1)):
        if resonance_det(mesh, bb).in_B:
            raise ValueError(f"{name} lies in the resonance set")

    def at(t):
        return b0 + t * (b1 - b0)

    ts = np.linspace(0.0, 1.0, steps)
    dets = np.array([resonance_det(mesh, at(t)).det_value for t in ts])
    m0s = np.array([morse_report(mesh, at(t)).m0 for t in ts])
    crossings = []
    for i in range(steps - 1):
        s_lo, s_hi = np.sign(dets[i]), np.sign(dets[i + 1])
        if s_lo == s_hi and m0s[i] == m0s[i + 1] and s_lo != 0:
            continue
        lo, hi = ts[i], ts[i + 1]
        state_lo = (s_lo, m0s[i])
        # width is measured in b, not in the path parameter
        t_width = width / max(1.0, float(np.max(np.abs(b1 - b0))))
        while hi - lo > t_width:
            mid = 0.5 * (lo + hi)
            if _state(mesh, at(mid)) == state_lo:
                lo = mid
            else:
                hi = mid
        tc = 0.5 * (lo + hi)
        if s_lo != s_hi and s_lo != 0 and s_hi != 0:
            # polish det sign changes to the root of the determinant itself
            try:
                tc = brentq(lambda t: resonance_det(mesh, at(t)).det_value, lo, hi,
                            xtol=1e-15, rtol=1e-15)
            except ValueError:
                pass
        bc = at(tc)
        # multiplicity: eigenvalues of A that vanish at the crossing, judged
        # relative to how far the bisection leaves us from the exact root
        A_c = morse_report(mesh, bc)
        dA = hessian_at_zero(mesh, at(hi)) - hessian_at_zero(mesh, at(lo))
        slack = 10.0 * float(np.max(np.abs(dA))) + 1e-12 * (1 + float(np.max(np.abs(A_c.A))))
        mult = int(np.sum(np.abs(A_c.eigenvalues) <= max(slack, 1e-9)))
        crossings.append(Crossing(float(tc), bc, int(m0s[i]), int(m0s[i + 1]),
                                  mult, bool(s_lo != s_hi)))
    # m0 constant between consecutive crossings (each sample interval contains
    # at most the crossings recorded for it)
    constant = True
    crossing_intervals = {int(np.searchsorted(ts, c.t)) - 1 for c in crossings}
    for i in range(steps - 1):
        if m0s[i] != m0s[i + 1] and i not in crossing_intervals:
            constant = False
    return PathScan(ts, dets, m0s, crossings, constant)


# ---------------------------------------------------------------------------
# certificates

def corollary_threshold(mesh: ImpulseMesh, j0: int) -> float:
    """``(x_{j0+1} - x_{j0-1}) / ((x_{j0+1} - x_{j0}) (x_{j0} - x_{j0-1}))``
    for 1-based ``j0``; equals ``|w_0|^2`` for the hat function with
    ``w_0(x_j) = delta_{j j0}``."""
    if not (1 <= j0 <= mesh.m):
        raise MeshError(f"index {j0} out of range 1..{mesh.m}")
    x = mesh.nodes
    return (x[j0 + 1] - x[j0 - 1]) / ((x[j0 + 1] - x[j0]) * (x[j0] - x[j0 - 1]))


@dataclass
class Certificate:
    hypothesis_checks: list
    condition_4_1: bool
    condition_4_1_witness: int | None
    condition_4_2: bool
    condition_4_2_witness: list | None
    condition_4_2_value: float
    condition_4_3: bool
    condition_4_3_witness: int | None
    condition_4_3_threshold: float | None
    thresholds: list
    k_saddle: int
    m0: int
    equally_spaced: dict | None = None
    notes: list = field(default_factory=list)

    @property
    def hypotheses_hold(self) -> bool:
        return all(ok for _, ok in self.hypothesis_checks)

    @property
    def guaranteed(self) -> bool:
        return self.hypotheses_hold and (self.condition_4_1 or self.condition_4_2)

    @property
    def conclusion(self) -> str:
        return "nontrivial solution guaranteed" if self.guaranteed else "not guaranteed"

    def to_dict(self) -> dict:
        return {
            "hypothesis_checks": [{"name": n, "pass": ok} for n, ok in self.hypothesis_checks],
            "condition_4_1": {"holds": self.condition_4_1, "j0": self.condition_4_1_witness},
            "condition_4_2": {"holds": self.condition_4_2, "lambda_max": self.condition_4_2_value,
                              "w0": self.condition_4_2_witness},
            "condition_4_3": {"holds": self.condition_4_3, "j0": self.condition_4_3_witness,
                              "threshold": self.condition_4_3_threshold,
                              "thresholds": self.thresholds},
            "equally_spaced": self.equally_spaced,
            "k_saddle": self.k_saddle,
            "m0": self.m0,
            "conclusion": self.conclusion,
            "notes": list(self.notes),
        }


def _zero_slope_ok(value, tol=1e-12):
    return abs(value) <= tol


def hypothesis_checks(problem, rel_tol: float = DEFAULT_REL_TOL) -> list:
    """Named pass/fail checks for the hypotheses of the existence theorem.

    Growth conditions cannot be decided from samples; they are checked against
    the declared metadata plus a sanity sample on [-50, 50].
    """
    mesh = problem.mesh
    spec = spectral_report(mesh, problem.a, rel_tol)
    checks = [("a_not_in_sigma", spec.nonresonant),
              ("b_not_in_B", not resonance_det(mesh, problem.b).in_B)]

    g = problem.g
    if g.is_zero:
        sub_ok = True
    else:
        sub_ok = all(sample_sublinear(lambda t, s=s: s * g.value(t), g.r) for s in problem.g_scale)
    checks.append(("g_sublinear_declared", sub_ok))

    sup_ok = True
    for l, h in enumerate(problem.h):
        sup_ok &= sample_superlinear(lambda t, l=l: problem.imp(l, t), h.mu, h.c)
    checks.append(("impulses_superlinear_declared", bool(sup_ok)))

    # f(x, t) = o(t) and h_j(t) = o(t) at zero
    f_ok = True
    for j in range(mesh.m + 1):
        f_ok &= _zero_slope_ok(float(problem.f(j, 0.0))) and _zero_slope_ok(
            float(problem.f_t(j, 0.0)), 1e-12 * (1 + abs(problem.a[j])))
    checks.append(("f_is_o_t_at_zero", bool(f_ok)))
    h_ok = all(_zero_slope_ok(float(h.value(0.0))) and _zero_slope_ok(float(h.derivative(0.0)))
               for h in problem.h)
    checks.append(("h_is_o_t_at_zero", bool(h_ok)))
    return checks


def nontriviality_certificate(mesh: ImpulseMesh, problem, rel_tol: float = DEFAULT_REL_TOL) -> Certificate:
    if problem.mesh != mesh:
        raise MeshError("problem is defined on a different mesh")
    checks = hypothesis_checks(problem, rel_tol)
    spec = spectral_report(mesh, problem.a, rel_tol)
    morse = morse_report(mesh, problem.b)

    c41 = [s.index for s in spec.subintervals if s.a > s.eigenvalues[0]]
    lam_max = float(morse.eigenvalues[-1])
    c42 = lam_max >= 0.0
    w0 = morse.eigenvectors[:, -1].tolist() if c42 else None

    thresholds = [corollary_threshold(mesh, j) for j in range(1, mesh.m + 1)]
    c43 = [j for j in range(1, mesh.m + 1) if problem.b[j - 1] <= thresholds[j - 1]]
    j43 = c43[0] if c43 else None

    eq = None
    if mesh.is_equally_spaced:
        m = mesh.m
        eq = {
            "lambda_1": (m + 1) ** 2 * pi**2,
            "b_threshold": 2.0 * (m + 1),
            "max_a_exceeds": bool(np.max(problem.a) > (m + 1) ** 2 * pi**2),
            "min_b_below": bool(np.min(problem.b) <= 2.0 * (m + 1)),
        }

    notes = ["growth conditions are declared metadata, sanity-sampled on [-50, 50]"]
    if not spec.nonresonant:
        notes.append("some a_j is resonant; analysis reported but not certified")
    return Certificate(
        hypothesis_checks=checks,
        condition_4_1=bool(c41),
        condition_4_1_witness=c41[0] if c41 else None,
        condition_4_2=bool(c42),
        condition_4_2_witness=w0,
        condition_4_2_value=lam_max,
        condition_4_3=bool(c43),
        condition_4_3_witness=j43,
        condition_4_3_threshold=thresholds[j43 - 1] if j43 else None,
        thresholds=thresholds,
        k_saddle=spec.k_saddle,
        m0=morse.m0,
        equally_spaced=eq,
        notes=notes,
    )
