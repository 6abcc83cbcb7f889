"""Galerkin truncation of H^1_0(0, 1) adapted to the splitting ``H = N + M``.

The N-part uses H-normalized Dirichlet sine modes on every subinterval, which
vanish at all nodes and never feel the impulses; the M-part uses the
representers ``w_j``.  Coefficients are ordered as ``[sine blocks (j-major), M]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import pi

import numpy as np

from .mesh import ImpulseMesh
from .problem import ProblemSpec

ORTHO_TOL = 1e-10


class BasisError(ValueError):
    pass


def default_quad_order(n: int) -> int:
    # sine products reach frequency 2n and cubic nonlinearities 4n; 2n + 4 is
    # not enough to resolve them to 1e-10
    return 6 * n + 20


class GalerkinBasis:
    """Sine modes per subinterval plus the ``m`` representers."""

    def __init__(self, mesh: ImpulseMesh, n: int, quad_order: int):
        self.mesh = mesh
        self.n = int(n)
        self.quad_order = int(quad_order)
        m = mesh.m
        self.m = m
        self.n_sine = (m + 1) * self.n
        self.dim = self.n_sine + m

        t, wt = np.polynomial.legendre.leggauss(self.quad_order)
        nodes = mesh.nodes
        self.k = np.arange(1, self.n + 1, dtype=float)
        # per subinterval: quad points, weights, sine values/derivs (n x Q), M values/derivs (m x Q)
        self.quad_x, self.quad_w = [], []
        self.sine_vals, self.sine_ders = [], []
        self.m_vals, self.m_ders = [], []
        xm = mesh.interior_points
        for j in range(m + 1):
            lo, hi = nodes[j], nodes[j + 1]
            ell = hi - lo
            x = lo + 0.5 * ell * (t + 1.0)
            self.quad_x.append(x)
            self.quad_w.append(0.5 * ell * wt)
            s, ds = self._sine(j, x)
            self.sine_vals.append(s)
            self.sine_ders.append(ds)
            mv = np.where(x[None, :] < xm[:, None], (1.0 - xm[:, None]) * x[None, :],
                          xm[:, None] * (1.0 - x[None, :]))
            md = np.where(x[None, :] < xm[:, None], (1.0 - xm[:, None]), -xm[:, None])
            self.m_vals.append(mv)
            self.m_ders.append(md)

    def _sine(self, j, x):
        lo = self.mesh.nodes[j]
        ell = self.mesh.subinterval_lengths[j]
        kp = self.k[:, None] * pi / ell
        norm = np.sqrt(2.0 * ell) / (self.k[:, None] * pi)
        arg = kp * (np.asarray(x, dtype=float)[None, :] - lo)
        return norm * np.sin(arg), norm * kp * np.cos(arg)

    def sine_slice(self, j) -> slice:
        return slice(j * self.n, (j + 1) * self.n)

    @property
    def m_slice(self) -> slice:
        return slice(self.n_sine, self.dim)

    @cached_property
    def gram(self) -> np.ndarray:
        """H-Gram matrix of the basis: identity on sines, ``G`` on M."""
        g = np.eye(self.dim)
        g[self.m_slice, self.m_slice] = self.mesh.gram
        return g

    @cached_property
    def quad_gram(self) -> np.ndarray:
        """H-Gram matrix computed by quadrature of ``int e' e''``."""
        out = np.zeros((self.dim, self.dim))
        for j in range(self.m + 1):
            rows = self.block_rows(j)
            d = np.vstack([self.sine_ders[j], self.m_ders[j]])
            out[np.ix_(rows, rows)] += (d * self.quad_w[j]) @ d.T
        return out

    def block_rows(self, j) -> np.ndarray:
        """Basis indices supported on subinterval ``j`` (its sines and all of M)."""
        return np.concatenate([np.arange(j * self.n, (j + 1) * self.n),
                               np.arange(self.n_sine, self.dim)])

    def orthogonality_defect(self) -> float:
        """Largest off-diagonal H-product among N-functions and between N and M."""
        q = self.quad_gram
        d = q[: self.n_sine, : self.dim].copy()
        d[np.arange(self.n_sine), np.arange(self.n_sine)] -= 1.0
        return float(np.max(np.abs(d)))

    def zeros(self) -> "CoefficientVector":
        return CoefficientVector(self, np.zeros(self.dim))

    def coeffs(self, values) -> "CoefficientVector":
        return CoefficientVector(self, values)

    def from_parts(self, sine=None, m_part=None) -> "CoefficientVector":
        v = np.zeros(self.dim)
        if sine is not None:
            v[: self.n_sine] = np.asarray(sine, dtype=float).ravel()
        if m_part is not None:
            v[self.m_slice] = np.asarray(m_part, dtype=float).ravel()
        return CoefficientVector(self, v)

    def prolong(self, coeffs: "CoefficientVector") -> "CoefficientVector":
        """Embed coefficients from a basis on the same mesh with fewer or more modes
        (extra modes are zero, missing modes are dropped)."""
        other = coeffs.basis
        sine = np.zeros((self.m + 1, self.n))
        k = min(self.n, other.n)
        sine[:, :k] = coeffs.sine[:, :k]
        return self.from_parts(sine, coeffs.m_part)

    def direction_classes(self, spectral) -> np.ndarray:
        """Boolean mask of basis directions belonging to the anti-coercive part:
        all of M and, on subintervals in J1, the sine modes ``k <= d_j``."""
        mask = np.zeros(self.dim, dtype=bool)
        mask[self.m_slice] = True
        for s in spectral.subintervals:
            if s.cls == "J1":
                j = s.index - 1
                mask[j * self.n: j * self.n + min(s.d, self.n)] = True
        return mask

    def __repr__(self):
        return f"GalerkinBasis(m={self.m}, n={self.n}, quad_order={self.quad_order})"


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    basis: GalerkinBasis
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size != self.basis.dim:
            raise BasisError(f"coefficient vector has length {v.size}, basis dimension {self.basis.dim}")
        object.__setattr__(self, "values", v)

    @property
    def sine(self) -> np.ndarray:
        return self.values[: self.basis.n_sine].reshape(self.basis.m + 1, self.basis.n)

    @property
    def m_part(self) -> np.ndarray:
        return self.values[self.basis.m_slice]

    def node_values(self) -> np.ndarray:
        """``u(x_j)``; only the M-part contributes."""
        return self.basis.mesh.gram @ self.m_part

    def h_norm(self) -> float:
        c = self.values
        return float(np.sqrt(c @ (self.basis.gram @ c)))


def build_basis(mesh: ImpulseMesh, n: int, quad_order: int | None = None) -> GalerkinBasis:
    """Build and verify a Galerkin basis with ``n`` sine modes per subinterval."""
    if n < 1:
        raise BasisError("need at least one mode per subinterval")
    if quad_order is None:
        quad_order = default_quad_order(n)
    if quad_order < 2 * n + 4:
        raise BasisError(f"quad_order {quad_order} below 2n + 4 = {2 * n + 4}")
    basis = GalerkinBasis(mesh, n, quad_order)
    defect = basis.orthogonality_defect()
    if defect > ORTHO_TOL:
        raise BasisError(f"quadrature order {quad_order} too small for n = {n}: "
                         f"orthogonality defect {defect:.3e} > {ORTHO_TOL:g}")
    return basis


def _as_values(basis, coeffs) -> np.ndarray:
    if isinstance(coeffs, CoefficientVector):
        if coeffs.basis is not basis and coeffs.basis.dim != basis.dim:
            raise BasisError("coefficient vector belongs to a different basis")
        return coeffs.values
    v = np.asarray(coeffs, dtype=float).ravel()
    if v.size != basis.dim:
        raise BasisError(f"coefficient vector has length {v.size}, basis dimension {basis.dim}")
    return v


def eval_u(basis: GalerkinBasis, coeffs, x, derivative: bool = False):
    """Evaluate ``u`` (or ``u'``) at ``x``.  At a node the derivative is the
    right-sided one (left-sided at ``x = 1``)."""
    c = _as_values(basis, coeffs)
    mesh = basis.mesh
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((x_arr < 0) | (x_arr > 1)):
        raise ValueError("x must lie in [0, 1]")
    cm = c[basis.m_slice]
    xm = mesh.interior_points
    if derivative:
        out = cm @ np.where(x_arr[None, :] < xm[:, None], 1.0 - xm[:, None], -xm[:, None])
        j = np.searchsorted(xm, x_arr, side="right")
        j = np.minimum(j, mesh.m)
    else:
        out = cm @ np.where(x_arr[None, :] < xm[:, None], (1.0 - xm[:, None]) * x_arr[None, :],
                            xm[:, None] * (1.0 - x_arr[None, :]))
        j = np.searchsorted(xm, x_arr, side="left")
    sine = c[: basis.n_sine].reshape(mesh.m + 1, basis.n)
    for jj in np.unique(j):
        sel = j == jj
        s, ds = basis._sine(jj, x_arr[sel])
        out[sel] += sine[jj] @ (ds if derivative else s)
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def _quad_u(basis, c):
    """u at the quadrature points of every subinterval."""
    cm = c[basis.m_slice]
    out = []
    for j in range(basis.m + 1):
        cs = c[basis.sine_slice(j)]
        out.append(cs @ basis.sine_vals[j] + cm @ basis.m_vals[j])
    return out


def energy(problem: ProblemSpec, basis: GalerkinBasis, coeffs) -> float:
    """``1/2 |u|^2 - int F(x, u) - sum_j I_j(u(x_j))``."""
    c = _as_values(basis, coeffs)
    quad = 0.5 * float(c @ (basis.gram @ c))
    uq = _quad_u(basis, c)
    integral = sum(float(basis.quad_w[j] @ problem.F(j, uq[j])) for j in range(basis.m + 1))
    nodes = basis.mesh.gram @ c[basis.m_slice]
    return quad - integral - float(np.sum(problem.impulse_primitives(nodes)))


def gradient(problem: ProblemSpec, basis: GalerkinBasis, coeffs) -> np.ndarray:
    """Partial derivatives ``dPhi/dc_e = Phi'(u) e`` for every basis function ``e``."""
    c = _as_values(basis, coeffs)
    g = basis.gram @ c
    uq = _quad_u(basis, c)
    ms = basis.m_slice
    for j in range(basis.m + 1):
        fw = basis.quad_w[j] * problem.f(j, uq[j])
        g[basis.sine_slice(j)] -= basis.sine_vals[j] @ fw
        g[ms] -= basis.m_vals[j] @ fw
    G = basis.mesh.gram
    nodes = G @ c[ms]
    g[ms] -= G @ problem.impulses(nodes)
    return g


def hessian(problem: ProblemSpec, basis: GalerkinBasis, coeffs) -> np.ndarray:
    """Second derivatives; symmetric by construction."""
    c = _as_values(basis, coeffs)
    H = basis.gram.copy()
    uq = _quad_u(basis, c)
    for j in range(basis.m + 1):
        rows = basis.block_rows(j)
        v = np.vstack([basis.sine_vals[j], basis.m_vals[j]])
        ftw = basis.quad_w[j] * problem.f_t(j, uq[j])
        H[np.ix_(rows, rows)] -= (v * ftw) @ v.T
    G = basis.mesh.gram
    ms = basis.m_slice
    nodes = G @ c[ms]
    H[ms, ms] -= (G * problem.impulse_slopes(nodes)) @ G
    return 0.5 * (H + H.T)


def segment_eval(basis: GalerkinBasis, coeffs, j: int, x):
    """``u`` and ``u'`` at points of the closed subinterval ``j`` (0-based), with
    one-sided derivatives at its endpoints taken from inside the subinterval."""
    c = _as_values(basis, coeffs)
    x = np.asarray(x, dtype=float)
    xm = basis.mesh.interior_points
    cm = c[basis.m_slice]
    left_of = np.arange(basis.m) >= j  # subinterval j lies left of x_l for l >= j (0-based)
    slope = np.where(left_of, 1.0 - xm, -xm)
    intercept = np.where(left_of, 0.0, xm)
    u = (cm * intercept).sum() + (cm * slope).sum() * x
    du = np.full_like(x, (cm * slope).sum())
    s, ds = basis._sine(j, x)
    cs = c[basis.sine_slice(j)]
    return u + cs @ s, du + cs @ ds
