"""Impulse mesh, Riesz representers of point evaluation, and their Gram matrix."""

from __future__ import annotations

from functools import cached_property

import numpy as np

MIN_SEPARATION = 1e-10


class MeshError(ValueError):
    """Invalid impulse mesh or index."""


class ImpulseMesh:
    """Partition ``0 = x_0 < x_1 < ... < x_m < x_{m+1} = 1`` of the unit interval.

    Only the interior points are stored; the endpoints are implicit.  Instances
    are immutable and cache the Gram matrix of the representers on first use.
    """

    __slots__ = ("_points", "_lengths", "__dict__")

    def __init__(self, interior_points):
        pts = np.array(interior_points, dtype=float).ravel()
        pts.setflags(write=False)
        nodes = np.concatenate(([0.0], pts, [1.0]))
        lengths = np.diff(nodes)
        lengths.setflags(write=False)
        self._points = pts
        self._lengths = lengths

    @property
    def interior_points(self) -> np.ndarray:
        return self._points

    @property
    def subinterval_lengths(self) -> np.ndarray:
        return self._lengths

    @property
    def m(self) -> int:
        return self._points.size

    @cached_property
    def nodes(self) -> np.ndarray:
        """All nodes ``x_0, ..., x_{m+1}``."""
        nodes = np.concatenate(([0.0], self._points, [1.0]))
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def gram(self) -> np.ndarray:
        """Gram matrix ``G[j, k] = <w_j, w_k> = w_j(x_k)`` (0-based indices)."""
        x = self._points
        lo = np.minimum.outer(x, x)
        hi = np.maximum.outer(x, x)
        g = lo * (1.0 - hi)
        g = np.triu(g) + np.triu(g, 1).T
        g.setflags(write=False)
        return g

    @cached_property
    def is_equally_spaced(self) -> bool:
        m = self.m
        return bool(np.allclose(self._points, np.arange(1, m + 1) / (m + 1), rtol=0, atol=1e-14))

    def subinterval_of(self, x):
        """0-based index of the subinterval containing ``x``.

        Nodes are assigned to the subinterval on their left, except ``x = 0``.
        """
        idx = np.searchsorted(self._points, x, side="left")
        return idx

    def __eq__(self, other):
        if not isinstance(other, ImpulseMesh):
            return NotImplemented
        return np.array_equal(self._points, other._points)

    def __hash__(self):
        return hash(self._points.tobytes())

    def __repr__(self):
        return f"ImpulseMesh({self._points.tolist()!r})"


def build_mesh(points) -> ImpulseMesh:
    """Validate interior points and return an :class:`ImpulseMesh`.

    Raises :class:`MeshError` for an empty list, points outside ``(0, 1)``,
    duplicates, or points out of increasing order; the message names the
    offending (1-based) index.
    """
    pts = [float(p) for p in np.atleast_1d(np.asarray(points, dtype=float))]
    if len(pts) == 0:
        raise MeshError("mesh needs at least one interior point")
    for i, p in enumerate(pts, start=1):
        if not np.isfinite(p) or not (0.0 < p < 1.0):
            raise MeshError(f"point {i} = {p!r} is not strictly inside (0, 1)")
    for i in range(1, len(pts)):
        prev, cur = pts[i - 1], pts[i]
        if cur == prev or abs(cur - prev) < MIN_SEPARATION:
            raise MeshError(f"point {i + 1} = {cur!r} duplicates point {i}")
        if cur < prev:
            raise MeshError(f"point {i + 1} = {cur!r} is smaller than point {i} = {prev!r}")
    if pts[0] < MIN_SEPARATION:
        raise MeshError(f"point 1 = {pts[0]!r} is too close to 0")
    if 1.0 - pts[-1] < MIN_SEPARATION:
        raise MeshError(f"point {len(pts)} = {pts[-1]!r} is too close to 1")
    return ImpulseMesh(pts)


def _check_index(mesh: ImpulseMesh, j: int) -> None:
    if not (1 <= j <= mesh.m):
        raise MeshError(f"representer index {j} out of range 1..{mesh.m}")


def representer_eval(mesh: ImpulseMesh, j: int, x):
    """Evaluate ``w_j`` (1-based ``j``) at ``x``; ``<u, w_j> = u(x_j)`` in H^1_0."""
    _check_index(mesh, j)
    xj = mesh.interior_points[j - 1]
    x = np.asarray(x, dtype=float)
    val = np.where(x < xj, (1.0 - xj) * x, xj * (1.0 - x))
    return float(val) if val.ndim == 0 else val


def representer_slope(mesh: ImpulseMesh, j: int, x, side: str = "right"):
    """Derivative of ``w_j`` at ``x``; at ``x_j`` the one-sided value given by ``side``."""
    _check_index(mesh, j)
    xj = mesh.interior_points[j - 1]
    x = np.asarray(x, dtype=float)
    left = x < xj if side == "right" else x <= xj
    val = np.where(left, 1.0 - xj, -xj)
    return float(val) if val.ndim == 0 else val


def gram_matrix(mesh: ImpulseMesh) -> np.ndarray:
    return mesh.gram


def m_subspace_norms(mesh: ImpulseMesh, c) -> tuple[float, float]:
    """H-norm and nodal max-norm of ``w = sum_j c_j w_j``.

    On ``M`` the nodal max equals the sup norm, since each element is affine
    between nodes and vanishes at 0 and 1.
    """
    c = np.asarray(c, dtype=float).ravel()
    if c.size != mesh.m:
        raise MeshError(f"coefficient vector has length {c.size}, expected {mesh.m}")
    g = mesh.gram
    node_vals = g @ c
    h2 = float(c @ node_vals)
    return float(np.sqrt(max(h2, 0.0))), float(np.max(np.abs(node_vals))) if c.size else 0.0


def m_element_eval(mesh: ImpulseMesh, c, x):
    """Evaluate ``sum_j c_j w_j`` at ``x`` by piecewise-linear interpolation of node values."""
    c = np.asarray(c, dtype=float).ravel()
    node_vals = np.concatenate(([0.0], mesh.gram @ c, [0.0]))
    return np.interp(x, mesh.nodes, node_vals)
