"""Problem data for ``-u'' = f(x, u)`` on (0, 1) with impulses at the mesh nodes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import ImpulseMesh, MeshError
from .nonlinearity import NONE, NonlinearityEntry, get_entry


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """``f(x, t) = a_j t + s_j g(t)`` on subinterval ``j`` and
    ``i_j(t) = b_j t + h_j(t)`` at node ``x_j``.

    ``g_scale`` holds the per-subinterval factors ``s_j`` (all ones by default).
    Indices in the evaluation helpers are 0-based.
    """

    mesh: ImpulseMesh
    a: np.ndarray
    b: np.ndarray
    g: NonlinearityEntry = NONE
    h: tuple = ()
    g_scale: np.ndarray = None
    g_params: dict = field(default_factory=dict)

    def __post_init__(self):
        m = self.mesh.m
        a = np.array(self.a, dtype=float).ravel()
        b = np.array(self.b, dtype=float).ravel()
        if a.size != m + 1:
            raise MeshError(f"a has length {a.size}, expected m + 1 = {m + 1}")
        if b.size != m:
            raise MeshError(f"b has length {b.size}, expected m = {m}")
        h = self.h
        if h is None or h == () or isinstance(h, (str, NonlinearityEntry)):
            h = (h if h not in ((), None) else NONE,) * m
        h = tuple(get_entry(e) for e in h)
        if len(h) != m:
            raise MeshError(f"h has {len(h)} entries, expected m = {m}")
        scale = self.g_scale
        scale = np.ones(m + 1) if scale is None else np.array(scale, dtype=float).ravel()
        if scale.size == 1:
            scale = np.full(m + 1, float(scale[0]))
        if scale.size != m + 1:
            raise MeshError(f"g scale has length {scale.size}, expected {m + 1}")
        for arr in (a, b, scale):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", get_entry(self.g))
        object.__setattr__(self, "g_scale", scale)

    @property
    def m(self) -> int:
        return self.mesh.m

    def with_params(self, a=None, b=None) -> "ProblemSpec":
        """Copy with new slopes; a scale tied to ``a`` follows the new ``a``."""
        new_a = self.a if a is None else np.asarray(a, dtype=float)
        scale = self.g_scale
        if self.g_params.get("scale") == "a":
            scale = new_a
        return ProblemSpec(self.mesh, new_a, self.b if b is None else b, self.g, self.h,
                           scale, dict(self.g_params))

    # right-hand side on subinterval j
    def f(self, j, t):
        return self.a[j] * t + self.g_scale[j] * self.g.value(t)

    def f_t(self, j, t):
        return self.a[j] + self.g_scale[j] * self.g.derivative(t)

    def F(self, j, t):
        return 0.5 * self.a[j] * t * t + self.g_scale[j] * self.g.primitive(t)

    def f_at(self, x, t):
        """``f`` at arbitrary points ``x`` (nodes belong to the left subinterval)."""
        j = self.mesh.subinterval_of(x)
        t = np.asarray(t, dtype=float)
        return self.a[j] * t + self.g_scale[j] * self.g.value(t)

    # impulse at node l
    def imp(self, l, t):
        return self.b[l] * t + self.h[l].value(t)

    def imp_t(self, l, t):
        return self.b[l] + self.h[l].derivative(t)

    def I(self, l, t):  # noqa: E743
        return 0.5 * self.b[l] * t * t + self.h[l].primitive(t)

    def impulses(self, node_values):
        v = np.asarray(node_values, dtype=float)
        return np.array([self.imp(l, v[l]) for l in range(self.m)])

    def impulse_slopes(self, node_values):
        v = np.asarray(node_values, dtype=float)
        return np.array([self.imp_t(l, v[l]) for l in range(self.m)])

    def impulse_primitives(self, node_values):
        v = np.asarray(node_values, dtype=float)
        return np.array([self.I(l, v[l]) for l in range(self.m)])

    @property
    def is_linear(self) -> bool:
        return self.g.is_zero and all(e.is_zero for e in self.h)

    def describe(self) -> dict:
        return {
            "mesh": self.mesh.interior_points.tolist(),
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "g": self.g.name,
            "g_scale": self.g_scale.tolist(),
            "h": [e.name for e in self.h],
        }


def make_problem(points_or_mesh, a, b, g=None, h=None, g_scale=None) -> ProblemSpec:
    """Convenience constructor.

    ``g_scale="a"`` ties the scale of ``g`` to the slopes ``a_j``, which gives
    right-hand sides of the form ``a_j * phi(u)``.
    """
    from .mesh import build_mesh

    mesh = points_or_mesh if isinstance(points_or_mesh, ImpulseMesh) else build_mesh(points_or_mesh)
    params = {}
    if isinstance(g_scale, str):
        if g_scale != "a":
            raise ValueError(f"unknown g scale {g_scale!r}")
        params["scale"] = "a"
        g_scale = np.asarray(a, dtype=float)
    elif g_scale is not None:
        params["scale"] = np.atleast_1d(np.asarray(g_scale, dtype=float)).tolist()
    return ProblemSpec(mesh, a, b, get_entry(g), h if h is not None else (), g_scale, params)


def benchmark_problem(points, a, b) -> ProblemSpec:
    """``-u'' = a_j (u^3 + u^2)/(u^2 + 1)`` with impulses ``u^3 + u^2 + b_j u``."""
    mesh_pts = points
    m = len(np.atleast_1d(mesh_pts)) if not isinstance(points, ImpulseMesh) else points.m
    return make_problem(points, a, b, g="rational_cubic", h=["cubic_plus_square"] * m, g_scale="a")
