"""Dirichlet spectra of the subintervals and the nonresonance bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np

from .mesh import ImpulseMesh, MeshError

DEFAULT_REL_TOL = 1e-9


def subinterval_eigenvalue(mesh: ImpulseMesh, j: int, k: int) -> float:
    """``k^2 pi^2 / l_j^2`` for the 1-based subinterval ``j`` of length ``l_j``."""
    if not (1 <= j <= mesh.m + 1):
        raise MeshError(f"subinterval index {j} out of range 1..{mesh.m + 1}")
    if k < 1:
        raise ValueError(f"eigenvalue index must be >= 1, got {k}")
    ell = mesh.subinterval_lengths[j - 1]
    return (k * pi / ell) ** 2


@dataclass(frozen=True)
class SubintervalSpectrum:
    index: int
    length: float
    a: float
    eigenvalues: tuple[float, ...]
    nonresonant: bool
    margin: float
    d: int
    cls: str  # "J0" or "J1"
    coercivity: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "length": self.length,
            "a": self.a,
            "eigenvalues": list(self.eigenvalues),
            "nonresonant": self.nonresonant,
            "margin": self.margin,
            "d": self.d,
            "class": self.cls,
            "coercivity": dict(self.coercivity),
        }


@dataclass(frozen=True)
class SpectralReport:
    subintervals: tuple[SubintervalSpectrum, ...]
    k_saddle: int
    rel_tol: float

    @property
    def nonresonant(self) -> bool:
        return all(s.nonresonant for s in self.subintervals)

    @property
    def d(self) -> list[int]:
        return [s.d for s in self.subintervals]

    @property
    def J0(self) -> list[int]:
        return [s.index for s in self.subintervals if s.cls == "J0"]

    @property
    def J1(self) -> list[int]:
        return [s.index for s in self.subintervals if s.cls == "J1"]

    def to_dict(self) -> dict:
        return {
            "subintervals": [s.to_dict() for s in self.subintervals],
            "k_saddle": self.k_saddle,
            "nonresonant": self.nonresonant,
            "J0": self.J0,
            "J1": self.J1,
            "rel_tol": self.rel_tol,
        }


def _coercivity_constants(a: float, lam: list[float], d: int) -> dict:
    # c_j on J0, (c_j^+, c_j^-) on J1; all positive in the nonresonant case
    if d == 0:
        return {"c": 1.0 - max(a, 0.0) / lam[0]}
    return {"c_plus": 1.0 - a / lam[d], "c_minus": a / lam[d - 1] - 1.0}


def spectral_report(mesh: ImpulseMesh, a, rel_tol: float = DEFAULT_REL_TOL) -> SpectralReport:
    """Classify each slope ``a_j`` against the Dirichlet spectrum of its subinterval."""
    a = np.asarray(a, dtype=float).ravel()
    if a.size != mesh.m + 1:
        raise MeshError(f"a has length {a.size}, expected m + 1 = {mesh.m + 1}")
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")

    parts = []
    for j in range(1, mesh.m + 2):
        aj = float(a[j - 1])
        ell = float(mesh.subinterval_lengths[j - 1])
        lam1 = (pi / ell) ** 2
        # enough eigenvalues to pass a_j, plus one more
        kmax = max(1, int(np.floor(np.sqrt(max(aj, 0.0) / lam1)))) + 2
        lam = [subinterval_eigenvalue(mesh, j, k) for k in range(1, kmax + 1)]
        while lam[-2] <= aj:
            lam.append(subinterval_eigenvalue(mesh, j, len(lam) + 1))
        d = sum(1 for v in lam if v < aj)
        dist = [abs(aj - v) for v in lam]
        nearest = int(np.argmin(dist))
        margin = dist[nearest]
        nonres = margin > rel_tol * lam[nearest]
        parts.append(
            SubintervalSpectrum(
                index=j,
                length=ell,
                a=aj,
                eigenvalues=tuple(lam),
                nonresonant=bool(nonres),
                margin=float(margin),
                d=d,
                cls="J0" if d == 0 else "J1",
                coercivity=_coercivity_constants(aj, lam, d) if nonres else {},
            )
        )
    k_saddle = sum(p.d for p in parts if p.cls == "J1") + mesh.m
    return SpectralReport(tuple(parts), k_saddle, rel_tol)


def fd_dirichlet_ground_state(length: float, h: float) -> float:
    """Smallest eigenvalue of the 3-point Dirichlet Laplacian on ``(0, length)``.

    Independent check of the closed form; uses the tridiagonal eigensolver.
    """
    from scipy.linalg import eigh_tridiagonal

    n = int(round(length / h)) - 1
    if n < 1:
        raise ValueError("step too large for the subinterval")
    step = length / (n + 1)
    diag = np.full(n, 2.0 / step**2)
    off = np.full(n - 1, -1.0 / step**2)
    vals = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, 0))
    return float(vals[0])
