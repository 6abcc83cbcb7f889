"""Scalar nonlinearities with closed-form primitives and declared growth metadata.

``g`` entries perturb the piecewise-linear right-hand side ``f(x, t) = a_j t + g``;
``h`` entries perturb the linear impulses ``i_j(t) = b_j t + h_j(t)``.
"""

from __future__ import annotations

import math

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class NonlinearityEntry:
    """A scalar function with derivative and primitive (all vectorized).

    Growth metadata:

    * ``r``: sublinear exponent, ``|g(t)| <= C (|t|^(r-1) + 1)`` with ``r`` in (1, 2).
    * ``mu``, ``c``: superlinearity, ``t i(t) >= c |t|^mu - C`` with ``mu > 2``.
    * ``slope_at_zero``: declared ``value'(0)``.

    Any of them may be ``None`` when the entry makes no such claim.
    """

    name: str
    value: Callable
    derivative: Callable
    primitive: Callable
    kind: str = "any"  # "g", "h" or "any"
    r: Optional[float] = None
    mu: Optional[float] = None
    c: Optional[float] = None
    slope_at_zero: Optional[float] = None
    description: str = ""
    scalar: Optional[Callable] = None  # fast float -> float version of ``value``

    def scalar_value(self) -> Callable:
        if self.scalar is not None:
            return self.scalar
        value = self.value
        return lambda t: float(value(t))

    @property
    def is_zero(self) -> bool:
        return self.name == "none"


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))


def _rc_value(t):
    t = np.asarray(t, dtype=float)
    # (t^3 + t^2)/(t^2 + 1) - t, simplified to avoid cancellation
    return (t * t - t) / (t * t + 1.0)


def _rc_derivative(t):
    t = np.asarray(t, dtype=float)
    q = t * t + 1.0
    return (t * t + 2.0 * t - 1.0) / (q * q)


def _rc_primitive(t):
    t = np.asarray(t, dtype=float)
    return t - 0.5 * np.log1p(t * t) - np.arctan(t)


def _atan_primitive(t):
    t = np.asarray(t, dtype=float)
    return t * np.arctan(t) - 0.5 * np.log1p(t * t)


def _atan_derivative(t):
    t = np.asarray(t, dtype=float)
    return 1.0 / (1.0 + t * t)


def _cubic(t):
    t = np.asarray(t, dtype=float)
    return t**3


def _cubic_d(t):
    t = np.asarray(t, dtype=float)
    return 3.0 * t**2


def _cubic_p(t):
    t = np.asarray(t, dtype=float)
    return 0.25 * t**4


def _cps(t):
    t = np.asarray(t, dtype=float)
    return t**3 + t**2


def _cps_d(t):
    t = np.asarray(t, dtype=float)
    return 3.0 * t**2 + 2.0 * t


def _cps_p(t):
    t = np.asarray(t, dtype=float)
    return 0.25 * t**4 + t**3 / 3.0


def _arctan(t):
    return np.arctan(np.asarray(t, dtype=float))


NONE = NonlinearityEntry("none", _zero, _zero, _zero, kind="any", slope_at_zero=0.0,
                         description="identically zero", scalar=lambda t: 0.0)

CATALOG: dict[str, NonlinearityEntry] = {
    "none": NONE,
    "rational_cubic": NonlinearityEntry(
        "rational_cubic", _rc_value, _rc_derivative, _rc_primitive, kind="g",
        r=1.5, slope_at_zero=-1.0,
        description="(t^3 + t^2)/(t^2 + 1) - t; bounded, so any r in (1,2) works",
        scalar=lambda t: (t * t - t) / (t * t + 1.0),
    ),
    "bounded_atan": NonlinearityEntry(
        "bounded_atan", _arctan, _atan_derivative, _atan_primitive, kind="g",
        r=1.5, slope_at_zero=1.0, description="arctan(t)", scalar=math.atan,
    ),
    "cubic": NonlinearityEntry(
        "cubic", _cubic, _cubic_d, _cubic_p, kind="h",
        mu=4.0, c=0.5, slope_at_zero=0.0, description="t^3", scalar=lambda t: t * t * t,
    ),
    "cubic_plus_square": NonlinearityEntry(
        "cubic_plus_square", _cps, _cps_d, _cps_p, kind="h",
        mu=4.0, c=0.5, slope_at_zero=0.0, description="t^3 + t^2",
        scalar=lambda t: t * t * (t + 1.0),
    ),
}


def get_entry(name_or_entry) -> NonlinearityEntry:
    if isinstance(name_or_entry, NonlinearityEntry):
        return name_or_entry
    if name_or_entry is None:
        return NONE
    try:
        return CATALOG[name_or_entry]
    except KeyError:
        raise KeyError(f"unknown nonlinearity {name_or_entry!r}; "
                       f"known: {', '.join(sorted(CATALOG))}") from None


def user_entry(name, value, derivative, primitive, **metadata) -> NonlinearityEntry:
    """Wrap user-supplied scalar callables as a catalog entry."""
    return NonlinearityEntry(name, value, derivative, primitive, **metadata)


def fd_consistency(entry: NonlinearityEntry, samples=None, step: float = 1e-5) -> dict:
    """Compare ``derivative`` with central differences of ``value``, and
    ``value`` with central differences of ``primitive``.

    Returns the worst relative errors (relative to ``1 + |reference|``).
    """
    if samples is None:
        samples = np.linspace(-3.0, 3.0, 61)
    t = np.asarray(samples, dtype=float)
    fd_d = (entry.value(t + step) - entry.value(t - step)) / (2 * step)
    fd_v = (entry.primitive(t + step) - entry.primitive(t - step)) / (2 * step)
    d = entry.derivative(t)
    v = entry.value(t)
    return {
        "derivative": float(np.max(np.abs(fd_d - d) / (1.0 + np.abs(d)))),
        "value": float(np.max(np.abs(fd_v - v) / (1.0 + np.abs(v)))),
    }


GROWTH_SAMPLES = np.linspace(-50.0, 50.0, 10_000)


def sample_sublinear(func, r: Optional[float]) -> bool:
    """Sanity-sample ``|g(t)| <= C (|t|^(r-1) + 1)`` on [-50, 50].

    The best constant on the sample must be attained on the inner half of the
    range; a ratio still growing at the edges flags a misdeclared ``r``.
    """
    if r is None or not (1.0 < r < 2.0):
        return False
    t = GROWTH_SAMPLES
    ratio = np.abs(func(t)) / (np.abs(t) ** (r - 1.0) + 1.0)
    inner = np.abs(t) <= 25.0
    return bool(np.max(ratio[~inner]) <= np.max(ratio[inner]) * (1 + 1e-9) + 1e-300)


def sample_superlinear(func, mu: Optional[float], c: Optional[float]) -> bool:
    """Sanity-sample ``t i(t) >= c |t|^mu - C`` on [-50, 50] (same edge test)."""
    if mu is None or c is None or not (mu > 2.0 and c > 0.0):
        return False
    t = GROWTH_SAMPLES
    deficit = c * np.abs(t) ** mu - t * func(t)
    inner = np.abs(t) <= 25.0
    return bool(np.max(deficit[~inner]) <= max(np.max(deficit[inner]), 0.0) + 1e-9)
