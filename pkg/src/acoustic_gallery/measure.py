"""Weighted energy norms, weighted L^2 norms and mixed space-time norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .grids import power_weights
from .spectral import DivergenceError
from .synthesis import Field

# A "component list" is a sequence of (weight, Field) pairs whose pointwise
# magnitude is sqrt(sum weight |F|^2); a bare Field is its own magnitude.
FieldLike = Union[Field, Sequence]


def _components(f: FieldLike) -> list:
    if isinstance(f, Field):
        return [(1.0, f)]
    out = []
    for item in f:
        if isinstance(item, Field):
            out.append((1.0, item))
        else:
            w, g = item
            out.append((float(w), g))
    if not out:
        raise ValueError("empty component list")
    return out


def _reference(f: FieldLike) -> Field:
    return _components(f)[0][1]


def slice_l2_squared(f: FieldLike) -> np.ndarray:
    """int |f(x_d, x')|^2 dx' per normal slice (Plancherel on the lattice)."""
    return sum(w * g.slice_l2_squared() for w, g in _components(f))


def magnitude(f: FieldLike) -> np.ndarray:
    """Pointwise magnitude samples, shape (n_xd, N, ..., N)."""
    parts = _components(f)
    acc = None
    for w, g in parts:
        v = np.abs(g.values()) ** 2 * w
        acc = v if acc is None else acc + v
    return np.sqrt(acc)


def _tail_check(xd, integrand, decay_tol):
    if decay_tol is None:
        return
    peak = np.max(np.abs(integrand))
    if peak > 0 and abs(integrand[-1]) > decay_tol * peak:
        raise DivergenceError(
            f"integrand at x_d = {xd[-1]:.3g} is {abs(integrand[-1]) / peak:.3g} of its peak "
            f"(tolerance {decay_tol:g})")


def _normal_integral(xd, values, p, decay_tol=None):
    """int x_d^p values(x_d) dx_d with the power weight integrated exactly."""
    xd = np.asarray(xd, dtype=float)
    if p <= -1.0 and xd[0] == 0.0:
        if abs(values[0]) > 0:
            raise DivergenceError(f"x_d^{p:g} is not integrable against a nonzero boundary value")
        xd, values = xd[1:], values[1:]
    with np.errstate(divide="ignore"):
        _tail_check(xd, values * np.where(xd > 0, xd, 1.0) ** p, decay_tol)
    return float(power_weights(xd, p) @ values)


def h_norm(s_field: Field | None, w_field: FieldLike | None, kappa: float,
           decay_tol: float | None = None) -> float:
    """(int x_d^{(1-kappa)/kappa} (s^2 + kappa x_d w^2) dx)^{1/2}.

    ``w_field`` is either a single field giving the gradient magnitude or a
    list of gradient components.  Either argument may be None (zero).
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    ref = s_field if s_field is not None else (None if w_field is None else _reference(w_field))
    if ref is None:
        return 0.0
    p = 1.0 / kappa - 1.0
    total = 0.0
    if s_field is not None:
        total += _normal_integral(ref.xd, slice_l2_squared(s_field), p, decay_tol)
    if w_field is not None:
        total += kappa * _normal_integral(ref.xd, slice_l2_squared(w_field), p + 1.0, decay_tol)
    return math.sqrt(max(total, 0.0))


def weighted_l2(f: FieldLike, alpha: float, decay_tol: float | None = None) -> float:
    """(int x_d^{2 alpha} |f|^2 dx)^{1/2}; a component list gives the norm of the vector."""
    ref = _reference(f)
    return math.sqrt(max(_normal_integral(ref.xd, slice_l2_squared(f), 2.0 * alpha,
                                          decay_tol), 0.0))


def lr_norm(f: FieldLike, r: float) -> float:
    """Spatial L^r norm of one slice; r = inf is the grid maximum (a lower bound)."""
    if r < 1:
        raise ValueError("r must be at least 1")
    ref = _reference(f)
    if math.isinf(r):
        return float(np.max(magnitude(f)))
    if r == 2.0:
        return math.sqrt(max(_normal_integral(ref.xd, slice_l2_squared(f), 0.0), 0.0))
    mag = magnitude(f)
    per_slice = np.sum((mag ** r).reshape(mag.shape[0], -1), axis=1) * ref.grid.cell_volume
    return max(_normal_integral(ref.xd, per_slice, 0.0), 0.0) ** (1.0 / r)


@dataclass(frozen=True)
class NormRequest:
    q: float
    r: float
    time_interval: tuple = (0.0, 1.0)
    time_samples: int = 16

    def __post_init__(self):
        if not (self.q >= 2 and self.r >= 2):
            raise ValueError("q and r must be at least 2")
        if self.time_samples < 4:
            raise ValueError("need at least four time samples")
        t0, t1 = self.time_interval
        if not t1 > t0:
            raise ValueError("empty time interval")

    def times(self) -> np.ndarray:
        t0, t1 = self.time_interval
        return np.linspace(t0, t1, self.time_samples)


@dataclass(frozen=True)
class NormReport:
    value: float
    per_time_values: np.ndarray
    quadrature_error_estimate: float
    q: float = math.inf
    r: float = math.inf
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError("norm value must be nonnegative")

    def as_dict(self) -> dict:
        def enc(x):
            return "inf" if math.isinf(x) else x
        return {"q": enc(self.q), "r": enc(self.r), "value": self.value,
                "per_time_values": [float(v) for v in self.per_time_values],
                "error_estimate": self.quadrature_error_estimate}


def _time_norm(times, vals, q):
    if math.isinf(q):
        return float(np.max(vals))
    return float(np.trapezoid(vals ** q, times)) ** (1.0 / q)


def mixed_norm(time_slices: Sequence[FieldLike], request: NormRequest) -> NormReport:
    """L^q_t L^r_x norm from slices sampled at ``request.times()``."""
    if len(time_slices) != request.time_samples:
        raise ValueError("number of slices must equal time_samples")
    times = request.times()
    per_t = np.array([lr_norm(f, request.r) for f in time_slices])
    value = _time_norm(times, per_t, request.q)
    coarse_idx = np.unique(np.r_[0:times.size:2, times.size - 1])
    coarse = _time_norm(times[coarse_idx], per_t[coarse_idx], request.q)
    err = abs(value - coarse)
    return NormReport(value, per_t, err, request.q, request.r)


def h2s_surrogate(h_value: float, j: int, s: float) -> float:
    """Bernstein substitute 2^{2 j s} ||.||_H for data localized at frequency 2^{2j}."""
    return 2.0 ** (2.0 * j * s) * h_value
