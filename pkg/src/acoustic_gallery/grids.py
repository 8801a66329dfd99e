"""Graded half-line grids and product-integration weights for power weights."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


def graded_grid(s_max: float, first: float = 1e-6, ratio: float = 1.05,
                spacing: float = 0.05) -> np.ndarray:
    """Points 0 < first < ... clustering geometrically at the origin.

    Spacing grows by ``ratio`` from ``first`` until it reaches ``spacing``
    and stays uniform after that.  The origin itself is the first entry.
    """
    if not (s_max > first > 0 and ratio > 1 and spacing > 0):
        raise ValueError("need s_max > first > 0, ratio > 1, spacing > 0")
    pts = [0.0, first]
    h = first * (ratio - 1.0)
    while pts[-1] < s_max and h < spacing:
        pts.append(pts[-1] + max(h, 0.0))
        h *= ratio
    x = pts[-1]
    if x < s_max:
        n = max(1, int(np.ceil((s_max - x) / spacing)))
        pts.extend(np.linspace(x, s_max, n + 1)[1:])
    out = np.asarray(pts, dtype=float)
    out = out[out <= s_max * (1 + 1e-14)]
    if out[-1] < s_max:
        out = np.append(out, s_max)
    return out


@lru_cache(maxsize=64)
def _jacobi_rule(n: int, p: float):
    t, w = roots_jacobi(n, 0.0, p)
    return (t + 1.0) / 2.0, w / 2.0 ** (p + 1.0)   # rule for int_0^1 u^p f(u) du


@lru_cache(maxsize=8)
def _legendre_rule(n: int):
    t, w = roots_legendre(n)
    return (t + 1.0) / 2.0, w / 2.0                  # rule for int_0^1 f(u) du


def _panel_integrals(x0, x1, x2, a, b, p, order=10):
    """int_a^b x^p l_m(x) dx for the quadratic Lagrange basis on (x0,x1,x2)."""
    x0, x1, x2, a, b = (np.asarray(v, dtype=float) for v in (x0, x1, x2, a, b))
    out = np.zeros((3,) + x0.shape)
    at_zero = a == 0.0
    # Gauss-Jacobi handles x^p on [0, b]; Gauss-Legendre elsewhere
    if np.any(at_zero):
        u, w = _jacobi_rule(order, float(p))
        bb = b[at_zero][:, None]
        xs = bb * u[None, :]
        scale = bb[:, 0] ** (p + 1.0)
        for m, basis in enumerate(_lagrange(xs, x0[at_zero][:, None], x1[at_zero][:, None],
                                            x2[at_zero][:, None])):
            out[m, at_zero] = scale * (basis @ w)
    rest = ~at_zero
    if np.any(rest):
        u, w = _legendre_rule(order)
        aa, bb = a[rest][:, None], b[rest][:, None]
        xs = aa + (bb - aa) * u[None, :]
        wt = xs ** p
        for m, basis in enumerate(_lagrange(xs, x0[rest][:, None], x1[rest][:, None],
                                            x2[rest][:, None])):
            out[m, rest] = (bb[:, 0] - aa[:, 0]) * ((basis * wt) @ w)
    return out


def _lagrange(x, x0, x1, x2):
    l0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2))
    l1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2))
    l2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1))
    return l0, l1, l2


def power_weights(x, p: float = 0.0) -> np.ndarray:
    """Weights w with sum w f(x) ~ int_{x[0]}^{x[-1]} t^p f(t) dt.

    Piecewise-quadratic product integration on consecutive point triples,
    with the weight t^p integrated exactly up to Gauss-Jacobi accuracy, so
    integrable endpoint singularities (p > -1) cost no accuracy.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 3:
        raise ValueError("need at least three points")
    if p <= -1.0 and x[0] == 0.0:
        raise ValueError("weight t^p is not integrable at 0 for p <= -1")
    if x[0] < 0.0:
        raise ValueError("points must be nonnegative")
    w = np.zeros(n)
    starts = np.arange(0, n - 2, 2)
    i0 = starts
    ints = _panel_integrals(x[i0], x[i0 + 1], x[i0 + 2], x[i0], x[i0 + 2], p)
    np.add.at(w, i0, ints[0])
    np.add.at(w, i0 + 1, ints[1])
    np.add.at(w, i0 + 2, ints[2])
    if (n - 1) % 2 == 1:
        # one interval left over: integrate it with the last three points
        j = n - 3
        ints = _panel_integrals(x[[j]], x[[j + 1]], x[[j + 2]], x[[j + 1]], x[[j + 2]], p)
        w[j] += ints[0, 0]
        w[j + 1] += ints[1, 0]
        w[j + 2] += ints[2, 0]
    return w
