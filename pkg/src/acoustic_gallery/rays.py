"""Bicharacteristics of H = kappa x_d (xi_d^2 + |xi'|^2) - tau^2.

The flow parameter s advances

    d/ds (t, x_d, x', tau, xi_d, xi') =
        (-2 tau, 2 kappa x_d xi_d, 2 kappa x_d xi', 0, -kappa |xi|^2, 0).

For xi' != 0 the solution is global in s: x_d oscillates like
cos^2(theta0 - kappa |xi'| s) and touches the boundary x_d = 0 once per
parameter length pi / (kappa |xi'|).  Forward time corresponds to
s -> -sign(tau0) infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import bisect


class SegmentError(ValueError):
    """Requested parameter crosses a boundary collision."""


class BranchError(ValueError):
    """Operation needs a nonzero tangential frequency."""


class StepFailure(RuntimeError):
    """The numerical integrator could not keep the requested tolerance."""


@dataclass(frozen=True)
class PhaseState:
    t: float
    xd: float
    xp: tuple
    tau: float
    xid: float
    xip: tuple

    def __post_init__(self):
        object.__setattr__(self, "xp", tuple(float(v) for v in self.xp))
        object.__setattr__(self, "xip", tuple(float(v) for v in self.xip))
        if len(self.xp) != len(self.xip) or len(self.xp) < 1:
            raise ValueError("xp and xip must have the same length d-1 >= 1")
        if not self.xd >= 0.0:
            raise ValueError("xd must be ≥ 0")

    @property
    def dim(self) -> int:
        return len(self.xp) + 1

    @property
    def xip_norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.xip))

    def as_vector(self) -> np.ndarray:
        return np.array([self.t, self.xd, *self.xp, self.tau, self.xid, *self.xip])

    @classmethod
    def from_vector(cls, v, dim: int) -> "PhaseState":
        m = dim - 1
        v = np.asarray(v, dtype=float)
        return cls(float(v[0]), max(float(v[1]), 0.0), tuple(v[2:2 + m]), float(v[2 + m]),
                   float(v[3 + m]), tuple(v[4 + m:4 + 2 * m]))

    @classmethod
    def on_characteristic_set(cls, xd, xp, xid, xip, kappa, t=0.0, forward=True):
        """State with tau chosen so that H = 0; ``forward`` picks tau < 0."""
        tau = math.sqrt(kappa * xd * (xid ** 2 + sum(v * v for v in xip)))
        return cls(t, xd, tuple(xp), -tau if forward else tau, xid, tuple(xip))


def hamiltonian(state: PhaseState, kappa: float) -> float:
    xi2 = state.xid ** 2 + sum(v * v for v in state.xip)
    return kappa * state.xd * xi2 - state.tau ** 2


def closed_form_flow(state0: PhaseState, kappa: float, s: float,
                     check_segment: bool = True) -> PhaseState:
    """Exact state at flow parameter ``s``.

    For xi' != 0 the formulas stay valid through boundary touches; with
    ``check_segment`` a parameter beyond the first collision raises
    :class:`SegmentError` so callers split paths explicitly.
    """
    if s == 0.0:
        return state0
    tau, t0 = state0.tau, state0.t
    xd0, xid0 = state0.xd, state0.xid
    xip = np.asarray(state0.xip)
    r = state0.xip_norm
    if r == 0.0:
        g = kappa * s * xid0 + 1.0
        if g <= 0.0:
            raise SegmentError("kappa s xi_d0 + 1 must stay positive on the xi' = 0 branch")
        return PhaseState(t0 - 2.0 * s * tau, xd0 * g * g, state0.xp, tau, xid0 / g,
                          state0.xip)
    w = kappa * r
    th0 = math.atan(xid0 / r)
    if check_segment:
        lo, hi = collision_bracket(state0, kappa)
        if not (lo <= s <= hi):
            raise SegmentError(
                f"s = {s} leaves the smooth segment ({lo}, {hi}); split at the collision")
    xi2 = xid0 ** 2 + r * r
    c2 = math.cos(2.0 * w * s)
    s2 = math.sin(2.0 * w * s)
    xd = xd0 * (xi2 / (2 * r * r) + c2 * (r * r - xid0 ** 2) / (2 * r * r) + s2 * xid0 / r)
    drift = 2.0 * kappa * xd0 * (
        s * xi2 / (2 * r * r)
        + s2 / (2 * w) * (r * r - xid0 ** 2) / (2 * r * r)
        + (1.0 - c2) / (2 * w) * xid0 / r)
    xp = np.asarray(state0.xp) + xip * drift
    phase = th0 - w * s
    cphase = math.cos(phase)
    if abs(cphase) < 1e-300:
        raise SegmentError("xi_d has a pole exactly at this parameter")
    xid = r * math.tan(phase)
    return PhaseState(t0 - 2.0 * s * tau, max(xd, 0.0), tuple(xp), tau, xid, state0.xip)


def collision_parameters(state0: PhaseState, kappa: float, k_range) -> list:
    """s_k = (arctan(xi_d0/|xi'|) - (2k+1) pi/2) / (kappa |xi'|) for k in ``k_range``."""
    r = state0.xip_norm
    if r == 0.0:
        raise BranchError("no periodic collisions when xi' = 0")
    th0 = math.atan(state0.xid / r)
    return [(th0 - (2 * k + 1) * math.pi / 2.0) / (kappa * r) for k in k_range]


def collision_bracket(state0: PhaseState, kappa: float):
    """The collision parameters enclosing s = 0 (the current smooth segment)."""
    r = state0.xip_norm
    if r == 0.0:
        raise BranchError("no periodic collisions when xi' = 0")
    th0 = math.atan(state0.xid / r)
    # s_k > 0 iff th0 - (2k+1) pi/2 > 0 iff k < th0/pi - 1/2
    k_hi = math.floor(th0 / math.pi - 0.5)
    s_pos = collision_parameters(state0, kappa, [k_hi])[0]
    s_neg = collision_parameters(state0, kappa, [k_hi + 1])[0]
    if s_pos <= 0:
        s_pos += math.pi / (kappa * r)
        s_neg += math.pi / (kappa * r)
    return s_neg, s_pos


def _rhs(kappa, m):
    def f(_s, y):
        xd = y[1]
        tau = y[2 + m]
        xid = y[3 + m]
        xip = y[4 + m:4 + 2 * m]
        xi2 = xid * xid + xip @ xip
        out = np.empty_like(y)
        out[0] = -2.0 * tau
        out[1] = 2.0 * kappa * xd * xid
        out[2:2 + m] = 2.0 * kappa * xd * xip
        out[2 + m] = 0.0
        out[3 + m] = -kappa * xi2
        out[4 + m:4 + 2 * m] = 0.0
        return out
    return f


def numeric_flow(state0: PhaseState, kappa: float, s: float, tol: float = 1e-11) -> PhaseState:
    """Integrate the Hamiltonian system with an adaptive Runge-Kutta 5(4) pair.

    Meant as an oracle on smooth segments: it raises :class:`StepFailure`
    when x_d collapses toward the boundary, where xi_d has a pole.
    """
    m = state0.dim - 1
    y0 = state0.as_vector()
    scale = max(1.0, float(np.max(np.abs(y0))))
    sol = solve_ivp(_rhs(kappa, m), (0.0, s), y0, method="RK45", rtol=tol,
                    atol=tol * scale, dense_output=False)
    if not sol.success:
        raise StepFailure(sol.message)
    y = sol.y[:, -1]
    if y[1] < 1e-8 * max(state0.xd, 1e-300):
        raise StepFailure("trajectory reached the boundary; the oracle is not valid there")
    return PhaseState.from_vector(y, state0.dim)


def xd_derivative(state0: PhaseState, kappa: float, s: float) -> float:
    """d x_d / ds from the closed form (used to locate tangential touches)."""
    r = state0.xip_norm
    xid0, xd0 = state0.xid, state0.xd
    w = kappa * r
    return xd0 * (-2 * w * math.sin(2 * w * s) * (r * r - xid0 ** 2) / (2 * r * r)
                  + 2 * w * math.cos(2 * w * s) * xid0 / r)


def measured_collisions(state0: PhaseState, kappa: float, k_range, xtol: float = 1e-12):
    """Collision parameters, ascending, found by bisection on d x_d / ds near each analytic guess."""
    r = state0.xip_norm
    quarter = math.pi / (4.0 * kappa * r)
    out = []
    for guess in collision_parameters(state0, kappa, k_range):
        f = lambda x: xd_derivative(state0, kappa, x)
        out.append(bisect(f, guess - quarter, guess + quarter, xtol=xtol * max(1.0, abs(guess)),
                          maxiter=400))
    return sorted(out)


@dataclass(frozen=True)
class RaySegment:
    s_start: float
    s_end: float
    state: PhaseState  # state at the segment start


@dataclass(frozen=True)
class Collision:
    s: float
    t: float
    xp: tuple


@dataclass(frozen=True)
class RayPath:
    state0: PhaseState
    kappa: float
    segments: tuple = ()
    collisions: tuple = ()
    direction: float = 1.0

    def sample(self, per_segment: int = 64):
        """Rows (segment, s, t, x_d, x'..., tau, xi_d, xi'...) along every segment."""
        rows = []
        for k, seg in enumerate(self.segments):
            for s in np.linspace(seg.s_start, seg.s_end, per_segment):
                st = closed_form_flow(self.state0, self.kappa, float(s), check_segment=False)
                rows.append([k, s, *st.as_vector()])
        return np.asarray(rows)


def trace(state0: PhaseState, kappa: float) -> RayPath:
    """Path holding only the segment from s = 0 to the first collision in forward time."""
    if state0.xip_norm == 0.0:
        raise BranchError("reflection bookkeeping needs xi' != 0")
    direction = -1.0 if state0.tau > 0 else 1.0
    lo, hi = collision_bracket(state0, kappa)
    end = hi if direction > 0 else lo
    return RayPath(state0, kappa, (RaySegment(0.0, end, state0),), (), direction)


def reflect_and_continue(path: RayPath, through: int) -> RayPath:
    """Extend ``path`` across ``through`` further boundary collisions.

    The global closed form is re-sampled on each new segment; x_d
    re-expands after every cusp and x' advances by the hop
    pi x_d0 (xi'/|xi'|) (|xi'|^2 + xi_d0^2) / |xi'|^2.
    """
    if through < 0:
        raise ValueError("through must be nonnegative")
    r = path.state0.xip_norm
    period = math.pi / (path.kappa * r)
    segs = list(path.segments)
    cols = list(path.collisions)
    for _ in range(through):
        last = segs[-1]
        s_col = last.s_end
        at = closed_form_flow(path.state0, path.kappa, s_col, check_segment=False)
        cols.append(Collision(s_col, at.t, at.xp))
        s_next = s_col + path.direction * period
        segs.append(RaySegment(s_col, s_next, at))
    return replace(path, segments=tuple(segs), collisions=tuple(cols))


def hop_displacement(state0: PhaseState) -> np.ndarray:
    """Tangential drift between successive collisions."""
    r = state0.xip_norm
    xip = np.asarray(state0.xip)
    return math.pi * state0.xd * xip / r * (r * r + state0.xid ** 2) / (r * r)


def collisions_in_time(state0: PhaseState, kappa: float, t_end: float) -> int:
    """Number of boundary touches with 0 < t - t0 <= t_end in forward time."""
    path = trace(state0, kappa)
    dt = 2.0 * math.pi * abs(state0.tau) / (kappa * state0.xip_norm)
    first = closed_form_flow(state0, kappa, path.segments[0].s_end, check_segment=False)
    t_first = abs(first.t - state0.t)
    if t_first > t_end:
        return 0
    return 1 + int(math.floor((t_end - t_first) / dt + 1e-12))


def dwell_fraction(state0: PhaseState, kappa: float, c: float) -> float:
    """Fraction of a collision period during which x_d <= c * x_d0.

    The crossing x_d(s) = c x_d0 next to a collision is located by
    bisection on the closed form; x_d is symmetric about each touch.
    """
    if not 0.0 < c <= 1.0:
        raise ValueError("c must lie in (0, 1]")
    r = state0.xip_norm
    if r == 0.0:
        raise BranchError("dwell fraction needs xi' != 0")
    period = math.pi / (kappa * r)
    s_col = collision_bracket(state0, kappa)[1]
    target = c * state0.xd
    g = lambda x: closed_form_flow(state0, kappa, x, check_segment=False).xd - target
    # x_d rises monotonically from the touch to the apex half a period later
    apex = s_col - period / 2.0
    if g(apex) <= 0.0:
        return 1.0
    crossing = bisect(g, apex, s_col, xtol=1e-14 * max(1.0, abs(s_col)), maxiter=500)
    return 2.0 * (s_col - crossing) / period
