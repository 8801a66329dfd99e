"""Gallery-mode eigenproblem at a fixed tangential frequency.

In the scaled coordinate s = |xi'| x_d the radial profile B(mu, s) solves

    kappa s B'' + B' + (mu - kappa s) B = 0,

with the bounded solution B = exp(-s) L^{1/kappa - 1}_nu(2 s) / L(0) and
degree nu = (mu - 1) / (2 kappa).  The degree is a nonnegative integer
exactly when mu = 2 kappa n + 1; otherwise a growing admixture
~ exp(+s) appears and is tracked as ``contamination_bound``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .grids import graded_grid, power_weights


class ContaminationError(RuntimeError):
    """The growing second solution is too large at the truncation point."""


class ModeInstabilityError(RuntimeError):
    """Shooting integration blew up, signalling a non-quantized mu."""


class DivergenceError(RuntimeError):
    """A weighted integral does not converge on the given profile."""


@dataclass(frozen=True)
class ModeSpec:
    kappa: float
    mu: float
    n: int | None = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.n is not None:
            if self.n < 0 or int(self.n) != self.n:
                raise ValueError("n must be a nonnegative integer")
            if abs(self.mu - quantized_mu(self.n, self.kappa)) > 1e-12:
                raise ValueError("mu does not match 2*kappa*n + 1")

    @classmethod
    def quantized(cls, n: int, kappa: float) -> "ModeSpec":
        return cls(kappa=kappa, mu=quantized_mu(n, kappa), n=n)

    @property
    def degree(self) -> float:
        """Laguerre degree nu = (mu - 1) / (2 kappa)."""
        return (self.mu - 1.0) / (2.0 * self.kappa)

    @property
    def order(self) -> float:
        """Laguerre order 1/kappa - 1."""
        return 1.0 / self.kappa - 1.0


@dataclass(frozen=True)
class ModeProfile:
    spec: ModeSpec
    s_grid: np.ndarray
    B: np.ndarray
    dB: np.ndarray
    d2B: np.ndarray
    truncation_s_max: float
    contamination_bound: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.s_grid)
        if s.ndim != 1 or s.size < 16:
            raise ValueError("profile needs at least 16 grid points")
        if s[0] > 1e-6 or s[0] < 0 or np.any(np.diff(s) <= 0):
            raise ValueError("s_grid must start in [0, 1e-6] and increase strictly")
        for name in ("B", "dB", "d2B"):
            if np.shape(getattr(self, name)) != s.shape:
                raise ValueError(f"{name} must align with s_grid")
        for name in ("s_grid", "B", "dB", "d2B"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def quantized_mu(n: int, kappa: float) -> float:
    """The eigenvalues mu = 2 kappa n + 1 for which the Laguerre series terminates."""
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer")
    return 2.0 * kappa * n + 1.0


def mode_ode_residual(profile: ModeProfile) -> float:
    """max |kappa s B'' + B' + (mu - kappa s) B| / (1 + |B|) over the grid."""
    k, mu = profile.spec.kappa, profile.spec.mu
    s = profile.s_grid
    res = k * s * profile.d2B + profile.dB + (mu - k * s) * profile.B
    return float(np.max(np.abs(res) / (1.0 + np.abs(profile.B))))


def growing_branch_amplitude(kappa: float, mu: float, s) -> np.ndarray:
    """Leading size of the exp(+s) admixture in the normalized profile.

    For non-integer degree nu the normalized Laguerre function behaves like
    -(sin(pi nu)/pi) Gamma(nu+1) Gamma(alpha+1) exp(s) (2 s)^(-nu-alpha-1)
    at large s, alpha = 1/kappa - 1.  Zero for quantized mu.
    """
    nu = (mu - 1.0) / (2.0 * kappa)
    alpha = 1.0 / kappa - 1.0
    s = np.asarray(s, dtype=float)
    if specfun.nearest_integer(nu) is not None and specfun.nearest_integer(nu) >= 0:
        return np.zeros_like(s)
    coeff = abs(math.sin(math.pi * nu)) / math.pi * math.gamma(nu + 1.0) * math.gamma(alpha + 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        return coeff * np.exp(s) * (2.0 * s) ** (-nu - alpha - 1.0)


def contamination_estimate(kappa: float, mu: float, s_max: float, peak: float = 1.0) -> float:
    """Size of the growing admixture at ``s_max`` relative to the profile peak."""
    return float(growing_branch_amplitude(kappa, mu, s_max)) / peak


def evaluate_profile(kappa: float, mu, s):
    """B, B', B'' at scaled points ``s`` (mu and s broadcast together)."""
    alpha = 1.0 / kappa - 1.0
    nu = (np.asarray(mu, dtype=float) - 1.0) / (2.0 * kappa)
    s = np.asarray(s, dtype=float)
    m0, m1, m2 = specfun.normalized_laguerre_series(alpha, nu, 2.0 * s, derivatives=2)
    e = np.exp(-s)
    B = e * m0
    dB = e * (2.0 * m1 - m0)
    d2B = e * (m0 - 4.0 * m1 + 4.0 * m2)
    return B, dB, d2B


def default_grid(s_max: float) -> np.ndarray:
    return graded_grid(s_max, first=1e-6, ratio=1.05, spacing=0.05)


def closed_form_profile(spec: ModeSpec, xi_norm: float = 1.0, s_max: float = 30.0,
                        s_grid=None, contamination_tol: float | None = 1e-6) -> ModeProfile:
    """Sample B(mu, s) = exp(-s) L^{1/kappa-1}_nu(2 s) / L(0) on a graded grid.

    ``xi_norm`` is recorded only; the profile lives in the scaled variable.
    Raises :class:`ContaminationError` when a non-quantized degree lets the
    growing solution exceed ``contamination_tol`` relative to the peak.
    """
    if not xi_norm > 0:
        raise ValueError("xi_norm must be positive")
    s = default_grid(s_max) if s_grid is None else np.asarray(s_grid, dtype=float)
    B, dB, d2B = evaluate_profile(spec.kappa, spec.mu, s)
    # the Frobenius condition holds exactly at the origin
    if s[0] == 0.0:
        B[0], dB[0] = 1.0, -spec.mu
    peak = float(np.max(np.abs(B)))
    contamination = contamination_estimate(spec.kappa, spec.mu, float(s[-1]), peak)
    if contamination_tol is not None and contamination > contamination_tol:
        raise ContaminationError(
            f"growing branch reaches {contamination:.3g} of the peak at s = {s[-1]:g} "
            f"(tolerance {contamination_tol:g}); mu = {spec.mu:g} is not quantized")
    return ModeProfile(spec, s, B, dB, d2B, float(s[-1]), contamination,
                       {"xi_norm": float(xi_norm)})


def quadratic_form(profile: ModeProfile, xi_norm: float, kappa: float,
                   decay_tol: float = 1e-10) -> float:
    """Q(f) = int kappa x^{1/kappa} (f'(x)^2 + |xi'|^2 f(x)^2) dx for f(x) = B(|xi'| x)."""
    x = profile.s_grid / xi_norm
    df = profile.dB * xi_norm
    integrand = kappa * (df ** 2 + xi_norm ** 2 * profile.B ** 2)
    full = integrand * np.where(x > 0, x, 0.0) ** (1.0 / kappa)
    peak = float(np.max(np.abs(full))) if full.size else 0.0
    if peak == 0.0:
        return 0.0
    _check_origin_integrable(x, full)
    if abs(full[-1]) > decay_tol * peak:
        raise DivergenceError(
            f"integrand has not decayed at truncation ({abs(full[-1]) / peak:.2e} of peak)")
    w = power_weights(x, 1.0 / kappa)
    return float(w @ integrand)


def _check_origin_integrable(x, integrand, n_probe: int = 12):
    """Reject integrands behaving like x^beta, beta <= -1, at the origin."""
    pos = np.flatnonzero(x > 0)[:n_probe]
    if pos.size < 4:
        return
    xs, ys = x[pos], np.abs(integrand[pos])
    if np.any(ys == 0):
        return
    beta = np.polyfit(np.log(xs), np.log(ys), 1)[0]
    if beta <= -0.999:
        raise DivergenceError(f"integrand grows like x^{beta:.3f} at the origin")


# ---------------------------------------------------------------------------
# shooting oracle

def _frobenius_start(kappa, mu, s0, terms=8):
    c = [np.longdouble(1), np.longdouble(-mu)]
    for k in range(2, terms):
        c.append((kappa * c[k - 2] - mu * c[k - 1]) / (k * (kappa * (k - 1) + 1)))
    s0 = np.longdouble(s0)
    b = sum(ck * s0 ** k for k, ck in enumerate(c))
    db = sum(k * ck * s0 ** (k - 1) for k, ck in enumerate(c) if k > 0)
    return b, db


def _taylor_coefficients(kappa, mu, sc, b0, b1, tol, max_terms=80, h=1.0):
    """Local Taylor coefficients of B about sc from B(sc), B'(sc)."""
    one = np.longdouble(1)
    kap, mu, sc = np.longdouble(kappa), np.longdouble(mu), np.longdouble(sc)
    coef = [b0, b1]
    scale = abs(b0) + abs(b1) * h + np.longdouble(1e-300)
    small = 0
    for k in range(0, max_terms - 2):
        prev = coef[k - 1] if k >= 1 else np.longdouble(0)
        nxt = -((k + 1) * (kap * k + one) * coef[k + 1] + (mu - kap * sc) * coef[k]
                - kap * prev) / (kap * sc * (k + 2) * (k + 1))
        coef.append(nxt)
        if abs(nxt) * np.longdouble(h) ** (k + 2) <= tol * scale:
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    return np.array(coef, dtype=np.longdouble)


def _eval_taylor(coef, h):
    h = np.asarray(h, dtype=np.longdouble)
    b = np.zeros_like(h)
    db = np.zeros_like(h)
    d2b = np.zeros_like(h)
    n = coef.size
    for k in range(n - 1, -1, -1):
        b = b * h + coef[k]
        if k >= 1:
            db = db * h + k * coef[k]
        if k >= 2:
            d2b = d2b * h + k * (k - 1) * coef[k]
    return b, db, d2b


def shooting_oracle(spec: ModeSpec, kappa: float | None = None, s_max: float = 20.0,
                    s_grid=None, s_start: float = 1e-6, blowup: float = 1e6,
                    tol: float = 1e-21) -> ModeProfile:
    """Integrate the mode equation outward from the regular Frobenius branch.

    Starts at ``s_start`` with the regular series data (B(0) = 1,
    B'(0) = -mu) and advances by local Taylor expansions in long double,
    each step at most half the distance to the singular point s = 0.
    Independent of the Laguerre machinery in :mod:`specfun`.
    """
    kappa = spec.kappa if kappa is None else kappa
    if abs(kappa - spec.kappa) > 1e-15:
        raise ValueError("kappa disagrees with spec.kappa")
    mu = spec.mu
    s = default_grid(s_max) if s_grid is None else np.asarray(s_grid, dtype=float)
    out_b = np.empty(s.size, dtype=np.longdouble)
    out_db = np.empty_like(out_b)
    out_d2b = np.empty_like(out_b)
    # points below the start come from the Frobenius series directly
    b, db = _frobenius_start(kappa, mu, s_start)
    head = s <= s_start
    if np.any(head):
        c = [np.longdouble(1), np.longdouble(-mu)]
        for k in range(2, 8):
            c.append((kappa * c[k - 2] - mu * c[k - 1]) / (k * (kappa * (k - 1) + 1)))
        sh = s[head].astype(np.longdouble)
        out_b[head] = sum(ck * sh ** k for k, ck in enumerate(c))
        out_db[head] = sum(k * ck * sh ** (k - 1) for k, ck in enumerate(c) if k > 0)
        out_d2b[head] = sum(k * (k - 1) * ck * sh ** (k - 2) for k, ck in enumerate(c) if k > 1)
    sc = np.longdouble(s_start)
    idx = int(np.searchsorted(s, s_start, side="right"))
    s_end = np.longdouble(s[-1])
    steps = 0
    while sc < s_end:
        h = min(sc / 2, np.longdouble(0.5), s_end - sc)
        coef = _taylor_coefficients(kappa, mu, sc, b, db, np.longdouble(tol), h=float(h))
        new_sc = sc + h
        j = idx
        while j < s.size and s[j] <= new_sc:
            j += 1
        if j > idx:
            vb, vdb, vd2b = _eval_taylor(coef, s[idx:j].astype(np.longdouble) - sc)
            out_b[idx:j], out_db[idx:j], out_d2b[idx:j] = vb, vdb, vd2b
            idx = j
        b, db, _ = _eval_taylor(coef, np.longdouble(h))
        b, db = np.longdouble(b), np.longdouble(db)
        sc = new_sc
        steps += 1
        if abs(b) > blowup:
            raise ModeInstabilityError(
                f"|B| exceeded {blowup:g} at s = {float(sc):.3f}; mu = {mu:g} is not an eigenvalue")
    return ModeProfile(spec, s, out_b.astype(float), out_db.astype(float),
                       out_d2b.astype(float), float(s[-1]), 0.0,
                       {"method": "taylor-shooting", "steps": steps})


# ---------------------------------------------------------------------------
# WKB regime checks

@dataclass(frozen=True)
class WKBReport:
    small_s_log_derivative: float
    small_s_deviation: float
    large_s_log_derivative: float
    large_s_deviation: float
    zero_spacing_values: np.ndarray
    zero_spacing_window: tuple
    zero_spacing_deviation: float

    def as_dict(self) -> dict:
        return {
            "small_s_log_derivative": self.small_s_log_derivative,
            "small_s_deviation": self.small_s_deviation,
            "large_s_log_derivative": self.large_s_log_derivative,
            "large_s_deviation": self.large_s_deviation,
            "zero_spacing_values": [float(v) for v in self.zero_spacing_values],
            "zero_spacing_window": list(self.zero_spacing_window),
            "zero_spacing_deviation": self.zero_spacing_deviation,
        }


def _profile_zeros(profile: ModeProfile) -> np.ndarray:
    from scipy.optimize import brentq
    s, B = profile.s_grid, profile.B
    spec = profile.spec
    zeros = []
    for i in np.flatnonzero(np.sign(B[:-1]) * np.sign(B[1:]) < 0):
        f = lambda x: float(evaluate_profile(spec.kappa, spec.mu, np.array([x]))[0][0])
        zeros.append(brentq(f, s[i], s[i + 1], xtol=1e-14))
    return np.asarray(zeros)


def wkb_diagnostics(profile: ModeProfile, window=(1.0 / 32.0, 1.0 / 8.0),
                    small_s: float = 1e-6) -> WKBReport:
    """Compare a profile with the asymptotic regimes of the mode equation.

    (i) log-derivative near s = 0 against -mu, (ii) log-derivative at the
    far end of the grid against -1, (iii) the spacing law
    2 (sqrt(s_{k+1}) - sqrt(s_k)) sqrt(mu/kappa) = pi for consecutive zeros
    whose midpoint lies in (window[0] mu/kappa, window[1] mu/kappa).
    """
    spec = profile.spec
    s, B, dB = profile.s_grid, profile.B, profile.dB
    i0 = int(np.argmin(np.abs(s - small_s)))
    small = float(dB[i0] / B[i0])
    large = float(dB[-1] / B[-1]) if B[-1] != 0 else float("nan")
    lo = window[0] * spec.mu / spec.kappa
    hi = window[1] * spec.mu / spec.kappa
    zeros = _profile_zeros(profile)
    values = np.array([])
    if zeros.size >= 2:
        mid = np.sqrt(zeros[1:] * zeros[:-1])
        keep = (mid > lo) & (mid < hi)
        gaps = 2.0 * np.diff(np.sqrt(zeros)) * math.sqrt(spec.mu / spec.kappa)
        values = gaps[keep] / math.pi
    dev = float(np.max(np.abs(values - 1.0))) if values.size else float("nan")
    return WKBReport(small, abs(small + spec.mu), large, abs(large + 1.0),
                     values, (lo, hi), dev)
