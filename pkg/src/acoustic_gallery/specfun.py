"""Special functions summed from their defining power series.

Generalized Laguerre functions of real degree and the confluent
hypergeometric function U(a, b, z) are accumulated term by term.  The
scalar routines run in mpmath arithmetic whose working precision is raised
until the cancellation between terms is covered, then hand back ordinary
floats wrapped in :class:`SeriesValue`.  ``normalized_laguerre_series`` is
the vectorized workhorse used on sampling grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

INTEGER_TOL = 1e-12
TERM_TOL = 1e-16
_START_BITS = 96
_MAX_BITS = 4096
_MAX_TERMS = 100_000


class SeriesDomainError(ValueError):
    """Argument outside the domain of the requested series."""


class SeriesOverflowError(OverflowError):
    """Series value or its terms leave the float64 range."""


@dataclass(frozen=True)
class SeriesValue:
    value: float
    abs_error_estimate: float
    terms_used: int

    def __post_init__(self):
        if not self.abs_error_estimate >= 0.0:
            raise ValueError("abs_error_estimate must be non-negative")
        if self.terms_used < 1:
            raise ValueError("terms_used must be at least 1")

    def __float__(self) -> float:
        return self.value


def nearest_integer(x: float, tol: float = INTEGER_TOL) -> int | None:
    """Return the integer closest to ``x`` when ``x`` is integral within ``tol``."""
    n = round(x)
    if abs(x - n) <= tol * max(1.0, abs(x)):
        return int(n)
    return None


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if not x > 0.0:
        raise SeriesDomainError(f"log_gamma needs x > 0, got {x!r}")
    return math.lgamma(x)


def pochhammer(a: float, k: int) -> float:
    """Rising factorial (a)_k = a (a+1) ... (a+k-1)."""
    if k < 0 or int(k) != k:
        raise SeriesDomainError("k must be a nonnegative integer")
    n = nearest_integer(a)
    if n is not None and n <= 0 and k > -n:
        return 0.0
    out = 1.0
    for i in range(int(k)):
        out *= a + i
    return out


# ---------------------------------------------------------------------------
# generalized power series machinery (mpmath)

@dataclass
class _PowerSeries:
    """prefactor * sum_k coef_k * z**(power + k) * log(z)**log_power"""

    prefactor: object
    coefficients: object  # callable k -> mpf coefficient, or finite list
    power: object
    log_power: int = 0
    ratio_bound: object = None  # callable k -> bound on |c_{k+1} z / c_k| for k' >= k
    finite: bool = False


def _falling(q, order):
    if order == 0:
        return mpmath.mpf(1), mpmath.mpf(0)
    if order == 1:
        return q, mpmath.mpf(1)
    if order == 2:
        return q * (q - 1), 2 * q - 1
    raise ValueError("derivative order must be 0, 1 or 2")


def _sum_series(series_list, z, order, prec):
    """Sum the series at working precision ``prec``.

    Returns (value, tail_bound, magnitude, terms) as mpf numbers, where
    ``magnitude`` is the largest absolute contribution seen (used to
    measure cancellation).
    """
    eps = mpmath.mpf(2) ** (-prec)
    total = mpmath.mpf(0)
    tail = mpmath.mpf(0)
    magnitude = mpmath.mpf(0)
    terms = 0
    logz = mpmath.log(z)
    for ser in series_list:
        if ser.prefactor == 0:
            continue
        partial = mpmath.mpf(0)
        small_run = 0
        k = 0
        last = mpmath.mpf(0)
        guard = 2 * float(abs(z)) + 4
        while True:
            if ser.finite:
                if k >= len(ser.coefficients):
                    break
                c = ser.coefficients[k]
            else:
                c = ser.coefficients(k)
            q = ser.power + k
            f, df = _falling(q, order)
            zp = mpmath.power(z, q - order)
            if ser.log_power:
                term = c * zp * (f * logz + df)
            else:
                term = c * zp * f
            partial += term
            magnitude = max(magnitude, abs(ser.prefactor * term))
            terms += 1
            last = term
            k += 1
            if ser.finite:
                continue
            if c == 0 and ser.ratio_bound is None:
                break
            if abs(term) <= eps * abs(partial) or term == 0:
                small_run += 1
            else:
                small_run = 0
            if small_run >= 2 and k > guard:
                rho = ser.ratio_bound(k) if ser.ratio_bound is not None else mpmath.mpf(0.5)
                if rho < 1:
                    tail += abs(ser.prefactor * last) * rho / (1 - rho) * (1 + abs(logz))
                    break
            if k > _MAX_TERMS:
                raise SeriesOverflowError("series failed to converge")
        total += ser.prefactor * partial
    return total, tail, magnitude, max(terms, 1)


def _evaluate(build, z, order=0):
    """Evaluate series built by ``build()`` with adaptive precision."""
    prec = _START_BITS
    while True:
        with mpmath.workprec(prec):
            series_list = build()
            zz = mpmath.mpf(z)
            value, tail, magnitude, terms = _sum_series(series_list, zz, order, prec)
            if magnitude == 0:
                lost = 0
            elif value == 0:
                lost = prec
            else:
                lost = max(0, int(mpmath.log(magnitude / abs(value), 2)) + 1)
            if lost <= prec - 64 or prec >= _MAX_BITS:
                rounding = magnitude * mpmath.mpf(2) ** (-(prec - 8))
                v = float(value)
                if math.isinf(v) or (magnitude != 0 and not math.isfinite(float(magnitude))):
                    raise SeriesOverflowError("series value exceeds float64 range")
                err = float(tail + rounding + abs(value) * mpmath.mpf(2) ** -53)
                return SeriesValue(v, err, terms)
        prec = min(_MAX_BITS, lost + 128)


# ---------------------------------------------------------------------------
# Laguerre

def _check_laguerre_args(lam, nu, z):
    if not lam > -1.0:
        raise SeriesDomainError(f"laguerre needs lambda > -1, got {lam!r}")
    if not z >= 0.0:
        raise SeriesDomainError(f"laguerre needs z >= 0, got {z!r}")
    n = nearest_integer(nu)
    if n is not None and n >= 0:
        return n
    if not (lam + nu + 1.0 > 0.0 and nu + 1.0 > 0.0):
        raise SeriesDomainError(
            "Gamma prefactor has a pole: need lambda+nu+1 > 0 and nu+1 > 0 "
            f"for non-integer degree (lambda={lam!r}, nu={nu!r})")
    return None


def laguerre(lam: float, nu: float, z: float, derivative: int = 0,
             z_cap: float | None = None) -> SeriesValue:
    """Generalized Laguerre function L^lam_nu(z) of real degree ``nu``.

    Sums Gamma(lam+nu+1)/Gamma(nu+1) * sum_k (-nu)_k z^k / (Gamma(k+lam+1) k!).
    For a nonnegative integer degree the series terminates and the
    prefactor is folded into Pochhammer symbols, so no Gamma pole is met.
    ``derivative`` (0, 1 or 2) differentiates the series termwise.
    """
    n = _check_laguerre_args(lam, nu, z)
    if z_cap is not None and n is None and z > z_cap:
        raise SeriesOverflowError(
            f"z = {z} exceeds the cap {z_cap} for a non-terminating series")
    if derivative not in (0, 1, 2):
        raise ValueError("derivative must be 0, 1 or 2")

    if n is not None:
        def build():
            lam_m = mpmath.mpf(lam)
            coeffs = []
            for k in range(n + 1):
                c = mpmath.rf(-n, k) * mpmath.rf(k + lam_m + 1, n - k)
                coeffs.append(c / (mpmath.factorial(n) * mpmath.factorial(k)))
            return [_PowerSeries(mpmath.mpf(1), coeffs, mpmath.mpf(0), finite=True)]
        if z == 0.0:
            # avoid 0**negative in derivative terms
            return _laguerre_at_zero(lam, n, derivative)
        out = _evaluate(build, z, derivative)
        return SeriesValue(out.value, 0.0 if derivative == 0 else out.abs_error_estimate,
                           out.terms_used)

    def build():
        lam_m, nu_m = mpmath.mpf(lam), mpmath.mpf(nu)
        pref = mpmath.gamma(lam_m + nu_m + 1) / mpmath.gamma(nu_m + 1)
        cache = {}

        def coef(k):
            if k == 0:
                cache[0] = mpmath.rgamma(lam_m + 1)
            else:
                cache[k] = cache[k - 1] * (k - 1 - nu_m) / ((k + lam_m) * k)
            return cache[k]

        def ratio(k):
            return abs(k - nu_m) * z / ((k + lam_m + 1) * (k + 1))
        return [_PowerSeries(pref, coef, mpmath.mpf(0), ratio_bound=ratio)]

    if z == 0.0:
        with mpmath.workprec(_START_BITS):
            lam_m, nu_m = mpmath.mpf(lam), mpmath.mpf(nu)
            pref = mpmath.gamma(lam_m + nu_m + 1) / mpmath.gamma(nu_m + 1)
            c = [mpmath.rgamma(lam_m + 1)]
            c.append(c[0] * (-nu_m) / (lam_m + 1))
            c.append(c[1] * (1 - nu_m) / ((lam_m + 2) * 2))
            val = pref * c[derivative] * math.factorial(derivative)
            return SeriesValue(float(val), 0.0, 1)
    return _evaluate(build, z, derivative)


def _laguerre_at_zero(lam, n, derivative):
    with mpmath.workprec(_START_BITS):
        lam_m = mpmath.mpf(lam)
        if derivative > n:
            return SeriesValue(0.0, 0.0, 1)
        k = derivative
        c = mpmath.rf(-n, k) * mpmath.rf(k + lam_m + 1, n - k)
        c /= mpmath.factorial(n) * mpmath.factorial(k)
        return SeriesValue(float(c * mpmath.factorial(k)), 0.0, 1)


def normalized_laguerre_series(lam, nu, z, derivatives: int = 2):
    """Vectorized M(z) = L^lam_nu(z) / L^lam_nu(0) with termwise derivatives.

    ``nu`` and ``z`` broadcast against each other.  The sum runs in
    long double to absorb cancellation inside the oscillatory region.
    Returns a tuple ``(M, M', M'')`` truncated to ``derivatives + 1``
    entries.
    """
    nu = np.asarray(nu, dtype=np.longdouble)
    z = np.asarray(z, dtype=np.longdouble)
    nu, z = np.broadcast_arrays(nu, z)
    lam = np.longdouble(lam)
    shape = z.shape
    sums = [np.zeros(shape, dtype=np.longdouble) for _ in range(derivatives + 1)]
    # coefficient c_k = (-nu)_k Gamma(lam+1) / (Gamma(k+lam+1) k!)
    coef = np.ones(shape, dtype=np.longdouble)
    zmax = float(np.max(z)) if z.size else 0.0
    guard = int(2 * zmax) + 4
    tiny = np.longdouble(TERM_TOL) * np.longdouble(1e-3)
    zero = np.zeros(shape, dtype=np.longdouble)
    zpow = [np.ones(shape, dtype=np.longdouble), zero, zero]  # z^k, z^(k-1), z^(k-2)
    k = 0
    small_run = 0
    with np.errstate(over="raise", invalid="raise"):
        while True:
            term0 = coef * zpow[0]
            sums[0] += term0
            if derivatives >= 1 and k >= 1:
                sums[1] += coef * k * zpow[1]
            if derivatives >= 2 and k >= 2:
                sums[2] += coef * (k * (k - 1)) * zpow[2]
            mag = np.abs(term0) * (1 + k + k * k)
            ref = np.abs(sums[0]) + 1e-300
            if np.all(mag <= tiny * ref) or np.all(coef == 0):
                small_run += 1
            else:
                small_run = 0
            if (small_run >= 2 and k > guard) or np.all(coef == 0):
                break
            coef = coef * (k - nu) / ((k + lam + 1) * (k + 1))
            zpow = [zpow[0] * z, zpow[0], zpow[1]]
            k += 1
            if k > _MAX_TERMS:
                raise SeriesOverflowError("vectorized Laguerre series failed to converge")
            if not np.all(np.isfinite(sums[0])):
                raise SeriesOverflowError("Laguerre series overflow")
    return tuple(np.asarray(s, dtype=np.float64) for s in sums)


# ---------------------------------------------------------------------------
# confluent hypergeometric U

def _kummer_m_series(a, b, prefactor, power):
    """prefactor * z**power * M(a, b, z) as a _PowerSeries."""
    cache = {}
    a_int = nearest_integer(float(a))
    terminating = a_int is not None and a_int <= 0

    def coef(k):
        if k == 0:
            cache[0] = mpmath.mpf(1)
        else:
            cache[k] = cache[k - 1] * (a + k - 1) / ((b + k - 1) * k)
        return cache[k]

    if terminating:
        coeffs = [coef(k) for k in range(-a_int + 1)]
        return _PowerSeries(prefactor, coeffs, power, finite=True)

    return _PowerSeries(prefactor, coef, power)


def _attach_ratio(series, a, b, z):
    if series.finite:
        return series

    def ratio(k):
        return abs(a + k) * z / (abs(b + k) * (k + 1))
    series.ratio_bound = ratio
    return series


def _polynomial_u(m, b):
    """U(-m, b, z) = (-1)^m sum_k C(m,k) (b+k)_{m-k} (-z)^k."""
    coeffs = []
    for k in range(m + 1):
        coeffs.append((-1) ** m * mpmath.binomial(m, k) * mpmath.rf(b + k, m - k) * (-1) ** k)
    return _PowerSeries(mpmath.mpf(1), coeffs, mpmath.mpf(0), finite=True)


def _log_branch(a, b_int, z):
    """Series for integer b >= 1 with a, a-b+1 not nonpositive integers."""
    n = b_int
    rg = mpmath.rgamma(a - n + 1)
    sign = (-1) ** n
    out = []
    # log(z)/(b-1)! * M(a, b, z)
    m_series = _kummer_m_series(a, mpmath.mpf(n), sign * rg / mpmath.factorial(n - 1),
                                mpmath.mpf(0))
    m_series.log_power = 1
    out.append(_attach_ratio(m_series, a, mpmath.mpf(n), z))

    cache = {}

    def coef(k):
        if k == 0:
            cache[0] = (mpmath.mpf(1) / mpmath.factorial(n - 1),
                        mpmath.digamma(a) - mpmath.digamma(1) - mpmath.digamma(n))
        else:
            c_prev, d_prev = cache[k - 1]
            c = c_prev * (a + k - 1) / ((k + n - 1) * k)
            d = d_prev + 1 / (a + k - 1) - mpmath.mpf(1) / k - mpmath.mpf(1) / (k + n - 1)
            cache[k] = (c, d)
        c, d = cache[k]
        return c * d

    def ratio(k):
        # digamma differences grow only logarithmically; pad the ratio bound
        return 2 * abs(a + k) * z / ((k + n) * (k + 1))
    out.append(_PowerSeries(sign * rg, coef, mpmath.mpf(0), ratio_bound=ratio))

    if n >= 2:
        coeffs = []
        for k in range(1, n):
            coeffs.append(mpmath.factorial(k - 1) / (mpmath.rf(1 - a, k) * mpmath.factorial(n - k - 1)))
        # z^{-k} for k = 1..n-1: store as descending powers starting at -(n-1)
        coeffs = coeffs[::-1]
        out.append(_PowerSeries(-sign * rg, coeffs, mpmath.mpf(-(n - 1)), finite=True))
    return out


def _two_series_branch(a, b, z):
    g1 = mpmath.gamma(1 - b) * mpmath.rgamma(a - b + 1)
    g2 = mpmath.gamma(b - 1) * mpmath.rgamma(a)
    s1 = _attach_ratio(_kummer_m_series(a, b, g1, mpmath.mpf(0)), a, b, z)
    s2 = _attach_ratio(_kummer_m_series(a - b + 1, 2 - b, g2, 1 - b), a - b + 1, 2 - b, z)
    return [s1, s2]


def hyp_u(a: float, b: float, z: float, derivative: int = 0) -> SeriesValue:
    """Confluent hypergeometric U(a, b, z) for real a, b and z > 0.

    Non-integer b uses the two Kummer-series combination; positive integer
    b uses the logarithmic series with digamma coefficients.  Nonpositive
    integer ``a`` (or ``a - b + 1``) gives a polynomial, reached directly
    or through U(a, b, z) = z^(1-b) U(a-b+1, 2-b, z).  ``derivative``
    (0, 1 or 2) differentiates every series termwise.
    """
    if derivative not in (0, 1, 2):
        raise ValueError("derivative must be 0, 1 or 2")
    if not z > 0.0:
        if z == 0.0 and b <= 1.0 and derivative == 0:
            # U(a, b, 0) = Gamma(1-b)/Gamma(a-b+1) for b < 1
            if b == 1.0:
                raise SeriesDomainError("U(a, 1, z) diverges logarithmically at z = 0")
            with mpmath.workprec(_START_BITS):
                val = mpmath.gamma(1 - b) * mpmath.rgamma(a - b + 1)
            return SeriesValue(float(val), 0.0, 1)
        raise SeriesDomainError(f"hyp_u needs z > 0 (got z={z!r}, b={b!r})")

    a_int = nearest_integer(a)
    b_int = nearest_integer(b)
    c_int = nearest_integer(a - b + 1)

    def build():
        am, bm = mpmath.mpf(a), mpmath.mpf(b)
        zm = mpmath.mpf(z)
        if a_int is not None and a_int <= 0:
            return [_polynomial_u(-a_int, bm)]
        if c_int is not None and c_int <= 0:
            poly = _polynomial_u(-c_int, 2 - bm)
            poly.power = 1 - bm
            return [poly]
        if b_int is None:
            return _two_series_branch(am, bm, zm)
        if b_int >= 1:
            return _log_branch(am, b_int, zm)
        # b a nonpositive integer: U(a,b,z) = z^{1-b} U(a-b+1, 2-b, z)
        series = _log_branch(am - bm + 1, 2 - b_int, zm)
        for s in series:
            s.power = s.power + 1 - bm
        return series

    return _evaluate(build, z, derivative)
