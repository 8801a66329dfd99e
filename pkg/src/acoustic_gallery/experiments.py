"""Admissibility, predicted exponents and dyadic ladders for the Strichartz-loss runs."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction

import numpy as np

from . import measure
from .dynamics import HalfWaveState, gallery_profiles, gallery_solution
from .fitting import ScalingFit, fit_slope
from .grids import graded_grid
from .measure import NormRequest
from .spectral import quantized_mu
from .synthesis import PacketSpec, TangentialGrid, Window, packet_data

INF = math.inf


def as_exact(x):
    """Fraction for finite rationals given as int/Fraction/str/float, inf kept as float."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "infinity", "oo"):
            return INF
        return Fraction(s)
    if isinstance(x, float):
        if math.isinf(x):
            return INF
        return Fraction(x).limit_denominator(1_000_000)
    return Fraction(x)


def inverse(x) -> Fraction:
    """1/x with 1/inf = 0."""
    return Fraction(0) if x == INF else 1 / Fraction(x)


def _fmt(x):
    if x == INF:
        return "inf"
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    return x


@dataclass(frozen=True)
class TripleSpec:
    """Exponents (q, r, gamma) of a wave or Euler Strichartz triple.

    gamma may be left as None; it is then solved from the scaling relation
    of the given kind.
    """

    q: object
    r: object
    gamma: object = None
    kind: str = "wave"
    d: int = 2
    kappa: object = Fraction(1, 2)

    def __post_init__(self):
        if self.kind not in ("wave", "euler"):
            raise ValueError("kind must be 'wave' or 'euler'")
        if self.d < 2:
            raise ValueError("d must be at least 2")
        q, r, kappa = as_exact(self.q), as_exact(self.r), as_exact(self.kappa)
        if q != INF and q < 2 or r != INF and r < 2:
            raise ValueError("q and r must be at least 2")
        if not kappa > 0:
            raise ValueError("kappa must be positive")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "kappa", kappa)
        gamma = self.solved_gamma() if self.gamma is None else as_exact(self.gamma)
        object.__setattr__(self, "gamma", gamma)

    def solved_gamma(self) -> Fraction:
        iq, ir, d = inverse(self.q), inverse(self.r), self.d
        if self.kind == "wave":
            return Fraction(d, 2) - iq - Fraction(d, 2) * ir
        return iq / 2 + d * ir - Fraction(d, 2) - 1 / (2 * self.kappa) + 1

    def as_dict(self) -> dict:
        return {f.name: _fmt(getattr(self, f.name)) for f in fields(self)}


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    sharp: bool
    pair_admissible: bool
    scaling_holds: bool
    pair_lhs: Fraction
    pair_rhs: Fraction
    scaling_lhs: Fraction
    scaling_rhs: Fraction
    messages: tuple = ()

    def __bool__(self):
        return self.admissible


def check_admissible(spec: TripleSpec) -> Admissibility:
    """Evaluate the pair inequality and the scaling relation of the triple's kind exactly."""
    iq, ir, d, g = inverse(spec.q), inverse(spec.r), spec.d, spec.gamma
    lhs = iq + Fraction(d - 1, 2) * ir
    rhs = Fraction(d - 1, 4)
    pair_ok = lhs <= rhs
    if spec.kind == "wave":
        s_lhs, s_rhs = iq + Fraction(d, 2) * ir, Fraction(d, 2) - g
    else:
        s_lhs, s_rhs = iq / 2 + d * ir, Fraction(d, 2) + 1 / (2 * spec.kappa) + g - 1
    scale_ok = s_lhs == s_rhs
    msgs = []
    if not pair_ok:
        msgs.append(f"1/q + (d-1)/(2r) = {lhs} exceeds (d-1)/4 = {rhs}")
    if not scale_ok:
        msgs.append(f"scaling relation fails: {s_lhs} != {s_rhs}")
    return Admissibility(pair_ok and scale_ok, pair_ok and lhs == rhs, pair_ok, scale_ok,
                         lhs, rhs, s_lhs, s_rhs, tuple(msgs))


@dataclass(frozen=True)
class PredictedExponents:
    """Ladder predictions.

    The three ``*_slope`` entries are log2-slopes per unit j (twice the
    exponent of 2^{2j}); ``alpha_sup`` and ``two_k0`` are exponents in the
    form they bound alpha and k.
    """

    data_norm_slope: Fraction
    solution_slope: Fraction
    second_derivative_slope: Fraction
    alpha_sup: Fraction
    two_k0: Fraction
    alternatives: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {k: _fmt(v) for k, v in asdict(self).items() if k != "alternatives"}
        out["alternatives"] = {k: _fmt(v) for k, v in self.alternatives.items()}
        return out


def predicted_exponents(spec: TripleSpec, s=0) -> PredictedExponents:
    """Predicted log2-slopes along the ladder for normalized packet data.

    Slopes are per unit j, i.e. 2 x (exponent of 2^{2j}).  For the Euler
    kind two candidate predictions exist for the second-derivative norm and
    for alpha_sup: ``alternatives`` holds the short form (no two-derivative
    gain) next to the form that counts both derivatives, which is the
    primary value.
    """
    s = as_exact(s)
    iq, g, kappa, d = inverse(spec.q), spec.gamma, spec.kappa, spec.d
    two_k0 = d + 1 + 1 / kappa
    if spec.kind == "wave":
        sol = iq + g + 1 / (2 * kappa) - 1
        hess = iq + g + 1 / (2 * kappa) + 1
        alpha = hess - s
        alt = {}
    else:
        sol = iq / 2 - g
        hess = iq / 2 - g + 2
        alpha = hess - s
        alt = {"second_derivative_slope_short": 2 * (iq / 2 - g),
               "alpha_sup_short": iq / 2 - g - s,
               "two_s_bound_short": iq - 2 * g}
    return PredictedExponents(Fraction(0), 2 * sol, 2 * hess, alpha, two_k0, alt)


def endpoint_alpha_sup(d: int, kappa, s=0) -> tuple:
    """(alpha_sup, k0 + 1/2 - s, 2 k0) for the (2, inf) wave triple."""
    spec = TripleSpec(2, INF, None, "wave", d, kappa)
    pred = predicted_exponents(spec, s)
    k0 = pred.two_k0 / 2
    return pred.alpha_sup, k0 + Fraction(1, 2) - as_exact(s), pred.two_k0


# ---------------------------------------------------------------------------
# ladders

@dataclass(frozen=True)
class LadderRow:
    j: int
    norm_name: str
    value: float

    @property
    def log2_value(self) -> float:
        return math.log2(self.value) if self.value > 0 else -math.inf


@dataclass
class LadderResult:
    spec: TripleSpec
    s: float
    js: list
    rows: list
    fits: dict
    predictions: PredictedExponents
    flags: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def values(self, name) -> np.ndarray:
        return np.array([r.value for r in self.rows if r.norm_name == name])

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.fits.values())

    def as_dict(self) -> dict:
        return {"spec": self.spec.as_dict(), "s": self.s, "js": list(self.js),
                "predictions": self.predictions.as_dict(),
                "fits": {k: v.as_dict() for k, v in self.fits.items()},
                "flags": list(self.flags), "diagnostics": self.diagnostics,
                "verdict": "pass" if self.passed else "fail"}


def _exact_phase_slices(field_or_parts, times, omega):
    """Time slices e^{i t omega} F of an exact-phase solution."""
    out = []
    for t in times:
        ph = complex(np.exp(1j * omega * t))
        if isinstance(field_or_parts, list):
            out.append([(w, f.scaled(ph)) for w, f in field_or_parts])
        else:
            out.append(field_or_parts.scaled(ph))
    return out


def run_ladder(spec: TripleSpec, j_range, s: float = 0.0, time_samples: int = 16,
               tolerance: float = 0.1, window: Window = Window(),
               normal_extent: float = 4.0, lattice_density: float = 64.0,
               oversampling: float = 4.0, t_interval=(0.0, 1.0)) -> LadderResult:
    """Measure ||psi^j||, ||grad^2 psi^j|| (L^q_t L^r_x) and the data norms over j.

    psi^j = U^j / 2^{2j(d/2 - 1/(2 kappa))} has exact time dependence
    e^{i t 2^j}; the second derivatives are assembled spectrally in x' and
    from the stored normal derivatives of B.
    """
    js = [int(j) for j in j_range]
    kappa = float(spec.kappa)
    s = float(s)
    req = NormRequest(float(spec.q), float(spec.r), tuple(t_interval), time_samples)
    pred = predicted_exponents(spec, s)
    adm = check_admissible(spec)
    rows = []
    contamination = []
    for j in js:
        pspec = PacketSpec(j, spec.d, kappa, window, normal_extent, lattice_density, oversampling)
        data = packet_data(pspec)
        contamination.append(data.profiles.contamination)
        times = req.times()
        sol = measure.mixed_norm(_exact_phase_slices(data.position, times, pspec.time_frequency), req)
        hess = measure.mixed_norm(_exact_phase_slices(data.hessian(), times, pspec.time_frequency), req)
        h = measure.h_norm(data.velocity, data.gradient(), kappa)
        h2s = measure.h2s_surrogate(h, j, s)
        rows += [LadderRow(j, "solution", sol.value), LadderRow(j, "hessian", hess.value),
                 LadderRow(j, "data_H", h), LadderRow(j, "data_H2s", h2s),
                 LadderRow(j, "ratio", hess.value / h2s)]

    def vals(name):
        return [r.value for r in rows if r.norm_name == name]

    fits = {
        "solution": fit_slope(js, vals("solution"), float(pred.solution_slope), tolerance, "solution"),
        "data_H": fit_slope(js, vals("data_H"), 0.0, min(tolerance, 0.05), "data_H"),
        "hessian": fit_slope(js, vals("hessian"), float(pred.second_derivative_slope), tolerance,
                             "hessian"),
        "ratio": fit_slope(js, vals("ratio"), float(pred.second_derivative_slope) - 2 * s,
                           tolerance, "ratio"),
    }
    flags = []
    if not adm.pair_admissible:
        flags.append("pair not wave-admissible: " + "; ".join(adm.messages))
    if spec.kind == "euler":
        short = float(pred.alternatives["second_derivative_slope_short"])
        measured = fits["hessian"].slope
        flags.append(
            "two candidate predictions for the second-derivative slope: "
            f"{float(pred.second_derivative_slope):g} (counting both derivatives) and {short:g} "
            f"(short form); measured {measured:.4f}")
        diagnostics_short = {"hessian_short_prediction": short,
                             "hessian_short_verdict":
                                 "pass" if abs(measured - short) <= tolerance else "fail"}
    else:
        diagnostics_short = {}
    alpha = float(pred.alpha_sup) / 2.0
    growth = [2.0 ** (-2 * j * alpha) * v for j, v in zip(js, vals("ratio"))]
    increasing = bool(np.all(np.diff(growth) > 0))
    diag = {"alpha_used": alpha, "alpha_scaled_ratio": growth,
            "alpha_scaled_ratio_increasing": increasing,
            "max_contamination_bound": float(max(contamination)),
            "admissibility": {"pair_admissible": adm.pair_admissible,
                              "scaling_holds": adm.scaling_holds, "sharp": adm.sharp},
            **diagnostics_short}
    return LadderResult(spec, s, js, rows, fits, pred, flags, diag)


def gallery_exponent(d: int, r, kappa) -> Fraction:
    """((3d+1)/4)(1/2 - 1/r) + 1/(2 kappa) - 1."""
    return Fraction(3 * d + 1, 4) * (Fraction(1, 2) - inverse(as_exact(r))) + \
        1 / (2 * as_exact(kappa)) - 1


def sharp_q(d: int, r) -> object:
    """q with 1/q = ((d-1)/2)(1/2 - 1/r); inf when the right side vanishes."""
    iq = Fraction(d - 1, 2) * (Fraction(1, 2) - inverse(as_exact(r)))
    return INF if iq == 0 else 1 / iq


@dataclass
class GalleryLadderResult:
    n: int
    kappa: float
    d: int
    q: object
    r: object
    js: list
    rows: list
    fit: ScalingFit
    ratios: list
    spread: float
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"n": self.n, "kappa": self.kappa, "d": self.d, "q": _fmt(self.q), "r": _fmt(self.r),
                "js": list(self.js), "fit": self.fit.as_dict(), "ratios": list(self.ratios),
                "ratio_spread": self.spread, "diagnostics": self.diagnostics,
                "verdict": "pass" if self.spread <= 3.0 else "fail"}


def gallery_strichartz_ladder(n: int, kappa: float, d: int, q, r, j_range,
                              samples_per_unit_time: int = 8, t_end: float = 1.0,
                              window: Window = Window(), lattice_density: float = 64.0,
                              oversampling: float = 4.0, normal_extent: float = 40.0,
                              normal_spacing: float = 0.1, tolerance: float = 0.1
                              ) -> GalleryLadderResult:
    """Mixed norm of the gallery wave with data (P phi, 0) against the energy of its data.

    The data is phi_hat = a(2^{-2j} xi'); the tangential factor evolves by
    cos(t sqrt(mu |xi'|)) and is synthesized against B(mu, |xi'| x_d) with
    mu = 2 kappa n + 1.  Time sampling is samples_per_unit_time * 2^j per
    unit time.
    """
    q, r = as_exact(q), as_exact(r)
    if inverse(q) != Fraction(d - 1, 2) * (Fraction(1, 2) - inverse(r)):
        raise ValueError("(q, r) must satisfy 1/q = ((d-1)/2)(1/2 - 1/r)")
    mu = quantized_mu(n, kappa)
    expo = gallery_exponent(d, r, kappa)
    js = [int(j) for j in j_range]
    rows, ratios, widths = [], [], []
    for j in js:
        scale = 4.0 ** j
        grid = TangentialGrid.for_packet(j, d, lattice_density, oversampling, window.epsilon)
        xd = graded_grid(normal_extent, first=1e-4, ratio=1.15, spacing=normal_spacing) / \
            ((1.0 - window.epsilon) * scale)
        state = HalfWaveState.from_window(mu, grid, scale, window)
        profiles = gallery_profiles(state, kappa, xd)
        n_t = int(samples_per_unit_time * 2 ** j * t_end) + 1
        req = NormRequest(float(q), float(r), (0.0, t_end), n_t)
        slices = [gallery_solution(state, profiles, t) for t in req.times()]
        mixed = measure.mixed_norm(slices, req)
        h = measure.h_norm(None, profiles.gradient(state.spectrum), kappa)
        ratio = mixed.value / (scale ** float(expo) * h)
        rows += [LadderRow(j, "mixed", mixed.value), LadderRow(j, "data_H", h),
                 LadderRow(j, "ratio", ratio)]
        ratios.append(ratio)
        widths.append(float(mixed.per_time_values[-1] / mixed.per_time_values[0]))
    mixed_vals = [rw.value / hv.value for rw, hv in zip(
        [x for x in rows if x.norm_name == "mixed"], [x for x in rows if x.norm_name == "data_H"])]
    fit = fit_slope(js, mixed_vals, 2 * float(expo), tolerance, "mixed_over_H")
    spread = float(max(ratios) / min(ratios))
    return GalleryLadderResult(n, kappa, d, q, r, js, rows, fit, ratios, spread,
                               {"exponent": _fmt(expo), "mu": mu,
                                "final_to_initial_sup": widths})


@dataclass
class EquivalenceResult:
    mode: object
    js: list
    value_ratios: list
    gradient_ratios: list

    @staticmethod
    def _variation(v):
        return float(max(v) / min(v) - 1.0)

    @property
    def value_variation(self) -> float:
        return self._variation(self.value_ratios)

    @property
    def gradient_variation(self) -> float:
        return self._variation(self.gradient_ratios)

    def as_dict(self) -> dict:
        return {"kappa": self.mode.kappa, "mu": self.mode.mu, "js": list(self.js),
                "value_ratios": list(self.value_ratios),
                "gradient_ratios": list(self.gradient_ratios),
                "value_variation": self.value_variation,
                "gradient_variation": self.gradient_variation}


def equivalence_ladder(mode, d: int, j_range, seed: int = 0, window: Window = Window(),
                       lattice_density: float = 64.0, oversampling: float = 4.0,
                       normal_extent: float = 40.0) -> EquivalenceResult:
    """Weighted L^2 norms of gallery modes against powers of the data frequency.

    For each j the data is phi_hat = a(2^{-2j} xi') (1 + noise/2) with
    seeded uniform noise, and the ratios

        ||x_d^{1/(2 kappa)} u|| / ((2^{2j})^{-1/(2 kappa) - 1/2} ||phi||)
        ||x_d^{1/(2 kappa)} grad u|| / ((2^{2j})^{-1/(2 kappa) + 1/2} ||phi||)

    are returned.
    """
    rng = np.random.default_rng(seed)
    js = [int(j) for j in j_range]
    kappa, alpha = mode.kappa, 1.0 / (2.0 * mode.kappa)
    vr, gr = [], []
    for j in js:
        scale = 4.0 ** j
        grid = TangentialGrid.for_packet(j, d, lattice_density, oversampling, window.epsilon)
        state = HalfWaveState.from_window(mode.mu, grid, scale, window)
        coef = state.spectrum * (1.0 + 0.5 * rng.random(state.spectrum.size))
        xd = graded_grid(normal_extent, first=1e-4, ratio=1.15, spacing=0.05) / \
            ((1.0 - window.epsilon) * scale)
        profiles = gallery_profiles(state, kappa, xd)
        u = profiles.field(coef)
        phi_norm = math.sqrt(float(np.sum(np.abs(coef) ** 2)) / grid.box_length ** grid.m)
        vr.append(measure.weighted_l2(u, alpha) / (scale ** (-alpha - 0.5) * phi_norm))
        gr.append(measure.weighted_l2(profiles.gradient(coef), alpha)
                  / (scale ** (-alpha + 0.5) * phi_norm))
    return EquivalenceResult(mode, js, vr, gr)


# ---------------------------------------------------------------------------
# configuration files

@dataclass(frozen=True)
class ExperimentConfig:
    d: int = 2
    kappa: object = Fraction(1, 2)
    kind: str = "wave"
    q: object = 2
    r: object = INF
    gamma: object = None
    s: object = 0
    j_min: int = 3
    j_max: int = 8
    epsilon: float = 0.1
    lattice_density: float = 64.0
    oversampling: float = 4.0
    normal_extent: float = 4.0
    time_samples: int = 16
    tolerance: float = 0.1

    def triple(self) -> TripleSpec:
        return TripleSpec(self.q, self.r, self.gamma, self.kind, self.d, self.kappa)

    def as_dict(self) -> dict:
        return {f.name: _fmt(getattr(self, f.name)) for f in fields(self)}


_CONFIG_TYPES = {"d": int, "j_min": int, "j_max": int, "time_samples": int,
                 "kind": str, "kappa": as_exact, "q": as_exact, "r": as_exact,
                 "gamma": as_exact, "s": as_exact, "epsilon": float, "lattice_density": float,
                 "oversampling": float, "normal_extent": float, "tolerance": float}


def parse_config(text: str) -> ExperimentConfig:
    """Flat ``key = value`` lines; '#' starts a comment; unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in _CONFIG_TYPES:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _CONFIG_TYPES[key](val)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    cfg = ExperimentConfig(**values)
    if cfg.j_min > cfg.j_max or cfg.j_min < 0:
        raise ValueError("need 0 <= j_min <= j_max")
    if not 0 < cfg.epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    cfg.triple()
    return cfg


def run_config(cfg: ExperimentConfig) -> LadderResult:
    return run_ladder(cfg.triple(), range(cfg.j_min, cfg.j_max + 1), float(cfg.s),
                      cfg.time_samples, cfg.tolerance, Window(cfg.epsilon), cfg.normal_extent,
                      cfg.lattice_density, cfg.oversampling)
