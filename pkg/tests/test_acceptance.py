"""Acceptance criteria 1-10, one recorded pass/fail line each."""

import math
import time
from fractions import Fraction as F

import numpy as np

from acoustic_gallery import dynamics as dy
from acoustic_gallery import experiments as ex
from acoustic_gallery import measure
from acoustic_gallery import rays
from acoustic_gallery import spectral as sp
from acoustic_gallery import synthesis as sy
from acoustic_gallery.fitting import fit_slope


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_criterion_01_mode_exactness(verdict):
    with Clock() as clk:
        worst_res, worst_dev = 0.0, 0.0
        for kappa in (0.5, 2 / 3, 1.0, 2.0):
            for n in range(11):
                spec = sp.ModeSpec.quantized(n, kappa)
                oracle = sp.shooting_oracle(spec, s_max=20.0)
                prof = sp.closed_form_profile(spec, s_grid=oracle.s_grid)
                worst_res = max(worst_res, sp.mode_ode_residual(prof))
                worst_dev = max(worst_dev, float(np.max(np.abs(prof.B - oracle.B))))
    ok = worst_res <= 1e-8 and worst_dev <= 1e-6 and clk.elapsed <= 10
    verdict(1, ok, f"max ODE residual {worst_res:.2e}, max |closed - shooting| {worst_dev:.2e} "
                   f"on [0, 20], {clk.elapsed:.1f} s")
    assert ok


def _random_state(rng):
    m = int(rng.integers(1, 3))
    kappa = float(rng.uniform(0.3, 3.0))
    xip = rng.uniform(-3.0, 3.0, m)
    while np.linalg.norm(xip) < 0.2:
        xip = rng.uniform(-3.0, 3.0, m)
    st0 = rays.PhaseState.on_characteristic_set(
        float(rng.uniform(0.1, 3.0)), tuple(rng.uniform(-5.0, 5.0, m)),
        float(rng.uniform(-3.0, 3.0)), tuple(xip), kappa, forward=bool(rng.integers(2)))
    return st0, kappa


def test_criterion_02_ray_equivalence(verdict):
    rng = np.random.default_rng(20240601)
    flow_err = cons_err = spacing_err = 0.0
    with Clock() as clk:
        for _ in range(100):
            st0, kappa = _random_state(rng)
            seg = rays.trace(st0, kappa).segments[0]
            for f in (0.2, 0.5, 0.8):
                s = seg.s_start + f * (seg.s_end - seg.s_start)
                a = rays.closed_form_flow(st0, kappa, s)
                b = rays.numeric_flow(st0, kappa, s)
                va, vb = a.as_vector(), b.as_vector()
                flow_err = max(flow_err, float(np.max(np.abs(va - vb) / np.maximum(1, np.abs(va)))))
                for p in (a, b):
                    scale = kappa * p.xd * (p.xid ** 2 + p.xip_norm ** 2) + p.tau ** 2
                    cons_err = max(cons_err, abs(rays.hamiltonian(p, kappa)) / scale,
                                   abs(p.tau - st0.tau) / abs(st0.tau),
                                   float(np.max(np.abs(np.subtract(p.xip, st0.xip))))
                                   / st0.xip_norm)
            sk = rays.measured_collisions(st0, kappa, range(-2, 3))
            spacing = math.pi / (kappa * st0.xip_norm)
            spacing_err = max(spacing_err, float(np.max(np.abs(np.diff(sk) - spacing))) / spacing)
    ok = flow_err <= 1e-6 and cons_err <= 1e-8 and spacing_err <= 1e-9 and clk.elapsed <= 10
    verdict(2, ok, f"100 states: flow {flow_err:.1e}, invariants {cons_err:.1e}, "
                   f"collision spacing {spacing_err:.1e}, {clk.elapsed:.1f} s")
    assert ok


def test_criterion_03_dwell_law(verdict):
    st0 = rays.PhaseState.on_characteristic_set(1.0, (0.0,), 0.0, (1.0,), 1.0)
    with Clock() as clk:
        ratios = [rays.dwell_fraction(st0, 1.0, c) / math.sqrt(c) for c in (1e-2, 1e-3, 1e-4)]
    ok = all(0.5 <= r <= 1.5 for r in ratios) and clk.elapsed <= 5
    verdict(3, ok, "dwell/sqrt(c) = " + ", ".join(f"{r:.4f}" for r in ratios)
            + f", {clk.elapsed:.2f} s")
    assert ok


def test_criterion_04_packet_exactness(verdict):
    errs, drifts = [], []
    with Clock() as clk:
        for j in range(5):
            res = dy.packet_radial_check(sy.PacketSpec(j, 2, 0.5))
            errs.append(res.max_error)
            drifts.append(res.energy_drift)
    ok = max(errs) <= 1e-4 and max(drifts) <= 1e-6 and clk.elapsed <= 60
    verdict(4, ok, f"j=0..4: max error {max(errs):.1e}, energy drift {max(drifts):.1e}, "
                   f"{clk.elapsed:.1f} s")
    assert ok


def test_criterion_05_packet_norm_slopes(verdict):
    js = list(range(3, 9))
    d = 2
    details, ok = [], True
    with Clock() as clk:
        packets = [sy.wave_packet(sy.PacketSpec(j, d, 0.5), 0.0) for j in js]
        for r in (2.0, 4.0, math.inf):
            pred = 2 * (d - 1 - d / r)
            fit = fit_slope(js, [measure.lr_norm(u, r) for u in packets], pred, 0.1)
            ok &= abs(fit.slope - pred) <= 0.1
            details.append(f"L^{r:g} {fit.slope:.4f}/{pred:g}")
        for kappa in (0.5, 1.0):
            vals = []
            for j in js:
                data = sy.packet_data(sy.PacketSpec(j, d, kappa), normalized=False)
                vals.append(measure.h_norm(data.velocity, data.gradient(), kappa))
            pred = 2 * (d / 2 - 1 / (2 * kappa))
            fit = fit_slope(js, vals, pred, 0.1)
            ok &= abs(fit.slope - pred) <= 0.1
            details.append(f"H(kappa={kappa:g}) {fit.slope:.4f}/{pred:g}")
    ok &= clk.elapsed <= 300
    verdict(5, ok, "slopes " + ", ".join(details) + f", {clk.elapsed:.1f} s")
    assert ok


def test_criterion_06_norm_equivalence(verdict):
    details, ok = [], True
    with Clock() as clk:
        for kappa, n in ((0.5, 0), (0.5, 2), (1.0, 1)):
            res = ex.equivalence_ladder(sp.ModeSpec.quantized(n, kappa), 2, range(3, 9))
            ok &= res.value_variation <= 0.2 and res.gradient_variation <= 0.2
            details.append(f"(kappa={kappa:g}, n={n}) {res.value_variation:.3f}/"
                           f"{res.gradient_variation:.3f}")
    ok &= clk.elapsed <= 120
    verdict(6, ok, "ratio variation value/gradient " + ", ".join(details)
            + f", {clk.elapsed:.1f} s")
    assert ok


def test_criterion_07_dispersive_decay(verdict):
    details, ok = [], True
    with Clock() as clk:
        for d, top in ((2, 1e4), (3, 2e3)):
            fit, _ = dy.dispersive_decay_fit(d, np.geomspace(1e2, top, 7), tolerance=0.05)
            pred = -(d - 1) / 2
            ok &= abs(fit.slope - pred) <= 0.05
            details.append(f"d={d} slope {fit.slope:.4f}/{pred:g}")
        worst = 0.0
        for n in (1, 2):
            for r0 in (0.7, 1.0, 1.4):
                z = np.zeros(n)
                z[0] = 1 / (2 * math.sqrt(r0))
                J = dy.oscillatory_J(z, 0, 1e3)
                P = dy.stationary_phase_prediction(z, 0, 1e3)
                worst = max(worst, abs(abs(P) / abs(J) - 1))
        ok &= worst <= 0.10
        details.append(f"stationary phase at lambda=1e3 within {100 * worst:.2f}%")
    ok &= clk.elapsed <= 300
    verdict(7, ok, ", ".join(details) + f", {clk.elapsed:.1f} s")
    assert ok


def test_criterion_08_growth_ladder(verdict):
    with Clock() as clk:
        spec = ex.TripleSpec(2, ex.INF, kind="wave", d=2, kappa=F(1, 2))
        res = ex.run_ladder(spec, range(3, 9), s=1.0)
        iq, s = F(1, 2), 1
        pred = float(2 * (iq + spec.gamma + 1 / (2 * spec.kappa) + 1 - s))
        slope = res.fits["ratio"].slope
        ok = abs(slope - pred) <= 0.1
        eul = ex.run_config(ex.parse_config(
            "d = 3\nkappa = 1\nkind = euler\nq = 4\ns = 1/4\nj_min = 2\nj_max = 5\n"
            "lattice_density = 16\n"))
        short = eul.diagnostics["hessian_short_prediction"]
        long_ = float(eul.predictions.second_derivative_slope)
        flagged = any("two candidate predictions" in f for f in eul.flags)
        ok &= flagged
    ok &= clk.elapsed <= 600
    verdict(8, ok, f"wave (2,inf) ratio slope {slope:.4f}/{pred:g}; euler hessian slope "
                   f"{eul.fits['hessian'].slope:.4f} vs {long_:g} (two derivatives) and "
                   f"{short:g} (short), flagged={flagged}, {clk.elapsed:.1f} s")
    assert ok


def test_criterion_09_gallery_upper_bound(verdict):
    details, ok = [], True
    with Clock() as clk:
        for q, r in ((4, ex.INF), (ex.INF, 2)):
            for kappa in (0.5, 1.0):
                g = ex.gallery_strichartz_ladder(0, kappa, 2, q, r, range(2, 7))
                ok &= g.spread <= 3.0
                details.append(f"(q,r)=({q:g},{r:g}) kappa={kappa:g} spread {g.spread:.3f}")
    ok &= clk.elapsed <= 600
    verdict(9, ok, ", ".join(details) + f", {clk.elapsed:.1f} s")
    assert ok


def test_criterion_10_endpoint_alpha(verdict):
    ok = True
    with Clock() as clk:
        for d in range(2, 7):
            for kappa in (F(1, 3), F(1, 2), F(2, 3), F(1), F(2), F(5, 2)):
                for s in (F(0), F(1, 4), F(1), F(3, 2)):
                    alpha, target, two_k0 = ex.endpoint_alpha_sup(d, kappa, s)
                    k0 = F(d + 1, 2) + 1 / (2 * kappa)
                    ok &= isinstance(alpha, F) and alpha == target == k0 + F(1, 2) - s
                    ok &= two_k0 == d + 1 + 1 / kappa
    ok &= clk.elapsed <= 1
    verdict(10, ok, f"alpha_sup = k0 + 1/2 - s exactly on 120 cases, {clk.elapsed:.3f} s")
    assert ok
