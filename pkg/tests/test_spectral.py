import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from acoustic_gallery import spectral as sp

KAPPAS = [0.5, 2.0 / 3.0, 1.0, 2.0]


def test_quantized_mu_examples():
    assert sp.quantized_mu(0, 0.7) == 1.0
    assert sp.quantized_mu(1, 0.5) == 2.0
    assert sp.quantized_mu(3, 1.0) == 7.0


def test_mode_spec_validation():
    with pytest.raises(ValueError):
        sp.ModeSpec(1.0, 3.0, n=2)
    with pytest.raises(ValueError):
        sp.ModeSpec(-1.0, 1.0)


def test_mu_one_profile_is_exponential():
    prof = sp.closed_form_profile(sp.ModeSpec(0.8, 1.0), s_max=30)
    e = np.exp(-prof.s_grid)
    assert np.max(np.abs(prof.B - e)) <= 1e-14
    assert sp.mode_ode_residual(prof) <= 1e-10


def test_degree_two_profile_matches_rational_polynomial():
    prof = sp.closed_form_profile(sp.ModeSpec.quantized(2, 1.0), s_max=30)
    for s, b in zip(prof.s_grid[::37], prof.B[::37]):
        x = Fraction(2 * s)
        poly = 1 - 2 * x + x * x / 2  # L^0_2(x), L^0_2(0) = 1
        assert b == pytest.approx(float(poly) * math.exp(-s), abs=1e-13)


def test_quantized_residual_small():
    prof = sp.closed_form_profile(sp.ModeSpec.quantized(1, 0.5), s_max=30)
    assert sp.mode_ode_residual(prof) <= 1e-8


def test_perturbed_profile_residual_large():
    prof = sp.closed_form_profile(sp.ModeSpec.quantized(1, 0.5), s_max=30)
    s = prof.s_grid
    bad = sp.ModeProfile(prof.spec, s, prof.B + 1e-3 * s, prof.dB + 1e-3, prof.d2B,
                         prof.truncation_s_max)
    assert sp.mode_ode_residual(bad) >= 1e-4


@pytest.mark.parametrize("kappa", KAPPAS)
@pytest.mark.parametrize("n", [0, 3, 10])
def test_frobenius_condition(kappa, n):
    prof = sp.closed_form_profile(sp.ModeSpec.quantized(n, kappa), s_max=30)
    assert prof.B[0] == 1.0
    assert prof.dB[0] == -prof.spec.mu


def test_non_quantized_profile_is_refused():
    with pytest.raises(sp.ContaminationError):
        sp.closed_form_profile(sp.ModeSpec(1.0, 2.5), s_max=30)


def test_quadratic_form_exponential():
    prof = sp.closed_form_profile(sp.ModeSpec(1.0, 1.0), s_max=30)
    assert sp.quadratic_form(prof, 1.0, 1.0) == pytest.approx(0.5, abs=1e-6)


def test_quadratic_form_zero_profile():
    prof = sp.closed_form_profile(sp.ModeSpec(1.0, 1.0), s_max=30)
    zero = sp.ModeProfile(prof.spec, prof.s_grid, 0 * prof.B, 0 * prof.B, 0 * prof.B, 30.0)
    assert sp.quadratic_form(zero, 1.0, 1.0) == 0.0


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
def test_quadratic_form_scaling(kappa):
    prof = sp.closed_form_profile(sp.ModeSpec.quantized(2, kappa), s_max=40)
    ratio = sp.quadratic_form(prof, 2.0, kappa) / sp.quadratic_form(prof, 1.0, kappa)
    assert ratio == pytest.approx(2.0 ** (-1.0 / kappa) * 2.0, rel=1e-12)


def test_quadratic_form_rejects_singular_branch():
    kappa = 0.5
    s = sp.default_grid(30)
    s = np.r_[1e-7, s[s > 0]]
    b = 1e-7 * s ** (1.0 - 1.0 / kappa)
    prof = sp.ModeProfile(sp.ModeSpec(kappa, 2.0), s, b, -b / s, 2 * b / s ** 2, 30.0)
    with pytest.raises(sp.DivergenceError):
        sp.quadratic_form(prof, 1.0, kappa)


def test_shooting_oracle_exponential():
    prof = sp.shooting_oracle(sp.ModeSpec(1.0, 1.0), s_max=20)
    assert np.max(np.abs(prof.B - np.exp(-prof.s_grid))) <= 1e-7


def test_shooting_oracle_matches_closed_form():
    spec = sp.ModeSpec.quantized(1, 0.5)
    a = sp.shooting_oracle(spec, s_max=20)
    b = sp.closed_form_profile(spec, s_grid=a.s_grid)
    assert np.max(np.abs(a.B - b.B)) / np.max(np.abs(b.B)) <= 1e-6


def test_shooting_oracle_detects_growth():
    with pytest.raises(sp.ModeInstabilityError):
        sp.shooting_oracle(sp.ModeSpec(1.0, 1.5), s_max=20)


@given(st.sampled_from(KAPPAS), st.integers(0, 10))
def test_closed_form_agrees_with_shooting(kappa, n):
    spec = sp.ModeSpec.quantized(n, kappa)
    a = sp.shooting_oracle(spec, s_max=20)
    b = sp.closed_form_profile(spec, s_grid=a.s_grid)
    assert np.max(np.abs(a.B - b.B)) / np.max(np.abs(b.B)) <= 1e-6
    assert sp.mode_ode_residual(b) <= 1e-8


def test_wkb_exponential_profile():
    rep = sp.wkb_diagnostics(sp.closed_form_profile(sp.ModeSpec(1.0, 1.0), s_max=30))
    assert rep.small_s_log_derivative == pytest.approx(-1.0, abs=1e-3)
    assert rep.large_s_log_derivative == pytest.approx(-1.0, abs=1e-3)


def test_wkb_high_mode():
    rep = sp.wkb_diagnostics(sp.closed_form_profile(sp.ModeSpec.quantized(20, 1.0), s_max=120))
    assert len(rep.zero_spacing_values) >= 3
    assert rep.zero_spacing_deviation <= 0.10
    assert rep.small_s_deviation <= 1e-3


def test_evaluate_profile_broadcasts():
    B, dB, d2B = sp.evaluate_profile(1.0, np.array([[1.0], [3.0]]), np.linspace(0, 5, 7))
    assert B.shape == (2, 7)
    ref = sp.closed_form_profile(sp.ModeSpec(1.0, 3.0), s_grid=np.linspace(0, 5, 16))
    assert B[1, 0] == pytest.approx(1.0)
    assert dB[1, 0] == pytest.approx(-3.0)
    assert ref.B[0] == 1.0


def test_contamination_estimate_zero_for_quantized():
    assert sp.contamination_estimate(0.5, sp.quantized_mu(4, 0.5), 40.0) == 0.0
    assert sp.contamination_estimate(1.0, 1.01, 40.0) > 0.0
