import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from acoustic_gallery import experiments as ex
from acoustic_gallery.experiments import INF, TripleSpec


def test_sharp_admissible_in_three_dimensions():
    a = ex.check_admissible(TripleSpec(2, INF, d=3))
    assert a.admissible and a.sharp
    assert a.pair_lhs == a.pair_rhs == F(1, 2)


def test_two_infinity_not_admissible_in_two_dimensions():
    a = ex.check_admissible(TripleSpec(2, INF, d=2))
    assert not a.pair_admissible and not a
    assert a.pair_lhs == F(1, 2) and a.pair_rhs == F(1, 4)
    assert a.messages


def test_euler_gamma_solved_from_scaling_relation():
    spec = TripleSpec(2, INF, kind="euler", d=3, kappa=1)
    # 1/(2q) + d/r = d/2 + 1/(2 kappa) + gamma - 1
    assert spec.gamma == F(1, 4) - F(3, 2) - F(1, 2) + 1 == F(-3, 4)
    assert ex.check_admissible(spec).scaling_holds


def test_wave_gamma_solved():
    assert TripleSpec(4, INF, d=2).gamma == F(1) - F(1, 4)
    assert TripleSpec(2, 2, d=3).gamma == F(3, 2) - F(1, 2) - F(3, 4)


def test_explicit_gamma_can_break_scaling():
    a = ex.check_admissible(TripleSpec(4, INF, gamma=F(1, 3), d=2))
    assert a.pair_admissible and not a.scaling_holds


def test_triple_validation():
    with pytest.raises(ValueError):
        TripleSpec(1, INF)
    with pytest.raises(ValueError):
        TripleSpec(2, INF, kind="heat")
    with pytest.raises(ValueError):
        TripleSpec(2, INF, d=1)
    with pytest.raises(ValueError):
        TripleSpec(2, INF, kappa=0)


@given(st.integers(2, 4), st.sampled_from([F(1, 2), F(2, 3), F(1), F(2)]),
       st.fractions(0, F(1, 2)), st.fractions(0, F(1, 2)), st.fractions(0, 2))
def test_wave_alpha_sup_formula(d, kappa, iq, ir, s):
    q = INF if iq == 0 else 1 / iq
    r = INF if ir == 0 else 1 / ir
    spec = TripleSpec(q, r, d=d, kappa=kappa)
    p = ex.predicted_exponents(spec, s)
    assert p.alpha_sup == iq + spec.gamma + 1 / (2 * kappa) + 1 - s
    assert p.solution_slope == 2 * (iq + spec.gamma + 1 / (2 * kappa) - 1)
    assert p.second_derivative_slope == p.solution_slope + 4
    assert p.two_k0 == d + 1 + 1 / kappa
    assert p.data_norm_slope == 0


@given(st.integers(2, 4), st.sampled_from([F(1, 2), F(1), F(2)]), st.fractions(0, F(1, 2)))
def test_euler_predictions_and_alternatives(d, kappa, iq):
    q = INF if iq == 0 else 1 / iq
    spec = TripleSpec(q, INF, kind="euler", d=d, kappa=kappa)
    p = ex.predicted_exponents(spec)
    assert p.solution_slope == 2 * (iq / 2 - spec.gamma)
    assert p.second_derivative_slope == 2 * (iq / 2 - spec.gamma + 2)
    assert p.alternatives["second_derivative_slope_short"] == 2 * (iq / 2 - spec.gamma)
    assert p.alternatives["alpha_sup_short"] == iq / 2 - spec.gamma


def test_two_k0_example():
    assert ex.predicted_exponents(TripleSpec(2, INF, d=3, kappa=1)).two_k0 == 5


@given(st.integers(2, 5), st.sampled_from([F(1, 3), F(1, 2), F(2, 3), F(1), F(2)]),
       st.fractions(0, 3))
def test_endpoint_alpha_identity(d, kappa, s):
    alpha, target, two_k0 = ex.endpoint_alpha_sup(d, kappa, s)
    assert alpha == target
    assert two_k0 == d + 1 + 1 / kappa
    assert isinstance(alpha, F)


def test_gallery_exponents():
    assert ex.gallery_exponent(2, INF, F(1, 2)) == F(7, 4) * F(1, 2) + 1 - 1
    assert ex.gallery_exponent(2, 2, F(1, 3)) == F(1, 2)
    assert ex.sharp_q(2, INF) == 4
    assert ex.sharp_q(3, 2) == INF


@pytest.fixture(scope="module")
def growth():
    return ex.run_ladder(TripleSpec(2, INF, d=2, kappa=F(1, 2)), range(3, 9), s=1.0)


def test_growth_ladder_ladder_slopes(growth):
    p = growth.predictions
    assert growth.fits["solution"].slope == pytest.approx(float(p.solution_slope), abs=0.1)
    assert growth.fits["data_H"].slope == pytest.approx(0.0, abs=0.05)
    assert growth.fits["hessian"].slope == pytest.approx(float(p.second_derivative_slope), abs=0.1)
    assert growth.fits["ratio"].slope == pytest.approx(2 * (float(p.alpha_sup)), abs=0.1)
    assert growth.passed


def test_growth_ladder_ratio_grows(growth):
    assert growth.diagnostics["alpha_scaled_ratio_increasing"]
    ratio = growth.values("ratio")
    assert all(b > a for a, b in zip(ratio[1:], ratio[2:]))


def test_growth_ladder_flags_non_admissible_pair(growth):
    assert any("not wave-admissible" in f for f in growth.flags)
    d = growth.as_dict()
    assert d["verdict"] == "pass" and set(d["fits"]) == {"solution", "data_H", "hessian", "ratio"}


def test_ladder_data_norm_is_one(growth):
    for v in growth.values("data_H"):
        assert v == pytest.approx(1.0, rel=1e-3)


def test_euler_ladder_reports_both_predictions():
    spec = TripleSpec(4, INF, kind="euler", d=3, kappa=1)
    res = ex.run_ladder(spec, range(2, 5), s=0.25, lattice_density=8.0, time_samples=4)
    assert res.fits["hessian"].slope == pytest.approx(
        float(res.predictions.second_derivative_slope), abs=0.1)
    assert res.diagnostics["hessian_short_verdict"] == "fail"
    assert any("two candidate predictions" in f for f in res.flags)


@pytest.mark.parametrize("q, r", [(4, INF), (INF, 2)])
def test_gallery_ladder_bounded(q, r):
    g = ex.gallery_strichartz_ladder(0, 0.5, 2, q, r, range(2, 6))
    assert g.spread <= 3.0
    assert g.as_dict()["verdict"] == "pass"


def test_gallery_ladder_requires_sharp_pair():
    with pytest.raises(ValueError):
        ex.gallery_strichartz_ladder(0, 0.5, 2, 2, INF, range(2, 4))


def test_equivalence_ladder_ratios_flat():
    from acoustic_gallery.spectral import ModeSpec
    res = ex.equivalence_ladder(ModeSpec.quantized(1, 0.5), 2, range(2, 6))
    assert res.value_variation <= 0.2
    assert res.gradient_variation <= 0.2


def test_parse_config_roundtrip():
    cfg = ex.parse_config("d = 3\nkappa = 1  # comment\nkind = euler\nq = 4\ns = 1/4\n")
    assert cfg.d == 3 and cfg.kappa == 1 and cfg.s == F(1, 4) and cfg.r == INF
    assert cfg.triple().gamma == F(1, 8) - F(3, 2) - F(1, 2) + 1


@pytest.mark.parametrize("text", ["foo = 1", "d = 2\nd = 3", "d 2", "kappa = x",
                                  "j_min = 5\nj_max = 3", "epsilon = 0.7", "kind = heat",
                                  "q = 1"])
def test_parse_config_errors(text):
    with pytest.raises(ValueError):
        ex.parse_config(text)


def test_shipped_configs_parse():
    from pathlib import Path
    root = Path(__file__).resolve().parents[1] / "configs"
    for path in sorted(root.glob("*.cfg")):
        ex.parse_config(path.read_text())


def test_as_exact():
    assert ex.as_exact("1/2") == F(1, 2)
    assert ex.as_exact("inf") == INF
    assert ex.as_exact(0.25) == F(1, 4)
    assert math.isinf(ex.as_exact(float("inf")))
