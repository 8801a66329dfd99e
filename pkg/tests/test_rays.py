import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from acoustic_gallery import rays


@st.composite
def characteristic_states(draw, dim=None):
    m = draw(st.sampled_from([1, 2])) if dim is None else dim - 1
    kappa = draw(st.floats(0.3, 3.0))
    xd = draw(st.floats(0.1, 3.0))
    xid = draw(st.floats(-3.0, 3.0))
    xip = tuple(draw(st.floats(-3.0, 3.0)) for _ in range(m))
    assume(math.sqrt(sum(v * v for v in xip)) >= 0.2)
    xp = tuple(draw(st.floats(-5.0, 5.0)) for _ in range(m))
    forward = draw(st.booleans())
    return rays.PhaseState.on_characteristic_set(xd, xp, xid, xip, kappa, forward=forward), kappa


def _close(a, b, tol):
    va, vb = a.as_vector(), b.as_vector()
    return np.max(np.abs(va - vb) / np.maximum(1.0, np.abs(vb))) <= tol


def test_hamiltonian_examples():
    assert rays.hamiltonian(rays.PhaseState(0, 0.0, (0.0,), 0.0, 3.0, (5.0,)), 1.0) == 0.0
    assert rays.hamiltonian(rays.PhaseState(0, 1.0, (0.0,), 1.0, 0.0, (1.0,)), 1.0) == 0.0
    assert rays.hamiltonian(rays.PhaseState(0, 3.0, (0.0,), 0.0, 1.0, (2.0,)), 2.0) == 30.0


def test_state_rejects_negative_height():
    with pytest.raises(ValueError, match="xd must be"):
        rays.PhaseState(0, -1.0, (0.0,), 1.0, 0.0, (1.0,))


def test_flow_identity_at_zero():
    st0 = rays.PhaseState(0, 1.0, (0.0,), 1.0, 0.0, (1.0,))
    assert rays.closed_form_flow(st0, 1.0, 0.0) == st0


def test_vertical_branch():
    st0 = rays.PhaseState(0, 1.0, (0.0,), -1.0, 1.0, (0.0,))
    out = rays.closed_form_flow(st0, 1.0, 1.0)
    assert out.xd == pytest.approx(4.0, rel=1e-14)
    num = rays.numeric_flow(st0, 1.0, 1.0)
    assert num.xd == pytest.approx(4.0, rel=1e-8)


def test_periodic_branch_touches_at_quarter_period():
    st0 = rays.PhaseState(0, 1.0, (0.0,), -1.0, 0.0, (1.0,))
    for s in (0.3, 1.1):
        xd = rays.closed_form_flow(st0, 1.0, s, check_segment=False).xd
        assert xd == pytest.approx(0.5 + math.cos(2 * s) / 2, abs=1e-14)
    assert rays.closed_form_flow(st0, 1.0, math.pi / 2, check_segment=False).xd <= 1e-15
    assert rays.collision_parameters(st0, 1.0, [-1])[0] == pytest.approx(math.pi / 2, rel=1e-15)


def test_collision_spacing_formula():
    st0 = rays.PhaseState(0, 1.0, (0.0,), -math.pi, 0.0, (math.pi,))
    s = rays.collision_parameters(st0, 1.0, range(-3, 3))
    assert np.allclose(np.diff(s), -1.0, rtol=0, atol=1e-14)


@pytest.mark.parametrize("j", [0, 2, 4])
def test_collision_time_spacing(j):
    st0 = rays.PhaseState(0, 1.0, (0.0,), 2.0 ** j, 0.0, (4.0 ** j,))
    path = rays.reflect_and_continue(rays.trace(st0, 1.0), 3)
    dt = np.diff([c.t for c in path.collisions])
    assert np.allclose(dt, 2 * math.pi * 2.0 ** -j, rtol=1e-12)


def test_hop_and_continuity():
    st0 = rays.PhaseState(0, 1.0, (0.0,), 1.0, 0.0, (1.0,))
    path = rays.reflect_and_continue(rays.trace(st0, 1.0), 5)
    assert len(path.segments) == 6 and len(path.collisions) == 5
    xp = np.array([c.xp[0] for c in path.collisions])
    assert np.allclose(np.abs(np.diff(xp)), math.pi * st0.xd, rtol=1e-12)
    assert np.abs(rays.hop_displacement(st0))[0] == pytest.approx(math.pi, rel=1e-15)
    for a, b in zip(path.segments[:-1], path.segments[1:]):
        left = rays.closed_form_flow(st0, 1.0, a.s_end, check_segment=False)
        right = b.state
        assert abs(left.t - right.t) <= 1e-12
        assert abs(left.xd - right.xd) <= 1e-12
        assert abs(left.xp[0] - right.xp[0]) <= 1e-12


def test_sampled_path_rows():
    st0 = rays.PhaseState(0, 1.0, (0.0,), 1.0, 0.0, (1.0,))
    rows = rays.reflect_and_continue(rays.trace(st0, 1.0), 2).sample(8)
    assert rows.shape == (24, 2 + 2 * st0.dim + 2)
    assert np.all(rows[:, 3] >= 0)
    assert np.all(np.diff(rows[:, 2]) >= -1e-12)


def test_collisions_per_unit_time_grow_like_2_to_j():
    counts = []
    for j in range(4, 10):
        st0 = rays.PhaseState(0, 1.0, (0.0,), 2.0 ** j, 0.0, (4.0 ** j,))
        n = rays.collisions_in_time(st0, 1.0, 1.0)
        assert abs(n - 2.0 ** j / (2 * math.pi)) <= 1.0
        counts.append(n)
    slope = np.polyfit(range(4, 10), np.log2(counts), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.1)


def test_dwell_fraction_limits():
    st0 = rays.PhaseState(0, 1.0, (0.0,), -1.0, 0.0, (1.0,))
    assert rays.dwell_fraction(st0, 1.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    for c in (1e-2, 1e-3, 1e-4):
        ratio = rays.dwell_fraction(st0, 1.0, c) / math.sqrt(c)
        assert 0.5 <= ratio <= 1.5
        # x_d = cos^2 over a period: fraction = (2/pi) arcsin(sqrt c)
        assert rays.dwell_fraction(st0, 1.0, c) == pytest.approx(
            2 / math.pi * math.asin(math.sqrt(c)), rel=1e-9)


@given(st.floats(0.2, 10.0), st.floats(0.1, 10.0), st.floats(0.3, 3.0))
def test_dwell_fraction_independent_of_frequencies(xip, xd, kappa):
    a = rays.PhaseState.on_characteristic_set(xd, (0.0,), 0.0, (xip,), kappa)
    b = rays.PhaseState.on_characteristic_set(xd, (0.0,), 0.0, (1.0,), 1.0)
    assert rays.dwell_fraction(a, kappa, 1e-3) == pytest.approx(
        rays.dwell_fraction(b, 1.0, 1e-3), rel=1e-9)


@given(characteristic_states())
def test_numeric_flow_matches_closed_form(case):
    st0, kappa = case
    end = rays.trace(st0, kappa).segments[0].s_end
    s = end / 2
    a = rays.closed_form_flow(st0, kappa, s)
    b = rays.numeric_flow(st0, kappa, s)
    assert _close(b, a, 1e-6)
    assert b.tau == st0.tau
    assert b.xip == pytest.approx(st0.xip, abs=1e-14)
    scale = kappa * b.xd * (b.xid ** 2 + b.xip_norm ** 2) + b.tau ** 2
    assert abs(rays.hamiltonian(b, kappa)) <= 1e-8 * scale


@given(characteristic_states())
def test_closed_form_invariants(case):
    st0, kappa = case
    end = rays.trace(st0, kappa).segments[0].s_end
    for frac in (0.1, 0.5, 0.9):
        out = rays.closed_form_flow(st0, kappa, frac * end)
        assert out.tau == st0.tau and out.xip == st0.xip
        scale = kappa * out.xd * (out.xid ** 2 + out.xip_norm ** 2) + out.tau ** 2
        assert abs(rays.hamiltonian(out, kappa)) <= 1e-9 * scale


@given(characteristic_states(), st.floats(0.05, 0.45), st.floats(0.05, 0.45))
def test_group_property(case, f1, f2):
    st0, kappa = case
    end = rays.trace(st0, kappa).segments[0].s_end
    s1, s2 = f1 * end, f2 * end
    mid = rays.closed_form_flow(st0, kappa, s1)
    a = rays.closed_form_flow(mid, kappa, s2)
    b = rays.closed_form_flow(st0, kappa, s1 + s2)
    assert _close(a, b, 1e-9)


@given(characteristic_states())
def test_measured_collision_spacing(case):
    st0, kappa = case
    s = rays.measured_collisions(st0, kappa, range(-3, 3))
    spacing = math.pi / (kappa * st0.xip_norm)
    assert np.allclose(np.diff(s), spacing, rtol=1e-9, atol=0)
    for sk in s:
        xd = rays.closed_form_flow(st0, kappa, sk, check_segment=False).xd
        assert xd <= 1e-9 * st0.xd


@given(characteristic_states(), st.floats(0.25, 4.0))
def test_scaling_law_maps_rays_to_rays(case, lam):
    st0, kappa = case
    end = rays.trace(st0, kappa).segments[0].s_end
    s = 0.4 * end

    def scale(p):
        return rays.PhaseState(lam * p.t, lam ** 2 * p.xd, tuple(lam ** 2 * v for v in p.xp),
                               p.tau / lam, p.xid / lam ** 2, tuple(v / lam ** 2 for v in p.xip))

    a = scale(rays.closed_form_flow(st0, kappa, s))
    b = rays.closed_form_flow(scale(st0), kappa, lam ** 2 * s)
    assert _close(a, b, 1e-9)


def test_trace_requires_tangential_frequency():
    st0 = rays.PhaseState(0, 1.0, (0.0,), -1.0, 1.0, (0.0,))
    with pytest.raises(rays.BranchError):
        rays.trace(st0, 1.0)
