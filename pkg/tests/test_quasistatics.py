import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from screwtool.kinematics import alpha_bounds
from screwtool.params import GripperParams, ToolParams
from screwtool.quasistatics import (SCREW_TABLE, SingularityError, d_finger, fastenable_screws,
                                    grip_pressure, hold_condition, hold_limit, largest_screw,
                                    spring_torque, stalls, torque_curve, torque_squeeze,
                                    torque_stretch)

P0 = ToolParams(gamma=0.0)        # no preload, as in the hand-checked examples
A_MIN, A_INIT = alpha_bounds(P0)

# mpmath reference values
T_SPRG_CLOSED = 247.922052416630811
P_GRIP_CLOSED = 13.1687734473983539
HOLD_50N = 176.705970470722918
D_FGR_10_35_57 = 37.7401755575440813
T_SQZ_45 = 5318.67120109296876
T_STCH_CLOSED = 592.594805132925925


def test_spring_torque():
    assert spring_torque(A_INIT, P0) == 0
    assert spring_torque(A_MIN, P0) == pytest.approx(T_SPRG_CLOSED, abs=1e-9)
    assert spring_torque(A_INIT, P0.with_(gamma=10)) == pytest.approx(60)
    # per-degree accumulation
    steps = np.diff(np.linspace(A_MIN, A_INIT, 4001))
    assert np.sum(6.0 * steps) == pytest.approx(spring_torque(A_MIN, P0))


def test_spring_torque_strict_sign():
    assert spring_torque(A_MIN, P0, strict_sign=True) == pytest.approx(-T_SPRG_CLOSED)
    assert spring_torque(A_MIN, P0, n_springs=4) == pytest.approx(4 * T_SPRG_CLOSED)


def test_grip_pressure():
    assert grip_pressure(A_INIT, P0) == 0
    assert grip_pressure(A_MIN, P0) == pytest.approx(P_GRIP_CLOSED, abs=1e-9)
    with pytest.raises(SingularityError):
        grip_pressure(90, P0)


@settings(max_examples=100, deadline=None)
@given(st.floats(20, 61), st.floats(0.1, 50), st.floats(0, 500))
def test_grip_pressure_linear(alpha, xi, t_rtct):
    p = P0.with_(xi=xi, t_rtct=t_rtct)
    expect = (4 * spring_torque(alpha, p) + t_rtct) / (4 * 20 * math.cos(math.radians(alpha)))
    assert grip_pressure(alpha, p) == pytest.approx(expect, rel=1e-12)
    assert grip_pressure(alpha, p.with_(xi=2 * xi, t_rtct=2 * t_rtct)) == pytest.approx(
        2 * grip_pressure(alpha, p), rel=1e-12)


def test_hold_condition():
    p = ToolParams(mu=0.5, e_soft=5, g_tool=2)
    assert hold_limit(50, p) == pytest.approx(HOLD_50N, abs=1e-9)
    h = hold_condition(HOLD_50N, 50, p)
    assert h.d_com_limit == pytest.approx(HOLD_50N)
    assert hold_condition(h.d_com_limit, 50, p).holds
    assert not hold_condition(h.d_com_limit + 1e-6, 50, p).holds
    assert hold_limit(0, p) == 0
    assert not hold_condition(1.0, 0, p).holds


@settings(max_examples=100, deadline=None)
@given(st.floats(1, 200), st.floats(0.05, 1.0), st.floats(1.0, 1.5))
def test_hold_limit_monotone(P, mu, k):
    p = ToolParams(mu=mu)
    assert hold_limit(P * k, p) >= hold_limit(P, p)
    assert hold_limit(P, p.with_(mu=mu * k)) >= hold_limit(P, p)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 500), st.floats(-10, 10))
def test_hold_iff(d, dP):
    p = ToolParams()
    h = hold_condition(d, max(0, 20 + dP), p)
    assert h.holds == (h.d_com <= h.d_com_limit)


def test_d_finger():
    g = GripperParams(w_fgr=10, l_fgr=35, beta=57)
    assert d_finger(g) == pytest.approx(D_FGR_10_35_57, abs=1e-9)
    assert d_finger(g.with_(beta=90)) == pytest.approx(45)
    assert d_finger(g.with_(beta=0)) == 0
    assert d_finger(g.with_(beta=90), "projection") == pytest.approx(35)
    with pytest.raises(ValueError):
        d_finger(g, "other")


def test_torque_examples():
    assert torque_squeeze(45, 125, 45, P0) == pytest.approx(T_SQZ_45, abs=1e-9)
    assert torque_stretch(A_MIN, 45, P0) == pytest.approx(T_STCH_CLOSED, abs=1e-9)
    assert torque_stretch(A_INIT, 45, P0) == 0
    assert torque_squeeze(A_INIT, 125, 45, P0) == pytest.approx(125 * 45)
    stall_F = spring_torque(45, P0) / (20 * math.cos(math.radians(45)))
    assert torque_squeeze(45, stall_F, 45, P0) == pytest.approx(0, abs=1e-9)
    assert torque_stretch(A_MIN, 45, P0.with_(xi=12)) == pytest.approx(2 * T_STCH_CLOSED)
    with pytest.raises(SingularityError):
        torque_stretch(90, 45, P0)


def test_negative_squeeze_returned_with_flag():
    t = torque_squeeze(A_MIN, 1.0, 45, P0)
    assert t < 0
    assert stalls(A_MIN, 1.0, 45, P0)


def test_stretch_within_loose_band():
    # preload-free stretch torque sits just below the 660-850 N*mm band
    assert 500 < torque_stretch(A_MIN, 45, P0) < 850


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 89), st.floats(0, 300), st.floats(0.1, 100), st.floats(0, 50),
       st.floats(0, 60), st.booleans())
def test_sum_identity(alpha, F, d, xi, gamma, four):
    p = ToolParams(xi=xi, gamma=gamma)
    s = torque_squeeze(alpha, F, d, p, four_spring=four) + torque_stretch(alpha, d, p, four_spring=four)
    assert s == pytest.approx(F * d, rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(20, 61), st.floats(0.5, 40), st.floats(1.01, 2.0))
def test_xi_tradeoff(alpha, xi, k):
    p = ToolParams(xi=xi)
    q = p.with_(xi=xi * k)
    assert torque_squeeze(alpha, 125, 45, q) <= torque_squeeze(alpha, 125, 45, p)
    assert torque_stretch(alpha, 45, q) >= torque_stretch(alpha, 45, p)


def test_force_shape():
    F = np.array([20.0, 60.0, 100.0, 125.0])
    t = np.array([torque_squeeze(45, f, 45, P0) for f in F])
    # linear in F at fixed alpha; the stretch torque has no F dependence at all
    assert np.allclose(np.diff(t) / np.diff(F), 45)


def test_torque_curve_csv():
    c = torque_curve(np.linspace(A_MIN, A_INIT, 11), 125, 45, P0)
    assert c.to_csv().splitlines()[0] == "alpha_deg,T_sqz_Nmm,T_stch_Nmm"
    assert len(c.to_csv().splitlines()) == 12
    with pytest.raises(ValueError):
        torque_curve([], 125, 45, P0)


# screw table -------------------------------------------------------------------

def test_table_values():
    assert SCREW_TABLE["M3"][0] == 0.56
    assert SCREW_TABLE["M3.5"][0] == 0.89
    assert SCREW_TABLE["M4"][0] == 1.31
    assert SCREW_TABLE["M5"][0] == 2.65
    assert SCREW_TABLE["M6"] == (4.50, 8.81, 11.60, 16.60, 19.40)


def test_stretch_limited_gate():
    cells = {(c.size, c.property_class) for c in fastenable_screws(4000, 850)}
    assert ("M3", "4.8") in cells
    assert ("M3.5", "4.8") not in cells
    assert ("M4", "4.8") not in cells
    assert ("M5", "4.8") not in cells


def test_single_ratchet_gate():
    cells = fastenable_screws(4040, 850, "single-ratchet")
    top = largest_screw(cells)
    assert (top.size, top.property_class) == ("M5", "4.8")


def test_zero_gate():
    assert fastenable_screws(0, 0) == []
    assert largest_screw([]) is None


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 25000), st.floats(0, 25000))
def test_gate_semantics(a, b):
    dbl = fastenable_screws(a, b)
    assert all(c.torque_Nm * 1000 <= min(a, b) for c in dbl)
    sgl = fastenable_screws(a, b, "single-ratchet")
    assert set(dbl) <= set(sgl)


def test_default_preload_reproduces_output_bands():
    # gamma = 28.5 deg and a 37.48 mm lever put both extremes inside the
    # measured squeeze (3.83-4.04 N*m) and stretch (0.66-0.85 N*m) ranges
    p = ToolParams()
    c = torque_curve(np.linspace(*alpha_bounds(p), 401), 125, 37.48, p)
    assert 3830 <= c.max_squeeze() <= 4040
    assert 660 <= c.max_stretch() <= 850
