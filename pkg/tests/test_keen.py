import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from minskylab.dynamics import IntegrationConfig
from minskylab.errors import DivergentDebtError, DomainError, NoRootError
from minskylab.keen import (InvestmentFunction, KeenState, closed_form_generalized_debt, infinite_debt_attractive,
                            keen_debt_divergence, keen_derivatives, keen_fixed_point, keen_simulate,
                            keen_u_system_derivatives)
from minskylab.model import ModelParams

P = ModelParams()
ORIGINAL = InvestmentFunction(kappa3=0.0)
GENERAL = InvestmentFunction()


def test_original_fixed_point():
    fp = keen_fixed_point(P, ORIGINAL, 0.02)
    assert fp.pi_bar == pytest.approx(math.log(8) / 10, abs=1e-11)
    assert fp.d_bar == pytest.approx((0.27 - math.log(8) / 10) / 0.02, abs=1e-9)
    assert fp.d_bar == pytest.approx(3.10278, abs=2e-5)  # the quoted figure is truncated, not rounded
    assert fp.omega_bar == pytest.approx(0.636917, abs=1e-6)


@pytest.mark.parametrize("alpha,d_bar", [(0.0, 1.5412), (0.02, 1.5514)])
def test_generalized_fixed_point(alpha, d_bar):
    fp = keen_fixed_point(P, GENERAL, alpha)
    assert fp.d_bar == pytest.approx(d_bar, abs=1e-3)
    assert fp.d_bar == pytest.approx(closed_form_generalized_debt(P, GENERAL, alpha), abs=1e-10)
    assert closed_form_generalized_debt(P, GENERAL, 0.0) == pytest.approx((2.1 - math.log(6)) / 0.2, abs=1e-12)
    assert closed_form_generalized_debt(P, GENERAL, 0.02) == pytest.approx((2.7 - math.log(8)) / 0.4, abs=1e-12)
    if alpha == 0.02:
        assert fp.pi_bar == pytest.approx(0.238972, abs=1e-6)


@pytest.mark.parametrize("kappa,alpha", [(ORIGINAL, 0.02), (ORIGINAL, 0.005), (GENERAL, 0.0), (GENERAL, 0.02)])
def test_fixed_point_zeroes_field(kappa, alpha):
    fp = keen_fixed_point(P, kappa, alpha)
    assert np.max(np.abs(keen_derivatives(P, kappa, fp.state(), alpha))) < 1e-10


def test_growth_at_balanced_investment():
    pi = math.log((0.27 - 0.03) / 0.03) / 10  # kappa(pi) = 0.27
    w = 1 - pi - P.r * 1.0
    dx = keen_derivatives(P, ORIGINAL, KeenState(w, 0.9, 1.0), 0.02)
    assert dx[1] == pytest.approx(0.9 * (0.02 - 0.02), abs=1e-15)  # g = 0.27/3 - 0.07 = 0.02


def test_profit_only_depends_on_debt_through_profit_share():
    a = keen_derivatives(P, ORIGINAL, KeenState(0.7, 0.9, 1.0), 0.02)
    # Same profit share with different debt: omega and lambda rates coincide.
    b = keen_derivatives(P, ORIGINAL, KeenState(0.7 - P.r * 1.0, 0.9, 2.0), 0.02)
    assert a[1] == pytest.approx(b[1], abs=1e-15)


def test_divergence():
    alphas = [0.02, 0.01, 0.005, 0.0025]
    d = keen_debt_divergence(P, ORIGINAL, alphas)
    assert np.all(np.diff(d) > 0)
    assert keen_debt_divergence(P, ORIGINAL, [0.001])[0] > 10 * d[0]
    grid = np.linspace(0.05, 0.001, 60)
    assert np.all(np.diff(keen_debt_divergence(P, ORIGINAL, grid)) > 0)
    with pytest.raises(DivergentDebtError):
        keen_fixed_point(P, ORIGINAL, 0.0)
    with pytest.raises(DomainError):
        keen_debt_divergence(P, GENERAL, alphas)


def test_generalized_continuity_through_zero():
    assert abs(keen_fixed_point(P, GENERAL, 0.001).d_bar - keen_fixed_point(P, GENERAL, 0.0).d_bar) < 0.1


def test_no_root():
    with pytest.raises(NoRootError):
        keen_fixed_point(P, InvestmentFunction(kappa0=0.5, kappa3=0.0), 0.02)  # kappa always above target


def test_infinite_debt_attractive():
    ok, diag = infinite_debt_attractive(P, GENERAL, 0.0)
    assert ok and all(x < 0 for x in diag)
    assert not infinite_debt_attractive(P, InvestmentFunction(kappa0=0.3), 0.0)[0]
    assert infinite_debt_attractive(P, GENERAL, 0.0)[0] == infinite_debt_attractive(P, GENERAL, 0.02)[0]


@given(kappa0=st.floats(0.0, 0.5), nu=st.floats(1.0, 5.0), delta=st.floats(0.0, 0.15), r=st.floats(0.0, 0.2))
def test_infinite_debt_condition(kappa0, nu, delta, r):
    p = ModelParams(nu=nu, delta=delta, r=r)
    if abs(kappa0 / nu - delta) < 1e-12:
        return
    assert infinite_debt_attractive(p, InvestmentFunction(kappa0=kappa0), 0.0)[0] == (kappa0 / nu < delta)


def test_u_system_invariant_plane_and_origin():
    assert keen_u_system_derivatives(P, GENERAL, (0.6, 0.8, 0.0), 0.02)[2] == 0.0
    assert np.all(keen_u_system_derivatives(P, GENERAL, (0.0, 0.0, 0.0), 0.0) == 0.0)


@given(w=st.floats(0.3, 0.9), lam=st.floats(0.5, 1.0), d=st.floats(0.05, 20.0), alpha=st.floats(0.0, 0.03))
def test_u_chart_chain_rule(w, lam, d, alpha):
    for kappa in (ORIGINAL, GENERAL):
        dx = keen_derivatives(P, kappa, (w, lam, d), alpha)
        du = keen_u_system_derivatives(P, kappa, (w, lam, 1.0 / d), alpha)
        assert du[:2] == pytest.approx(dx[:2], abs=1e-12)
        assert du[2] == pytest.approx(-dx[2] / d ** 2, abs=1e-10)


def test_chart_consistency_over_ten_years():
    cfg = IntegrationConfig(horizon=10)
    init = KeenState(0.75, 0.92, 1.2)
    for kappa in (ORIGINAL, GENERAL):
        t1, xd = keen_simulate(P, kappa, init, 0.02, cfg, chart="d")
        t2, xu = keen_simulate(P, kappa, init, 0.02, cfg, chart="u")
        assert np.array_equal(t1, t2)
        assert np.max(np.abs(xd - xu)) < 1e-8


def test_simulate_rejects_bad_chart():
    with pytest.raises(ValueError):
        keen_simulate(P, GENERAL, KeenState(0.7, 0.9, 1.0), 0.02, IntegrationConfig(horizon=1), chart="x")
