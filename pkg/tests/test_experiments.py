import numpy as np
import pytest

from minskylab.dynamics import Constant, LinearRamp, StepDown, StochasticAnnual, classify_behaviour
from minskylab.equilibrium import fixed_point
from minskylab.experiments import (MC_FIELDS, catalog, get_scenario, is_crisis_verdict, monte_carlo, run_seed,
                                   splitmix64, sweep, transition_report)
from minskylab.model import phillips


def test_splitmix64_reference_values():
    # First outputs of the reference generator seeded with 0.
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4
    seeds = {run_seed(0, i) for i in range(10_000)}
    assert len(seeds) == 10_000


def test_catalog_contents():
    scs = catalog()
    names = [s.name for s in scs]
    assert len(names) == len(set(names))
    for required in ["fig1-row1-alpha0.02", "fig1-row4-alpha0", "fig2-bottom-mean0", "fig3-step", "fig3-ramp",
                     "fig3-stochastic", "fig4-alpha0.02", "fix-row2-d0"]:
        assert required in names
    row2 = get_scenario("fig1-row2-alpha0.02")
    p = row2.params
    assert (p.theta1, p.theta2, p.eta1, p.eta2, p.d0) == (0.5, 0.5, 5.0, 2.0, 0.5)
    assert row2.driver == Constant(0.02) and row2.init is None
    assert get_scenario("fig3-step").driver == StepDown(0.02, 0.0, 50.0)
    assert get_scenario("fig3-ramp").driver == LinearRamp(0.02, 0.0, 50.0, 60.0)
    bottom = get_scenario("fig2-bottom-mean0")
    assert (bottom.params.theta1, bottom.params.theta2, bottom.params.eta1, bottom.params.eta2) == (0.1, 0.1, 0, 0)
    assert isinstance(bottom.driver, StochasticAnnual) and bottom.driver.mean == 0.0 and bottom.driver.std_dev == 0.01
    assert get_scenario("fig4-alpha0").params.r == 0.1
    with pytest.raises(KeyError):
        get_scenario("nope")


def test_catalog_closure():
    for sc in catalog():
        assert sc.run().termination.kind in ("completed", "crisis"), sc.name


def test_monte_carlo_single_run_matches_trajectory():
    sc = get_scenario("fig2-top-mean0.02")
    mc = monte_carlo(sc, n_runs=1, base_seed=11)
    tr = sc.driver.with_seed(run_seed(11, 0))
    single = type(sc)(sc.name, sc.params, tr, sc.init, sc.config).run()
    assert not single.crisis
    for f in MC_FIELDS:
        assert np.all(mc.std[f] == 0.0)
    assert np.allclose(mc.mean["employment"], single.employment, rtol=0, atol=1e-15)
    assert np.allclose(mc.mean["growth"], single.growth, rtol=0, atol=1e-14)


def test_monte_carlo_deterministic_and_chunk_independent():
    sc = get_scenario("fig2-top-mean0")
    a = monte_carlo(sc, n_runs=40, base_seed=5)
    b = monte_carlo(sc, n_runs=40, base_seed=5)
    for f in MC_FIELDS:
        assert np.array_equal(a.mean[f], b.mean[f], equal_nan=True)
        assert np.array_equal(a.std[f], b.std[f], equal_nan=True)
    c = monte_carlo(sc, n_runs=40, base_seed=5, chunk_size=7)
    for f in MC_FIELDS:
        assert np.allclose(a.mean[f], c.mean[f], rtol=1e-12, atol=1e-14, equal_nan=True)
        assert np.allclose(a.std[f], c.std[f], rtol=1e-9, atol=1e-12, equal_nan=True)
    d = monte_carlo(sc, n_runs=40, base_seed=6)
    assert not np.array_equal(a.mean["employment"], d.mean["employment"])


def test_monte_carlo_crisis_runs_drop_out():
    sc = get_scenario("fig2-top-mean0")
    mc = monte_carlo(sc, n_runs=60, base_seed=1)
    assert mc.crisis_count == sum(t.is_crisis for t in mc.terminations)
    assert mc.counts[0] == 60 and np.all(np.diff(mc.counts) <= 0)
    assert mc.counts[-1] == 60 - mc.crisis_count
    assert len(set(mc.seeds)) == 60
    assert mc.min_employment.shape == (60,)


def test_monte_carlo_population_std():
    sc = get_scenario("fig2-bottom-mean0")
    mc = monte_carlo(sc, n_runs=5, base_seed=2)
    trajs = [type(sc)(sc.name, sc.params, sc.driver.with_seed(s), sc.init, sc.config).run() for s in mc.seeds]
    lam = np.array([t.employment for t in trajs])
    assert np.allclose(mc.mean["employment"], lam.mean(axis=0), atol=1e-14)
    assert np.allclose(mc.std["employment"], lam.std(axis=0, ddof=0), atol=1e-12)


def test_monte_carlo_rejects_deterministic():
    with pytest.raises(ValueError):
        monte_carlo(get_scenario("fig1-row1-alpha0"), n_runs=2)


def test_sweep_theta1_frontier():
    base = get_scenario("fig1-row2-alpha0.02")
    res = sweep(base, {"theta1": [0.25, 0.5, 0.75]})
    crisis = [is_crisis_verdict(v) for _, v, _ in res.cells()]
    assert crisis[0] is False and crisis[1] is True
    assert crisis == sorted(crisis)  # once a crisis appears it persists


def test_sweep_d0_and_grid():
    base = get_scenario("fig1-row2-alpha0.02")
    res = sweep(base, {"d0": [0.3, 0.5]})
    assert [is_crisis_verdict(v) for v in res.verdicts] == [False, True]
    grid = sweep(base, {"theta1": [0.25, 0.5, 0.75], "theta2": [0.25, 0.5, 0.75]})
    assert grid.verdicts.shape == (3, 3)
    assert not is_crisis_verdict(grid.verdicts[0, 0]) and is_crisis_verdict(grid.verdicts[2, 2])
    assert np.isnan(grid.crisis_times[0, 0]) and grid.crisis_times[2, 2] > 0


def test_sweep_single_cell_matches_run():
    for name in ("fig1-row2-alpha0.02", "fig1-row1-alpha0"):
        base = get_scenario(name)
        res = sweep(base, {"theta1": [base.params.theta1]})
        assert res.verdicts[0] == classify_behaviour(base.run()).value


def test_sweep_errors_are_recorded():
    base = get_scenario("fig1-row2-alpha0.02")
    res = sweep(base, {"alpha": [0.02, -0.05]})
    assert res.verdicts[1].startswith("error:")
    with pytest.raises(ValueError):
        sweep(base, {"theta1": list(np.linspace(0.1, 1, 10))}, max_cells=5)
    with pytest.raises(ValueError):
        sweep(base, {"bogus": [1.0]})


@pytest.mark.parametrize("name,low", [("fig3-step", 0.863), ("fig3-ramp", 0.881)])
def test_transition_lows(name, low):
    rep = transition_report(get_scenario(name).run(), 50.0)
    assert rep.post_min_employment == pytest.approx(low, abs=0.01)
    assert rep.post_mean_wage_share > rep.pre_mean_wage_share


def test_stochastic_transition_raises_wage_share():
    tr = get_scenario("fig3-stochastic").run()
    rep = transition_report(tr, 50.0)
    assert rep.post_mean_wage_share > rep.pre_mean_wage_share


def test_stochastic_employment_sits_below_fixed_point():
    # A stationary wages share needs the time mean of Phi(lambda) to equal mean alpha.
    # Phi is convex, so the time mean of lambda itself falls below Phi^-1(alpha).
    sc = get_scenario("fig2-top-mean0.02")
    lam_bar = fixed_point(sc.params, 0.02).lambda_bar
    phi, lam = [], []
    for i in range(20):
        tr = type(sc)(sc.name, sc.params, sc.driver.with_seed(run_seed(7, i)), sc.init, sc.config).run()
        late = tr.times >= 50
        phi.append(np.mean(phillips(sc.params.phillips, tr.employment[late])))
        lam.append(np.mean(tr.employment[late]))
    assert np.mean(phi) == pytest.approx(0.02, abs=2e-3)
    assert lam_bar - 0.03 < np.mean(lam) < lam_bar
