import csv
import io
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minskylab import cli
from minskylab.config import load_scenario, scenario_from_dict, scenario_to_toml
from minskylab.dynamics import Constant, IntegrationConfig, StochasticAnnual
from minskylab.errors import ConfigError
from minskylab.experiments import catalog, get_scenario, monte_carlo, sweep
from minskylab.model import ModelParams
from minskylab.output import (TRAJECTORY_COLUMNS, read_ensemble_csv, read_trajectory_csv, write_sweep_csv,
                              write_trajectory_csv)
from minskylab.svg import ensemble_svg, trajectory_svg

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def scenario_dir(tmp_path):
    assert run_cli("catalog", "--write", tmp_path) == 0
    return tmp_path


# -- configuration --------------------------------------------------------

def test_empty_config_takes_defaults():
    sc = scenario_from_dict({})
    assert sc.params == ModelParams()
    assert sc.driver == Constant(0.02)
    assert sc.config == IntegrationConfig()
    assert sc.init is None


@pytest.mark.parametrize("doc,key", [
    ({"params": {"theta9": 1.0}}, "params.theta9"),
    ({"params": {"phillips": {"c5": 1.0}}}, "params.phillips.c5"),
    ({"driver": {"kind": "constant", "mean": 0.0}}, "driver.mean"),
    ({"integration": {"steps": 3}}, "integration.steps"),
    ({"extra": 1}, "top-level.extra"),
])
def test_unknown_keys_rejected(doc, key):
    with pytest.raises(ConfigError) as err:
        scenario_from_dict(doc)
    assert err.value.key == key


@pytest.mark.parametrize("doc,key", [
    ({"params": {"theta1": -1.0}}, "params.theta1"),
    ({"params": {"nu": "three"}}, "params.nu"),
    ({"driver": {"kind": "wobble"}}, "driver.kind"),
    ({"integration": {"dt": 0.03}}, "integration.dt"),
    ({"schema": 2}, "schema"),
    ({"init": {"standard": False, "explicit": {"debt": 1.0}}}, "init.explicit.d_target"),
])
def test_invalid_values_name_key(doc, key):
    with pytest.raises(ConfigError) as err:
        scenario_from_dict(doc)
    assert err.value.key == key


def test_explicit_init_and_stochastic_driver():
    sc = scenario_from_dict({
        "driver": {"kind": "stochastic", "mean": 0.0, "std_dev": 0.01, "seed": 42},
        "init": {"standard": False, "explicit": {"d_target": 1.0, "debt": 0.9, "employment": 0.93, "wage_share": 0.7}},
    })
    assert sc.driver == StochasticAnnual(0.0, 0.01, 42)
    assert sc.initial_state().debt == 0.9


def test_catalog_round_trips_through_toml():
    for sc in catalog():
        back = scenario_from_dict(tomllib.loads(scenario_to_toml(sc)), name="x")
        assert (back.name, back.params, back.driver, back.init, back.config) == \
               (sc.name, sc.params, sc.driver, sc.init, sc.config)


@settings(max_examples=50, deadline=None)
@given(theta=st.floats(0.01, 2.0), d0=st.floats(-1.0, 2.0), seed=st.integers(0, 2 ** 63 - 1), dt=st.sampled_from([0.01, 0.02, 0.05]))
def test_toml_round_trip_property(theta, d0, seed, dt):
    sc = get_scenario("fig2-top-mean0")
    sc = type(sc)("p", ModelParams(theta1=theta, d0=d0), sc.driver.with_seed(seed), None, IntegrationConfig(dt=dt))
    back = scenario_from_dict(tomllib.loads(scenario_to_toml(sc)))
    assert back.params == sc.params and back.driver == sc.driver and back.config == sc.config


def test_load_scenario_errors(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[params\n")
    with pytest.raises(ConfigError):
        load_scenario(bad)
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "missing.toml")


# -- CSV --------------------------------------------------------------------

def test_trajectory_csv_round_trip_and_identity():
    tr = get_scenario("fig1-row2-alpha0.02").run()
    buf = io.StringIO()
    n = write_trajectory_csv(tr, buf)
    buf.seek(0)
    data = read_trajectory_csv(buf)
    assert n == len(tr.times) and tuple(data) == TRAJECTORY_COLUMNS
    assert np.all(np.diff(data["t"]) > 0)
    assert np.allclose(data["employment"], tr.employment, rtol=1e-11, atol=0)
    # pi = 1 - omega - r*d on every row, to printed precision.
    resid = data["profit_share"] - (1 - data["wage_share"] - tr.params.r * data["debt"])
    assert np.max(np.abs(resid)) < 1e-11
    assert data["crisis"][-1] == 1 and data["crisis"][:-1].sum() == 0


def test_sweep_csv():
    res = sweep(get_scenario("fig1-row2-alpha0.02"), {"d0": [0.3, 0.5]})
    buf = io.StringIO()
    assert write_sweep_csv(res, buf) == 2
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["d0", "verdict", "crisis_time"]
    assert rows[1][2] == "" and float(rows[2][2]) > 0


# -- SVG --------------------------------------------------------------------

def _check_svg(text):
    root = ET.fromstring(text)
    assert root.tag.endswith("svg")
    assert "href" not in text and "<image" not in text
    lines = root.findall(".//{http://www.w3.org/2000/svg}polyline")
    assert lines
    for pl in lines:
        for pair in pl.get("points").split():
            x, y = map(float, pair.split(","))
            assert math.isfinite(x) and math.isfinite(y)
    return root


def test_trajectory_svg_wellformed():
    _check_svg(trajectory_svg(get_scenario("fig1-row3-alpha0.02").run()))


def test_ensemble_svg_wellformed_with_dotted_envelopes():
    mc = monte_carlo(get_scenario("fig2-top-mean0"), n_runs=8, base_seed=3)
    root = _check_svg(ensemble_svg(mc))
    dotted = [p for p in root.iter("{http://www.w3.org/2000/svg}polyline") if p.get("stroke-dasharray")]
    assert dotted


# -- CLI --------------------------------------------------------------------

def test_simulate_completed(scenario_dir, tmp_path, capsys):
    out, svg = tmp_path / "a.csv", tmp_path / "a.svg"
    assert run_cli("simulate", "--config", scenario_dir / "fig1-row1-alpha0.toml", "--out", out, "--svg", svg) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == list(TRAJECTORY_COLUMNS) and len(rows) - 1 == 2501
    assert "completed" in capsys.readouterr().out
    _check_svg(svg.read_text())


def test_simulate_crisis(scenario_dir, tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert run_cli("simulate", "--config", scenario_dir / "fig1-row3-alpha0.02.toml", "--out", out) == 2
    rows = list(csv.reader(out.open()))
    assert rows[-1][-1] == "1"
    assert "crisis at t=" in capsys.readouterr().out


def test_simulate_bad_config_names_key(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("schema = 1\n[params]\ntheta1 = -1.0\n")
    assert run_cli("simulate", "--config", cfg, "--out", tmp_path / "c.csv") == 1
    assert "theta1" in capsys.readouterr().err


def test_cli_is_deterministic(scenario_dir, tmp_path):
    for i in (1, 2):
        assert run_cli("simulate", "--config", scenario_dir / "fig3-stochastic.toml", "--out", tmp_path / f"s{i}.csv") in (0, 2)
        assert run_cli("montecarlo", "--config", scenario_dir / "fig2-top-mean0.toml", "--runs", 20, "--seed", 9,
                       "--out", tmp_path / f"m{i}.csv") == 0
    assert (tmp_path / "s1.csv").read_bytes() == (tmp_path / "s2.csv").read_bytes()
    assert (tmp_path / "m1.csv").read_bytes() == (tmp_path / "m2.csv").read_bytes()


def test_fixed_point_cli(capsys):
    assert run_cli("fixed-point", "--scenario", "fig1-row1-alpha0.02") == 0
    text = capsys.readouterr().out
    vals = dict(line.split(None, 1) for line in text.splitlines())
    got = [float(vals[k]) for k in ("lambda_bar", "d_bar", "omega_bar", "pi_bar", "g_bar")]
    assert got == pytest.approx([0.971972, 1.096154, 0.697115, 0.248077, 0.02], abs=5e-7)
    assert "verdict" in text and "p0" in text and "eigenvalue4" in text
    assert run_cli("fixed-point", "--scenario", "fig1-row1-alpha0", "--format", "csv") == 0
    rows = dict(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert float(rows["lambda_bar"]) == pytest.approx(0.95, abs=1e-12)
    assert run_cli("fixed-point", "--scenario", "fig1-row1-alpha0", "--alpha", -0.02) == 1
    assert "c4" in capsys.readouterr().err


def test_montecarlo_cli(tmp_path, capsys):
    out, svg = tmp_path / "m.csv", tmp_path / "m.svg"
    assert run_cli("montecarlo", "--scenario", "fig2-top-mean0.02", "--runs", 1, "--out", out, "--svg", svg) == 0
    data = read_ensemble_csv(out.open())
    assert all(np.all(data[c] == 0) for c in data if c.endswith("_std"))
    assert np.all(data["runs"] == 1)
    _check_svg(svg.read_text())
    assert run_cli("montecarlo", "--scenario", "fig1-row1-alpha0", "--runs", 2) == 1
    assert "stochastic" in capsys.readouterr().err


def test_sweep_cli(tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert run_cli("sweep", "--scenario", "fig1-row2-alpha0.02", "--axis", "theta1=0.25,0.5,0.75",
                   "--axis", "theta2=0.25,0.5,0.75", "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 9
    cell = {(float(r["theta1"]), float(r["theta2"])): r for r in rows}
    assert cell[(0.25, 0.25)]["verdict"] != "crisis" and cell[(0.25, 0.25)]["crisis_time"] == ""
    assert cell[(0.75, 0.75)]["verdict"] == "crisis"
    assert run_cli("sweep", "--scenario", "fig1-row2-alpha0.02", "--axis", "d0=0.3,0.5", "--out", out) == 0
    assert [r["verdict"] == "crisis" for r in csv.DictReader(out.open())] == [False, True]
    assert run_cli("sweep", "--scenario", "fig1-row2-alpha0.02", "--axis", "theta1=0.1,0.2,0.3", "--max-cells", 2) == 1
    axes = [f"--axis=theta{i}=0.1" for i in (1, 2)] + ["--axis=eta1=1", "--axis=eta2=1"]
    assert run_cli("sweep", "--scenario", "fig1-row2-alpha0.02", *axes) == 1
    capsys.readouterr()


def test_sweep_single_cell_matches_simulate(tmp_path, capsys):
    out = tmp_path / "one.csv"
    assert run_cli("sweep", "--scenario", "fig1-row3-alpha0.02", "--axis", "theta1=0.75", "--out", out) == 0
    (row,) = csv.DictReader(out.open())
    code = run_cli("simulate", "--scenario", "fig1-row3-alpha0.02", "--out", tmp_path / "x.csv")
    assert (row["verdict"] == "crisis") == (code == 2)
    capsys.readouterr()


def test_keen_cli(capsys):
    assert run_cli("keen", "fixed-point", "--alpha", 0.02) == 0
    assert "3.10279" in capsys.readouterr().out
    assert run_cli("keen", "divergence", "--alphas", "0.02,0.01,0.005") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    d = [float(line.split(",")[1]) for line in lines[1:]]
    assert len(d) == 3 and d[0] < d[1] < d[2]
    assert run_cli("keen", "fixed-point", "--alpha", 0, "--kappa3", 0) == 1
    assert "DivergentDebt" in capsys.readouterr().err
    assert run_cli("keen", "fixed-point", "--alpha", 0, "--kappa3", 0.2) == 0
    assert "1.5412" in capsys.readouterr().out


def test_keen_simulate_cli(tmp_path):
    for chart in ("d", "u"):
        out = tmp_path / f"k{chart}.csv"
        assert run_cli("keen", "simulate", "--kappa3", 0.2, "--chart", chart, "--horizon", 5, "--out", out) == 0
    a = np.loadtxt(tmp_path / "kd.csv", delimiter=",", skiprows=1)
    b = np.loadtxt(tmp_path / "ku.csv", delimiter=",", skiprows=1)
    assert a.shape == b.shape == (51, 4) and np.allclose(a, b, atol=1e-8)


def test_catalog_cli(capsys):
    assert run_cli("catalog") == 0
    out = capsys.readouterr().out
    assert "fig1-row1-alpha0.02" in out and "fix-row2-theta1" in out


def test_unknown_scenario(capsys):
    assert run_cli("simulate", "--scenario", "missing") == 1
    assert "missing" in capsys.readouterr().err
