"""Scenario catalog, Monte Carlo ensembles, parameter sweeps and transition reports."""
from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .dynamics import (Behaviour, Constant, IntegrationConfig, LinearRamp, ProductivityDriver, StepDown,
                       StochasticAnnual, Termination, Trajectory, alpha_table, classify_behaviour,
                       integrate, integrate_many, standard_initialisation)
from .errors import MinskyError
from .model import ModelParams, SystemState

MASK64 = (1 << 64) - 1
DEFAULT_SEED = 20180101
MAX_SWEEP_CELLS = 4096


def splitmix64(x: int) -> int:
    """One splitmix64 output for state ``x``; a bijection on 64-bit integers."""
    z = (int(x) + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def run_seed(base_seed: int, run_index: int) -> int:
    return splitmix64((int(base_seed) ^ int(run_index)) & MASK64)


@dataclass(frozen=True)
class Scenario:
    name: str
    params: ModelParams
    driver: ProductivityDriver
    init: SystemState | None = None  # None means the standard initialisation
    config: IntegrationConfig = field(default_factory=IntegrationConfig)
    description: str = ""

    def initial_state(self) -> SystemState:
        if self.init is not None:
            return self.init
        return standard_initialisation(self.params, self.driver.initial_alpha)

    def run(self, backend: str | None = None) -> Trajectory:
        return integrate(self.params, self.initial_state(), self.driver, self.config, backend=backend)

    def with_params(self, **changes) -> "Scenario":
        return dataclasses.replace(self, params=dataclasses.replace(self.params, **changes))


# Debt-behaviour settings (theta1, theta2, eta1, eta2) of the constant-growth rows.
FIG1_ROWS = {
    1: (0.25, 0.25, 5.0, 2.0),
    2: (0.5, 0.5, 5.0, 2.0),
    3: (0.75, 0.75, 5.0, 2.0),
    4: (0.75, 0.75, 3.0, 1.0),
}
FIG2_ROWS = {"top": FIG1_ROWS[1], "middle": FIG1_ROWS[4], "bottom": (0.1, 0.1, 0.0, 0.0)}
TRANSITION_PARAMS = (0.5, 0.5, 3.0, 1.0)
ROW2_RESCUES = {"theta1": 0.25, "theta2": 0.25, "eta1": 3.0, "eta2": 1.0, "d0": 0.3}


def _params(row, **extra) -> ModelParams:
    th1, th2, e1, e2 = row
    return ModelParams(theta1=th1, theta2=th2, eta1=e1, eta2=e2, d0=extra.pop("d0", 0.5), **extra)


def _alpha_tag(a: float) -> str:
    return "0" if a == 0 else f"{a:g}"


def catalog(seed: int = DEFAULT_SEED) -> list[Scenario]:
    """Built-in scenarios for every figure, in a stable order."""
    out: list[Scenario] = []
    for row, vals in FIG1_ROWS.items():
        for a in (0.02, 0.0):
            out.append(Scenario(f"fig1-row{row}-alpha{_alpha_tag(a)}", _params(vals), Constant(a),
                                description=f"constant growth, debt-behaviour row {row}"))
    for row, vals in FIG2_ROWS.items():
        for m in (0.02, 0.0):
            out.append(Scenario(f"fig2-{row}-mean{_alpha_tag(m)}", _params(vals), StochasticAnnual(m, 0.01, seed),
                                description=f"annual Normal(mean, 0.01) growth, {row} row"))
    tp = _params(TRANSITION_PARAMS)
    out.append(Scenario("fig3-step", tp, StepDown(0.02, 0.0, 50.0), description="0.02 until t=50, then 0"))
    out.append(Scenario("fig3-ramp", tp, LinearRamp(0.02, 0.0, 50.0, 60.0),
                        description="0.02 until t=50, linear to 0 at t=60"))
    out.append(Scenario("fig3-stochastic", tp, StochasticAnnual(0.02, 0.01, seed, mean_after=0.0, t_switch=50.0),
                        description="annual draws, mean 0.02 before t=50 and 0 after"))
    for a in (0.02, 0.0):
        out.append(Scenario(f"fig4-alpha{_alpha_tag(a)}", _params(FIG1_ROWS[2], r=0.1), Constant(a),
                            description="row 2 with interest rate 0.1"))
    for name, value in ROW2_RESCUES.items():
        base = _params(FIG1_ROWS[2])
        out.append(Scenario(f"fix-row2-{name}", dataclasses.replace(base, **{name: value}), Constant(0.02),
                            description=f"row 2, alpha=0.02, with {name}={value:g}"))
    return out


def get_scenario(name: str, seed: int = DEFAULT_SEED) -> Scenario:
    for sc in catalog(seed):
        if sc.name == name:
            return sc
    raise KeyError(f"unknown scenario {name!r}")


# --------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------

MC_FIELDS = ("employment", "wage_share", "profit_share", "growth", "debt")


@dataclass(frozen=True, eq=False)
class MonteCarloSummary:
    n_runs: int
    times: np.ndarray
    mean: dict  # field -> (n_samples,) across-run mean
    std: dict  # field -> (n_samples,) population std across runs
    counts: np.ndarray  # runs still alive at each sample
    crisis_count: int
    min_employment: np.ndarray  # (n_runs,)
    terminations: list
    seeds: list


def _field_values(pvec, samples):
    r, delta, nu, th1 = (pvec[:, i][:, None] for i in range(4))
    dT, d, lam, w = (samples[..., i] for i in range(4))
    pi = 1.0 - w - r * d
    g = (pi + th1 * (dT - d) - delta * nu) / (nu - d)
    return np.stack([lam, w, pi, g, d], axis=-1)


def monte_carlo(scenario: Scenario, n_runs: int = 1000, base_seed: int = 0, chunk_size: int = 250,
                backend: str | None = None) -> MonteCarloSummary:
    """Ensemble of stochastic runs with per-sample mean and std across runs.

    Run ``i`` uses seed ``splitmix64(base_seed ^ i)``. Runs that hit a crisis
    contribute only up to their halt time. Chunk statistics are merged in run
    order, so the result depends only on the inputs.
    """
    if not scenario.driver.is_stochastic:
        raise ValueError(f"scenario {scenario.name!r} has a deterministic driver")
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    cfg = scenario.config
    x0 = scenario.initial_state()
    x0.validate(scenario.params, cfg.eps_singularity)
    seeds = [run_seed(base_seed, i) for i in range(n_runs)]
    n_samples = cfg.n_samples
    count = np.zeros(n_samples)
    mean = np.zeros((n_samples, len(MC_FIELDS)))
    m2 = np.zeros((n_samples, len(MC_FIELDS)))
    min_emp = np.empty(n_runs)
    terms: list[Termination] = []

    for start in range(0, n_runs, chunk_size):
        idx = range(start, min(n_runs, start + chunk_size))
        tables = []
        for i in idx:
            table, spb = alpha_table(scenario.driver.with_seed(seeds[i]), cfg)
            tables.append(table)
        tables = np.stack(tables)
        pvec = np.tile(scenario.params.as_vector(), (len(idx), 1))
        xs = np.tile(x0.as_array(), (len(idx), 1))
        res = kernels.integrate_batch(pvec, xs, tables, spb, cfg.dt, cfg.n_steps, cfg.record_stride,
                                      cfg.eps_singularity, backend=backend)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = _field_values(pvec, res.samples)
        alive = ~np.isnan(vals[..., 0])
        cnt_b = alive.sum(axis=0).astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            mean_b = np.where(cnt_b[:, None] > 0, np.nansum(vals, axis=0) / cnt_b[:, None], 0.0)
            m2_b = np.nansum((vals - mean_b[None]) ** 2, axis=0)
        tot = count + cnt_b
        with np.errstate(invalid="ignore", divide="ignore"):
            delta = mean_b - mean
            w_b = np.where(tot > 0, cnt_b / tot, 0.0)[:, None]
            mean = mean + delta * w_b
            m2 = m2 + m2_b + delta ** 2 * (count * w_b[:, 0])[:, None]
        count = tot

        for j, i in enumerate(idx):
            min_emp[i] = min(np.nanmin(res.samples[j, :, 2]), res.last_state[j, 2])
            status = int(res.status[j])
            t_end = None if status == kernels.COMPLETED else float(res.term_step[j] / cfg.steps_per_year)
            terms.append(Termination(kernels.STATUS_NAMES[status], t_end))

    with np.errstate(invalid="ignore", divide="ignore"):
        mean_out = np.where(count[:, None] > 0, mean, np.nan)
        std_out = np.where(count[:, None] > 0, np.sqrt(m2 / count[:, None]), np.nan)
    times = cfg.step_times(np.arange(n_samples) * cfg.record_stride)
    return MonteCarloSummary(
        n_runs=n_runs,
        times=times,
        mean={f: mean_out[:, k] for k, f in enumerate(MC_FIELDS)},
        std={f: std_out[:, k] for k, f in enumerate(MC_FIELDS)},
        counts=count.astype(np.int64),
        crisis_count=sum(t.is_crisis for t in terms),
        min_employment=min_emp,
        terminations=terms,
        seeds=seeds,
    )


# --------------------------------------------------------------------------
# Parameter sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SweepResult:
    axis_names: tuple
    axis_values: tuple
    verdicts: np.ndarray  # object array of verdict strings
    crisis_times: np.ndarray  # NaN where no crisis

    def cells(self):
        """Yield ``(values, verdict, crisis_time)`` in row-major order."""
        for ix in itertools.product(*(range(len(v)) for v in self.axis_values)):
            vals = tuple(self.axis_values[k][i] for k, i in enumerate(ix))
            yield vals, self.verdicts[ix], self.crisis_times[ix]


SWEEPABLE = ("r", "delta", "nu", "theta1", "theta2", "eta1", "eta2", "d0", "alpha")


def _cell_scenario(base: Scenario, changes: Mapping[str, float]) -> Scenario:
    changes = dict(changes)
    driver = base.driver
    if "alpha" in changes:
        if not isinstance(driver, Constant):
            raise ValueError("the alpha axis needs a constant-growth scenario")
        driver = Constant(changes.pop("alpha"))
    params = dataclasses.replace(base.params, **changes)
    return dataclasses.replace(base, params=params, driver=driver)


def sweep(base: Scenario, axes: Mapping[str, Sequence[float]], max_cells: int = MAX_SWEEP_CELLS,
          backend: str | None = None) -> SweepResult:
    """Integrate and classify every point of a parameter grid.

    Cells whose parameters are invalid, or whose runs end in a singularity,
    get a verdict string instead of raising.
    """
    if not axes:
        raise ValueError("sweep needs at least one axis")
    for name in axes:
        if name not in SWEEPABLE:
            raise ValueError(f"cannot sweep {name!r}; choose from {', '.join(SWEEPABLE)}")
    names = tuple(axes)
    values = tuple(tuple(float(v) for v in axes[n]) for n in names)
    shape = tuple(len(v) for v in values)
    if any(s == 0 for s in shape):
        raise ValueError("sweep axes must be non-empty")
    n_cells = int(np.prod(shape))
    if n_cells > max_cells:
        raise ValueError(f"sweep grid has {n_cells} cells, above the cap of {max_cells}")

    verdicts = np.empty(shape, dtype=object)
    crisis_times = np.full(shape, np.nan)
    runnable = []
    for ix in itertools.product(*(range(s) for s in shape)):
        changes = {n: values[k][i] for k, (n, i) in enumerate(zip(names, ix))}
        try:
            sc = _cell_scenario(base, changes)
            state = sc.initial_state()
            state.validate(sc.params, sc.config.eps_singularity)
        except MinskyError as exc:
            verdicts[ix] = f"error: {exc}"
            continue
        runnable.append((ix, sc, state))

    if runnable:
        trajs = integrate_many([sc.params for _, sc, _ in runnable], [s for _, _, s in runnable],
                               [sc.driver for _, sc, _ in runnable], base.config, backend=backend)
        for (ix, _, _), tr in zip(runnable, trajs):
            if tr.termination.kind in ("completed", "crisis"):
                verdicts[ix] = classify_behaviour(tr).value
            else:
                verdicts[ix] = tr.termination.kind
            if tr.crisis:
                crisis_times[ix] = tr.termination.time
    return SweepResult(names, values, verdicts, crisis_times)


def is_crisis_verdict(verdict: str) -> bool:
    return verdict == Behaviour.CRISIS.value


# --------------------------------------------------------------------------
# Transitions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TransitionReport:
    pre_mean_wage_share: float
    post_mean_wage_share: float
    pre_mean_employment: float
    post_mean_employment: float
    post_min_employment: float
    post_min_time: float


def transition_report(trajectory: Trajectory, t_switch: float) -> TransitionReport:
    """Compare means before and after ``t_switch``; find the post-switch employment low."""
    t = trajectory.times
    if not t[0] < t_switch < t[-1]:
        raise ValueError(f"t_switch={t_switch} is outside the recorded span")
    pre, post = t < t_switch, t >= t_switch
    after = t > t_switch
    lam, om = trajectory.employment, trajectory.wage_share
    i_min = np.flatnonzero(after)[np.argmin(lam[after])]
    return TransitionReport(
        pre_mean_wage_share=float(om[pre].mean()),
        post_mean_wage_share=float(om[post].mean()),
        pre_mean_employment=float(lam[pre].mean()),
        post_mean_employment=float(lam[post].mean()),
        post_min_employment=float(lam[i_min]),
        post_min_time=float(t[i_min]),
    )
