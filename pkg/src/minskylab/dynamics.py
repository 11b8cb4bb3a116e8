"""Simulation of the model under a productivity-growth driver.

Runs use classical RK4 with a fixed step. Productivity growth ``alpha`` is
sampled at the start of each step and held for the step. After every accepted
step the investment ratio is checked and a negative value halts the run as a
crisis.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Sequence, Union

import numpy as np

from . import kernels
from .equilibrium import fixed_point
from .errors import DomainError
from .model import EPS_SINGULARITY, ModelParams, SystemState


# --------------------------------------------------------------------------
# Productivity drivers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    alpha: float
    kind: ClassVar[str] = "constant"
    is_stochastic: ClassVar[bool] = False

    @property
    def initial_alpha(self) -> float:
        return self.alpha

    def alpha_at(self, t):
        return np.full(np.shape(t), float(self.alpha))


@dataclass(frozen=True)
class StepDown:
    alpha_before: float
    alpha_after: float
    t_switch: float
    kind: ClassVar[str] = "step"
    is_stochastic: ClassVar[bool] = False

    @property
    def initial_alpha(self) -> float:
        return self.alpha_before

    def alpha_at(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < self.t_switch, self.alpha_before, self.alpha_after)


@dataclass(frozen=True)
class LinearRamp:
    alpha_before: float
    alpha_after: float
    t_start: float
    t_end: float
    kind: ClassVar[str] = "ramp"
    is_stochastic: ClassVar[bool] = False

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise DomainError(f"ramp needs t_end > t_start, got {self.t_start}..{self.t_end}")

    @property
    def initial_alpha(self) -> float:
        return self.alpha_before

    def alpha_at(self, t):
        t = np.asarray(t, dtype=float)
        frac = np.clip((t - self.t_start) / (self.t_end - self.t_start), 0.0, 1.0)
        return self.alpha_before + (self.alpha_after - self.alpha_before) * frac


@dataclass(frozen=True)
class StochasticAnnual:
    """Normal productivity growth redrawn at every integer year.

    When ``t_switch`` is set, years starting at or after it use ``mean_after``.
    Draws come from numpy's PCG64 generator seeded with ``seed``.
    """

    mean: float
    std_dev: float
    seed: int = 0
    mean_after: float | None = None
    t_switch: float | None = None
    kind: ClassVar[str] = "stochastic"
    is_stochastic: ClassVar[bool] = True

    def __post_init__(self):
        if not self.std_dev >= 0:
            raise DomainError(f"std_dev must be >= 0, got {self.std_dev}")
        if (self.mean_after is None) != (self.t_switch is None):
            raise DomainError("mean_after and t_switch must be given together")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def initial_alpha(self) -> float:
        return self.mean

    def with_seed(self, seed: int) -> "StochasticAnnual":
        return StochasticAnnual(self.mean, self.std_dev, int(seed), self.mean_after, self.t_switch)

    def yearly_alphas(self, n_years: int) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(int(self.seed)))
        z = rng.standard_normal(n_years)
        means = np.full(n_years, float(self.mean))
        if self.t_switch is not None:
            means[np.arange(n_years) >= self.t_switch] = self.mean_after
        return means + self.std_dev * z

    def alpha_at(self, t, n_years: int | None = None):
        t = np.asarray(t, dtype=float)
        if n_years is None:
            n_years = int(np.floor(np.max(t, initial=0.0))) + 1
        table = self.yearly_alphas(n_years)
        return table[np.minimum(np.floor(t).astype(int), n_years - 1)]


ProductivityDriver = Union[Constant, StepDown, LinearRamp, StochasticAnnual]


# --------------------------------------------------------------------------
# Configuration and trajectories
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegrationConfig:
    dt: float = 0.01
    horizon: float = 250.0
    eps_singularity: float = EPS_SINGULARITY
    record_stride: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f"dt must be > 0, got {self.dt}")
        spy = 1.0 / self.dt
        if abs(spy - round(spy)) > 1e-9 * spy:
            raise DomainError(f"dt must evenly divide one year, got dt={self.dt}")
        if not self.horizon > 0:
            raise DomainError(f"horizon must be > 0, got {self.horizon}")
        steps = self.horizon * round(spy)
        if abs(steps - round(steps)) > 1e-6:
            raise DomainError(f"horizon must be a whole number of steps, got {self.horizon}")
        if not (isinstance(self.record_stride, (int, np.integer)) and self.record_stride >= 1):
            raise DomainError(f"record_stride must be a positive integer, got {self.record_stride}")
        if not self.eps_singularity > 0:
            raise DomainError(f"eps_singularity must be > 0, got {self.eps_singularity}")

    @property
    def steps_per_year(self) -> int:
        return int(round(1.0 / self.dt))

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon * self.steps_per_year))

    @property
    def n_samples(self) -> int:
        return self.n_steps // self.record_stride + 1

    def step_times(self, steps) -> np.ndarray:
        return np.asarray(steps, dtype=float) / self.steps_per_year


def alpha_table(driver: ProductivityDriver, config: IntegrationConfig) -> tuple[np.ndarray, int]:
    """Per-block productivity table and block length in steps.

    Deterministic drivers get one entry per step (plus one for the final
    instant); the stochastic driver gets one entry per year.
    """
    if driver.is_stochastic:
        n_years = int(math.ceil(config.horizon)) + 1
        return driver.yearly_alphas(n_years), config.steps_per_year
    steps = np.arange(config.n_steps + 1)
    return driver.alpha_at(config.step_times(steps)), 1


@dataclass(frozen=True)
class Termination:
    kind: str  # completed | crisis | singularity | degenerate
    time: float | None = None

    @property
    def is_crisis(self) -> bool:
        return self.kind == "crisis"

    def __str__(self) -> str:
        if self.kind == "completed":
            return "completed"
        return f"{self.kind} at t={self.time:.2f}"


@dataclass(frozen=True, eq=False)
class Levels:
    output: np.ndarray
    capital: np.ndarray
    labour: np.ndarray
    productivity: np.ndarray
    wage: np.ndarray
    debt: np.ndarray
    profit: np.ndarray
    investment: np.ndarray
    residual_absorption: np.ndarray


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 4) in (d_T, d, lambda, omega) order
    alpha: np.ndarray
    profit_share: np.ndarray
    growth: np.ndarray
    investment_norm: np.ndarray
    log_output: np.ndarray
    termination: Termination
    params: ModelParams
    config: IntegrationConfig
    levels: Levels = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "levels", reconstruct_levels(self, self.params))

    @property
    def d_target(self):
        return self.states[:, 0]

    @property
    def debt(self):
        return self.states[:, 1]

    @property
    def employment(self):
        return self.states[:, 2]

    @property
    def wage_share(self):
        return self.states[:, 3]

    @property
    def crisis(self) -> bool:
        return self.termination.is_crisis

    @property
    def summary(self) -> dict:
        lam, om = self.employment, self.wage_share
        return {
            "lambda_min": float(lam.min()), "lambda_max": float(lam.max()), "lambda_mean": float(lam.mean()),
            "omega_min": float(om.min()), "omega_max": float(om.max()), "omega_mean": float(om.mean()),
            "growth_mean": float(np.nanmean(self.growth)),
            "crisis": self.crisis,
        }

    def state_at(self, i: int) -> SystemState:
        return SystemState.from_array(self.states[i])


def reconstruct_levels(trajectory: Trajectory, params: ModelParams) -> Levels:
    """Level series from the normalized trajectory.

    Output is ``y0 * exp(integral of g)``; every other level is output times a
    ratio, so the normalized dynamics never depend on ``y0`` or population.
    """
    y = params.y0 * np.exp(trajectory.log_output)
    lam, om = trajectory.employment, trajectory.wage_share
    labour = lam * params.population
    invest = trajectory.investment_norm * y
    return Levels(
        output=y,
        capital=params.nu * y,
        labour=labour,
        productivity=y / labour,
        wage=om * y / labour,
        debt=trajectory.debt * y,
        profit=trajectory.profit_share * y,
        investment=invest,
        residual_absorption=y - invest,
    )


def _auxiliary_series(params: ModelParams, states: np.ndarray):
    dT, d, w = states[:, 0], states[:, 1], states[:, 3]
    pi = 1.0 - w - params.r * d
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (pi + params.theta1 * (dT - d) - params.delta * params.nu) / (params.nu - d)
    inv = pi + params.theta1 * (dT - d) + d * g
    return pi, g, inv


def _trajectory_from_batch(res: kernels.BatchResult, i: int, params: ModelParams,
                           table: np.ndarray, spb: int, config: IntegrationConfig) -> Trajectory:
    status = int(res.status[i])
    term_step = int(res.term_step[i])
    stride = config.record_stride
    n_keep = term_step // stride + 1
    steps = np.arange(n_keep) * stride
    states = res.samples[i, :n_keep]
    log_out = res.log_output[i, :n_keep]
    if status != kernels.COMPLETED and term_step % stride != 0:
        steps = np.append(steps, term_step)
        states = np.vstack([states, res.last_state[i]])
        log_out = np.append(log_out, res.last_log_output[i])
    times = config.step_times(steps)
    pi, g, inv = _auxiliary_series(params, states)
    alpha = table[np.minimum(steps // spb, table.shape[-1] - 1)]
    kind = kernels.STATUS_NAMES[status]
    term = Termination(kind, None if status == kernels.COMPLETED else float(term_step / config.steps_per_year))
    if kind == "degenerate":
        warnings.warn(f"employment or wages share collapsed to zero ({term})", RuntimeWarning, stacklevel=3)
    return Trajectory(times=times, states=np.array(states), alpha=alpha, profit_share=pi, growth=g,
                      investment_norm=inv, log_output=np.array(log_out), termination=term,
                      params=params, config=config)


def standard_initialisation(params: ModelParams, alpha: float) -> SystemState:
    """Fixed point of ``alpha`` with employment lowered by 0.01."""
    fp = fixed_point(params, alpha)
    return SystemState(d_target=fp.d_bar, debt=fp.d_bar, employment=fp.lambda_bar - 0.01,
                       wage_share=fp.omega_bar)


def integrate_many(params: Sequence[ModelParams], initial_states: Sequence[SystemState],
                   drivers: Sequence[ProductivityDriver], config: IntegrationConfig = IntegrationConfig(),
                   backend: str | None = None) -> list[Trajectory]:
    """Integrate independent runs in a single kernel call."""
    n = len(params)
    if not (len(initial_states) == len(drivers) == n) or n == 0:
        raise ValueError("params, initial_states and drivers must be non-empty and equally long")
    for p, s in zip(params, initial_states):
        s.validate(p, config.eps_singularity)
    pvec = np.stack([p.as_vector() for p in params])
    x0 = np.stack([s.as_array() for s in initial_states])

    tables = {}
    for drv in drivers:
        if drv not in tables:
            tables[drv] = alpha_table(drv, config)
    if len(tables) == 1:
        table, spb = next(iter(tables.values()))
        rows = table[None, :]
        run_tables = [table] * n
    else:
        spbs = {spb for _, spb in tables.values()}
        if len(spbs) == 1:
            spb = spbs.pop()
            run_tables = [tables[d][0] for d in drivers]
        else:
            spb = 1
            n_rows = config.n_steps + 1
            run_tables = [np.repeat(t, s)[:n_rows] for t, s in (tables[d] for d in drivers)]
        rows = np.stack(run_tables)

    res = kernels.integrate_batch(pvec, x0, rows, spb, config.dt, config.n_steps, config.record_stride,
                                  config.eps_singularity, backend=backend)
    return [_trajectory_from_batch(res, i, params[i], run_tables[i], spb, config) for i in range(n)]


def integrate(params: ModelParams, initial_state: SystemState | None, driver: ProductivityDriver,
              config: IntegrationConfig = IntegrationConfig(), backend: str | None = None) -> Trajectory:
    """Integrate one run. ``initial_state=None`` uses :func:`standard_initialisation`."""
    if initial_state is None:
        initial_state = standard_initialisation(params, driver.initial_alpha)
    return integrate_many([params], [initial_state], [driver], config, backend)[0]


# --------------------------------------------------------------------------
# Behaviour classification
# --------------------------------------------------------------------------

class Behaviour(str, enum.Enum):
    CONVERGED = "converged"
    STABLE_OSCILLATION = "stable_oscillation"
    CRISIS = "crisis"
    INCONCLUSIVE = "inconclusive"

    @property
    def is_stable(self) -> bool:
        return self in (Behaviour.CONVERGED, Behaviour.STABLE_OSCILLATION)


CONVERGED_AMPLITUDE = 1e-4
GROWTH_FACTOR_LIMIT = 1.05


def window_amplitudes(trajectory: Trajectory) -> tuple[float, float]:
    """Peak-to-peak employment over the final and the preceding 20% of the horizon."""
    h = trajectory.config.horizon
    t, lam = trajectory.times, trajectory.employment
    last = lam[t >= 0.8 * h]
    prev = lam[(t >= 0.6 * h) & (t < 0.8 * h)]
    return float(np.ptp(last)), float(np.ptp(prev))


def classify_behaviour(trajectory: Trajectory) -> Behaviour:
    """Converged, stable oscillation, crisis, or inconclusive (amplitude still growing)."""
    kind = trajectory.termination.kind
    if kind == "crisis":
        return Behaviour.CRISIS
    if kind != "completed":
        raise ValueError(f"cannot classify a run that ended in {trajectory.termination}")
    last, prev = window_amplitudes(trajectory)
    if last < CONVERGED_AMPLITUDE:
        return Behaviour.CONVERGED
    if last <= GROWTH_FACTOR_LIMIT * prev:
        return Behaviour.STABLE_OSCILLATION
    return Behaviour.INCONCLUSIVE


# --------------------------------------------------------------------------
# Generic RK4 for other derivative fields
# --------------------------------------------------------------------------

def rk4_path(rhs: Callable[[np.ndarray, float], np.ndarray], x0, alpha: Callable[[float], float] | float,
             config: IntegrationConfig) -> tuple[np.ndarray, np.ndarray]:
    """Plain-Python RK4 for an arbitrary field ``rhs(x, alpha)``.

    Uses the same step, alpha-sampling and recording rules as :func:`integrate`
    but no crisis logic. Returns ``(times, states)``.
    """
    alpha_fn = alpha if callable(alpha) else (lambda t, a=float(alpha): a)
    dt, stride = config.dt, config.record_stride
    x = np.asarray(x0, dtype=float).copy()
    out = [x.copy()]
    steps = [0]
    for k in range(config.n_steps):
        a = alpha_fn(k / config.steps_per_year)
        k1 = rhs(x, a)
        k2 = rhs(x + 0.5 * dt * k1, a)
        k3 = rhs(x + 0.5 * dt * k2, a)
        k4 = rhs(x + dt * k3, a)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if (k + 1) % stride == 0:
            out.append(x.copy())
            steps.append(k + 1)
    return config.step_times(steps), np.array(out)
