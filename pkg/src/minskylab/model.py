"""Parameters, state and the four-equation derivative field of the model.

The normalized dynamics are closed in target debt ``d_T``, debt ``d``,
employment ``lambda`` and wages share ``omega``; everything else (profit share,
growth, investment per unit output) is an algebraic function of those four.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import DomainError, SingularityError

#: Employment rate above which a rising ``lambda`` is frozen for the step.
LAMBDA_CAP = 0.99
#: Minimum admissible ``nu - d`` before the growth rate is declared singular.
EPS_SINGULARITY = 1e-6


@dataclass(frozen=True)
class PhillipsCurve:
    """Exponential wage-growth curve ``c1 * exp(c2 * (lam - c3)) - c4``."""

    c1: float = 0.01
    c2: float = 50.0
    c3: float = 0.95
    c4: float = 0.01

    def __post_init__(self):
        if not self.c1 > 0:
            raise DomainError(f"phillips.c1 must be > 0, got {self.c1}")
        if not self.c2 > 0:
            raise DomainError(f"phillips.c2 must be > 0, got {self.c2}")
        if not self.c1 * math.exp(-self.c2 * self.c3) - self.c4 < 0:
            raise DomainError("phillips curve must satisfy Phi(0) < 0 (check phillips.c1..c4)")


@dataclass(frozen=True)
class ModelParams:
    """Structural and behavioural constants.

    Defaults are the typical values (r=0.05, delta=0.07, nu=3) with the
    debt-behaviour settings of the baseline stable scenario.
    """

    r: float = 0.05
    delta: float = 0.07
    nu: float = 3.0
    theta1: float = 0.25
    theta2: float = 0.25
    eta1: float = 5.0
    eta2: float = 2.0
    d0: float = 0.5
    phillips: PhillipsCurve = field(default_factory=PhillipsCurve)
    population: float = 1.0
    y0: float = 1.0

    def __post_init__(self):
        checks = (
            ("nu", self.nu > 0, "> 0"),
            ("delta", self.delta >= 0, ">= 0"),
            ("r", self.r >= 0, ">= 0"),
            ("theta1", self.theta1 > 0, "> 0"),
            ("theta2", self.theta2 > 0, "> 0"),
            ("population", self.population > 0, "> 0"),
            ("y0", self.y0 > 0, "> 0"),
        )
        for name, ok, rule in checks:
            if not ok:
                raise DomainError(f"{name} must be {rule}, got {getattr(self, name)}")
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                raise DomainError(f"{f.name} must be finite, got {v}")

    def as_vector(self) -> np.ndarray:
        """Pack into the float vector layout used by the integration kernels."""
        pc = self.phillips
        return np.array(
            [self.r, self.delta, self.nu, self.theta1, self.theta2, self.eta1,
             self.eta2, self.d0, pc.c1, pc.c2, pc.c3, pc.c4],
            dtype=np.float64,
        )


@dataclass(frozen=True)
class SystemState:
    """The four dynamical variables at one instant."""

    d_target: float
    debt: float
    employment: float
    wage_share: float

    def as_array(self) -> np.ndarray:
        return np.array([self.d_target, self.debt, self.employment, self.wage_share], dtype=np.float64)

    @classmethod
    def from_array(cls, x) -> "SystemState":
        return cls(float(x[0]), float(x[1]), float(x[2]), float(x[3]))

    def validate(self, params: ModelParams, eps: float = EPS_SINGULARITY) -> None:
        if not 0 < self.employment <= 1:
            raise DomainError(f"employment must lie in (0, 1], got {self.employment}")
        if not self.wage_share > 0:
            raise DomainError(f"wage_share must be > 0, got {self.wage_share}")
        if not params.nu - self.debt > eps:
            raise SingularityError(f"debt must stay below nu={params.nu}, got {self.debt}")


@dataclass(frozen=True)
class Auxiliaries:
    profit_share: float
    growth: float
    investment_norm: float


def phillips(curve: PhillipsCurve, lam):
    """Wage growth rate at employment rate ``lam`` (scalar or array)."""
    return curve.c1 * np.exp(curve.c2 * (lam - curve.c3)) - curve.c4


def phillips_slope(curve: PhillipsCurve, lam):
    return curve.c1 * curve.c2 * np.exp(curve.c2 * (lam - curve.c3))


def phillips_inverse(curve: PhillipsCurve, alpha: float) -> float:
    """Employment rate at which wages grow at ``alpha``.

    Raises
    ------
    DomainError
        If ``alpha <= -c4``; the curve never gets that low.
    """
    if not alpha > -curve.c4:
        raise DomainError(
            f"phillips_inverse needs alpha > -c4 = {-curve.c4}, got alpha={alpha}"
        )
    return curve.c3 + math.log((alpha + curve.c4) / curve.c1) / curve.c2


def profit_share(params: ModelParams, state: SystemState) -> float:
    return 1.0 - state.wage_share - params.r * state.debt


def growth_rate(params: ModelParams, state: SystemState, eps: float = EPS_SINGULARITY) -> float:
    """Output growth rate implied by profits, debt adjustment and depreciation."""
    gap = params.nu - state.debt
    if not gap > eps:
        raise SingularityError(f"nu - d = {gap:.3g} <= {eps:g}: growth rate is singular")
    pi = profit_share(params, state)
    return (pi + params.theta1 * (state.d_target - state.debt) - params.delta * params.nu) / gap


def investment_norm(params: ModelParams, state: SystemState, eps: float = EPS_SINGULARITY) -> float:
    """Investment per unit output, profits plus net new borrowing.

    Negative values mark a crisis.
    """
    g = growth_rate(params, state, eps)
    pi = profit_share(params, state)
    return pi + params.theta1 * (state.d_target - state.debt) + state.debt * g


def auxiliaries(params: ModelParams, state: SystemState, eps: float = EPS_SINGULARITY) -> Auxiliaries:
    g = growth_rate(params, state, eps)
    pi = profit_share(params, state)
    inv = pi + params.theta1 * (state.d_target - state.debt) + state.debt * g
    return Auxiliaries(profit_share=pi, growth=g, investment_norm=inv)


def derivatives(params: ModelParams, state: SystemState, alpha: float,
                eps: float = EPS_SINGULARITY) -> np.ndarray:
    """Time derivatives of ``(d_T, d, lambda, omega)``.

    The employment component is zeroed when ``lambda >= 0.99`` and would
    otherwise keep rising, which models a finite labour pool.
    """
    pi = profit_share(params, state)
    g = growth_rate(params, state, eps)
    lam = state.employment
    d_target_dot = params.theta2 * (params.d0 + params.eta1 * g + params.eta2 * pi - state.d_target)
    debt_dot = params.theta1 * (state.d_target - state.debt)
    lam_dot = lam * (g - alpha)
    if lam >= LAMBDA_CAP and lam_dot > 0:
        lam_dot = 0.0
    omega_dot = state.wage_share * (float(phillips(params.phillips, lam)) - alpha)
    return np.array([d_target_dot, debt_dot, lam_dot, omega_dot])
