"""Keen-type models where investment is explicit and debt is the residual.

Investment per unit capital is ``kappa(pi, d) / nu`` with
``kappa(pi, d) = kappa0 + kappa1 * exp(kappa2 * pi - kappa3 * d)``.
``kappa3 = 0`` is the original profit-only model, whose interior fixed point
runs off to infinite debt as productivity growth goes to zero. Any
``kappa3 > 0`` keeps that fixed point finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .dynamics import IntegrationConfig, rk4_path
from .errors import DivergentDebtError, DomainError, NoRootError
from .model import ModelParams, phillips, phillips_inverse

#: Upper end of the debt-ratio bracket searched for the generalized fixed point.
DEBT_BRACKET_MAX = 1e3
ROOT_XTOL = 1e-12


@dataclass(frozen=True)
class InvestmentFunction:
    kappa0: float = 0.03
    kappa1: float = 0.03
    kappa2: float = 10.0
    kappa3: float = 0.2

    def __post_init__(self):
        if not (self.kappa1 > 0 and self.kappa2 > 0):
            raise DomainError("kappa1 and kappa2 must be > 0 so kappa increases with profit share")
        if not self.kappa3 >= 0:
            raise DomainError(f"kappa3 must be >= 0, got {self.kappa3}")

    def __call__(self, pi, d=0.0):
        return self.kappa0 + self.kappa1 * np.exp(self.kappa2 * pi - self.kappa3 * d)

    @property
    def worst_case(self) -> float:
        """Limit of kappa for profit share to minus infinity and debt to infinity."""
        return self.kappa0


@dataclass(frozen=True)
class KeenState:
    wage_share: float
    employment: float
    debt: float

    def as_array(self) -> np.ndarray:
        return np.array([self.wage_share, self.employment, self.debt])


@dataclass(frozen=True)
class KeenFixedPoint:
    lambda_bar: float
    d_bar: float
    omega_bar: float
    pi_bar: float

    def state(self) -> KeenState:
        return KeenState(self.omega_bar, self.lambda_bar, self.d_bar)


def keen_derivatives(params: ModelParams, kappa: InvestmentFunction, state, alpha: float) -> np.ndarray:
    """Time derivatives of ``(omega, lambda, d)``."""
    w, lam, d = (state.as_array() if isinstance(state, KeenState) else np.asarray(state, dtype=float))
    pi = 1.0 - w - params.r * d
    k = kappa(pi, d)
    g = k / params.nu - params.delta
    return np.array([
        w * (float(phillips(params.phillips, lam)) - alpha),
        lam * (g - alpha),
        k - pi - g * d,
    ])


def keen_u_system_derivatives(params: ModelParams, kappa: InvestmentFunction, state, alpha: float) -> np.ndarray:
    """Time derivatives of ``(omega, lambda, u)`` with ``u = 1/d``.

    At ``u = 0`` investment takes its worst-case limit ``kappa0``.
    """
    w, lam, u = (float(v) for v in state)
    if u < 0:
        raise DomainError(f"u = 1/d must be >= 0, got {u}")
    if u == 0.0:
        k = kappa.worst_case
    else:
        d = 1.0 / u
        k = float(kappa(1.0 - w - params.r * d, d))
    g = k / params.nu - params.delta
    return np.array([
        w * (float(phillips(params.phillips, lam)) - alpha),
        lam * (g - alpha),
        (u * (1.0 - w) - params.r + g - u * k) * u,
    ])


def _bisect(f, lo, hi, what):
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NoRootError(f"{what} has no root on [{lo:g}, {hi:g}]")
    return bisect(f, lo, hi, xtol=ROOT_XTOL, maxiter=500)


def keen_fixed_point(params: ModelParams, kappa: InvestmentFunction, alpha: float) -> KeenFixedPoint:
    """Interior fixed point of the Keen system.

    Raises
    ------
    DivergentDebtError
        For the profit-only model (``kappa3 == 0``) at ``alpha == 0``.
    NoRootError
        If investment can never reach ``nu * (alpha + delta)``.
    """
    target = params.nu * (alpha + params.delta)
    lam = phillips_inverse(params.phillips, alpha)
    if kappa.kappa3 == 0:
        if alpha == 0:
            raise DivergentDebtError(
                "profit-only investment (kappa3=0) at alpha=0: the fixed-point debt "
                "d_bar = (kappa(pi_bar) - pi_bar)/alpha is infinite"
            )
        if alpha < 0:
            raise DomainError(f"profit-only model needs alpha > 0, got {alpha}")
        pi = _bisect(lambda p: float(kappa(p)) - target, 0.0, 1.0, "kappa(pi) = nu*(alpha+delta)")
        d = (float(kappa(pi)) - pi) / alpha
    else:
        def residual(d):
            return float(kappa(target - alpha * d, d)) - target

        d = _bisect(residual, 0.0, DEBT_BRACKET_MAX, "kappa(pi(d), d) = nu*(alpha+delta)")
        pi = target - alpha * d
    return KeenFixedPoint(lambda_bar=lam, d_bar=d, omega_bar=1.0 - pi - params.r * d, pi_bar=pi)


def keen_debt_divergence(params: ModelParams, kappa: InvestmentFunction, alphas) -> np.ndarray:
    """Fixed-point debt ratio of the profit-only model for each ``alpha``."""
    if kappa.kappa3 != 0:
        raise DomainError("debt divergence applies to the profit-only model (kappa3 = 0)")
    return np.array([keen_fixed_point(params, kappa, float(a)).d_bar for a in alphas])


def infinite_debt_attractive(params: ModelParams, kappa: InvestmentFunction, alpha: float = 0.0):
    """Whether the ``(omega, lambda, u) = (0, 0, 0)`` fixed point is attractive.

    Returns ``(attractive, diagonal)`` where ``diagonal`` holds the three
    eigenvalues of the (diagonal) Jacobian there.
    """
    k_inf = kappa.worst_case
    diag = (
        float(phillips(params.phillips, 0.0)) - alpha,
        (k_inf - params.nu * (alpha + params.delta)) / params.nu,
        (k_inf - params.nu * (params.r + params.delta)) / params.nu,
    )
    return all(x < 0 for x in diag), diag


def keen_simulate(params: ModelParams, kappa: InvestmentFunction, initial: KeenState, alpha: float,
                  config: IntegrationConfig = IntegrationConfig(), chart: str = "d"):
    """Integrate the Keen system in the ``d`` or ``u = 1/d`` chart.

    Returns ``(times, states)``; states are ``(omega, lambda, d)`` in both charts
    (the ``u`` chart is mapped back, with ``d = inf`` where ``u = 0``).
    """
    x0 = initial.as_array()
    if chart == "d":
        return rk4_path(lambda x, a: keen_derivatives(params, kappa, x, a), x0, alpha, config)
    if chart == "u":
        if not x0[2] > 0:
            raise DomainError("the u chart needs a positive initial debt")
        x0 = np.array([x0[0], x0[1], 1.0 / x0[2]])
        t, xs = rk4_path(lambda x, a: keen_u_system_derivatives(params, kappa, x, a), x0, alpha, config)
        with np.errstate(divide="ignore"):
            xs[:, 2] = 1.0 / xs[:, 2]
        return t, xs
    raise ValueError(f"chart must be 'd' or 'u', got {chart!r}")


def closed_form_generalized_debt(params: ModelParams, kappa: InvestmentFunction, alpha: float) -> float:
    """Closed-form fixed-point debt for the exponential kappa family (``kappa3 > 0``).

    Solves ``kappa2 * (T - alpha*d) - kappa3*d = ln((T - kappa0)/kappa1)`` with
    ``T = nu*(alpha + delta)``; used to cross-check the bracketing root find.
    """
    target = params.nu * (alpha + params.delta)
    rhs = math.log((target - kappa.kappa0) / kappa.kappa1)
    return (kappa.kappa2 * target - rhs) / (kappa.kappa2 * alpha + kappa.kappa3)
