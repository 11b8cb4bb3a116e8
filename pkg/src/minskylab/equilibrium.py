"""Fixed point, linearization and local stability of the four-variable model.

The attractivity verdict is computed two independent ways: the Routh-Hurwitz
conditions on the characteristic-polynomial coefficients, and the sign of the
real parts of the numerically computed quartic roots.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, SingularityError
from .model import EPS_SINGULARITY, ModelParams, phillips_inverse, phillips_slope

#: Routh-Hurwitz quantities closer than this to zero yield a "marginal" verdict.
MARGINAL_TOL = 1e-9

ATTRACTIVE = "attractive"
REPULSIVE = "repulsive"
MARGINAL = "marginal"


@dataclass(frozen=True)
class FixedPoint:
    lambda_bar: float
    d_bar: float
    omega_bar: float
    pi_bar: float
    g_bar: float

    @property
    def d_target_bar(self) -> float:
        return self.d_bar

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.lambda_bar, self.d_bar, self.omega_bar, self.pi_bar, self.g_bar)

    def state_vector(self) -> np.ndarray:
        """The fixed point in ``(d_T, d, lambda, omega)`` order."""
        return np.array([self.d_bar, self.d_bar, self.lambda_bar, self.omega_bar])


@dataclass(frozen=True)
class FixedPointReport:
    fixed_point: FixedPoint
    jacobian: np.ndarray
    k_constants: tuple[float, float, float, float, float]
    char_poly: tuple[float, float, float, float]
    routh_hurwitz_attractive: bool
    eigen_attractive: bool
    eigenvalues: np.ndarray
    verdict: str


def fixed_point(params: ModelParams, alpha: float) -> FixedPoint:
    """Closed-form interior fixed point (positive employment and wages share).

    Raises
    ------
    DomainError
        If ``alpha`` is below the range of the Phillips curve.
    SingularityError
        If ``1 + eta2 * alpha`` vanishes or the debt ratio reaches ``nu``.
    """
    nu, delta = params.nu, params.delta
    denom = 1.0 + params.eta2 * alpha
    if abs(denom) < 1e-12:
        raise SingularityError("fixed point needs 1 + eta2*alpha != 0 (debt ratio is unbounded)")
    lam = phillips_inverse(params.phillips, alpha)
    d = (params.d0 + params.eta1 * alpha + params.eta2 * nu * (delta + alpha)) / denom
    if not nu - d > EPS_SINGULARITY:
        raise SingularityError(f"fixed-point debt ratio d_bar={d:.6g} is not below nu={nu}")
    omega = 1.0 - (alpha + delta) * nu - (params.r - alpha) * d
    pi = delta * nu + alpha * (nu - d)
    return FixedPoint(lambda_bar=lam, d_bar=d, omega_bar=omega, pi_bar=pi, g_bar=alpha)


def k_constants(params: ModelParams, alpha: float, fp: FixedPoint | None = None):
    fp = fixed_point(params, alpha) if fp is None else fp
    gap = params.nu - fp.d_bar
    k1 = fp.lambda_bar / gap
    k2 = params.r + params.theta1 - alpha
    k3 = params.eta2 * params.theta2
    k4 = fp.omega_bar * float(phillips_slope(params.phillips, fp.lambda_bar))
    k5 = params.eta1 * params.theta2 / gap
    return (k1, k2, k3, k4, k5)


def jacobian_from_constants(theta1, theta2, r, k) -> np.ndarray:
    """Jacobian at the fixed point in ``(d_T, d, lambda, omega)`` order.

    ``k`` holds ``(K1, ..., K5)``. The top-left entry is ``theta1*K5 - theta2``,
    which is what differentiating the target-debt equation gives.
    """
    k1, k2, k3, k4, k5 = k
    return np.array([
        [theta1 * k5 - theta2, -k2 * k5 - k3 * r, 0.0, -k5 - k3],
        [theta1, -theta1, 0.0, 0.0],
        [theta1 * k1, -k2 * k1, 0.0, -k1],
        [0.0, 0.0, k4, 0.0],
    ])


def jacobian_at_fixed_point(params: ModelParams, alpha: float):
    """Returns ``(J, K)`` where ``K = (K1, ..., K5)``."""
    k = k_constants(params, alpha)
    return jacobian_from_constants(params.theta1, params.theta2, params.r, k), k


def characteristic_polynomial(theta1, theta2, r, k) -> tuple[float, float, float, float]:
    """Coefficients ``(p3, p2, p1, p0)`` of the monic quartic ``det(xI - J)``."""
    k1, k2, k3, k4, k5 = k
    p3 = theta2 + theta1 * (1.0 - k5)
    p2 = k1 * k4 + theta1 * theta2 - theta1 ** 2 * k5 + theta1 * (k2 * k5 + k3 * r)
    p1 = k1 * k4 * (theta1 * (1.0 + k3) + theta2)
    p0 = k1 * k4 * theta1 * (k3 * (r + theta1 - k2) + theta2)
    return (p3, p2, p1, p0)


def routh_hurwitz_quantities(p3, p2, p1, p0) -> tuple[float, ...]:
    """The six quantities that must all be positive for a stable quartic."""
    return (p3, p2, p1, p0, p3 * p2 - p1, p3 * p2 * p1 - p1 ** 2 - p3 ** 2 * p0)


def routh_hurwitz(p3, p2, p1, p0) -> bool:
    return all(q > 0 for q in routh_hurwitz_quantities(p3, p2, p1, p0))


def routh_hurwitz_verdict(p3, p2, p1, p0, tol: float = MARGINAL_TOL) -> str:
    qs = routh_hurwitz_quantities(p3, p2, p1, p0)
    if any(abs(q) <= tol for q in qs):
        return MARGINAL
    return ATTRACTIVE if all(q > 0 for q in qs) else REPULSIVE


def quartic_roots(p3, p2, p1, p0) -> np.ndarray:
    """Roots of ``x^4 + p3 x^3 + p2 x^2 + p1 x + p0`` via companion eigenvalues.

    Each root is Newton-polished (at most 50 steps) and must leave a residual
    below ``1e-8 * max(1, |coefficients|)``.
    """
    coeffs = np.array([1.0, p3, p2, p1, p0], dtype=float)
    if not np.all(np.isfinite(coeffs)):
        raise ConvergenceError("quartic coefficients must be finite")
    companion = np.zeros((4, 4))
    companion[0, :] = -coeffs[1:]
    companion[1:, :-1] = np.eye(3)
    try:
        roots = np.linalg.eigvals(companion).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"companion eigenvalue iteration failed: {exc}") from exc

    dcoeffs = np.polyder(coeffs)
    for i, z in enumerate(roots):
        for _ in range(50):
            fz = np.polyval(coeffs, z)
            dfz = np.polyval(dcoeffs, z)
            if dfz == 0 or abs(fz) < 1e-15:
                break
            step = fz / dfz
            z_new = z - step
            if abs(np.polyval(coeffs, z_new)) >= abs(fz):
                break
            z = z_new
        roots[i] = z

    tol = 1e-8 * max(1.0, float(np.max(np.abs(coeffs))))
    residual = np.abs(np.polyval(coeffs, roots))
    if np.any(residual >= tol):
        raise ConvergenceError(f"quartic root residual {residual.max():.3g} exceeds {tol:.3g}")
    return roots


def analyse_fixed_point(params: ModelParams, alpha: float) -> FixedPointReport:
    fp = fixed_point(params, alpha)
    k = k_constants(params, alpha, fp)
    jac = jacobian_from_constants(params.theta1, params.theta2, params.r, k)
    poly = characteristic_polynomial(params.theta1, params.theta2, params.r, k)
    verdict = routh_hurwitz_verdict(*poly)
    roots = quartic_roots(*poly)
    return FixedPointReport(
        fixed_point=fp,
        jacobian=jac,
        k_constants=k,
        char_poly=poly,
        routh_hurwitz_attractive=routh_hurwitz(*poly),
        eigen_attractive=bool(np.all(roots.real < 0)),
        eigenvalues=roots,
        verdict=verdict,
    )
