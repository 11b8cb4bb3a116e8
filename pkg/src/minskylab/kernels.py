"""Batch fixed-step RK4 kernels for the four-variable model.

Two interchangeable backends integrate ``n_runs`` independent trajectories:

* ``rk4_batch_numba``: scalar loops compiled with numba, one run at a time.
* ``rk4_batch_numpy``: the same scheme vectorized across runs with numpy.

``integrate_batch`` picks numba unless ``MINSKYLAB_DISABLE_NUMBA`` is set.

Parameter rows follow :meth:`ModelParams.as_vector`:
``(r, delta, nu, theta1, theta2, eta1, eta2, d0, c1, c2, c3, c4)``.
Productivity growth is read from ``alpha_table[row, k // steps_per_block]``
at the start of step ``k`` and held for the whole step; the table has either
one row shared by every run or one row per run.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import _accel
from ._accel import njit

COMPLETED = 0
CRISIS = 1
SINGULARITY = 2
DEGENERATE = 3

STATUS_NAMES = {COMPLETED: "completed", CRISIS: "crisis", SINGULARITY: "singularity", DEGENERATE: "degenerate"}

LAMBDA_CAP = 0.99
DEGENERATE_FLOOR = 1e-12


class BatchResult(NamedTuple):
    samples: np.ndarray  # (n_runs, n_samples, 4), NaN after termination
    log_output: np.ndarray  # (n_runs, n_samples), running integral of g
    status: np.ndarray  # (n_runs,) int
    term_step: np.ndarray  # (n_runs,) step index of the last valid state
    last_state: np.ndarray  # (n_runs, 4)
    last_log_output: np.ndarray  # (n_runs,)


@njit
def _rhs(p, dT, d, lam, w, a, eps):
    r, delta, nu, th1, th2, e1, e2, d0, c1, c2, c3, c4 = (
        p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], p[9], p[10], p[11])
    gap = nu - d
    if not gap > eps:
        return 0.0, 0.0, 0.0, 0.0, False
    pi = 1.0 - w - r * d
    g = (pi + th1 * (dT - d) - delta * nu) / gap
    f_lam = lam * (g - a)
    if lam >= LAMBDA_CAP and f_lam > 0.0:
        f_lam = 0.0
    phi = c1 * math.exp(c2 * (lam - c3)) - c4
    return th2 * (d0 + e1 * g + e2 * pi - dT), th1 * (dT - d), f_lam, w * (phi - a), True


@njit
def _growth_investment(p, dT, d, w, eps):
    r, delta, nu, th1 = p[0], p[1], p[2], p[3]
    gap = nu - d
    if not gap > eps:
        return 0.0, 0.0, False
    pi = 1.0 - w - r * d
    g = (pi + th1 * (dT - d) - delta * nu) / gap
    return g, pi + th1 * (dT - d) + d * g, True


@njit
def rk4_batch_numba(pvec, x0, alpha_table, steps_per_block, dt, n_steps, stride, eps):
    n_runs = x0.shape[0]
    n_samples = n_steps // stride + 1
    shared = alpha_table.shape[0] == 1
    samples = np.full((n_runs, n_samples, 4), np.nan)
    log_out = np.full((n_runs, n_samples), np.nan)
    status = np.zeros(n_runs, dtype=np.int64)
    term_step = np.full(n_runs, n_steps, dtype=np.int64)
    last_state = np.empty((n_runs, 4))
    last_log = np.zeros(n_runs)
    half = 0.5 * dt
    for i in range(n_runs):
        p = pvec[i]
        row = 0 if shared else i
        dT, d, lam, w = x0[i, 0], x0[i, 1], x0[i, 2], x0[i, 3]
        logy = 0.0
        samples[i, 0, 0] = dT
        samples[i, 0, 1] = d
        samples[i, 0, 2] = lam
        samples[i, 0, 3] = w
        log_out[i, 0] = 0.0
        g, inv, ok = _growth_investment(p, dT, d, w, eps)
        code = COMPLETED
        k_end = n_steps
        if not ok:
            code = SINGULARITY
            k_end = 0
        elif inv < 0.0:
            code = CRISIS
            k_end = 0
        if code == COMPLETED:
            for k in range(n_steps):
                a = alpha_table[row, k // steps_per_block]
                a1, b1, c1_, e1_, ok1 = _rhs(p, dT, d, lam, w, a, eps)
                a2, b2, c2_, e2_, ok2 = _rhs(p, dT + half * a1, d + half * b1, lam + half * c1_, w + half * e1_, a, eps)
                a3, b3, c3_, e3_, ok3 = _rhs(p, dT + half * a2, d + half * b2, lam + half * c2_, w + half * e2_, a, eps)
                a4, b4, c4_, e4_, ok4 = _rhs(p, dT + dt * a3, d + dt * b3, lam + dt * c3_, w + dt * e3_, a, eps)
                if not (ok1 and ok2 and ok3 and ok4):
                    code = SINGULARITY
                    k_end = k
                    break
                dT = dT + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
                d = d + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                lam = lam + dt / 6.0 * (c1_ + 2.0 * c2_ + 2.0 * c3_ + c4_)
                w = w + dt / 6.0 * (e1_ + 2.0 * e2_ + 2.0 * e3_ + e4_)
                g_new, inv, ok = _growth_investment(p, dT, d, w, eps)
                if ok:
                    logy += half * (g + g_new)
                    g = g_new
                if (k + 1) % stride == 0:
                    j = (k + 1) // stride
                    samples[i, j, 0] = dT
                    samples[i, j, 1] = d
                    samples[i, j, 2] = lam
                    samples[i, j, 3] = w
                    log_out[i, j] = logy
                if not (math.isfinite(lam) and math.isfinite(w) and lam >= DEGENERATE_FLOOR and w >= DEGENERATE_FLOOR):
                    code = DEGENERATE
                    k_end = k + 1
                    break
                if not ok:
                    code = SINGULARITY
                    k_end = k + 1
                    break
                if inv < 0.0:
                    code = CRISIS
                    k_end = k + 1
                    break
        status[i] = code
        term_step[i] = k_end
        last_state[i, 0] = dT
        last_state[i, 1] = d
        last_state[i, 2] = lam
        last_state[i, 3] = w
        last_log[i] = logy
    return samples, log_out, status, term_step, last_state, last_log


def _rhs_numpy(p, dT, d, lam, w, a, eps):
    r, delta, nu, th1, th2, e1, e2, d0, c1, c2, c3, c4 = p
    gap = nu - d
    ok = gap > eps
    pi = 1.0 - w - r * d
    g = (pi + th1 * (dT - d) - delta * nu) / gap
    f_lam = lam * (g - a)
    f_lam[(lam >= LAMBDA_CAP) & (f_lam > 0.0)] = 0.0
    phi = c1 * np.exp(c2 * (lam - c3)) - c4
    return th2 * (d0 + e1 * g + e2 * pi - dT), th1 * (dT - d), f_lam, w * (phi - a), ok


def _growth_investment_numpy(p, dT, d, w, eps):
    r, delta, nu, th1 = p[0], p[1], p[2], p[3]
    gap = nu - d
    ok = gap > eps
    pi = 1.0 - w - r * d
    g = (pi + th1 * (dT - d) - delta * nu) / gap
    return g, pi + th1 * (dT - d) + d * g, ok


def rk4_batch_numpy(pvec, x0, alpha_table, steps_per_block, dt, n_steps, stride, eps):
    n_runs = x0.shape[0]
    n_samples = n_steps // stride + 1
    samples = np.full((n_runs, n_samples, 4), np.nan)
    log_out = np.full((n_runs, n_samples), np.nan)
    status = np.zeros(n_runs, dtype=np.int64)
    term_step = np.full(n_runs, n_steps, dtype=np.int64)
    p = tuple(np.ascontiguousarray(col) for col in pvec.T)
    dT, d, lam, w = (np.array(col) for col in x0.T)
    samples[:, 0] = x0
    log_out[:, 0] = 0.0
    logy = np.zeros(n_runs)
    half = 0.5 * dt
    sixth = dt / 6.0

    with np.errstate(divide="ignore", invalid="ignore"):
        g, inv, ok = _growth_investment_numpy(p, dT, d, w, eps)
    status[~ok] = SINGULARITY
    status[ok & (inv < 0.0)] = CRISIS
    active = status == COMPLETED
    term_step[~active] = 0
    n_active = int(active.sum())
    shared = alpha_table.shape[0] == 1

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for k in range(n_steps):
            if n_active == 0:
                break
            blk = k // steps_per_block
            a = alpha_table[0, blk] if shared else alpha_table[:, blk]
            a1, b1, c1, e1, ok1 = _rhs_numpy(p, dT, d, lam, w, a, eps)
            a2, b2, c2, e2, ok2 = _rhs_numpy(p, dT + half * a1, d + half * b1, lam + half * c1, w + half * e1, a, eps)
            a3, b3, c3, e3, ok3 = _rhs_numpy(p, dT + half * a2, d + half * b2, lam + half * c2, w + half * e2, a, eps)
            a4, b4, c4, e4, ok4 = _rhs_numpy(p, dT + dt * a3, d + dt * b3, lam + dt * c3, w + dt * e3, a, eps)
            sing = active & ~(ok1 & ok2 & ok3 & ok4)
            if sing.any():
                status[sing] = SINGULARITY
                term_step[sing] = k
                active &= ~sing
            dT_new = dT + sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            d_new = d + sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            lam_new = lam + sixth * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
            w_new = w + sixth * (e1 + 2.0 * e2 + 2.0 * e3 + e4)
            if active.all():
                dT, d, lam, w = dT_new, d_new, lam_new, w_new
            else:
                dT = np.where(active, dT_new, dT)
                d = np.where(active, d_new, d)
                lam = np.where(active, lam_new, lam)
                w = np.where(active, w_new, w)
            g_new, inv, ok = _growth_investment_numpy(p, dT, d, w, eps)
            upd = active & ok
            logy = np.where(upd, logy + half * (g + g_new), logy)
            g = np.where(upd, g_new, g)
            if (k + 1) % stride == 0:
                j = (k + 1) // stride
                for col, v in enumerate((dT, d, lam, w)):
                    samples[active, j, col] = v[active]
                log_out[active, j] = logy[active]
            bad = ~(np.isfinite(lam) & np.isfinite(w) & (lam >= DEGENERATE_FLOOR) & (w >= DEGENERATE_FLOOR))
            ended = (bad, ~ok, inv < 0.0)
            for code, mask in zip((DEGENERATE, SINGULARITY, CRISIS), ended):
                hit = active & mask
                if hit.any():
                    status[hit] = code
                    term_step[hit] = k + 1
                    active &= ~hit
            n_active = int(active.sum())
    return samples, log_out, status, term_step, np.stack([dT, d, lam, w], axis=1), logy


def integrate_batch(pvec, x0, alpha_table, steps_per_block, dt, n_steps, stride,
                    eps=1e-6, backend: str | None = None) -> BatchResult:
    """Integrate a batch of runs; ``backend`` is ``"numba"``, ``"numpy"`` or ``None`` (auto)."""
    if backend is None:
        backend = "numba" if _accel.USE_NUMBA else "numpy"
    if backend == "numba" and not _accel.HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    pvec = np.ascontiguousarray(pvec, dtype=np.float64)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    alpha_table = np.ascontiguousarray(np.atleast_2d(alpha_table), dtype=np.float64)
    if pvec.ndim != 2 or pvec.shape[1] != 12 or x0.shape != (pvec.shape[0], 4):
        raise ValueError("pvec must be (n_runs, 12) and x0 (n_runs, 4)")
    if alpha_table.shape[0] not in (1, x0.shape[0]):
        raise ValueError("alpha_table needs one shared row or one row per run")
    if (n_steps - 1) // steps_per_block >= alpha_table.shape[1]:
        raise ValueError("alpha_table is too short for the requested number of steps")
    fn = rk4_batch_numba if backend == "numba" else rk4_batch_numpy
    out = fn(pvec, x0, alpha_table, int(steps_per_block), float(dt), int(n_steps), int(stride), float(eps))
    return BatchResult(*out)
