"""CSV writers and readers for trajectories, ensembles, sweeps and fixed points."""
from __future__ import annotations

import csv
import math

import numpy as np

from .dynamics import Trajectory
from .equilibrium import FixedPointReport
from .experiments import MC_FIELDS, MonteCarloSummary, SweepResult

TRAJECTORY_COLUMNS = ("t", "alpha", "d_target", "debt", "employment", "wage_share", "profit_share",
                      "growth", "investment_norm", "output", "crisis")


def fmt(x) -> str:
    """12 significant digits; empty string for NaN."""
    x = float(x)
    if math.isnan(x):
        return ""
    return f"{x:.12g}"


def write_trajectory_csv(traj: Trajectory, fh) -> int:
    """Write one row per recorded sample; returns the number of data rows."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRAJECTORY_COLUMNS)
    n = len(traj.times)
    crisis_flags = np.zeros(n, dtype=int)
    if traj.crisis:
        crisis_flags[-1] = 1
    cols = (traj.times, traj.alpha, traj.d_target, traj.debt, traj.employment, traj.wage_share,
            traj.profit_share, traj.growth, traj.investment_norm, traj.levels.output)
    for i in range(n):
        w.writerow([fmt(c[i]) for c in cols] + [str(crisis_flags[i])])
    return n


def read_trajectory_csv(fh) -> dict[str, np.ndarray]:
    reader = csv.reader(fh)
    header = next(reader)
    if tuple(header) != TRAJECTORY_COLUMNS:
        raise ValueError(f"unexpected trajectory header {header}")
    rows = [[float(v) if v != "" else math.nan for v in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    out = {name: data[:, i] for i, name in enumerate(header)}
    out["crisis"] = out["crisis"].astype(int)
    return out


def ensemble_columns() -> list[str]:
    cols = ["t", "runs"]
    for f in MC_FIELDS:
        cols += [f"{f}_mean", f"{f}_std"]
    return cols


def write_ensemble_csv(summary: MonteCarloSummary, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(ensemble_columns())
    for i, t in enumerate(summary.times):
        row = [fmt(t), str(int(summary.counts[i]))]
        for f in MC_FIELDS:
            row += [fmt(summary.mean[f][i]), fmt(summary.std[f][i])]
        w.writerow(row)


def read_ensemble_csv(fh) -> dict[str, np.ndarray]:
    reader = csv.reader(fh)
    header = next(reader)
    rows = [[float(v) if v != "" else math.nan for v in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def write_sweep_csv(result: SweepResult, fh) -> int:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(list(result.axis_names) + ["verdict", "crisis_time"])
    n = 0
    for values, verdict, t_crisis in result.cells():
        w.writerow([fmt(v) for v in values] + [verdict, fmt(t_crisis)])
        n += 1
    return n


def fixed_point_rows(report: FixedPointReport) -> list[tuple[str, str]]:
    fp = report.fixed_point
    rows = [("lambda_bar", fmt(fp.lambda_bar)), ("d_bar", fmt(fp.d_bar)), ("omega_bar", fmt(fp.omega_bar)),
            ("pi_bar", fmt(fp.pi_bar)), ("g_bar", fmt(fp.g_bar)), ("d_target_bar", fmt(fp.d_bar))]
    rows += [(f"K{i + 1}", fmt(k)) for i, k in enumerate(report.k_constants)]
    rows += [(name, fmt(p)) for name, p in zip(("p3", "p2", "p1", "p0"), report.char_poly)]
    for i, z in enumerate(report.eigenvalues):
        rows.append((f"eigenvalue{i + 1}", f"{fmt(z.real)}{'+' if z.imag >= 0 else '-'}{fmt(abs(z.imag))}j"))
    rows += [("routh_hurwitz_attractive", str(report.routh_hurwitz_attractive).lower()),
             ("eigen_attractive", str(report.eigen_attractive).lower()),
             ("verdict", report.verdict)]
    return rows


def write_fixed_point(report: FixedPointReport, fh, format: str = "text") -> None:
    rows = fixed_point_rows(report)
    if format == "csv":
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["quantity", "value"])
        w.writerows(rows)
    else:
        width = max(len(k) for k, _ in rows)
        for k, v in rows:
            fh.write(f"{k:<{width}}  {v}\n")
