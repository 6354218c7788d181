"""Plot-ready artifact files: CSV tables and key-value summaries.

Every emitter here is deterministic: fixed column orders, 12
significant digits for floats, comma separators, and LF line endings,
so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import os

import numpy as np

from .ensemble import Ensemble
from .policy import COMPONENT_NAMES, P12, P21, PowerPolicy
from .region import RegionResult
from .solver import SolveResult

POLICY_HEADER = ("index",) + COMPONENT_NAMES
ENSEMBLE_HEADER = ("index", "h10", "h20", "h12", "h21", "prob")
TRACE_HEADER = ("iter", "objective", "best_so_far", "step", "active_branch")
REGION_HEADER = ("mode", "mu1", "mu2", "r1", "r2", "on_hull")
HULL_HEADER = ("mode", "r1", "r2")
SURFACE_HEADER = ("s12", "s21", "p12", "p21")


def format_value(value) -> str:
    """Canonical text form: floats at 12 significant digits, everything
    else via str."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_text(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def ensemble_csv_text(ensemble: Ensemble) -> str:
    rows = ((i, *ensemble.gains[i], ensemble.probs[i])
            for i in range(ensemble.n_states))
    return csv_text(ENSEMBLE_HEADER, rows)


def policy_csv_text(policy: PowerPolicy) -> str:
    rows = ((i, *policy.matrix[i]) for i in range(policy.matrix.shape[0]))
    return csv_text(POLICY_HEADER, rows)


def read_policy_csv(path: str, ensemble: Ensemble) -> PowerPolicy:
    """Load a policy CSV back against its ensemble.

    Raises ValueError when the file does not line up with the ensemble
    (wrong header, wrong row count, or out-of-order indices).
    """
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.rstrip("\n") for line in handle if line.strip()]
    if not lines or tuple(lines[0].split(",")) != POLICY_HEADER:
        raise ValueError(f"{path}: not a policy CSV "
                         f"(expected header {','.join(POLICY_HEADER)})")
    body = lines[1:]
    if len(body) != ensemble.n_states:
        raise ValueError(f"{path}: {len(body)} rows do not match the "
                         f"{ensemble.n_states}-state ensemble")
    matrix = np.zeros((ensemble.n_states, 6))
    for row_number, line in enumerate(body):
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"{path}: row {row_number} has "
                             f"{len(parts)} fields, expected 7")
        if int(parts[0]) != row_number:
            raise ValueError(f"{path}: row {row_number} carries index "
                             f"{parts[0]}; rows must be in state order")
        matrix[row_number] = [float(p) for p in parts[1:]]
    return PowerPolicy(ensemble, matrix)


def trace_csv_text(result: SolveResult, rate_scale: float = 1.0) -> str:
    rows = ((k,
             result.objective_trace[k] * rate_scale,
             result.best_trace[k] * rate_scale,
             result.step_trace[k],
             "coherent" if result.branch_trace[k] else "decode")
            for k in range(result.iterations_run))
    return csv_text(TRACE_HEADER, rows)


def region_csv_text(region: RegionResult, rate_scale: float = 1.0) -> str:
    rows = ((region.mode.value, p.mu[0], p.mu[1],
             p.r1 * rate_scale, p.r2 * rate_scale, on_hull)
            for p, on_hull in zip(region.points, region.on_hull))
    return csv_text(REGION_HEADER, rows)


def hull_csv_text(regions, rate_scale: float = 1.0) -> str:
    rows = ((region.mode.value, r1 * rate_scale, r2 * rate_scale)
            for region in regions
            for r1, r2 in region.hull)
    return csv_text(HULL_HEADER, rows)


def surface_csv_text(policy: PowerPolicy, indices) -> str:
    ens = policy.ensemble
    indices = np.asarray(indices, dtype=int)
    rows = ((ens.s12[i], ens.s21[i],
             policy.matrix[i, P12], policy.matrix[i, P21])
            for i in indices)
    return csv_text(SURFACE_HEADER, rows)


def summary_text(entries: dict) -> str:
    return "".join(f"{key} = {format_value(value)}\n"
                   for key, value in entries.items())
