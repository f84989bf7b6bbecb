"""Parameter sweeps: final-size landscapes over 1-D and 2-D grids.

Cells are independent pure computations; they are farmed out to a process
pool and reassembled by grid position, so the result is identical whatever
the worker count or completion order.  A failing cell is recorded as an
error entry plus NaN/truncated markers in the matrices - never fatal, never
silently interpolated.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, EpitriggerError
from .scenario import ScenarioConfig, run_scenario

SWEEP_TARGETS = ("beta", "gamma", "beta_i", "gamma_i", "epsilon", "phi",
                 "rho", "pstar")


@dataclass(frozen=True)
class ParamAxis:
    """One linearly spaced grid axis over a named scalar parameter."""

    target: str
    min: float
    max: float
    points: int

    def __post_init__(self):
        if self.target not in SWEEP_TARGETS:
            raise ConfigError(
                f"unknown sweep target '{self.target}'; expected one of "
                f"{', '.join(SWEEP_TARGETS)}")
        if not (np.isfinite(self.min) and np.isfinite(self.max)
                and self.min < self.max):
            raise ConfigError("sweep axis needs finite min < max")
        if not (isinstance(self.points, int) and self.points >= 2):
            raise ConfigError("sweep axis needs integer points >= 2")

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class CellError:
    index: Tuple[int, ...]
    message: str


@dataclass(frozen=True)
class SweepResult:
    """Final-size matrix plus auxiliary metrics, row-major over axis order."""

    axes: Tuple[ParamAxis, ...]
    values: np.ndarray
    truncated: np.ndarray
    detection_times: np.ndarray
    peak_prevalence: np.ndarray
    errors: Tuple[CellError, ...]


@dataclass(frozen=True)
class LineMinimum:
    """Minimizer of one grid line: position, parameter value, final size."""

    index: int
    param_value: float
    value: float
    interior: bool


def _with_target(cfg: ScenarioConfig, target: str, value: float) -> ScenarioConfig:
    if target == "beta":
        return replace(cfg, disease=replace(cfg.disease, beta=value))
    if target == "gamma":
        return replace(cfg, disease=replace(cfg.disease, gamma=value))
    if target == "beta_i":
        return replace(cfg, info=replace(cfg.info, beta_i=value))
    if target == "gamma_i":
        return replace(cfg, info=replace(cfg.info, gamma_i=value))
    if target == "epsilon":
        return replace(cfg, info=replace(cfg.info, epsilon=value))
    if target == "phi":
        return replace(cfg, intervention=replace(cfg.intervention, phi=value))
    if target == "rho":
        return replace(cfg, relapse=replace(cfg.relapse, rho=value))
    if target == "pstar":
        if cfg.trigger is None or cfg.trigger.kind != "prevalence_threshold":
            raise ConfigError("pstar is only sweepable with a "
                              "prevalence_threshold trigger")
        return replace(cfg, trigger=replace(cfg.trigger, pstar=value))
    raise ConfigError(f"unknown sweep target '{target}'")


def _evaluate_cell(task):
    """One grid cell -> (final_size, detection_time, peak, truncated, error).

    Module-level so process pools can pickle it; NaN marks missing values.
    """
    base, assignments = task
    try:
        cfg = base
        for target, value in assignments:
            cfg = _with_target(cfg, target, float(value))
        res = run_scenario(cfg)
        det = math.nan if res.detection_time is None else res.detection_time
        return (res.final_size, det, res.peak_prevalence, res.truncated, None)
    except Exception as exc:  # recorded per cell, never fatal to the sweep
        return (math.nan, math.nan, math.nan, True,
                f"{type(exc).__name__}: {exc}")


def run_sweep(base: ScenarioConfig, axes: Sequence[ParamAxis],
              workers: int = 1) -> SweepResult:
    """Evaluate run_scenario over the Cartesian grid of 1 or 2 axes.

    workers > 1 distributes cells over a process pool; results are
    identical to the serial run because assembly is position-addressed.
    """
    axes = tuple(axes)
    if not 1 <= len(axes) <= 2:
        raise ConfigError("sweeps take one or two axes")
    if len(axes) == 2 and axes[0].target == axes[1].target:
        raise ConfigError("sweep axes must target distinct parameters")
    if any(ax.target == "pstar" for ax in axes):
        if base.trigger is None or base.trigger.kind != "prevalence_threshold":
            raise ConfigError("pstar is only sweepable with a "
                              "prevalence_threshold trigger")
    if not (isinstance(workers, int) and workers >= 1):
        raise ConfigError("workers must be an integer >= 1")

    grids = [ax.values() for ax in axes]
    if len(axes) == 1:
        shape = (axes[0].points,)
        tasks = [(base, ((axes[0].target, v),)) for v in grids[0]]
    else:
        shape = (axes[0].points, axes[1].points)
        tasks = [(base, ((axes[0].target, v1), (axes[1].target, v2)))
                 for v1 in grids[0] for v2 in grids[1]]

    if workers == 1:
        rows = [_evaluate_cell(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate_cell, tasks, chunksize=chunk))

    values = np.empty(shape)
    detection = np.empty(shape)
    peak = np.empty(shape)
    truncated = np.zeros(shape, dtype=bool)
    errors = []
    for flat, (fsize, det, pk, trunc, err) in enumerate(rows):
        idx = np.unravel_index(flat, shape)
        values[idx] = fsize
        detection[idx] = det
        peak[idx] = pk
        truncated[idx] = trunc
        if err is not None:
            errors.append(CellError(tuple(int(i) for i in idx), err))

    return SweepResult(axes=axes, values=values, truncated=truncated,
                       detection_times=detection, peak_prevalence=peak,
                       errors=tuple(errors))


def argmin_along(result: SweepResult, axis: int):
    """Minimizing grid point along `axis` for each line of the other axis.

    Returns a list of LineMinimum (or None where every cell of the line is
    truncated/failed).  Only non-truncated finite cells compete; ties break
    to the smallest parameter value.  For a 1-D sweep the list has one entry.
    """
    if axis not in range(len(result.axes)):
        raise ConfigError(f"axis must index one of {len(result.axes)} axes")
    scan_axis = result.axes[axis]
    param_values = scan_axis.values()

    if len(result.axes) == 1:
        lines = result.values[np.newaxis, :]
        masks = (result.truncated | ~np.isfinite(result.values))[np.newaxis, :]
    elif axis == 0:
        lines = result.values.T
        masks = (result.truncated | ~np.isfinite(result.values)).T
    else:
        lines = result.values
        masks = result.truncated | ~np.isfinite(result.values)

    out = []
    for line, bad in zip(lines, masks):
        if bad.all():
            out.append(None)
            continue
        candidate = np.where(bad, np.inf, line)
        j = int(np.argmin(candidate))
        out.append(LineMinimum(index=j,
                               param_value=float(param_values[j]),
                               value=float(line[j]),
                               interior=0 < j < scan_axis.points - 1))
    return out


def is_nonmonotonic(line: Sequence[float], tolerance: float = 1e-3) -> bool:
    """True iff some interior point dips below (or bumps above) both a
    predecessor and a successor by more than `tolerance`."""
    v = np.asarray(line, dtype=float)
    if v.size < 3:
        raise ConfigError("non-monotonicity needs at least 3 points")
    if tolerance < 0:
        raise ConfigError("tolerance must be >= 0")
    prefix_max = np.maximum.accumulate(v)
    suffix_max = np.maximum.accumulate(v[::-1])[::-1]
    prefix_min = np.minimum.accumulate(v)
    suffix_min = np.minimum.accumulate(v[::-1])[::-1]
    for j in range(1, v.size - 1):
        dip = v[j] < min(prefix_max[j - 1], suffix_max[j + 1]) - tolerance
        bump = v[j] > max(prefix_min[j - 1], suffix_min[j + 1]) + tolerance
        if dip or bump:
            return True
    return False
