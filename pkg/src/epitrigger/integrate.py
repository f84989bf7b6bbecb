"""Fixed-step explicit integration with threshold-event localization.

The default scheme is classical 4th-order Runge-Kutta at dt = 0.01 days;
forward Euler is kept for convergence testing.  The systems integrated here
are small, smooth and non-stiff, so a fixed step keeps repeated runs (and
parameter sweeps) exactly reproducible: identical inputs give bit-identical
trajectories.

Right-hand sides built by model.naive_rhs / model.response_rhs are marched
by compiled kernels; any other callable rhs(t, y) -> dy/dt takes the
plain-Python path.  Both paths perform the same arithmetic in the same
order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from . import _kernels
from .errors import ConfigError, NumericalInstabilityError
from .model import RhsSpec

# A state whose compartment sum drifts from n by more than this (relative to
# n) is treated as numerical blowup, not rounding.
CONSERVATION_ABORT_RTOL = 1e-6

_METHOD_IDS = {"rk4": _kernels.METHOD_RK4, "euler": _kernels.METHOD_EULER}


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, scheme and tolerances for the fixed-step march."""

    dt: float = 0.01
    method: str = "rk4"
    event_tolerance: float = 1e-6
    nonneg_tolerance: float = 1e-9
    sample_stride: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ConfigError("dt must be finite and > 0")
        if self.method not in _METHOD_IDS:
            raise ConfigError(f"method must be one of {sorted(_METHOD_IDS)}")
        if not (0 < self.event_tolerance <= self.dt):
            raise ConfigError("event_tolerance must satisfy 0 < event_tolerance <= dt")
        if self.nonneg_tolerance < 0:
            raise ConfigError("nonneg_tolerance must be >= 0")
        if not (isinstance(self.sample_stride, int) and self.sample_stride >= 1):
            raise ConfigError("sample_stride must be an integer >= 1")


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution: times (days), states (len(times) x m), labels."""

    times: np.ndarray
    states: np.ndarray
    labels: Tuple[str, ...]
    n: float

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ConfigError("times and states must have equal length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ConfigError("trajectory times must be strictly increasing")

    def column(self, label: str) -> np.ndarray:
        return self.states[:, self.labels.index(label)]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def state_at(self, t: float) -> np.ndarray:
        """State at time t by per-compartment linear interpolation."""
        return np.array([np.interp(t, self.times, self.states[:, j])
                         for j in range(self.states.shape[1])])

    def truncated_at(self, t_cut: float) -> "Trajectory":
        """Samples up to t_cut, with an interpolated end point if needed."""
        keep = self.times <= t_cut
        times = self.times[keep]
        states = self.states[keep]
        if len(times) == 0 or times[-1] < t_cut:
            times = np.append(times, t_cut)
            states = np.vstack([states, self.state_at(t_cut)])
        return Trajectory(times, states, self.labels, self.n)


@dataclass(frozen=True)
class ThresholdEvent:
    """Fires when a labelled compartment first reaches `level` (individuals)."""

    label: str
    level: float


Rhs = Union[RhsSpec, Callable[[float, np.ndarray], np.ndarray]]


def _as_array(initial) -> np.ndarray:
    if hasattr(initial, "as_array"):
        return initial.as_array().astype(float)
    arr = np.asarray(initial, dtype=float).copy()
    if arr.ndim != 1:
        raise ConfigError("initial state must be a flat vector")
    return arr


def _raise_on_failure(status: int, t_fail: float):
    if status == _kernels.FAIL_CONSERVATION:
        raise NumericalInstabilityError(
            f"conservation violated beyond {CONSERVATION_ABORT_RTOL} * n at t = {t_fail:.6g} days")
    if status == _kernels.FAIL_NEGATIVE:
        raise NumericalInstabilityError(
            f"compartment negative beyond tolerance at t = {t_fail:.6g} days")


def _drive(spec: RhsSpec, y0: np.ndarray, t0: float, t1: float,
           cfg: IntegratorConfig, event_index: int = -1, event_level: float = 0.0,
           settle_mode: int = _kernels.SETTLE_NONE, settle_level: float = 0.0):
    """Compiled march of a RhsSpec.  Returns (Trajectory, status, event_time).

    event_time is the localized crossing when status is HIT_EVENT, else None.
    """
    params = spec.params_array()
    times, states, status, t_fail = _kernels.march(
        spec.model_id, params, y0, t0, t1, cfg.dt,
        _METHOD_IDS[cfg.method], cfg.sample_stride,
        event_index, event_level, settle_mode, settle_level,
        cfg.event_tolerance, cfg.nonneg_tolerance * spec.n,
        CONSERVATION_ABORT_RTOL * spec.n)
    _raise_on_failure(status, t_fail)
    traj = Trajectory(times, states, spec.labels, spec.n)
    event_time = float(times[-1]) if status == _kernels.HIT_EVENT else None
    return traj, status, event_time


def _hermite_py(y0, f0, y1, f1, h, theta):
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + theta
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return h00 * y0 + h * (h10 * f0) + h01 * y1 + h * (h11 * f1)


def _march_python(rhs, y0, t0, t1, cfg: IntegratorConfig, predicate=None,
                  n: Optional[float] = None):
    """Plain-Python twin of the compiled march, for arbitrary callables.

    Conservation / negativity checks apply only when n is given (the rhs is
    then assumed to describe a closed population); non-finite values always
    abort.  Returns (times, states, status, event_time).
    """
    method = cfg.method
    dt = cfg.dt
    stride = cfg.sample_stride
    nonneg_tol = (cfg.nonneg_tolerance * n) if n is not None else None
    cons_tol = (CONSERVATION_ABORT_RTOL * n) if n is not None else None

    y = y0.copy()
    times = [t0]
    states = [y.copy()]

    def check(yv, tv):
        total = float(np.sum(yv))
        if not np.isfinite(total):
            raise NumericalInstabilityError(
                f"state became non-finite at t = {tv:.6g} days")
        if cons_tol is not None and not (abs(total - n) <= cons_tol):
            raise NumericalInstabilityError(
                f"conservation violated beyond {CONSERVATION_ABORT_RTOL} * n at t = {tv:.6g} days")
        if nonneg_tol is not None and not np.all(yv >= -nonneg_tol):
            raise NumericalInstabilityError(
                f"compartment negative beyond tolerance at t = {tv:.6g} days")

    check(y, t0)
    if predicate is not None and predicate(t0, y):
        return (np.array(times), np.array(states), _kernels.HIT_EVENT, t0)
    if t1 <= t0:
        return (np.array(times), np.array(states), _kernels.REACHED_END, None)

    t = t0
    k = 0
    while t < t1:
        t_next = t0 + (k + 1) * dt
        if t_next > t1:
            t_next = t1
        h = t_next - t

        k1 = rhs(t, y)
        if method == "rk4":
            k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = rhs(t + h, y + h * k3)
            ynew = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            ynew = y + h * k1

        check(ynew, t_next)

        if predicate is not None and predicate(t_next, ynew):
            f1 = rhs(t_next, ynew)
            lo, hi = 0.0, 1.0
            while (hi - lo) * h > cfg.event_tolerance:
                mid = 0.5 * (lo + hi)
                ymid = _hermite_py(y, k1, ynew, f1, h, mid)
                if predicate(t + mid * h, ymid):
                    hi = mid
                else:
                    lo = mid
            y_event = _hermite_py(y, k1, ynew, f1, h, hi)
            t_event = t + hi * h
            times.append(t_event)
            states.append(y_event)
            return (np.array(times), np.array(states), _kernels.HIT_EVENT, t_event)

        y = ynew
        t = t_next
        k += 1
        if k % stride == 0 or t >= t1:
            times.append(t)
            states.append(y.copy())

    return (np.array(times), np.array(states), _kernels.REACHED_END, None)


def _resolve_meta(rhs: Rhs, y0: np.ndarray, labels, n):
    if isinstance(rhs, RhsSpec):
        return rhs.labels, rhs.n
    if labels is None:
        labels = tuple(f"y{j}" for j in range(y0.size))
    return tuple(labels), n


def integrate(rhs: Rhs, initial, t_span: Tuple[float, float],
              cfg: Optional[IntegratorConfig] = None,
              labels: Optional[Sequence[str]] = None,
              n: Optional[float] = None) -> Trajectory:
    """March `rhs` from t_span[0] to t_span[1], sampling every accepted step.

    The final partial step is shortened to land exactly on t_span[1].
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ConfigError("t_span end must exceed start")
    y0 = _as_array(initial)
    if isinstance(rhs, RhsSpec):
        traj, status, _ = _drive(rhs, y0, t0, t1, cfg)
        return traj
    labels, n = _resolve_meta(rhs, y0, labels, n)
    times, states, status, _ = _march_python(rhs, y0, t0, t1, cfg, None, n)
    return Trajectory(times, states, labels, n if n is not None else float("nan"))


def integrate_until(rhs: Rhs, initial, predicate, t_max: float,
                    cfg: Optional[IntegratorConfig] = None,
                    t_start: float = 0.0,
                    labels: Optional[Sequence[str]] = None,
                    n: Optional[float] = None) -> Tuple[Trajectory, Optional[float]]:
    """March until `predicate` first fires or t_max is reached.

    The crossing is localized by bisection on the cubic Hermite interpolant
    of the bracketing step to within cfg.event_tolerance days, and the
    trajectory's last sample is the state at the localized time.  Returns
    (trajectory, crossing time) with crossing None if the predicate never
    fired.  `predicate` is either a ThresholdEvent or a callable
    predicate(t, y) -> bool that crosses once within the firing step.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(t_start), float(t_max)
    y0 = _as_array(initial)

    if isinstance(rhs, RhsSpec) and isinstance(predicate, ThresholdEvent):
        idx = rhs.labels.index(predicate.label)
        traj, status, event_time = _drive(rhs, y0, t0, t1, cfg,
                                          event_index=idx,
                                          event_level=predicate.level)
        return traj, event_time

    if isinstance(predicate, ThresholdEvent):
        if labels is None:
            raise ConfigError("labels are required to resolve a ThresholdEvent "
                              "on a plain-callable rhs")
        idx = tuple(labels).index(predicate.label)
        level = predicate.level
        predicate = lambda t, y, _i=idx, _l=level: y[_i] >= _l

    labels, n = _resolve_meta(rhs, y0, labels, n)
    times, states, status, event_time = _march_python(rhs, y0, t0, t1, cfg,
                                                      predicate, n)
    traj = Trajectory(times, states, labels, n if n is not None else float("nan"))
    return traj, event_time
