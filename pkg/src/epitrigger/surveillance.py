"""Outbreak detection from randomized daily testing.

With prevalence phi_s on day s and N_s individuals tested that day, the
chance that day s produces no positive is (1 - phi_s)^(N_s), so the
cumulative probability of having detected at least one case by day t is

    P_det(t) = 1 - prod_{s=1..t} (1 - phi_s)^(N_s)

evaluated in log space, 1 - exp(sum N_s * log(1 - phi_s)), which stays
accurate when the per-day factors are all close to 1.  The detection time
tau_det is the first day P_det reaches the required confidence (0.95 by
default), and the prevalence on that day is the threshold P* the chosen
surveillance effort effectively implements.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, InvalidPrevalenceError


@dataclass(frozen=True)
class SurveillanceParams:
    """Daily testing effort N_s (constant or per-day) and confidence level."""

    daily_tests: Union[float, Tuple[float, ...]]
    confidence: float = 0.95

    def __post_init__(self):
        if isinstance(self.daily_tests, (list, tuple, np.ndarray)):
            object.__setattr__(self, "daily_tests",
                               tuple(float(v) for v in self.daily_tests))
            bad = [v for v in self.daily_tests if not (v >= 0 and np.isfinite(v))]
            if bad:
                raise ConfigError("daily_tests entries must be finite and >= 0")
        else:
            if not (self.daily_tests >= 0 and np.isfinite(self.daily_tests)):
                raise ConfigError("daily_tests must be finite and >= 0")
        if not (0.0 < self.confidence < 1.0):
            raise ConfigError("confidence must lie strictly between 0 and 1")


@dataclass(frozen=True)
class TriggerSpec:
    """When to declare the emergency: a direct prevalence threshold P*, or a
    surveillance effort from which the threshold emerges."""

    kind: str
    pstar: Optional[float] = None
    surveillance: Optional[SurveillanceParams] = None

    def __post_init__(self):
        if self.kind == "prevalence_threshold":
            if self.pstar is None:
                raise ConfigError("prevalence_threshold trigger requires pstar")
            if not (0.0 < self.pstar < 1.0):
                raise ConfigError("pstar must satisfy 0 < pstar < 1")
        elif self.kind == "surveillance_effort":
            if self.surveillance is None:
                raise ConfigError("surveillance_effort trigger requires "
                                  "surveillance parameters")
        else:
            raise ConfigError("trigger kind must be prevalence_threshold or "
                              "surveillance_effort")


@dataclass(frozen=True)
class DetectionResult:
    """Detection day (1-based, None if confidence never reached), the
    cumulative probability series, and the prevalence on the detection day."""

    detection_day: Optional[int]
    cumulative_probability: np.ndarray
    prevalence_at_detection: Optional[float]


def _tests_array(daily_tests, length: int) -> np.ndarray:
    if isinstance(daily_tests, (list, tuple, np.ndarray)):
        tests = np.asarray(daily_tests, dtype=float)
        if tests.ndim != 1 or len(tests) != length:
            raise ConfigError(
                f"daily_tests sequence length {tests.size} does not match "
                f"{length} days of prevalence")
    else:
        tests = np.full(length, float(daily_tests))
    if not np.all(np.isfinite(tests)) or np.any(tests < 0):
        raise ConfigError("daily_tests must be finite and >= 0")
    return tests


def detection_probability(prevalence_by_day: Sequence[float],
                          daily_tests) -> np.ndarray:
    """Cumulative detection probability after each day.

    Element t is 1 - prod_{s<=t} (1 - phi_s)^(N_s); the product is
    accumulated as a sum of N_s*log1p(-phi_s) terms so tiny prevalences do
    not underflow.  A day with phi_s = 1 and any testing makes the
    probability exactly 1 from there on; a day with no tests contributes
    nothing regardless of prevalence.
    """
    prev = np.asarray(prevalence_by_day, dtype=float)
    if prev.ndim != 1:
        raise InvalidPrevalenceError("prevalence series must be 1-D")
    if prev.size and (not np.all(np.isfinite(prev))
                      or np.any(prev < 0.0) or np.any(prev > 1.0)):
        raise InvalidPrevalenceError("prevalence values must lie in [0, 1]")
    tests = _tests_array(daily_tests, prev.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_miss = np.where(tests > 0.0, tests * np.log1p(-prev), 0.0)
    return -np.expm1(np.cumsum(log_miss))


def detection_time(prevalence_by_day: Sequence[float],
                   params: SurveillanceParams) -> DetectionResult:
    """First day the cumulative detection probability reaches the confidence."""
    cum = detection_probability(prevalence_by_day, params.daily_tests)
    hits = np.nonzero(cum >= params.confidence)[0]
    if hits.size == 0:
        return DetectionResult(None, cum, None)
    j = int(hits[0])
    prev = np.asarray(prevalence_by_day, dtype=float)
    return DetectionResult(j + 1, cum, float(prev[j]))


def sample_daily_prevalence(trajectory) -> np.ndarray:
    """Prevalence I/N interpolated at integer days s = 1, 2, ... within the
    trajectory span.  Detection always runs against the naive phase, so
    prevalence is the I compartment only."""
    last_day = int(np.floor(trajectory.final_time))
    if last_day < 1:
        return np.zeros(0)
    days = np.arange(1, last_day + 1, dtype=float)
    infectious = np.interp(days, trajectory.times, trajectory.column("I"))
    return infectious / trajectory.n


def effort_to_threshold(naive_trajectory,
                        params: SurveillanceParams) -> Optional[float]:
    """The prevalence threshold P* a given surveillance effort induces:
    prevalence on the detection day, or None if the effort never reaches
    the confidence level over the trajectory span."""
    prev = sample_daily_prevalence(naive_trajectory)
    return detection_time(prev, params).prevalence_at_detection
