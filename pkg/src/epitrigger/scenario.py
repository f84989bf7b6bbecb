"""Two-phase outbreak scenarios: naive spread, detection, triggered response.

Phase 1 integrates the naive SIR system from (S = n - i0, I = i0, R = 0)
until the trigger fires or the horizon ends.  A prevalence_threshold trigger
fires when I/N reaches P*; a surveillance_effort trigger runs the detection
model against the naive trajectory sampled at integer days and fires on the
detection day.  The handoff seeds exactly one aware individual (the index
detection), and phase 2 integrates the response system to the horizon or to
extinction.

A run counts as settled when active cases I + Q drop below the extinction
threshold and the remaining susceptible pool is too small to restart growth
even if everyone relapsed to unaware; otherwise the result is flagged
truncated so an unconverged final size is never reported silently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import (CannotSeedAwarenessError, ConfigError,
                     DegeneratePopulationError)
from .integrate import IntegratorConfig, Trajectory, _drive
from .model import (DiseaseParams, InfoParams, InterventionParams,
                    NaiveState, RelapseParams, ResponseState,
                    naive_rhs, response_rhs)
from .surveillance import (SurveillanceParams, TriggerSpec, detection_time,
                           sample_daily_prevalence)

_NAIVE_I = 1
_RESP_Q = 3
_RESP_I = 4


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one run needs; a pure value, safe to fan out to workers."""

    disease: DiseaseParams = DiseaseParams(beta=0.3, gamma=0.1)
    info: InfoParams = InfoParams(beta_i=1.5, gamma_i=0.1, epsilon=0.8)
    intervention: InterventionParams = InterventionParams(phi=0.2)
    relapse: RelapseParams = RelapseParams(rho=0.0)
    trigger: Optional[TriggerSpec] = TriggerSpec(kind="prevalence_threshold",
                                                 pstar=0.025)
    n: float = 1e5
    i0: float = 10.0
    t_max: float = 1000.0
    # fraction of n below which (with no regrowth possible) the run settles;
    # 1e-8 of the default population is 1e-3 individuals.  0 disables the
    # early stop: the run always covers the full horizon, which then counts
    # as the requested window rather than a truncation.
    extinction_threshold: float = 1e-8
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        if not (self.n > 0 and np.isfinite(self.n)):
            raise DegeneratePopulationError("population n must be finite and > 0")
        if not (0 < self.i0 < self.n):
            raise DegeneratePopulationError("i0 must satisfy 0 < i0 < n")
        if not (self.t_max > 0 and np.isfinite(self.t_max)):
            raise ConfigError("t_max must be finite and > 0")
        if not (self.extinction_threshold >= 0):
            raise ConfigError("extinction_threshold must be >= 0")


@dataclass(frozen=True)
class SimResult:
    """Metrics and trajectories of one scenario run."""

    final_size: float
    peak_prevalence: float
    peak_time: float
    detection_time: Optional[float]
    trigger_prevalence: Optional[float]
    phase1: Trajectory
    phase2: Optional[Trajectory]
    truncated: bool


def handoff(naive_end: NaiveState) -> ResponseState:
    """Initial response state at detection: one susceptible becomes the
    first aware individual, everyone else is unaware; I and R carry over."""
    if naive_end.s < 1.0:
        raise CannotSeedAwarenessError(
            f"cannot seed awareness: only {naive_end.s!r} susceptibles left "
            "(need at least one)")
    return ResponseState(u=naive_end.s - 1.0, a=1.0, c=0.0, q=0.0,
                         i=naive_end.i, r=naive_end.r, n=naive_end.n)


def _settled_naive(y, cfg: ScenarioConfig, level: float) -> bool:
    d = cfg.disease
    return (y[_NAIVE_I] < level
            and d.beta * y[0] / (d.gamma * cfg.n) <= 1.0)


def _settled_response(y, cfg: ScenarioConfig, level: float) -> bool:
    d = cfg.disease
    pool = y[0] + y[1] + y[2]
    return (y[_RESP_Q] + y[_RESP_I] < level
            and (1.0 - cfg.intervention.phi) * d.beta * pool / (d.gamma * cfg.n) <= 1.0)


def _truncate_with_end(traj: Trajectory, t_end: float,
                       end_state: np.ndarray) -> Trajectory:
    keep = traj.times < t_end
    times = np.append(traj.times[keep], t_end)
    states = np.vstack([traj.states[keep], end_state])
    return Trajectory(times, states, traj.labels, traj.n)


def _hermite_state(y0, f0, y1, f1, h, theta):
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + theta
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return h00 * y0 + h * (h10 * f0) + h01 * y1 + h * (h11 * f1)


def _locate_day_crossing(traj: Trajectory, rhs, day: int, level: float,
                         icfg: IntegratorConfig):
    """Continuous switch time within (day-1, day] where I reaches `level`
    (the prevalence the detector saw on the detection day, in individuals).

    For prevalence still rising at the end of the day this is the day
    boundary itself; if the trajectory peaked inside the day the crossing is
    localized on the bracketing step like any other threshold event.
    """
    tau = float(day)
    i_col = traj.column("I")
    # samples strictly inside (day-1, day], plus the bracketing sample before
    lo_idx = int(np.searchsorted(traj.times, tau - 1.0, side="right"))
    hi_idx = int(np.searchsorted(traj.times, tau, side="right"))
    for j in range(max(lo_idx, 1), hi_idx):
        if i_col[j] >= level:
            if traj.times[j] == tau and i_col[j] == level and i_col[j - 1] < level:
                # crossing lands exactly on the day-boundary sample
                return tau, traj.states[j].copy()
            t_a, t_b = traj.times[j - 1], traj.times[j]
            y_a, y_b = traj.states[j - 1], traj.states[j]
            h = t_b - t_a
            f_a = rhs(t_a, y_a)
            f_b = rhs(t_b, y_b)
            lo, hi = 0.0, 1.0
            while (hi - lo) * h > icfg.event_tolerance:
                mid = 0.5 * (lo + hi)
                y_mid = _hermite_state(y_a, f_a, y_b, f_b, h, mid)
                if y_mid[_NAIVE_I] >= level:
                    hi = mid
                else:
                    lo = mid
            return t_a + hi * h, _hermite_state(y_a, f_a, y_b, f_b, h, hi)
    # prevalence interpolated at the day boundary equals `level` by
    # construction, so the scan can only fall through on rounding; the
    # boundary itself is then the crossing
    return tau, traj.state_at(tau)


def run_scenario(cfg: ScenarioConfig) -> SimResult:
    """Run one scenario end to end and compute its headline metrics."""
    icfg = cfg.integrator
    nspec = naive_rhs(cfg.disease, cfg.n)
    y0 = np.array([cfg.n - cfg.i0, cfg.i0, 0.0])
    stop_level = cfg.extinction_threshold * cfg.n

    trig = cfg.trigger
    t_switch = None
    switch_state = None
    trigger_prevalence = None

    if trig is None:
        phase1, status1, _ = _drive(
            nspec, y0, 0.0, cfg.t_max, icfg,
            settle_mode=_kernels.SETTLE_NAIVE, settle_level=stop_level)
    elif trig.kind == "prevalence_threshold":
        phase1, status1, t_cross = _drive(
            nspec, y0, 0.0, cfg.t_max, icfg,
            event_index=_NAIVE_I, event_level=trig.pstar * cfg.n,
            settle_mode=_kernels.SETTLE_NAIVE, settle_level=stop_level)
        if t_cross is not None:
            t_switch = t_cross
            switch_state = phase1.final_state.copy()
            trigger_prevalence = float(switch_state[_NAIVE_I]) / cfg.n
    else:
        # surveillance_effort: detection needs the day-sampled naive
        # trajectory over the whole horizon, so no early stop here
        phase1_full, status1, _ = _drive(nspec, y0, 0.0, cfg.t_max, icfg)
        prevalence = sample_daily_prevalence(phase1_full)
        det = detection_time(prevalence, trig.surveillance)
        if det.detection_day is None:
            phase1 = phase1_full
        else:
            level = float(np.interp(float(det.detection_day),
                                    phase1_full.times,
                                    phase1_full.column("I")))
            t_switch, switch_state = _locate_day_crossing(
                phase1_full, nspec, det.detection_day, level, icfg)
            phase1 = _truncate_with_end(phase1_full, t_switch, switch_state)
            trigger_prevalence = det.prevalence_at_detection

    phase2 = None
    status2 = None
    if t_switch is not None:
        naive_end = NaiveState.from_array(switch_state, cfg.n)
        seeded = handoff(naive_end)
        rspec = response_rhs(cfg.disease, cfg.info, cfg.intervention,
                             cfg.relapse, cfg.n)
        phase2, status2, _ = _drive(
            rspec, seeded.as_array(), t_switch, cfg.t_max, icfg,
            settle_mode=_kernels.SETTLE_RESPONSE, settle_level=stop_level)

    # metrics over the concatenated run
    last = phase2 if phase2 is not None else phase1
    r_final = float(last.final_state[last.labels.index("R")])
    fsize = r_final / cfg.n

    i1 = phase1.column("I")
    j1 = int(np.argmax(i1))
    peak_i, peak_t = float(i1[j1]), float(phase1.times[j1])
    if phase2 is not None:
        i2 = phase2.column("I")
        j2 = int(np.argmax(i2))
        if float(i2[j2]) > peak_i:
            peak_i, peak_t = float(i2[j2]), float(phase2.times[j2])

    # extinction_threshold = 0 requests a fixed-window integration, so the
    # full horizon is by definition not a truncation
    if stop_level == 0.0:
        settled = True
    elif phase2 is not None:
        settled = (status2 == _kernels.SETTLED
                   or _settled_response(phase2.final_state, cfg, stop_level))
    else:
        settled = (status1 == _kernels.SETTLED
                   or _settled_naive(phase1.final_state, cfg, stop_level))

    return SimResult(final_size=fsize,
                     peak_prevalence=peak_i / cfg.n,
                     peak_time=peak_t,
                     detection_time=t_switch,
                     trigger_prevalence=trigger_prevalence,
                     phase1=phase1,
                     phase2=phase2,
                     truncated=not settled)


def final_size(result: SimResult) -> float:
    """R at the last sampled time divided by N.  If the run was cut off by
    the horizon the value is R(t_max)/N and result.truncated says so."""
    last = result.phase2 if result.phase2 is not None else result.phase1
    return float(last.final_state[last.labels.index("R")]) / last.n


def sir_final_size_oracle(r0: float, s0: float, r_init: float = 0.0) -> float:
    """Final epidemic size from the SIR implicit equation.

    Solves s0*exp(-r0*(r - r_init)) = 1 - r for r by bisection on
    [r_init, 1] to 1e-12, taking the larger root when r0 > 1 (the trivial
    root r = r_init always exists when nobody is initially infected).
    Everything is in fractions of the population.
    """
    if not (r0 >= 0 and np.isfinite(r0)):
        raise ConfigError("r0 must be finite and >= 0")
    if not (0.0 <= s0 <= 1.0 and 0.0 <= r_init < 1.0 and s0 + r_init <= 1.0):
        raise ConfigError("need 0 <= s0 <= 1, 0 <= r_init < 1, s0 + r_init <= 1")

    def f(r):
        return s0 * math.exp(-r0 * (r - r_init)) - (1.0 - r)

    lo, hi = float(r_init), 1.0
    if f(lo) == 0.0:
        # no initial infected: r_init solves the equation trivially
        if r0 * s0 <= 1.0:
            return lo
        # supercritical: step off the trivial root to bracket the larger one
        step = (hi - lo) / 2.0
        probe = lo + step
        while f(probe) >= 0.0 and step > 1e-15:
            step /= 2.0
            probe = lo + step
        if f(probe) >= 0.0:
            return lo
        lo = probe
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
