"""Compartmental models: naive SIR and the post-detection response model.

Two right-hand sides are defined here.

Naive phase (nobody knows the outbreak exists):

    dS = -beta*S*I/N
    dI =  beta*S*I/N - gamma*I
    dR =  gamma*I

Response phase (after the outbreak is detected, the susceptible pool splits
into unaware U, aware A and complacent C; quarantine Q removes a fraction phi
of new cases from circulation):

    dU = -beta_i*U*A/N - beta*U*I/N + rho*C
    dA =  beta_i*U*A/N - (1-epsilon)*beta*A*I/N - gamma_i*A
    dC =  gamma_i*A - beta*C*I/N - rho*C
    dQ =  phi*beta*(U + C + (1-epsilon)*A)*I/N - gamma*Q
    dI =  (1-phi)*beta*(U + C + (1-epsilon)*A)*I/N - gamma*I
    dR =  gamma*(Q + I)

Awareness spreads by contact with the aware (beta_i) and fades at rate
gamma_i into complacency; the aware are only (1-epsilon) as susceptible as
everyone else.  rho > 0 lets the complacent relapse to unaware, so they can
be re-alerted later; rho = 0 recovers the single-shot version where
complacency is absorbing.

Counts, not fractions: states carry absolute individuals plus the population
size N, so prevalence thresholds in individuals stay exact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from . import _kernels

# Validation tolerances for state invariants, relative to N.  Mid-run states
# produced by the integrator may undershoot zero by rounding; anything worse
# is rejected.
CONSERVATION_RTOL = 1e-8
NONNEG_RTOL = 1e-9

NAIVE_LABELS = ("S", "I", "R")
RESPONSE_LABELS = ("U", "A", "C", "Q", "I", "R")


@dataclass(frozen=True)
class DiseaseParams:
    """Transmission rate beta and recovery rate gamma, both per day."""

    beta: float
    gamma: float

    def __post_init__(self):
        if not (self.beta >= 0.0 and np.isfinite(self.beta)):
            raise ConfigError("beta must be finite and >= 0")
        if not (self.gamma > 0.0 and np.isfinite(self.gamma)):
            raise ConfigError("gamma must be finite and > 0")


@dataclass(frozen=True)
class InfoParams:
    """Awareness spread rate beta_i, decay rate gamma_i, protection epsilon."""

    beta_i: float
    gamma_i: float
    epsilon: float

    def __post_init__(self):
        if not (self.beta_i >= 0.0 and np.isfinite(self.beta_i)):
            raise ConfigError("beta_i must be finite and >= 0")
        if not (self.gamma_i >= 0.0 and np.isfinite(self.gamma_i)):
            raise ConfigError("gamma_i must be finite and >= 0")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ConfigError("epsilon must lie in [0, 1]")


@dataclass(frozen=True)
class InterventionParams:
    """Fraction phi of new cases that are caught and quarantined."""

    phi: float

    def __post_init__(self):
        if not (0.0 <= self.phi <= 1.0):
            raise ConfigError("phi must lie in [0, 1]")


@dataclass(frozen=True)
class RelapseParams:
    """Complacent-to-unaware relapse rate rho; rho = 0 disables relapse."""

    rho: float = 0.0

    def __post_init__(self):
        if not (self.rho >= 0.0 and np.isfinite(self.rho)):
            raise ConfigError("rho must be finite and >= 0")


def _check_state(values, names, n):
    if not (n > 0 and np.isfinite(n)):
        raise ConfigError("population size n must be finite and > 0")
    total = 0.0
    for name, v in zip(names, values):
        if not np.isfinite(v):
            raise ConfigError(f"compartment {name} must be finite")
        if v < -NONNEG_RTOL * n:
            raise ConfigError(f"compartment {name} = {v!r} is negative beyond tolerance")
        total += v
    if abs(total - n) > CONSERVATION_RTOL * n:
        raise ConfigError(
            f"compartments sum to {total!r}, expected n = {n!r} within {CONSERVATION_RTOL} * n"
        )


@dataclass(frozen=True)
class NaiveState:
    """SIR state in individuals, with the population size carried along."""

    s: float
    i: float
    r: float
    n: float

    def __post_init__(self):
        _check_state((self.s, self.i, self.r), NAIVE_LABELS, self.n)

    def as_array(self):
        return np.array([self.s, self.i, self.r])

    @classmethod
    def from_array(cls, y, n):
        return cls(float(y[0]), float(y[1]), float(y[2]), float(n))


@dataclass(frozen=True)
class ResponseState:
    """Response-phase state (U, A, C, Q, I, R) in individuals."""

    u: float
    a: float
    c: float
    q: float
    i: float
    r: float
    n: float

    def __post_init__(self):
        _check_state((self.u, self.a, self.c, self.q, self.i, self.r),
                     RESPONSE_LABELS, self.n)

    def as_array(self):
        return np.array([self.u, self.a, self.c, self.q, self.i, self.r])

    @classmethod
    def from_array(cls, y, n):
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]),
                   float(y[4]), float(y[5]), float(n))


@dataclass(frozen=True)
class NaiveRates:
    ds: float
    di: float
    dr: float

    def as_array(self):
        return np.array([self.ds, self.di, self.dr])


@dataclass(frozen=True)
class ResponseRates:
    du: float
    da: float
    dc: float
    dq: float
    di: float
    dr: float

    def as_array(self):
        return np.array([self.du, self.da, self.dc, self.dq, self.di, self.dr])


def naive_derivative(state: NaiveState, disease: DiseaseParams) -> NaiveRates:
    """Instantaneous rates for the naive SIR model, individuals per day."""
    infection = disease.beta * state.s * state.i / state.n
    recovery = disease.gamma * state.i
    return NaiveRates(ds=-infection, di=infection - recovery, dr=recovery)


def response_derivative(state: ResponseState, disease: DiseaseParams,
                        info: InfoParams, intervention: InterventionParams,
                        relapse: RelapseParams = RelapseParams(0.0)) -> ResponseRates:
    """Instantaneous rates for the response model, individuals per day.

    The flow terms are shared between equations (every outflow appears once
    as an inflow elsewhere), so the rates sum to zero up to rounding.
    """
    n = state.n
    info_gain = info.beta_i * state.u * state.a / n
    inf_u = disease.beta * state.u * state.i / n
    inf_a = (1.0 - info.epsilon) * disease.beta * state.a * state.i / n
    inf_c = disease.beta * state.c * state.i / n
    withdrawal = info.gamma_i * state.a
    relapse_flow = relapse.rho * state.c
    new_infections = inf_u + inf_a + inf_c
    return ResponseRates(
        du=-info_gain - inf_u + relapse_flow,
        da=info_gain - inf_a - withdrawal,
        dc=withdrawal - inf_c - relapse_flow,
        dq=intervention.phi * new_infections - disease.gamma * state.q,
        di=(1.0 - intervention.phi) * new_infections - disease.gamma * state.i,
        dr=disease.gamma * (state.q + state.i),
    )


def basic_reproduction_number(disease: DiseaseParams) -> float:
    """R0 = beta / gamma for the naive model."""
    return disease.beta / disease.gamma


@dataclass(frozen=True)
class RhsSpec:
    """A right-hand side the integrator can run compiled.

    Callable as rhs(t, y) -> dy/dt for use in plain-Python stepping; the
    integrator recognizes the type and dispatches to the compiled kernels
    instead (same arithmetic, same results).
    """

    model_id: int
    params: tuple
    labels: tuple
    n: float

    def params_array(self):
        return np.array(self.params)

    def __call__(self, t, y):
        out = np.empty_like(y)
        _kernels.eval_rhs(self.model_id, self.params_array(), t, y, out)
        return out


def naive_rhs(disease: DiseaseParams, n: float) -> RhsSpec:
    if not (n > 0 and np.isfinite(n)):
        raise ConfigError("population size n must be finite and > 0")
    return RhsSpec(model_id=_kernels.MODEL_NAIVE,
                   params=(disease.beta, disease.gamma, float(n)),
                   labels=NAIVE_LABELS, n=float(n))


def response_rhs(disease: DiseaseParams, info: InfoParams,
                 intervention: InterventionParams, relapse: RelapseParams,
                 n: float) -> RhsSpec:
    if not (n > 0 and np.isfinite(n)):
        raise ConfigError("population size n must be finite and > 0")
    return RhsSpec(model_id=_kernels.MODEL_RESPONSE,
                   params=(disease.beta, disease.gamma, info.beta_i,
                           info.gamma_i, info.epsilon, intervention.phi,
                           relapse.rho, float(n)),
                   labels=RESPONSE_LABELS, n=float(n))
