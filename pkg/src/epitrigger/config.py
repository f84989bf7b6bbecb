"""Flat dotted-key config documents.

One key per line, `key = value`, full- or end-of-line comments with `#`.
Unknown keys are rejected, missing keys fall back to the documented
defaults, and every complaint names the offending line, key and constraint.
A document may also define one sweep of one or two axes:

    disease.beta = 0.6
    disease.gamma = 0.2
    trigger.pstar = 0.01
    sweep.axis1.target = beta_i
    sweep.axis1.min = 0.01
    sweep.axis1.max = 3
    sweep.axis1.points = 60
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional, Tuple

from .errors import ConfigError
from .integrate import IntegratorConfig
from .model import (DiseaseParams, InfoParams, InterventionParams,
                    RelapseParams)
from .scenario import ScenarioConfig
from .surveillance import SurveillanceParams, TriggerSpec
from .sweep import ParamAxis, SWEEP_TARGETS

# key -> (type tag, default).  Defaults are echoed into every result
# document so no silent default ever shapes an output.
KEY_TABLE: Dict[str, Tuple[str, object]] = {
    "population.n": ("float", 1e5),
    "population.i0": ("float", 10.0),
    "disease.beta": ("float", 0.3),
    "disease.gamma": ("float", 0.1),
    "info.beta_i": ("float", 1.5),
    "info.gamma_i": ("float", 0.1),
    "info.epsilon": ("float", 0.8),
    "intervention.phi": ("float", 0.2),
    "relapse.rho": ("float", 0.0),
    "trigger.kind": ("str", "prevalence_threshold"),
    "trigger.pstar": ("float", 0.025),
    "trigger.daily_tests": ("float", 100.0),
    "trigger.confidence": ("float", 0.95),
    "run.t_max": ("float", 1000.0),
    "run.dt": ("float", 0.01),
    "sweep.axis1.target": ("str", None),
    "sweep.axis1.min": ("float", None),
    "sweep.axis1.max": ("float", None),
    "sweep.axis1.points": ("int", None),
    "sweep.axis2.target": ("str", None),
    "sweep.axis2.min": ("float", None),
    "sweep.axis2.max": ("float", None),
    "sweep.axis2.points": ("int", None),
}

TRIGGER_KINDS = ("prevalence_threshold", "surveillance_effort", "none")


@dataclass(frozen=True)
class ParsedConfig:
    """A validated config: scenario, optional sweep axes, and which keys the
    document actually set (everything else came from defaults)."""

    scenario: ScenarioConfig
    axes: Tuple[ParamAxis, ...]
    surveillance: SurveillanceParams
    provided: FrozenSet[str] = field(compare=False, default=frozenset())


def _parse_lines(text: str):
    values = {}
    lines = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"line {ln}: expected 'key = value', got '{content}'")
        key, _, rhs = content.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        if key not in KEY_TABLE:
            raise ConfigError(f"line {ln}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"line {ln}: duplicate key '{key}'")
        kind, _default = KEY_TABLE[key]
        if kind == "float":
            try:
                value = float(rhs)
            except ValueError:
                raise ConfigError(f"line {ln}: {key} expects a number, got '{rhs}'") from None
        elif kind == "int":
            try:
                value = int(rhs)
            except ValueError:
                raise ConfigError(f"line {ln}: {key} expects an integer, got '{rhs}'") from None
        else:
            value = rhs
        values[key] = value
        lines[key] = ln
    return values, lines


class _Doc:
    """Accumulated key values with line-anchored constraint complaints."""

    def __init__(self, values, lines):
        self.values = values
        self.lines = lines

    def get(self, key):
        return self.values.get(key, KEY_TABLE[key][1])

    def has(self, key):
        return key in self.values

    def fail(self, key, constraint):
        where = f"line {self.lines[key]}: " if key in self.lines else ""
        shown = self.values.get(key, KEY_TABLE[key][1])
        raise ConfigError(f"{where}{key} = {shown} violates {constraint}")

    def require(self, key, ok, constraint):
        if not ok:
            self.fail(key, constraint)


def parse_config(text: str) -> ParsedConfig:
    """Validate a config document into a ScenarioConfig plus sweep axes."""
    values, lines = _parse_lines(text)
    doc = _Doc(values, lines)

    n = doc.get("population.n")
    doc.require("population.n", n > 0, "n > 0")
    i0 = doc.get("population.i0")
    doc.require("population.i0", 0 < i0 < n, "0 < i0 < n")

    beta = doc.get("disease.beta")
    doc.require("disease.beta", beta >= 0, "beta >= 0")
    gamma = doc.get("disease.gamma")
    doc.require("disease.gamma", gamma > 0, "gamma > 0")

    beta_i = doc.get("info.beta_i")
    doc.require("info.beta_i", beta_i >= 0, "beta_i >= 0")
    gamma_i = doc.get("info.gamma_i")
    doc.require("info.gamma_i", gamma_i >= 0, "gamma_i >= 0")
    epsilon = doc.get("info.epsilon")
    doc.require("info.epsilon", epsilon >= 0, "epsilon >= 0")
    doc.require("info.epsilon", epsilon <= 1, "epsilon <= 1")

    phi = doc.get("intervention.phi")
    doc.require("intervention.phi", 0 <= phi <= 1, "0 <= phi <= 1")
    rho = doc.get("relapse.rho")
    doc.require("relapse.rho", rho >= 0, "rho >= 0")

    kind = doc.get("trigger.kind")
    doc.require("trigger.kind", kind in TRIGGER_KINDS,
                f"kind in {{{', '.join(TRIGGER_KINDS)}}}")
    pstar = doc.get("trigger.pstar")
    doc.require("trigger.pstar", 0 < pstar, "0 < pstar")
    doc.require("trigger.pstar", pstar < 1, "pstar < 1")
    daily_tests = doc.get("trigger.daily_tests")
    doc.require("trigger.daily_tests", daily_tests >= 0, "daily_tests >= 0")
    confidence = doc.get("trigger.confidence")
    doc.require("trigger.confidence", 0 < confidence < 1, "0 < confidence < 1")

    t_max = doc.get("run.t_max")
    doc.require("run.t_max", t_max > 0, "t_max > 0")
    dt = doc.get("run.dt")
    doc.require("run.dt", dt > 0, "dt > 0")

    surveillance = SurveillanceParams(daily_tests=daily_tests,
                                      confidence=confidence)
    if kind == "none":
        trigger = None
    elif kind == "prevalence_threshold":
        trigger = TriggerSpec(kind=kind, pstar=pstar)
    else:
        trigger = TriggerSpec(kind=kind, surveillance=surveillance)

    scenario = ScenarioConfig(
        disease=DiseaseParams(beta=beta, gamma=gamma),
        info=InfoParams(beta_i=beta_i, gamma_i=gamma_i, epsilon=epsilon),
        intervention=InterventionParams(phi=phi),
        relapse=RelapseParams(rho=rho),
        trigger=trigger,
        n=n, i0=i0, t_max=t_max,
        integrator=IntegratorConfig(dt=dt),
    )

    axes = _parse_axes(doc, kind)
    return ParsedConfig(scenario=scenario, axes=axes,
                        surveillance=surveillance,
                        provided=frozenset(values))


def _parse_axes(doc: _Doc, trigger_kind: str) -> Tuple[ParamAxis, ...]:
    axes = []
    for name in ("axis1", "axis2"):
        keys = [f"sweep.{name}.{part}" for part in ("target", "min", "max", "points")]
        present = [k for k in keys if doc.has(k)]
        if not present:
            if name == "axis1" and any(doc.has(f"sweep.axis2.{p}")
                                       for p in ("target", "min", "max", "points")):
                raise ConfigError("sweep.axis2 requires sweep.axis1")
            continue
        missing = [k for k in keys if not doc.has(k)]
        if missing:
            raise ConfigError(
                f"incomplete sweep {name}: missing {', '.join(missing)}")
        target = doc.get(keys[0])
        doc.require(keys[0], target in SWEEP_TARGETS,
                    f"target in {{{', '.join(SWEEP_TARGETS)}}}")
        lo, hi = doc.get(keys[1]), doc.get(keys[2])
        doc.require(keys[1], lo < hi, "min < max")
        points = doc.get(keys[3])
        doc.require(keys[3], points >= 2, "points >= 2")
        if target == "pstar" and trigger_kind != "prevalence_threshold":
            doc.fail(keys[0], "pstar sweeps require trigger.kind = "
                              "prevalence_threshold")
        axes.append(ParamAxis(target=target, min=lo, max=hi, points=points))
    if len(axes) == 2 and axes[0].target == axes[1].target:
        raise ConfigError("sweep axes must target distinct parameters")
    return tuple(axes)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_items(parsed: ParsedConfig):
    """(key, value-string, was-provided) for every scalar key, registry
    order, then any sweep axes.  This is the canonical echo used both by
    format_config and by result metadata."""
    sc = parsed.scenario
    trig = sc.trigger
    kind = trig.kind if trig is not None else "none"
    pstar = trig.pstar if (trig is not None
                           and trig.kind == "prevalence_threshold") \
        else KEY_TABLE["trigger.pstar"][1]
    current = {
        "population.n": sc.n,
        "population.i0": sc.i0,
        "disease.beta": sc.disease.beta,
        "disease.gamma": sc.disease.gamma,
        "info.beta_i": sc.info.beta_i,
        "info.gamma_i": sc.info.gamma_i,
        "info.epsilon": sc.info.epsilon,
        "intervention.phi": sc.intervention.phi,
        "relapse.rho": sc.relapse.rho,
        "trigger.kind": kind,
        "trigger.pstar": pstar,
        "trigger.daily_tests": parsed.surveillance.daily_tests,
        "trigger.confidence": parsed.surveillance.confidence,
        "run.t_max": sc.t_max,
        "run.dt": sc.integrator.dt,
    }
    items = [(key, _fmt(value), key in parsed.provided)
             for key, value in current.items()]
    for name, axis in zip(("axis1", "axis2"), parsed.axes):
        items.extend([
            (f"sweep.{name}.target", axis.target, True),
            (f"sweep.{name}.min", _fmt(axis.min), True),
            (f"sweep.{name}.max", _fmt(axis.max), True),
            (f"sweep.{name}.points", str(axis.points), True),
        ])
    return items


def format_config(parsed: ParsedConfig) -> str:
    """Canonical document listing every key; parses back to the same config."""
    out = [f"{key} = {value}" for key, value, _provided in config_items(parsed)]
    return "\n".join(out) + "\n"
