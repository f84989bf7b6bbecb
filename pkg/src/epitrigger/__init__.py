"""Triggered-response epidemic scenarios.

A naive SIR outbreak grows until surveillance detects it - either at a
direct prevalence threshold or at the detection time a daily testing effort
implies - and the detection seeds an information epidemic: awareness spreads
by contact, protects the aware, decays into complacency, and a fraction of
new cases is quarantined.  The package integrates the coupled two-phase
dynamics, computes detection times and final epidemic sizes, and sweeps
parameter grids deterministically.
"""
from .errors import (CannotSeedAwarenessError, ConfigError,
                     DegeneratePopulationError, EpitriggerError,
                     InvalidPrevalenceError, NumericalInstabilityError)
from .model import (DiseaseParams, InfoParams, InterventionParams,
                    NaiveRates, NaiveState, RelapseParams, ResponseRates,
                    ResponseState, RhsSpec, basic_reproduction_number,
                    naive_derivative, naive_rhs, response_derivative,
                    response_rhs)
from .integrate import (IntegratorConfig, ThresholdEvent, Trajectory,
                        integrate, integrate_until)
from .surveillance import (DetectionResult, SurveillanceParams, TriggerSpec,
                           detection_probability, detection_time,
                           effort_to_threshold, sample_daily_prevalence)
from .scenario import (ScenarioConfig, SimResult, final_size, handoff,
                       run_scenario, sir_final_size_oracle)
from .sweep import (CellError, LineMinimum, ParamAxis, SweepResult,
                    argmin_along, is_nonmonotonic, run_sweep)
from .config import ParsedConfig, config_items, format_config, parse_config
from .output import emit_result, read_table

__version__ = "0.1.0"

__all__ = [
    "CannotSeedAwarenessError", "ConfigError", "DegeneratePopulationError",
    "EpitriggerError", "InvalidPrevalenceError", "NumericalInstabilityError",
    "DiseaseParams", "InfoParams", "InterventionParams", "NaiveRates",
    "NaiveState", "RelapseParams", "ResponseRates", "ResponseState",
    "RhsSpec", "basic_reproduction_number", "naive_derivative", "naive_rhs",
    "response_derivative", "response_rhs",
    "IntegratorConfig", "ThresholdEvent", "Trajectory", "integrate",
    "integrate_until",
    "DetectionResult", "SurveillanceParams", "TriggerSpec",
    "detection_probability", "detection_time", "effort_to_threshold",
    "sample_daily_prevalence",
    "ScenarioConfig", "SimResult", "final_size", "handoff", "run_scenario",
    "sir_final_size_oracle",
    "CellError", "LineMinimum", "ParamAxis", "SweepResult", "argmin_along",
    "is_nonmonotonic", "run_sweep",
    "ParsedConfig", "config_items", "format_config", "parse_config",
    "emit_result", "read_table",
]
