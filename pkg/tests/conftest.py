"""Shared fixtures.

The integration kernels are JIT-compiled on first use (and loaded from the
on-disk cache afterwards), which costs a few hundred milliseconds once per
process.  The autouse session fixture below pays that cost up front on a toy
scenario so that individual tests — several of which assert wall-clock
budgets — measure only the actual numerical work.
"""
import pytest

from epitrigger import (DiseaseParams, InfoParams, InterventionParams,
                        IntegratorConfig, RelapseParams, ScenarioConfig,
                        TriggerSpec, run_scenario)


@pytest.fixture(scope="session", autouse=True)
def warm_compiled_kernels():
    """Run tiny scenarios covering both models and both stop modes."""
    cfg = ScenarioConfig(
        disease=DiseaseParams(beta=0.5, gamma=0.1),
        info=InfoParams(beta_i=1.0, gamma_i=0.1, epsilon=0.5),
        intervention=InterventionParams(phi=0.2),
        relapse=RelapseParams(rho=0.05),
        trigger=TriggerSpec(kind="prevalence_threshold", pstar=0.05),
        n=1000.0, i0=1.0, t_max=30.0,
        integrator=IntegratorConfig(dt=0.1),
    )
    run_scenario(cfg)  # naive march with event + response march with settle
    from dataclasses import replace
    run_scenario(replace(cfg, trigger=None))  # naive march with settle
    yield
