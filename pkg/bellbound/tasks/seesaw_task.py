"""Celery tasks for the embarrassingly parallel parts of the quantum search.

Payloads travel as JSON: functionals and states use their pydantic dumps,
bases use the {"real", "imag"} nested-list form of the quantum schemas.
"""
import logging

from celery import group

from bellbound.celery_app import celery_app
from bellbound.schemas.experiments import SweepRow
from bellbound.schemas.quantum import QuantumState, SeesawConfig, complex_array, complex_payload
from bellbound.schemas.scenario import BellFunctional
from bellbound.services.experiments import run_sweep_trial
from bellbound.services.seesaw import RestartOutcome, run_restart

logger = logging.getLogger(__name__)


def _outcome_payload(outcome: RestartOutcome) -> dict:
    return {
        "restart": outcome.restart,
        "score": outcome.score,
        "alice": [complex_payload(basis) for basis in outcome.alice],
        "bob": [complex_payload(basis) for basis in outcome.bob],
        "trace": list(outcome.trace),
        "sweeps": outcome.sweeps,
    }


def _outcome_from_payload(payload: dict) -> RestartOutcome:
    return RestartOutcome(
        restart=payload["restart"],
        score=payload["score"],
        alice=[complex_array(basis) for basis in payload["alice"]],
        bob=[complex_array(basis) for basis in payload["bob"]],
        trace=payload["trace"],
        sweeps=payload["sweeps"],
    )


@celery_app.task(bind=True, name="bellbound.tasks.seesaw_task.seesaw_restart_task")
def seesaw_restart_task(self, functional: dict, state: dict, config: dict, restart: int) -> dict:
    """Run one seeded seesaw restart and return its outcome as JSON-safe data."""
    if not self.request.is_eager:
        self.update_state(state="PROCESSING", meta={"restart": restart})
    outcome = run_restart(
        BellFunctional.model_validate(functional),
        QuantumState.model_validate(state),
        SeesawConfig.model_validate(config),
        restart,
    )
    return _outcome_payload(outcome)


@celery_app.task(bind=True, name="bellbound.tasks.seesaw_task.sweep_trial_task")
def sweep_trial_task(self, functional: dict, sigma_index: int, sigma: float, trial_seed: int,
                     config: dict, onebit_bound: int, ns_bound: float) -> dict:
    if not self.request.is_eager:
        self.update_state(state="PROCESSING", meta={"sigma": sigma, "seed": trial_seed})
    row = run_sweep_trial((
        BellFunctional.model_validate(functional),
        sigma_index,
        sigma,
        trial_seed,
        SeesawConfig.model_validate(config),
        onebit_bound,
        ns_bound,
    ))
    return row.model_dump()


def dispatch_restarts(functional: BellFunctional, state: QuantumState, config: SeesawConfig) -> list[RestartOutcome]:
    """Fan restarts out as a Celery group; results come back in restart order."""
    functional_payload = functional.model_dump()
    state_payload = state.model_dump()
    config_payload = config.model_dump()
    logger.info("Dispatching %d seesaw restarts to Celery", config.restarts)
    job = group(
        seesaw_restart_task.s(functional_payload, state_payload, config_payload, k)
        for k in range(config.restarts)
    )
    return [_outcome_from_payload(payload) for payload in job.apply_async().get()]


def dispatch_sweep_trials(jobs: list[tuple]) -> list[SweepRow]:
    logger.info("Dispatching %d sweep trials to Celery", len(jobs))
    job = group(
        sweep_trial_task.s(functional.model_dump(), index, sigma, seed, config.model_dump(), onebit, ns)
        for functional, index, sigma, seed, config, onebit, ns in jobs
    )
    return [SweepRow.model_validate(payload) for payload in job.apply_async().get()]
