"""Derivative-free pulse-shape optimization over piecewise-node schedules.

Candidates are shape-preserving interpolations through a fixed grid of
control nodes.  The CZ phase condition is re-imposed on every candidate
by scaling the Rabi envelope: the conditional phase grows monotonically
with laser power, so a one-dimensional root find restores |phi| = pi
without changing the candidate's total duration.  Candidate objectives
are evaluated on a reduced momentum quadrature for speed; the best-found
schedule is re-evaluated with the full gate pipeline before being
reported.

The search is a Nelder-Mead simplex (deterministic given the seed
schedule, the evaluation budget, and the RYDGATE_SEED-derived initial
simplex), so repeated runs produce identical evaluation logs.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize

from .config import GateConfig, derive
from .errors import InfeasibleProblemError, PhaseUnreachableError
from .gate import GateResult, assemble_rho, thermal_ensemble
from .pulse import (
    PIECEWISE,
    PulseSchedule,
    calibrate_hold,
    conditional_phase,
    evaluate,
)

MIN_ERROR = "min-error"
MIN_TIME = "min-time"

_PENALTY = 1e3


@dataclass(frozen=True)
class OptimizationProblem:
    """Search definition for the pulse optimizer.

    ``min-error`` minimizes 1 - F at fixed total gate time; ``min-time``
    minimizes the total time subject to 1 - F <= error_ceiling.  Bounds
    are expressed in internal angular units (rad/us).
    """

    objective: str = MIN_ERROR
    n_nodes: int = 6              # interior control nodes
    budget: int = 60              # objective evaluations
    omega_bound: float = 0.0      # 0 -> 1.5x the seed peak
    detuning_low: float = 0.0
    detuning_high: float = 0.0    # 0 -> 1.5x the seed start detuning
    error_ceiling: float = 1e-2   # min-time only
    quad_nodes: int = 9           # reduced quadrature per axis (odd)
    seed: int = 0
    calibration_tol: float = 1e-9


@dataclass(frozen=True)
class LogEntry:
    evaluation: int
    objective: float
    best: float
    params: tuple


@dataclass(frozen=True)
class OptimizeOutcome:
    schedule: PulseSchedule
    result: GateResult
    log: tuple
    evaluations: int


def problem_from_config(config: GateConfig) -> OptimizationProblem:
    """Build a problem from the [optimization] config section (MHz units)."""
    opt = dict(config.optimization)
    d = derive(config)
    two_pi = 2.0 * math.pi
    seed_env = os.environ.get("RYDGATE_SEED")
    return OptimizationProblem(
        objective=opt.get("objective", MIN_ERROR),
        n_nodes=int(opt.get("n_nodes", 6)),
        budget=int(opt.get("budget", 60)),
        omega_bound=two_pi * float(opt.get("omega_bound", 0.0)),
        detuning_low=two_pi * float(opt.get("detuning_low", 0.0)),
        detuning_high=two_pi * float(opt.get("detuning_high", 0.0)),
        error_ceiling=float(opt.get("error_ceiling", 1e-2)),
        quad_nodes=int(opt.get("quad_nodes", 9)),
        seed=int(seed_env) if seed_env is not None else int(opt.get("seed", 0)),
    )


def _seed_schedule(config: GateConfig) -> PulseSchedule:
    if config.ramp_shape == PIECEWISE:
        from .pulse import schedule_from_config

        return schedule_from_config(config)
    return calibrate_hold(config)


def _make_nodes(times: np.ndarray, omegas: np.ndarray,
                deltas: np.ndarray) -> tuple:
    return tuple((float(t), float(om), float(de))
                 for t, om, de in zip(times, omegas, deltas))


def calibrate_scale(schedule: PulseSchedule, config: GateConfig,
                    target: float = math.pi, scale_max: float = 1.0,
                    tol: float = 1e-9) -> PulseSchedule:
    """Scale a piecewise schedule's Rabi envelope to hit |phi| = target.

    Raises PhaseUnreachableError when no scale in (0, scale_max] reaches
    the target phase magnitude.
    """

    def scaled(s: float) -> PulseSchedule:
        nodes = tuple((t, s * om, de) for (t, om, de) in schedule.nodes)
        return PulseSchedule(
            ramp_time=schedule.ramp_time, hold_time=schedule.hold_time,
            omega_max=s * schedule.omega_max,
            delta_start=schedule.delta_start, delta_end=schedule.delta_end,
            shape=PIECEWISE, nodes=nodes,
        )

    def phase_mag(s: float) -> float:
        return abs(conditional_phase(config, scaled(s), tol))

    hi = phase_mag(scale_max)
    if hi < target:
        raise PhaseUnreachableError(
            f"phase magnitude at full allowed power is {hi:.4f} < {target:.4f}",
            max_phase=hi,
        )
    lo_s = 0.05
    if phase_mag(lo_s) >= target:
        lo_s = 1e-3
        if phase_mag(lo_s) >= target:
            raise PhaseUnreachableError(
                "phase target exceeded even at negligible power", max_phase=None
            )
    s_star = brentq(lambda s: phase_mag(s) - target, lo_s, scale_max,
                    xtol=1e-6, rtol=1e-10)
    return scaled(float(s_star))


def optimize(problem: OptimizationProblem, config: GateConfig):
    """Run the search and return an OptimizeOutcome.

    The seed schedule (the config's calibrated ramp schedule) is always
    the first evaluated candidate, so the best objective never exceeds
    the seed's.  Raises InfeasibleProblemError if the seed itself cannot
    be calibrated within the bounds.
    """
    seed_schedule = _seed_schedule(config)
    total = seed_schedule.total_time
    n = problem.n_nodes
    times = np.linspace(0.0, total, n + 2)
    om_seed = np.empty(n)
    de_seed = np.empty(n)
    for k, t in enumerate(times[1:-1]):
        om_seed[k], de_seed[k] = evaluate(seed_schedule, float(t))
    d = derive(config)
    om_bound = problem.omega_bound or 1.5 * max(d.omega_max, om_seed.max())
    de_lo = problem.detuning_low
    de_hi = problem.detuning_high or 1.5 * max(abs(d.delta_start), 1e-6)
    endpoint_delta = evaluate(seed_schedule, 0.0)[1]
    min_time = problem.objective == MIN_TIME

    def unpack(x):
        if min_time:
            stretch, rest = x[0], x[1:]
        else:
            stretch, rest = 1.0, x
        omegas = np.clip(rest[:n], 0.0, om_bound)
        deltas = np.clip(rest[n:], de_lo, de_hi)
        ts = times * max(stretch, 0.05)
        full_t = np.concatenate([[ts[0]], ts[1:-1], [ts[-1]]])
        full_om = np.concatenate([[0.0], omegas, [0.0]])
        full_de = np.concatenate([[endpoint_delta], deltas, [endpoint_delta]])
        return PulseSchedule(
            ramp_time=config.ramp_time, hold_time=0.0,
            omega_max=float(full_om.max()), delta_start=float(full_de[0]),
            delta_end=float(full_de.min()), shape=PIECEWISE,
            nodes=_make_nodes(full_t, full_om, full_de),
        )

    ensemble = thermal_ensemble(config, n_nodes=problem.quad_nodes)
    log: list[LogEntry] = []
    state = {"best": math.inf, "best_x": None, "evals": 0}

    def objective(x) -> float:
        state["evals"] += 1
        raw = unpack(x)
        try:
            calibrated = calibrate_scale(
                raw, config, scale_max=om_bound / max(raw.omega_max, 1e-12),
                tol=problem.calibration_tol,
            )
            res = assemble_rho(config, calibrated, ensemble=ensemble,
                               tol=problem.calibration_tol)
            err = 1.0 - res.fidelity
            if min_time:
                overshoot = max(0.0, err - problem.error_ceiling)
                value = calibrated.total_time * (
                    1.0 + _PENALTY * overshoot / problem.error_ceiling
                )
            else:
                value = err
        except PhaseUnreachableError:
            value = _PENALTY
        if value < state["best"]:
            state["best"] = value
            state["best_x"] = np.array(x, dtype=float)
        log.append(LogEntry(state["evals"], float(value), float(state["best"]),
                            tuple(float(v) for v in x)))
        return value

    x0 = np.concatenate([om_seed, de_seed])
    if min_time:
        x0 = np.concatenate([[1.0], x0])
    first = objective(x0)
    if first >= _PENALTY:
        raise InfeasibleProblemError(
            "seed schedule is not calibratable to the CZ phase within bounds"
        )
    if problem.budget > 1:
        rng = np.random.default_rng(problem.seed)
        dim = x0.size
        simplex = np.tile(x0, (dim + 1, 1))
        steps = 0.08 * np.where(np.abs(x0) > 1e-9, np.abs(x0), 1.0)
        for k in range(dim):
            simplex[k + 1, k] += steps[k] * (1.0 + 0.1 * rng.standard_normal())
        minimize(
            objective, x0, method="Nelder-Mead",
            options={
                "maxfev": max(problem.budget - 1, 1),
                "initial_simplex": simplex,
                "xatol": 1e-4, "fatol": 1e-7,
            },
        )

    best_schedule = calibrate_scale(
        unpack(state["best_x"]), config,
        scale_max=om_bound / max(unpack(state["best_x"]).omega_max, 1e-12),
        tol=problem.calibration_tol,
    )
    final = assemble_rho(config, best_schedule)
    return OptimizeOutcome(
        schedule=best_schedule,
        result=final,
        log=tuple(log),
        evaluations=state["evals"],
    )
