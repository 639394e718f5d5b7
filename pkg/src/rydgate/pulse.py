"""Laser schedules: smooth ramps, hold segment, adiabaticity, calibration.

A schedule drives both controls through one progress variable s(t):
Omega(t) = Omega_max * s and Delta(t) = Delta_start + (Delta_end -
Delta_start) * s, so the detuning reaches its endpoint exactly when the
Rabi frequency peaks.  The default ramp uses s = sin^2(pi t / 2 t_r),
which is continuously differentiable at both ends of each ramp.

The conditional (entangling) phase of a schedule is measured from
propagated zero-momentum amplitudes rather than from an integral of the
adiabatic interaction strength, so hold-time calibration stays correct
when adiabaticity is imperfect.  At zero momentum and zero decay the
two-atom dynamics of both laser geometries reduce to the same
{ground, bright, double} block, so calibration is geometry independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .config import GateConfig, derive
from .errors import (
    GapClosureError,
    InvalidParameterError,
    OutOfScheduleError,
    PhaseUnreachableError,
)
from .model import restricted_blockade_components
from .propagator import propagate

SMOOTHSTEP = "smoothstep"
LINEAR = "linear"
PIECEWISE = "piecewise"

PHASE_TOL = 1e-4  # rad, calibration acceptance


@dataclass(frozen=True)
class PulseSchedule:
    """Time-parameterized laser controls in internal (angular) units.

    For the ramp shapes, ``total_time = 2*ramp_time + hold_time``.  A
    piecewise schedule is defined by ``nodes`` of (t, Omega, Delta) control
    points (rad/us) interpolated linearly, and ignores the ramp fields.
    """

    ramp_time: float
    hold_time: float
    omega_max: float
    delta_start: float
    delta_end: float
    shape: str = SMOOTHSTEP
    nodes: tuple = ()

    @property
    def total_time(self) -> float:
        if self.shape == PIECEWISE:
            return self.nodes[-1][0]
        return 2.0 * self.ramp_time + self.hold_time

    def with_hold(self, hold_time: float) -> "PulseSchedule":
        return replace(self, hold_time=hold_time)


def schedule_from_config(config: GateConfig) -> PulseSchedule:
    """Build the schedule described by the [pulse] section of a config.

    ``hold_time = "auto"`` maps to zero hold; run ``calibrate_hold`` to
    set it from the CZ phase condition.
    """
    d = derive(config)
    hold = 0.0 if config.hold_time == "auto" else float(config.hold_time)
    if config.ramp_shape == PIECEWISE:
        nodes = tuple(
            (t, 2.0 * math.pi * om, 2.0 * math.pi * de)
            for (t, om, de) in config.nodes
        )
        if nodes[0][0] != 0.0:
            raise InvalidParameterError("piecewise nodes must start at t = 0")
        return PulseSchedule(
            ramp_time=config.ramp_time, hold_time=hold,
            omega_max=max(n[1] for n in nodes),
            delta_start=nodes[0][2], delta_end=nodes[-1][2],
            shape=PIECEWISE, nodes=nodes,
        )
    return PulseSchedule(
        ramp_time=config.ramp_time,
        hold_time=hold,
        omega_max=d.omega_max,
        delta_start=d.delta_start,
        delta_end=d.delta_end,
        shape=config.ramp_shape,
    )


@lru_cache(maxsize=128)
def _piecewise_interpolants(nodes: tuple):
    """Shape-preserving C1 interpolants through (t, Omega, Delta) nodes."""
    ts = np.array([n[0] for n in nodes])
    oms = np.array([n[1] for n in nodes])
    des = np.array([n[2] for n in nodes])
    if ts.size < 3:
        return (lambda t: np.interp(t, ts, oms)), (lambda t: np.interp(t, ts, des))
    return PchipInterpolator(ts, oms), PchipInterpolator(ts, des)


def _progress(schedule: PulseSchedule, t: float) -> float:
    t_r, t_h = schedule.ramp_time, schedule.hold_time
    if t < t_r:
        if schedule.shape == LINEAR:
            return t / t_r
        return math.sin(math.pi * t / (2.0 * t_r)) ** 2
    if t <= t_r + t_h:
        return 1.0
    u = schedule.total_time - t
    if schedule.shape == LINEAR:
        return max(u / t_r, 0.0)
    return math.sin(math.pi * max(u, 0.0) / (2.0 * t_r)) ** 2


def evaluate(schedule: PulseSchedule, t: float) -> tuple[float, float]:
    """Instantaneous (Omega, Delta) in rad/us at time t.

    Raises OutOfScheduleError outside [0, total_time] (1e-9 us slack for
    roundoff at the endpoints).
    """
    total = schedule.total_time
    if t < -1e-9 or t > total + 1e-9:
        raise OutOfScheduleError(
            f"t = {t:.6g} outside the schedule [0, {total:.6g}] us"
        )
    t = min(max(t, 0.0), total)
    if schedule.shape == PIECEWISE:
        f_om, f_de = _piecewise_interpolants(schedule.nodes)
        return float(f_om(t)), float(f_de(t))
    s = _progress(schedule, t)
    omega = schedule.omega_max * s
    delta = schedule.delta_start + (schedule.delta_end - schedule.delta_start) * s
    return omega, delta


def evaluate_many(schedule: PulseSchedule, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized evaluate over an array of times."""
    pairs = [evaluate(schedule, float(t)) for t in ts]
    arr = np.asarray(pairs)
    return arr[:, 0], arr[:, 1]


def control_rates(schedule: PulseSchedule, t: float,
                  dt: float = 1e-6) -> tuple[float, float]:
    """Centered finite-difference (dOmega/dt, dDelta/dt) at time t."""
    total = schedule.total_time
    t0 = min(max(t - dt, 0.0), total)
    t1 = min(max(t + dt, 0.0), total)
    if t1 == t0:
        return 0.0, 0.0
    om0, de0 = evaluate(schedule, t0)
    om1, de1 = evaluate(schedule, t1)
    return (om1 - om0) / (t1 - t0), (de1 - de0) / (t1 - t0)


def adiabaticity_margin(schedule: PulseSchedule, config: GateConfig,
                        n_times: int = 400) -> float:
    """Worst-case ratio |<e| dH/dt |g>| / (E_e - E_g)^2 over the schedule.

    Evaluated on the frozen-atom {ground, bright, double} block at zero
    momenta; small values indicate adiabatic evolution.  Raises
    GapClosureError if an instantaneous gap collapses below 1e-9 rad/us.
    """
    comp = restricted_blockade_components(config)
    ts = np.linspace(0.0, schedule.total_time, n_times)
    prev = None
    worst = 0.0
    for t in ts:
        omega, delta = evaluate(schedule, t)
        h = comp.assemble(omega, delta, gamma=0.0).real
        evals, evecs = np.linalg.eigh(h)
        if prev is None:
            gi = int(np.argmax(np.abs(evecs[0, :])))
        else:
            gi = int(np.argmax(np.abs(prev @ evecs)))
        gvec = evecs[:, gi]
        prev = gvec
        dom, dde = control_rates(schedule, t)
        dh = dom * comp.coupling - dde * np.diag(comp.nexc)
        for e in range(comp.basis.dim):
            if e == gi:
                continue
            gap = evals[e] - evals[gi]
            if abs(gap) < 1e-9:
                raise GapClosureError(
                    f"instantaneous gap closed at t = {t:.6g} us", time=float(t)
                )
            ratio = abs(evecs[:, e] @ dh @ gvec) / gap**2
            worst = max(worst, ratio)
    return worst


def conditional_phase(config: GateConfig, schedule: PulseSchedule,
                      tol: float | None = None) -> float:
    """Unwrapped zero-momentum, zero-decay conditional phase of a schedule.

    Returns phi_00 - phi_01 - phi_10 + phi_11 where phi_xy is the phase
    accumulated by logical state |xy> (psi ~ e^{-i phi}); the CZ condition
    is |phi| = pi.  Unwrapping uses the checkpoint time series, which is
    safe because the dressed ground state keeps a finite bare-state
    overlap throughout the ramps used here.
    """
    tol = config.integrator_tol if tol is None else tol
    comp2 = restricted_blockade_components(config)
    total = schedule.total_time

    def h2at(t):
        omega, delta = evaluate(schedule, t)
        return comp2.assemble(omega, delta, gamma=0.0)

    # single-atom block {|0>, |r>}: coupling Omega/2
    def h1at(t):
        omega, delta = evaluate(schedule, t)
        return np.array([[0.0, omega / 2.0], [omega / 2.0, -delta]], dtype=complex)

    n_check = max(config.checkpoints, 400)
    traj2 = propagate(h2at, [1, 0, 0], total, tol, checkpoints=n_check)
    traj1 = propagate(h1at, [1, 0], total, tol, checkpoints=n_check)
    phi00 = -np.unwrap(np.angle(traj2.states[:, 0]))[-1]
    phi01 = -np.unwrap(np.angle(traj1.states[:, 0]))[-1]
    return phi00 - 2.0 * phi01


def calibrate_hold(config: GateConfig, target_phase: float = math.pi,
                   tol: float | None = None) -> PulseSchedule:
    """Root-find the hold time so |conditional phase| equals target_phase.

    Parameters
    ----------
    target_phase : float
        Desired magnitude of the conditional phase, radians (pi for CZ).

    Raises
    ------
    PhaseUnreachableError
        If the magnitude at the maximum configured hold stays below the
        target, or already exceeds it at zero hold (the phase magnitude
        grows monotonically with hold time).
    """
    schedule = schedule_from_config(config)
    if schedule.shape == PIECEWISE:
        raise InvalidParameterError(
            "hold calibration applies to ramp schedules; scale a piecewise "
            "schedule's amplitude instead (optimizer.calibrate_scale)"
        )

    def magnitude(t_h: float) -> float:
        return abs(conditional_phase(config, schedule.with_hold(t_h), tol))

    m0 = magnitude(0.0)
    if m0 > target_phase + PHASE_TOL:
        raise PhaseUnreachableError(
            f"ramps alone accumulate |phase| = {m0:.6f} > target "
            f"{target_phase:.6f}; shorten the ramps or raise the target",
            max_phase=m0,
        )
    if abs(m0 - target_phase) <= PHASE_TOL:
        return schedule.with_hold(0.0)
    m_max = magnitude(config.max_hold)
    if m_max < target_phase:
        raise PhaseUnreachableError(
            f"maximum achievable |phase| within max_hold = "
            f"{config.max_hold} us is {m_max:.6f} < target {target_phase:.6f}",
            max_phase=m_max,
        )
    t_h = brentq(lambda x: magnitude(x) - target_phase, 0.0, config.max_hold,
                 xtol=1e-9, rtol=1e-12)
    result = schedule.with_hold(float(t_h))
    residual = abs(magnitude(t_h) - target_phase)
    if residual > PHASE_TOL:
        raise PhaseUnreachableError(
            f"calibration residual {residual:.2e} rad exceeds {PHASE_TOL}",
            max_phase=magnitude(t_h),
        )
    return result
