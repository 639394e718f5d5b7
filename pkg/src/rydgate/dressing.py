"""Dressed-state analysis: light shifts, interaction strength, Doppler
perturbation theory, and the dipole-force momentum kick.

Closed forms (perfect blockade):

    E1(Omega, Delta) = ( -Delta + sign(Delta) sqrt(Delta^2 +   Omega^2) ) / 2
    E2(Omega, Delta) = ( -Delta + sign(Delta) sqrt(Delta^2 + 2 Omega^2) ) / 2

both being the dressed-ground eigenvalues of the corresponding two-level
blocks (single atom, and {|00>, bright} with the sqrt(2)-enhanced
coupling).  The interaction strength is J = E2 - 2 E1; with a finite
blockade E2 is taken from the exact 3x3 diagonalization instead.  The
dressed-ground branch is identified by continuity from the bare |00>
state at zero coupling (ties at exact degeneracy resolve toward the
larger eigenvalue, matching a sweep arriving from positive detuning).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .config import GateConfig, derive
from .errors import GapClosureError
from .model import (
    restricted_blockade_components,
    two_atom_components,
)
from .propagator import Trajectory
from .pulse import PulseSchedule, evaluate

GAP_FLOOR = 1e-9  # rad/us


def _sign(delta: float) -> float:
    return 1.0 if delta >= 0.0 else -1.0


def light_shift_single(omega: float, delta: float) -> float:
    """Single-atom ground-state light shift, rad/us."""
    return 0.5 * (-delta + _sign(delta) * np.sqrt(delta**2 + omega**2))


def light_shift_pair_blockaded(omega: float, delta: float) -> float:
    """Two-atom ground light shift in the perfect-blockade limit, rad/us."""
    return 0.5 * (-delta + _sign(delta) * np.sqrt(delta**2 + 2.0 * omega**2))


@dataclass(frozen=True)
class DressedSpectrum:
    """Instantaneous eigenstructure of the frozen 3x3 blockade block."""

    energies: np.ndarray      # all eigenvalues, ascending
    vectors: np.ndarray       # eigenvectors as columns, matching energies
    ground_index: int
    c_0: float
    c_b: float
    c_rr: float
    gap: float                # distance to the nearest excited eigenvalue

    @property
    def ground_energy(self) -> float:
        return float(self.energies[self.ground_index])


def _track_ground_homotopy(h_diag: np.ndarray, h_coupling: np.ndarray,
                           steps: int = 64):
    """Follow the |00> branch while the coupling is switched on.

    Returns (eigenvalues, eigenvectors, ground_index) at full coupling.
    """
    prev = None
    gi = 0
    for s in np.linspace(1.0 / steps, 1.0, steps):
        evals, evecs = np.linalg.eigh(h_diag + s * h_coupling)
        if prev is None:
            # bare-state degeneracies (Delta = 0) split symmetrically at
            # small coupling: treat near-equal overlaps as a tie and take
            # the upper branch, matching a sweep arriving from Delta > 0
            overlaps = np.abs(evecs[0, :])
            best = overlaps.max()
            candidates = np.flatnonzero(overlaps >= 0.9 * best)
            gi = int(candidates[np.argmax(evals[candidates])])
        else:
            gi = int(np.argmax(np.abs(prev @ evecs)))
        prev = evecs[:, gi]
    return evals, evecs, gi


def dressed_spectrum(omega: float, delta: float, vdd: float) -> DressedSpectrum:
    """Eigen-decomposition of the frozen {00, B, rr} block, rad/us inputs.

    Raises GapClosureError if the dressed ground becomes degenerate with
    an excited branch (gap below 1e-9 rad/us).
    """
    h_diag = np.diag([0.0, -delta, vdd - 2.0 * delta])
    g = np.sqrt(2.0) * omega / 2.0
    h_c = np.array([[0.0, g, 0.0], [g, 0.0, g], [0.0, g, 0.0]])
    evals, evecs, gi = _track_ground_homotopy(h_diag, h_c)
    others = np.delete(evals, gi)
    gap = float(np.min(np.abs(others - evals[gi]))) if others.size else np.inf
    if omega != 0.0 and gap < GAP_FLOOR:
        raise GapClosureError(f"dressed gap {gap:.3e} rad/us below {GAP_FLOOR}")
    vec = evecs[:, gi]
    if vec[0] < 0:
        vec = -vec
    return DressedSpectrum(
        energies=evals, vectors=evecs, ground_index=gi,
        c_0=float(vec[0]), c_b=float(vec[1]), c_rr=float(vec[2]), gap=gap,
    )


def interaction_J(omega: float, delta: float, vdd: float) -> float:
    """Entangling interaction strength J = E2_exact - 2 E1, rad/us.

    E2_exact is the dressed-ground eigenvalue of the 3x3 block with the
    finite pair potential vdd; E1 is the closed-form single-atom shift.
    """
    if omega == 0.0:
        return 0.0
    spec = dressed_spectrum(omega, delta, vdd)
    return spec.ground_energy - 2.0 * light_shift_single(omega, delta)


def _ground_series(config: GateConfig, schedule: PulseSchedule, n_times: int):
    """Eigen-decomposition of the frozen two-atom H0 along the schedule.

    Yields (t, eigenvalues, eigenvectors, ground_index) with the ground
    branch tracked by eigenvector overlap between successive times.
    """
    comp = two_atom_components(config)
    ts = np.linspace(0.0, schedule.total_time, n_times)
    prev = None
    out = []
    for t in ts:
        omega, delta = evaluate(schedule, t)
        h = comp.assemble(omega, delta, gamma=0.0).real
        evals, evecs = np.linalg.eigh(h)
        if prev is None:
            gi = int(np.argmax(np.abs(evecs[0, :])))
        else:
            gi = int(np.argmax(np.abs(prev @ evecs)))
        prev = evecs[:, gi]
        out.append((t, evals, evecs, gi))
    return comp, ts, out


def doppler_phase(schedule: PulseSchedule, config: GateConfig,
                  p_cm: float, p_rel: float, n_times: int = 801) -> float:
    """Doppler-induced phase of the dressed |00> branch, radians.

    Integrates the first- plus second-order perturbation of the dressed
    ground energy by the momentum couplings over the schedule; the output
    amplitude factor is exp(-i phi).  For the single-laser geometry the
    first-order term is omega_rec * P_cm * (|c_B|^2 + 2 |c_rr|^2); in the
    Doppler-free geometry it vanishes identically and only second-order
    couplings to the dark manifold survive.

    Momenta are in hbar*k_L units.
    """
    if p_cm == 0.0 and p_rel == 0.0:
        return 0.0
    comp, ts, series = _ground_series(config, schedule, n_times)
    vop = (comp.omega_rec * p_cm) * comp.doppler_cm \
        + (2.0 * comp.omega_rec * p_rel) * comp.doppler_rel
    shifts = np.empty(len(ts))
    for k, (t, evals, evecs, gi) in enumerate(series):
        gvec = evecs[:, gi]
        vg = vop @ gvec
        first = float(gvec @ vg)
        second = 0.0
        for e in range(evals.size):
            if e == gi:
                continue
            gap = evals[gi] - evals[e]
            me = evecs[:, e] @ vg
            if me == 0.0:
                continue
            if abs(gap) < GAP_FLOOR:
                raise GapClosureError(
                    f"degenerate dressed levels at t = {t:.6g} us",
                    time=float(t),
                )
            second += abs(me) ** 2 / gap
        shifts[k] = first + second
    return float(simpson(shifts, x=ts))


def doppler_phase_gradient(schedule: PulseSchedule, config: GateConfig,
                           dp: float = 1e-3) -> float:
    """d(phi)/d(P_cm) at zero momenta by symmetric finite difference."""
    plus = doppler_phase(schedule, config, dp, 0.0)
    minus = doppler_phase(schedule, config, -dp, 0.0)
    return (plus - minus) / (2.0 * dp)


def dipole_kick(trajectory: Trajectory, config: GateConfig) -> float:
    """Relative-momentum displacement from the dipole force, hbar*k_L units.

    Uses the trajectory's running integral of |c_rr|^2 dV/dz (the
    trajectory must have been propagated from the |00> branch with
    gradient weights attached).
    """
    d = derive(config)
    return float(trajectory.kick_integral[-1] / d.k_l)


def weak_dressing_J(omega: float, delta: float) -> float:
    """Perturbative interaction strength -Omega^4 / (8 Delta^3), rad/us."""
    return -(omega**4) / (8.0 * delta**3)


def frozen_block_hamiltonian(config: GateConfig, omega: float,
                             delta: float) -> np.ndarray:
    """The 3x3 frozen-atom block at given controls (zero decay)."""
    comp = restricted_blockade_components(config)
    return comp.assemble(omega, delta, gamma=0.0).real
