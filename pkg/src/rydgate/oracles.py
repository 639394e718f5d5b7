"""Self-contained verification oracles.

Each oracle checks one piece of the pipeline against an independent
route: closed forms against direct diagonalization, perturbation theory
against exact propagation, quadrature sums against analytic Gaussian
integrals, and norm loss against the accumulated scattering exponent.
The CLI's oracle-check command runs the whole battery and reports one
line per oracle; the test suite asserts on the same reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import GateConfig, derive
from .dressing import (
    doppler_phase,
    interaction_J,
    light_shift_pair_blockaded,
    light_shift_single,
    weak_dressing_J,
)
from .gate import characteristic_residual, thermal_ensemble, zero_momentum_trajectory
from .model import two_atom_components
from .propagator import propagate
from .pulse import PulseSchedule, calibrate_hold, evaluate, schedule_from_config

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OracleReport:
    name: str
    passed: bool
    value: float
    bound: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: {self.value:.3e} "
                f"(bound {self.bound:.3e}) {self.detail}")


def _ground_branch_eigh(h: np.ndarray) -> np.ndarray:
    """Batched dressed-ground eigenvalue of stacked two-level blocks.

    The branch adiabatically connected to the bare ground state keeps the
    dominant |0> weight, so it is picked by eigenvector overlap (an
    independent route that never evaluates the closed form).
    """
    evals, evecs = np.linalg.eigh(h)
    pick = np.argmax(np.abs(evecs[:, 0, :]), axis=-1)
    return np.take_along_axis(evals, pick[:, None], axis=1)[:, 0]


def closed_form_oracle(n_draws: int = 10_000, seed: int = 20240) -> OracleReport:
    """Light-shift closed forms vs two-level diagonalization (relative)."""
    rng = np.random.default_rng(seed)
    omega = TWO_PI * rng.uniform(0.05, 10.0, n_draws)
    delta = TWO_PI * rng.uniform(0.1, 10.0, n_draws) * rng.choice([-1, 1], n_draws)
    h1 = np.zeros((n_draws, 2, 2))
    h1[:, 0, 1] = h1[:, 1, 0] = omega / 2.0
    h1[:, 1, 1] = -delta
    h2 = np.zeros((n_draws, 2, 2))
    h2[:, 0, 1] = h2[:, 1, 0] = math.sqrt(2.0) * omega / 2.0
    h2[:, 1, 1] = -delta
    e1 = np.array([light_shift_single(o, d) for o, d in zip(omega, delta)])
    e2 = np.array([light_shift_pair_blockaded(o, d) for o, d in zip(omega, delta)])
    g1 = _ground_branch_eigh(h1)
    g2 = _ground_branch_eigh(h2)
    rel = max(
        np.max(np.abs(e1 - g1) / np.maximum(np.abs(g1), 1e-30)),
        np.max(np.abs(e2 - g2) / np.maximum(np.abs(g2), 1e-30)),
    )
    return OracleReport(
        "closed-form light shifts vs diagonalization", rel <= 1e-10,
        float(rel), 1e-10, f"{n_draws} random (Omega, Delta) draws",
    )


def weak_dressing_oracle(n_draws: int = 200, seed: int = 777) -> OracleReport:
    """Exact J vs -Omega^4/(8 Delta^3) in the weak-dressing blockaded regime."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_draws):
        delta = TWO_PI * rng.uniform(1.0, 8.0) * rng.choice([-1.0, 1.0])
        omega = abs(delta) * rng.uniform(0.02, 0.1)
        vdd = -100.0 * abs(delta)
        j_exact = interaction_J(omega, delta, vdd)
        j_weak = weak_dressing_J(omega, delta)
        worst = max(worst, abs(j_exact - j_weak) / abs(j_exact))
    return OracleReport(
        "weak-dressing asymptote of J", worst <= 0.05, float(worst), 0.05,
        f"Omega/|Delta| <= 0.1, |V| = 100 |Delta|, {n_draws} draws",
    )


def quadrature_oracle(config: GateConfig) -> OracleReport:
    """Thermal average of e^{-i alpha P_cm} vs the analytic Gaussian."""
    ensemble = thermal_ensemble(config)
    d = derive(config)
    # alpha spans the physically used phase sensitivities (rad per hbar k)
    alphas = np.linspace(0.0, 3.0 * d.omega_rec * 2.0, 25)
    worst = max(characteristic_residual(ensemble, float(a)) for a in alphas)
    return OracleReport(
        "Gauss-Hermite vs analytic Gaussian average", worst <= 1e-6,
        float(worst), 1e-6, f"{ensemble.n_nodes} nodes per axis",
    )


def _unwrapped_branch_phase(config: GateConfig, schedule: PulseSchedule,
                            p_cm: float, tol: float = 1e-11) -> float:
    """Unwrapped final phase of the |00> amplitude at momentum (P, 0)."""
    comp = two_atom_components(config)
    d = derive(config)

    def ham_at(t):
        omega, delta = evaluate(schedule, t)
        return comp.assemble(omega, delta, p_cm=p_cm, gamma=0.0)

    psi0 = np.zeros(comp.basis.dim, dtype=complex)
    psi0[0] = 1.0
    traj = propagate(ham_at, psi0, schedule.total_time, tol, checkpoints=3000)
    return -float(np.unwrap(np.angle(traj.states[:, 0]))[-1])


def _exact_doppler_phase(config: GateConfig, schedule: PulseSchedule,
                         p_cm: float, tol: float = 1e-11) -> float:
    """Phase of the |00> branch at momentum (P, 0) relative to rest."""
    return (_unwrapped_branch_phase(config, schedule, p_cm, tol)
            - _unwrapped_branch_phase(config, schedule, 0.0, tol))


def perturbation_slope_oracle(config: GateConfig,
                              momenta=None) -> OracleReport:
    """Scaling of the perturbation-vs-exact phase residual (single laser).

    The first- plus second-order expansion leaves a residual starting at
    third order in the momentum, so the fitted log-log slope over a
    decade must be at least 2.5.  The reference ramp is slow and stays
    well detuned: finite ramp speed contaminates the comparison with an
    adiabatic-following floor (linear in P, scaling as the inverse ramp
    area) that the static expansion cannot represent, and the gentle
    large-gap ramp pushes that floor below the third-order term across
    the fitted decade while keeping every momentum perturbative
    (omega_rec * P well under the dressing gap).
    """
    cfg = config.with_(configuration="single-laser", ramp_time=5.0,
                       hold_time=0.0, detuning_start=10.0, detuning_end=4.0)
    schedule = schedule_from_config(cfg)
    if momenta is None:
        momenta = np.geomspace(12.0, 120.0, 7)
    phi0 = _unwrapped_branch_phase(cfg, schedule, 0.0)
    resid = []
    for p in momenta:
        exact = _unwrapped_branch_phase(cfg, schedule, float(p)) - phi0
        pt = doppler_phase(schedule, cfg, float(p), 0.0)
        resid.append(abs(exact - pt))
    resid = np.array(resid)
    slope = float(np.polyfit(np.log(momenta), np.log(resid), 1)[0])
    return OracleReport(
        "perturbation residual scaling exponent", slope >= 2.5, slope, 2.5,
        f"single-laser |00> branch, P in [{momenta[0]:.3g}, {momenta[-1]:.3g}] hbar k",
    )


def doppler_free_suppression_oracle(config: GateConfig,
                                    schedule: PulseSchedule | None = None,
                                    dp: float = 1.0,
                                    exact: bool = True) -> OracleReport:
    """First-order Doppler slope ratio, doppler-free over single-laser.

    With ``exact`` the slopes come from symmetric finite differences of
    fully propagated branch phases, so the suppression is demonstrated on
    the dynamics itself rather than on the perturbative expression.
    """
    sl = config.with_(configuration="single-laser")
    df = config.with_(configuration="doppler-free")
    if schedule is None:
        schedule = calibrate_hold(df)

    def slope(cfg):
        if exact:
            plus = _unwrapped_branch_phase(cfg, schedule, dp)
            minus = _unwrapped_branch_phase(cfg, schedule, -dp)
        else:
            plus = doppler_phase(schedule, cfg, dp, 0.0)
            minus = doppler_phase(schedule, cfg, -dp, 0.0)
        return (plus - minus) / (2.0 * dp)

    s_sl = abs(slope(sl))
    s_df = abs(slope(df))
    ratio = s_df / s_sl
    return OracleReport(
        "doppler-free first-order suppression", ratio <= 1e-3, float(ratio),
        1e-3, f"|dphi/dP|: doppler-free {s_df:.3e} vs single-laser {s_sl:.3e}",
    )


def loss_consistency_oracle(config: GateConfig,
                            schedule: PulseSchedule | None = None) -> OracleReport:
    """Norm loss of a weakly lossy run vs 1 - exp(-gamma T) bookkeeping."""
    if schedule is None:
        schedule = calibrate_hold(config)
    d = derive(config)
    traj = zero_momentum_trajectory(config, schedule, gamma=d.gamma)
    measured = 1.0 - traj.final_norm2
    predicted = 1.0 - math.exp(-traj.gamma_t(d.gamma))
    rel = abs(measured - predicted) / predicted
    return OracleReport(
        "norm loss vs accumulated scattering exponent", rel <= 1e-3,
        float(rel), 1e-3,
        f"loss {measured:.3e} vs predicted {predicted:.3e}",
    )


def unitarity_oracle(config: GateConfig,
                     schedule: PulseSchedule | None = None) -> OracleReport:
    """Norm conservation of the decay-free propagation."""
    if schedule is None:
        schedule = calibrate_hold(config)
    tol = config.integrator_tol
    traj = zero_momentum_trajectory(config, schedule, gamma=0.0, tol=tol)
    drift = abs(traj.final_norm2 - 1.0)
    bound = 100.0 * tol * schedule.total_time
    return OracleReport(
        "zero-decay unitarity", drift <= bound, float(drift), float(bound),
        f"tol {tol:g}, duration {schedule.total_time:.3g} us",
    )


def fidelity_convergence_oracle(config: GateConfig,
                                schedule: PulseSchedule | None = None) -> OracleReport:
    """Fidelity stability under doubling the quadrature node count."""
    from .gate import assemble_rho

    if schedule is None:
        schedule = calibrate_hold(config)
    base = assemble_rho(config, schedule)
    dense = assemble_rho(
        config, schedule,
        ensemble=thermal_ensemble(config, n_nodes=2 * config.quadrature_nodes + 1),
    )
    drift = abs(dense.fidelity - base.fidelity)
    return OracleReport(
        "fidelity quadrature convergence", drift <= 1e-5, float(drift), 1e-5,
        f"{config.quadrature_nodes} -> {2 * config.quadrature_nodes + 1} nodes",
    )


def run_all(config: GateConfig) -> list[OracleReport]:
    """Run the full oracle battery for one configuration."""
    schedule = (calibrate_hold(config) if config.hold_time == "auto"
                else schedule_from_config(config))
    return [
        closed_form_oracle(),
        weak_dressing_oracle(),
        quadrature_oracle(config),
        unitarity_oracle(config, schedule),
        loss_consistency_oracle(config, schedule),
        doppler_free_suppression_oracle(config, schedule),
        perturbation_slope_oracle(config),
        fidelity_convergence_oracle(config, schedule),
    ]
