import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import rydgate as rg
from rydgate.dressing import (
    _track_ground_homotopy,
    dipole_kick,
    doppler_phase,
    dressed_spectrum,
    interaction_J,
    light_shift_pair_blockaded,
    light_shift_single,
    weak_dressing_J,
)
from rydgate.gate import zero_momentum_trajectory
from rydgate.pulse import schedule_from_config

TWO_PI = 2.0 * math.pi


def test_light_shift_reference_values():
    """Omega/2pi = 3, Delta/2pi = 6 (perfect blockade closed forms)."""
    e1 = light_shift_single(TWO_PI * 3.0, TWO_PI * 6.0) / TWO_PI
    e2 = light_shift_pair_blockaded(TWO_PI * 3.0, TWO_PI * 6.0) / TWO_PI
    assert e1 == pytest.approx(0.35410, abs=5e-6)
    assert e2 == pytest.approx(0.67423, abs=5e-6)
    assert e2 - 2 * e1 == pytest.approx(-0.03397, abs=5e-6)


@settings(max_examples=200, deadline=None)
@given(
    omega=st.floats(0.05, 60.0),
    delta=st.floats(0.5, 60.0),
    sign=st.sampled_from([-1.0, 1.0]),
)
def test_closed_forms_match_diagonalization(omega, delta, sign):
    delta = sign * delta
    for enhance, closed in ((1.0, light_shift_single),
                            (math.sqrt(2.0), light_shift_pair_blockaded)):
        g = enhance * omega / 2.0
        h = np.array([[0.0, g], [g, -delta]])
        evals, evecs = np.linalg.eigh(h)
        ground = evals[int(np.argmax(np.abs(evecs[0, :])))]
        assert closed(omega, delta) == pytest.approx(ground, rel=1e-12)


def test_interaction_j_zero_at_zero_power():
    assert interaction_J(0.0, TWO_PI * 6.0, -TWO_PI * 6.4) == 0.0


def test_weak_dressing_example():
    """Omega/2pi = 0.5, Delta/2pi = 6, strong blockade: exact J lands
    within 5% of -Omega^4/(8 Delta^3)."""
    j_exact = interaction_J(TWO_PI * 0.5, TWO_PI * 6.0, -TWO_PI * 400.0)
    j_weak = weak_dressing_J(TWO_PI * 0.5, TWO_PI * 6.0)
    assert j_exact / TWO_PI == pytest.approx(-3.4753e-05, rel=1e-4)
    assert j_weak / TWO_PI == pytest.approx(-3.6169e-05, rel=1e-4)
    assert abs(j_exact - j_weak) / abs(j_exact) < 0.05


def test_interaction_j_matches_independent_eigensolver():
    """For Delta > 0 and attractive V the dressed ground is the top
    eigenvalue; compare the homotopy-tracked route against a plain
    eigensolver."""
    omega, delta, vdd = TWO_PI * 2.0, TWO_PI * 4.0, -TWO_PI * 20.0
    g = math.sqrt(2.0) * omega / 2.0
    h = np.array([[0.0, g, 0.0], [g, -delta, g], [0.0, g, vdd - 2 * delta]])
    e2 = np.linalg.eigvalsh(h).max()
    expected = e2 - 2.0 * light_shift_single(omega, delta)
    assert interaction_J(omega, delta, vdd) == pytest.approx(expected,
                                                             rel=1e-12)


def test_full_power_interaction_strength():
    """At Delta = 0 with the headline blockade the 3x3 gives
    |J|/2pi ~ 0.61 MHz (the artifact's own definition of J)."""
    j = interaction_J(TWO_PI * 3.0, 0.0, -TWO_PI * 6.4) / TWO_PI
    assert j == pytest.approx(-0.6074, abs=2e-4)


def test_dressed_spectrum_bare_limit():
    spec = dressed_spectrum(0.0, TWO_PI * 6.0, -TWO_PI * 6.4)
    assert spec.c_0 == pytest.approx(1.0)
    assert spec.c_b == pytest.approx(0.0, abs=1e-12)
    assert spec.c_rr == pytest.approx(0.0, abs=1e-12)


def test_dressed_spectrum_normalized(ref_config):
    spec = dressed_spectrum(TWO_PI * 3.0, TWO_PI * 2.0, -TWO_PI * 6.4)
    assert spec.c_0**2 + spec.c_b**2 + spec.c_rr**2 == pytest.approx(1.0)


def test_dressed_spectrum_perfect_blockade_limit():
    spec = dressed_spectrum(TWO_PI * 3.0, TWO_PI * 6.0, -TWO_PI * 1e7)
    assert abs(spec.c_rr) < 1e-6
    assert spec.ground_energy == pytest.approx(
        light_shift_pair_blockaded(TWO_PI * 3.0, TWO_PI * 6.0), rel=1e-6
    )


def test_dressed_spectrum_gap_closure():
    """A repulsive potential tuned to 2*Delta makes |00> and |rr>
    degenerate; a negligible drive cannot open the gap."""
    from rydgate.errors import GapClosureError

    delta = TWO_PI * 3.0
    with pytest.raises(GapClosureError):
        dressed_spectrum(1e-7, delta, 2.0 * delta)


def test_dressed_spectrum_resonant_branch():
    """At Delta = 0 the dressed ground continues onto the upper branch."""
    spec = dressed_spectrum(TWO_PI * 3.0, 0.0, -TWO_PI * 6.4)
    roots = np.roots([1.0, 6.4, -9.0, -28.8])
    expected = max(r.real for r in roots if abs(r.imag) < 1e-12)
    assert spec.ground_energy / TWO_PI == pytest.approx(expected, rel=1e-10)
    assert spec.c_rr**2 > 0.01


def test_gauge_invariance_of_coefficients():
    """Shifting every diagonal by a constant changes no coefficient."""
    omega, delta, vdd = TWO_PI * 3.0, TWO_PI * 1.0, -TWO_PI * 6.4
    g = math.sqrt(2.0) * omega / 2.0
    h_c = np.array([[0.0, g, 0.0], [g, 0.0, g], [0.0, g, 0.0]])
    for shift in (0.0, 17.0, -230.0):
        h_d = np.diag([shift, -delta + shift, vdd - 2 * delta + shift])
        evals, evecs, gi = _track_ground_homotopy(h_d, h_c)
        vec = evecs[:, gi] * np.sign(evecs[0, gi])
        if shift == 0.0:
            ref_vec = vec
            ref_energy = evals[gi]
        else:
            assert np.allclose(vec, ref_vec, atol=1e-12)
            assert evals[gi] - shift == pytest.approx(ref_energy, abs=1e-9)


def test_doppler_phase_zero_at_rest(ref_config, ref_schedule):
    assert doppler_phase(ref_schedule, ref_config, 0.0, 0.0) == 0.0


def test_doppler_slope_matches_trajectory_integral(ref_config_sl,
                                                   ref_schedule):
    """The single-laser first-order slope equals the time-integrated
    excitation weight (to within the adiabatic-following error)."""
    dp = 1e-3
    slope = (doppler_phase(ref_schedule, ref_config_sl, dp, 0.0)
             - doppler_phase(ref_schedule, ref_config_sl, -dp, 0.0)) / (2 * dp)
    traj = zero_momentum_trajectory(ref_config_sl, ref_schedule, gamma=0.0)
    d = rg.derive(ref_config_sl)
    integral = d.omega_rec * traj.excitation_time()
    assert slope == pytest.approx(integral, rel=0.02)


def test_doppler_free_phase_even_in_momentum(ref_config, ref_schedule):
    """Second-order perturbation theory gives an even function of P."""
    p = 3.0
    plus = doppler_phase(ref_schedule, ref_config, p, 0.0)
    minus = doppler_phase(ref_schedule, ref_config, -p, 0.0)
    zero = doppler_phase(ref_schedule, ref_config, 0.0, 0.0)
    even = abs(plus + minus - 2 * zero)
    odd = abs(plus - minus)
    assert even > 1e-6
    assert odd < 1e-9 * max(even, 1.0)


def test_dipole_kick_reference_value(ref_config, ref_schedule):
    traj = zero_momentum_trajectory(ref_config, ref_schedule, gamma=0.0)
    dp = dipole_kick(traj, ref_config)
    # oracle: integral of |c_rr|^2 over the schedule times dV/dz over k_L
    d = rg.derive(ref_config)
    expected = traj.double_integral[-1] * d.vdd_gradient_at_zbar / d.k_l
    assert dp == pytest.approx(expected, rel=1e-12)
    assert 0.03 < dp < 0.12


def test_dipole_kick_vanishes_for_perfect_blockade(ref_config, ref_schedule):
    strong = ref_config.with_(c6=1.0e9)  # blockade 1e4 x deeper
    traj = zero_momentum_trajectory(strong, ref_schedule, gamma=0.0)
    weak_traj = zero_momentum_trajectory(ref_config, ref_schedule, gamma=0.0)
    assert dipole_kick(traj, strong) < 1e-3 * dipole_kick(weak_traj,
                                                          ref_config)


def test_dipole_kick_superlinear_in_power(ref_config):
    """Doubling Omega_max more than doubles the momentum kick."""
    sched = schedule_from_config(ref_config).with_hold(0.3)
    traj3 = zero_momentum_trajectory(ref_config, sched, gamma=0.0)
    cfg6 = ref_config.with_(rabi_max=6.0)
    sched6 = schedule_from_config(cfg6).with_hold(0.3)
    traj6 = zero_momentum_trajectory(cfg6, sched6, gamma=0.0)
    ratio = dipole_kick(traj6, cfg6) / dipole_kick(traj3, ref_config)
    assert ratio > 2.0
