import math

import pytest
from hypothesis import given, settings, strategies as st

import rydgate as rg
from rydgate.errors import OutOfScheduleError, PhaseUnreachableError
from rydgate.pulse import (
    PHASE_TOL,
    adiabaticity_margin,
    calibrate_hold,
    conditional_phase,
    evaluate,
    schedule_from_config,
)

TWO_PI = 2.0 * math.pi


def test_boundary_values(ref_config):
    sched = schedule_from_config(ref_config)
    d = rg.derive(ref_config)
    om0, de0 = evaluate(sched, 0.0)
    assert om0 == 0.0
    assert de0 == pytest.approx(d.delta_start)
    om_end, de_end = evaluate(sched, sched.total_time)
    assert om_end == pytest.approx(0.0, abs=1e-12)
    assert de_end == pytest.approx(d.delta_start)


def test_peak_of_ramp(ref_config):
    sched = schedule_from_config(ref_config).with_hold(0.4)
    om, de = evaluate(sched, ref_config.ramp_time)
    assert om == pytest.approx(TWO_PI * 3.0)
    assert de == pytest.approx(0.0, abs=1e-12)


def test_hold_plateau(ref_config):
    sched = schedule_from_config(ref_config).with_hold(0.5)
    om, de = evaluate(sched, sched.total_time / 2.0)
    assert om == pytest.approx(sched.omega_max)
    assert de == pytest.approx(sched.delta_end, abs=1e-12)


def test_out_of_schedule(ref_config):
    sched = schedule_from_config(ref_config)
    with pytest.raises(OutOfScheduleError):
        evaluate(sched, -0.1)
    with pytest.raises(OutOfScheduleError):
        evaluate(sched, sched.total_time + 0.1)


@settings(max_examples=50, deadline=None)
@given(frac=st.floats(0.0, 1.0), hold=st.floats(0.0, 2.0),
       linear=st.booleans())
def test_time_reversal_symmetry(ref_config, frac, hold, linear):
    cfg = ref_config.with_(ramp_shape="linear") if linear else ref_config
    sched = schedule_from_config(cfg).with_hold(hold)
    t = frac * sched.total_time
    om1, de1 = evaluate(sched, t)
    om2, de2 = evaluate(sched, sched.total_time - t)
    assert om1 == pytest.approx(om2, abs=1e-9)
    assert de1 == pytest.approx(de2, abs=1e-9)


def test_default_shape_continuously_differentiable(ref_config):
    sched = schedule_from_config(ref_config).with_hold(0.3)
    t_r = sched.ramp_time
    for t_star in (t_r, t_r + sched.hold_time):
        h = 1e-7
        dom_left = (evaluate(sched, t_star)[0]
                    - evaluate(sched, t_star - h)[0]) / h
        dom_right = (evaluate(sched, t_star + h)[0]
                     - evaluate(sched, t_star)[0]) / h
        assert dom_left == pytest.approx(dom_right, abs=1e-4)


def test_margin_decreases_with_ramp_time(ref_config):
    margins = []
    for t_r in (0.2, 0.5, 1.0, 2.0, 3.0):
        sched = schedule_from_config(
            ref_config.with_(ramp_time=t_r)
        ).with_hold(0.0)
        margins.append(adiabaticity_margin(sched, ref_config))
    assert all(a > b for a, b in zip(margins, margins[1:]))


def test_margin_vanishes_in_adiabatic_limit(ref_config):
    sched = schedule_from_config(
        ref_config.with_(ramp_time=40.0)
    ).with_hold(0.0)
    assert adiabaticity_margin(sched, ref_config) < 5e-3


def test_margin_consistent_with_leakage(ref_config, ref_schedule):
    """~0.09 margin for the headline ramps, matching per-mille leakage."""
    from rydgate.gate import zero_momentum_trajectory

    margin = adiabaticity_margin(ref_schedule, ref_config)
    traj = zero_momentum_trajectory(ref_config, ref_schedule, gamma=0.0)
    leak = 1.0 - abs(traj.final_state[0]) ** 2
    assert 0.02 < margin < 0.3
    assert 1e-4 < leak < 1e-2


def test_calibrated_phase_hits_target(ref_config, ref_schedule):
    phase = conditional_phase(ref_config, ref_schedule)
    assert abs(abs(phase) - math.pi) <= PHASE_TOL


def test_calibrated_gate_time_window(ref_schedule):
    assert 1.8 <= ref_schedule.total_time <= 3.0


def test_calibration_trivial_target(ref_config):
    """A huge detuning with tiny power accumulates almost no phase."""
    cfg = ref_config.with_(rabi_max=0.01, detuning_start=50.0,
                           detuning_end=40.0, max_hold=1.0)
    sched = calibrate_hold(cfg, target_phase=1e-9)
    assert sched.hold_time == pytest.approx(0.0, abs=1e-3)


def test_calibration_unreachable_phase(ref_config):
    cfg = ref_config.with_(max_hold=0.5)
    with pytest.raises(PhaseUnreachableError) as exc_info:
        calibrate_hold(cfg, target_phase=2.0 * math.pi)
    assert exc_info.value.max_phase is not None
    assert exc_info.value.max_phase < 2.0 * math.pi


def test_calibration_overshoot_reports(ref_config):
    """Very long ramps exceed pi before any hold is added."""
    cfg = ref_config.with_(ramp_time=2.5)
    with pytest.raises(PhaseUnreachableError):
        calibrate_hold(cfg)


def test_phase_monotone_in_hold(ref_config):
    sched = schedule_from_config(ref_config)
    phases = [abs(conditional_phase(ref_config, sched.with_hold(h), tol=1e-9))
              for h in (0.0, 0.2, 0.4, 0.6)]
    assert all(a < b for a, b in zip(phases, phases[1:]))


def test_conditional_phase_geometry_independent(ref_config, ref_config_sl,
                                                ref_schedule):
    """Zero-momentum calibration is identical in both laser geometries."""
    a = conditional_phase(ref_config, ref_schedule, tol=1e-11)
    b = conditional_phase(ref_config_sl, ref_schedule, tol=1e-11)
    assert a == pytest.approx(b, abs=1e-9)


def test_piecewise_schedule_evaluates(ref_config):
    cfg = ref_config.with_(
        ramp_shape="piecewise",
        nodes=((0.0, 0.0, 6.0), (0.5, 2.0, 3.0), (1.0, 3.0, 0.0),
               (1.5, 2.0, 3.0), (2.0, 0.0, 6.0)),
    )
    sched = schedule_from_config(cfg)
    assert sched.total_time == 2.0
    om, de = evaluate(sched, 1.0)
    assert om == pytest.approx(TWO_PI * 3.0)
    assert de == pytest.approx(0.0, abs=1e-9)
    om0, _ = evaluate(sched, 0.0)
    assert om0 == 0.0
