"""Shared fixtures: the headline parameter set and its calibrated schedule.

Session-scoped because calibration costs a few seconds and nearly every
module exercises the same reference gate.
"""

import pytest

import rydgate as rg


@pytest.fixture(scope="session")
def ref_config():
    return rg.reference_config()


@pytest.fixture(scope="session")
def ref_config_sl(ref_config):
    return ref_config.with_(configuration=rg.SINGLE_LASER)


@pytest.fixture(scope="session")
def ref_schedule(ref_config):
    return rg.calibrate_hold(ref_config)


@pytest.fixture(scope="session")
def ref_result_df(ref_config, ref_schedule):
    return rg.assemble_rho(ref_config, ref_schedule)


@pytest.fixture(scope="session")
def ref_result_sl(ref_config_sl, ref_schedule):
    return rg.assemble_rho(ref_config_sl, ref_schedule)
