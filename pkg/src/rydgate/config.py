"""Configuration loading, validation, and derived physical constants.

Unit conventions
----------------
User-facing values follow the conventions of the experimental literature:
frequencies are quoted as (angular frequency)/2pi in MHz, lengths in um,
times in us, masses in kg.  The one exception is ``gamma``: it is the
population decay *rate* of a single Rydberg excitation in 1/us (so the
excited population decays as exp(-gamma*t)).  Internally everything is
converted to hbar = 1 units: energies and angular frequencies in rad/us,
momenta in units of hbar*k_L.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from scipy.constants import hbar as HBAR_SI

from .errors import InvalidParameterError, MissingParameterError

TWO_PI = 2.0 * math.pi

SINGLE_LASER = "single-laser"
DOPPLER_FREE = "doppler-free"

# (section, key, default) -- None means required
_SCHEMA = {
    "physics": {
        "configuration": DOPPLER_FREE,
        "rabi_max": None,
        "detuning_start": None,
        "detuning_end": None,
        "gamma": None,
        "separation": None,
        "c6": 1.0e5,
        "vdd_exponent": 6,
        "nbar": 5.0,
        "trap_freq": 0.135,
        "wavelength": 319.0,
        "atom_mass": 2.2069e-25,
    },
    "pulse": {
        "ramp_time": None,
        "hold_time": "auto",
        "ramp_shape": "smoothstep",
        "nodes": [],
        "max_hold": 25.0,
    },
    "numerics": {
        "quadrature_nodes": 21,
        "integrator_tol": 1e-10,
        "checkpoints": 2000,
    },
}


@dataclass(frozen=True)
class GateConfig:
    """Validated user-level gate parameters.

    Attributes
    ----------
    configuration : str
        Laser geometry, ``"single-laser"`` or ``"doppler-free"``.
    rabi_max : float
        Peak Rabi frequency Omega_max/2pi in MHz.
    detuning_start, detuning_end : float
        Detuning sweep endpoints Delta/2pi in MHz.
    gamma : float
        Rydberg population decay rate in 1/us (see module docstring).
    separation : float
        Mean interatomic separation z_bar in um.
    c6 : float
        Dipole-dipole coefficient, C6/2pi in MHz um^vdd_exponent; the
        pair potential is -c6 / z**vdd_exponent (attractive).
    vdd_exponent : int
        Power-law exponent of the pair potential (6 = van der Waals).
    nbar : float
        Mean vibrational quantum number of the initial motional state.
    trap_freq : float
        Trap frequency omega_osc/2pi in MHz, defining the thermal
        momentum spread.  Free calibration knob; the default 0.135 is
        documented in the README.
    wavelength : float
        Rydberg laser wavelength in nm.
    atom_mass : float
        Atomic mass in kg (default 133Cs).
    ramp_time : float
        Adiabatic ramp duration in us (each of the two ramps).
    hold_time : float | str
        Hold duration at full power in us, or ``"auto"`` to calibrate
        the conditional phase to pi.
    quadrature_nodes : int
        Gauss-Hermite nodes per momentum axis (odd, >= 3).
    integrator_tol : float
        Relative local error tolerance of the propagator.
    """

    rabi_max: float
    detuning_start: float
    detuning_end: float
    gamma: float
    separation: float
    ramp_time: float
    configuration: str = DOPPLER_FREE
    c6: float = 1.0e5
    vdd_exponent: int = 6
    nbar: float = 5.0
    trap_freq: float = 0.135
    wavelength: float = 319.0
    atom_mass: float = 2.2069e-25
    hold_time: float | str = "auto"
    ramp_shape: str = "smoothstep"
    nodes: tuple = ()
    max_hold: float = 25.0
    quadrature_nodes: int = 21
    integrator_tol: float = 1e-10
    checkpoints: int = 2000
    optimization: Mapping[str, Any] = field(default_factory=dict)

    def validate(self) -> "GateConfig":
        if self.configuration not in (SINGLE_LASER, DOPPLER_FREE):
            raise InvalidParameterError(
                f"configuration must be '{SINGLE_LASER}' or '{DOPPLER_FREE}', "
                f"got {self.configuration!r}"
            )
        _require(self.rabi_max >= 0, "rabi_max", ">= 0", self.rabi_max)
        _require(self.gamma >= 0, "gamma", ">= 0", self.gamma)
        _require(self.separation > 0, "separation", "> 0", self.separation)
        _require(self.c6 > 0, "c6", "> 0", self.c6)
        _require(self.vdd_exponent >= 1, "vdd_exponent", ">= 1", self.vdd_exponent)
        _require(self.nbar >= 0, "nbar", ">= 0", self.nbar)
        _require(self.trap_freq > 0, "trap_freq", "> 0", self.trap_freq)
        _require(self.ramp_time > 0, "ramp_time", "> 0", self.ramp_time)
        _require(self.wavelength > 0, "wavelength", "> 0", self.wavelength)
        _require(self.atom_mass > 0, "atom_mass", "> 0", self.atom_mass)
        _require(self.integrator_tol > 0, "integrator_tol", "> 0", self.integrator_tol)
        _require(self.max_hold > 0, "max_hold", "> 0", self.max_hold)
        _require(self.checkpoints >= 2, "checkpoints", ">= 2", self.checkpoints)
        nq = self.quadrature_nodes
        _require(
            nq >= 3 and nq % 2 == 1,
            "quadrature_nodes",
            "odd and >= 3 (a zero-momentum node must exist)",
            nq,
        )
        if self.hold_time != "auto":
            _require(
                isinstance(self.hold_time, (int, float)) and self.hold_time >= 0,
                "hold_time",
                ">= 0 or 'auto'",
                self.hold_time,
            )
        if self.ramp_shape not in ("smoothstep", "linear", "piecewise"):
            raise InvalidParameterError(
                f"ramp_shape must be smoothstep, linear, or piecewise, "
                f"got {self.ramp_shape!r}"
            )
        if self.ramp_shape == "piecewise" and len(self.nodes) < 2:
            raise InvalidParameterError(
                "piecewise ramp_shape needs at least 2 nodes"
            )
        return self

    def with_(self, **changes) -> "GateConfig":
        """Return a copy with the given fields replaced, re-validated."""
        return replace(self, **changes).validate()


def _require(cond: bool, name: str, bound: str, value) -> None:
    if not cond:
        raise InvalidParameterError(f"{name} must be {bound}, got {value!r}")


@dataclass(frozen=True)
class DerivedParams:
    """Constants derived from a GateConfig, all in internal units.

    Momenta are dimensionless in units of hbar*k_L; energies and rates in
    rad/us; lengths in um.
    """

    k_l: float                  # laser wavenumber, rad/um
    omega_rec: float            # recoil frequency hbar k^2 / 2m, rad/us
    doppler_per_hbar_k: float   # Doppler shift per hbar k of momentum, rad/us
    delta_p_th: float           # thermal momentum std per atom, hbar k units
    eta: float                  # Lamb-Dicke parameter
    vdd_at_zbar: float          # pair potential at z_bar, rad/us
    vdd_gradient_at_zbar: float  # dV/dz at z_bar, rad/us/um
    reduced_mass: float         # relative-motion mass m/2, kg
    omega_max: float            # peak Rabi, rad/us
    delta_start: float          # rad/us
    delta_end: float            # rad/us
    gamma: float                # decay rate, 1/us
    omega_osc: float            # trap frequency, rad/us
    nbar: float

    def dipole_coherence_factor(self, dp_rel: float) -> float:
        """Coherence reduction from a relative-momentum kick dp_rel (hbar k).

        Equals exp(-(nbar+1/2) dp^2 / (2 M omega_osc)) with M = m/2,
        which in recoil units is exp(-2 (nbar+1/2) eta^2 dp^2).
        """
        return math.exp(-2.0 * (self.nbar + 0.5) * self.eta**2 * dp_rel**2)


def derive(config: GateConfig) -> DerivedParams:
    """Compute internal-unit constants from a validated GateConfig."""
    lam_um = config.wavelength * 1e-3
    k_l = TWO_PI / lam_um
    k_si = TWO_PI / (config.wavelength * 1e-9)
    omega_rec = HBAR_SI * k_si**2 / (2.0 * config.atom_mass) / 1e6  # rad/us
    omega_osc = TWO_PI * config.trap_freq
    delta_p_th = math.sqrt((config.nbar + 0.5) * omega_osc / (2.0 * omega_rec))
    eta = math.sqrt(omega_rec / omega_osc)
    n = config.vdd_exponent
    vdd = -TWO_PI * config.c6 / config.separation**n
    dvdz = n * TWO_PI * config.c6 / config.separation ** (n + 1)
    return DerivedParams(
        k_l=k_l,
        omega_rec=omega_rec,
        doppler_per_hbar_k=2.0 * omega_rec,
        delta_p_th=delta_p_th,
        eta=eta,
        vdd_at_zbar=vdd,
        vdd_gradient_at_zbar=dvdz,
        reduced_mass=config.atom_mass / 2.0,
        omega_max=TWO_PI * config.rabi_max,
        delta_start=TWO_PI * config.detuning_start,
        delta_end=TWO_PI * config.detuning_end,
        gamma=config.gamma,
        omega_osc=omega_osc,
        nbar=config.nbar,
    )


def config_from_mapping(data: Mapping[str, Any]) -> GateConfig:
    """Build a GateConfig from nested section mappings, applying defaults."""
    kwargs: dict[str, Any] = {}
    for section, keys in _SCHEMA.items():
        present = data.get(section, {})
        if not isinstance(present, Mapping):
            raise InvalidParameterError(f"section [{section}] must be a table")
        for key, default in keys.items():
            if key in present:
                kwargs[key] = present[key]
            elif default is None:
                raise MissingParameterError(f"[{section}] {key}")
            else:
                kwargs[key] = default
        for key in present:
            if key not in keys:
                raise InvalidParameterError(f"unknown key '{key}' in [{section}]")
    for section in data:
        if section not in _SCHEMA and section != "optimization":
            raise InvalidParameterError(f"unknown section [{section}]")
    kwargs["nodes"] = tuple(tuple(float(x) for x in node) for node in kwargs["nodes"])
    kwargs["vdd_exponent"] = int(kwargs["vdd_exponent"])
    kwargs["quadrature_nodes"] = int(kwargs["quadrature_nodes"])
    kwargs["checkpoints"] = int(kwargs["checkpoints"])
    kwargs["optimization"] = dict(data.get("optimization", {}))
    return GateConfig(**kwargs).validate()


def load_config(text: str) -> GateConfig:
    """Parse TOML configuration text into a validated GateConfig.

    Raises
    ------
    MissingParameterError
        If a required key is absent.
    InvalidParameterError
        If a value violates its documented bound or a key is unknown.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InvalidParameterError(f"malformed config: {exc}") from exc
    return config_from_mapping(data)


def load_config_file(path) -> GateConfig:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return config_from_mapping(data)


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def dumps_config(config: GateConfig) -> str:
    """Serialize a GateConfig to TOML text; load_config round-trips it."""
    lines = []
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key in keys:
            value = getattr(config, key)
            if key == "nodes":
                value = [list(node) for node in value]
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    if config.optimization:
        lines.append("[optimization]")
        for key, value in config.optimization.items():
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    return "\n".join(lines)


def reference_config(configuration: str = DOPPLER_FREE) -> GateConfig:
    """The headline parameter set used throughout the docs and tests.

    Rabi sweep 0 -> 3 MHz, detuning sweep 6 -> 0 MHz, 1 us ramps,
    z_bar = 5 um (blockade -6.4 MHz), Rydberg decay rate 0.0037/us.
    """
    return GateConfig(
        configuration=configuration,
        rabi_max=3.0,
        detuning_start=6.0,
        detuning_end=0.0,
        gamma=0.0037,
        separation=5.0,
        ramp_time=1.0,
    ).validate()
