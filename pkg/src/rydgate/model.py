"""Electronic bases and non-Hermitian Hamiltonian builders.

Two laser geometries are supported.  With a single driving laser the
two-atom electronic space is spanned by {|00>, |B>, |D>, |rr>}, where
|B> = (|r0> + |0r>)/sqrt(2) and |D> = (|r0> - |0r>)/sqrt(2).  In the
counterpropagating sigma+/sigma- geometry each atom carries two Rydberg
sublevels r+/r-, giving the nine-state two-atom basis
{|00>, |B+>, |D+>, |B->, |D->, |r+r+>, |r+r->, |r-r+>, |r-r->}.

All matrices are decomposed as

    H(Omega, Delta, P, p) = Omega*C - Delta*N + diag(V)
                            + omega_rec*P*A_P + 2*omega_rec*p*A_p
                            - i*(gamma/2)*N

with constant component matrices cached per configuration: C the laser
coupling pattern, N the Rydberg excitation number, V the pair-potential
diagonal, and A_P/A_p the center-of-mass and relative-momentum Doppler
patterns.  Momenta are in hbar*k_L units.

The decay term uses the population decay rate gamma of one Rydberg
excitation: doubly excited states decay twice as fast, and the
anti-Hermitian part is always -i*(gamma/2) times the excitation number.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import DOPPLER_FREE, SINGLE_LASER, GateConfig, derive
from .errors import InvalidSeparationError, ModelMismatchError

SQRT2 = np.sqrt(2.0)

TWO_ATOM_LABELS = {
    SINGLE_LASER: ("00", "B", "D", "rr"),
    DOPPLER_FREE: ("00", "B+", "D+", "B-", "D-", "r+r+", "r+r-", "r-r+", "r-r-"),
}
SINGLE_ATOM_LABELS = {
    SINGLE_LASER: ("0", "r"),
    DOPPLER_FREE: ("0", "r+", "r-"),
}


@dataclass(frozen=True)
class ElectronicBasis:
    """Ordered electronic basis with per-state Rydberg excitation counts."""

    configuration: str
    labels: tuple
    n_excitations: tuple
    two_atom: bool

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)


@lru_cache(maxsize=None)
def two_atom_basis(configuration: str) -> ElectronicBasis:
    labels = TWO_ATOM_LABELS[configuration]
    # bright/dark states carry one shared excitation, |r r> states two
    nexc = tuple(1 if label[0] in "BD" else label.count("r") for label in labels)
    return ElectronicBasis(configuration, labels, nexc, True)


@lru_cache(maxsize=None)
def single_atom_basis(configuration: str) -> ElectronicBasis:
    labels = SINGLE_ATOM_LABELS[configuration]
    nexc = tuple(0 if label == "0" else 1 for label in labels)
    return ElectronicBasis(configuration, labels, nexc, False)


@dataclass(frozen=True)
class HamiltonianMatrix:
    """A concrete (generally non-Hermitian) matrix with its build metadata."""

    matrix: np.ndarray
    basis: ElectronicBasis
    omega: float
    delta: float
    p_cm: float
    p_rel: float
    gamma: float


@dataclass(frozen=True)
class HamiltonianComponents:
    """Constant component matrices; see the module docstring for the sum."""

    basis: ElectronicBasis
    coupling: np.ndarray    # multiplies Omega
    nexc: np.ndarray        # excitation-number diagonal (vector)
    vdiag: np.ndarray       # static pair-potential diagonal (vector)
    doppler_cm: np.ndarray  # multiplies omega_rec * P_cm
    doppler_rel: np.ndarray  # multiplies 2 * omega_rec * p_rel
    omega_rec: float
    gamma: float

    def assemble(self, omega: float, delta: float, p_cm: float = 0.0,
                 p_rel: float = 0.0, gamma: float | None = None) -> np.ndarray:
        g = self.gamma if gamma is None else gamma
        h = omega * self.coupling
        diag = self.vdiag - (delta + 0.5j * g) * self.nexc
        h = h + np.diag(diag)
        if p_cm != 0.0:
            h = h + (self.omega_rec * p_cm) * self.doppler_cm
        if p_rel != 0.0:
            h = h + (2.0 * self.omega_rec * p_rel) * self.doppler_rel
        return h


def dipole_potential(config: GateConfig, z: float) -> float:
    """Pair potential -C6/z^n at separation z (um), in rad/us."""
    if z <= 0:
        raise InvalidSeparationError(f"separation must be positive, got {z}")
    return _vdd(config, z)


def _vdd(config: GateConfig, z: float) -> float:
    n = config.vdd_exponent
    return -2.0 * np.pi * config.c6 / z**n


def dipole_gradient(config: GateConfig, z: float) -> float:
    """Derivative of the pair potential at z (um), in rad/us/um."""
    if z <= 0:
        raise InvalidSeparationError(f"separation must be positive, got {z}")
    n = config.vdd_exponent
    return n * 2.0 * np.pi * config.c6 / z ** (n + 1)


def _vdd_pair_diag(config: GateConfig, overrides=None) -> dict:
    """Pair potentials per doubly-excited state, all equal by default."""
    v = _vdd(config, config.separation)
    pairs = {"r+r+": v, "r+r-": v, "r-r+": v, "r-r-": v, "rr": v}
    if overrides:
        pairs.update(overrides)
    return pairs


def two_atom_components(config: GateConfig, vdd_overrides=None) -> HamiltonianComponents:
    """Cached-style constant matrices for the two-atom Hamiltonian."""
    basis = two_atom_basis(config.configuration)
    d = derive(config)
    dim = basis.dim
    idx = basis.index
    pairs = _vdd_pair_diag(config, vdd_overrides)
    coupling = np.zeros((dim, dim))
    vdiag = np.zeros(dim)
    dop_cm = np.zeros((dim, dim))
    dop_rel = np.zeros((dim, dim))
    if config.configuration == SINGLE_LASER:
        b, dk, rr = idx("B"), idx("D"), idx("rr")
        coupling[0, b] = coupling[b, 0] = SQRT2 / 2.0
        coupling[b, rr] = coupling[rr, b] = SQRT2 / 2.0
        vdiag[rr] = pairs["rr"]
        # V_Dop: diagonal in P_cm, bright-dark coupling in p_rel
        np.fill_diagonal(dop_cm, basis.n_excitations)
        dop_rel[b, dk] = dop_rel[dk, b] = -1.0
    else:
        bp, dp = idx("B+"), idx("D+")
        bm, dm = idx("B-"), idx("D-")
        pp, pm, mp, mm = idx("r+r+"), idx("r+r-"), idx("r-r+"), idx("r-r-")
        coupling[0, bp] = coupling[bp, 0] = SQRT2 / 2.0
        coupling[bp, pp] = coupling[pp, bp] = SQRT2 / 2.0
        # the minus manifold couples among itself with strength Omega/2
        for j, s in ((mp, 0.5), (pm, 0.5)):
            coupling[j, bm] = coupling[bm, j] = s
        coupling[mp, dm] = coupling[dm, mp] = 0.5
        coupling[pm, dm] = coupling[dm, pm] = -0.5
        for label, j in (("r+r+", pp), ("r+r-", pm), ("r-r+", mp), ("r-r-", mm)):
            vdiag[j] = pairs[label]
        # sigma_x (r+ <-> r-) summed and differenced over the two atoms,
        # expressed in the collective basis
        dop_cm[bp, bm] = dop_cm[bm, bp] = 1.0
        dop_cm[dp, dm] = dop_cm[dm, dp] = 1.0
        for a, b2 in ((pp, mp), (pp, pm), (mm, pm), (mm, mp)):
            dop_cm[a, b2] = dop_cm[b2, a] = 1.0
        dop_rel[bp, dm] = dop_rel[dm, bp] = 1.0
        dop_rel[dp, bm] = dop_rel[bm, dp] = 1.0
        dop_rel[mp, pp] = dop_rel[pp, mp] = 1.0
        dop_rel[pm, pp] = dop_rel[pp, pm] = -1.0
        dop_rel[mm, pm] = dop_rel[pm, mm] = 1.0
        dop_rel[mm, mp] = dop_rel[mp, mm] = -1.0
    return HamiltonianComponents(
        basis=basis,
        coupling=coupling,
        nexc=np.asarray(basis.n_excitations, dtype=float),
        vdiag=vdiag,
        doppler_cm=dop_cm,
        doppler_rel=dop_rel,
        omega_rec=d.omega_rec,
        gamma=d.gamma,
    )


def single_atom_components(config: GateConfig) -> HamiltonianComponents:
    """Constant matrices for the comoving-frame single-atom Hamiltonian."""
    basis = single_atom_basis(config.configuration)
    d = derive(config)
    dim = basis.dim
    coupling = np.zeros((dim, dim))
    dop = np.zeros((dim, dim))
    if config.configuration == SINGLE_LASER:
        coupling[0, 1] = coupling[1, 0] = 0.5
        # Doppler shift k_L p / m enters the Rydberg diagonal with +2*omega_rec*p
        dop[1, 1] = 1.0
    else:
        rp, rm = basis.index("r+"), basis.index("r-")
        coupling[0, rp] = coupling[rp, 0] = 0.5
        dop[rp, rm] = dop[rm, rp] = 1.0
    return HamiltonianComponents(
        basis=basis,
        coupling=coupling,
        nexc=np.asarray(basis.n_excitations, dtype=float),
        vdiag=np.zeros(dim),
        doppler_cm=np.zeros((dim, dim)),
        doppler_rel=dop,
        omega_rec=d.omega_rec,
        gamma=d.gamma,
    )


def build_two_atom(config: GateConfig, omega: float, delta: float,
                   p_cm: float = 0.0, p_rel: float = 0.0,
                   gamma: float | None = None,
                   basis: ElectronicBasis | None = None) -> HamiltonianMatrix:
    """Two-atom Hamiltonian at given laser parameters and momenta.

    Parameters
    ----------
    omega, delta : float
        Instantaneous Rabi frequency and detuning, rad/us.
    p_cm, p_rel : float
        Center-of-mass (p_a + p_b) and relative ((p_b - p_a)/2) momenta
        in hbar*k_L units.
    gamma : float, optional
        Override of the config decay rate (1/us).
    """
    if basis is not None and (basis.configuration != config.configuration
                              or not basis.two_atom):
        raise ModelMismatchError(
            f"basis {basis.configuration!r} does not match config "
            f"{config.configuration!r}"
        )
    comp = two_atom_components(config)
    g = comp.gamma if gamma is None else gamma
    h = comp.assemble(omega, delta, p_cm, p_rel, g)
    return HamiltonianMatrix(h, comp.basis, omega, delta, p_cm, p_rel, g)


def build_single_atom(config: GateConfig, omega: float, delta: float,
                      p: float = 0.0, gamma: float | None = None,
                      basis: ElectronicBasis | None = None) -> HamiltonianMatrix:
    """Single-atom comoving-frame Hamiltonian at momentum p (hbar*k_L)."""
    if basis is not None and (basis.configuration != config.configuration
                              or basis.two_atom):
        raise ModelMismatchError(
            f"basis {basis.configuration!r} does not match config "
            f"{config.configuration!r}"
        )
    comp = single_atom_components(config)
    g = comp.gamma if gamma is None else gamma
    h = comp.assemble(omega, delta, 0.0, p, g)
    return HamiltonianMatrix(h, comp.basis, omega, delta, 0.0, p, g)


def restricted_blockade_components(config: GateConfig) -> HamiltonianComponents:
    """The 3x3 {ground, bright, double} block shared by both geometries.

    At zero momenta the Doppler-free Hamiltonian restricted to
    {|00>, |B+>, |r+r+>} coincides with the single-laser {|00>, |B>, |rr>}
    block; this is the frozen-atom model used for dressing analysis.
    """
    d = derive(config)
    coupling = np.zeros((3, 3))
    coupling[0, 1] = coupling[1, 0] = SQRT2 / 2.0
    coupling[1, 2] = coupling[2, 1] = SQRT2 / 2.0
    vdiag = np.array([0.0, 0.0, _vdd(config, config.separation)])
    basis = ElectronicBasis(config.configuration, ("00", "B", "rr"), (0, 1, 2), True)
    return HamiltonianComponents(
        basis=basis,
        coupling=coupling,
        nexc=np.array([0.0, 1.0, 2.0]),
        vdiag=vdiag,
        doppler_cm=np.zeros((3, 3)),
        doppler_rel=np.zeros((3, 3)),
        omega_rec=d.omega_rec,
        gamma=d.gamma,
    )


def doppler_parity(basis: ElectronicBasis) -> np.ndarray:
    """Diagonal sign flip of every |r-> factor.

    In the Doppler-free bases this similarity transform leaves the frozen
    Hamiltonian invariant and negates both Doppler patterns, so
    H(-P, -p) = S H(P, p) S.
    """
    signs = []
    for label in basis.labels:
        flips = label.count("-")
        signs.append(-1.0 if flips % 2 else 1.0)
    return np.diag(signs)
