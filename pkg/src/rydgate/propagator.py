"""Time-dependent (non-Hermitian) Schrodinger propagation.

The integrator is SciPy's adaptive DOP853 embedded Runge-Kutta scheme.
Running integrals needed by the gate analysis (time-integrated bright and
double-excitation populations and the dipole-force kick integral) are
accumulated as extra quadrature variables inside the same ODE system, so
they inherit the stepper's order instead of relying on checkpoint
quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StiffFailureError


@dataclass(frozen=True)
class IntegralWeights:
    """Diagonal weights for the running integrals of a Trajectory.

    ``single`` and ``double`` select the singly and doubly excited basis
    states; ``kick`` is the per-state pair-potential gradient (rad/us/um)
    carried by each doubly excited state.
    """

    single: np.ndarray
    double: np.ndarray
    kick: np.ndarray

    @classmethod
    def from_components(cls, components, gradient: float) -> "IntegralWeights":
        nexc = components.nexc
        single = (nexc == 1).astype(float)
        double = (nexc == 2).astype(float)
        return cls(single=single, double=double, kick=double * gradient)


@dataclass(frozen=True)
class Trajectory:
    """Propagated amplitudes at checkpoints plus running integrals.

    Attributes
    ----------
    times : ndarray, shape (n,)
        Checkpoint times in us.
    states : ndarray, shape (n, dim)
        Complex amplitude vectors at the checkpoints.
    bright_integral, double_integral : ndarray, shape (n,)
        Running integrals of the single- and double-excitation
        populations, in us.
    kick_integral : ndarray, shape (n,)
        Running integral of (double-excitation population) * dV/dz,
        in rad/um; dividing by k_L gives the momentum kick in hbar*k_L.
    """

    times: np.ndarray
    states: np.ndarray
    bright_integral: np.ndarray
    double_integral: np.ndarray
    kick_integral: np.ndarray

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_norm2(self) -> float:
        return float(np.sum(np.abs(self.states[-1]) ** 2))

    def excitation_time(self) -> float:
        """Integral of the Rydberg excitation number, int (n_B + 2 n_rr) dt."""
        return float(self.bright_integral[-1] + 2.0 * self.double_integral[-1])

    def gamma_t(self, gamma: float) -> float:
        """Accumulated scattering exponent gamma*T for decay rate gamma."""
        return gamma * self.excitation_time()


def propagate(hamiltonian_at: Callable[[float], np.ndarray],
              psi0: np.ndarray,
              duration: float,
              tol: float = 1e-10,
              weights: IntegralWeights | None = None,
              checkpoints: int = 2000) -> Trajectory:
    """Integrate i dpsi/dt = H(t) psi over [0, duration].

    Parameters
    ----------
    hamiltonian_at : callable
        Maps a time in [0, duration] to the (dim, dim) complex matrix
        (a bare ndarray or anything with a ``.matrix`` attribute).
    psi0 : array
        Normalized initial amplitudes.
    duration : float
        Total integration time, us.
    tol : float
        Relative local error tolerance per unit time.
    weights : IntegralWeights, optional
        Enables the running integrals; zero weights are used if omitted.
    checkpoints : int
        Number of equally spaced output times (>= 2).

    Raises
    ------
    StiffFailureError
        If the adaptive stepper underflows its minimum step size.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    dim = psi0.shape[0]
    h0 = hamiltonian_at(0.0)
    if hasattr(h0, "matrix"):
        raw = hamiltonian_at
        hamiltonian_at = lambda t: raw(t).matrix  # noqa: E731

    if weights is None:
        w_single = np.zeros(dim)
        w_double = np.zeros(dim)
        w_kick = np.zeros(dim)
    else:
        w_single, w_double, w_kick = weights.single, weights.double, weights.kick

    def rhs(t, y):
        psi = y[:dim]
        dpsi = -1j * (hamiltonian_at(t) @ psi)
        pops = np.abs(psi) ** 2
        # populations normalized to the surviving norm: these are the
        # dressed-state coefficients, and they make the norm identity
        # |psi(T)|^2 = exp(-gamma * int <n> dt) exact under decay
        total = max(pops.sum(), 1e-300)
        pops = pops / total
        return np.concatenate(
            [dpsi, [pops @ w_single, pops @ w_double, pops @ w_kick]]
        )

    y0 = np.concatenate([psi0, np.zeros(3, dtype=complex)])
    times = np.linspace(0.0, duration, max(int(checkpoints), 2))
    sol = solve_ivp(
        rhs, (0.0, duration), y0, method="DOP853",
        rtol=tol, atol=tol * 1e-2, t_eval=times, dense_output=False,
    )
    if not sol.success:
        t_fail = float(sol.t[-1]) if sol.t.size else 0.0
        raise StiffFailureError(
            f"integrator failed at t = {t_fail:.6g} us: {sol.message}", time=t_fail
        )
    states = sol.y[:dim].T.copy()
    return Trajectory(
        times=sol.t,
        states=states,
        bright_integral=sol.y[dim].real.copy(),
        double_integral=sol.y[dim + 1].real.copy(),
        kick_integral=sol.y[dim + 2].real.copy(),
    )


def propagate_batch(base_at: Callable[[float], np.ndarray],
                    doppler_cm: np.ndarray,
                    doppler_rel: np.ndarray,
                    coeff_cm: np.ndarray,
                    coeff_rel: np.ndarray,
                    psi0: np.ndarray,
                    duration: float,
                    tol: float = 1e-10) -> np.ndarray:
    """Propagate many momentum nodes of the same schedule in one ODE solve.

    The per-node Hamiltonian is base_at(t) + coeff_cm[k]*doppler_cm +
    coeff_rel[k]*doppler_rel.  Sharing the stepper across nodes amortizes
    its overhead; the joint error control keeps every node within the same
    tolerance budget because all nodes share the time scales of base_at.

    Parameters
    ----------
    base_at : callable
        t -> (dim, dim) momentum-independent part (includes decay).
    coeff_cm, coeff_rel : ndarray, shape (n_nodes,)
        Premultiplied momentum coefficients (omega_rec*P and
        2*omega_rec*p) per node.
    psi0 : ndarray, shape (dim,)
        Common initial state.

    Returns
    -------
    ndarray, shape (n_nodes, dim)
        Final amplitudes per node.
    """
    n = coeff_cm.shape[0]
    dim = psi0.shape[0]
    dct = np.ascontiguousarray(doppler_cm.T, dtype=complex)
    drt = np.ascontiguousarray(doppler_rel.T, dtype=complex)
    ccm = coeff_cm[:, None]
    crel = coeff_rel[:, None]

    def rhs(t, y):
        psi = y.reshape(n, dim)
        out = psi @ base_at(t).T
        out += ccm * (psi @ dct)
        out += crel * (psi @ drt)
        return (-1j * out).ravel()

    y0 = np.tile(np.asarray(psi0, dtype=complex), n)
    sol = solve_ivp(rhs, (0.0, duration), y0, method="DOP853",
                    rtol=tol, atol=tol * 1e-2)
    if not sol.success:
        t_fail = float(sol.t[-1]) if sol.t.size else 0.0
        raise StiffFailureError(
            f"batch integrator failed at t = {t_fail:.6g} us: {sol.message}",
            time=t_fail,
        )
    return sol.y[:, -1].reshape(n, dim)
