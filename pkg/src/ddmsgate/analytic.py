"""Closed-form Molmer-Sorensen dynamics from the motional ground state.

For H = (Omega/2) S (a e^{i delta t} + a^+ e^{-i delta t}) the propagator is
exactly exp(-i Phi(t) S^2) D(alpha(t) S) with

    alpha(t) = -(Omega/2) (1 - e^{-i delta t}) / delta
    Phi(t)   = (Omega/2)^2 (t/delta - sin(delta t)/delta^2)

Everything here is built from explicit sigma_x eigenvectors so that it
stays independent of the numerical operator and integrator code.
"""

from __future__ import annotations

import numpy as np

# |up> = (1, 0), |down> = (0, 1)
_X_EIGEN = {+1: np.array([1.0, 1.0]) / np.sqrt(2), -1: np.array([1.0, -1.0]) / np.sqrt(2)}


def displacement(t, omega: float, delta: float) -> complex:
    """Coherent amplitude per unit collective-spin eigenvalue."""
    return -(omega / 2) * (1 - np.exp(-1j * delta * t)) / delta


def geometric_phase(t, omega: float, delta: float) -> float:
    """Phase per unit S^2."""
    return (omega / 2) ** 2 * (t / delta - np.sin(delta * t) / delta**2)


def _coherent_overlap(beta: complex, alpha: complex) -> complex:
    """<beta|alpha> for coherent states."""
    return np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2 + np.conj(beta) * alpha)


def ms_spin_state(t: float, omega: float, delta: float, sign: str = "-", initial=None) -> np.ndarray:
    """Reduced spin density matrix at time ``t`` (basis uu, ud, du, dd).

    ``initial`` is a 4-component spin ket, default |down down>.
    """
    sgn = 1 if sign == "+" else -1
    psi0 = np.array([0, 0, 0, 1], dtype=complex) if initial is None else np.asarray(initial, dtype=complex)
    labels = [(x1, x2) for x1 in (1, -1) for x2 in (1, -1)]
    vecs = [np.kron(_X_EIGEN[x1], _X_EIGEN[x2]) for x1, x2 in labels]
    s_vals = [x1 + sgn * x2 for x1, x2 in labels]
    amps = [v @ psi0 for v in vecs]
    a_unit = displacement(t, omega, delta)
    phi = geometric_phase(t, omega, delta)
    rho = np.zeros((4, 4), dtype=complex)
    for va, sa, ca in zip(vecs, s_vals, amps):
        for vb, sb, cb in zip(vecs, s_vals, amps):
            w = ca * np.conj(cb) * np.exp(-1j * phi * (sa**2 - sb**2))
            w *= _coherent_overlap(sb * a_unit, sa * a_unit)
            rho += w * np.outer(va, vb)
    return rho


def ms_populations(t, omega, delta, sign="-") -> np.ndarray:
    """Populations (uu, ud, du, dd) at each time in ``t``."""
    t = np.atleast_1d(t)
    return np.array([np.real(np.diagonal(ms_spin_state(x, omega, delta, sign))) for x in t])


def maximally_entangling_detuning(omega: float, loops: int) -> float:
    """delta at which K loops give a maximally entangling gate: 2 Omega sqrt(K)."""
    return 2 * omega * np.sqrt(loops)
