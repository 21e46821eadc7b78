"""Observables and figures of merit for the two-spin output state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .operators import State, qubit_rotation

_PARITY = np.array([1.0, -1.0, -1.0, 1.0])


def spin_density(state) -> np.ndarray:
    """Reduced 4 x 4 spin density matrix of a State or raw matrix."""
    rho = state.rho if isinstance(state, State) else np.asarray(state, dtype=complex)
    d = rho.shape[0]
    if d == 4:
        return rho
    if d % 4:
        raise ValueError(f"dimension {d} is not 4 * fock_dim")
    n = d // 4
    return np.einsum("injn->ij", rho.reshape(4, n, 4, n))


@dataclass(frozen=True)
class PopulationSummary:
    p_uu: float
    p_ud: float
    p_du: float
    p_dd: float

    def __post_init__(self):
        p = self.as_array()
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValueError(f"populations must lie in [0, 1], got {p}")
        if abs(p.sum() - 1) > 1e-9:
            raise ValueError(f"populations must sum to 1, got {p.sum():.12f}")

    @classmethod
    def from_array(cls, p) -> "PopulationSummary":
        return cls(*(float(x) for x in p))

    def as_array(self) -> np.ndarray:
        return np.array([self.p_uu, self.p_ud, self.p_du, self.p_dd])

    @property
    def even(self) -> float:
        return self.p_uu + self.p_dd

    @property
    def parity(self) -> float:
        return float(self.as_array() @ _PARITY)

    def by_excitation(self) -> tuple:
        """(P2, P1, P0): probability of two, one and zero spins up."""
        return self.p_uu, self.p_ud + self.p_du, self.p_dd


def populations(state) -> PopulationSummary:
    """Spin populations with the motion traced out."""
    p = np.real(np.diagonal(spin_density(state)))
    p = np.clip(p, 0.0, 1.0)
    return PopulationSummary.from_array(p / p.sum())


def analysis_rotation(phase: float, angle: float = np.pi / 2) -> np.ndarray:
    r = qubit_rotation((np.cos(phase), np.sin(phase), 0.0), angle)
    return np.kron(r, r)


def parity_after_pulse(state, phase: float) -> float:
    """Parity after a pi/2 pulse about ``cos(phase) x + sin(phase) y`` on both spins."""
    u = analysis_rotation(phase)
    r = u @ spin_density(state) @ u.conj().T
    return float(np.real(np.diagonal(r)) @ _PARITY)


@dataclass(frozen=True)
class ParityScan:
    phases: tuple
    parities: tuple
    fitted_amplitude: float
    fitted_phase_offset: float
    fitted_background: float = 0.0

    def model(self, phases) -> np.ndarray:
        phases = np.asarray(phases, dtype=float)
        return self.fitted_amplitude * np.sin(2 * phases + self.fitted_phase_offset) + self.fitted_background


def fit_parity(phases, parities, phase_offset: Optional[float] = None):
    """Least-squares fit of ``A sin(2 phi + phi0) + c``.

    Returns ``(A, phi0, c)`` with ``A >= 0`` when the offset floats.  With a
    fixed ``phase_offset`` only ``A`` (signed) and ``c`` are fitted.
    """
    phi = np.asarray(phases, dtype=float)
    y = np.asarray(parities, dtype=float)
    if phi.size < 4:
        raise ValueError(f"parity fit needs at least 4 phase points, got {phi.size}")
    if phase_offset is None:
        design = np.column_stack([np.sin(2 * phi), np.cos(2 * phi), np.ones_like(phi)])
        (b_sin, b_cos, c), *_ = np.linalg.lstsq(design, y, rcond=None)
        amp = float(np.hypot(b_sin, b_cos))
        offset = float(np.arctan2(b_cos, b_sin)) if amp > 0 else 0.0
        return amp, offset, float(c)
    design = np.column_stack([np.sin(2 * phi + phase_offset), np.ones_like(phi)])
    (amp, c), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(amp), float(phase_offset), float(c)


def parity_scan(state, phases: Sequence[float], phase_offset: Optional[float] = None) -> ParityScan:
    """Noiseless parity versus analysis-pulse phase, with a sinusoidal fit."""
    phases = tuple(float(p) for p in phases)
    parities = tuple(parity_after_pulse(state, p) for p in phases)
    amp, off, c = fit_parity(phases, parities, phase_offset)
    return ParityScan(phases, parities, amp, off, c)


def sample_parity_counts(state, phases, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Binomial number of even-parity outcomes at each phase."""
    p_even = [(1 + parity_after_pulse(state, p)) / 2 for p in phases]
    return rng.binomial(shots, np.clip(p_even, 0.0, 1.0))


def fit_parity_ml(phases, even_counts, shots, phase_offset: Optional[float] = None) -> ParityScan:
    """Maximum-likelihood fit to finite-shot parity data assuming binomial counts."""
    from scipy.optimize import minimize

    phi = np.asarray(phases, dtype=float)
    k = np.asarray(even_counts, dtype=float)
    n = np.broadcast_to(np.asarray(shots, dtype=float), k.shape)
    observed = 2 * k / n - 1
    amp0, off0, c0 = fit_parity(phi, observed, phase_offset)
    eps = 1e-12

    def unpack(x):
        if phase_offset is None:
            return x[0], x[1], x[2]
        return x[0], phase_offset, x[1]

    def nll(x):
        a, off, c = unpack(x)
        p = np.clip((1 + a * np.sin(2 * phi + off) + c) / 2, eps, 1 - eps)
        return -np.sum(k * np.log(p) + (n - k) * np.log1p(-p))

    x0 = [amp0, off0, c0] if phase_offset is None else [amp0, c0]
    res = minimize(nll, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
    a, off, c = unpack(res.x)
    if phase_offset is None and a < 0:
        a, off = -a, off + np.pi
    if phase_offset is None:
        off = float(np.angle(np.exp(1j * off)))
    return ParityScan(tuple(phi), tuple(observed), float(a), float(off), float(c))


@dataclass(frozen=True)
class FidelityReport:
    population_term: float
    parity_amplitude: float
    fidelity: float
    spam_per_qubit: float = 0.0


def bell_fidelity(pops: PopulationSummary, parity_amplitude: float, spam_per_qubit: float = 0.0) -> FidelityReport:
    """Tomographic Bell fidelity (P_uu + P_dd)/2 + A/2."""
    even = pops.even if isinstance(pops, PopulationSummary) else float(pops)
    if not 0 <= even <= 1 + 1e-12:
        raise ValueError("even-parity population must be in [0, 1]")
    if not -1 - 1e-9 <= parity_amplitude <= 1 + 1e-9:
        raise ValueError("parity amplitude must be in [-1, 1]")
    f = even / 2 + parity_amplitude / 2
    return FidelityReport(even, parity_amplitude, float(f), spam_per_qubit)


def bell_phase(state) -> float:
    """Phase theta maximizing overlap with (|uu> + e^{i theta}|dd>)/sqrt(2)."""
    r = spin_density(state)
    return float(np.angle(r[3, 0]))


def direct_fidelity(state, bell_phase="optimize") -> float:
    """<Psi(theta)| rho_spin |Psi(theta)>, theta fixed or maximized."""
    r = spin_density(state)
    even = np.real(r[0, 0] + r[3, 3])
    if isinstance(bell_phase, str):
        if bell_phase != "optimize":
            raise ValueError("bell_phase must be a number or 'optimize'")
        return float(even / 2 + abs(r[0, 3]))
    return float(even / 2 + np.real(np.exp(1j * bell_phase) * r[0, 3]))


# SPAM ----------------------------------------------------------------


def confusion_matrix(eps: float) -> np.ndarray:
    """4 x 4 symmetric independent misassignment channel, columns = true state."""
    if not 0 <= eps <= 0.5:
        raise ValueError(f"misassignment probability must be in [0, 0.5), got {eps}")
    if eps == 0.5:
        raise ValueError("confusion matrix is singular at eps = 0.5")
    m1 = np.array([[1 - eps, eps], [eps, 1 - eps]])
    return np.kron(m1, m1)


def spam_corrupt(pops: PopulationSummary, eps: float) -> PopulationSummary:
    return PopulationSummary.from_array(confusion_matrix(eps) @ pops.as_array())


def spam_correct(raw: PopulationSummary, eps: float) -> PopulationSummary:
    """Invert the misassignment channel, clamp to [0, 1] and renormalize."""
    p = np.linalg.solve(confusion_matrix(eps), raw.as_array())
    p = np.clip(p, 0.0, 1.0)
    return PopulationSummary.from_array(p / p.sum())
