"""Operators on the two-spin plus one-mode Hilbert space.

The composite space is C^2 (ion 1) x C^2 (ion 2) x C^N (motional mode).
Composite index is ``(s1 * 2 + s2) * N + n``, so the Fock index varies
fastest.  Spin index 0 is |up>, index 1 is |down>, and sigma_z|up> = +|up>.

All constructors return freshly allocated dense ``complex128`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

UP, DOWN = 0, 1

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# raises |down> to |up>
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
IDENTITY_2 = np.eye(2, dtype=complex)

_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


class StateError(ValueError):
    """A density matrix violates trace, Hermiticity or positivity bounds."""


@dataclass(frozen=True)
class HilbertSpec:
    """Dimensions of the composite space.

    Parameters
    ----------
    fock_dim : int
        Number of retained oscillator levels ``N`` (at least 2).
    spin_count : int
        Fixed at 2.
    """

    fock_dim: int = 30
    spin_count: int = 2

    def __post_init__(self):
        if int(self.fock_dim) != self.fock_dim or self.fock_dim < 2:
            raise ValueError(f"fock_dim must be an integer >= 2, got {self.fock_dim!r}")
        if self.spin_count != 2:
            raise ValueError("only two spins are supported")

    @property
    def dim(self) -> int:
        return 4 * self.fock_dim

    def index(self, s1: int, s2: int, n: int) -> int:
        if s1 not in (0, 1) or s2 not in (0, 1) or not 0 <= n < self.fock_dim:
            raise IndexError((s1, s2, n))
        return (2 * s1 + s2) * self.fock_dim + n

    def unindex(self, i: int) -> tuple[int, int, int]:
        if not 0 <= i < self.dim:
            raise IndexError(i)
        spin, n = divmod(i, self.fock_dim)
        s1, s2 = divmod(spin, 2)
        return s1, s2, n


def embed(spin1, spin2, mode) -> np.ndarray:
    """Kronecker product ``spin1 (x) spin2 (x) mode``."""
    return reduce(np.kron, (spin1, spin2, mode)).astype(complex)


def _on_spin(op2: np.ndarray, ion: int, spec: HilbertSpec) -> np.ndarray:
    eye_n = np.eye(spec.fock_dim, dtype=complex)
    if ion == 1:
        return embed(op2, IDENTITY_2, eye_n)
    if ion == 2:
        return embed(IDENTITY_2, op2, eye_n)
    raise ValueError(f"ion must be 1 or 2, got {ion!r}")


def pauli(axis: str, ion: int, spec: HilbertSpec) -> np.ndarray:
    """Pauli operator ``sigma_axis`` on one ion, identity elsewhere."""
    try:
        op2 = _PAULI[axis]
    except KeyError:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}") from None
    return _on_spin(op2, ion, spec)


def spin_raise(ion: int, spec: HilbertSpec) -> np.ndarray:
    """sigma_+ = |up><down| on one ion."""
    return _on_spin(SIGMA_PLUS, ion, spec)


def lowering_matrix(n: int) -> np.ndarray:
    """Truncated N x N annihilation operator, <k-1|a|k> = sqrt(k)."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def ladder(kind: str, spec: HilbertSpec) -> np.ndarray:
    """Motional ``a`` (kind="lower") or ``a^dagger`` (kind="raise")."""
    a = lowering_matrix(spec.fock_dim)
    if kind == "lower":
        m = a
    elif kind == "raise":
        m = a.conj().T
    else:
        raise ValueError(f"kind must be 'lower' or 'raise', got {kind!r}")
    return embed(IDENTITY_2, IDENTITY_2, m)


def number(spec: HilbertSpec) -> np.ndarray:
    return embed(IDENTITY_2, IDENTITY_2, np.diag(np.arange(spec.fock_dim)).astype(complex))


def _sign(sign) -> int:
    if sign in ("+", 1, +1):
        return 1
    if sign in ("-", -1):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def collective_spin(sign, spec: HilbertSpec) -> np.ndarray:
    """S = sigma_x1 + sigma_x2 (in-phase mode) or sigma_x1 - sigma_x2 (anti-phase)."""
    return pauli("x", 1, spec) + _sign(sign) * pauli("x", 2, spec)


def collective_raise(sign, spec: HilbertSpec) -> np.ndarray:
    """sigma_+1 +/- sigma_+2, the spin part of a single red-sideband drive."""
    return spin_raise(1, spec) + _sign(sign) * spin_raise(2, spec)


def spin_sum(axis: str, spec: HilbertSpec) -> np.ndarray:
    """sigma_axis,1 + sigma_axis,2."""
    return pauli(axis, 1, spec) + pauli(axis, 2, spec)


def qubit_rotation(axis_vector, angle: float) -> np.ndarray:
    """Single-spin rotation cos(angle/2) I - i sin(angle/2) n.sigma (axis normalized)."""
    n = np.asarray(axis_vector, dtype=float)
    norm = np.linalg.norm(n)
    if not norm > 0:
        raise ValueError("rotation axis must be a non-zero vector")
    nx, ny, nz = n / norm
    generator = nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z
    return np.cos(angle / 2) * IDENTITY_2 - 1j * np.sin(angle / 2) * generator


def _axis_vector(axis: str):
    return {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}[axis]


def instantaneous_rotation(axis: str, angle: float, spec: HilbertSpec) -> np.ndarray:
    """Global rotation exp(-i angle/2 (sigma_axis,1 + sigma_axis,2)) of both spins."""
    if axis not in _PAULI:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
    if not np.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    r = qubit_rotation(_axis_vector(axis), angle)
    return embed(r, r, np.eye(spec.fock_dim, dtype=complex))


def phase_rotation(phase: float, angle: float, spec: HilbertSpec) -> np.ndarray:
    """Rotation of both spins about the equatorial axis cos(phase) x + sin(phase) y."""
    if not (np.isfinite(angle) and np.isfinite(phase)):
        raise ValueError("rotation angle and phase must be finite")
    r = qubit_rotation((np.cos(phase), np.sin(phase), 0.0), angle)
    return embed(r, r, np.eye(spec.fock_dim, dtype=complex))


# predicates -------------------------------------------------------------


def max_abs(m) -> float:
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


def is_hermitian(op, tol: float = 1e-12) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and max_abs(op - op.conj().T) <= tol


def is_unitary(op, tol: float = 1e-12) -> bool:
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        return False
    return max_abs(op.conj().T @ op - np.eye(op.shape[0])) <= tol


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


# states -----------------------------------------------------------------


@dataclass(frozen=True)
class State:
    """Density matrix with the operator index layout.

    ``rho`` is stored as a read-only copy.  Use :meth:`check` to assert the
    physical invariants.
    """

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise StateError(f"density matrix must be square, got shape {rho.shape}")
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def violations(self, herm_tol=1e-10, trace_tol=1e-9, pos_tol=1e-8) -> list[str]:
        out = []
        herm = max_abs(self.rho - self.rho.conj().T)
        if herm > herm_tol:
            out.append(f"hermiticity residue {herm:.3e} > {herm_tol:g}")
        tr = np.trace(self.rho)
        if abs(tr - 1) > trace_tol:
            out.append(f"trace {tr.real:.12f}{tr.imag:+.2e}j deviates from 1 by more than {trace_tol:g}")
        lo = float(np.linalg.eigvalsh((self.rho + self.rho.conj().T) / 2)[0])
        if lo < -pos_tol:
            out.append(f"minimum eigenvalue {lo:.3e} < -{pos_tol:g}")
        return out

    def check(self, herm_tol=1e-10, trace_tol=1e-9, pos_tol=1e-8) -> "State":
        bad = self.violations(herm_tol, trace_tol, pos_tol)
        if bad:
            raise StateError("; ".join(bad))
        return self

    def expect(self, op) -> complex:
        return complex(np.trace(self.rho @ op))

    @classmethod
    def from_ket(cls, psi) -> "State":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


def fock_populations(state: State, spec: HilbertSpec) -> np.ndarray:
    """Occupation probability of each Fock level (spins traced out)."""
    r = state.rho.reshape(4, spec.fock_dim, 4, spec.fock_dim)
    return np.real(np.einsum("inin->n", r))


def spin_state(rho: np.ndarray, spec: HilbertSpec) -> np.ndarray:
    """4 x 4 reduced spin density matrix (motion traced out)."""
    n = spec.fock_dim
    return np.einsum("injn->ij", np.asarray(rho).reshape(4, n, 4, n))


def basis_state(s1: int, s2: int, n: int, spec: HilbertSpec) -> State:
    psi = np.zeros(spec.dim, dtype=complex)
    psi[spec.index(s1, s2, n)] = 1.0
    return State.from_ket(psi)


def thermal_occupations(nbar: float, fock_dim: int, max_loss: float = 1e-6) -> np.ndarray:
    """Thermal (geometric) Fock distribution truncated to ``fock_dim`` levels.

    Raises ValueError if the probability discarded by truncation exceeds
    ``max_loss``.
    """
    if nbar < 0:
        raise ValueError("mean occupation must be non-negative")
    p = np.zeros(fock_dim)
    if nbar == 0:
        p[0] = 1.0
        return p
    k = np.arange(fock_dim)
    p = (nbar / (1 + nbar)) ** k / (1 + nbar)
    loss = 1.0 - p.sum()
    if loss > max_loss:
        raise ValueError(
            f"thermal state with nbar={nbar} loses {loss:.2e} probability "
            f"when truncated to {fock_dim} Fock levels (limit {max_loss:g})"
        )
    return p / p.sum()


def product_state(s1: int, s2: int, spec: HilbertSpec, nbar: float = 0.0) -> State:
    """|s1 s2><s1 s2| (x) thermal motional state with mean occupation ``nbar``."""
    p = thermal_occupations(nbar, spec.fock_dim)
    spin = np.zeros((4, 4), dtype=complex)
    spin[2 * s1 + s2, 2 * s1 + s2] = 1.0
    return State(np.kron(spin, np.diag(p).astype(complex)))


def bell_ket(theta: float) -> np.ndarray:
    """(|up up> + e^{i theta} |down down>)/sqrt(2) on the 4-dim spin space."""
    v = np.zeros(4, dtype=complex)
    v[0] = 1.0
    v[3] = np.exp(1j * theta)
    return v / np.sqrt(2)
