"""Time evolution of density matrices under compiled schedules.

Integrates drho/dt = -i[H(t), rho] + sum_k rate_k (L rho L^+ - 1/2 {L^+ L, rho})
segment by segment with fixed-step classic Runge-Kutta (or an adaptive
Dormand-Prince cross-check), applying boundary pulses as rho -> U rho U^+.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import operators as ops
from .model import GateConfig, Pulse, Schedule, Segment, compile_gate, total_time

log = logging.getLogger(__name__)


class IntegrationError(RuntimeError):
    """The integrator could not advance (step-size underflow or non-finite state)."""


class TruncationError(RuntimeError):
    """The top Fock levels became populated: the truncated mode is inadequate."""

    def __init__(self, time: float, occupancy: float, fock_dim: int, limit: float):
        self.time = time
        self.occupancy = occupancy
        super().__init__(
            f"Fock truncation breached at t = {time:.6e} s: top two of {fock_dim} levels "
            f"hold {occupancy:.3e} > {limit:g}; increase fock_dim"
        )


@dataclass
class HamiltonianTerm:
    """``base_operator`` times ``amplitude * exp(1j*frequency*t) * envelope``."""

    base_operator: np.ndarray
    amplitude: complex
    frequency: float = 0.0
    envelope: Optional[Callable] = None  # local time -> profile
    label: str = ""

    def coefficient(self, t: float, t_local: float = 0.0) -> complex:
        c = self.amplitude * np.exp(1j * self.frequency * t) if self.frequency else self.amplitude
        if self.envelope is not None:
            c = c * float(self.envelope(t_local))
        return complex(c)

    @property
    def is_constant(self) -> bool:
        return self.frequency == 0 and self.envelope is None


@dataclass
class Dissipator:
    jump_operator: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("dissipator rate must be >= 0")


def _gate_operator(name: str, spec: ops.HilbertSpec, sign: str) -> np.ndarray:
    a = ops.ladder("lower", spec)
    ad = ops.ladder("raise", spec)
    if name in ("S_a", "S_adag"):
        s = ops.collective_spin(sign, spec)
        return s @ (a if name == "S_a" else ad)
    if name in ("Sp_a", "Sp_adag", "Sm_a", "Sm_adag"):
        sp = ops.collective_raise(sign, spec)
        spin = sp if name.startswith("Sp") else sp.conj().T
        return spin @ (a if name.endswith("_a") else ad)
    if name in ("Sx", "Sy", "Sz"):
        return ops.spin_sum(name[1].lower(), spec)
    if name == "a":
        return a
    if name == "a_dag":
        return ad
    if name == "n":
        return ops.number(spec)
    raise ValueError(f"unknown gate-space operator {name!r}")


_QUBIT_OPS = {"sx": ops.SIGMA_X, "sy": ops.SIGMA_Y, "sz": ops.SIGMA_Z}


def operator_for(name: str, schedule: Schedule) -> np.ndarray:
    if schedule.space == "gate":
        return _gate_operator(name, ops.HilbertSpec(schedule.fock_dim), schedule.mode_sign)
    if schedule.space == "qubit":
        try:
            return _QUBIT_OPS[name].copy()
        except KeyError:
            raise ValueError(f"unknown qubit operator {name!r}") from None
    raise ValueError(f"unknown schedule space {schedule.space!r}")


def schedule_dim(schedule: Schedule) -> int:
    return 4 * schedule.fock_dim if schedule.space == "gate" else 2


def assemble(segment: Segment, schedule: Schedule) -> list:
    """Concrete :class:`HamiltonianTerm` list for one segment."""
    env = segment.envelope
    out = []
    for term in segment.terms:
        envelope = None
        if term.shaped and env.kind != "rectangular":
            envelope = lambda tl, _e=env, _d=segment.duration: _e(tl, _d)  # noqa: E731
        out.append(HamiltonianTerm(operator_for(term.operator, schedule), term.amplitude,
                                   term.frequency, envelope, term.label))
    return out


def hamiltonian(terms: list, t: float, t_local: float = 0.0) -> np.ndarray:
    h = None
    for term in terms:
        x = term.coefficient(t, t_local) * term.base_operator
        h = x if h is None else h + x
    return h


def pulse_unitary(pulse: Pulse, schedule: Schedule) -> np.ndarray:
    if pulse.axis == "z":
        vec = (0.0, 0.0, 1.0)
    elif pulse.axis == "equatorial":
        vec = (math.cos(pulse.phase), math.sin(pulse.phase), 0.0)
    else:
        raise ValueError(f"unknown pulse axis {pulse.axis!r}")
    r = ops.qubit_rotation(vec, pulse.angle)
    if schedule.space == "qubit":
        return r
    return ops.embed(r, r, np.eye(schedule.fock_dim, dtype=complex))


@dataclass
class EvolveOptions:
    """Integrator controls.

    ``method`` is ``"lawson"`` (default: fourth-order Runge-Kutta in the
    interaction picture of the constant part of H, which is propagated
    exactly), ``"rk4"`` (classic fourth-order Runge-Kutta on the full
    generator) or ``"adaptive"`` (Dormand-Prince 4(5), per-step tolerance
    ``rtol``/``atol``).

    The fixed step per segment is ``min(duration/min_steps,
    2*pi/(steps_per_cycle*w))`` with ``w`` the largest coefficient frequency
    plus all term Rabi rates (2|amplitude|).  ``samples_per_segment`` evenly
    spaced states are stored per segment (the step count is rounded up to a
    multiple of it); segment ends are always stored.
    """

    method: str = "lawson"
    steps_per_cycle: Optional[int] = None  # 100 for lawson, 600 for rk4
    min_steps: int = 1000
    max_step: Optional[float] = None
    samples_per_segment: int = 1
    rtol: float = 1e-12
    atol: float = 1e-12
    truncation_limit: float = 1e-6
    check_states: bool = True
    store_states: bool = True
    observer: Optional[Callable] = None  # observer(t, rho) at every sample

    def cycles(self) -> int:
        if self.steps_per_cycle is not None:
            return self.steps_per_cycle
        return 600 if self.method == "rk4" else 100


@dataclass
class EvolutionResult:
    times: list
    states: list
    final_state: ops.State
    stats: dict = field(default_factory=dict)


class _Generator:
    """Right-hand side -i[H(t), rho] + D(rho) for a subset of terms."""

    def __init__(self, terms, dissipators):
        const = [t for t in terms if t.is_constant]
        self.h0 = hamiltonian(const, 0.0) if const else None
        self.moving = [t for t in terms if not t.is_constant]
        self.jumps = []
        for d in dissipators:
            if d.rate > 0:
                L = math.sqrt(d.rate) * d.jump_operator
                self.jumps.append((L, L.conj().T))
        if self.jumps:
            self.half_decay = 0.5 * sum(Ld @ L for L, Ld in self.jumps)

    def h(self, t, tl):
        h = self.h0
        for term in self.moving:
            x = term.coefficient(t, tl) * term.base_operator
            h = x if h is None else h + x
        return h

    def __call__(self, t, tl, rho):
        h = self.h(t, tl)
        if h is None:
            out = np.zeros_like(rho)
        else:
            k = h @ rho
            out = -1j * (k - k.conj().T)
        if self.jumps:
            k = self.half_decay @ rho
            out = out - (k + k.conj().T)
            for L, Ld in self.jumps:
                out = out + L @ rho @ Ld
        return out


class _ConstantPropagator:
    """X -> U X U^+ with U = exp(-i H0 tau), H0 Hermitian and time independent.

    When H0 acts on the spins only (H0 = h (x) 1_N) the conjugation is done
    on the 4 x 4 spin factor.
    """

    def __init__(self, h0, tau, fock_dim=0):
        self.identity = h0 is None
        if self.identity:
            return
        self.n = 0
        if fock_dim:
            n = fock_dim
            h4 = h0.reshape(4, n, 4, n)[:, 0, :, 0]
            if ops.max_abs(np.kron(h4, np.eye(n)) - h0) <= 1e-13 * max(1.0, ops.max_abs(h0)):
                self.n = n
                h0 = h4
        lam, v = np.linalg.eigh(h0)
        self.u = (v * np.exp(-1j * lam * tau)) @ v.conj().T
        self.ud = self.u.conj().T

    def __call__(self, x):
        if self.identity:
            return x
        if not self.n:
            return self.u @ x @ self.ud
        n, d = self.n, x.shape[0]
        y = (self.u @ x.reshape(4, -1)).reshape(4 * n, 4, n)
        return np.matmul(self.ud.T, y).reshape(d, d)


def characteristic_rate(terms) -> float:
    """Angular rate used to size the fixed step."""
    fmax = max((abs(t.frequency) for t in terms), default=0.0)
    return fmax + sum(2 * abs(t.amplitude) for t in terms)


def _top_occupancy(rho, fock_dim) -> float:
    d = np.real(np.diagonal(rho)).reshape(4, fock_dim)
    return float(d[:, -2:].sum())


def evolve(schedule: Schedule, initial: ops.State, options: Optional[EvolveOptions] = None) -> EvolutionResult:
    """Integrate ``initial`` through ``schedule``.

    Raises :class:`TruncationError` when the top two Fock levels exceed
    ``options.truncation_limit`` and :class:`IntegrationError` when a stored
    state fails the density-matrix checks or becomes non-finite.
    """
    opt = options or EvolveOptions()
    if opt.method not in ("lawson", "rk4", "adaptive"):
        raise ValueError(f"unknown method {opt.method!r}")
    dim = schedule_dim(schedule)
    rho = np.array(initial.rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise ValueError(f"initial state has shape {rho.shape}, schedule needs {(dim, dim)}")
    gate = schedule.space == "gate"
    times, states = [], []
    stats = {"steps": [], "step_size": [], "max_top_occupancy": 0.0, "method": opt.method}

    def guard(t, r):
        if not np.all(np.isfinite(r)):
            raise IntegrationError(f"non-finite density matrix at t = {t:.6e} s")
        if gate:
            occ = _top_occupancy(r, schedule.fock_dim)
            if occ > stats["max_top_occupancy"]:
                stats["max_top_occupancy"] = occ
            if occ > opt.truncation_limit:
                raise TruncationError(t, occ, schedule.fock_dim, opt.truncation_limit)

    def sample(t, r):
        guard(t, r)
        if opt.check_states:
            try:
                ops.State(r).check()
            except ops.StateError as exc:
                raise IntegrationError(f"invalid state at t = {t:.6e} s: {exc}") from exc
        if opt.observer is not None:
            opt.observer(t, r)
        if opt.store_states:
            times.append(t)
            states.append(ops.State(r))

    def apply_pulses(boundary, r):
        for p in schedule.pulses_at(boundary):
            u = pulse_unitary(p, schedule)
            r = u @ r @ u.conj().T
        return r

    rho = apply_pulses(0, rho)
    t0 = 0.0
    sample(t0, rho)
    for i, seg in enumerate(schedule.segments):
        terms = assemble(seg, schedule)
        diss = [Dissipator(operator_for(d.operator, schedule), d.rate) for d in seg.dissipators]
        if seg.duration > 0:
            if opt.method == "adaptive":
                rho, n, h = _adaptive_segment(_Generator(terms, diss), rho, t0, seg, opt, guard, sample)
            else:
                rho, n, h = _fixed_step_segment(schedule, terms, diss, rho, t0, seg, opt, guard, sample)
            stats["steps"].append(n)
            stats["step_size"].append(h)
        t0 = t0 + seg.duration
        rho = apply_pulses(i + 1, rho)
        sample(t0, rho)
    return EvolutionResult(times, states, ops.State(rho), stats)


def _step_count(seg, terms, opt) -> int:
    w = characteristic_rate(terms)
    n = opt.min_steps
    if w > 0:
        n = max(n, math.ceil(seg.duration * w * opt.cycles() / (2 * np.pi)))
    if seg.envelope.kind != "rectangular" and any(t.envelope for t in terms):
        n = max(n, math.ceil(10 * seg.duration / seg.envelope.ramp_time))
    if opt.max_step:
        n = max(n, math.ceil(seg.duration / opt.max_step))
    m = max(1, int(opt.samples_per_segment))
    return -(-n // m) * m


def _fixed_step_segment(schedule, terms, diss, rho, t0, seg, opt, guard, sample):
    n = _step_count(seg, terms, opt)
    h = seg.duration / n
    stride = n // max(1, int(opt.samples_per_segment))
    if opt.method == "rk4":
        f = _Generator(terms, diss)
        half = None
    else:
        f = _Generator([t for t in terms if not t.is_constant], diss)
        h0 = hamiltonian([t for t in terms if t.is_constant], 0.0) if any(t.is_constant for t in terms) else None
        half = _ConstantPropagator(h0, h / 2, schedule.fock_dim if schedule.space == "gate" else 0)
    for k in range(n):
        tl = k * h
        t = t0 + tl
        if opt.method == "rk4":
            k1 = f(t, tl, rho)
            k2 = f(t + h / 2, tl + h / 2, rho + (h / 2) * k1)
            k3 = f(t + h / 2, tl + h / 2, rho + (h / 2) * k2)
            k4 = f(t + h, tl + h, rho + h * k3)
            rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        else:
            # integrating-factor RK4; half() advances the constant part by h/2
            k1 = f(t, tl, rho)
            y_half = half(rho)
            k1_half = half(k1)
            k2 = f(t + h / 2, tl + h / 2, y_half + (h / 2) * k1_half)
            k3 = f(t + h / 2, tl + h / 2, y_half + (h / 2) * k2)
            k4 = f(t + h, tl + h, half(y_half + h * k3))
            rho = half(y_half + (h / 6) * (k1_half + 2 * (k2 + k3))) + (h / 6) * k4
        guard(t + h, rho)
        if (k + 1) % stride == 0 and k + 1 < n:
            sample(t0 + (k + 1) * h, rho)
    return rho, n, h


def _adaptive_segment(L, rho, t0, seg, opt, guard, sample):
    from scipy.integrate import solve_ivp

    shape = rho.shape
    m = max(1, int(opt.samples_per_segment))
    t_eval = [t0 + seg.duration * j / m for j in range(1, m + 1)]

    def f(t, y):
        return L(t, t - t0, y.reshape(shape)).ravel()

    sol = solve_ivp(f, (t0, t0 + seg.duration), rho.ravel(), method="RK45",
                    t_eval=t_eval, rtol=opt.rtol, atol=opt.atol)
    if not sol.success:
        raise IntegrationError(f"adaptive integration failed in segment {seg.label!r}: {sol.message}")
    for j, t in enumerate(sol.t[:-1]):
        sample(float(t), sol.y[:, j].reshape(shape))
    out = sol.y[:, -1].reshape(shape)
    guard(t0 + seg.duration, out)
    return out, int(sol.nfev), float("nan")


def initial_state(config: GateConfig) -> ops.State:
    """|down down> (x) thermal motion with the configured mean occupation."""
    return ops.product_state(ops.DOWN, ops.DOWN, ops.HilbertSpec(config.fock_dim), config.initial_nbar)


def run_gate(config: GateConfig, options: Optional[EvolveOptions] = None) -> EvolutionResult:
    """Compile ``config`` and evolve |down down, thermal>."""
    return evolve(compile_gate(config), initial_state(config), options)


def spin_purity(state: ops.State, fock_dim: int) -> float:
    r = ops.spin_state(state.rho, ops.HilbertSpec(fock_dim))
    return float(np.real(np.trace(r @ r)))


@dataclass
class FrameReport:
    fidelity_full: float
    fidelity_ms_only: float
    gap: float
    carrier_angle: float  # omega_c * t_g modulo 2 pi, in (-pi, pi]


def interaction_frame_check(config: GateConfig, options: Optional[EvolveOptions] = None) -> FrameReport:
    """Compare H_MS + H_c + H_Z against H_MS alone (both at delta' = 0).

    The gap is the absolute difference of Bell-state fidelities, with the
    Bell phase taken from the MS-only run.
    """
    from .analysis import bell_phase, direct_fidelity

    full = config.replace(delta_prime=0.0, scheme="DDMS")
    bare = full.replace(omega_c=0.0)
    if full.omega_c == 0:
        rho_full = rho_bare = run_gate(bare, options).final_state
    else:
        rho_bare = run_gate(bare, options).final_state
        rho_full = run_gate(full, options).final_state
    theta = bell_phase(rho_bare)
    f_bare = direct_fidelity(rho_bare, theta)
    f_full = direct_fidelity(rho_full, theta)
    angle = math.remainder(full.omega_c * total_time(full), 2 * np.pi)
    return FrameReport(f_full, f_bare, abs(f_full - f_bare), angle)
