"""Gate configurations and their compilation into timed schedules.

Frequencies are angular (rad/s) and hbar = 1.  A :class:`Schedule` is a
symbolic recipe: each :class:`Term` names an operator and a coefficient
``amplitude * exp(1j * frequency * t) [* envelope]``, where ``t`` is the time
since the start of the schedule and the envelope is evaluated in the local
time of the segment.  :func:`ddmsgate.dynamics.assemble` turns the names
into matrices.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

SCHEMES = ("MS", "DDMS", "SSB")
ENVELOPES = ("rectangular", "raised_cosine")


class ConfigError(ValueError):
    """A configuration violates one of the gate rules."""


@dataclass(frozen=True)
class Envelope:
    """Sideband amplitude profile within one segment.

    ``raised_cosine`` ramps as sin^2 over ``ramp_time`` at both ends of the
    segment and is flat in between.
    """

    kind: str = "rectangular"
    ramp_time: float = 0.0

    def __post_init__(self):
        if self.kind not in ENVELOPES:
            raise ConfigError(f"envelope kind must be one of {ENVELOPES}, got {self.kind!r}")
        if self.ramp_time < 0 or not math.isfinite(self.ramp_time):
            raise ConfigError("envelope ramp_time must be finite and >= 0")
        if self.kind == "raised_cosine" and self.ramp_time <= 0:
            raise ConfigError("raised_cosine envelope needs ramp_time > 0")

    def __call__(self, t, duration: float):
        """Profile at local time ``t`` in a segment of length ``duration``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "rectangular":
            return np.ones_like(t)
        r = min(self.ramp_time, duration / 2)
        edge = np.clip(np.minimum(t, duration - t) / r, 0.0, 1.0)
        return np.sin(0.5 * np.pi * edge) ** 2


@dataclass(frozen=True)
class GateConfig:
    """Physical parameters of one gate run (angular frequencies, seconds).

    ``duration`` overrides the loop-closure gate time (used for detuning
    scans at fixed pulse length).  ``pi_pulse_duration > 0`` replaces the
    instantaneous refocusing pulse with a finite sigma_y drive segment.
    """

    scheme: str = "DDMS"
    omega: float = 2 * np.pi * 308.0
    delta: float = 2 * np.pi * 1230.8
    omega_c: float = 2 * np.pi * 3690.0
    delta_prime: float = 0.0
    loops: int = 4
    mode_sign: str = "-"
    refocus_pulse: bool = True
    fock_dim: int = 30
    initial_nbar: float = 0.0
    envelope: Envelope = field(default_factory=Envelope)
    heating_rate: float = 0.0
    carrier_phase: float = 0.0
    ssb_sideband: str = "red"
    duration: Optional[float] = None
    pi_pulse_duration: float = 0.0

    def replace(self, **changes) -> "GateConfig":
        return dataclasses.replace(self, **changes)

    def validate(self) -> "GateConfig":
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        for name in ("omega", "delta", "omega_c", "delta_prime", "heating_rate",
                     "initial_nbar", "carrier_phase", "pi_pulse_duration"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if self.delta == 0:
            raise ConfigError("gate detuning delta must be non-zero (gate time 2*pi*K/|delta|)")
        if int(self.loops) != self.loops or self.loops < 1:
            raise ConfigError("loops must be a positive integer")
        if self.refocus_pulse and self.loops % 2:
            raise ConfigError(
                f"even-loop rule: a refocusing pi-pulse needs an even number of "
                f"phase-space loops, got loops={self.loops}"
            )
        if self.scheme == "MS" and self.refocus_pulse:
            raise ConfigError("MS scheme has no refocusing pulse; use DDMS with omega_c = 0")
        if self.mode_sign not in ("+", "-"):
            raise ConfigError(f"mode_sign must be '+' or '-', got {self.mode_sign!r}")
        if self.scheme == "SSB" and self.ssb_sideband not in ("red", "blue"):
            raise ConfigError(
                f"SSB uses exactly one sideband ('red' or 'blue'), got {self.ssb_sideband!r}"
            )
        if int(self.fock_dim) != self.fock_dim or self.fock_dim < 2:
            raise ConfigError("fock_dim must be an integer >= 2")
        if self.initial_nbar < 0:
            raise ConfigError("initial_nbar must be >= 0")
        if self.heating_rate < 0:
            raise ConfigError("heating_rate must be >= 0")
        if self.omega < 0 or self.omega_c < 0:
            raise ConfigError("Rabi frequencies must be >= 0")
        if self.duration is not None and not (self.duration > 0 and math.isfinite(self.duration)):
            raise ConfigError("duration override must be positive and finite")
        if self.pi_pulse_duration < 0:
            raise ConfigError("pi_pulse_duration must be >= 0")
        return self


@dataclass(frozen=True)
class RamseyConfig:
    """Single-ion Ramsey experiment enclosing the gate-length exposure."""

    exposure_time: float = 3.25e-3
    dd_enabled: bool = False
    omega_c: float = 2 * np.pi * 3690.0
    delta_prime_rms: float = 0.0
    analysis_phase: float = 0.0
    shots: int = 500
    seed: int = 0
    delta_prime: float = 0.0  # fixed offset added to every shot

    def replace(self, **changes) -> "RamseyConfig":
        return dataclasses.replace(self, **changes)

    def validate(self) -> "RamseyConfig":
        if not (self.exposure_time > 0 and math.isfinite(self.exposure_time)):
            raise ConfigError("exposure_time must be positive")
        if int(self.shots) != self.shots or self.shots < 1:
            raise ConfigError("shots must be an integer >= 1")
        if self.delta_prime_rms < 0:
            raise ConfigError("delta_prime_rms must be >= 0")
        return self


def gate_time(config: GateConfig) -> float:
    """Loop-closure gate time 2 pi K / |delta|."""
    if config.delta == 0:
        raise ConfigError("gate detuning delta must be non-zero")
    return 2 * np.pi * config.loops / abs(config.delta)


def total_time(config: GateConfig) -> float:
    return config.duration if config.duration is not None else gate_time(config)


# schedules --------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """``amplitude * exp(1j*frequency*t) * (envelope if shaped)`` times ``operator``."""

    operator: str
    amplitude: complex
    frequency: float = 0.0
    shaped: bool = False
    label: str = ""


@dataclass(frozen=True)
class Dissipation:
    operator: str
    rate: float


@dataclass(frozen=True)
class Pulse:
    """Instantaneous rotation of all spins by ``angle`` about the axis
    ``cos(phase) x + sin(phase) y`` (or ``z`` when ``axis == "z"``)."""

    angle: float
    phase: float = 0.0
    axis: str = "equatorial"
    label: str = ""


@dataclass(frozen=True)
class Segment:
    duration: float
    terms: tuple = ()
    dissipators: tuple = ()
    envelope: Envelope = field(default_factory=Envelope)
    label: str = ""


@dataclass(frozen=True)
class Schedule:
    """Ordered segments plus instantaneous pulses at segment boundaries.

    ``pulses`` maps a boundary index to a pulse: index 0 is before the first
    segment and index ``len(segments)`` after the last.
    ``space`` is ``"gate"`` (two spins and one mode) or ``"qubit"``.
    """

    space: str
    segments: tuple
    pulses: tuple = ()  # ((boundary_index, Pulse), ...)
    fock_dim: int = 0
    mode_sign: str = "-"

    @property
    def duration(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    def pulses_at(self, boundary: int) -> list:
        return [p for i, p in self.pulses if i == boundary]

    def boundary_times(self) -> list:
        out, t = [0.0], 0.0
        for s in self.segments:
            t += s.duration
            out.append(t)
        return out

    def coefficient(self, label: str) -> complex:
        """Sum of amplitudes of all terms carrying ``label`` (any segment)."""
        return sum((t.amplitude for s in self.segments for t in s.terms if t.label == label), 0j)

    def to_dict(self) -> dict:
        def enc(x):
            if isinstance(x, complex):
                return [x.real, x.imag]
            return x

        def seg(s):
            return {
                "label": s.label,
                "duration": s.duration,
                "envelope": dataclasses.asdict(s.envelope),
                "terms": [{k: enc(v) for k, v in dataclasses.asdict(t).items()} for t in s.terms],
                "dissipators": [dataclasses.asdict(d) for d in s.dissipators],
            }

        return {
            "space": self.space,
            "fock_dim": self.fock_dim,
            "mode_sign": self.mode_sign,
            "segments": [seg(s) for s in self.segments],
            "pulses": [{"boundary": i, **dataclasses.asdict(p)} for i, p in self.pulses],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _gate_terms(config: GateConfig) -> list:
    omega, delta = config.omega, config.delta
    terms = []
    if config.scheme == "SSB":
        amp = 2 * omega / 2  # single sideband at twice the gate Rabi frequency
        if config.ssb_sideband == "red":
            terms += [
                Term("Sp_a", complex(amp), delta, True, "sideband"),
                Term("Sm_adag", complex(amp), -delta, True, "sideband"),
            ]
        else:
            terms += [
                Term("Sp_adag", complex(amp), -delta, True, "sideband"),
                Term("Sm_a", complex(amp), delta, True, "sideband"),
            ]
    else:
        terms += [
            Term("S_a", complex(omega / 2), delta, True, "sideband"),
            Term("S_adag", complex(omega / 2), -delta, True, "sideband"),
        ]
    if config.scheme != "MS":
        c = config.omega_c / 2
        terms += [
            Term("Sx", complex(c * math.cos(config.carrier_phase)), 0.0, False, "carrier"),
            Term("Sy", complex(c * math.sin(config.carrier_phase)), 0.0, False, "carrier"),
        ]
    terms.append(Term("Sz", complex(config.delta_prime / 2), 0.0, False, "zeeman"))
    return terms


def compile_gate(config: GateConfig) -> Schedule:
    """Compile a gate configuration into a :class:`Schedule`."""
    config.validate()
    tg = total_time(config)
    terms = tuple(_gate_terms(config))
    diss = ()
    if config.heating_rate > 0:
        diss = (Dissipation("a", config.heating_rate), Dissipation("a_dag", config.heating_rate))

    def seg(duration, label):
        return Segment(duration, terms, diss, config.envelope, label)

    if not config.refocus_pulse:
        segments, pulses = (seg(tg, "gate"),), ()
    elif config.pi_pulse_duration == 0:
        segments = (seg(tg / 2, "first half"), seg(tg / 2, "second half"))
        pulses = ((1, Pulse(np.pi, np.pi / 2, "equatorial", "refocus pi[y]")),)
    else:
        tau = config.pi_pulse_duration
        drive = (Term("Sy", complex(np.pi / (2 * tau)), 0.0, False, "refocus drive"),)
        segments = (
            seg(tg / 2, "first half"),
            Segment(tau, drive, diss, Envelope(), "refocus pi[y]"),
            seg(tg / 2, "second half"),
        )
        pulses = ()
    return Schedule("gate", segments, pulses, int(config.fock_dim), config.mode_sign)


compile = compile_gate  # noqa: A001


def compile_ramsey(config: RamseyConfig, delta_prime: Optional[float] = None) -> Schedule:
    """Single-spin Ramsey schedule for one shot with residual shift ``delta_prime``.

    pi/2 about x, exposure under 1/2 delta' sigma_z (plus 1/2 Omega_c sigma_x
    and a mid-exposure pi about y when decoupling is on), then pi/2 about the
    equatorial axis at ``analysis_phase``.  With these conventions the
    noiseless fringe P_up(phi) = (1 + cos phi)/2 peaks at phi = 0.
    """
    config.validate()
    dp = config.delta_prime if delta_prime is None else delta_prime
    terms = [Term("sz", complex(dp / 2), 0.0, False, "zeeman")]
    T = config.exposure_time
    first = Pulse(np.pi / 2, 0.0, "equatorial", "pi/2 x")
    last = Pulse(np.pi / 2, config.analysis_phase, "equatorial", "pi/2 analysis")
    if config.dd_enabled:
        terms.insert(0, Term("sx", complex(config.omega_c / 2), 0.0, False, "carrier"))
        segments = (Segment(T / 2, tuple(terms), label="first half"),
                    Segment(T / 2, tuple(terms), label="second half"))
        pulses = ((0, first), (1, Pulse(np.pi, np.pi / 2, "equatorial", "refocus pi[y]")), (2, last))
    else:
        segments = (Segment(T, tuple(terms), label="exposure"),)
        pulses = ((0, first), (1, last))
    return Schedule("qubit", segments, pulses)
