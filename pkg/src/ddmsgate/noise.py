"""Monte-Carlo and deterministic sweeps: shot-to-shot shift and mode-frequency
jitter, Ramsey contrast, and gate error against carrier strength or heating.

Gate error is the Bell-state infidelity 1 - <Psi(theta)|rho_spin|Psi(theta)>
from |down down> (x) thermal motion, with theta taken from the noiseless run
of the same configuration and then held fixed.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .analysis import bell_phase, direct_fidelity
from .dynamics import EvolveOptions, run_gate
from .model import GateConfig, RamseyConfig, ConfigError, total_time
from .operators import SIGMA_X, SIGMA_Z, IDENTITY_2, qubit_rotation

RNG_NAME = f"numpy.random.PCG64 (numpy {np.__version__})"


class ShotError(RuntimeError):
    """Evolution failed for one Monte-Carlo shot."""


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def parallel_map(fn, items, workers: int = 1) -> list:
    """Ordered map, optionally over a process pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class JitterModel:
    """Gaussian shot-to-shot noise, frozen within each shot (rad/s r.m.s.)."""

    delta_prime_rms: float = 0.0
    mode_freq_rms: float = 0.0
    seed: int = 0
    shots: int = 1

    def __post_init__(self):
        if self.delta_prime_rms < 0 or self.mode_freq_rms < 0:
            raise ConfigError("jitter r.m.s. values must be >= 0")
        if int(self.shots) != self.shots or self.shots < 1:
            raise ConfigError("shots must be an integer >= 1")

    @property
    def is_zero(self) -> bool:
        return self.delta_prime_rms == 0 and self.mode_freq_rms == 0

    def standard_draws(self) -> np.ndarray:
        """(shots, 2) standard normals; column 0 scales delta', column 1 the mode offset.

        Both columns are always drawn so that changing one r.m.s. value never
        changes the samples of the other.
        """
        return make_rng(self.seed).standard_normal((self.shots, 2))

    def samples(self) -> tuple:
        z = self.standard_draws()
        return self.delta_prime_rms * z[:, 0], self.mode_freq_rms * z[:, 1]


@dataclass
class SweepPoint:
    value: float
    mean_error: float
    stderr: float
    shots: int


@dataclass
class SweepResult:
    """Per-point metrics for one or more named series along one axis."""

    axis: str
    values: list
    series: dict = field(default_factory=dict)  # name -> list[SweepPoint]
    baselines: dict = field(default_factory=dict)  # name -> SweepPoint

    def errors(self, name: str) -> np.ndarray:
        return np.array([p.mean_error for p in self.series[name]])

    def rows(self):
        for name, points in self.series.items():
            for p in points:
                yield {"axis": self.axis, "value": p.value, "series": name,
                       "mean_error": p.mean_error, "stderr": p.stderr, "shots": p.shots}
        for name, p in self.baselines.items():
            yield {"axis": self.axis, "value": p.value, "series": name,
                   "mean_error": p.mean_error, "stderr": p.stderr, "shots": p.shots}

    def to_csv(self) -> str:
        from .io import format_float

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["axis", "value", "series", "mean_error", "stderr", "shots"]
        w.writerow(cols)
        for r in self.rows():
            w.writerow([format_float(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
        return buf.getvalue()


def default_options() -> EvolveOptions:
    return EvolveOptions()


def reference_phase(config: GateConfig, options: Optional[EvolveOptions] = None) -> float:
    """Bell phase of the noiseless run (delta' = 0, no heating)."""
    clean = config.replace(delta_prime=0.0, heating_rate=0.0)
    return bell_phase(run_gate(clean, options).final_state)


def gate_error(config: GateConfig, theta: float, options: Optional[EvolveOptions] = None) -> float:
    return 1.0 - direct_fidelity(run_gate(config, options).final_state, theta)


def _shot_config(config: GateConfig, dp: float, dd: float) -> GateConfig:
    changes = {"delta_prime": config.delta_prime + dp}
    if dd:
        # mode-frequency noise shifts the detuning at fixed pulse length
        changes.update(delta=config.delta + dd, duration=total_time(config))
    return config.replace(**changes)


def _run_shot(args):
    index, config, theta, options = args
    try:
        return gate_error(config, theta, options)
    except Exception as exc:
        raise ShotError(f"shot {index} failed: {exc}") from exc


@dataclass
class MonteCarloResult:
    mean_error: float
    stderr: float
    shots: int
    errors: np.ndarray
    theta: float


def mc_gate_error(config: GateConfig, jitter: JitterModel, options: Optional[EvolveOptions] = None,
                  workers: int = 1, theta: Optional[float] = None) -> MonteCarloResult:
    """Mean Bell infidelity over Monte-Carlo shots of delta' and mode-frequency noise."""
    config.validate()
    if theta is None:
        theta = reference_phase(config, options)
    if jitter.is_zero:
        e = gate_error(config, theta, options)
        return MonteCarloResult(e, 0.0, jitter.shots, np.full(jitter.shots, e), theta)
    dps, dds = jitter.samples()
    jobs = [(i, _shot_config(config, dp, dd), theta, options) for i, (dp, dd) in enumerate(zip(dps, dds))]
    errors = np.array(parallel_map(_run_shot, jobs, workers))
    n = len(errors)
    stderr = float(errors.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MonteCarloResult(float(errors.mean()), stderr, n, errors, theta)


# Ramsey -------------------------------------------------------------------


def _segment_propagators(delta_primes, omega_c, duration) -> np.ndarray:
    """exp(-i H duration) for H = (omega_c sigma_x + delta' sigma_z)/2, one per shot."""
    dp = np.asarray(delta_primes, dtype=float)
    norm = np.hypot(omega_c, dp)
    half = norm * duration / 2
    safe = np.where(norm > 0, norm, 1.0)
    nx, nz = omega_c / safe, dp / safe
    nx = np.where(norm > 0, nx, 0.0)
    nz = np.where(norm > 0, nz, 0.0)
    c, s = np.cos(half), np.sin(half)
    return (c[:, None, None] * IDENTITY_2
            - 1j * s[:, None, None] * (nx[:, None, None] * SIGMA_X + nz[:, None, None] * SIGMA_Z))


def ramsey_pre_analysis(config: RamseyConfig, delta_primes) -> np.ndarray:
    """Qubit kets before the analysis pulse, one per shot (closed-form propagation)."""
    down = np.array([0.0, 1.0], dtype=complex)
    psi = qubit_rotation((1.0, 0.0, 0.0), np.pi / 2) @ down
    psi = np.broadcast_to(psi, (len(delta_primes), 2)).copy()
    T = config.exposure_time
    if config.dd_enabled:
        u = _segment_propagators(delta_primes, config.omega_c, T / 2)
        flip = qubit_rotation((0.0, 1.0, 0.0), np.pi)
        psi = np.einsum("bij,bj->bi", u, psi)
        psi = psi @ flip.T
        psi = np.einsum("bij,bj->bi", u, psi)
    else:
        u = _segment_propagators(delta_primes, 0.0, T)
        psi = np.einsum("bij,bj->bi", u, psi)
    return psi


def ramsey_p_up(psi, phases) -> np.ndarray:
    """P_up after the analysis pulse at each phase; shape (shots, phases)."""
    out = np.empty((psi.shape[0], len(phases)))
    for j, phi in enumerate(phases):
        r = qubit_rotation((math.cos(phi), math.sin(phi), 0.0), np.pi / 2)
        out[:, j] = np.abs(psi @ r[0]) ** 2
    return out


def fit_contrast(phases, p_up) -> np.ndarray:
    """Least-squares C in P_up = (1 + C cos(phi))/2; works row-wise on 2-D input."""
    phi = np.asarray(phases, dtype=float)
    c = np.cos(phi)
    denom = float(c @ c)
    if phi.size < 2 or denom < 1e-12 * phi.size:
        raise ValueError("degenerate Ramsey phases: cannot fit contrast")
    y = 2 * np.asarray(p_up, dtype=float) - 1
    return y @ c / denom


@dataclass
class RamseyResult:
    contrast: float
    stderr: float
    fringe: list  # (phase, mean P_up)
    shots: int
    analytic_contrast: float


def analytic_ramsey_contrast(sigma: float, exposure_time: float) -> float:
    """Gaussian dephasing without decoupling: exp(-(sigma T)^2 / 2)."""
    return math.exp(-0.5 * (sigma * exposure_time) ** 2)


def ramsey_contrast(config: RamseyConfig, phases: Optional[Sequence[float]] = None) -> RamseyResult:
    """Monte-Carlo Ramsey fringe and its contrast."""
    config.validate()
    if phases is None:
        phases = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    phases = np.asarray(phases, dtype=float)
    z = make_rng(config.seed).standard_normal(config.shots)
    dps = config.delta_prime + config.delta_prime_rms * z
    p = ramsey_p_up(ramsey_pre_analysis(config, dps), phases)
    per_shot = fit_contrast(phases, p)
    n = config.shots
    stderr = float(per_shot.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    fringe = list(zip(phases.tolist(), p.mean(axis=0).tolist()))
    return RamseyResult(float(per_shot.mean()), stderr, fringe, n,
                        analytic_ramsey_contrast(config.delta_prime_rms, config.exposure_time))


# sweeps -------------------------------------------------------------------


@dataclass
class ContrastErrorRow:
    sigma: float
    contrast: float
    mean_error: float
    stderr: float
    shots: int


def contrast_to_error_curve(config: GateConfig, sigma_grid: Sequence[float], shots: int = 200,
                            seed: int = 0, options: Optional[EvolveOptions] = None,
                            workers: int = 1) -> list:
    """Analytic Ramsey contrast and Monte-Carlo MS gate error for each r.m.s. shift.

    The same standard-normal draws are scaled by every sigma on the grid.
    """
    if config.scheme != "MS":
        raise ConfigError("contrast-to-error mapping is defined for the MS scheme")
    T = total_time(config)
    theta = reference_phase(config, options)
    rows = []
    for sigma in sigma_grid:
        mc = mc_gate_error(config, JitterModel(delta_prime_rms=sigma, seed=seed, shots=shots),
                           options, workers, theta)
        rows.append(ContrastErrorRow(float(sigma), analytic_ramsey_contrast(sigma, T),
                                     mc.mean_error, mc.stderr, mc.shots))
    return rows


def _point_error(args):
    value, config, options = args
    theta = reference_phase(config, options)
    return gate_error(config, theta, options)


def error_vs_carrier(config_base: GateConfig, omega_c_grid: Sequence[float], delta_prime_fixed: float,
                     schemes=("DDMS", "SSB"), options: Optional[EvolveOptions] = None,
                     workers: int = 1, baselines: bool = True) -> SweepResult:
    """Deterministic gate error against carrier Rabi frequency at fixed delta'.

    Baselines: ``MS`` (no carrier, no refocusing pulse) and ``refocus_only``
    (DDMS with omega_c = 0).
    """
    grid = [float(x) for x in omega_c_grid]
    if not grid:
        raise ValueError("omega_c grid is empty")
    base = config_base.replace(delta_prime=delta_prime_fixed)
    jobs, keys = [], []
    for scheme in schemes:
        for oc in grid:
            cfg = base.replace(scheme=scheme, omega_c=oc)
            jobs.append((oc, cfg, options))
            keys.append((scheme, oc))
    if baselines:
        jobs.append((0.0, base.replace(scheme="MS", omega_c=0.0, refocus_pulse=False), options))
        keys.append(("MS", 0.0))
        jobs.append((0.0, base.replace(scheme="DDMS", omega_c=0.0, refocus_pulse=True), options))
        keys.append(("refocus_only", 0.0))
    errors = parallel_map(_point_error, jobs, workers)
    result = SweepResult("omega_c", grid)
    for (name, oc), e in zip(keys, errors):
        point = SweepPoint(oc, float(e), 0.0, 1)
        if name in schemes:
            result.series.setdefault(name, []).append(point)
        else:
            result.baselines[name] = point
    return result


def heating_error(config: GateConfig, rate_grid: Sequence[float], options: Optional[EvolveOptions] = None,
                  workers: int = 1) -> SweepResult:
    """Gate error with an oscillator heating dissipator at each rate (quanta/s)."""
    rates = [float(r) for r in rate_grid]
    if any(r < 0 for r in rates):
        raise ValueError("heating rates must be >= 0")
    theta = reference_phase(config, options)
    jobs = [(r, config.replace(heating_rate=r), theta, options) for r in rates]
    errors = parallel_map(_heating_point, jobs, workers)
    points = [SweepPoint(r, float(e), 0.0, 1) for r, e in zip(rates, errors)]
    return SweepResult("heating_rate", rates, {"heating": points})


def _heating_point(args):
    _, config, theta, options = args
    return gate_error(config, theta, options)
