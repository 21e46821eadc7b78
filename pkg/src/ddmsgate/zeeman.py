"""Off-resonant a.c. Zeeman shift budgets from tables of spectator transitions.

A microwave field at omega_mw driving a transition at omega_i with Rabi
frequency Omega_i shifts the qubit by

    sign * Omega_i^2 omega_i / (2 (omega_i^2 - omega_mw^2))

which is the rotating-wave term Omega^2 / 4(omega_i - omega_mw) plus its
counter-rotating (Bloch-Siegert) partner Omega^2 / 4(omega_i + omega_mw).
Bare transition frequencies are used; no self-consistent correction.

Table files are CSV with a header row and ``#`` comments.  Two layouts are
accepted::

    label,freq_hz,rabi_rsb_hz,rabi_bsb_hz,sign
    label,shift_rsb_hz,shift_bsb_hz

The second carries precomputed per-row shifts (for regression fixtures
whose underlying Rabi frequencies are not known).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

TWO_PI = 2 * math.pi
DEFAULT_GUARD_HZ = 1.0

TRANSITION_COLUMNS = ("label", "freq_hz", "rabi_rsb_hz", "rabi_bsb_hz", "sign")
SHIFT_COLUMNS = ("label", "shift_rsb_hz", "shift_bsb_hz")


class ResonanceError(ValueError):
    """Drive too close to a spectator transition for the perturbative formula."""


class TableError(ValueError):
    """Malformed transition table."""


@dataclass(frozen=True)
class TransitionEntry:
    label: str
    omega_i: float
    rabi_rsb: float
    rabi_bsb: float
    sign_on_qubit: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.omega_i) and self.omega_i > 0):
            raise ValueError(f"{self.label}: transition frequency must be > 0")
        for name in ("rabi_rsb", "rabi_bsb"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{self.label}: {name} must be >= 0")
        if self.sign_on_qubit not in (1, -1):
            raise ValueError(f"{self.label}: sign_on_qubit must be +1 or -1")

    def rabi(self, which: str) -> float:
        if which not in ("rsb", "bsb"):
            raise ValueError(f"sideband must be 'rsb' or 'bsb', got {which!r}")
        return self.rabi_rsb if which == "rsb" else self.rabi_bsb


@dataclass(frozen=True)
class TabulatedShift:
    """A row whose shifts (rad/s) are given directly rather than computed."""

    label: str
    rsb_shift: float
    bsb_shift: float


@dataclass(frozen=True)
class DriveFrequencies:
    omega_0: float
    Delta: float
    omega_r: float
    delta: float

    def __post_init__(self):
        vals = (self.omega_0, self.Delta, self.omega_r, self.delta)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("drive frequencies must be finite")
        if self.omega_r <= 0 or self.omega_0 <= 100 * self.omega_r:
            raise ValueError("need omega_0 > 100 * omega_r > 0")


@dataclass(frozen=True)
class ShiftBudget:
    per_transition: tuple  # ((label, rsb_shift, bsb_shift), ...) in rad/s
    totals: tuple
    differential: float

    def in_hz(self) -> dict:
        return {
            "rows": [(lab, r / TWO_PI, b / TWO_PI) for lab, r, b in self.per_transition],
            "rsb_total_hz": self.totals[0] / TWO_PI,
            "bsb_total_hz": self.totals[1] / TWO_PI,
            "differential_hz": self.differential / TWO_PI,
        }


def sideband_frequencies(drive: DriveFrequencies) -> tuple:
    """(omega_rsb, omega_bsb) = (omega_0 + Delta) -/+ (omega_r + delta)."""
    centre = drive.omega_0 + drive.Delta
    offset = drive.omega_r + drive.delta
    return centre - offset, centre + offset


def single_shift(entry: TransitionEntry, omega_mw: float, which: str = "rsb",
                 guard: float = TWO_PI * DEFAULT_GUARD_HZ) -> float:
    """Bloch-Siegert-corrected shift of the qubit from one transition (rad/s)."""
    rabi = entry.rabi(which)
    denom = entry.omega_i**2 - omega_mw**2
    if abs(denom) < guard * 2 * entry.omega_i:
        raise ResonanceError(
            f"{entry.label}: drive at {omega_mw / TWO_PI:.6f} Hz is resonant with the transition")
    return entry.sign_on_qubit * rabi**2 * entry.omega_i / (2 * denom)


def budget(entries: Sequence[Union[TransitionEntry, TabulatedShift]], drive: DriveFrequencies = None,
           guard: float = TWO_PI * DEFAULT_GUARD_HZ) -> ShiftBudget:
    """Per-row and total shifts from both sideband fields.

    ``differential`` is the net qubit shift from both fields together.
    """
    entries = list(entries)
    if not entries:
        raise TableError("no transitions")
    rows = []
    for e in entries:
        if isinstance(e, TabulatedShift):
            rows.append((e.label, float(e.rsb_shift), float(e.bsb_shift)))
            continue
        if drive is None:
            raise ValueError("computed entries need drive frequencies")
        w_rsb, w_bsb = sideband_frequencies(drive)
        try:
            rows.append((e.label, single_shift(e, w_rsb, "rsb", guard), single_shift(e, w_bsb, "bsb", guard)))
        except ResonanceError as exc:
            raise ResonanceError(f"transition {e.label!r}: {exc}") from exc
    rsb = math.fsum(r for _, r, _ in rows)
    bsb = math.fsum(b for _, _, b in rows)
    return ShiftBudget(tuple(rows), (rsb, bsb), rsb + bsb)


# table files --------------------------------------------------------------


def _data_lines(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            yield lineno, line


def parse_table(text: str) -> list:
    """Parse table text into TransitionEntry or TabulatedShift records."""
    lines = list(_data_lines(text))
    if not lines:
        raise TableError("no transitions")
    header_line, header = lines[0][0], [h.strip() for h in next(csv.reader([lines[0][1]]))]
    if tuple(header) == TRANSITION_COLUMNS:
        kind = "transition"
    elif tuple(header) == SHIFT_COLUMNS:
        kind = "shift"
    else:
        raise TableError(f"line {header_line}: header must be {','.join(TRANSITION_COLUMNS)} "
                         f"or {','.join(SHIFT_COLUMNS)}")
    out = []
    for lineno, line in lines[1:]:
        cells = [c.strip() for c in next(csv.reader(io.StringIO(line)))]
        if len(cells) != len(header):
            raise TableError(f"line {lineno}: expected {len(header)} fields, got {len(cells)}")
        try:
            nums = [float(c) for c in cells[1:]]
            if not all(math.isfinite(v) for v in nums):
                raise ValueError("non-finite value")
            if kind == "shift":
                out.append(TabulatedShift(cells[0], TWO_PI * nums[0], TWO_PI * nums[1]))
            else:
                sign = int(nums[3])
                if sign != nums[3]:
                    raise ValueError("sign must be +1 or -1")
                out.append(TransitionEntry(cells[0], TWO_PI * nums[0], TWO_PI * nums[1], TWO_PI * nums[2], sign))
        except ValueError as exc:
            raise TableError(f"line {lineno}: {exc}") from exc
    if not out:
        raise TableError("no transitions")
    return out


def load_table(path) -> list:
    return parse_table(Path(path).read_text(encoding="utf-8"))


def bundled_table(name: str = "table2_shifts.csv") -> Path:
    from importlib import resources

    return Path(str(resources.files("ddmsgate") / "data" / name))
