import numpy as np
import pytest

from ddmsgate.dynamics import EvolveOptions

ACCEPTANCE_LINES = []


class ConservationRecorder:
    """Observer recording the worst trace, Hermiticity and positivity error."""

    def __init__(self):
        self.samples = 0
        self.trace_err = 0.0
        self.herm_err = 0.0
        self.min_eig = np.inf

    def __call__(self, t, rho):
        self.samples += 1
        self.trace_err = max(self.trace_err, abs(np.trace(rho) - 1))
        self.herm_err = max(self.herm_err, float(np.max(np.abs(rho - rho.conj().T))))
        self.min_eig = min(self.min_eig, float(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]))


RECORDER = ConservationRecorder()


def recorded_options(**kw) -> EvolveOptions:
    return EvolveOptions(observer=RECORDER, **kw)


@pytest.fixture
def report():
    def _report(number: int, ok: bool, detail: str):
        ACCEPTANCE_LINES.append(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
