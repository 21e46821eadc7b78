import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddmsgate import analysis as an
from ddmsgate import operators as ops

PHASES = np.linspace(0, np.pi, 24, endpoint=False)


def bell_rho(theta=np.pi / 2):
    v = ops.bell_ket(theta)
    return np.outer(v, v.conj())


def werner(p, theta=np.pi / 2):
    return p * bell_rho(theta) + (1 - p) * np.eye(4) / 4


def test_populations_basic():
    spec = ops.HilbertSpec(3)
    dd = an.populations(ops.product_state(ops.DOWN, ops.DOWN, spec))
    assert dd.as_array() == pytest.approx([0, 0, 0, 1])
    full = np.kron(bell_rho(), np.diag([1.0, 0, 0]))
    b = an.populations(full)
    assert (b.p_uu, b.p_dd) == pytest.approx((0.5, 0.5))
    assert b.parity == pytest.approx(1)
    assert b.by_excitation() == pytest.approx((0.5, 0.0, 0.5))


def test_population_summary_validation():
    with pytest.raises(ValueError):
        an.PopulationSummary(0.5, 0.5, 0.5, 0.0)
    with pytest.raises(ValueError):
        an.PopulationSummary(1.2, -0.2, 0.0, 0.0)


def test_parity_amplitude_examples():
    assert an.parity_scan(bell_rho(), PHASES).fitted_amplitude == pytest.approx(1, abs=1e-6)
    assert an.parity_scan(np.eye(4) / 4, PHASES).fitted_amplitude == pytest.approx(0, abs=1e-9)
    assert an.parity_scan(werner(0.9953), PHASES).fitted_amplitude == pytest.approx(0.9953, abs=1e-6)


def test_parity_fit_needs_four_points():
    with pytest.raises(ValueError, match="at least 4"):
        an.fit_parity([0, 1, 2], [0, 0, 0])


def test_fixed_offset_fit():
    scan = an.parity_scan(bell_rho(), PHASES)
    fixed = an.parity_scan(bell_rho(), PHASES, phase_offset=scan.fitted_phase_offset)
    assert fixed.fitted_amplitude == pytest.approx(scan.fitted_amplitude, abs=1e-9)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=30)
def test_parity_linear_in_mixtures(w, p1, p2):
    mix = w * werner(p1) + (1 - w) * werner(p2)
    amp = an.parity_scan(mix, PHASES, phase_offset=0.0).fitted_amplitude
    parts = [an.parity_scan(werner(p), PHASES, phase_offset=0.0).fitted_amplitude for p in (p1, p2)]
    assert amp == pytest.approx(w * parts[0] + (1 - w) * parts[1], abs=1e-9)


def test_bell_fidelity_composition():
    assert an.bell_fidelity(0.9980, 0.9953).fidelity == pytest.approx(0.99665, abs=1e-12)
    assert an.bell_fidelity(1.0, 1.0).fidelity == 1.0
    assert an.bell_fidelity(1.0, 0.0).fidelity == 0.5
    with pytest.raises(ValueError):
        an.bell_fidelity(1.5, 0.0)


def test_direct_fidelity_examples():
    rho = bell_rho(np.pi / 2)
    assert an.direct_fidelity(rho, np.pi / 2) == pytest.approx(1)
    assert an.direct_fidelity(rho) == pytest.approx(1)
    assert an.bell_phase(rho) == pytest.approx(np.pi / 2)
    with pytest.raises(ValueError):
        an.direct_fidelity(rho, "best")


@given(st.floats(0, 0.5), st.floats(0, 0.5), st.floats(0, 1), st.floats(-np.pi, np.pi))
@settings(max_examples=50)
def test_tomographic_and_direct_fidelity_agree(p_uu, p_dd, c, phase):
    # states whose only coherence is between |uu> and |dd>
    rest = 1 - p_uu - p_dd
    rho = np.diag([p_uu, rest / 2, rest / 2, p_dd]).astype(complex)
    rho[0, 3] = c * np.sqrt(p_uu * p_dd) * np.exp(-1j * phase)
    rho[3, 0] = np.conj(rho[0, 3])
    amp = an.parity_scan(rho, PHASES).fitted_amplitude
    tomo = an.bell_fidelity(an.populations(rho), amp).fidelity
    assert tomo == pytest.approx(an.direct_fidelity(rho), abs=1e-6)


@given(st.floats(0.01, 1))
def test_depolarizing_lowers_fidelity(p):
    rho = bell_rho()
    noisy = (1 - p) * rho + p * np.eye(4) / 4
    assert an.direct_fidelity(noisy) < an.direct_fidelity(rho)


def test_spam_examples():
    assert np.allclose(an.confusion_matrix(0.0), np.eye(4))
    dd = an.PopulationSummary(0, 0, 0, 1)
    raw = an.spam_corrupt(dd, 0.0034)
    assert raw.p_dd == pytest.approx((1 - 0.0034) ** 2)
    assert an.spam_correct(raw, 0.0034).p_dd == pytest.approx(1, abs=1e-9)
    bell = an.spam_corrupt(an.PopulationSummary(0.5, 0, 0, 0.5), 0.0034)
    assert bell.even == pytest.approx((1 - 0.0034) ** 2 + 0.0034**2, abs=1e-12)
    with pytest.raises(ValueError, match="singular"):
        an.confusion_matrix(0.5)
    with pytest.raises(ValueError):
        an.confusion_matrix(-0.1)


@given(st.lists(st.floats(0.01, 1), min_size=4, max_size=4), st.floats(0, 0.05))
def test_spam_round_trip(weights, eps):
    p = np.array(weights) / sum(weights)
    pops = an.PopulationSummary.from_array(p)
    back = an.spam_correct(an.spam_corrupt(pops, eps), eps)
    assert np.allclose(back.as_array(), p, atol=1e-9)


def test_maximum_likelihood_parity_fit():
    rng = np.random.default_rng(1)
    phases = np.linspace(0, np.pi, 20, endpoint=False)
    counts = an.sample_parity_counts(werner(0.9), phases, 2000, rng)
    ml = an.fit_parity_ml(phases, counts, 2000)
    assert ml.fitted_amplitude == pytest.approx(0.9, abs=0.03)


def test_spin_density_rejects_bad_dimension():
    with pytest.raises(ValueError):
        an.spin_density(np.eye(6))
