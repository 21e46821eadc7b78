import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddmsgate import zeeman as z

TWO_PI = 2 * math.pi
GHZ, KHZ, MHZ = TWO_PI * 1e9, TWO_PI * 1e3, TWO_PI * 1e6
DRIVE = z.DriveFrequencies(3.2 * GHZ, 20.78 * KHZ, 3.255 * MHZ, 1.2308 * KHZ)


def test_sideband_frequencies():
    rsb, bsb = z.sideband_frequencies(DRIVE)
    assert rsb / TWO_PI == pytest.approx(3.1967645e9, abs=100)
    assert bsb / TWO_PI == pytest.approx(3.2032770108e9, abs=1)
    plain = z.DriveFrequencies(3.2 * GHZ, 0.0, 3.255 * MHZ, 0.0)
    assert z.sideband_frequencies(plain) == (3.2 * GHZ - 3.255 * MHZ, 3.2 * GHZ + 3.255 * MHZ)


@given(st.floats(2e9, 1e10), st.floats(-1e5, 1e5), st.floats(1e5, 1e7), st.floats(-1e4, 1e4))
def test_sideband_separation(w0, big_delta, wr, d):
    drive = z.DriveFrequencies(w0, big_delta, wr, d)
    rsb, bsb = z.sideband_frequencies(drive)
    assert bsb - rsb == pytest.approx(2 * (wr + d), rel=1e-9, abs=1e-3)


def test_drive_sanity():
    with pytest.raises(ValueError):
        z.DriveFrequencies(1e6, 0, 1e5, 0)
    with pytest.raises(ValueError):
        z.DriveFrequencies(math.inf, 0, 1e5, 0)


def test_single_shift_example():
    e = z.TransitionEntry("t", 3.2 * GHZ, 100 * KHZ, 0.0, +1)
    assert z.single_shift(e, 3.19 * GHZ, "rsb") / TWO_PI == pytest.approx(250.4, abs=0.05)
    assert z.single_shift(e, 3.19 * GHZ, "bsb") == 0


def test_partial_fraction_identity():
    e = z.TransitionEntry("t", 3.2 * GHZ, 300 * KHZ, 0.0, +1)
    for w in (3.1 * GHZ, 3.3 * GHZ, 1.0 * GHZ):
        om, wi = e.rabi_rsb, e.omega_i
        two_term = om**2 / (4 * (wi - w)) + om**2 / (4 * (wi + w))
        assert z.single_shift(e, w) == pytest.approx(two_term, rel=1e-12)


def test_resonance_guard():
    e = z.TransitionEntry("near", 3.2 * GHZ, 100 * KHZ, 100 * KHZ, +1)
    with pytest.raises(z.ResonanceError, match="near"):
        z.single_shift(e, 3.2 * GHZ + 0.1 * TWO_PI)
    drive = z.DriveFrequencies(3.2 * GHZ, 0.0, 3.255 * MHZ, 0.0)
    rsb, _ = z.sideband_frequencies(drive)
    with pytest.raises(z.ResonanceError, match="transition 'bad'"):
        z.budget([z.TransitionEntry("bad", rsb, 1.0, 1.0, 1)], drive)


@given(st.floats(0, 1e6), st.floats(0.1, 10), st.sampled_from([1, -1]))
def test_shift_scaling(rabi, k, sign):
    e = z.TransitionEntry("t", 3.2 * GHZ, rabi, rabi, sign)
    flipped = z.TransitionEntry("t", 3.2 * GHZ, rabi, rabi, -sign)
    scaled = z.TransitionEntry("t", 3.2 * GHZ, k * rabi, k * rabi, sign)
    w = 3.19 * GHZ
    assert z.single_shift(flipped, w) == -z.single_shift(e, w)
    assert z.single_shift(scaled, w) == pytest.approx(k**2 * z.single_shift(e, w), rel=1e-12, abs=1e-300)


def test_static_limit():
    e = z.TransitionEntry("t", 3.2 * GHZ, 100 * KHZ, 0.0, -1)
    assert z.single_shift(e, 3.2 * MHZ) == pytest.approx(-e.rabi_rsb**2 / (2 * e.omega_i), rel=1e-3)


def test_budget_totals():
    entries = [
        z.TransitionEntry("a", 3.1 * GHZ, 200 * KHZ, 210 * KHZ, 1),
        z.TransitionEntry("b", 3.25 * GHZ, 100 * KHZ, 90 * KHZ, -1),
    ]
    b = z.budget(entries, DRIVE)
    assert b.totals[0] == pytest.approx(sum(r for _, r, _ in b.per_transition), rel=1e-12)
    assert b.totals[1] == pytest.approx(sum(x for _, _, x in b.per_transition), rel=1e-12)
    assert b.differential == pytest.approx(sum(b.totals))
    zero = z.budget([z.TransitionEntry("z", 3.1 * GHZ, 0.0, 0.0, 1)], DRIVE)
    assert zero.totals == (0.0, 0.0)
    with pytest.raises(z.TableError, match="no transitions"):
        z.budget([], DRIVE)


def test_bundled_table2_fixture():
    b = z.budget(z.load_table(z.bundled_table())).in_hz()
    assert b["rsb_total_hz"] == pytest.approx(-47e3, abs=1.5e3)
    assert b["bsb_total_hz"] == pytest.approx(68e3, abs=1.5e3)
    assert b["differential_hz"] == pytest.approx(21e3, abs=1.5e3)


def test_parse_transition_table():
    text = "# comment\nlabel,freq_hz,rabi_rsb_hz,rabi_bsb_hz,sign\nq,3.1e9,1e5,2e5,-1\n"
    (e,) = z.parse_table(text)
    assert e.label == "q" and e.sign_on_qubit == -1
    assert e.rabi_bsb == pytest.approx(TWO_PI * 2e5)


@pytest.mark.parametrize("text, message", [
    ("", "no transitions"),
    ("label,freq_hz,rabi_rsb_hz,rabi_bsb_hz,sign\n", "no transitions"),
    ("lbl,f\n", "line 1: header"),
    ("label,freq_hz,rabi_rsb_hz,rabi_bsb_hz,sign\nq,3e9,1e5\n", "line 2: expected 5 fields"),
    ("label,freq_hz,rabi_rsb_hz,rabi_bsb_hz,sign\n\nq,3e9,abc,1,1\n", "line 3"),
    ("label,freq_hz,rabi_rsb_hz,rabi_bsb_hz,sign\nq,3e9,1,1,0.5\n", "line 2"),
    ("label,freq_hz,rabi_rsb_hz,rabi_bsb_hz,sign\nq,-3e9,1,1,1\n", "line 2"),
])
def test_malformed_tables(text, message):
    with pytest.raises(z.TableError, match=message):
        z.parse_table(text)
