import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from stochamp.gausspoly import GaussPolyError, coefficients_close, evaluate, integrate_all, integrate_modes
from stochamp.optics import (
    BeamSplitter,
    BranchImpossible,
    amplitude_expectation,
    beam_split,
    coherent_state,
    collapse_on_detection,
    detection_probability,
    fidelity,
    fock_state,
    laguerre,
    mean_photon_number,
    purity,
)

from conftest import T04

R04 = BeamSplitter.from_r(0.4)


def split_coherent(alpha=0.5, bs=R04):
    return beam_split(coherent_state(alpha), coherent_state(0), bs)


def test_beam_splitter_invariants():
    assert BeamSplitter.from_r(0.4).t == pytest.approx(T04)
    for bad in [(1.0, 0.0), (-0.1, 1.0), (0.5, 0.5)]:
        with pytest.raises(ValueError):
            BeamSplitter(*bad)


def test_coherent_state_examples():
    assert np.allclose(coherent_state(0.5).mean, [math.sqrt(2) * 0.5, 0.0])
    assert mean_photon_number(coherent_state(0.5)) == pytest.approx(0.25)
    assert amplitude_expectation(coherent_state(0.3 - 0.8j)) == pytest.approx(0.3 - 0.8j)


def test_fock_state_examples():
    assert coefficients_close(fock_state(0), coherent_state(0), 1e-16)
    assert evaluate(fock_state(1), [0, 0]) == pytest.approx(-1 / math.pi)
    for n in range(5):
        assert mean_photon_number(fock_state(n)) == pytest.approx(n, abs=1e-12)
        assert amplitude_expectation(fock_state(n)) == pytest.approx(0, abs=1e-15)
        assert purity(fock_state(n)) == pytest.approx(1, abs=1e-12)
    with pytest.raises(ValueError):
        fock_state(5)


def test_laguerre_recurrence_against_scipy():
    from scipy.special import eval_laguerre

    y = np.linspace(0, 30, 61)
    for n in (0, 1, 2, 7, 20):
        assert np.allclose(laguerre(n, y), eval_laguerre(n, y), rtol=1e-12, atol=1e-12)


def test_split_amplitudes_and_photon_number():
    s = split_coherent()
    assert amplitude_expectation(integrate_modes(s, [1])) == pytest.approx(T04 * 0.5)
    assert amplitude_expectation(integrate_modes(s, [2])) == pytest.approx(0.2)
    assert mean_photon_number(s) == pytest.approx(0.25, abs=1e-12)


def test_port_two_sign_convention():
    s = beam_split(coherent_state(0), coherent_state(0.3), R04)
    assert amplitude_expectation(integrate_modes(s, [1])) == pytest.approx(-0.4 * 0.3)
    assert amplitude_expectation(integrate_modes(s, [2])) == pytest.approx(T04 * 0.3)


def test_poisson_detection():
    s = split_coherent()
    assert detection_probability(s, 0) == pytest.approx(math.exp(-0.04), rel=1e-13)
    assert detection_probability(s, 1) == pytest.approx(0.04 * math.exp(-0.04), rel=1e-13)
    for n in range(2, 8):
        poisson = math.exp(-0.04) * 0.04**n / math.factorial(n)
        assert detection_probability(s, n) == pytest.approx(poisson, rel=1e-6, abs=1e-15)


def test_detection_against_direct_quadrature():
    # oracle: 2 pi * 4-D integral of W_BS * W_1 evaluated by nested quadrature
    s = beam_split(coherent_state(0.6), fock_state(1), BeamSplitter.from_r(0.3))
    marg = integrate_modes(s, [2])
    f = lambda p, x: 2 * math.pi * evaluate(marg, [x, p]) * evaluate(fock_state(1), [x, p])
    num, _ = integrate.dblquad(f, -8, 8, -8, 8, epsabs=1e-12)
    assert detection_probability(s, 1) == pytest.approx(num, abs=1e-9)


def test_collapse_on_eigenstate():
    a = coherent_state(0.3 + 0.1j)
    prob, out = collapse_on_detection(beam_split(a, fock_state(2), BeamSplitter.from_r(0.0)), 2)
    assert prob == pytest.approx(1.0, abs=1e-12)
    assert coefficients_close(out, a, 1e-12)


def test_no_click_leaves_attenuated_coherent():
    prob, out = collapse_on_detection(split_coherent(), 0)
    assert fidelity(out, coherent_state(T04 * 0.5)) == pytest.approx(1.0, abs=1e-12)


def test_single_click_keeps_coherent_amplitude():
    prob, out = collapse_on_detection(split_coherent(), 1)
    assert prob == pytest.approx(0.038432, abs=1e-6)
    assert amplitude_expectation(out) == pytest.approx(0.45826, abs=1e-5)
    assert purity(out) == pytest.approx(1.0, abs=1e-10)
    assert integrate_all(out) == pytest.approx(1.0, abs=1e-10)


def test_impossible_branch():
    s = beam_split(coherent_state(0.0), coherent_state(0.0), R04)
    with pytest.raises(BranchImpossible):
        collapse_on_detection(s, 1)


def test_detection_needs_normalized_two_mode_state():
    with pytest.raises(GaussPolyError):
        detection_probability(coherent_state(0), 0)
    with pytest.raises(GaussPolyError):
        detection_probability(split_coherent().scaled(2.0), 0)


def test_fidelity_examples():
    assert fidelity(coherent_state(0), coherent_state(1)) == pytest.approx(math.exp(-1), rel=1e-13)
    # Gaussian overlap oracle by quadrature
    f = lambda p, x: 2 * math.pi * evaluate(coherent_state(0), [x, p]) * evaluate(coherent_state(1), [x, p])
    assert integrate.dblquad(f, -8, 8, -8, 8)[0] == pytest.approx(0.36788, abs=1e-5)
    assert fidelity(coherent_state(0), fock_state(1)) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(GaussPolyError):
        fidelity(coherent_state(0), split_coherent())


# -- properties ---------------------------------------------------------------

amplitudes = st.complex_numbers(max_magnitude=1.2, allow_nan=False, allow_infinity=False)


@st.composite
def inputs(draw):
    if draw(st.booleans()):
        return coherent_state(draw(amplitudes))
    return fock_state(draw(st.integers(0, 3)))


@given(inputs(), inputs(), st.floats(0.0, 0.9))
def test_photon_number_conserved(a, b, r):
    s = beam_split(a, b, BeamSplitter.from_r(r))
    assert mean_photon_number(s) == pytest.approx(mean_photon_number(a) + mean_photon_number(b), abs=1e-10)


@given(inputs(), inputs(), st.floats(0.0, 0.9))
def test_detection_completeness(a, b, r):
    s = beam_split(a, b, BeamSplitter.from_r(r))
    total = sum(detection_probability(s, n) for n in range(21))
    assert total == pytest.approx(1.0, abs=1e-10)


@given(inputs(), inputs(), st.floats(0.05, 0.9))
def test_weighted_marginal_and_purity(a, b, r):
    s = beam_split(a, b, BeamSplitter.from_r(r))
    marg = integrate_modes(s, [1])
    acc = dict()
    for n in range(21):
        try:
            prob, out = collapse_on_detection(s, n)
        except BranchImpossible:
            continue
        if prob > 1e-6:
            assert purity(out) == pytest.approx(1.0, abs=1e-10)
        assert np.allclose(out.mean, marg.mean) and np.allclose(out.precision, marg.precision)
        for e, c in out.poly.items():
            acc[e] = acc.get(e, 0.0) + prob * c
    keys = set(acc) | set(marg.poly)
    assert max(abs(acc.get(e, 0.0) - marg.poly.get(e, 0.0)) for e in keys) < 1e-10


@given(inputs(), inputs())
def test_fidelity_symmetric(a, b):
    assert fidelity(a, b) == pytest.approx(fidelity(b, a), abs=1e-12)
