import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cheegerlab import harmonic as hm
from cheegerlab.errors import DimensionError


def naive_dft(f):
    n = len(f)
    x = np.arange(n)
    return np.array([np.sum(f * np.exp(-2j * np.pi * k * x / n)) for k in range(n)])


def naive_convolve(f, g):
    n = len(f)
    return np.array([sum(f[y] * g[(x - y) % n] for y in range(n)) for x in range(n)])


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def complex_signals(draw, n=None):
    n = n or draw(st.integers(1, 24))
    re = draw(arrays(np.float64, n, elements=finite))
    im = draw(arrays(np.float64, n, elements=finite))
    return re + 1j * im


@st.composite
def signal_pairs(draw):
    n = draw(st.integers(1, 24))
    return draw(complex_signals(n)), draw(complex_signals(n))


def test_dft_matches_direct_sum(rng):
    for n in (1, 2, 5, 16, 31):
        f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        np.testing.assert_allclose(hm.dft(f), naive_dft(f), atol=1e-10)
        np.testing.assert_allclose(hm.idft(hm.dft(f)), f, atol=1e-12)


def test_convolution_examples():
    np.testing.assert_allclose(hm.convolve([1, 1, 0, 0], [1, 1, 0, 0]), [1, 2, 1, 0], atol=1e-15)
    f = np.array([0.3, -1.0, 2.0, 0.5, 0.0])
    np.testing.assert_allclose(hm.convolve(f, hm.delta(5)), f, atol=1e-15)


def test_involution_example():
    np.testing.assert_allclose(hm.involute([0, 1j, 0, 0]), [0, 0, 0, -1j])


def test_translate_and_inner():
    f = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(hm.translate(f, 1), [4.0, 1.0, 2.0, 3.0])
    assert hm.inner([1j, 0], [1, 0]) == 1j
    assert hm.norm([3, 4]) == 5.0


def test_order_mismatch_raises():
    with pytest.raises(DimensionError):
        hm.convolve(np.ones(4), np.ones(5))


def test_cyclic_abs():
    np.testing.assert_array_equal(hm.cyclic_abs(6), [0, 1, 2, 3, 2, 1])


@settings(max_examples=60, deadline=None)
@given(complex_signals())
def test_plancherel(f):
    assert np.isclose(np.linalg.norm(hm.dft(f)) ** 2, len(f) * np.linalg.norm(f) ** 2, rtol=1e-9, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(signal_pairs())
def test_convolution_theorem(pair):
    f, g = pair
    np.testing.assert_allclose(hm.convolve(f, g), naive_convolve(f, g), atol=1e-8 * (1 + np.abs(f).sum() * np.abs(g).sum()))


@settings(max_examples=60, deadline=None)
@given(signal_pairs())
def test_convolution_norm_invariant_under_involution(pair):
    f, g = pair
    a = np.linalg.norm(hm.convolve(f, g))
    b = np.linalg.norm(hm.convolve(f, hm.involute(g)))
    assert np.isclose(a, b, rtol=1e-9, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(complex_signals())
def test_involution_is_an_involution(f):
    np.testing.assert_array_equal(hm.involute(hm.involute(f)), f)
