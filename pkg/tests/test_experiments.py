import math

import numpy as np
import pytest

from cheegerlab import experiments as ex
from cheegerlab.filterbank import build_overlapping_shannon, build_shannon, random_bank
from cheegerlab.graph import build_graph


def test_bump_is_real_unit_and_band_limited():
    h = ex.localized_bump(256)
    assert np.isrealobj(h)
    assert np.linalg.norm(h) == pytest.approx(1.0)
    spec = np.abs(np.fft.fft(h))
    k = np.minimum(np.arange(256), 256 - np.arange(256))
    assert np.all(spec[(k < 20) | (k > 120)] < 1e-12)


def test_bump_graph_connected():
    bank = build_overlapping_shannon(256, 0.25)
    assert len(build_graph(bank, ex.localized_bump(256)).components()) == 1


def test_stability_quotient_orthogonal_pair():
    F = np.array([[1.0, 0.0], [0.0, 1.0]])
    G = np.array([[1.0, 0.0], [0.0, -1.0]])
    # moduli agree exactly, so the quotient is undefined
    assert math.isnan(ex.stability_quotient(F, G, np.ones(2), "real"))


def test_empirical_sits_between_bounds(rng):
    bank = random_bank(5, 4, rng, "real")
    rep = ex.empirical_stability(bank, rng.standard_normal(5), budget=16, seed=1)
    assert rep.lower_certified and rep.upper_certified
    assert rep.lower_bound - 1e-9 <= rep.empirical_lower <= rep.upper_bound + 1e-9


def test_zero_constant_reports_not_retrievable():
    bank = build_shannon(16)
    rep = ex.empirical_stability(bank, bank.filter(2) + bank.filter(3), budget=4)
    assert rep.lower_bound == math.inf
    assert rep.to_dict()["stably_retrievable"] is False


def test_complex_disconnected_temporal_gives_infinite_upper(rng):
    bank = random_bank(4, 4, rng, "complex")
    rep = ex.empirical_stability(bank, rng.standard_normal(4) + 1j * rng.standard_normal(4), budget=4)
    assert rep.field == "complex"
    assert rep.upper_kind == "temporal-graph"
    assert rep.empirical_lower <= rep.upper_bound


def test_sweep_order_independent_of_threads():
    bank = build_overlapping_shannon(32, 0.25)
    h = ex.localized_bump(32)
    a = ex.separation_sweep(bank, h, [8, 1, 4], budget=2)
    b = ex.separation_sweep(bank, h, [8, 1, 4], budget=2, threads=3)
    assert a == b
    assert [r["shift"] for r in a] == [8, 1, 4]


def test_sweep_trend_is_increasing():
    bank = build_overlapping_shannon(64, 0.25)
    recs = ex.separation_sweep(bank, ex.localized_bump(64), [1, 4, 8, 16, 32], budget=2)
    assert ex.sweep_trend(recs) > 0.5


def test_sweep_rejects_empty_shift_list():
    with pytest.raises(ValueError):
        ex.separation_sweep(build_shannon(8), np.ones(8), [])


@pytest.mark.parametrize("size", [16, 32, 64, 128, 256])
def test_instability_witness_normalised(size):
    w = ex.instability_witness(size, 0.05)
    assert w.distance == pytest.approx(1.0)
    assert w.achieved_eps < 0.5


def test_instability_witness_shrinks_with_size():
    eps = [ex.instability_witness(n, 0.05).achieved_eps for n in (16, 32, 64, 128, 256)]
    assert all(a > b for a, b in zip(eps, eps[1:]))
    assert ex.instability_witness(256, 0.05).reached


def test_corpus_sizes():
    corpus = ex.small_corpus(max_size=20)
    assert len(corpus) == 21
    assert all(b.n * len(b) <= 20 for _, b, _ in corpus)
    names = [c[0] for c in corpus]
    assert len(set(names)) == len(names)
