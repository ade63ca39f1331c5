import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cheegerlab import _search
from cheegerlab import kernel_cheeger as kc
from cheegerlab.errors import BudgetError, InapplicableBoundError, PreconditionError, UndefinedInputError
from cheegerlab.filterbank import build_shannon, random_bank
from cheegerlab.transform import CoefficientField, analyze, random_field


def brute_force(bank, F):
    """Minimum quotient over every mask, by direct evaluation."""
    n, L = F.shape
    best, arg = math.inf, None
    for bits in itertools.product([False, True], repeat=n * L):
        S = np.array(bits).reshape(n, L)
        q = kc.quotient(bank, F, S)
        if q < best:
            best, arg = q, S
    return (1.0, None) if math.isinf(best) else (best, arg)


@pytest.mark.parametrize("field", ["real", "complex"])
@pytest.mark.parametrize("shape", [(3, 3), (4, 2), (2, 5)])
def test_exhaustive_matches_brute_force(field, shape):
    rng = np.random.default_rng(sum(shape) + (field == "real"))
    bank = random_bank(*shape, rng, field)
    F = random_field(bank, rng)
    res = kc.kernel_cheeger(bank, F)
    expected, _ = brute_force(bank, F)
    assert res.certified
    assert res.value == pytest.approx(expected, abs=1e-12)


def test_exhaustive_on_field_outside_range(rng):
    bank = random_bank(3, 3, rng, "complex")
    F = random_field(bank, rng, in_range=False)
    assert kc.kernel_cheeger(bank, F).value == pytest.approx(brute_force(bank, F)[0], abs=1e-12)


def test_matrix_free_path_agrees(monkeypatch, rng):
    bank = random_bank(4, 4, rng, "complex")
    F = random_field(bank, rng, in_range=False).values
    dense = kc._kernel_problem(bank, F, 0.0)
    a = kc.kernel_cheeger(bank, F, "local", budget=4, seed=5)
    monkeypatch.setattr(kc, "DENSE_LIMIT", 0)
    free = kc._kernel_problem(bank, F, 0.0)
    assert free.Q is None
    for _ in range(30):
        s = rng.random(F.size) < 0.5
        assert free.ratio(s) == pytest.approx(dense.ratio(s), abs=1e-13)
    b = kc.kernel_cheeger(bank, F, "local", budget=4, seed=5)
    assert b.value == pytest.approx(a.value, abs=1e-13)


def test_commutator_forms_agree(rng):
    bank = random_bank(5, 3, rng, "complex")
    F = random_field(bank, rng, in_range=False)
    for _ in range(20):
        S = rng.random(F.shape) < 0.5
        assert kc.commutator_norm_sq(bank, F, S) == pytest.approx(kc.commutator_direct_sq(bank, F, S), abs=1e-12)


def test_estimates_bound_the_exact_value(rng):
    bank = random_bank(4, 5, rng, "real")
    F = random_field(bank, rng)
    exact = kc.kernel_cheeger(bank, F).value
    for strategy in ("product", "local"):
        res = kc.kernel_cheeger(bank, F, strategy, budget=8, seed=3)
        assert not res.certified
        assert res.value >= exact - 1e-12


def test_local_search_is_seed_deterministic(rng):
    bank = random_bank(8, 4, rng, "complex")
    F = random_field(bank, rng)
    a = kc.kernel_cheeger(bank, F, "local", budget=6, seed=11)
    b = kc.kernel_cheeger(bank, F, "local", budget=6, seed=11)
    assert a.value == b.value and a.witness_bits() == b.witness_bits()


def test_disjoint_bands_give_zero():
    bank = build_shannon(16)
    f = bank.filter(2) + bank.filter(3)
    res = kc.kernel_cheeger(bank, analyze(bank, f), "product")
    assert res.value == pytest.approx(0.0, abs=1e-12)
    assert kc.stability_lower_bound(0.0) == math.inf


def test_errors(rng):
    bank = random_bank(5, 5, rng, "real")
    with pytest.raises(BudgetError):
        kc.kernel_cheeger(bank, random_field(bank, rng))
    with pytest.raises(UndefinedInputError):
        kc.kernel_cheeger(bank, np.zeros((5, 5)), "product")
    with pytest.raises(PreconditionError):
        kc.build_test_function(bank, random_field(bank, rng, in_range=False), np.ones((5, 5), bool))
    with pytest.raises(InapplicableBoundError):
        kc.stability_upper_bound_real(0.5, "complex")
    with pytest.raises(ValueError):
        kc.stability_lower_bound(1.5)


def test_bounds_closed_form():
    assert kc.stability_lower_bound(0.2) == pytest.approx(2.0)
    assert kc.stability_upper_bound_real(0.2) == pytest.approx(5.0)
    assert kc.stability_lower_bound(1.0) == 0.0


def test_single_point_has_no_admissible_mask():
    bank = random_bank(1, 1, np.random.default_rng(0), "real")
    F = analyze(bank, [2.0])
    res = kc.kernel_cheeger(bank, F)
    assert res.value == 1.0 and res.witness is None


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["real", "complex"]))
def test_test_function_relations(seed, field):
    rng = np.random.default_rng(seed)
    bank = random_bank(int(rng.integers(2, 6)), int(rng.integers(1, 4)), rng, field)
    F = random_field(bank, rng)
    scale = max(F.norm_sq(), 1e-300)
    S = rng.random(F.shape) < 0.5
    r = kc.verify_gs_identities(bank, F, S)
    assert abs(r["distance_lhs"] - r["distance_rhs"]) <= 1e-9 * scale
    assert r["modulus_lhs"] <= r["modulus_rhs"] + 1e-9 * scale


def test_sign_alignment_mask():
    F = np.array([[1.0, -2.0], [0.0, 3.0]])
    H = np.array([[2.0, 1.0], [-1.0, 3.0]])
    np.testing.assert_array_equal(kc.sign_alignment_mask(F, H), [[True, False], [True, True]])
    with pytest.raises(InapplicableBoundError):
        kc.sign_alignment_mask(F + 1j, H)


def test_weighted_constant_matches_brute_force(rng):
    bank = random_bank(3, 3, rng, "real")
    F = random_field(bank, rng).values
    weight = kc.Weight.from_kernel(bank)
    res = kc.weighted_kernel_cheeger(F, weight)
    best = min(
        kc.weighted_quotient(F, weight, np.array(bits))
        for bits in itertools.product([False, True], repeat=F.size)
    )
    assert res.value == pytest.approx(best, abs=1e-12)


def test_weighted_constant_is_phase_blind(rng):
    bank = random_bank(3, 3, rng, "complex")
    F = random_field(bank, rng).values
    weight = kc.Weight.from_kernel(bank)
    phases = np.exp(2j * np.pi * rng.random(F.shape))
    assert kc.weighted_kernel_cheeger(F, weight).value == pytest.approx(
        kc.weighted_kernel_cheeger(F * phases, weight).value, abs=1e-12
    )


def test_weight_validation():
    with pytest.raises(ValueError):
        kc.Weight(np.array([[0.0, 1.0], [2.0, 0.0]]), np.ones(2))
    with pytest.raises(ValueError):
        kc.Weight(np.zeros((2, 2)), np.ones(2))


def test_result_serialisation(rng):
    bank = random_bank(2, 2, rng, "real")
    res = kc.kernel_cheeger(bank, random_field(bank, rng))
    d = res.to_dict()
    assert set(d) == {"value", "witness_bits", "strategy", "certified"}
    assert d["witness_bits"].startswith("0x")


def test_search_tie_keeps_first_mask():
    # all masks have the same ratio; the earliest admissible one wins
    p = _search.RatioProblem(c=np.ones(3), w=np.ones(3), floor=0.0, Q=np.zeros((3, 3)))
    out = _search.exhaustive(p)
    assert out.mask.tolist() == [True, False, False]
