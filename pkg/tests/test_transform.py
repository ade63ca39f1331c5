import numpy as np
import pytest

from cheegerlab import harmonic as hm
from cheegerlab.errors import DimensionError
from cheegerlab.filterbank import build_custom, build_overlapping_shannon, build_shannon, random_bank
from cheegerlab.transform import (
    CoefficientField,
    KernelOperator,
    analyze,
    apply_kernel,
    isometry_defect,
    inversion_residual,
    kernel_entry,
    random_field,
    rkhs_defect,
    synthesize,
)


def test_analysis_matches_direct_convolution(rng):
    bank = random_bank(7, 3, rng, "complex")
    f = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    F = analyze(bank, f)
    for i, lab in enumerate(bank.labels):
        np.testing.assert_allclose(F.values[:, i], hm.convolve(f, hm.involute(bank.filter(lab))), atol=1e-12)


@pytest.mark.parametrize("field", ["real", "complex"])
def test_isometry_on_random_banks(rng, field):
    bank = random_bank(9, 4, rng, field)
    assert isometry_defect(bank, rng=rng) < 1e-12
    assert inversion_residual(bank, rng=rng) < 1e-12


def test_doubled_bank_defect():
    bank = build_shannon(16).scaled(2.0)
    assert isometry_defect(bank) == pytest.approx(1.0)


def test_zero_bank_defect():
    assert isometry_defect(build_custom(np.zeros((1, 8)))) == pytest.approx(1.0)


def test_adjoint_relation(rng):
    bank = random_bank(6, 3, rng, "complex")
    f = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    G = random_field(bank, rng, in_range=False)
    lhs = analyze(bank, f).inner(G)
    rhs = np.vdot(synthesize(bank, G), f)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_kernel_is_a_projection(rng):
    bank = build_overlapping_shannon(16, 0.25)
    G = random_field(bank, rng, in_range=False)
    KG = apply_kernel(bank, G)
    np.testing.assert_allclose(apply_kernel(bank, KG).values, KG.values, atol=1e-12)
    assert rkhs_defect(bank, KG) < 1e-12
    assert rkhs_defect(bank, G) > 1e-3


def test_kernel_matrix_against_entries(rng):
    bank = random_bank(5, 3, rng, "complex")
    op = KernelOperator(bank)
    K = op.kernel_matrix()
    L = len(bank)
    for p, q in [(0, 0), (3, 7), (14, 2), (8, 8)]:
        x, a = divmod(p, L)
        y, b = divmod(q, L)
        assert K[p, q] == pytest.approx(kernel_entry(bank, x, bank.labels[a], y, bank.labels[b]), abs=1e-12)
    np.testing.assert_allclose(K, K.conj().T, atol=1e-12)


def test_dense_kernel_agrees_with_fft_path(rng):
    bank = random_bank(6, 4, rng, "real")
    G = random_field(bank, rng, in_range=False)
    dense = KernelOperator(bank).dense() @ G.flat()
    np.testing.assert_allclose(dense, apply_kernel(bank, G).flat(), atol=1e-12)


def test_field_shape_checked(rng):
    bank = build_shannon(8)
    with pytest.raises(DimensionError):
        synthesize(bank, np.zeros((8, 2)))
    with pytest.raises(DimensionError):
        analyze(bank, np.zeros(7))


def test_real_input_stays_real():
    bank = build_shannon(16)
    F = analyze(bank, hm.delta(16, 3))
    assert F.field == "real" and not np.iscomplexobj(F.values)
    assert isinstance(F, CoefficientField)
