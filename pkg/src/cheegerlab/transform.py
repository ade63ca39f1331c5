"""Generalized wavelet transform on Z_N x Labels and its reproducing kernel.

Coefficient fields are stored as (n, L) arrays.  The L^2 inner product on
Z_N x Labels weights label ``l`` by ``nu_l``; with that weighting the
synthesis operator below is the true adjoint of analysis, and
``apply_kernel`` is the orthogonal projection onto the range of analysis.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import harmonic as hm
from .errors import DimensionError
from .filterbank import FilterBank

DENSE_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class CoefficientField:
    values: np.ndarray
    labels: tuple
    nu: np.ndarray
    field: str = "complex"

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2 or values.shape[1] != len(self.labels):
            raise DimensionError(
                f"coefficient values must have shape (n, {len(self.labels)}), got {values.shape}"
            )
        if self.field == "real":
            if np.iscomplexobj(values):
                if np.any(values.imag != 0):
                    raise ValueError("real field with non-zero imaginary parts")
                values = values.real
            values = values.astype(np.float64)
        else:
            values = values.astype(np.complex128)
        if not np.all(np.isfinite(values)):
            raise ValueError("coefficient field contains NaN or Inf")
        values.setflags(write=False)
        nu = np.asarray(self.nu, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "nu", nu)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self):
        return self.values.shape

    @property
    def size(self) -> int:
        return self.values.size

    def flat(self) -> np.ndarray:
        """Values flattened with index p = x * L + label_index."""
        return self.values.reshape(-1)

    @property
    def point_measure(self) -> np.ndarray:
        """Measure of each point of X in flat order."""
        return np.tile(self.nu, self.n)

    def with_values(self, values) -> "CoefficientField":
        values = np.asarray(values)
        field = self.field if not np.iscomplexobj(values) else "complex"
        if field == "complex" and self.field == "real" and not np.any(values.imag):
            field = "real"
        return CoefficientField(values, self.labels, self.nu, field)

    def norm_sq(self) -> float:
        return field_norm_sq(self.values, self.nu)

    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq()))

    def inner(self, other) -> complex:
        return field_inner(self.values, _values(other), self.nu)

    def __add__(self, other):
        return self.with_values(self.values + _values(other))

    def __sub__(self, other):
        return self.with_values(self.values - _values(other))

    def __neg__(self):
        return self.with_values(-self.values)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __abs__(self):
        return self.with_values(np.abs(self.values))


def _values(F):
    return F.values if isinstance(F, CoefficientField) else np.asarray(F)


def field_inner(a, b, nu) -> complex:
    """<a, b> = sum_l nu_l sum_x a(x, l) conj(b(x, l))."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"field shapes differ: {a.shape} vs {b.shape}")
    per_label = np.einsum("xl,xl->l", a, np.conj(b))
    return complex(per_label @ np.asarray(nu))


def field_norm_sq(a, nu) -> float:
    a = np.asarray(a)
    return float(np.sum(np.abs(a) ** 2, axis=0) @ np.asarray(nu))


def _signal_array(bank: FilterBank, f) -> np.ndarray:
    arr = np.asarray(f.values if isinstance(f, hm.Signal) else f)
    arr = hm.as_vector(arr)
    if arr.shape[0] != bank.n:
        raise DimensionError(f"signal order {arr.shape[0]} does not match bank order {bank.n}")
    return arr


def _result_field(bank: FilterBank, real_input: bool) -> str:
    return "real" if bank.field == "real" and real_input else "complex"


def analyze(bank: FilterBank, f) -> CoefficientField:
    """F(x, l) = (f * psi_l^*)(x), computed as ifft(fhat * conj(psi_hat_l))."""
    arr = _signal_array(bank, f)
    spectrum = np.fft.fft(arr)[:, None] * np.conj(bank.profiles.T)
    values = np.fft.ifft(spectrum, axis=0)
    field = _result_field(bank, hm.is_real(f) and not np.iscomplexobj(arr))
    if field == "real":
        values = values.real
    return CoefficientField(values, bank.labels, bank.nu, field)


def _check_field_shape(bank: FilterBank, F) -> np.ndarray:
    values = _values(F)
    if values.shape != (bank.n, len(bank)):
        raise DimensionError(f"field shape {values.shape} does not match bank ({bank.n}, {len(bank)})")
    return values


def synthesize(bank: FilterBank, F) -> np.ndarray:
    """W^* F = sum_l nu_l F(., l) * psi_l."""
    values = _check_field_shape(bank, F)
    spectra = np.fft.fft(values, axis=0)
    total = (spectra * bank.profiles.T) @ bank.nu
    out = np.fft.ifft(total)
    if bank.field == "real" and not np.iscomplexobj(values):
        return out.real
    return out


def apply_kernel(bank: FilterBank, G) -> CoefficientField:
    """K G = analyze(synthesize(G)), the projection onto the range of analysis."""
    values = _check_field_shape(bank, G)
    spectra = np.fft.fft(values, axis=0)
    total = (spectra * bank.profiles.T) @ bank.nu
    out = np.fft.ifft(total[:, None] * np.conj(bank.profiles.T), axis=0)
    field = "real" if bank.field == "real" and not np.iscomplexobj(values) else "complex"
    if field == "real":
        out = out.real
    return CoefficientField(out, bank.labels, bank.nu, field)


def kernel_table(bank: FilterBank) -> np.ndarray:
    """c[l, l', d] = (psi_l' * psi_l^*)(d) for all label pairs and offsets."""
    prods = np.conj(bank.profiles)[:, None, :] * bank.profiles[None, :, :]
    return np.fft.ifft(prods, axis=2)


def kernel_entry(bank: FilterBank, x: int, label, x2: int, label2) -> complex:
    """k((x, l), (x', l')) = (psi_l' * psi_l^*)(x - x')."""
    n = bank.n
    for pos in (x, x2):
        if not 0 <= int(pos) < n:
            raise IndexError(f"position {pos} outside Z_{n}")
    i, j = bank.index(label), bank.index(label2)
    spectrum = bank.profiles[j] * np.conj(bank.profiles[i])
    d = (int(x) - int(x2)) % n
    # single DFT coefficient of the inverse transform
    phase = np.exp(2j * np.pi * np.arange(n) * d / n)
    return complex(np.sum(spectrum * phase) / n)


class KernelOperator:
    """Reproducing-kernel projection for a bank, applied matrix-free.

    ``dense()`` materialises the |X| x |X| matrix acting on flat fields
    (p = x * L + l); it already includes the measure of the column point,
    so ``dense() @ F.flat()`` equals ``apply(F).flat()``.
    """

    def __init__(self, bank: FilterBank):
        self.bank = bank

    @property
    def size(self) -> int:
        return self.bank.n * len(self.bank)

    def apply(self, G) -> CoefficientField:
        return apply_kernel(self.bank, G)

    def __call__(self, G):
        return self.apply(G)

    @cached_property
    def table(self) -> np.ndarray:
        return kernel_table(self.bank)

    def kernel_matrix(self, limit: int = DENSE_LIMIT) -> np.ndarray:
        """Plain kernel values k(p, q) in flat order (no measure)."""
        n, L = self.bank.n, len(self.bank)
        if n * L > limit:
            raise MemoryError(f"|X| = {n * L} exceeds the dense limit {limit}")
        xs = np.arange(n)
        d = (xs[:, None] - xs[None, :]) % n
        # out[x, l, x', l'] = table[l, l', x - x']
        out = self.table[:, :, d]  # (l, l', x, x')
        out = np.transpose(out, (2, 0, 3, 1)).reshape(n * L, n * L)
        if self.bank.field == "real":
            out = out.real
        return out

    def dense(self, limit: int = DENSE_LIMIT) -> np.ndarray:
        return self.kernel_matrix(limit) * np.tile(self.bank.nu, self.bank.n)[None, :]


def isometry_defect(bank: FilterBank, trials: int = 20, rng=None) -> float:
    """Max over random signals of | ||W f|| - ||f|| | / ||f||."""
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(trials):
        f = _random_signal(bank, rng)
        nf = np.linalg.norm(f)
        worst = max(worst, abs(analyze(bank, f).norm() - nf) / nf)
    return worst


def inversion_residual(bank: FilterBank, trials: int = 20, rng=None) -> float:
    """Max over random signals of ||W^* W f - f|| / ||f||."""
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(trials):
        f = _random_signal(bank, rng)
        back = synthesize(bank, analyze(bank, f))
        worst = max(worst, np.linalg.norm(back - f) / np.linalg.norm(f))
    return float(worst)


def _random_signal(bank: FilterBank, rng) -> np.ndarray:
    if bank.field == "real":
        return rng.standard_normal(bank.n)
    return rng.standard_normal(bank.n) + 1j * rng.standard_normal(bank.n)


def random_field(bank: FilterBank, rng, in_range: bool = True) -> CoefficientField:
    """Random coefficient field, projected into the RKHS by default."""
    n, L = bank.n, len(bank)
    if bank.field == "real":
        values = rng.standard_normal((n, L))
    else:
        values = rng.standard_normal((n, L)) + 1j * rng.standard_normal((n, L))
    G = CoefficientField(values, bank.labels, bank.nu, bank.field)
    return apply_kernel(bank, G) if in_range else G


def rkhs_defect(bank: FilterBank, F) -> float:
    """||K F - F|| / ||F|| (0 for the zero field)."""
    values = _check_field_shape(bank, F)
    nf = np.sqrt(field_norm_sq(values, bank.nu))
    if nf == 0:
        return 0.0
    diff = apply_kernel(bank, values).values - values
    return float(np.sqrt(field_norm_sq(diff, bank.nu)) / nf)
