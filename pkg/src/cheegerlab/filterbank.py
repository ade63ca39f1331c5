"""Filter families on Z_N and the conditions imposed on them.

A bank stores each filter by its frequency profile psi_hat (one row per
label) together with a positive weight nu per label.  The Calderon
condition then reads ``sum_l nu_l |psi_hat_l(xi)|**2 == 1`` on every bin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from . import harmonic as hm
from .errors import (
    DegenerateOverlapError,
    DimensionError,
    UnsupportedOrderError,
)

LOWPASS = "low"
HERMITIAN_TOL = 1e-12
SI_RELATIVE_CUTOFF = 1e-10


@dataclass(frozen=True, eq=False)
class FilterBank:
    profiles: np.ndarray
    nu: np.ndarray
    labels: tuple
    field: str = "complex"

    def __post_init__(self):
        profiles = np.array(self.profiles, dtype=np.complex128)
        if profiles.ndim != 2:
            raise DimensionError("profiles must be a (labels, n) array")
        if profiles.shape[0] == 0:
            raise ValueError("a filter bank needs at least one label")
        if not np.all(np.isfinite(profiles)):
            raise ValueError("profiles contain NaN or Inf")
        nu = np.array(self.nu, dtype=np.float64).reshape(-1)
        labels = tuple(self.labels)
        if not (len(labels) == len(nu) == profiles.shape[0]):
            raise DimensionError(
                f"{len(labels)} labels, {len(nu)} weights and {profiles.shape[0]} profiles"
            )
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be unique")
        if np.any(nu <= 0) or not np.all(np.isfinite(nu)):
            raise ValueError("all measure weights must be positive and finite")
        if self.field not in hm.FIELDS:
            raise ValueError(f"field must be one of {hm.FIELDS}")
        if self.field == "real":
            mirrored = np.conj(np.roll(profiles[:, ::-1], 1, axis=1))
            err = np.max(np.abs(profiles - mirrored))
            if err > HERMITIAN_TOL * max(1.0, np.max(np.abs(profiles))):
                raise ValueError(f"real bank profiles are not Hermitian (error {err:.3g})")
        profiles.setflags(write=False)
        nu.setflags(write=False)
        object.__setattr__(self, "profiles", profiles)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.profiles.shape[1]

    def __len__(self):
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label!r}") from None

    @cached_property
    def filters(self) -> np.ndarray:
        """Time-domain filters psi_l, one per row (real for real banks)."""
        out = np.fft.ifft(self.profiles, axis=1)
        return out.real if self.field == "real" else out

    @cached_property
    def supports(self) -> np.ndarray:
        """Exact frequency supports as a boolean (labels, n) array."""
        return self.profiles != 0

    @cached_property
    def power(self) -> np.ndarray:
        """|psi_hat_l(xi)|**2 per label and bin."""
        return np.abs(self.profiles) ** 2

    def filter(self, label) -> np.ndarray:
        return self.filters[self.index(label)]

    def scaled(self, factor: float) -> "FilterBank":
        return FilterBank(self.profiles * factor, self.nu, self.labels, self.field)


@dataclass(frozen=True)
class CalderonReport:
    max_deviation: float
    satisfied: bool
    tolerance: float
    worst_bin: int

    def to_dict(self):
        return {
            "max_deviation": self.max_deviation,
            "satisfied": self.satisfied,
            "tolerance": self.tolerance,
            "worst_bin": self.worst_bin,
        }


@dataclass(frozen=True)
class InjectivityReport:
    rank: int
    full_rank: bool
    n: int
    singular_values: np.ndarray = dc_field(repr=False)

    def to_dict(self):
        return {"rank": self.rank, "full_rank": self.full_rank, "n": self.n}


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _dyadic_levels(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 4 or not _is_power_of_two(int(n)):
        raise UnsupportedOrderError(f"dyadic banks need a power of two n >= 4, got {n}")
    return int(n).bit_length() - 2


def shannon_supports(n: int) -> dict:
    """Dyadic bands 2**(j-1) <= |xi| < 2**j for j = 1..log2(n)-1."""
    levels = _dyadic_levels(n)
    mag = hm.cyclic_abs(n)
    return {j: (mag >= 2 ** (j - 1)) & (mag < 2**j) for j in range(1, levels + 1)}


def build_shannon(n: int, with_lowpass: bool = True) -> FilterBank:
    """Real Shannon bank: band indicators, nu = 1.

    Bins 0 and n/2 belong to no dyadic band; they go to a dedicated
    low-pass filter unless ``with_lowpass`` is false, in which case the bank
    leaves them uncovered.
    """
    bands = shannon_supports(n)
    labels, rows = [], []
    if with_lowpass:
        mag = hm.cyclic_abs(n)
        labels.append(LOWPASS)
        rows.append((mag == 0) | (mag == n // 2))
    for j, support in bands.items():
        labels.append(j)
        rows.append(support)
    profiles = np.array(rows, dtype=np.float64)
    return FilterBank(profiles, np.ones(len(labels)), tuple(labels), "real")


def _floor(x: float) -> int:
    return math.floor(x + 1e-9)


def _ceil(x: float) -> int:
    return math.ceil(x - 1e-9)


def overlapping_supports(n: int, eps: float) -> dict:
    """Widened dyadic supports: [2**(j-1) (1-eps), 2**j (1+eps)) rounded outward.

    Band-pass supports stay inside 1 <= |xi| <= n/2; the low-pass support is
    the widened band around DC plus the Nyquist bin when no band reaches it.
    ``eps = 0`` returns the Shannon supports exactly.
    """
    if not 0 <= eps < 1:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    levels = _dyadic_levels(n)
    mag = hm.cyclic_abs(n)
    supports = {}
    for j in range(1, levels + 1):
        lo = max(1, _floor(2 ** (j - 1) * (1 - eps)))
        hi = _ceil(2**j * (1 + eps))
        supports[j] = (mag >= lo) & (mag < hi)
    low = mag < _ceil(1 + eps)
    covered = np.any(list(supports.values()), axis=0)
    low |= (mag == n // 2) & ~covered
    return {LOWPASS: low, **supports}


def build_overlapping_shannon(
    n: int, eps: float, with_lowpass: bool = True, plain_sum: bool = False
) -> FilterBank:
    """Shannon bank with overlapping widened bands.

    The widened indicators phi_j are renormalised as
    ``phi_j / sqrt(sum_k phi_k**2)`` so the Calderon condition holds exactly.
    ``plain_sum=True`` divides by the plain sum instead, which violates
    the condition on every bin covered twice.
    """
    supports = overlapping_supports(n, eps)
    bands = [j for j in supports if j != LOWPASS]
    for a, b in zip(bands, bands[1:]):
        if not np.any(supports[a] & supports[b]):
            raise DegenerateOverlapError(
                f"bands {a} and {b} share no bin at n={n}, eps={eps}"
            )
    labels = ([LOWPASS] if with_lowpass else []) + bands
    phi = np.array([supports[k] for k in labels], dtype=np.float64)
    cover = np.sum(phi**2, axis=0)
    scale = cover if plain_sum else np.sqrt(cover)
    profiles = np.divide(phi, scale, out=np.zeros_like(phi), where=scale > 0)
    return FilterBank(profiles, np.ones(len(labels)), tuple(labels), "real")


def build_custom(profiles, measure=None, labels=None, field=None) -> FilterBank:
    """Wrap user-supplied frequency profiles; ``field`` is inferred when omitted."""
    profiles = np.atleast_2d(np.asarray(profiles))
    if profiles.size == 0:
        raise ValueError("a filter bank needs at least one label")
    count = profiles.shape[0]
    if measure is None:
        measure = np.ones(count)
    if labels is None:
        labels = tuple(range(count))
    if field is None:
        p = profiles.astype(np.complex128)
        mirrored = np.conj(np.roll(p[:, ::-1], 1, axis=1))
        hermitian = np.max(np.abs(p - mirrored)) <= HERMITIAN_TOL * max(1.0, np.max(np.abs(p)))
        field = "real" if hermitian else "complex"
    return FilterBank(profiles, measure, labels, field)


def random_bank(
    n: int,
    count: int,
    rng: np.random.Generator,
    field: str = "complex",
    width: int | None = None,
) -> FilterBank:
    """Random bank with overlapping supports that satisfies Calderon exactly.

    Each filter gets a random positive profile on a cyclic interval of
    frequencies; intervals are staggered so that neighbours overlap and every
    bin is covered.  Real banks use profiles symmetric under xi -> -xi.
    """
    if count < 1 or n < 1:
        raise ValueError("need n >= 1 and at least one filter")
    mag = hm.cyclic_abs(n)
    raw = np.zeros((count, n))
    if field == "real":
        half = n // 2 + 1
        width = width or max(2, math.ceil(2 * half / count))
        starts = np.floor(np.linspace(0, half - 1, count, endpoint=False)).astype(int)
        for i, s in enumerate(starts):
            if i == count - 1:
                s = max(0, min(s, half - width))
            ks = np.arange(s, min(s + width, half))
            levels = rng.uniform(0.2, 1.0, size=ks.size)
            for k, v in zip(ks, levels):
                raw[i, mag == k] = v
    else:
        width = width or max(2, math.ceil(2 * n / count))
        starts = np.floor(np.linspace(0, n, count, endpoint=False)).astype(int)
        for i, s in enumerate(starts):
            ks = (s + np.arange(min(width, n))) % n
            raw[i, ks] = rng.uniform(0.2, 1.0, size=ks.size)
    missing = np.sum(raw, axis=0) == 0
    if np.any(missing):
        raw[rng.integers(count), missing] = 1.0
    raw /= np.sqrt(np.sum(raw**2, axis=0))
    if field == "complex":
        raw = raw * np.exp(2j * np.pi * rng.uniform(size=raw.shape))
    return FilterBank(raw, np.ones(count), tuple(range(count)), field)


def check_calderon(bank: FilterBank, tol: float = 1e-10) -> CalderonReport:
    total = bank.nu @ bank.power
    dev = np.abs(total - 1.0)
    worst = int(np.argmax(dev))
    return CalderonReport(float(dev[worst]), bool(dev[worst] <= tol), tol, worst)


def check_spectral_injectivity(bank: FilterBank) -> InjectivityReport:
    """Finite rank test: the matrix |psi_hat_l(xi)|**2 must have full column rank."""
    sv = np.linalg.svd(bank.power, compute_uv=False)
    top = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > SI_RELATIVE_CUTOFF * top)) if top > 0 else 0
    return InjectivityReport(rank, rank == bank.n, bank.n, sv)


def fourier_magnitude_consequences(bank: FilterBank, f, g, tol: float = 1e-9) -> dict:
    """Check |W f| = |W g| against the two Fourier-side consequences.

    All comparisons are sup-norm differences; ``tol`` is relative to
    max(||f||, ||g||) in the time domain and to sqrt(n) times that on the
    frequency side (Plancherel scaling).
    """
    f, g = hm.as_vector(f), hm.as_vector(g)
    if f.shape[0] != bank.n or g.shape[0] != bank.n:
        raise DimensionError("signals and bank have different orders")
    scale = max(np.linalg.norm(f), np.linalg.norm(g), np.finfo(float).tiny)
    fhat, ghat = np.fft.fft(f), np.fft.fft(g)
    fb_hat = fhat[None, :] * np.conj(bank.profiles)
    gb_hat = ghat[None, :] * np.conj(bank.profiles)
    fb = np.fft.ifft(fb_hat, axis=1)
    gb = np.fft.ifft(gb_hat, axis=1)
    time_gap = np.max(np.abs(np.abs(fb) - np.abs(gb)))
    premise = time_gap <= tol * scale
    conclusion_i = np.max(np.abs(np.abs(fhat) - np.abs(ghat))) <= tol * scale * np.sqrt(bank.n)
    band_hat_gap = np.max(np.abs(np.abs(fb_hat) - np.abs(gb_hat)))
    conclusion_ii = premise and band_hat_gap <= tol * scale * np.sqrt(bank.n)
    return {
        "premise_holds": bool(premise),
        "conclusion_i": bool(conclusion_i),
        "conclusion_ii": bool(conclusion_ii),
    }
