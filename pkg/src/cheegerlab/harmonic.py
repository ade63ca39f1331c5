"""Harmonic analysis on the cyclic group Z_N.

Conventions: counting measure on Z_N, unnormalised forward DFT

    fhat(xi) = sum_x f(x) exp(-2 pi i x xi / N),

so that <f, g> = (1/N) <fhat, ghat>.  All functions accept plain array-likes
as well as :class:`Signal` and return numpy arrays.  Real inputs stay real
wherever the operation preserves realness.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

FIELDS = ("real", "complex")


@dataclass(frozen=True)
class Signal:
    """A vector on Z_N with an explicit scalar field.

    For ``field="real"`` the stored values are a float array, so every
    imaginary part is exactly zero by construction.
    """

    values: np.ndarray
    field: str = "complex"

    def __post_init__(self):
        if self.field not in FIELDS:
            raise ValueError(f"field must be one of {FIELDS}, got {self.field!r}")
        values = np.asarray(self.values)
        if values.ndim != 1 or values.size == 0:
            raise DimensionError("a signal is a non-empty one-dimensional array")
        if self.field == "real":
            if np.iscomplexobj(values):
                if np.any(values.imag != 0):
                    raise ValueError("real signal has non-zero imaginary parts")
                values = values.real
            values = values.astype(np.float64)
        else:
            values = values.astype(np.complex128)
        if not np.all(np.isfinite(values)):
            raise ValueError("signal contains NaN or Inf")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values.copy() if copy else self.values
        return self.values.astype(dtype)

    def __len__(self):
        return self.n

    @classmethod
    def infer(cls, values) -> "Signal":
        """Wrap an array, choosing the real field when it has a real dtype."""
        values = np.asarray(values)
        return cls(values, "complex" if np.iscomplexobj(values) else "real")


def as_vector(f) -> np.ndarray:
    a = np.asarray(f)
    if a.ndim != 1:
        raise DimensionError(f"expected a 1-D signal, got shape {a.shape}")
    if not np.iscomplexobj(a):
        a = a.astype(np.float64)
    return a


def is_real(f) -> bool:
    if isinstance(f, Signal):
        return f.field == "real"
    return not np.iscomplexobj(np.asarray(f))


def _check_same_order(f, g):
    if f.shape[0] != g.shape[0]:
        raise DimensionError(f"group orders differ: {f.shape[0]} vs {g.shape[0]}")


def dft(f) -> np.ndarray:
    return np.fft.fft(as_vector(f))


def idft(spectrum) -> np.ndarray:
    return np.fft.ifft(as_vector(spectrum))


def convolve(f, g) -> np.ndarray:
    """Circular convolution (f*g)(x) = sum_y f(y) g(x - y)."""
    f, g = as_vector(f), as_vector(g)
    _check_same_order(f, g)
    out = np.fft.ifft(np.fft.fft(f) * np.fft.fft(g))
    if not (np.iscomplexobj(f) or np.iscomplexobj(g)):
        return out.real
    return out


def involute(g) -> np.ndarray:
    """g*(x) = conj(g(-x))."""
    g = as_vector(g)
    return np.conj(np.roll(g[::-1], 1))


def translate(f, x0: int) -> np.ndarray:
    """(T_x0 f)(x) = f(x - x0), indices taken mod N."""
    return np.roll(as_vector(f), int(x0))


def inner(f, g) -> complex:
    """<f, g> = sum_x f(x) conj(g(x))."""
    f, g = as_vector(f), as_vector(g)
    _check_same_order(f, g)
    return complex(np.vdot(g, f))


def norm(f) -> float:
    return float(np.linalg.norm(as_vector(f)))


def delta(n: int, x0: int = 0) -> np.ndarray:
    out = np.zeros(n)
    out[x0 % n] = 1.0
    return out


def cyclic_abs(n: int) -> np.ndarray:
    """|xi| on Z_N, i.e. min(xi, N - xi) for each frequency bin."""
    k = np.arange(n)
    return np.minimum(k, n - k)
