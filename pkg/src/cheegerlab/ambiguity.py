"""Band projections and the sign/phase ambiguities they generate.

If the labels split into groups U_j that are unions of equivalence classes
of f, then g = sum_j sigma_j f_{U_j} has |W g| = |W f| for any unimodular
sigma_j, and g is a genuinely different signal as soon as two groups carry
different signs.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import harmonic as hm
from .errors import InvalidSpecError, PhasePropagationError
from .filterbank import FilterBank
from .graph import EquivalenceDecomposition, equivalence_decomposition
from .transform import analyze, field_norm_sq

PROJECTION_TOL = 1e-9


def _signal(f) -> np.ndarray:
    return hm.as_vector(f.values if isinstance(f, hm.Signal) else f)


def _restore_field(bank: FilterBank, f: np.ndarray, out: np.ndarray) -> np.ndarray:
    if bank.field == "real" and not np.iscomplexobj(f):
        return out.real
    return out


def band_projection(bank: FilterBank, f, labels, check: bool = True, decomposition=None) -> np.ndarray:
    """f_U = sum over l in U of nu_l f * psi_l^* * psi_l.

    With ``check`` the defining property (W f_U agrees with W f on U and
    vanishes off U) is verified when U is a union of classes; a warning is
    emitted and the check skipped when U splits a class.
    """
    f = _signal(f)
    idx = [bank.index(lab) for lab in labels]
    profile = bank.nu[idx] @ bank.power[idx] if idx else np.zeros(bank.n)
    out = _restore_field(bank, f, np.fft.ifft(np.fft.fft(f) * profile))
    if check and np.any(f):
        dec = decomposition or equivalence_decomposition(bank, f)
        if _splits(dec, labels):
            warnings.warn("label set splits an equivalence class; projection property not checked", stacklevel=2)
        else:
            F = analyze(bank, f).values
            FU = analyze(bank, out).values
            inside = np.zeros(len(bank), dtype=bool)
            inside[idx] = True
            expected = np.where(inside[None, :], F, 0)
            gap = np.max(np.abs(FU - expected))
            if gap > PROJECTION_TOL * max(np.linalg.norm(f), 1e-300):
                raise PhasePropagationError(f"band projection property fails by {gap:.3g}")
    return out


def _splits(dec: EquivalenceDecomposition, labels) -> bool:
    chosen = set(labels)
    return any(0 < len(chosen.intersection(c)) < len(c) for c in dec.classes)


@dataclass(frozen=True)
class AmbiguitySpec:
    parts: tuple
    signs: tuple

    def __post_init__(self):
        parts = tuple(tuple(p) for p in self.parts)
        signs = tuple(complex(s) for s in self.signs)
        if len(parts) != len(signs):
            raise InvalidSpecError("need exactly one sign per part")
        seen = set()
        for p in parts:
            overlap = seen.intersection(p)
            if overlap or len(set(p)) != len(p):
                raise InvalidSpecError(f"parts are not disjoint (label {sorted(map(str, overlap or p))[0]})")
            seen.update(p)
        for s in signs:
            if abs(abs(s) - 1.0) > 1e-12:
                raise InvalidSpecError(f"sign {s} is not unimodular")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "signs", signs)

    @property
    def is_real(self) -> bool:
        return all(s.imag == 0 for s in self.signs)

    def sign_of(self, label) -> complex:
        for p, s in zip(self.parts, self.signs):
            if label in p:
                return s
        raise KeyError(label)

    def validate(self, dec: EquivalenceDecomposition, field: str = "complex"):
        """Parts must be unions of classes and together cover every active label."""
        if field == "real" and not all(s in (1, -1) for s in self.signs):
            raise InvalidSpecError("real signals only admit signs +1 and -1")
        covered = set().union(*map(set, self.parts)) if self.parts else set()
        for p in self.parts:
            for cls in dec.classes:
                inside = set(p).intersection(cls)
                if inside and len(inside) != len(cls):
                    if len(dec.classes) == 1:
                        raise InvalidSpecError(
                            "all active labels form one equivalence class; only a global sign or phase is possible"
                        )
                    raise InvalidSpecError(f"part {list(p)} splits the equivalence class {list(cls)}")
        missing = [lab for lab in dec.active if lab not in covered]
        if missing:
            raise InvalidSpecError(f"active labels {missing} are not covered by any part")

    def to_dict(self):
        return {"parts": [list(p) for p in self.parts], "signs": [[s.real, s.imag] for s in self.signs]}


def synthesize_ambiguity(bank: FilterBank, f, spec: AmbiguitySpec, validate: bool = True) -> np.ndarray:
    """g = sum_j sigma_j f_{U_j}."""
    f = _signal(f)
    dec = equivalence_decomposition(bank, f)
    real = bank.field == "real" and not np.iscomplexobj(f)
    if validate:
        spec.validate(dec, "real" if real else "complex")
    g = np.zeros(bank.n, dtype=np.complex128)
    for part, sign in zip(spec.parts, spec.signs):
        g = g + sign * band_projection(bank, f, part, check=validate, decomposition=dec)
    if real and spec.is_real:
        return g.real
    return g


def part_energies(bank: FilterBank, f, spec: AmbiguitySpec) -> dict:
    """Norms of the parts and their largest mutual overlap, for the orthogonality check."""
    f = _signal(f)
    pieces = [band_projection(bank, f, p, check=False) for p in spec.parts]
    gram = np.array([[np.vdot(b, a) for b in pieces] for a in pieces])
    off = gram - np.diag(np.diag(gram))
    return {
        "sum_sq": float(np.real(np.trace(gram))),
        "max_cross": float(np.max(np.abs(off), initial=0.0)),
        "norm_sq": float(np.vdot(f, f).real),
    }


def verify_phase_propagation(bank: FilterBank, f, g, tol: float = 1e-8) -> dict:
    """Recover per-label unimodular factors relating W g to W f.

    Each active label gets sigma_l = phase of <g * psi_l^*, f * psi_l^*>;
    the pair must satisfy g * psi_l^* = sigma_l f * psi_l^* (local
    consistency) and sigma must be constant on every equivalence class.
    ``tol`` is relative to ||f||.
    """
    f, g = _signal(f), _signal(g)
    scale = max(np.linalg.norm(f), np.finfo(float).tiny)
    F, G = analyze(bank, f), analyze(bank, g)
    gap = float(np.sqrt(field_norm_sq(np.abs(F.values) - np.abs(G.values), bank.nu)))
    if gap > tol * scale:
        raise PhasePropagationError(f"moduli differ by {gap:.3g} relative {gap / scale:.3g}", None, gap / scale)
    dec = equivalence_decomposition(bank, f)
    signs, worst, worst_label = {}, 0.0, None
    for lab in dec.active:
        i = bank.index(lab)
        a, b = F.values[:, i], G.values[:, i]
        ip = np.vdot(a, b)
        sigma = ip / abs(ip) if abs(ip) > 0 else 1.0
        res = float(np.linalg.norm(b - sigma * a)) / scale
        if res > worst:
            worst, worst_label = res, lab
        signs[lab] = complex(sigma)
    if worst > tol:
        raise PhasePropagationError(
            f"label {worst_label!r} is not related by a single phase (residual {worst:.3g})",
            worst_label,
            worst,
        )
    class_signs = []
    for cls in dec.classes:
        ref = signs[cls[0]]
        spread = max(abs(signs[lab] - ref) for lab in cls)
        if spread > tol:
            raise PhasePropagationError(
                f"phase is not constant on class {list(cls)} (spread {spread:.3g})", cls[0], spread
            )
        class_signs.append(ref)
    return {
        "signs": signs,
        "classes": [list(c) for c in dec.classes],
        "class_signs": class_signs,
        "max_residual": worst,
        "modulus_gap": gap / scale,
    }


def phase_distance(f, g, field: str = "complex") -> float:
    """min over unimodular alpha of ||f - alpha g||."""
    f, g = _signal(f), _signal(g)
    ip = np.vdot(g, f)
    overlap = abs(ip.real) if field == "real" else abs(ip)
    val = np.vdot(f, f).real + np.vdot(g, g).real - 2 * overlap
    return float(np.sqrt(max(val, 0.0)))
