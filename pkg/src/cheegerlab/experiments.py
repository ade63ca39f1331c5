"""Scripted numerical experiments: stability estimates, separation sweeps,
instability witnesses and a small corpus of exhaustively searchable instances.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy.stats import spearmanr

from . import harmonic as hm
from . import kernel_cheeger as kc
from .ambiguity import AmbiguitySpec, synthesize_ambiguity
from .filterbank import FilterBank, build_overlapping_shannon, build_shannon, random_bank
from .graph import (
    build_graph,
    equivalence_decomposition,
    graph_cheeger,
    temporal_algebraic_connectivity,
    complex_upper_bound,
)
from .transform import CoefficientField, analyze, apply_kernel, field_norm_sq

DEFAULT_SEED = 20240917
QUOTIENT_FLOOR = 1e-12


def stability_quotient(F, G, nu, field: str) -> float:
    """min_alpha ||F - alpha G|| / || |F| - |G| ||, or nan below the floor."""
    F = F.values if isinstance(F, CoefficientField) else np.asarray(F)
    G = G.values if isinstance(G, CoefficientField) else np.asarray(G)
    den = math.sqrt(kc.modulus_gap_sq(F, G, nu))
    scale = math.sqrt(field_norm_sq(F, nu))
    if den <= QUOTIENT_FLOOR * scale:
        return math.nan
    return math.sqrt(kc.phase_infimum_sq(F, G, nu, field)) / den


@dataclass
class StabilityReport:
    lower_bound: float
    lower_certified: bool
    upper_bound: float
    upper_kind: str
    upper_certified: bool
    empirical_lower: float
    cheeger: float
    field: str
    seed: int
    samples: int
    witness_pair: Optional[tuple] = dc_field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "lower_bound": self.lower_bound,
            "lower_certified": self.lower_certified,
            "upper_bound": self.upper_bound,
            "upper_kind": self.upper_kind,
            "upper_certified": self.upper_certified,
            "empirical_lower": self.empirical_lower,
            "cheeger": self.cheeger,
            "field": self.field,
            "seed": self.seed,
            "samples": self.samples,
            "stably_retrievable": self.lower_bound != math.inf,
        }


def _field_kind(bank: FilterBank, f: np.ndarray) -> str:
    return "real" if bank.field == "real" and not np.iscomplexobj(f) else "complex"


def cheeger_bounds(bank: FilterBank, f, budget: Optional[int] = None, seed: int = DEFAULT_SEED):
    """Kernel Cheeger estimate of W f together with the lower and upper bounds it yields."""
    f = hm.as_vector(f.values if isinstance(f, hm.Signal) else f)
    F = analyze(bank, f)
    field = _field_kind(bank, f)
    res = kc.best_upper_estimate(bank, F, budget=budget, seed=seed)
    # a non-exhaustive value over-estimates the constant, so its lower bound stays valid
    lower = kc.stability_lower_bound(min(res.value, 1.0))
    if field == "real":
        upper = kc.stability_upper_bound_real(min(res.value, 1.0))
        kind, upper_cert = "real-cheeger", res.certified
    else:
        G = build_graph(bank, f)
        if G.size < 2:
            upper, kind, upper_cert = math.inf, "temporal-graph", False
        else:
            conn = temporal_algebraic_connectivity(bank, f)
            upper, kind, upper_cert = complex_upper_bound(G.max_degree, conn), "temporal-graph", True
    return F, res, lower, (upper, kind, upper_cert), field


def empirical_stability(
    bank: FilterBank,
    f,
    budget: int = 64,
    seed: int = DEFAULT_SEED,
    samplers=("test_functions", "ambiguities", "rkhs"),
) -> StabilityReport:
    """Best sampled stability quotient alongside the Cheeger-based bounds.

    Samplers: test functions G_S over the Cheeger witness and random masks,
    sign ambiguities nudged by shrinking perturbations, and RKHS elements at
    random distances from F.  ``budget`` is the number of draws per sampler.
    """
    f = hm.as_vector(f.values if isinstance(f, hm.Signal) else f)
    if not np.any(f):
        raise ValueError("stability of the zero signal is undefined")
    rng = np.random.default_rng(seed)
    F, res, lower, (upper, kind, upper_cert), field = cheeger_bounds(bank, f, seed=seed)
    nu = bank.nu
    candidates = []

    if "test_functions" in samplers:
        masks = [] if res.witness is None else [res.witness]
        masks += [rng.random(F.shape) < 0.5 for _ in range(budget)]
        for S in masks:
            candidates.append(kc.build_test_function(bank, F, S).values)

    if "ambiguities" in samplers:
        dec = equivalence_decomposition(bank, f)
        nf = math.sqrt(F.norm_sq())
        if len(dec.classes) > 1:
            for k in range(budget):
                if field == "real":
                    signs = rng.choice([-1.0, 1.0], size=len(dec.classes))
                else:
                    signs = np.exp(2j * np.pi * rng.random(len(dec.classes)))
                g = synthesize_ambiguity(bank, f, AmbiguitySpec(dec.classes, signs))
                eps = 10.0 ** (-1 - 8 * k / max(budget - 1, 1))
                noise = random_unit_field(bank, rng, field)
                candidates.append(analyze(bank, g).values + eps * nf * noise)

    if "rkhs" in samplers:
        nf = math.sqrt(F.norm_sq())
        for k in range(budget):
            t = 10.0 ** rng.uniform(-3, 1)
            candidates.append(F.values + t * nf * random_unit_field(bank, rng, field))

    best, pair = 0.0, None
    for G in candidates:
        q = stability_quotient(F.values, G, nu, field)
        if not math.isnan(q) and q > best:
            best, pair = q, (F.values, G)
    return StabilityReport(
        lower_bound=lower,
        lower_certified=res.certified,
        upper_bound=upper,
        upper_kind=kind,
        upper_certified=upper_cert,
        empirical_lower=best,
        cheeger=res.value,
        field=field,
        seed=seed,
        samples=len(candidates),
        witness_pair=pair,
    )


def random_unit_field(bank: FilterBank, rng, field: str) -> np.ndarray:
    """Unit-norm random element of the range of the transform."""
    n, L = bank.n, len(bank)
    values = rng.standard_normal((n, L))
    if field == "complex":
        values = values + 1j * rng.standard_normal((n, L))
    K = apply_kernel(bank, CoefficientField(values, bank.labels, bank.nu, field)).values
    norm = math.sqrt(field_norm_sq(K, bank.nu))
    return K / norm if norm > 0 else K


def localized_bump(n: int, lo: Optional[int] = None, hi: Optional[int] = None, center: int = 0) -> np.ndarray:
    """Real even band-pass bump: spectrum sin^2-tapered on lo <= |xi| <= hi.

    Defaults scale the band [20, 120] used at n = 256 to other sizes.
    """
    lo = max(1, round(20 * n / 256)) if lo is None else lo
    hi = max(lo + 2, round(120 * n / 256)) if hi is None else hi
    k = hm.cyclic_abs(n)
    window = np.where((k >= lo) & (k <= hi), np.sin(np.pi * (k - lo) / (hi - lo)) ** 2, 0.0)
    h = np.fft.ifft(window).real
    h /= np.linalg.norm(h)
    return np.roll(h, center)


def _sweep_cell(bank: FilterBank, h: np.ndarray, x: int, budget, seed) -> dict:
    f = h + np.roll(h, x)
    g = h - np.roll(h, x)
    F, G = analyze(bank, f), analyze(bank, g)
    field = _field_kind(bank, f)
    kern = kc.best_upper_estimate(bank, F, budget=budget, seed=seed)
    graph = graph_cheeger(build_graph(bank, f))
    q = stability_quotient(F.values, G.values, bank.nu, field)
    return {
        "shift": int(x),
        "kernel_cheeger": kern.value,
        "kernel_strategy": kern.strategy,
        "kernel_certified": kern.certified,
        "graph_cheeger": graph.value,
        "quotient_bound": q,
        "seed": seed,
    }


def separation_sweep(
    bank: FilterBank,
    h,
    shifts,
    budget: Optional[int] = 8,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> list:
    """Cheeger constants and the test-pair quotient of h + T_x h for each shift x.

    The test pair is (W(h + T_x h), W(h - T_x h)).  Records come back in the
    order of ``shifts`` regardless of ``threads``.
    """
    shifts = [int(x) for x in shifts]
    if not shifts:
        raise ValueError("shift list is empty")
    h = hm.as_vector(h.values if isinstance(h, hm.Signal) else h)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda x: _sweep_cell(bank, h, x, budget, seed), shifts))
    return [_sweep_cell(bank, h, x, budget, seed) for x in shifts]


def sweep_trend(records) -> float:
    """Spearman rank correlation of quotient against shift."""
    xs = [r["shift"] for r in records]
    qs = [r["quotient_bound"] for r in records]
    return float(spearmanr(xs, qs).statistic)


@dataclass
class InstabilityWitness:
    F: np.ndarray
    G: np.ndarray
    size: int
    achieved_eps: float
    distance: float
    target_eps: float

    @property
    def reached(self) -> bool:
        return self.achieved_eps < self.target_eps

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "achieved_eps": self.achieved_eps,
            "distance": self.distance,
            "target_eps": self.target_eps,
            "reached": self.reached,
            "ratio": self.distance / self.achieved_eps if self.achieved_eps > 0 else math.inf,
        }


def instability_witness(size: int, eps: float, overlap: float = 0.25, bank: Optional[FilterBank] = None) -> InstabilityWitness:
    """Two-bump pair at maximal separation, scaled so that min_alpha ||F - alpha G|| = 1.

    F = W(h + T_{n/2} h) and G = W(h - T_{n/2} h) are orthogonal with equal
    norms, so their moduli agree up to the overlap of the two bumps.  The
    bump occupies the top octave n/4 <= |xi| <= n/2, where the filters are
    shortest in time.
    """
    bank = bank or build_overlapping_shannon(size, overlap)
    h = localized_bump(size, max(1, size // 4), size // 2)
    x = size // 2
    F = analyze(bank, h + np.roll(h, x)).values
    G = analyze(bank, h - np.roll(h, x)).values
    dist = math.sqrt(kc.phase_infimum_sq(F, G, bank.nu, "real"))
    F, G = F / dist, G / dist
    gap = math.sqrt(kc.modulus_gap_sq(F, G, bank.nu))
    return InstabilityWitness(F, G, size, gap, math.sqrt(kc.phase_infimum_sq(F, G, bank.nu, "real")), eps)


def small_corpus(seed: int = DEFAULT_SEED, max_size: int = 20) -> list:
    """(name, bank, signal) instances with n * |labels| <= max_size, real and complex."""
    rng = np.random.default_rng(seed)
    shapes = [(5, 4), (4, 5), (5, 3), (6, 3), (4, 4), (3, 6), (4, 3), (6, 2), (3, 5), (2, 8)]
    out = []
    for field in ("real", "complex"):
        for n, L in shapes:
            if n * L > max_size:
                continue
            bank = random_bank(n, L, rng, field)
            f = rng.standard_normal(n)
            if field == "complex":
                f = f + 1j * rng.standard_normal(n)
            out.append((f"random-{field}-{n}x{L}", bank, f))
    sh = build_shannon(4)
    out.append(("shannon-4", sh, rng.standard_normal(4)))
    if max_size >= 24:
        ov = build_overlapping_shannon(8, 0.25)
        out.append(("overlapping-8", ov, rng.standard_normal(8)))
    return out

