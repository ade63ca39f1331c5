"""The data-dependent label graph G(f) and its connectivity measures.

Vertices are labels l with f * psi_l != 0; the weight of a label pair is the
energy of the doubly filtered signal f * psi_l * psi_l'.  Label measures nu
enter as w_l = nu_l ||f * psi_l||^2 and w_ll' = nu_l nu_l' ||f * psi_l * psi_l'||^2,
which keeps the row-sum identity sum_l w_ll' = w_l' under the weighted
Calderon condition.  All weights are evaluated exactly in frequency.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.sparse.csgraph import connected_components

from . import _search
from . import harmonic as hm
from .errors import (
    BudgetError,
    InapplicableBoundError,
    PreconditionError,
    UndefinedInputError,
)
from .filterbank import FilterBank, check_calderon
from .kernel_cheeger import (
    CheegerResult,
    DEFAULT_RESTARTS,
    commutator_norm_sq,
    masked_norm_sq,
    normalize_strategy,
    product_mask,
)
from .transform import analyze

POSITIVITY_TOL = 1e-10
CALDERON_TOL = 1e-10
INVARIANT_TOL = 1e-9
DENSE_EIG_LIMIT = 512


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Symmetric weighted graph with vertex weights.

    ``edges`` is the full |V| x |V| symmetric matrix of pair weights,
    diagonal (self-pairs) included; zero entries mean "no edge".
    """

    labels: tuple
    weights: np.ndarray
    edges: np.ndarray
    threshold: float = 0.0
    signal_norm_sq: Optional[float] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        E = np.asarray(self.edges, dtype=np.float64)
        if E.shape != (w.size, w.size) or len(self.labels) != w.size:
            raise ValueError("edge matrix, weights and labels disagree in size")
        if np.any(w <= 0):
            raise ValueError("vertex weights must be positive")
        if np.any(E < 0) or np.max(np.abs(E - E.T), initial=0.0) > 1e-12 * max(1.0, np.max(E, initial=0.0)):
            raise ValueError("edge weights must be symmetric and nonnegative")
        E = 0.5 * (E + E.T)
        w.setflags(write=False)
        E.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "edges", E)

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    @property
    def max_degree(self) -> int:
        """Largest neighbour count, counting l itself when its self-pair has weight."""
        if self.size == 0:
            return 0
        return int(np.max(np.sum(self.edges > 0, axis=1)))

    def edge_list(self):
        """Unordered edges (a, b, w) with a <= b, self-pairs included."""
        out = []
        for i in range(self.size):
            for j in range(i, self.size):
                if self.edges[i, j] > 0:
                    out.append((self.labels[i], self.labels[j], float(self.edges[i, j])))
        return out

    def components(self):
        """Connected components as tuples of labels, in label order."""
        if self.size == 0:
            return []
        count, comp = connected_components(self.edges > 0, directed=False)
        groups = {}
        for i, c in enumerate(comp):
            groups.setdefault(c, []).append(self.labels[i])
        return [tuple(g) for g in sorted(groups.values(), key=lambda g: self.labels.index(g[0]))]

    def laplacian(self) -> np.ndarray:
        """Unordered-edge Laplacian: z^T L z = sum over edges {l, l'} of w |z_l - z_l'|^2."""
        A = self.edges - np.diag(np.diag(self.edges))
        return np.diag(A.sum(axis=1)) - A

    def invariant_residuals(self) -> dict:
        """Relative defects of the total-mass and row-sum identities."""
        total = self.total
        rows = self.edges.sum(axis=0)
        row_res = float(np.max(np.abs(rows - self.weights) / self.weights)) if self.size else 0.0
        mass_res = 0.0
        if self.signal_norm_sq:
            mass_res = abs(total - self.signal_norm_sq) / self.signal_norm_sq
        return {"row_sum": row_res, "total_mass": float(mass_res)}

    @classmethod
    def from_matrices(cls, weights, edges, labels=None) -> "WeightedGraph":
        weights = np.asarray(weights, dtype=np.float64)
        labels = tuple(range(weights.size)) if labels is None else labels
        return cls(labels, weights, edges)


def _positivity_threshold(bank: FilterBank, f: np.ndarray, tol: float) -> float:
    max_filter = float(np.max(np.linalg.norm(bank.filters, axis=1)))
    return tol * float(np.linalg.norm(f)) * max_filter


def _signal(f) -> np.ndarray:
    return hm.as_vector(f.values if isinstance(f, hm.Signal) else f)


def label_weights(bank: FilterBank, f):
    """All-label weights (w_l, w_ll') before thresholding."""
    f = _signal(f)
    if f.shape[0] != bank.n:
        raise ValueError("signal and bank orders differ")
    energy = np.abs(np.fft.fft(f)) ** 2 / bank.n
    P = bank.power
    w = bank.nu * (P @ energy)
    pair = (P * energy) @ P.T
    pair = bank.nu[:, None] * pair * bank.nu[None, :]
    return w, pair


def build_graph(
    bank: FilterBank,
    f,
    tol: float = POSITIVITY_TOL,
    check: bool = True,
) -> WeightedGraph:
    """G(f): labels with ||f * psi_l|| above threshold, pair weights between them.

    A norm counts as positive when it exceeds tol * ||f|| * max_l ||psi_l||.
    """
    report = check_calderon(bank, CALDERON_TOL)
    if not report.satisfied:
        raise PreconditionError(
            f"bank violates the Calderon condition (deviation {report.max_deviation:.3g})"
        )
    f = _signal(f)
    nf2 = float(np.linalg.norm(f) ** 2)
    if nf2 == 0:
        raise UndefinedInputError("the graph of the zero signal is empty")
    thr = _positivity_threshold(bank, f, tol)
    w, pair = label_weights(bank, f)
    keep = np.sqrt(w) > thr
    idx = np.flatnonzero(keep)
    E = pair[np.ix_(idx, idx)]
    E = np.where(np.sqrt(E) > thr, E, 0.0)
    graph = WeightedGraph(
        tuple(bank.labels[i] for i in idx), w[idx], E, threshold=thr, signal_norm_sq=nf2
    )
    if check:
        res = graph.invariant_residuals()
        if res["row_sum"] > INVARIANT_TOL or res["total_mass"] > INVARIANT_TOL:
            raise PreconditionError(f"graph identities fail: {res}")
    return graph


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass(frozen=True)
class EquivalenceDecomposition:
    classes: tuple  # tuples of labels, in bank order
    zero_set: tuple

    @property
    def active(self) -> tuple:
        return tuple(lab for cls in self.classes for lab in cls)

    def class_of(self, label):
        for cls in self.classes:
            if label in cls:
                return cls
        raise KeyError(label)

    def to_dict(self):
        return {"classes": [list(c) for c in self.classes], "zero_set": list(self.zero_set)}


def equivalence_decomposition(bank: FilterBank, f, tol: float = POSITIVITY_TOL) -> EquivalenceDecomposition:
    """Classes of the transitive hull of l ~ l' iff f * psi_l^* * psi_l'^* != 0."""
    f = _signal(f)
    thr = _positivity_threshold(bank, f, tol)
    w, pair = label_weights(bank, f)
    active = [i for i in range(len(bank)) if math.sqrt(w[i]) > thr]
    uf = _UnionFind(active)
    for a in active:
        for b in active:
            if b > a and math.sqrt(pair[a, b]) > thr:
                uf.union(a, b)
    groups = {}
    for i in active:
        groups.setdefault(uf.find(i), []).append(i)
    classes = sorted(groups.values(), key=lambda g: g[0])
    labels = bank.labels
    return EquivalenceDecomposition(
        tuple(tuple(labels[i] for i in g) for g in classes),
        tuple(labels[i] for i in range(len(bank)) if i not in set(active)),
    )


def _graph_problem(G: WeightedGraph) -> _search.RatioProblem:
    return _search.RatioProblem(
        c=G.edges.sum(axis=1), w=G.weights, floor=1e-24 * G.total, Q=G.edges
    )


def cut_quotient(G: WeightedGraph, S) -> float:
    return _graph_problem(G).ratio(np.asarray(S, dtype=bool))


def graph_cheeger(
    G: WeightedGraph,
    strategy: str = "exhaustive",
    budget: Optional[int] = None,
    seed: int = 0,
) -> CheegerResult:
    """min over cuts of boundary weight / lighter side; 1 for a single vertex."""
    strategy = normalize_strategy(strategy)
    if G.size == 0:
        raise UndefinedInputError("graph has no vertices")
    if G.size == 1:
        return CheegerResult(1.0, None, strategy, True, 0)
    problem = _graph_problem(G)
    if strategy == "local_search":
        restarts = DEFAULT_RESTARTS if budget is None else int(budget)
        out = _search.local_search(problem, restarts, np.random.default_rng(seed))
        certified = False
    else:
        # product sets are all vertex subsets here, so both strategies are exact
        if G.size > _search.EXHAUSTIVE_CAP:
            raise BudgetError(f"{G.size} vertices exceed the exhaustive cap")
        out = _search.exhaustive(problem)
        certified = True
    if out.mask is None:
        return CheegerResult(1.0, None, strategy, certified, out.evaluated)
    return CheegerResult(problem.ratio(out.mask), out.mask, strategy, certified, out.evaluated)


def algebraic_connectivity(G: WeightedGraph) -> float:
    """Smallest nonzero Rayleigh quotient z^T L z / sum w |z|^2 with z w-orthogonal to 1."""
    if G.size < 2:
        raise InapplicableBoundError("algebraic connectivity needs at least two vertices")
    if G.size > DENSE_EIG_LIMIT:
        raise BudgetError(f"{G.size} vertices exceed the dense eigen-solver limit")
    if len(G.components()) > 1:
        return 0.0
    vals = scipy.linalg.eigh(G.laplacian(), np.diag(G.weights), eigvals_only=True)
    return float(max(vals[1], 0.0))


def temporal_graph(bank: FilterBank, f, tol: float = POSITIVITY_TOL):
    """Nodes (x, l) with m_l(x) above threshold and same-time edges between them.

    Returns (nodes, node_weights, edge_matrix) where node weights are
    nu_l m_l(x)^2 and edges nu_l nu_l' m_ll'(x)^2.  Points where m_l(x)
    vanishes carry no mass in the weighted space and are left out together
    with their edges.
    """
    f = _signal(f)
    G = build_graph(bank, f, tol)
    thr = _positivity_threshold(bank, f, tol)
    idx = [bank.index(lab) for lab in G.labels]
    F = analyze(bank, f).values[:, idx]  # m_l = |F|
    fhat = np.fft.fft(f)
    prof = np.conj(bank.profiles[idx])
    nu = bank.nu[idx]
    double = np.fft.ifft(fhat[None, None, :] * prof[:, None, :] * prof[None, :, :], axis=2)
    m2 = np.abs(double) ** 2  # (l, l', x)
    nodes = [(x, k) for x in range(bank.n) for k in range(len(idx)) if abs(F[x, k]) > thr]
    pos = {node: i for i, node in enumerate(nodes)}
    weights = np.array([nu[k] * abs(F[x, k]) ** 2 for x, k in nodes])
    E = np.zeros((len(nodes), len(nodes)))
    edge_on = G.edges > 0
    for (x, k), i in pos.items():
        for k2 in range(len(idx)):
            j = pos.get((x, k2))
            if j is None or not edge_on[k, k2]:
                continue
            if math.sqrt(m2[k, k2, x]) > thr:
                E[i, j] = nu[k] * nu[k2] * m2[k, k2, x]
    labels = tuple((x, G.labels[k]) for x, k in nodes)
    return labels, weights, 0.5 * (E + E.T), G


def temporal_algebraic_connectivity(bank: FilterBank, f, tol: float = POSITIVITY_TOL) -> float:
    """Algebraic connectivity of the time-resolved graph; 0 when it is disconnected."""
    labels, weights, E, G = temporal_graph(bank, f, tol)
    if G.size < 2:
        raise InapplicableBoundError("temporal connectivity needs at least two vertices")
    if not np.any(weights > 0):
        raise UndefinedInputError("all temporal weights vanish")
    TG = WeightedGraph(labels, weights, E)
    if TG.size > 4 * DENSE_EIG_LIMIT:
        raise BudgetError("temporal graph too large for a dense solve")
    if len(TG.components()) > 1:
        return 0.0
    vals = scipy.linalg.eigh(TG.laplacian(), np.diag(TG.weights), eigvals_only=True)
    return float(max(vals[1], 0.0))


def complex_upper_bound(max_degree: float, temporal_connectivity: float) -> float:
    """sqrt(32 D / A_t + 10); +inf when A_t = 0."""
    if temporal_connectivity < 0:
        raise ValueError("connectivity must be nonnegative")
    if temporal_connectivity == 0:
        return math.inf
    return math.sqrt(32.0 * max_degree / temporal_connectivity + 10.0)


def band_profile(bank: FilterBank, labels) -> np.ndarray:
    """H_S(xi) = sum over l in S of nu_l |psi_hat_l(xi)|^2."""
    out = np.zeros(bank.n)
    for lab in labels:
        i = bank.index(lab)
        out += bank.nu[i] * bank.power[i]
    return out


def verify_band_identities(bank: FilterBank, f, labels, h=None, tol: float = POSITIVITY_TOL) -> dict:
    """Residuals of the band-profile identities on the support of f_hat.

    ``partition``: max |H_S + H_{S^c} - 1|; ``product``: max of
    |H_S H_c^2 + H_S^2 H_c - H_S H_c|; ``transfer``: relative gap between
    sum over S of nu_l ||h * psi_l||^2 and (1/N) sum |h_hat|^2 H_S.
    The complement is taken inside the vertex set of G(f).
    """
    f = _signal(f)
    G = build_graph(bank, f, tol, check=False)
    S = [lab for lab in labels if lab in G.labels]
    Sc = [lab for lab in G.labels if lab not in S]
    HS, Hc = band_profile(bank, S), band_profile(bank, Sc)
    fhat = np.abs(np.fft.fft(f))
    on = fhat > tol * max(np.max(fhat), np.finfo(float).tiny)
    part = float(np.max(np.abs(HS + Hc - 1)[on], initial=0.0))
    prod = float(np.max(np.abs(HS * Hc**2 + HS**2 * Hc - HS * Hc)[on], initial=0.0))
    h = f if h is None else _signal(h)
    direct = 0.0
    for lab in S:
        i = bank.index(lab)
        conv = hm.convolve(h, bank.filters[i])
        direct += bank.nu[i] * float(np.vdot(conv, conv).real)
    spectral = float(np.sum(np.abs(np.fft.fft(h)) ** 2 * HS) / bank.n)
    scale = max(float(np.linalg.norm(h) ** 2), np.finfo(float).tiny)
    return {
        "partition": part,
        "product": prod,
        "transfer": abs(direct - spectral) / scale,
        "max_profile": float(np.max(HS, initial=0.0)),
        "min_profile": float(np.min(HS, initial=0.0)),
    }


def product_commutator_check(bank: FilterBank, f, labels) -> dict:
    """Commutator energy of Z_N x S against the boundary weight, and masked energy against sum of w."""
    f = _signal(f)
    G = build_graph(bank, f)
    F = analyze(bank, f)
    mask = product_mask(bank, labels)
    inS = np.array([lab in set(labels) for lab in G.labels])
    boundary = float(G.edges[np.ix_(inS, ~inS)].sum())
    return {
        "lhs": commutator_norm_sq(bank, F, mask),
        "rhs": boundary,
        "mass_lhs": masked_norm_sq(bank, F, mask),
        "mass_rhs": float(G.weights[inS].sum()),
    }


def kernel_vs_graph(bank: FilterBank, f, tol: float = 1e-9) -> dict:
    """Exhaustive kernel constant of W f against the graph constant of G(f)."""
    from .kernel_cheeger import kernel_cheeger

    f = _signal(f)
    F = analyze(bank, f)
    kern = kernel_cheeger(bank, F, "exhaustive")
    G = build_graph(bank, f)
    graph = graph_cheeger(G, "exhaustive")
    prod = kernel_cheeger(bank, F, "product_sets")
    return {
        "kernel_value": kern.value,
        "graph_value": graph.value,
        "product_value": prod.value,
        "holds": bool(kern.value <= graph.value + tol),
    }


def retrievability_diagnosis(bank: FilterBank, f, tol: float = POSITIVITY_TOL) -> dict:
    """Single equivalence class means every ambiguity is trivial.

    Local retrievability is only taken for granted on the real field; for
    complex data the verdict records that the hypothesis is unverified.
    """
    f = _signal(f)
    if not np.any(f):
        raise UndefinedInputError("the zero signal has no equivalence classes")
    dec = equivalence_decomposition(bank, f, tol)
    real = bank.field == "real" and not np.iscomplexobj(f)
    single = len(dec.classes) == 1
    if single:
        verdict = "retrievable" if real else "retrievable if locally retrievable"
    else:
        verdict = "not retrievable"
    return {
        "locally_retrievable_assumed": real,
        "single_class": single,
        "verdict": verdict,
        "classes": [list(c) for c in dec.classes],
        "zero_set": list(dec.zero_set),
    }


def warn_if_split(dec: EquivalenceDecomposition, labels) -> bool:
    """True (and a warning) when the label set cuts through an equivalence class."""
    chosen = set(labels)
    for cls in dec.classes:
        inside = chosen.intersection(cls)
        if inside and len(inside) != len(cls):
            warnings.warn(f"label set splits the equivalence class {cls}", stacklevel=2)
            return True
    return False
