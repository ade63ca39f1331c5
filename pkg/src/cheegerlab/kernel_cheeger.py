"""Kernel Cheeger constants on X = Z_N x Labels and the bounds they imply.

Subsets of X are boolean masks shaped like the coefficient field, (n, L).
For a field F and mask S the Cheeger quotient is

    ||[K, P_S] F||^2 / min(||P_S F||^2, ||P_{S^c} F||^2),

and the constant is its infimum over admissible masks (both denominators
strictly positive), or 1 when no mask is admissible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from . import _search
from .errors import (
    BudgetError,
    DimensionError,
    InapplicableBoundError,
    PreconditionError,
    UndefinedInputError,
)
from .filterbank import FilterBank
from .transform import (
    DENSE_LIMIT,
    CoefficientField,
    KernelOperator,
    apply_kernel,
    field_inner,
    field_norm_sq,
)

STRATEGIES = ("exhaustive", "product_sets", "local_search")
_ALIASES = {"product": "product_sets", "local": "local_search"}
ADMISSIBLE_REL = 1e-12
RKHS_TOL = 1e-9
DEFAULT_RESTARTS = 32
DEFAULT_SEED = 0


@dataclass(frozen=True, eq=False)
class CheegerResult:
    value: float
    witness: Optional[np.ndarray]  # None when no admissible subset exists
    strategy: str
    certified: bool
    evaluated: int = 0
    extra: dict = dc_field(default_factory=dict)

    @property
    def admissible(self) -> bool:
        return self.witness is not None

    def witness_bits(self) -> Optional[str]:
        """Hex encoding of the flat witness mask (bit p <-> flat index p)."""
        if self.witness is None:
            return None
        flat = np.asarray(self.witness, dtype=bool).reshape(-1)
        value = 0
        for p in np.flatnonzero(flat)[::-1]:
            value |= 1 << int(p)
        return hex(value)

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "witness_bits": self.witness_bits(),
            "strategy": self.strategy,
            "certified": bool(self.certified),
        }


def normalize_strategy(strategy: str) -> str:
    strategy = _ALIASES.get(strategy, strategy)
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    return strategy


def _field_values(bank: FilterBank, F) -> np.ndarray:
    values = F.values if isinstance(F, CoefficientField) else np.asarray(F)
    if values.shape != (bank.n, len(bank)):
        raise DimensionError(f"field shape {values.shape} does not match ({bank.n}, {len(bank)})")
    return values


def _mask(bank: FilterBank, S) -> np.ndarray:
    S = np.asarray(S, dtype=bool)
    if S.shape != (bank.n, len(bank)):
        if S.size == bank.n * len(bank):
            return S.reshape(bank.n, len(bank))
        raise DimensionError(f"mask shape {S.shape} does not match ({bank.n}, {len(bank)})")
    return S


def complement(S) -> np.ndarray:
    return ~np.asarray(S, dtype=bool)


def product_mask(bank: FilterBank, labels) -> np.ndarray:
    """The mask Z_N x S for a set of labels S."""
    chosen = np.zeros(len(bank), dtype=bool)
    for lab in labels:
        chosen[bank.index(lab)] = True
    return np.broadcast_to(chosen, (bank.n, len(bank))).copy()


def masked_norm_sq(bank: FilterBank, F, S) -> float:
    values = _field_values(bank, F)
    return field_norm_sq(np.where(_mask(bank, S), values, 0), bank.nu)


def commutator_norm_sq(bank: FilterBank, F, S) -> float:
    """||P_S K P_{S^c} F||^2 + ||P_{S^c} K P_S F||^2."""
    values = _field_values(bank, F)
    S = _mask(bank, S)
    inside = np.where(S, values, 0)
    outside = values - inside
    a = apply_kernel(bank, outside).values
    b = apply_kernel(bank, inside).values
    return field_norm_sq(np.where(S, a, 0), bank.nu) + field_norm_sq(np.where(S, 0, b), bank.nu)


def commutator_direct_sq(bank: FilterBank, F, S) -> float:
    """||K P_S F - P_S K F||^2, computed literally."""
    values = _field_values(bank, F)
    S = _mask(bank, S)
    lhs = apply_kernel(bank, np.where(S, values, 0)).values
    rhs = np.where(S, apply_kernel(bank, values).values, 0)
    return field_norm_sq(lhs - rhs, bank.nu)


def quotient(bank: FilterBank, F, S, floor: Optional[float] = None) -> float:
    """Cheeger quotient of one mask; +inf when the mask is not admissible."""
    values = _field_values(bank, F)
    S = _mask(bank, S)
    total = field_norm_sq(values, bank.nu)
    if floor is None:
        floor = (ADMISSIBLE_REL**2) * total
    a = masked_norm_sq(bank, values, S)
    b = total - a
    if not (a > floor and b > floor):
        return math.inf
    return commutator_norm_sq(bank, values, S) / min(a, b)


def rkhs_residual(bank: FilterBank, F) -> float:
    values = _field_values(bank, F)
    nf = math.sqrt(field_norm_sq(values, bank.nu))
    if nf == 0:
        return 0.0
    return math.sqrt(field_norm_sq(apply_kernel(bank, values).values - values, bank.nu)) / nf


def _require_rkhs(bank: FilterBank, F, tol: float = RKHS_TOL):
    res = rkhs_residual(bank, F)
    if res > tol:
        raise PreconditionError(f"field is not in the range of the transform (||KF - F|| / ||F|| = {res:.3g})")


def _scaled_kernel(bank: FilterBank) -> np.ndarray:
    """sqrt(mu_p) k(p, q) sqrt(mu_q) in flat order; Hermitian."""
    kmat = KernelOperator(bank).kernel_matrix()
    root = np.sqrt(np.tile(bank.nu, bank.n))
    return root[:, None] * kmat * root[None, :]


def _kernel_problem(bank: FilterBank, values: np.ndarray, floor: float) -> _search.RatioProblem:
    """Quadratic form of ||[K, P_S] F||^2 over flat masks.

    With u = sqrt(mu) F and v = sqrt(mu) K F the commutator energy is
    sum_S |v|^2 - s^T (Q_vu + Q_vu^T - Q_uu) s, where Q_ab = Re(conj(a) Kt b).
    For F in the RKHS v = u and this collapses to c = |u|^2, Q = Q_uu.
    """
    n, L = values.shape
    root = np.sqrt(np.tile(bank.nu, n))
    u = root * values.reshape(-1)
    v = root * apply_kernel(bank, values).values.reshape(-1)
    Kt = _scaled_kernel(bank) if n * L <= DENSE_LIMIT else None
    w = np.abs(u) ** 2
    c = np.abs(v) ** 2
    if Kt is not None:
        Quu = np.real(np.conj(u)[:, None] * Kt * u[None, :])
        Qvu = np.real(np.conj(v)[:, None] * Kt * u[None, :])
        Q = Qvu + Qvu.T - Quu
        return _search.RatioProblem(c=c, w=w, floor=floor, Q=0.5 * (Q + Q.T))
    table = KernelOperator(bank).table
    nu = bank.nu
    sq = np.sqrt(nu)

    def kt_col(j):
        x2, l2 = divmod(j, L)
        d = (np.arange(n) - x2) % n
        col = table[:, l2, :][:, d].T * sq[None, :] * sq[l2]  # (x, l)
        return col.reshape(-1)

    def column(j):
        col = kt_col(j)
        # row j of Kt is the conjugate of column j
        row = np.conj(col)
        quu = np.real(np.conj(u) * col * u[j])
        qvu = np.real(np.conj(v) * col * u[j])
        qvu_t = np.real(np.conj(v[j]) * row * u)
        return qvu + qvu_t - quu

    kdiag = np.real(np.repeat(table[np.arange(L), np.arange(L), 0][None, :], n, axis=0).reshape(-1)) * np.tile(nu, n)
    diagonal = 2 * np.real(np.conj(v) * u) * kdiag - w * kdiag
    return _search.RatioProblem(c=c, w=w, floor=floor, column=column, diagonal=diagonal)


def _product_problem(bank: FilterBank, values: np.ndarray, floor: float) -> _search.RatioProblem:
    """The kernel problem restricted to product masks Z_N x S, one bit per label."""
    L = len(bank)
    KF = apply_kernel(bank, values).values
    nu = bank.nu
    w = np.sum(np.abs(values) ** 2, axis=0) * nu
    c = np.sum(np.abs(KF) ** 2, axis=0) * nu
    Quu = np.zeros((L, L))
    Qvu = np.zeros((L, L))
    for j in range(L):
        single = np.zeros_like(values)
        single[:, j] = values[:, j]
        KP = apply_kernel(bank, single).values
        # entries <K P_j F, P_i F> and <K P_j F, P_i K F> for all i
        Quu[:, j] = np.real(np.einsum("xi,xi->i", KP, np.conj(values))) * nu
        Qvu[:, j] = np.real(np.einsum("xi,xi->i", KP, np.conj(KF))) * nu
    Q = Qvu + Qvu.T - Quu
    return _search.RatioProblem(c=c, w=w, floor=floor, Q=0.5 * (Q + Q.T))


def _structured_seeds(bank: FilterBank, label_mask: Optional[np.ndarray]):
    """Product-set witness and spatial half-circle masks as descent seeds."""
    n, L = bank.n, len(bank)
    seeds = []
    if label_mask is not None:
        seeds.append(np.broadcast_to(label_mask, (n, L)).reshape(-1))
    xs = np.arange(n)
    for start in range(0, n, max(1, n // 8)):
        half = ((xs - start) % n) < n // 2
        seeds.append(np.repeat(half, L))
    return seeds


def _finish(bank, values, mask, strategy, certified, evaluated, extra=None) -> CheegerResult:
    if mask is None:
        return CheegerResult(1.0, None, strategy, certified, evaluated, extra or {})
    mask = np.asarray(mask, dtype=bool).reshape(bank.n, len(bank))
    value = quotient(bank, values, mask)
    return CheegerResult(float(value), mask, strategy, certified, evaluated, extra or {})


def kernel_cheeger(
    bank: FilterBank,
    F,
    strategy: str = "exhaustive",
    budget: Optional[int] = None,
    seed: int = DEFAULT_SEED,
) -> CheegerResult:
    """Kernel Cheeger constant of F.

    ``exhaustive`` is exact (|X| <= 24).  ``product_sets`` restricts to masks
    Z_N x S and ``local_search`` runs ``budget`` random restarts (default 32)
    of single-flip descent; both give upper estimates of the infimum.
    """
    strategy = normalize_strategy(strategy)
    values = _field_values(bank, F)
    total = field_norm_sq(values, bank.nu)
    if total == 0:
        raise UndefinedInputError("the Cheeger constant of the zero field is undefined")
    floor = (ADMISSIBLE_REL**2) * total
    if strategy == "exhaustive":
        size = values.size
        if size > _search.EXHAUSTIVE_CAP:
            raise BudgetError(f"|X| = {size} exceeds the exhaustive cap of {_search.EXHAUSTIVE_CAP}")
        out = _search.exhaustive(_kernel_problem(bank, values, floor))
        return _finish(bank, values, out.mask, strategy, True, out.evaluated)
    if strategy == "product_sets":
        L = len(bank)
        if L > _search.EXHAUSTIVE_CAP:
            raise BudgetError(f"{L} labels exceed the product-set cap of {_search.EXHAUSTIVE_CAP}")
        out = _search.exhaustive(_product_problem(bank, values, floor))
        mask = None if out.mask is None else np.broadcast_to(out.mask, values.shape)
        return _finish(bank, values, mask, strategy, False, out.evaluated)
    restarts = DEFAULT_RESTARTS if budget is None else int(budget)
    if restarts < 0:
        raise ValueError("budget must be non-negative")
    prod = None
    if len(bank) <= _search.EXHAUSTIVE_CAP:
        prod = _search.exhaustive(_product_problem(bank, values, floor)).mask
    problem = _kernel_problem(bank, values, floor)
    rng = np.random.default_rng(seed)
    out = _search.local_search(problem, restarts, rng, seeds=_structured_seeds(bank, prod))
    return _finish(bank, values, out.mask, strategy, False, out.evaluated, {"seed": seed})


def best_upper_estimate(bank: FilterBank, F, budget: Optional[int] = None, seed: int = DEFAULT_SEED) -> CheegerResult:
    """Exhaustive when small enough, else the better of product sets and local search."""
    values = _field_values(bank, F)
    if values.size <= _search.EXHAUSTIVE_CAP:
        return kernel_cheeger(bank, values, "exhaustive")
    prod = kernel_cheeger(bank, values, "product_sets")
    local = kernel_cheeger(bank, values, "local_search", budget=budget, seed=seed)
    return local if local.value < prod.value else prod


def build_test_function(bank: FilterBank, F, S) -> CoefficientField:
    """G_S = K(P_S F - P_{S^c} F)."""
    values = _field_values(bank, F)
    _require_rkhs(bank, values)
    S = _mask(bank, S)
    zeta = np.where(S, values, -values)
    field = F.field if isinstance(F, CoefficientField) else ("complex" if np.iscomplexobj(values) else "real")
    G = apply_kernel(bank, CoefficientField(zeta, bank.labels, bank.nu, field))
    return G


def phase_infimum_sq(F, G, nu, field: str = "complex") -> float:
    """min over unimodular alpha of ||F - alpha G||^2, in closed form."""
    F, G = _vals(F), _vals(G)
    ip = field_inner(F, G, nu)
    overlap = abs(ip.real) if field == "real" else abs(ip)
    val = field_norm_sq(F, nu) + field_norm_sq(G, nu) - 2 * overlap
    return max(val, 0.0)


def _vals(F):
    return F.values if isinstance(F, CoefficientField) else np.asarray(F)


def modulus_gap_sq(F, G, nu) -> float:
    """|| |F| - |G| ||^2."""
    return field_norm_sq(np.abs(_vals(F)) - np.abs(_vals(G)), nu)


def field_of(F) -> str:
    if isinstance(F, CoefficientField):
        return F.field
    return "complex" if np.iscomplexobj(F) else "real"


def verify_gs_identities(bank: FilterBank, F, S) -> dict:
    """Both sides of the two test-function relations for one mask.

    modulus: || |F| - |G_S| ||^2  <=  4 ||[K, P_S] F||^2
    distance: inf_alpha ||F - alpha G_S||^2  ==  4 (min masked energy - commutator energy)
    """
    values = _field_values(bank, F)
    S = _mask(bank, S)
    G = build_test_function(bank, F, S)
    comm = commutator_norm_sq(bank, values, S)
    a = masked_norm_sq(bank, values, S)
    b = masked_norm_sq(bank, values, ~S)
    return {
        "modulus_lhs": modulus_gap_sq(values, G.values, bank.nu),
        "modulus_rhs": 4.0 * comm,
        "distance_lhs": phase_infimum_sq(values, G.values, bank.nu, field_of(F)),
        "distance_rhs": 4.0 * (min(a, b) - comm),
        "commutator_sq": comm,
        "min_masked_sq": min(a, b),
    }


def stability_lower_bound(cheeger_value: float) -> float:
    """sqrt(1/C - 1), +inf at C = 0."""
    c = float(cheeger_value)
    if not 0.0 <= c <= 1.0 + 1e-12:
        raise ValueError(f"Cheeger value {c} outside [0, 1]")
    if c == 0.0:
        return math.inf
    return math.sqrt(max(1.0 / c - 1.0, 0.0))


def stability_upper_bound_real(cheeger_value: float, field: str = "real") -> float:
    """2 sqrt(1/C - 1) + 1 for real fields, +inf at C = 0."""
    if field != "real":
        raise InapplicableBoundError("the sign-retrieval upper bound needs a real field")
    c = float(cheeger_value)
    if not 0.0 <= c <= 1.0 + 1e-12:
        raise ValueError(f"Cheeger value {c} outside [0, 1]")
    if c == 0.0:
        return math.inf
    return 2.0 * math.sqrt(max(1.0 / c - 1.0, 0.0)) + 1.0


def sign_alignment_mask(F, H) -> np.ndarray:
    """{x : F(x) H(x) >= 0}; zeros of the product belong to the mask."""
    if field_of(F) != "real" or field_of(H) != "real":
        raise InapplicableBoundError("sign alignment is only defined for real fields")
    a, b = np.asarray(_vals(F)), np.asarray(_vals(H))
    if np.iscomplexobj(a) or np.iscomplexobj(b):
        a, b = a.real, b.real
    if a.shape != b.shape:
        raise DimensionError("fields have different shapes")
    return a * b >= 0


@dataclass(frozen=True, eq=False)
class Weight:
    """Symmetric nonnegative weight on X x X (flat indexing)."""

    matrix: np.ndarray
    measure: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        mu = np.asarray(self.measure, dtype=np.float64).reshape(-1)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != mu.size:
            raise DimensionError("weight must be a square matrix matching the measure")
        if np.any(m < 0):
            raise ValueError("weight has negative entries")
        if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(m)))):
            raise ValueError("weight is not symmetric")
        if not np.any(m > 0):
            raise ValueError("weight vanishes identically")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "measure", mu)

    @property
    def uniform_l1(self) -> float:
        """max_y sum_x omega(x, y) mu(x)."""
        return float(np.max(self.measure @ self.matrix))

    @classmethod
    def from_kernel(cls, bank: FilterBank) -> "Weight":
        """omega = |k| pointwise."""
        kmat = np.abs(KernelOperator(bank).kernel_matrix())
        return cls(0.5 * (kmat + kmat.T), np.tile(bank.nu, bank.n))


def weighted_problem(values: np.ndarray, weight: Weight) -> _search.RatioProblem:
    mu = weight.measure
    v = np.abs(values.reshape(-1)) ** 2 * mu
    Om = weight.matrix * mu[:, None]  # Om[x, y] = omega(x, y) mu(x)
    d = Om.sum(axis=0)
    M = Om * v[None, :]
    total = float(v @ d)
    return _search.RatioProblem(c=v * d + Om @ v, w=v * d, floor=(ADMISSIBLE_REL**2) * total, Q=M + M.T)


def weighted_quotient(F, weight: Weight, S) -> float:
    values = _vals(F)
    problem = weighted_problem(values, weight)
    return problem.ratio(np.asarray(S, dtype=bool).reshape(-1))


def weighted_kernel_cheeger(
    F,
    weight: Weight,
    strategy: str = "exhaustive",
    budget: Optional[int] = None,
    seed: int = DEFAULT_SEED,
) -> CheegerResult:
    """Cheeger constant of |F| against the weight omega (phase-blind)."""
    strategy = normalize_strategy(strategy)
    values = np.asarray(_vals(F))
    if weight.measure.size != values.size:
        raise DimensionError("weight and field sizes differ")
    if not np.any(values):
        raise UndefinedInputError("the Cheeger constant of the zero field is undefined")
    problem = weighted_problem(values, weight)
    fallback = weight.uniform_l1 ** -2
    if strategy == "exhaustive":
        out = _search.exhaustive(problem)
        certified = True
    elif strategy == "product_sets":
        n, L = values.shape
        if L > _search.EXHAUSTIVE_CAP:
            raise BudgetError("too many labels for product sets")
        agg = np.kron(np.ones((n, 1)), np.eye(L))  # flat point -> label
        sub = _search.RatioProblem(
            c=problem.c @ agg, w=problem.w @ agg, floor=problem.floor, Q=agg.T @ problem.Q @ agg
        )
        out = _search.exhaustive(sub)
        if out.mask is not None:
            out = _search.SearchOutcome(np.tile(out.mask, n), out.value, out.evaluated)
        certified = False
    else:
        restarts = DEFAULT_RESTARTS if budget is None else int(budget)
        out = _search.local_search(problem, restarts, np.random.default_rng(seed))
        certified = False
    if out.mask is None:
        return CheegerResult(fallback, None, strategy, certified, out.evaluated)
    mask = out.mask.reshape(values.shape)
    return CheegerResult(problem.ratio(out.mask), mask, strategy, certified, out.evaluated)
