"""Minimisation of Cheeger-type ratios over subsets of a finite set.

Every Cheeger constant in this package has the form

    min over 0/1 vectors s of  (c.s - s^T Q s) / min(w.s, W - w.s)

with Q symmetric and W = sum(w).  Only s with both denominators above a
floor are admissible.  Kernel, weighted and graph variants differ only in
how c, Q and w are built, so they share the solvers here.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BudgetError

EXHAUSTIVE_CAP = 24
LOW_BITS = 12
CHUNK_ELEMS = 1 << 20
# side weights below this multiple of eps * W are indistinguishable from rounding
ROUNDING_FLOOR = 256 * np.finfo(np.float64).eps


@dataclass
class RatioProblem:
    c: np.ndarray
    w: np.ndarray
    floor: float
    Q: Optional[np.ndarray] = None
    # matrix-free access for instances too big to densify
    column: Optional[Callable[[int], np.ndarray]] = None
    diagonal: Optional[np.ndarray] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64)
        self.w = np.asarray(self.w, dtype=np.float64)
        self.floor = max(float(self.floor), ROUNDING_FLOOR * float(np.sum(self.w)))
        if self.Q is not None:
            self.Q = np.asarray(self.Q, dtype=np.float64)
            self.diagonal = np.diag(self.Q).copy()
        elif self.column is None or self.diagonal is None:
            raise ValueError("need either a dense Q or column access with a diagonal")

    @property
    def size(self) -> int:
        return self.c.shape[0]

    @property
    def total(self) -> float:
        return float(np.sum(self.w))

    def col(self, j: int) -> np.ndarray:
        return self.Q[:, j] if self.Q is not None else self.column(j)

    def matvec(self, s: np.ndarray) -> np.ndarray:
        if self.Q is not None:
            return self.Q @ s
        out = np.zeros(self.size)
        for j in np.flatnonzero(s):
            out += self.col(j)
        return out

    def admissible(self, ws, total=None):
        total = self.total if total is None else total
        return (ws > self.floor) & (total - ws > self.floor)

    def ratio(self, s: np.ndarray) -> float:
        s = np.asarray(s, dtype=np.float64)
        ws = float(self.w @ s)
        if not self.admissible(ws):
            return np.inf
        num = float(self.c @ s - s @ self.matvec(s))
        return num / min(ws, self.total - ws)


@dataclass
class SearchOutcome:
    mask: Optional[np.ndarray]  # None when nothing is admissible
    value: float
    evaluated: int


def _subset_table(bits: int):
    """All 2**bits 0/1 rows over the given number of bits (row m <-> integer m)."""
    m = np.arange(1 << bits, dtype=np.int64)
    return ((m[:, None] >> np.arange(bits)) & 1).astype(np.float64)


def exhaustive(problem: RatioProblem, cap: int = EXHAUSTIVE_CAP) -> SearchOutcome:
    """Exact minimum over all subsets, each complementary pair visited once.

    The last element is pinned outside S, which picks one representative of
    every pair {S, S^c}; the ratio is complement-symmetric so nothing is lost.
    Masks are scanned in increasing integer order (bit i <-> element i) and
    ties keep the first mask found.
    """
    n = problem.size
    if n > cap:
        raise BudgetError(f"exhaustive search over {n} elements exceeds the cap of {cap}")
    if problem.Q is None:
        raise BudgetError("exhaustive search needs a dense quadratic form")
    if n < 2:
        return SearchOutcome(None, np.inf, 0)
    free = n - 1
    lo_bits = min(LOW_BITS, free)
    hi_bits = free - lo_bits
    Q, c, w = problem.Q, problem.c, problem.w
    total = problem.total

    SL = _subset_table(lo_bits)
    QLL = Q[:lo_bits, :lo_bits]
    cL = SL @ c[:lo_bits] - np.einsum("mi,ij,mj->m", SL, QLL, SL)
    wL = SL @ w[:lo_bits]

    hi_idx = np.arange(lo_bits, free)
    QLH = Q[:lo_bits][:, hi_idx]
    QHH = Q[np.ix_(hi_idx, hi_idx)]
    cH_full, wH_full = c[hi_idx], w[hi_idx]

    n_hi = 1 << hi_bits
    chunk = max(1, CHUNK_ELEMS >> lo_bits)
    best_val, best_mask = np.inf, None
    for start in range(0, n_hi, chunk):
        hm = np.arange(start, min(start + chunk, n_hi), dtype=np.int64)
        SH = ((hm[:, None] >> np.arange(hi_bits)) & 1).astype(np.float64)
        cH = SH @ cH_full - np.einsum("mi,ij,mj->m", SH, QHH, SH)
        wH = SH @ wH_full
        cross = SH @ (QLH.T @ SL.T)  # (hi, lo)
        num = cH[:, None] + cL[None, :] - 2.0 * cross
        ws = wH[:, None] + wL[None, :]
        ok = problem.admissible(ws, total)
        den = np.minimum(ws, total - ws)
        ratio = np.full(num.shape, np.inf)
        np.divide(num, den, out=ratio, where=ok)
        k = int(np.argmin(ratio))
        val = ratio.flat[k]
        if val < best_val:
            hi, lo = divmod(k, 1 << lo_bits)
            best_val = float(val)
            best_mask = (int(hm[hi]) << lo_bits) | lo
    evaluated = 1 << free
    if best_mask is None:
        return SearchOutcome(None, np.inf, evaluated)
    mask = ((best_mask >> np.arange(n)) & 1).astype(bool)
    return SearchOutcome(mask, best_val, evaluated)


def _descend(problem: RatioProblem, s: np.ndarray, max_steps: int):
    """Steepest single-flip descent from s; returns (s, ratio)."""
    c, w, diag = problem.c, problem.w, problem.diagonal
    total = problem.total
    s = s.astype(np.float64).copy()
    r = problem.matvec(s)
    num = float(c @ s - s @ r)
    ws = float(w @ s)
    cur = num / min(ws, total - ws) if problem.admissible(ws) else np.inf
    for _ in range(max_steps):
        delta = 1.0 - 2.0 * s
        new_num = num + delta * c - (2.0 * delta * r + diag)
        new_ws = ws + delta * w
        ok = problem.admissible(new_ws, total)
        den = np.minimum(new_ws, total - new_ws)
        cand = np.full(s.shape, np.inf)
        np.divide(new_num, den, out=cand, where=ok)
        j = int(np.argmin(cand))
        if np.isfinite(cur):
            improved = cand[j] < cur - 1e-15 * max(1.0, abs(cur))
        else:
            improved = np.isfinite(cand[j])
        if not improved:
            break
        d = delta[j]
        r = r + d * problem.col(j)
        s[j] += d
        num, ws, cur = float(new_num[j]), float(new_ws[j]), float(cand[j])
    return s, cur


def local_search(
    problem: RatioProblem,
    restarts: int,
    rng: np.random.Generator,
    seeds=(),
    max_steps: Optional[int] = None,
) -> SearchOutcome:
    """Best single-flip steepest descent over given seeds plus random restarts."""
    n = problem.size
    max_steps = max_steps or 4 * n + 10
    starts = [np.asarray(s, dtype=bool) for s in seeds]
    for _ in range(restarts):
        starts.append(rng.random(n) < 0.5)
    best_val, best = np.inf, None
    for s0 in starts:
        s, val = _descend(problem, s0, max_steps)
        if val < best_val:
            best_val, best = val, s.astype(bool)
    return SearchOutcome(best, best_val, len(starts))
