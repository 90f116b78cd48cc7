"""Rank correlation machinery for relating metrics to deployment gas.

Spearman's rho is computed from average ranks with exact integer sums
(ranks are doubled so ties stay integral), which makes the result
independent of row order. Two-sided p-values are exact permutation
probabilities for n <= 10 and use the Student-t approximation above that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from functools import lru_cache
from statistics import NormalDist
from typing import Optional, Sequence

from scipy import stats as _sp

__all__ = [
    "EXACT_MAX_N",
    "CorrelationCell",
    "CorrelationReport",
    "MetricTable",
    "UndefinedCorrelation",
    "average_ranks",
    "correlation_matrix",
    "effect_class",
    "holm_adjust",
    "margin_of_error",
    "sample_size",
    "sloc_histogram",
    "spearman_pvalue",
    "spearman_rho",
]

EXACT_MAX_N = 10
SLOC_BINS = ("SLOC < 50", "50 <= SLOC < 100", "100 <= SLOC < 500", "SLOC >= 500")


class UndefinedCorrelation(ValueError):
    """Raised when a rank correlation involves a constant column."""


# --------------------------------------------------------------------------
# ranks and rho


def average_ranks(values: Sequence[float]) -> list[Fraction]:
    """1-based ranks; tied values share the mean of the ranks they span."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks: list[Fraction] = [Fraction(0)] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = Fraction(i + j + 2, 2)
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def _doubled_ranks(values: Sequence[float]) -> list[int]:
    return [int(2 * r) for r in average_ranks(values)]


def _centered_moments(a: Sequence[int], b: Sequence[int]) -> tuple[int, int, int]:
    n = len(a)
    sa, sb = sum(a), sum(b)
    sab = n * sum(x * y for x, y in zip(a, b)) - sa * sb
    saa = n * sum(x * x for x in a) - sa * sa
    sbb = n * sum(y * y for y in b) - sb * sb
    return sab, saa, sbb


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman's rho: Pearson correlation of average ranks."""
    if len(x) != len(y):
        raise ValueError("x and y must have the same length")
    if len(x) < 3:
        raise ValueError("spearman_rho needs at least 3 observations")
    rx, ry = _doubled_ranks(x), _doubled_ranks(y)
    sxy, sxx, syy = _centered_moments(rx, ry)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("correlation is undefined for a constant column")
    rho = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, rho))


# --------------------------------------------------------------------------
# p-values


@lru_cache(maxsize=None)
def _permutation_counts(a: tuple[int, ...], b: tuple[int, ...]) -> dict[int, int]:
    """Distribution of sum(a[i] * b[perm[i]]) over all permutations of b.

    Dynamic programme over subsets of b: positions of ``a`` are filled in
    order, the bitmask records which entries of ``b`` are used.
    """
    n = len(a)
    layer: dict[int, dict[int, int]] = {0: {0: 1}}
    for pos in range(n):
        nxt: dict[int, dict[int, int]] = {}
        for mask, sums in layer.items():
            for j in range(n):
                if mask & (1 << j):
                    continue
                # equal b values are interchangeable: always use the lowest unused copy
                if any(b[k] == b[j] and not mask & (1 << k) for k in range(j)):
                    continue
                target = nxt.setdefault(mask | (1 << j), {})
                add = a[pos] * b[j]
                for s, c in sums.items():
                    target[s + add] = target.get(s + add, 0) + c
        layer = nxt
    (final,) = layer.values()
    # undo the duplicate-collapsing: each distinct arrangement stands for prod(m!) permutations
    mult = 1
    for v in set(b):
        mult *= math.factorial(b.count(v))
    return {s: c * mult for s, c in final.items()}


def _exact_pvalue(rx: Sequence[int], ry: Sequence[int]) -> float:
    n = len(rx)
    sa, sb = sum(rx), sum(ry)
    observed = n * sum(x * y for x, y in zip(rx, ry)) - sa * sb
    counts = _permutation_counts(tuple(rx), tuple(sorted(ry)))
    extreme = sum(c for s, c in counts.items() if abs(n * s - sa * sb) >= abs(observed))
    return extreme / math.factorial(n)


def spearman_pvalue(
    rho: float,
    n: int,
    ranks_x: Optional[Sequence[float]] = None,
    ranks_y: Optional[Sequence[float]] = None,
) -> float:
    """Two-sided p-value for Spearman's rho under the null of independence.

    For n <= 10 the p-value is the exact permutation probability of a
    correlation at least as extreme. When the data's ranks are supplied the
    permutation null is taken over those (tie-aware) ranks; otherwise ranks
    1..n without ties are assumed and ``rho`` is the observed statistic.
    For larger n the t-statistic rho * sqrt((n-2)/(1-rho^2)) is referred to
    Student's t with n-2 degrees of freedom.
    """
    if n < 3:
        raise ValueError("spearman_pvalue needs n >= 3")
    if n <= EXACT_MAX_N:
        if ranks_x is not None and ranks_y is not None:
            return _exact_pvalue([int(2 * Fraction(r)) for r in ranks_x], [int(2 * Fraction(r)) for r in ranks_y])
        base = list(range(1, n + 1))
        counts = _permutation_counts(tuple(base), tuple(base))
        denom = n * (n * n - 1)
        target = abs(rho) - 1e-12
        extreme = sum(
            c for s, c in counts.items() if abs(1 - 6 * (2 * sum(i * i for i in base) - 2 * s) / denom) >= target
        )
        return extreme / math.factorial(n)
    if rho == 0:
        return 1.0
    if abs(rho) >= 1.0:
        return 0.0
    t = rho * math.sqrt((n - 2) / (1 - rho * rho))
    return float(min(1.0, 2 * _sp.t.sf(abs(t), n - 2)))


def holm_adjust(pvalues: Sequence[float]) -> list[float]:
    """Holm step-down adjustment, returned in input order."""
    m = len(pvalues)
    order = sorted(range(m), key=lambda i: (pvalues[i], i))
    adjusted = [0.0] * m
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, min(1.0, (m - rank) * pvalues[idx]))
        adjusted[idx] = running
    return adjusted


def effect_class(rho: float) -> str:
    """Cohen's bands on |rho|; values below 0.10 are negligible."""
    r = abs(rho)
    if r >= 0.50:
        return "large"
    if r >= 0.30:
        return "medium"
    if r >= 0.10:
        return "small"
    return "negligible"


# --------------------------------------------------------------------------
# correlation matrix


@dataclass
class MetricTable:
    columns: list[str]
    rows: list[tuple[str, dict[str, float]]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [rid for rid, _ in self.rows]
        if len(set(ids)) != len(ids):
            raise ValueError("row ids must be unique")
        for rid, values in self.rows:
            if set(values) != set(self.columns):
                raise ValueError(f"row {rid!r} does not match the table columns")

    def column(self, name: str) -> list[float]:
        return [values[name] for _, values in self.rows]


@dataclass
class CorrelationCell:
    rho: Optional[float]
    p_raw: Optional[float]
    p_adj: Optional[float]
    n: int
    effect: Optional[str]
    significant: bool

    @property
    def blank(self) -> bool:
        return self.rho is None

    def to_dict(self) -> dict:
        def r(v: Optional[float]) -> Optional[float]:
            return None if v is None else float(f"{v:.12g}")

        return {
            "rho": r(self.rho),
            "p_raw": r(self.p_raw),
            "p_adj": r(self.p_adj),
            "n": self.n,
            "effect": self.effect,
            "significant": self.significant,
        }


@dataclass
class CorrelationReport:
    columns: list[str]
    matrix: dict[tuple[str, str], CorrelationCell]
    alpha: float = 0.05
    adjustment: str = "holm"
    excluded: list[str] = field(default_factory=list)
    n: int = 0

    def cell(self, a: str, b: str) -> CorrelationCell:
        return self.matrix[(a, b)]

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "alpha": self.alpha,
            "adjustment": self.adjustment,
            "p_value_method": f"exact permutation for n <= {EXACT_MAX_N}, Student-t approximation above",
            "n": self.n,
            "columns": self.columns,
            "excluded_constant_columns": self.excluded,
            "matrix": {a: {b: self.matrix[(a, b)].to_dict() for b in self.columns} for a in self.columns},
        }


def correlation_matrix(table: MetricTable, alpha: float = 0.05) -> CorrelationReport:
    """All pairwise Spearman cells with Holm adjustment over the upper triangle."""
    n = len(table.rows)
    if n < 3:
        raise ValueError("correlation_matrix needs at least 3 rows")
    cols = list(table.columns)
    data = {c: table.column(c) for c in cols}
    ranks = {c: _doubled_ranks(data[c]) for c in cols}
    constant = [c for c in cols if len(set(data[c])) == 1]
    blank = CorrelationCell(None, None, None, n, None, False)
    matrix: dict[tuple[str, str], CorrelationCell] = {}
    family: list[tuple[str, str]] = []
    raw: list[float] = []
    for i, a in enumerate(cols):
        for b in cols[i:]:
            if a in constant or b in constant:
                matrix[(a, b)] = matrix[(b, a)] = blank
                continue
            if a == b:
                matrix[(a, a)] = CorrelationCell(1.0, 0.0, 0.0, n, "large", True)
                continue
            sxy, sxx, syy = _centered_moments(ranks[a], ranks[b])
            rho = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
            if n <= EXACT_MAX_N:
                p = _exact_pvalue(ranks[a], ranks[b])
            else:
                p = spearman_pvalue(rho, n)
            family.append((a, b))
            raw.append(p)
            matrix[(a, b)] = CorrelationCell(rho, p, None, n, effect_class(rho), False)
    for (a, b), p_adj in zip(family, holm_adjust(raw)):
        cell = matrix[(a, b)]
        cell.p_adj = p_adj
        cell.significant = p_adj <= alpha
        matrix[(b, a)] = cell
    return CorrelationReport(cols, matrix, alpha, "holm", constant, n)


# --------------------------------------------------------------------------
# sampling and size bins


def _z(confidence: float) -> float:
    return NormalDist().inv_cdf((1 + confidence) / 2)


def margin_of_error(population: int, sample: int, confidence: float = 0.95) -> float:
    """Worst-case (p = 0.5) margin of error with finite-population correction."""
    if not 0 < sample <= population:
        raise ValueError("need 0 < sample <= population")
    if population == 1:
        return 0.0
    fpc = math.sqrt((population - sample) / (population - 1))
    return _z(confidence) * math.sqrt(0.25 / sample) * fpc


def sample_size(population: int, margin: float, confidence: float = 0.95) -> int:
    """Smallest sample whose margin of error does not exceed ``margin``."""
    if not 0 < margin < 1:
        raise ValueError("margin must lie in (0, 1)")
    lo, hi = 1, population
    while lo < hi:
        mid = (lo + hi) // 2
        if margin_of_error(population, mid, confidence) <= margin:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _percent(count: int, total: int) -> float:
    if total == 0:
        return 0.0
    value = Decimal(count * 100) / Decimal(total)
    return float(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def sloc_histogram(slocs: Sequence[int]) -> list[tuple[str, int, float]]:
    """Counts and one-decimal percentages for the four size bins."""
    counts = [0, 0, 0, 0]
    for s in slocs:
        if s < 50:
            counts[0] += 1
        elif s < 100:
            counts[1] += 1
        elif s < 500:
            counts[2] += 1
        else:
            counts[3] += 1
    total = len(slocs)
    return [(label, c, _percent(c, total)) for label, c in zip(SLOC_BINS, counts)]
