"""Observer evaluations to visual p-values, critical counts, and power.

A lineup with the data panel at an unknown position is a testing device:
under the null every observer picks the data panel with probability 1/m,
so the number of identifications in N independent evaluations is
Binomial(N, 1/m).  Everything here is an exact tail computation on that
distribution; no approximations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .lineup import Lineup

RESULT_SCHEMA_VERSION = 1

REASONS = ("Outliers", "LeftSideDifferent", "RightSideDifferent", "PointsCurve")

# Guards the ceiling of an accumulated float count against values like
# 2.0000000000000004 arising from sums of reciprocals.
_CEIL_EPS = 1e-9

DEFAULT_ALPHAS = (0.1, 0.05, 0.01)


@dataclass(frozen=True)
class Evaluation:
    """One observer's submitted answer for one lineup."""

    lineup_id: str
    observer_id: str
    selected_panels: frozenset[int]
    reasons: frozenset[str] = frozenset()
    free_text: str = ""
    timestamp: str = ""

    def __post_init__(self) -> None:
        panels = frozenset(int(i) for i in self.selected_panels)
        object.__setattr__(self, "selected_panels", panels)
        if not panels:
            raise ValueError("at least one panel must be selected")
        if any(i < 1 for i in panels):
            raise ValueError("panel indices start at 1")
        reasons = frozenset(str(r) for r in self.reasons)
        unknown = reasons - set(REASONS)
        if unknown:
            raise ValueError(f"unknown reasons: {sorted(unknown)}")
        object.__setattr__(self, "reasons", reasons)

    def to_dict(self) -> dict:
        return {
            "lineup_id": self.lineup_id,
            "observer_id": self.observer_id,
            "selected_panels": sorted(self.selected_panels),
            "reasons": sorted(self.reasons),
            "free_text": self.free_text,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Evaluation":
        return cls(
            lineup_id=doc["lineup_id"],
            observer_id=doc["observer_id"],
            selected_panels=frozenset(doc["selected_panels"]),
            reasons=frozenset(doc.get("reasons", ())),
            free_text=doc.get("free_text", ""),
            timestamp=doc.get("timestamp", ""),
        )


@dataclass(frozen=True)
class VisualTestResult:
    """Aggregate outcome of one lineup's evaluations."""

    lineup_id: str
    N: int
    y_weighted: float
    m: int
    p_value: float
    reject_at: dict[float, bool] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.y_weighted <= self.N + _CEIL_EPS:
            raise ValueError("weighted count must lie in [0, N]")
        if not 0.0 < self.p_value <= 1.0:
            raise ValueError("p_value must lie in (0, 1]")

    def to_dict(self) -> dict:
        return {
            "schema_version": RESULT_SCHEMA_VERSION,
            "lineup_id": self.lineup_id,
            "N": self.N,
            "y_weighted": self.y_weighted,
            "m": self.m,
            "p_value": self.p_value,
            "reject_at": {str(a): bool(r) for a, r in self.reject_at.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def binomial_tail(k: int, n: int, p: float) -> float:
    """P(B >= k) for B ~ Binomial(n, p), by exact summation."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if n < 0:
        raise ValueError("n must be non-negative")
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    q = 1.0 - p
    total = 0.0
    for j in range(k, n + 1):
        total += math.comb(n, j) * p**j * q ** (n - j)
    return min(total, 1.0)


def evaluation_weight(e: Evaluation, data_position: int) -> float:
    """Reciprocal-count credit: 1/|picks| if the data panel is among them."""
    if data_position in e.selected_panels:
        return 1.0 / len(e.selected_panels)
    return 0.0


def visual_p_value(y_weighted: float, N: int, m: int) -> float:
    """P(at least ceil(y) identifications out of N when guessing at 1/m).

    Fractional weighted counts are ceiled first, the conservative
    convention: partial credit never counts as a full identification.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    if N < 0:
        raise ValueError("N must be non-negative")
    if y_weighted < 0.0 or y_weighted > N + _CEIL_EPS:
        raise ValueError("y_weighted must lie in [0, N]")
    k = math.ceil(y_weighted - _CEIL_EPS)
    return binomial_tail(k, N, 1.0 / m)


def critical_count(N: int, m: int, alpha: float) -> int:
    """Smallest k with P(Binomial(N, 1/m) >= k) <= alpha.

    The >= convention: observing y >= critical_count(N, m, alpha) rejects
    at level alpha.  Always at least 1, since P(B >= 0) = 1 > alpha.

    Computed in exact rational arithmetic: at a boundary where the tail
    equals alpha exactly (e.g. N=2, m=10, alpha=0.01), float rounding
    would otherwise flip the comparison.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if m < 2:
        raise ValueError("m must be at least 2")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    p = Fraction(1, m)
    q = 1 - p
    alpha_exact = Fraction(alpha)
    pmf = q**N
    cdf = pmf  # P(B <= k-1) at the top of iteration k
    for k in range(1, N + 1):
        if 1 - cdf <= alpha_exact:
            return k
        pmf = pmf * (N - k + 1) * p / (k * q)
        cdf += pmf
    return N + 1


def lineup_power(p_hat: float, N: int, m: int, alpha: float) -> float:
    """P(weighted count reaches the critical count) when each of N observers
    identifies the data with shared probability p_hat."""
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError("p_hat must lie in [0, 1]")
    y_alpha = critical_count(N, m, alpha)
    return binomial_tail(y_alpha, N, p_hat)


def fold_evaluations(
    evaluations: list[Evaluation],
    lineup_id: str,
    m: int,
    data_position: int,
    allow_multiple_select: bool,
) -> tuple[int, float]:
    """Distinct-observer count N and weighted identification count y.

    First submission per observer counts; later ones are ignored.  An
    evaluation naming a panel beyond m, referencing another lineup, or
    multi-picking on a single-select lineup is malformed and rejected.
    """
    seen: set[str] = set()
    n_count = 0
    y = 0.0
    for e in evaluations:
        if e.lineup_id != lineup_id:
            raise ValueError(f"evaluation references lineup {e.lineup_id!r}, not {lineup_id!r}")
        if max(e.selected_panels) > m:
            raise ValueError("selected panel index exceeds panel count")
        if not allow_multiple_select and len(e.selected_panels) > 1:
            raise ValueError("lineup does not allow multiple selections")
        if e.observer_id in seen:
            continue
        seen.add(e.observer_id)
        n_count += 1
        y += evaluation_weight(e, data_position)
    return n_count, y


def aggregate(
    evaluations: list[Evaluation],
    lineup: Lineup,
    alphas: tuple[float, ...] = DEFAULT_ALPHAS,
) -> VisualTestResult:
    """Fold evaluations into a test result for one assembled lineup."""
    m = lineup.spec.m
    n_count, y = fold_evaluations(
        evaluations, lineup.id, m, lineup.data_position, lineup.spec.allow_multiple_select
    )
    p = visual_p_value(y, n_count, m)
    return VisualTestResult(
        lineup_id=lineup.id,
        N=n_count,
        y_weighted=y,
        m=m,
        p_value=p,
        reject_at={a: p <= a for a in alphas},
    )
