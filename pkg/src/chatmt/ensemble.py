"""Greedy ensemble selection trading off validation quality against
inter-model similarity.

Each model gets a weighted score combining its validation metric
(rescaled into the similarity range) with its diversity (how dissimilar
it is from the other candidates). The best-scoring model seeds the
pool; every following step adds the remaining model least similar on
average to the pool. The pairwise similarity matrix is supplied by the
caller, so any system-level metric works.

Ties break toward the higher validation score, then the
lexicographically smaller model id. Degenerate inputs (all validation
scores equal, or all similarities equal) zero out the corresponding
term instead of failing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class ScoreSet:
    model_ids: tuple[str, ...]
    comet: tuple[float, ...]
    pairwise: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        n = len(self.model_ids)
        if n < 2:
            raise ValueError("need at least 2 candidate models")
        if len(set(self.model_ids)) != n:
            raise ValueError("model ids must be unique")
        if len(self.comet) != n:
            raise ValueError("comet length must match model count")
        if len(self.pairwise) != n or any(len(row) != n for row in self.pairwise):
            raise ValueError(f"pairwise must be {n}x{n}")
        values = list(self.comet) + [v for row in self.pairwise for v in row]
        if not all(math.isfinite(v) for v in values):
            raise ValueError("all scores must be finite")

    @classmethod
    def from_lists(cls, model_ids, comet, pairwise) -> "ScoreSet":
        return cls(
            model_ids=tuple(model_ids),
            comet=tuple(float(c) for c in comet),
            pairwise=tuple(tuple(float(v) for v in row) for row in pairwise),
        )

    @property
    def n(self) -> int:
        return len(self.model_ids)


@dataclass
class EnsembleSelection:
    selected: list[str]
    weighted_scores: list[float]
    # One entry per greedy step: [(candidate id, avg similarity to pool)].
    step_diagnostics: list[list[tuple[str, float]]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "selected": list(self.selected),
            "weighted_scores": list(self.weighted_scores),
            "step_diagnostics": [
                [{"model": m, "avg_similarity": s} for m, s in step]
                for step in self.step_diagnostics
            ],
        }


def _avg_self_similarity_exact(s: ScoreSet) -> list[Fraction]:
    n = s.n
    return [
        sum((Fraction(s.pairwise[i][j]) for j in range(n) if j != i),
            Fraction(0)) / (n - 1)
        for i in range(n)
    ]


def avg_self_similarity(s: ScoreSet) -> list[float]:
    """Row-wise mean of pairwise similarities, diagonal excluded."""
    return [float(v) for v in _avg_self_similarity_exact(s)]


def _weighted_scores_exact(
    comet: Sequence[Fraction], self_sim: Sequence[Fraction]
) -> list[Fraction]:
    # Exact rational arithmetic: the formula cancels algebraically in
    # several configurations (with n=2 the two scores tie identically),
    # and float rounding there would defeat the documented tie-break.
    if len(comet) != len(self_sim) or len(comet) < 2:
        raise ValueError("comet and self_sim must have equal length >= 2")
    c_min, c_max = min(comet), max(comet)
    s_min, s_max = min(self_sim), max(self_sim)
    c_range = c_max - c_min
    s_range = s_max - s_min
    weight = Fraction(0) if c_range == 0 else s_range / c_range
    return [
        (c - c_min) * weight + (s_max - s) for c, s in zip(comet, self_sim)
    ]


def weighted_scores(comet: Sequence[float], self_sim: Sequence[float]) -> list[float]:
    """score_i = (c_i - min(C)) * (range(S)/range(C)) + (max(S) - s_i).

    A flat C makes the performance term 0; a flat S zeroes both the
    weight and the diversity term.
    """
    exact = _weighted_scores_exact(
        [Fraction(c) for c in comet], [Fraction(v) for v in self_sim]
    )
    return [float(v) for v in exact]


def _avg_similarity_to_pool(s: ScoreSet, i: int, pool: Sequence[int]) -> Fraction:
    return sum((Fraction(s.pairwise[i][j]) for j in pool), Fraction(0)) / len(pool)


def select_ensemble(s: ScoreSet, e: int) -> EnsembleSelection:
    """Greedy selection of e models: best weighted score first, then
    repeatedly the remaining model least similar to the pool."""
    if not 1 <= e <= s.n:
        raise ValueError(f"ensemble size {e} out of range 1..{s.n}")
    scores = _weighted_scores_exact(
        [Fraction(c) for c in s.comet], _avg_self_similarity_exact(s)
    )

    # Highest weighted score; ties prefer higher comet, then smaller id.
    top = min(
        range(s.n),
        key=lambda i: (-scores[i], -s.comet[i], s.model_ids[i]),
    )
    pool = [top]
    diagnostics: list[list[tuple[str, float]]] = []

    while len(pool) < e:
        remaining = [i for i in range(s.n) if i not in pool]
        sims = {i: _avg_similarity_to_pool(s, i, pool) for i in remaining}
        diagnostics.append([(s.model_ids[i], float(sims[i])) for i in remaining])
        best = min(
            remaining,
            key=lambda i: (sims[i], -s.comet[i], s.model_ids[i]),
        )
        pool.append(best)

    return EnsembleSelection(
        selected=[s.model_ids[i] for i in pool],
        weighted_scores=[float(v) for v in scores],
        step_diagnostics=diagnostics,
    )
