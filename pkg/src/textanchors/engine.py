"""Exhaustive anchor selection for an arbitrary evaluation function.

Given scores ``p(A)`` for every candidate anchor:

1. keep the anchors with ``p(A) >= 1 - epsilon``;
2. among those, keep the ones of minimal length;
3. among those, keep the ones of maximal ``p``;

and return one survivor of step 3.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, TypeVar

import numpy as np

from .errors import InvalidEpsilon, TooManyAnchors
from .text import Anchor, LocalStats, MultiplicityAnchor

MAX_ANCHORS = 10**6
DEFAULT_EPSILON = 0.05

A = TypeVar("A", Anchor, MultiplicityAnchor)


def enumerate_anchors(stats: LocalStats, limit: int = MAX_ANCHORS) -> list[MultiplicityAnchor]:
    """All count vectors ``0 <= a_j <= m_j`` except zero, in lexicographic order."""
    total = math.prod(m + 1 for m in stats.multiplicities) - 1
    if total > limit:
        raise TooManyAnchors(f"{total} candidate anchors exceed the limit of {limit}")
    ranges = [range(m + 1) for m in stats.multiplicities]
    return [MultiplicityAnchor(c) for c in itertools.islice(itertools.product(*ranges), 1, None)]


def enumerate_positional(b: int, limit: int = MAX_ANCHORS) -> list[Anchor]:
    """All non-empty position subsets of a length-``b`` document, by bitmask."""
    total = 2**b - 1
    if total > limit:
        raise TooManyAnchors(f"{total} candidate anchors exceed the limit of {limit}")
    return [Anchor(tuple(k for k in range(b) if mask >> k & 1)) for mask in range(1, total + 1)]


@dataclass(frozen=True)
class SelectionResult:
    chosen: Anchor | MultiplicityAnchor
    p_value: float
    candidates_total: int
    size_A1: int
    size_A2: int
    size_A3: int
    epsilon: float
    tie_broken: bool
    fallback: bool = False
    evaluations: tuple = field(default=(), repr=False, compare=False)

    def to_dict(self) -> dict:
        chosen = self.chosen.counts if isinstance(self.chosen, MultiplicityAnchor) else self.chosen.positions
        return {
            "chosen": list(chosen),
            "length": self.chosen.length,
            "p_value": self.p_value,
            "candidates_total": self.candidates_total,
            "size_A1": self.size_A1,
            "size_A2": self.size_A2,
            "size_A3": self.size_A3,
            "epsilon": self.epsilon,
            "tie_broken": self.tie_broken,
            "fallback": self.fallback,
        }


def evaluate(p: Callable[[A], float], anchors: Sequence[A], jobs: int = 1) -> list[float]:
    """Evaluate ``p`` on every anchor; results do not depend on ``jobs``."""
    if jobs <= 1 or len(anchors) < 2:
        return [float(p(a)) for a in anchors]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        chunk = max(1, len(anchors) // (4 * jobs))
        return [float(v) for v in pool.map(p, anchors, chunksize=chunk)]


def select(
    p: Callable[[A], float],
    anchors: Sequence[A],
    epsilon: float = DEFAULT_EPSILON,
    tie: str = "lex",
    seed: int = 0,
    jobs: int = 1,
    values: Sequence[float] | None = None,
) -> SelectionResult:
    """Run the three-stage selection.

    If no anchor reaches ``1 - epsilon`` (possible for estimated or
    approximate ``p``), stage 1 falls back to the anchors of maximal ``p`` and
    the result is flagged. Ties in stage 3 go to the lexicographically
    smallest anchor, or to a seeded uniform draw with ``tie="random"``.
    Precomputed ``values`` aligned with ``anchors`` skip the evaluation.
    """
    if not 0.0 < epsilon < 1.0:
        raise InvalidEpsilon(f"epsilon must lie in (0, 1), got {epsilon}")
    if not anchors:
        raise ValueError("no candidate anchors")
    if tie not in ("lex", "random"):
        raise ValueError(f"unknown tie-break mode {tie!r}")
    scores = list(values) if values is not None else evaluate(p, anchors, jobs)
    if len(scores) != len(anchors):
        raise ValueError("values must align with anchors")

    threshold = 1.0 - epsilon
    a1 = [i for i, v in enumerate(scores) if v >= threshold]
    fallback = not a1
    if fallback:
        best = max(scores)
        a1 = [i for i, v in enumerate(scores) if v == best]
    shortest = min(anchors[i].length for i in a1)
    a2 = [i for i in a1 if anchors[i].length == shortest]
    best = max(scores[i] for i in a2)
    a3 = sorted((i for i in a2 if scores[i] == best), key=lambda i: anchors[i].sort_key())

    if tie == "random" and len(a3) > 1:
        pick = a3[int(np.random.default_rng(seed).integers(len(a3)))]
    else:
        pick = a3[0]
    return SelectionResult(
        chosen=anchors[pick],
        p_value=scores[pick],
        candidates_total=len(anchors),
        size_A1=len(a1),
        size_A2=len(a2),
        size_A3=len(a3),
        epsilon=epsilon,
        tie_broken=len(a3) > 1,
        fallback=fallback,
        evaluations=tuple(zip(anchors, scores)),
    )
