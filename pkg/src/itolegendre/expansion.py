"""Truncated expansions of iterated Ito integrals over Gaussian draws.

A truncated expansion is a linear combination of products of independent
standard Gaussians zeta_j^(i) (one family per Wiener component) minus
correction terms that remove the diagonal contributions. The corrections
are generated combinatorially: every partial matching of positions that
share a nonzero component label contributes a signed term, the sign being
(-1)^(number of pairs). This generator reproduces the hand-written
expansions for multiplicities 1 through 5 term by term; larger
multiplicities are produced by the same rule but are flagged experimental.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .coeffs import CoeffValue, Interval, MultiIndex

CERTIFIED_MAX_K = 5


class ExperimentalWarning(UserWarning):
    """Raised for multiplicities beyond the certified range."""


class MissingCoefficientError(LookupError):
    """A realization requested a coefficient absent from the table."""


@dataclass(frozen=True)
class IndexPattern:
    """Component labels (i_1, ..., i_k) of an iterated integral.

    Label 0 denotes the time component; labels >= 1 name Wiener components.
    Only the coincidence structure matters: which positions carry equal
    nonzero labels.
    """

    labels: tuple[int, ...]

    def __post_init__(self):
        labels = tuple(int(i) for i in self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise ValueError("pattern must have at least one position")
        if any(i < 0 for i in labels):
            raise ValueError(f"labels must be nonnegative, got {labels}")

    @classmethod
    def parse(cls, text: str) -> "IndexPattern":
        """Parse a comma-separated label list such as '1,1,2'."""
        try:
            return cls(tuple(int(part) for part in text.split(",")))
        except ValueError as exc:
            raise ValueError(f"cannot parse pattern {text!r}: {exc}") from exc

    @property
    def k(self) -> int:
        return len(self.labels)

    @property
    def zero_positions(self) -> tuple[int, ...]:
        """Positions carrying the time component (0-based)."""
        return tuple(l for l, i in enumerate(self.labels) if i == 0)

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        """Groups of positions sharing a nonzero label, singletons included."""
        seen: dict[int, list[int]] = {}
        for pos, label in enumerate(self.labels):
            if label != 0:
                seen.setdefault(label, []).append(pos)
        return tuple(tuple(v) for v in
                     sorted(seen.values(), key=lambda block: block[0]))

    @property
    def coincidence_key(self) -> frozenset[frozenset[int]]:
        """Blocks of size >= 2 as a canonical partition key."""
        return frozenset(frozenset(b) for b in self.blocks if len(b) >= 2)


@dataclass(frozen=True)
class MatchingTerm:
    """One signed correction term: matched pairs plus free positions."""

    pairs: tuple[tuple[int, int], ...]
    free_positions: tuple[int, ...]
    sign: int


def enumerate_matchings(pattern: IndexPattern) -> list[MatchingTerm]:
    """All partial matchings within equal-nonzero-label position groups.

    Includes the empty matching (sign +1, every position free). Terms come
    out in a deterministic order.
    """
    if pattern.k > CERTIFIED_MAX_K:
        warnings.warn(
            f"matching generation for multiplicity {pattern.k} is experimental "
            f"(certified up to {CERTIFIED_MAX_K})", ExperimentalWarning,
            stacklevel=2)
    labels = pattern.labels
    terms: list[MatchingTerm] = []

    def walk(avail: tuple[int, ...], pairs: tuple[tuple[int, int], ...]):
        if not avail:
            matched = {p for pair in pairs for p in pair}
            free = tuple(l for l in range(pattern.k) if l not in matched)
            terms.append(MatchingTerm(pairs=pairs, free_positions=free,
                                      sign=-1 if len(pairs) % 2 else 1))
            return
        u, rest = avail[0], avail[1:]
        walk(rest, pairs)  # u stays free
        for idx, v in enumerate(rest):
            if labels[u] == labels[v] != 0:
                walk(rest[:idx] + rest[idx + 1:], pairs + ((u, v),))

    walk(tuple(range(pattern.k)), ())
    return terms


@dataclass(frozen=True, eq=False)
class GaussianDraw:
    """One realization of the Gaussian families feeding an expansion.

    ``zeta[i][j]`` holds zeta_j^(i) for each distinct label i of the
    pattern. For nonzero labels the entries are independent standard
    normals; the time-component row (label 0) is deterministic,
    sqrt(length) at mode 0 and zero elsewhere.
    """

    length: float
    zeta: Mapping[int, np.ndarray] = field(repr=False)

    @property
    def truncation(self) -> int:
        return min(len(row) for row in self.zeta.values()) - 1


def sample_draw(pattern: IndexPattern, p: int, seed: int,
                interval: Union[Interval, float] = 1.0) -> GaussianDraw:
    """Reproducible draw for all labels of the pattern, modes 0..p.

    The same seed always yields the same draw. Distinct labels get
    independent rows, sampled in sorted label order.
    """
    length = float(interval.length) if isinstance(interval, Interval) \
        else float(interval)
    rng = np.random.default_rng(seed)
    zeta: dict[int, np.ndarray] = {}
    for label in sorted(set(pattern.labels)):
        if label == 0:
            row = np.zeros(p + 1)
            row[0] = math.sqrt(length)
        else:
            row = rng.standard_normal(p + 1)
        zeta[label] = row
    return GaussianDraw(length=length, zeta=zeta)


def realize(pattern: IndexPattern, p: int,
            table: Mapping[MultiIndex, CoeffValue],
            draw: GaussianDraw) -> float:
    """Value of the truncated expansion at truncation order p.

    Sums, over all multi-indices with entries 0..p, the reconstructed
    coefficient times the bracket of signed matching terms evaluated on
    the draw. Both the per-index bracket and the outer sum are compensated
    (math.fsum), so algebraically cancelling contributions cancel exactly.
    """
    labels = pattern.labels
    terms = enumerate_matchings(pattern)
    pieces: list[float] = []
    for j in itertools.product(range(p + 1), repeat=pattern.k):
        cv = table.get(j)
        if cv is None:
            raise MissingCoefficientError(
                f"table has no entry for multi-index {j}; "
                f"recompute it with p >= {p}")
        c = cv.value(draw.length)
        if c == 0.0:
            continue
        bracket = []
        for term in terms:
            if all(j[a] == j[b] for a, b in term.pairs):
                prod = 1.0
                for pos in term.free_positions:
                    prod *= draw.zeta[labels[pos]][j[pos]]
                bracket.append(term.sign * prod)
        pieces.append(c * math.fsum(bracket))
    return math.fsum(pieces)
