"""Decision vectors, the majority function and threshold formulas over pairs.

The centralised protocol lets the leader learn, for every pair of judges
``(J_{2i-1}, J_{2i})``, the AND and the OR of the pair's decisions.  The
threshold formulas built here show that "at least ``k`` of the ``2n`` paired
judges voted guilty" is a monotone combination of those pair aggregates.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

from .errors import EvaluationError, ParameterError

Bits = Sequence[int]


class Verdict(enum.Enum):
    GUILTY = 1
    INNOCENT = 0
    PENDING = None

    @classmethod
    def from_bit(cls, bit: int | None) -> "Verdict":
        if bit is None:
            return cls.PENDING
        return cls.GUILTY if bit else cls.INNOCENT

    @property
    def bit(self) -> int | None:
        return self.value

    @property
    def label(self) -> str:
        return "unknown" if self is Verdict.PENDING else str(self.value)


_BITSET = frozenset((0, 1))


def check_bits(bits: Bits, name: str = "decisions") -> tuple[int, ...]:
    out = tuple(bits)
    if not _BITSET.issuperset(out):
        bad = next(b for b in out if b not in (0, 1))
        raise ParameterError(f"{name} must contain only 0/1, got {bad!r}")
    return tuple(map(int, out))


@dataclass(frozen=True)
class DecisionVector:
    """Private decisions ``d_0..d_{m-1}`` (1 = guilty)."""

    decisions: tuple[int, ...]

    def __post_init__(self):
        bits = check_bits(self.decisions)
        if not bits:
            raise ParameterError("a decision vector needs at least one judge")
        object.__setattr__(self, "decisions", bits)

    def __len__(self) -> int:
        return len(self.decisions)

    def __iter__(self):
        return iter(self.decisions)

    def __getitem__(self, i: int) -> int:
        return self.decisions[i]

    @property
    def n(self) -> int:
        """``n`` for a vector of ``2n+1`` judges."""
        if len(self.decisions) % 2 == 0:
            raise ParameterError(f"expected an odd number of judges, got {len(self.decisions)}")
        return len(self.decisions) // 2


@dataclass(frozen=True)
class DecisionProfile:
    """A full assignment of decisions, addressed with ``d(i)``."""

    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", check_bits(self.bits, "profile"))

    def d(self, i: int) -> int:
        return self.bits[i]

    @property
    def text(self) -> str:
        return "".join(str(b) for b in self.bits)

    @classmethod
    def all(cls, size: int) -> list["DecisionProfile"]:
        return [cls(p) for p in itertools.product((0, 1), repeat=size)]


def majority(dv: Bits) -> int:
    """Return 1 iff strictly more than half of the (odd number of) inputs are 1."""
    bits = check_bits(dv)
    if len(bits) % 2 == 0:
        raise ParameterError(f"majority needs an odd number of inputs, got {len(bits)}")
    return int(sum(bits) >= len(bits) // 2 + 1)


def threshold_oracle(dv: Bits, k: int) -> int:
    """1 iff at least ``k`` entries of ``dv`` are 1, for ``0 <= k <= len(dv)``."""
    bits = check_bits(dv)
    if not 0 <= k <= len(bits):
        raise ParameterError(f"threshold {k} outside 0..{len(bits)}")
    ones = 0
    for b in bits:
        ones += b
    return int(ones >= k)


# -- threshold formulas -----------------------------------------------------


@dataclass(frozen=True)
class PairAnd:
    pair: int

    def __str__(self):
        return f"And{self.pair}"


@dataclass(frozen=True)
class PairOr:
    pair: int

    def __str__(self):
        return f"Or{self.pair}"


@dataclass(frozen=True)
class TConst:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class TAnd:
    left: "ThresholdFormula"
    right: "ThresholdFormula"

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class TOr:
    left: "ThresholdFormula"
    right: "ThresholdFormula"

    def __str__(self):
        return f"({self.left} | {self.right})"


ThresholdFormula = Union[PairAnd, PairOr, TConst, TAnd, TOr]
T_TRUE = TConst(True)
T_FALSE = TConst(False)


def _and(a: ThresholdFormula, b: ThresholdFormula) -> ThresholdFormula:
    if a == T_FALSE or b == T_FALSE:
        return T_FALSE
    if a == T_TRUE:
        return b
    if b == T_TRUE:
        return a
    return TAnd(a, b)


def _or(a: ThresholdFormula, b: ThresholdFormula) -> ThresholdFormula:
    if a == T_TRUE or b == T_TRUE:
        return T_TRUE
    if a == T_FALSE:
        return b
    if b == T_FALSE:
        return a
    return TOr(a, b)


def build_threshold_formula(n_pairs: int, k: int) -> ThresholdFormula:
    """Monotone formula over pair aggregates that is true iff >= k of 2*n_pairs judges are 1.

    Pair ``i`` contributes ``PairAnd(i) + PairOr(i)`` ones, so "at least k
    among pairs 1..i" splits on whether pair i supplies 0, 1 or 2 of them.
    """
    if n_pairs < 1:
        raise ParameterError("n_pairs must be >= 1")
    if not 0 <= k <= 2 * n_pairs:
        raise ParameterError(f"threshold {k} outside 0..{2 * n_pairs}")

    @lru_cache(maxsize=None)
    def at_least(i: int, need: int) -> ThresholdFormula:
        if need <= 0:
            return T_TRUE
        if need > 2 * i:
            return T_FALSE
        return _or(
            at_least(i - 1, need),
            _or(
                _and(PairOr(i), at_least(i - 1, need - 1)),
                _and(PairAnd(i), at_least(i - 1, need - 2)),
            ),
        )

    return at_least(n_pairs, k)


def pair_values(dv: Bits) -> list[tuple[int, int]]:
    """(AND, OR) of each consecutive pair; pair ``i`` (1-based) is ``dv[2i-2], dv[2i-1]``."""
    bits = check_bits(dv)
    if len(bits) % 2:
        raise EvaluationError("pair formulas need an even-length vector")
    return [(bits[t] & bits[t + 1], bits[t] | bits[t + 1]) for t in range(0, len(bits), 2)]


def eval_threshold_formula(f: ThresholdFormula, dv: Bits) -> int:
    pairs = pair_values(dv)

    def ev(node: ThresholdFormula) -> int:
        if isinstance(node, TConst):
            return int(node.value)
        if isinstance(node, (PairAnd, PairOr)):
            if not 1 <= node.pair <= len(pairs):
                raise EvaluationError(f"pair index {node.pair} outside 1..{len(pairs)}")
            return pairs[node.pair - 1][0 if isinstance(node, PairAnd) else 1]
        if isinstance(node, TAnd):
            return ev(node.left) & ev(node.right)
        if isinstance(node, TOr):
            return ev(node.left) | ev(node.right)
        raise EvaluationError(f"not a threshold formula node: {node!r}")

    return ev(f)


def dualise(f: ThresholdFormula) -> ThresholdFormula:
    """Swap AND/OR atoms, connectives and constants."""
    if isinstance(f, PairAnd):
        return PairOr(f.pair)
    if isinstance(f, PairOr):
        return PairAnd(f.pair)
    if isinstance(f, TConst):
        return TConst(not f.value)
    if isinstance(f, TAnd):
        return TOr(dualise(f.left), dualise(f.right))
    return TAnd(dualise(f.left), dualise(f.right))


def is_monotone(f: ThresholdFormula) -> bool:
    # the node vocabulary has no negation; this rejects foreign nodes
    if isinstance(f, (PairAnd, PairOr, TConst)):
        return True
    if isinstance(f, (TAnd, TOr)):
        return is_monotone(f.left) and is_monotone(f.right)
    return False


def printed_phi_2_of_4(d: Bits) -> int:
    """The "at least two of four" formula exactly as printed in the source text.

    Its last disjunct reads ``(d1|d2) & (d3&d4)``; kept as a fixture because it
    rejects ``(1,0,1,0)``.
    """
    d1, d2, d3, d4 = check_bits(d)
    return (d1 & d2) | (d3 & d4) | ((d1 | d2) & (d3 & d4))


def printed_phi_3_of_4(d: Bits) -> int:
    """The "at least three of four" formula exactly as printed; accepts ``(1,0,1,0)``."""
    d1, d2, d3, d4 = check_bits(d)
    return (d1 | d2) & (d3 | d4) & ((d1 & d2) | (d3 | d4))


def compatible(i: int, j: int, d_i: int, d_j: int, v: int, total: int) -> bool:
    """Whether both values of ``d_j`` are consistent with judge i's decision and verdict v.

    Brute force over the other ``total-2`` decisions.  ``d_j`` is accepted for
    signature symmetry; the predicate quantifies over both of its values.
    """
    if i == j:
        raise ParameterError("compatible needs two distinct judges")
    if total < 3 or total % 2 == 0:
        raise ParameterError(f"total must be odd and >= 3, got {total}")
    if not (0 <= i < total and 0 <= j < total):
        raise ParameterError("judge index out of range")
    check_bits((d_i, d_j, v), "bits")
    need = total // 2 + 1
    rest = total - 2
    found = {0: False, 1: False}
    for others in itertools.product((0, 1), repeat=rest):
        base = d_i + sum(others)
        for bj in (0, 1):
            if int(base + bj >= need) == v:
                found[bj] = True
        if found[0] and found[1]:
            return True
    return False
