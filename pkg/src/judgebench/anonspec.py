"""Functionality and anonymity properties as CTL+K formulas.

The atom language only talks about ``v`` and the individual ``d_i``, so
majority, ``v = d_i``, ``d_j != d_k`` and compatibility are all expanded
into propositional combinations of those atoms here.

Two verdict namespaces exist.  ``binary`` models publish ``v in {0, 1}``;
``count`` models (DCP) publish the number of guilty votes ``v in 0..2n+1``.
Generators that mention the verdict take a ``namespace`` argument.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable

from .core import compatible, majority
from .errors import ParameterError
from .mck import (
    AF,
    AG,
    FALSE,
    TRUE,
    And,
    Atom,
    Formula,
    Implies,
    K,
    Not,
    P,
    conj,
    disj,
    to_text,
)

NAMESPACES = ("binary", "count")
EXPECTED = ("hold", "fail", "unknown")


def _check_n(n: int, minimum: int = 1) -> int:
    if not isinstance(n, int) or n < minimum:
        raise ParameterError(f"n must be an integer >= {minimum}, got {n!r}")
    return n


def _check_ns(namespace: str) -> None:
    if namespace not in NAMESPACES:
        raise ParameterError(f"unknown verdict namespace {namespace!r}")


def d(i: int, b: int) -> Atom:
    return Atom(f"d{i}={b}")


def v(value: int | str) -> Atom:
    return Atom(f"v={value}")


def profile_atom(bits) -> Atom:
    return Atom("profile=" + "".join(str(b) for b in bits))


def outcome_fn(namespace: str) -> Callable[[tuple], int]:
    _check_ns(namespace)
    return majority if namespace == "binary" else sum


def verdict_values(n: int, namespace: str) -> range:
    _check_ns(namespace)
    return range(2) if namespace == "binary" else range(2 * n + 2)


def ignorance(i: int, j: int) -> Formula:
    """``!K_i(d_j=1) & !K_i(d_j=0)``."""
    return And(Not(K(i, d(j, 1))), Not(K(i, d(j, 0))))


def knows_verdict(i: int, n: int, namespace: str = "binary") -> Formula:
    return disj(K(i, v(c)) for c in verdict_values(n, namespace))


def _pair_check(i: int, j: int, total: int) -> None:
    if i == j:
        raise ParameterError("anonymity formulas need two distinct judges")
    if not (0 <= i < total and 0 <= j < total):
        raise ParameterError(f"judge index outside 0..{total - 1}")


# -- functionality ------------------------------------------------------------


def gen_functionality(n: int, namespace: str = "binary") -> Formula:
    """Every judge eventually knows the verdict: the conjunction of ``AF(K_i(v=1) | K_i(v=0))``."""
    _check_n(n)
    return conj(AF(knows_verdict(i, n, namespace)) for i in range(2 * n + 1))


def gen_correctness(n: int, namespace: str = "binary") -> list[Formula]:
    """Invariants forcing an announced verdict to equal the protocol's outcome function.

    Binary: for every set of ``n+1`` judges agreeing on ``b``, the verdict
    cannot be ``1-b``.  Count: every decision profile pins the count.
    """
    _check_n(n)
    _check_ns(namespace)
    total = 2 * n + 1
    out = []
    if namespace == "binary":
        for b in (1, 0):
            for group in itertools.combinations(range(total), n + 1):
                premise = conj([*(d(s, b) for s in group), v(1 - b)])
                out.append(AG(Implies(premise, FALSE)))
        return out
    for bits in itertools.product((0, 1), repeat=total):
        premise = conj(d(s, b) for s, b in enumerate(bits))
        out.append(AG(Implies(premise, disj([v("unknown"), v(sum(bits))]))))
    return out


# -- conditional anonymity ----------------------------------------------------


def gen_conditional(i: int, j: int, condition: Formula = TRUE) -> Formula:
    if i == j:
        raise ParameterError("conditional anonymity needs i != j")
    return AG(Implies(condition, ignorance(i, j)))


def verdict_equals_decision(i: int) -> Formula:
    """``v = d_i`` over the binary namespace."""
    return disj([And(v(1), d(i, 1)), And(v(0), d(i, 0))])


def decisions_differ(a: int, b: int) -> Formula:
    return disj([And(d(a, 1), d(b, 0)), And(d(a, 0), d(b, 1))])


def gen_three_judges_suite(conditioned: bool = True) -> list[Formula]:
    """``AG((v=d_i) -> ignorance(i, j))`` for the six ordered pairs of three judges."""
    return [
        gen_conditional(i, j, verdict_equals_decision(i) if conditioned else TRUE)
        for i in range(3)
        for j in range(3)
        if i != j
    ]


def gen_centralised_nonleader(n: int) -> list[Formula]:
    _check_n(n, 2)
    total = 2 * n + 1
    return [gen_conditional(i, j) for i in range(1, total) for j in range(total) if i != j]


def gen_centralised_leader(n: int, conditioned: bool = True) -> list[Formula]:
    """One formula per pair: the leader is ignorant of both members when they disagree."""
    _check_n(n, 2)
    out = []
    for p in range(1, n + 1):
        a, b = 2 * p - 1, 2 * p
        body = And(ignorance(0, a), ignorance(0, b))
        premise = decisions_differ(a, b) if conditioned else TRUE
        out.append(AG(Implies(premise, body)) if conditioned else AG(body))
    return out


def gen_centralised_suite(n: int) -> list[Formula]:
    """Non-leader ignorance for every ordered pair, then the conditioned leader formulas."""
    return gen_centralised_nonleader(n) + gen_centralised_leader(n)


def dcp_premise(i: int, n: int) -> Formula:
    """``1 < v < 2n  |  (v=1 & d_i=0)  |  (v=2n & d_i=1)`` over count atoms."""
    _check_n(n)
    middle = [v(c) for c in range(2, 2 * n)]
    return disj([*middle, And(v(1), d(i, 0)), And(v(2 * n), d(i, 1))])


def gen_dcp_formula(i: int, j: int, n: int) -> Formula:
    _pair_check(i, j, 2 * n + 1)
    return gen_conditional(i, j, dcp_premise(i, n))


def gen_dcp_suite(n: int) -> list[Formula]:
    _check_n(n)
    total = 2 * n + 1
    return [gen_dcp_formula(i, j, n) for i in range(total) for j in range(total) if i != j]


# -- perfect individual and total anonymity -----------------------------------


def comp_premise(i: int, j: int, n: int, namespace: str = "binary") -> Formula:
    """Disjunction of ``d_i=b & v=c`` over the pairs where both values of ``d_j`` stay possible."""
    total = 2 * n + 1
    _pair_check(i, j, total)
    rows = []
    for b in (0, 1):
        for c in verdict_values(n, namespace):
            if namespace == "binary":
                ok = compatible(i, j, b, 0, c, total)
            else:
                # the other 2n-1 judges must supply c-b-d_j ones for both d_j
                ok = 0 <= c - b - 1 and c - b <= total - 2
            if ok:
                rows.append(And(d(i, b), v(c)))
    return disj(rows)


def gen_perfect_individual(n: int, namespace: str = "binary", leader_pairs: bool = False) -> list[Formula]:
    """``AG(comp(i,j,v) -> ignorance(i,j))`` for every ordered pair.

    With ``leader_pairs`` the leader's premise for a paired judge also
    requires the two members of that pair to disagree.
    """
    _check_n(n)
    total = 2 * n + 1
    out = []
    for i in range(total):
        for j in range(total):
            if i == j:
                continue
            premise = comp_premise(i, j, n, namespace)
            if leader_pairs and i == 0:
                p = (j + 1) // 2
                premise = And(premise, decisions_differ(2 * p - 1, 2 * p))
            out.append(gen_conditional(i, j, premise))
    return out


def gen_total_anonymity(n: int, namespace: str = "binary") -> list[Formula]:
    """``AG((d_i = d(i) & v = f(d)) -> P_i(profile = d))`` for every judge and profile."""
    _check_n(n)
    total = 2 * n + 1
    f = outcome_fn(namespace)
    out = []
    for i in range(total):
        for bits in itertools.product((0, 1), repeat=total):
            premise = And(d(i, bits[i]), v(f(bits)))
            out.append(AG(Implies(premise, P(i, profile_atom(bits)))))
    return out


# -- named suites ---------------------------------------------------------------


@dataclass(frozen=True)
class SuiteEntry:
    name: str
    formula: Formula
    expected: str = "unknown"

    def __post_init__(self):
        if self.expected not in EXPECTED:
            raise ParameterError(f"expected must be one of {EXPECTED}, got {self.expected!r}")

    @property
    def text(self) -> str:
        return to_text(self.formula)

    def to_json(self) -> dict:
        return {"name": self.name, "formula": self.text, "expected": self.expected}


def _pairs(total: int):
    return [(i, j) for i in range(total) for j in range(total) if i != j]


def _suite_functionality(n, ns):
    out = [SuiteEntry("functionality", gen_functionality(n, ns), "hold")]
    out += [SuiteEntry(f"correctness/{k}", f, "hold") for k, f in enumerate(gen_correctness(n, ns))]
    return out


def _suite_three_judges(n, ns):
    if n != 1:
        raise ParameterError("the three-judges suite is defined for n = 1")
    pairs = _pairs(3)
    return [SuiteEntry(f"three-judges/{i}-{j}", f, "hold") for (i, j), f in zip(pairs, gen_three_judges_suite())]


def _suite_three_judges_raw(n, ns):
    if n != 1:
        raise ParameterError("the three-judges suite is defined for n = 1")
    pairs = _pairs(3)
    return [
        SuiteEntry(f"three-judges-raw/{i}-{j}", f, "fail")
        for (i, j), f in zip(pairs, gen_three_judges_suite(conditioned=False))
    ]


def _suite_centralised(n, ns):
    total = 2 * n + 1
    nonleader = [(i, j) for i in range(1, total) for j in range(total) if i != j]
    out = [SuiteEntry(f"nonleader/{i}-{j}", f, "hold") for (i, j), f in zip(nonleader, gen_centralised_nonleader(n))]
    out += [SuiteEntry(f"leader/pair{p}", f, "hold") for p, f in enumerate(gen_centralised_leader(n), 1)]
    return out


def _suite_centralised_raw(n, ns):
    return [
        SuiteEntry(f"leader-raw/pair{p}", f, "fail")
        for p, f in enumerate(gen_centralised_leader(n, conditioned=False), 1)
    ]


def _suite_dcp(n, ns):
    return [SuiteEntry(f"dcp/{i}-{j}", f, "hold") for (i, j), f in zip(_pairs(2 * n + 1), gen_dcp_suite(n))]


def _suite_perfect(n, ns):
    fs = gen_perfect_individual(n, ns)
    return [SuiteEntry(f"perfect-individual/{i}-{j}", f) for (i, j), f in zip(_pairs(2 * n + 1), fs)]


def _suite_perfect_leader(n, ns):
    fs = gen_perfect_individual(n, ns, leader_pairs=True)
    return [SuiteEntry(f"perfect-individual-leader/{i}-{j}", f) for (i, j), f in zip(_pairs(2 * n + 1), fs)]


def _suite_total(n, ns):
    total = 2 * n + 1
    names = [
        f"total-anonymity/{i}-" + "".join(map(str, bits))
        for i in range(total)
        for bits in itertools.product((0, 1), repeat=total)
    ]
    return [SuiteEntry(name, f) for name, f in zip(names, gen_total_anonymity(n, ns))]


SUITES: dict[str, Callable] = {
    "functionality": _suite_functionality,
    "three-judges": _suite_three_judges,
    "three-judges-raw": _suite_three_judges_raw,
    "centralised": _suite_centralised,
    "centralised-leader-raw": _suite_centralised_raw,
    "dcp": _suite_dcp,
    "perfect-individual": _suite_perfect,
    "perfect-individual-leader": _suite_perfect_leader,
    "total-anonymity": _suite_total,
}


def namespace_for(protocol: str) -> str:
    return "count" if protocol == "dcp_sum" else "binary"


def suite(suite_id: str, n: int, namespace: str = "binary") -> list[SuiteEntry]:
    """Named formula list with expected outcomes; unknown ids raise ParameterError."""
    try:
        build = SUITES[suite_id]
    except KeyError:
        raise ParameterError(f"unknown suite {suite_id!r}; known: {sorted(SUITES)}") from None
    _check_n(n)
    _check_ns(namespace)
    return build(n, namespace)


def suite_json(entries: list[SuiteEntry]) -> str:
    return json.dumps([e.to_json() for e in entries], indent=2)
