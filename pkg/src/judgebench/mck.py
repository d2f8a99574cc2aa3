"""CTL with knowledge: formula syntax, explicit-state checking and evidence.

Grammar (ASCII)::

    F ::= atom | true | false | ( F ) | ! F | K i F | P i F
        | EX F | AX F | EF F | AF F | EG F | AG F
        | E ( F U F ) | A ( F U F ) | F & F | F | F | F -> F

Unary operators bind tightest, then ``&``, ``|`` and the right-associative
``->``.  Atoms are ``v=1``, ``v=0``, ``v=unknown``, ``v=<count>``,
``d<i>=0``, ``d<i>=1``, ``profile=<bits>`` or any lowercase label name.

Evaluation rewrites every derived operator into ``Atom, Const, Not, And, K,
EX, EG, EU`` and computes satisfying sets bottom-up with the fixpoint
kernels in :mod:`judgebench._kernels`.
"""

from __future__ import annotations

import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from . import _kernels
from .errors import FormulaSyntaxError, ValidationError
from .kripke import KripkeModel

# -- AST --------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class K:
    agent: int
    arg: "Formula"


@dataclass(frozen=True)
class P:
    agent: int
    arg: "Formula"


@dataclass(frozen=True)
class EX:
    arg: "Formula"


@dataclass(frozen=True)
class AX:
    arg: "Formula"


@dataclass(frozen=True)
class EF:
    arg: "Formula"


@dataclass(frozen=True)
class AF:
    arg: "Formula"


@dataclass(frozen=True)
class EG:
    arg: "Formula"


@dataclass(frozen=True)
class AG:
    arg: "Formula"


@dataclass(frozen=True)
class EU:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class AU:
    left: "Formula"
    right: "Formula"


Formula = Union[Atom, Const, Not, And, Or, Implies, K, P, EX, AX, EF, AF, EG, AG, EU, AU]
TRUE = Const(True)
FALSE = Const(False)

_UNARY = {"EX": EX, "AX": AX, "EF": EF, "AF": AF, "EG": EG, "AG": AG}
_BINARY_TEXT = {And: "&", Or: "|", Implies: "->"}


def conj(items: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; ``true`` when empty."""
    out = None
    for f in items:
        out = f if out is None else And(out, f)
    return TRUE if out is None else out


def disj(items: Iterable[Formula]) -> Formula:
    out = None
    for f in items:
        out = f if out is None else Or(out, f)
    return FALSE if out is None else out


def subformulas(f: Formula) -> Iterable[Formula]:
    yield f
    for child in _children(f):
        yield from subformulas(child)


def _children(f: Formula) -> tuple:
    if isinstance(f, (Atom, Const)):
        return ()
    if isinstance(f, (And, Or, Implies, EU, AU)):
        return (f.left, f.right)
    return (f.arg,)


def depth(f: Formula) -> int:
    kids = _children(f)
    return 0 if not kids else 1 + max(depth(k) for k in kids)


# -- printing -----------------------------------------------------------------

_PREC = {Implies: 1, Or: 2, And: 3}


def to_text(f: Formula) -> str:
    """Serialise to the concrete grammar; ``parse_formula(to_text(f)) == f``."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        return "!" + _wrap_unary(f.arg)
    if isinstance(f, (K, P)):
        return f"{type(f).__name__} {f.agent} {_wrap_unary(f.arg)}"
    for name, cls in _UNARY.items():
        if isinstance(f, cls):
            return f"{name} {_wrap_unary(f.arg)}"
    if isinstance(f, (EU, AU)):
        q = "E" if isinstance(f, EU) else "A"
        return f"{q} ({to_text(f.left)} U {to_text(f.right)})"
    prec = _PREC[type(f)]
    op = _BINARY_TEXT[type(f)]
    left, right = to_text(f.left), to_text(f.right)
    lp = _PREC.get(type(f.left), 9)
    rp = _PREC.get(type(f.right), 9)
    # & and | are left-associative, -> is right-associative
    if lp < prec or (lp == prec and isinstance(f, Implies)):
        left = f"({left})"
    if rp < prec or (rp == prec and not isinstance(f, Implies)):
        right = f"({right})"
    return f"{left} {op} {right}"


def _wrap_unary(f: Formula) -> str:
    text = to_text(f)
    return f"({text})" if isinstance(f, (And, Or, Implies)) else text


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<arrow>->)
  | (?P<punct>[()!&|])
  | (?P<atom>[A-Za-z_][A-Za-z0-9_]*=[A-Za-z0-9_]+)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>\d+)
    """,
    re.VERBOSE,
)
_KEYWORDS = {"K", "P", "E", "A", "U", "true", "false", *_UNARY}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(
                f"unexpected character {text[pos]!r}", line=line, column=pos - line_start + 1
            )
        kind = m.lastgroup
        s = m.group()
        if kind == "ws":
            nl = s.count("\n")
            if nl:
                line += nl
                line_start = pos + s.rfind("\n") + 1
        else:
            if kind == "word" and s in _KEYWORDS:
                kind = "kw"
            toks.append(_Tok(kind, s, line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise FormulaSyntaxError(f"{msg}, found {found}", line=tok.line, column=tok.col)

    def expect(self, text: str) -> _Tok:
        if self.peek().text != text:
            self.error(f"expected {text!r}")
        return self.take()

    def parse(self) -> Formula:
        if self.peek().kind == "eof":
            self.error("empty formula")
        f = self.implication()
        if self.peek().kind != "eof":
            self.error("unexpected trailing input")
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek().text == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek().text == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek().text == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def agent(self) -> int:
        tok = self.peek()
        if tok.kind == "int":
            self.take()
            return int(tok.text)
        if tok.kind == "word" and re.fullmatch(r"J\d+", tok.text):
            self.take()
            return int(tok.text[1:])
        self.error("expected an agent index")

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.text == "!":
            self.take()
            return Not(self.unary())
        if tok.text == "(":
            self.take()
            f = self.implication()
            self.expect(")")
            return f
        if tok.kind == "kw":
            if tok.text in ("K", "P"):
                self.take()
                i = self.agent()
                return (K if tok.text == "K" else P)(i, self.unary())
            if tok.text in _UNARY:
                self.take()
                return _UNARY[tok.text](self.unary())
            if tok.text in ("E", "A"):
                self.take()
                self.expect("(")
                left = self.implication()
                self.expect("U")
                right = self.implication()
                self.expect(")")
                return (EU if tok.text == "E" else AU)(left, right)
            if tok.text in ("true", "false"):
                self.take()
                return Const(tok.text == "true")
            self.error("unexpected keyword")
        if tok.kind == "atom":
            self.take()
            return Atom(tok.text)
        if tok.kind == "word" and tok.text.islower():
            self.take()
            return Atom(tok.text)
        self.error("expected a formula")


def parse_formula(text: str, model: KripkeModel | None = None) -> Formula:
    """Parse ``text``; with ``model``, also reject unknown agents and atoms."""
    f = _Parser(text).parse()
    if model is not None:
        validate(f, model)
    return f


def validate(f: Formula, model: KripkeModel) -> None:
    n_agents = len(model.agents)
    for g in subformulas(f):
        if isinstance(g, (K, P)) and not 0 <= g.agent < n_agents:
            raise ValidationError(f"unknown agent {g.agent} (model has {n_agents} agents)")
        if isinstance(g, Atom) and not model.has_atom(g.name):
            raise ValidationError(f"unknown atom {g.name!r}")


# -- rewriting to the core language -----------------------------------------


def to_core(f: Formula) -> Formula:
    """Rewrite derived operators into ``Atom, Const, Not, And, K, EX, EG, EU``."""
    if isinstance(f, (Atom, Const)):
        return f
    if isinstance(f, Not):
        return Not(to_core(f.arg))
    if isinstance(f, And):
        return And(to_core(f.left), to_core(f.right))
    if isinstance(f, Or):
        return Not(And(Not(to_core(f.left)), Not(to_core(f.right))))
    if isinstance(f, Implies):
        return Not(And(to_core(f.left), Not(to_core(f.right))))
    if isinstance(f, K):
        return K(f.agent, to_core(f.arg))
    if isinstance(f, P):
        return Not(K(f.agent, Not(to_core(f.arg))))
    if isinstance(f, EX):
        return EX(to_core(f.arg))
    if isinstance(f, AX):
        return Not(EX(Not(to_core(f.arg))))
    if isinstance(f, EF):
        return EU(TRUE, to_core(f.arg))
    if isinstance(f, AF):
        return Not(EG(Not(to_core(f.arg))))
    if isinstance(f, EG):
        return EG(to_core(f.arg))
    if isinstance(f, AG):
        return Not(EU(TRUE, Not(to_core(f.arg))))
    if isinstance(f, EU):
        return EU(to_core(f.left), to_core(f.right))
    if isinstance(f, AU):
        phi, psi = to_core(f.left), to_core(f.right)
        not_psi = Not(psi)
        # A(phi U psi) == !(E(!psi U (!phi & !psi)) | EG !psi)
        return And(Not(EU(not_psi, And(Not(phi), not_psi))), Not(EG(not_psi)))
    raise ValidationError(f"not a formula node: {f!r}")


# -- checking ---------------------------------------------------------------


@dataclass
class CheckResult:
    formula: Formula
    mask: np.ndarray  # bool per state
    holds_on_init: bool
    witness: int | None = None  # an initial state where the formula fails

    @property
    def satisfying_states(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.mask).tolist())

    @property
    def count(self) -> int:
        return int(self.mask.sum())


class Checker:
    """Evaluates formulas against one model, sharing a cache of core subformulas."""

    def __init__(self, model: KripkeModel):
        self.m = model
        self._memo: dict[Formula, np.ndarray] = {}
        self._lock = threading.Lock()

    def mask(self, f: Formula) -> np.ndarray:
        """Satisfying set of ``f`` as a ``uint8`` mask."""
        return self._eval(to_core(f))

    def _eval(self, f: Formula) -> np.ndarray:
        hit = self._memo.get(f)
        if hit is not None:
            return hit
        m = self.m
        if isinstance(f, Atom):
            res = m.atom_mask(f.name).astype(np.uint8)
        elif isinstance(f, Const):
            res = np.full(m.n_states, 1 if f.value else 0, dtype=np.uint8)
        elif isinstance(f, Not):
            res = 1 - self._eval(f.arg)
        elif isinstance(f, And):
            res = self._eval(f.left) & self._eval(f.right)
        elif isinstance(f, K):
            if not 0 <= f.agent < len(m.agents):
                raise ValidationError(f"unknown agent {f.agent}")
            inner = self._eval(f.arg)
            res = _kernels.class_forall(m.obs[f.agent], m.n_classes[f.agent], inner)
        elif isinstance(f, EX):
            res = _kernels.ex_image(m.succ_indptr, m.succ_indices, self._eval(f.arg))
        elif isinstance(f, EG):
            res = _kernels.eg_fixpoint(
                m.succ_indptr, m.succ_indices, m.pred_indptr, m.pred_indices, self._eval(f.arg)
            )
        elif isinstance(f, EU):
            res = _kernels.eu_fixpoint(m.pred_indptr, m.pred_indices, self._eval(f.left), self._eval(f.right))
        else:
            raise ValidationError(f"not a core formula node: {f!r}")
        res = np.ascontiguousarray(res, dtype=np.uint8)
        with self._lock:
            self._memo[f] = res
        return res

    def check(self, f: Formula) -> CheckResult:
        mask = self.mask(f).astype(bool)
        failing = self.m.init[~mask[self.m.init]]
        return CheckResult(f, mask, failing.size == 0, int(failing[0]) if failing.size else None)

    def check_many(self, formulas: Sequence[Formula], jobs: int = 1) -> list[CheckResult]:
        if jobs <= 1 or len(formulas) <= 1:
            return [self.check(f) for f in formulas]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(self.check, formulas))


def check(m: KripkeModel, f: Formula | str) -> CheckResult:
    if isinstance(f, str):
        f = parse_formula(f, m)
    return Checker(m).check(f)


# -- evidence ---------------------------------------------------------------


@dataclass
class Evidence:
    """Why a formula failed (or why no counterexample exists).

    ``kind`` is one of ``none``, ``path`` (a finite path from an initial
    state to ``state``), ``lasso`` (``path`` loops back to ``loop_start``),
    ``initial`` (an initial state falsifying the formula) or ``unreachable``.
    """

    kind: str
    message: str
    path: list[int] = field(default_factory=list)
    loop_start: int | None = None
    state: int | None = None
    knowledge: list[dict] = field(default_factory=list)

    def to_json(self, model: KripkeModel | None = None) -> dict:
        out = {"kind": self.kind, "message": self.message}
        if self.path:
            out["path"] = list(self.path)
        if self.loop_start is not None:
            out["loop_start"] = self.loop_start
        if self.state is not None:
            out["state"] = self.state
            if model is not None:
                out["state_detail"] = model.describe_state(self.state)
        if self.knowledge:
            out["knowledge"] = self.knowledge
        return out


_CLASS_LIMIT = 64


def _path_to(parent: np.ndarray, s: int) -> list[int]:
    path = [s]
    while parent[path[-1]] >= 0:
        path.append(int(parent[path[-1]]))
    return path[::-1]


def _knowledge_facts(checker: Checker, body: Formula, s: int) -> list[dict]:
    m = checker.m
    facts, seen = [], set()
    for g in subformulas(body):
        if not isinstance(g, K) or g in seen:
            continue
        seen.add(g)
        if not checker.mask(g)[s]:
            continue
        members = np.flatnonzero(m.obs[g.agent] == m.obs[g.agent, s])
        facts.append({
            "agent": m.agents[g.agent],
            "knows": to_text(g.arg),
            "class_size": int(members.size),
            "class_states": members[:_CLASS_LIMIT].tolist(),
        })
    return facts


def _lasso(m: KripkeModel, region: np.ndarray, start: int) -> tuple[list[int], int]:
    """Follow successors inside ``region`` (an EG set) from ``start`` until a state repeats."""
    path, index = [start], {start: 0}
    s = start
    while True:
        succ = m.successors(s)
        nxt = next(int(t) for t in succ if region[t])
        if nxt in index:
            return path, index[nxt]
        index[nxt] = len(path)
        path.append(nxt)
        s = nxt


def explain(m: KripkeModel, f: Formula, result: CheckResult | None = None) -> Evidence:
    checker = Checker(m)
    if result is None:
        result = checker.check(f)
    if result.holds_on_init:
        if isinstance(f, EF):
            target = checker.mask(f.arg).astype(bool)
            parent = _kernels.reachable(m.succ_indptr, m.succ_indices, m.init)
            hits = np.flatnonzero(target & (parent != -2))
            s = int(hits[0])
            return Evidence("path", "a reachable state satisfies the target", _path_to(parent, s), state=s)
        return Evidence("none", "the formula holds on every initial state; there is no counterexample")

    s0 = result.witness
    if isinstance(f, AG):
        body = checker.mask(f.arg).astype(bool)
        parent = _kernels.reachable(m.succ_indptr, m.succ_indices, m.init)
        bad = np.flatnonzero(~body & (parent != -2))
        s = int(bad[0])
        return Evidence(
            "path",
            f"reachable state {s} violates the invariant",
            _path_to(parent, s),
            state=s,
            knowledge=_knowledge_facts(checker, f.arg, s),
        )
    if isinstance(f, AF):
        region = checker.mask(EG(Not(f.arg))).astype(bool)
        path, loop = _lasso(m, region, s0)
        return Evidence("lasso", "an infinite path never reaches the target", path, loop_start=loop, state=path[-1])
    if isinstance(f, EF):
        return Evidence("unreachable", "no reachable state satisfies the target", state=s0)
    if isinstance(f, K):
        inner = checker.mask(f.arg).astype(bool)
        members = np.flatnonzero(m.obs[f.agent] == m.obs[f.agent, s0])
        bad = int(members[~inner[members]][0])
        return Evidence(
            "initial",
            f"{m.agents[f.agent]} cannot distinguish state {s0} from state {bad}, where the argument fails",
            [s0, bad],
            state=bad,
        )
    return Evidence("initial", f"the formula fails on initial state {s0}", [s0], state=s0)
