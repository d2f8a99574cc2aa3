"""Round-based executions of the three judges protocols.

Every run is synchronous: all messages of a round are delivered before the
next round starts.  Agents are ``J0 .. J{2n}``; ``T`` is the trusted OT
initialiser, which belongs to the environment.

OT can be simulated two ways.  ``ot_mode="ideal"`` treats it as a primitive
(the receiver gets ``m_c``, the sender learns nothing).  ``ot_mode="rivest"``
runs the trusted-initialiser construction from :mod:`judgebench.ot`, which
costs three rounds per OT step and three random bits per transfer.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Iterator, NamedTuple, Sequence

from . import ot as _ot
from .core import Verdict, check_bits, majority
from .errors import CapacityError, ParameterError

ALL = "*"
PROTOCOLS = ("three_judges_mm", "centralised", "dcp_sum")
OT_MODES = ("ideal", "rivest")
DEFAULT_BOUND = 10**7


class ChannelKind(enum.Enum):
    PRIVATE = "private"
    OT = "ot"
    BROADCAST = "broadcast"


class TraceEvent(NamedTuple):
    round: int
    sender: str
    receiver: str
    payload: Any
    kind: ChannelKind
    tag: str
    # the pair a sender offered in an ideal OT; only the sender sees it
    offered: tuple | None = None

    def to_json(self) -> dict:
        d = {
            "round": self.round,
            "sender": self.sender,
            "receiver": self.receiver,
            "payload": _jsonable(self.payload),
            "kind": self.kind.value,
            "tag": self.tag,
        }
        if self.offered is not None:
            d["offered"] = _jsonable(self.offered)
        return d


@dataclass(frozen=True)
class AgentView:
    agent: str
    own_decision: int
    own_randomness: tuple
    observed: tuple  # (round, sender, tag, payload) in delivery order
    verdict: Verdict | int

    def to_json(self) -> dict:
        verdict = self.verdict.label if isinstance(self.verdict, Verdict) else self.verdict
        return {
            "agent": self.agent,
            "own_decision": self.own_decision,
            "own_randomness": _jsonable(self.own_randomness),
            "observed": [_jsonable(list(o)) for o in self.observed],
            "verdict": verdict,
        }


class ShareSet(NamedTuple):
    """XOR shares of a judge's decision ``b``: AND-shares xor to b, OR-shares to not b."""

    b_and: int
    b_and_p: int
    b_or: int
    b_or_p: int

    @classmethod
    def split(cls, b: int, r_and: int, r_or: int) -> "ShareSet":
        return cls(r_and, r_and ^ b, r_or, r_or ^ 1 ^ b)

    def check(self, b: int) -> None:
        if self.b_and ^ self.b_and_p != b or self.b_or ^ self.b_or_p != 1 - b:
            raise ParameterError(f"shares {tuple(self)} do not encode decision {b}")


@dataclass(frozen=True)
class DcpState:
    n: int
    modulus: int
    secrets: tuple[int, ...]
    announcements: tuple[int, ...]
    sum: int


@dataclass(eq=False, slots=True)
class Run:
    """One complete execution: inputs, trace and outcome."""

    protocol: str
    n: int
    decisions: tuple[int, ...]
    randomness: dict
    own_randomness: tuple[tuple, ...]
    env_randomness: tuple
    events: list[TraceEvent]
    outcome: int
    verdict_round: int
    extras: dict = field(default_factory=dict)

    @property
    def agents(self) -> list[str]:
        return [f"J{i}" for i in range(len(self.decisions))]

    @property
    def rounds(self) -> int:
        return self.verdict_round

    @property
    def verdict(self) -> Verdict | int:
        if self.protocol == "dcp_sum":
            return self.outcome
        return Verdict.from_bit(self.outcome)

    @property
    def views(self) -> list[AgentView]:
        return [self._view(i) for i in range(len(self.decisions))]

    def _view(self, i: int) -> AgentView:
        me = f"J{i}"
        seen = []
        for ev in self.events:
            if ev.sender == me:
                if ev.kind is ChannelKind.OT and ev.offered is not None:
                    seen.append((ev.round, me, ev.tag + ":offered", ev.offered))
                else:
                    seen.append((ev.round, me, ev.tag, ev.payload))
            elif ev.receiver == me or ev.receiver == ALL:
                seen.append((ev.round, ev.sender, ev.tag, ev.payload))
        return AgentView(me, self.decisions[i], self.own_randomness[i], tuple(seen), self.verdict)

    def to_json(self) -> dict:
        verdict = self.verdict.label if isinstance(self.verdict, Verdict) else self.verdict
        return {
            "protocol": self.protocol,
            "n": self.n,
            "decisions": list(self.decisions),
            "randomness": _jsonable(self.randomness),
            "events": [e.to_json() for e in self.events],
            "views": [v.to_json() for v in self.views],
            "verdict": verdict,
        }


def _jsonable(x):
    if isinstance(x, _ot.BitString):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    return x


class _Recorder:
    def __init__(self, ot_mode: str, pkgs: Sequence[_ot.OtInitPackage] | None, record: bool = True):
        if ot_mode not in OT_MODES:
            raise ParameterError(f"unknown OT mode {ot_mode!r}")
        self.ot_mode = ot_mode
        self.pkgs = list(pkgs or ())
        self.next_pkg = 0
        self.round = 0
        self.record = record
        self.events: list[TraceEvent] = []

    def send(self, sender, receiver, payload, kind, tag):
        if self.record:
            self.events.append(TraceEvent(self.round, sender, receiver, payload, kind, tag))

    def step(self) -> int:
        self.round += 1
        return self.round

    def ot(self, transfers: Sequence[tuple]) -> list[int]:
        """Run a batch of parallel 1-out-of-2 transfers of single bits.

        Each transfer is ``(sender, receiver, m0, m1, choice, tag)``.
        """
        out = []
        ev = self.events
        record = self.record
        if self.ot_mode == "ideal":
            r = self.step()
            for sender, receiver, m0, m1, c, tag in transfers:
                got = m1 if c else m0
                if record:
                    ev.append(TraceEvent(r, sender, receiver, got, ChannelKind.OT, tag, (m0, m1)))
                out.append(got)
            return out
        r1, r2, r3 = self.round + 1, self.round + 2, self.round + 3
        self.round += 3
        kind = ChannelKind.OT
        staged: tuple[list, list, list] = ([], [], [])
        for sender, receiver, m0, m1, c, tag in transfers:
            if self.next_pkg >= len(self.pkgs):
                raise ParameterError("not enough OT initialiser packages for this run")
            pkg = self.pkgs[self.next_pkg]
            self.next_pkg += 1
            tr = _ot.ot_execute(_BIT[m0], _BIT[m1], c, pkg)
            out.append(tr.delivered.value)
            if not record:
                continue
            r0, r1_ = pkg.r0.value, pkg.r1.value
            staged[0].append(TraceEvent(r1, "T", sender, (r0, r1_), kind, tag + ":keys"))
            staged[0].append(TraceEvent(r1, "T", receiver, (pkg.d, r1_ if pkg.d else r0), kind, tag + ":key"))
            staged[1].append(TraceEvent(r2, receiver, sender, tr.e, kind, tag + ":e"))
            staged[2].append(TraceEvent(r3, sender, receiver, (tr.f0.value, tr.f1.value), kind, tag + ":f"))
        # keep the trace ordered by round when several transfers run in parallel
        for batch in staged:
            ev.extend(batch)
        return out


# -- randomness spaces ------------------------------------------------------


def _ots_needed(protocol: str, n: int) -> int:
    if protocol == "three_judges_mm":
        return 4
    if protocol == "centralised":
        return 2 * n
    return 0


def randomness_domains(protocol: str, n: int, ot_mode: str = "ideal") -> list[int]:
    """Sizes of the independent random variables of one run, in canonical order."""
    _check_protocol(protocol, n)
    if protocol == "dcp_sum":
        return [2 * n + 2] * (2 * n + 1)
    shares = [2, 2] if protocol == "three_judges_mm" else [2, 2] * n
    ots = [2, 2, 2] * _ots_needed(protocol, n) if ot_mode == "rivest" else []
    return shares + ots


def randomness_space_size(protocol: str, n: int, ot_mode: str = "ideal") -> int:
    size = 1
    for d in randomness_domains(protocol, n, ot_mode):
        size *= d
    return size


_BIT = (_ot.BitString(0, 1), _ot.BitString(1, 1))
_PKG = {
    (r0, r1, d): _ot.OtInitPackage(_BIT[r0], _BIT[r1], d)
    for r0, r1, d in itertools.product((0, 1), repeat=3)
}


def _split_ots(values: Sequence[int]) -> list[_ot.OtInitPackage]:
    return [_PKG[values[t], values[t + 1], values[t + 2]] for t in range(0, len(values), 3)]


def randomness_from_values(protocol: str, n: int, values: Sequence[int], ot_mode: str = "ideal") -> dict:
    """Turn a point of the randomness space into keyword arguments for the run functions."""
    values = list(values)
    if protocol == "dcp_sum":
        return {"secrets": tuple(values)}
    if protocol == "three_judges_mm":
        r = {"r_and": values[0], "r_or": values[1]}
        rest = values[2:]
    else:
        r = {"pair_bits": tuple((values[2 * t], values[2 * t + 1]) for t in range(n))}
        rest = values[2 * n:]
    r["ots"] = _split_ots(rest) if ot_mode == "rivest" else None
    return r


def _check_protocol(protocol: str, n: int) -> None:
    if protocol not in PROTOCOLS:
        raise ParameterError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")
    if protocol == "three_judges_mm" and n != 1:
        raise ParameterError("three_judges_mm is defined for exactly 3 judges (n=1)")
    if n < 1:
        raise ParameterError("n must be >= 1")


def _rng(rng) -> random.Random:
    return rng if isinstance(rng, random.Random) else random.Random(rng)


def _draw_ots(count: int, rng: random.Random) -> list[_ot.OtInitPackage]:
    return [_ot.ot_init(1, rng=rng) for _ in range(count)]


# -- three judges, shared AND/OR --------------------------------------------


def execute_three_judges_mm(
    decisions: Sequence[int],
    *,
    r_and: int | None = None,
    r_or: int | None = None,
    shares: ShareSet | None = None,
    ots: Sequence[_ot.OtInitPackage] | None = None,
    ot_mode: str | None = None,
    rng=None,
    step5: str = "prose",
    record: bool = True,
) -> Run:
    d = check_bits(decisions)
    if len(d) != 3:
        raise ParameterError(f"three_judges_mm needs exactly 3 decisions, got {len(d)}")
    a, b, c = d
    if ot_mode is None:
        ot_mode = "rivest" if ots is not None else "ideal"
    if shares is None:
        if r_and is None or r_or is None:
            g = _rng(rng)
            r_and = g.getrandbits(1) if r_and is None else r_and
            r_or = g.getrandbits(1) if r_or is None else r_or
        shares = ShareSet.split(b, r_and, r_or)
    else:
        shares.check(b)
    if ot_mode == "rivest" and ots is None:
        ots = _draw_ots(4, _rng(rng))

    rec = _Recorder(ot_mode, ots, record)
    # steps 2 and 4: C picks b_and' / b_or when c = 1, b_and / b_or' when c = 0
    (c_and,) = rec.ot([("J1", "J2", shares.b_and, shares.b_and_p, c, "and-share")])
    (c_or,) = rec.ot([("J1", "J2", shares.b_or_p, shares.b_or, c, "or-share")])
    if step5 == "prose":
        choice = a
    elif step5 == "printed":
        choice = 1 - a
    else:
        raise ParameterError(f"unknown step-5 variant {step5!r}")
    x_b, x_c = rec.ot([
        ("J1", "J0", shares.b_and, shares.b_or, choice, "b-share"),
        ("J2", "J0", c_and, c_or, choice, "c-share"),
    ])
    if choice == 0:
        announce = x_b ^ x_c  # b and c
    else:
        announce = 1 ^ x_b ^ x_c  # b or c
    rec.step()
    rec.send("J0", ALL, announce, ChannelKind.BROADCAST, "verdict")

    env = tuple((p.r0.value, p.r1.value, p.d) for p in ots) if ot_mode == "rivest" else ()
    randomness = {"r_and": shares.b_and, "r_or": shares.b_or}
    if env:
        randomness["ots"] = env
    return Run(
        protocol="three_judges_mm",
        n=1,
        decisions=d,
        randomness=randomness,
        own_randomness=((), (shares.b_and, shares.b_or), ()),
        env_randomness=env,
        events=rec.events,
        outcome=announce,
        verdict_round=rec.round,
        extras={"shares": shares, "c_and": c_and, "c_or": c_or, "step5": step5},
    )


def run_three_judges_mm(decisions: Sequence[int], **randomness):
    """Returns ``(verdict, trace, views)``; see :func:`execute_three_judges_mm`."""
    run = execute_three_judges_mm(decisions, **randomness)
    return run.verdict, run.events, run.views


# -- centralised 2n+1 generalisation ---------------------------------------


def execute_centralised(
    decisions: Sequence[int],
    *,
    pair_bits: Sequence[tuple[int, int]] | None = None,
    ots: Sequence[_ot.OtInitPackage] | None = None,
    ot_mode: str | None = None,
    rng=None,
    record: bool = True,
) -> Run:
    d = check_bits(decisions)
    if len(d) < 3 or len(d) % 2 == 0:
        raise ParameterError(f"centralised needs an odd number >= 3 of judges, got {len(d)}")
    n = len(d) // 2
    if ot_mode is None:
        ot_mode = "rivest" if ots is not None else "ideal"
    if pair_bits is None:
        g = _rng(rng)
        pair_bits = [(g.getrandbits(1), g.getrandbits(1)) for _ in range(n)]
    if len(pair_bits) != n:
        raise ParameterError(f"need share randomness for {n} pairs")
    if ot_mode == "rivest" and ots is None:
        ots = _draw_ots(2 * n, _rng(rng))

    rec = _Recorder(ot_mode, ots, record)
    pairs = range(1, n + 1)
    first = {i: ShareSet.split(d[2 * i - 1], *pair_bits[i - 1]) for i in pairs}
    got_and = rec.ot([
        (f"J{2*i-1}", f"J{2*i}", first[i].b_and, first[i].b_and_p, d[2 * i], f"pair{i}-and")
        for i in pairs
    ])
    got_or = rec.ot([
        (f"J{2*i-1}", f"J{2*i}", first[i].b_or_p, first[i].b_or, d[2 * i], f"pair{i}-or")
        for i in pairs
    ])
    # second member flips its OR share so the pair's OR shares xor to d_{2i-1} or d_{2i}
    second = {i: (got_and[i - 1], 1 ^ got_or[i - 1]) for i in pairs}

    r = rec.step()
    for i in pairs:
        p, q = f"J{2*i-1}", f"J{2*i}"
        rec.send(p, "J0", first[i].b_and, ChannelKind.PRIVATE, f"pair{i}-and")
        rec.send(p, "J0", first[i].b_or, ChannelKind.PRIVATE, f"pair{i}-or")
        rec.send(q, "J0", second[i][0], ChannelKind.PRIVATE, f"pair{i}-and")
        rec.send(q, "J0", second[i][1], ChannelKind.PRIVATE, f"pair{i}-or")
    reconstructed = {
        i: (first[i].b_and ^ second[i][0], first[i].b_or ^ second[i][1]) for i in pairs
    }
    count = d[0] + sum(x + y for x, y in reconstructed.values())
    verdict = int(count >= n + 1)
    rec.step()
    rec.send("J0", ALL, verdict, ChannelKind.BROADCAST, "verdict")

    env = tuple((p.r0.value, p.r1.value, p.d) for p in ots) if ot_mode == "rivest" else ()
    own = [()] * len(d)
    for i in pairs:
        own[2 * i - 1] = tuple(pair_bits[i - 1])
    randomness = {"pair_bits": tuple(tuple(x) for x in pair_bits)}
    if env:
        randomness["ots"] = env
    return Run(
        protocol="centralised",
        n=n,
        decisions=d,
        randomness=randomness,
        own_randomness=tuple(own),
        env_randomness=env,
        events=rec.events,
        outcome=verdict,
        verdict_round=rec.round,
        extras={"reconstructed": reconstructed, "leader_round": r},
    )


def run_centralised(decisions: Sequence[int], **randomness):
    run = execute_centralised(decisions, **randomness)
    return run.verdict, run.events, run.views


# -- DCP modular sum --------------------------------------------------------


def execute_dcp_sum(
    decisions: Sequence[int], *, secrets: Sequence[int] | None = None, rng=None, record: bool = True
) -> Run:
    d = check_bits(decisions)
    m = len(d)
    if m < 3 or m % 2 == 0:
        raise ParameterError(f"dcp_sum needs an odd number >= 3 of judges, got {m}")
    modulus = m + 1
    if secrets is None:
        g = _rng(rng)
        secrets = [g.randrange(modulus) for _ in range(m)]
    s = tuple(secrets)
    if len(s) != m:
        raise ParameterError(f"need {m} ring secrets, got {len(s)}")
    for x in s:
        if not (isinstance(x, int) and 0 <= x < modulus):
            raise ParameterError(f"secret {x!r} outside Z_{modulus}")

    events = []
    ann = tuple((s[i] - s[i - 1] + d[i]) % modulus for i in range(m))
    if record:
        # J_i shares s_i with its successor J_{i+1} on the ring
        for i in range(m):
            events.append(TraceEvent(1, f"J{i}", f"J{(i + 1) % m}", s[i], ChannelKind.PRIVATE, "secret"))
        for i in range(m):
            events.append(TraceEvent(2, f"J{i}", ALL, ann[i], ChannelKind.BROADCAST, "announce"))
    total = sum(ann) % modulus
    state = DcpState(m // 2, modulus, s, ann, total)
    return Run(
        protocol="dcp_sum",
        n=m // 2,
        decisions=d,
        randomness={"secrets": list(s)},
        own_randomness=tuple((x,) for x in s),
        env_randomness=(),
        events=events,
        outcome=total,
        verdict_round=2,
        extras={"state": state},
    )


def run_dcp_sum(decisions: Sequence[int], secrets: Sequence[int] | None = None, rng=None):
    """Returns ``(count, DcpState, views)``."""
    run = execute_dcp_sum(decisions, secrets=secrets, rng=rng)
    return run.outcome, run.extras["state"], run.views


# -- enumeration ------------------------------------------------------------


@dataclass(frozen=True)
class Sampled:
    count: int
    seed: int = 0


def decision_space(protocol: str, n: int, decisions="all") -> list[tuple[int, ...]]:
    size = 2 * n + 1
    if isinstance(decisions, str):
        if decisions != "all":
            raise ParameterError(f"decision filter must be 'all' or explicit, got {decisions!r}")
        return list(itertools.product((0, 1), repeat=size))
    vectors = [tuple(decisions)] if decisions and isinstance(decisions[0], int) else [tuple(v) for v in decisions]
    for v in vectors:
        check_bits(v)
        if len(v) != size:
            raise ParameterError(f"decision vector {v} has length {len(v)}, expected {size}")
    return vectors


def execute(protocol: str, decisions: Sequence[int], ot_mode: str = "ideal", step5: str = "prose", **kw) -> Run:
    if protocol == "three_judges_mm":
        return execute_three_judges_mm(decisions, ot_mode=ot_mode, step5=step5, **kw)
    if protocol == "centralised":
        return execute_centralised(decisions, ot_mode=ot_mode, **kw)
    if protocol == "dcp_sum":
        return execute_dcp_sum(decisions, **kw)
    raise ParameterError(f"unknown protocol {protocol!r}")


def enumerate_runs(
    protocol: str,
    n: int,
    decisions="all",
    randomness: str | Sampled = "exhaustive",
    *,
    ot_mode: str = "ideal",
    bound: int = DEFAULT_BOUND,
    step5: str = "prose",
    record: bool = True,
) -> Iterator[Run]:
    """Yield runs in a deterministic order (decision vectors outer, randomness inner).

    ``record=False`` skips trace events; outcomes are unaffected.
    """
    _check_protocol(protocol, n)
    if ot_mode not in OT_MODES:
        raise ParameterError(f"unknown OT mode {ot_mode!r}")
    vectors = decision_space(protocol, n, decisions)
    domains = randomness_domains(protocol, n, ot_mode)
    kw = {"step5": step5, "record": record} if protocol == "three_judges_mm" else {"record": record}
    if protocol != "dcp_sum":
        kw["ot_mode"] = ot_mode
    if randomness == "exhaustive":
        total = len(vectors) * randomness_space_size(protocol, n, ot_mode)
        if total > bound:
            raise CapacityError(
                f"exhaustive enumeration needs {total} runs, over the bound {bound}; "
                "use sampled randomness",
                count=total,
                bound=bound,
            )
        points = list(itertools.product(*[range(x) for x in domains]))
        for v in vectors:
            for pt in points:
                yield execute(protocol, v, **kw, **randomness_from_values(protocol, n, pt, ot_mode))
    elif isinstance(randomness, Sampled):
        g = random.Random(randomness.seed)
        for v in vectors:
            for _ in range(randomness.count):
                pt = [g.randrange(x) for x in domains]
                yield execute(protocol, v, **kw, **randomness_from_values(protocol, n, pt, ot_mode))
    else:
        raise ParameterError(f"randomness must be 'exhaustive' or Sampled, got {randomness!r}")


def expected_outcome(protocol: str, decisions: Sequence[int]) -> int:
    return sum(decisions) if protocol == "dcp_sum" else majority(decisions)
