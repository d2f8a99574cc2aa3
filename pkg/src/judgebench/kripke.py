"""Interpreted-system models generated by the judges protocols.

A global state is the tuple of every judge's local state, the environment
(the OT initialiser's random tape) and the public verdict ``v``.  A judge's
local state holds its decision, the randomness it generated and everything
delivered to it so far, so agents have perfect recall.  Runs are replayed
round by round; consecutive snapshots become transitions and the final
snapshot gets a self-loop so every path is infinite.

State ids are dense and ordered lexicographically by
``(round, environment, local states...)``, which makes exports byte-stable.
"""

from __future__ import annotations

import json
import re
from array import array
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import CapacityError, ParameterError, ValidationError
from .protocols import (
    ALL,
    DEFAULT_BOUND,
    Run,
    Sampled,
    decision_space,
    enumerate_runs,
    randomness_space_size,
)

OBS_MODES = ("full-local-state", "verdict-and-own-decision")
PENDING = -1  # verdict code for "not yet announced"
SCHEMA = "judgebench/1"

_D_ATOM = re.compile(r"^d(\d+)=([01])$")
_V_ATOM = re.compile(r"^v=(\d+|unknown)$")
_PROFILE_ATOM = re.compile(r"^profile=([01]+)$")


def _csr(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((dst, src))
    indices = np.ascontiguousarray(dst[order], dtype=np.int64)
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices


class KripkeModel:
    """Finite states, initial states, a total transition relation, observation classes and atoms.

    ``obs`` has one row per agent holding the class id of every state.
    ``atoms`` maps atom names to boolean masks.  Judge models also keep the
    decision profile and verdict code per state so profile atoms resolve on
    demand.
    """

    def __init__(
        self,
        agents: Sequence[str],
        n_states: int,
        init: Iterable[int],
        src: np.ndarray,
        dst: np.ndarray,
        atoms: dict[str, np.ndarray],
        obs: np.ndarray,
        *,
        meta: dict | None = None,
        decisions: np.ndarray | None = None,
        verdicts: np.ndarray | None = None,
        validate: bool = True,
    ):
        self.agents = tuple(agents)
        self.n_states = int(n_states)
        self.init = np.unique(np.asarray(list(init) if not isinstance(init, np.ndarray) else init, dtype=np.int64))
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.size:
            key = np.unique(src * self.n_states + dst)
            src, dst = key // self.n_states, key % self.n_states
        self.succ_indptr, self.succ_indices = _csr(self.n_states, src, dst)
        self.pred_indptr, self.pred_indices = _csr(self.n_states, dst, src)
        self.atoms = {k: np.asarray(v, dtype=bool) for k, v in atoms.items()}
        self.obs = np.ascontiguousarray(np.asarray(obs, dtype=np.int64).reshape(len(self.agents), self.n_states))
        self.n_classes = [int(row.max()) + 1 if row.size else 0 for row in self.obs]
        self.meta = dict(meta or {})
        self.decisions = decisions
        self.verdicts = verdicts
        self._describe = None
        if validate:
            self.validate()

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_spec(
        cls,
        n_states: int,
        init: Iterable[int],
        edges: Iterable[tuple[int, int]],
        labels: Sequence[Iterable[str]],
        obs: Sequence[Sequence],
        agents: Sequence[str] | None = None,
        meta: dict | None = None,
        validate: bool = True,
        props: Iterable[str] = (),
    ) -> "KripkeModel":
        """Build from plain Python data; ``obs[i][s]`` is any hashable observation of agent i.

        ``props`` declares propositions that may be false everywhere.
        """
        edges = list(edges)
        src = np.array([e[0] for e in edges], dtype=np.int64)
        dst = np.array([e[1] for e in edges], dtype=np.int64)
        for e in edges:
            if not (0 <= e[0] < n_states and 0 <= e[1] < n_states):
                raise ValidationError(f"edge {e} refers to an unknown state")
        if len(labels) != n_states:
            raise ValidationError("one label set per state is required")
        names = sorted({a for lab in labels for a in lab} | set(props))
        atoms = {a: np.array([a in set(lab) for lab in labels], dtype=bool) for a in names}
        rows = []
        for row in obs:
            if len(row) != n_states:
                raise ValidationError("observation rows must cover every state")
            classes = {k: i for i, k in enumerate(sorted(set(row), key=repr))}
            rows.append([classes[k] for k in row])
        if agents is None:
            agents = [f"J{i}" for i in range(len(rows))]
        obs_arr = np.array(rows, dtype=np.int64).reshape(len(agents), n_states)
        model = cls(agents, n_states, init, src, dst, atoms, obs_arr, meta=meta, validate=False)
        model._attach_judge_arrays()
        if validate:
            model.validate()
        return model

    def _attach_judge_arrays(self) -> None:
        """Recover decision and verdict arrays from d/v atoms when they are complete."""
        n_j = len(self.agents)
        if self.decisions is not None:
            return
        dec = np.full((self.n_states, n_j), -1, dtype=np.int8)
        for i in range(n_j):
            for b in (0, 1):
                m = self.atoms.get(f"d{i}={b}")
                if m is not None:
                    dec[m, i] = b
        if (dec >= 0).all() and n_j:
            self.decisions = dec
        ver = np.full(self.n_states, -2, dtype=np.int64)
        for name, mask in self.atoms.items():
            m = _V_ATOM.match(name)
            if m:
                ver[mask] = PENDING if m.group(1) == "unknown" else int(m.group(1))
        if (ver > -2).all() and self.n_states:
            self.verdicts = ver

    # -- invariants ----------------------------------------------------------

    def validate(self) -> None:
        if self.n_states == 0:
            raise ValidationError("model has no states")
        if self.init.size == 0:
            raise ValidationError("model has no initial states")
        if self.init.min() < 0 or self.init.max() >= self.n_states:
            raise ValidationError("initial state id out of range")
        if (np.diff(self.succ_indptr) == 0).any():
            bad = int(np.flatnonzero(np.diff(self.succ_indptr) == 0)[0])
            raise ValidationError(f"transition relation is not total: state {bad} has no successor")
        if self.obs.shape != (len(self.agents), self.n_states):
            raise ValidationError("observation array has the wrong shape")
        parent = _kernels.reachable(self.succ_indptr, self.succ_indices, self.init)
        if (parent == -2).any():
            bad = int(np.flatnonzero(parent == -2)[0])
            raise ValidationError(f"state {bad} is unreachable from the initial states")
        for name, mask in self.atoms.items():
            if mask.shape != (self.n_states,):
                raise ValidationError(f"atom {name!r} mask has the wrong length")

    # -- queries ---------------------------------------------------------------

    @property
    def n_edges(self) -> int:
        return int(self.succ_indices.size)

    @property
    def verdict_kind(self) -> str:
        return self.meta.get("verdict_kind", "binary")

    def edges(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n_states, dtype=np.int64), np.diff(self.succ_indptr))
        return np.stack([src, self.succ_indices], axis=1)

    def successors(self, s: int) -> np.ndarray:
        return self.succ_indices[self.succ_indptr[s]:self.succ_indptr[s + 1]]

    def agent_index(self, agent: int | str) -> int:
        if isinstance(agent, str):
            if agent in self.agents:
                return self.agents.index(agent)
            if agent.isdigit():
                agent = int(agent)
            else:
                raise ParameterError(f"unknown agent {agent!r}")
        if not 0 <= agent < len(self.agents):
            raise ParameterError(f"unknown agent {agent!r}")
        return int(agent)

    def _check_state(self, s: int) -> int:
        if not isinstance(s, (int, np.integer)) or not 0 <= s < self.n_states:
            raise ParameterError(f"unknown state id {s!r}")
        return int(s)

    def obs_class(self, agent: int | str, s: int) -> np.ndarray:
        i = self.agent_index(agent)
        s = self._check_state(s)
        return np.flatnonzero(self.obs[i] == self.obs[i, s])

    def has_atom(self, name: str) -> bool:
        try:
            self.atom_mask(name)
        except ValidationError:
            return False
        return True

    def atom_mask(self, name: str) -> np.ndarray:
        if name in self.atoms:
            return self.atoms[name]
        if name == "true":
            return np.ones(self.n_states, dtype=bool)
        if name == "false":
            return np.zeros(self.n_states, dtype=bool)
        m = _PROFILE_ATOM.match(name)
        if m and self.decisions is not None:
            bits = [int(c) for c in m.group(1)]
            if len(bits) != self.decisions.shape[1]:
                raise ValidationError(
                    f"profile atom {name!r} has {len(bits)} entries, model has {self.decisions.shape[1]} judges"
                )
            return (self.decisions == np.array(bits, dtype=np.int8)).all(axis=1)
        m = _V_ATOM.match(name)
        if m and self.verdicts is not None and self.verdict_kind == "count" and m.group(1) != "unknown":
            c = int(m.group(1))
            if c <= len(self.agents):
                return self.verdicts == c
        raise ValidationError(f"unknown atom {name!r}")

    def labels(self, s: int) -> frozenset[str]:
        s = self._check_state(s)
        return frozenset(a for a, mask in self.atoms.items() if mask[s])

    def stats(self) -> dict:
        return {
            "states": self.n_states,
            "edges": self.n_edges,
            "init": int(self.init.size),
            "obs_classes": {a: self.n_classes[i] for i, a in enumerate(self.agents)},
        }

    def describe_state(self, s: int) -> dict:
        s = self._check_state(s)
        out: dict = {"id": s, "labels": sorted(self.labels(s))}
        if self.decisions is not None:
            out["decisions"] = [int(x) for x in self.decisions[s]]
        if self.verdicts is not None:
            v = int(self.verdicts[s])
            out["v"] = "unknown" if v == PENDING else v
        if self._describe is not None:
            out.update(self._describe(s))
        return out

    def structurally_equal(self, other: "KripkeModel") -> bool:
        if self.agents != other.agents or self.n_states != other.n_states:
            return False
        if not np.array_equal(self.init, other.init):
            return False
        if not (np.array_equal(self.succ_indptr, other.succ_indptr)
                and np.array_equal(self.succ_indices, other.succ_indices)):
            return False
        if not np.array_equal(self.obs, other.obs):
            return False
        if set(self.atoms) != set(other.atoms):
            return False
        return all(np.array_equal(self.atoms[a], other.atoms[a]) for a in self.atoms)

    # -- JSON ----------------------------------------------------------------

    def to_json(self) -> dict:
        self.validate()
        names = sorted(self.atoms)
        masks = [self.atoms[a] for a in names]
        states = []
        obs_t = self.obs.T.tolist()
        for s in range(self.n_states):
            states.append({
                "id": s,
                "labels": [a for a, m in zip(names, masks) if m[s]],
                "obs": obs_t[s],
            })
        return {
            "schema": SCHEMA,
            "meta": self.meta,
            "agents": list(self.agents),
            "states": states,
            "init": self.init.tolist(),
            "edges": self.edges().tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "KripkeModel":
        try:
            agents = doc["agents"]
            states = doc["states"]
            n = len(states)
            ids = [st["id"] for st in states]
            if ids != list(range(n)):
                raise ValidationError("state ids must be dense and in order")
            labels = [st["labels"] for st in states]
            obs = np.array([st["obs"] for st in states], dtype=np.int64).reshape(n, len(agents)).T
            edges = np.array(doc["edges"], dtype=np.int64).reshape(-1, 2)
            init = doc["init"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed model document: {exc}") from exc
        names = sorted({a for lab in labels for a in lab})
        atoms = {a: np.zeros(n, dtype=bool) for a in names}
        for s, lab in enumerate(labels):
            for a in lab:
                atoms[a][s] = True
        model = cls(agents, n, init, edges[:, 0], edges[:, 1], atoms, obs, meta=doc.get("meta"), validate=False)
        model._attach_judge_arrays()
        model.validate()
        return model


def export_model(m: KripkeModel, path: str | Path) -> Path:
    path = Path(path)
    doc = m.to_json()
    try:
        with path.open("w", encoding="utf-8") as fh:
            json.dump(doc, fh, separators=(",", ":"))
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write model to {path}: {exc}") from exc
    return path


def import_model(path: str | Path) -> KripkeModel:
    with Path(path).open(encoding="utf-8") as fh:
        return KripkeModel.from_json(json.load(fh))


def obs_equiv(m: KripkeModel, i: int | str, s: int, t: int) -> bool:
    a = m.agent_index(i)
    s = m._check_state(s)
    t = m._check_state(t)
    return bool(m.obs[a, s] == m.obs[a, t])


# -- building models from protocol runs ------------------------------------


class _Interner:
    def __init__(self):
        self.ids: dict = {}
        self.keys: list = []

    def __call__(self, key) -> int:
        i = self.ids.get(key)
        if i is None:
            i = len(self.keys)
            self.ids[key] = i
            self.keys.append(key)
        return i


def _ranks(interner: _Interner) -> np.ndarray:
    """Order-preserving ranks for chained local-state keys.

    Root keys are ``(None, root)``; others are ``(parent_id, delivered)``.
    Nodes are ordered by depth, then by parent rank, then by payload.
    """
    keys = interner.keys
    depth = [0] * len(keys)
    for i, (parent, _) in enumerate(keys):
        if parent is not None:
            depth[i] = depth[parent] + 1
    rank = [0] * len(keys)
    by_depth: dict[int, list[int]] = {}
    for i, dpt in enumerate(depth):
        by_depth.setdefault(dpt, []).append(i)
    nxt = 0
    for dpt in sorted(by_depth):
        nodes = by_depth[dpt]
        if dpt == 0:
            nodes.sort(key=lambda i: repr(keys[i][1]))
        else:
            nodes.sort(key=lambda i: (rank[keys[i][0]], repr(keys[i][1])))
        for i in nodes:
            rank[i] = nxt
            nxt += 1
    return np.asarray(rank, dtype=np.int64)


@dataclass
class _Collected:
    rounds: array
    verdict: array
    env: array
    locals_: list  # one array per agent
    decisions: list  # one array per agent
    src: array
    dst: array
    init: array


def _collect(runs: Iterable[Run], n_agents: int, bound: int):
    local_tabs = [_Interner() for _ in range(n_agents)]
    env_tab = _Interner()
    state_ids: dict = {}
    col = _Collected(array("q"), array("q"), array("q"), [array("q") for _ in range(n_agents)],
                     [array("b") for _ in range(n_agents)], array("q"), array("q"), array("q"))
    names = {f"J{i}": i for i in range(n_agents)}
    agent_range = range(n_agents)

    def add_state(rnd, v, env_id, cur, dec):
        key = (rnd, env_id, *cur)
        sid = state_ids.get(key)
        if sid is None:
            sid = len(state_ids)
            if sid >= bound:
                raise CapacityError(
                    f"model exceeds the state cap of {bound} (reached {sid + 1} states)",
                    count=sid + 1,
                    bound=bound,
                )
            state_ids[key] = sid
            col.rounds.append(rnd)
            col.verdict.append(v)
            col.env.append(env_id)
            for i in agent_range:
                col.locals_[i].append(cur[i])
                col.decisions[i].append(dec[i])
        return sid

    for run in runs:
        dec = run.decisions
        env_id = env_tab((None, run.env_randomness))
        cur = [local_tabs[i]((None, (dec[i], run.own_randomness[i]))) for i in agent_range]
        prev = add_state(0, PENDING, env_id, cur, dec)
        col.init.append(prev)
        by_round: dict[int, list] = {}
        for ev in run.events:
            by_round.setdefault(ev.round, []).append(ev)
        v = PENDING
        for rnd in range(1, run.verdict_round + 1):
            delivered = [[] for _ in agent_range]
            for ev in by_round.get(rnd, ()):
                if ev.receiver == ALL:
                    sender = names.get(ev.sender)
                    for i in agent_range:
                        if i != sender:
                            delivered[i].append(ev.payload)
                else:
                    r = names.get(ev.receiver)
                    if r is not None:
                        delivered[r].append(ev.payload)
            for i in agent_range:
                if delivered[i]:
                    cur[i] = local_tabs[i]((cur[i], tuple(delivered[i])))
            if rnd == run.verdict_round:
                v = run.outcome
            sid = add_state(rnd, v, env_id, cur, dec)
            col.src.append(prev)
            col.dst.append(sid)
            prev = sid
        col.src.append(prev)
        col.dst.append(prev)
    return col, local_tabs, env_tab


def _estimated_states(protocol: str, n: int, decisions, randomness, ot_mode: str) -> int:
    vectors = len(decision_space(protocol, n, decisions))
    if isinstance(randomness, Sampled):
        per = randomness.count
    else:
        per = randomness_space_size(protocol, n, ot_mode)
    return vectors * per


def build_model(
    protocol: str,
    n: int,
    obs_mode: str = "full-local-state",
    bound: int = DEFAULT_BOUND,
    *,
    decisions="all",
    randomness: str | Sampled = "exhaustive",
    ot_mode: str = "ideal",
    step5: str = "prose",
) -> KripkeModel:
    """Generate the reachable model of ``protocol`` with ``2n+1`` judges.

    ``bound`` caps both the number of runs enumerated and the number of states.
    """
    if obs_mode not in OBS_MODES:
        raise ParameterError(f"unknown observation mode {obs_mode!r}; expected one of {OBS_MODES}")
    if bound < 1:
        raise ParameterError("state cap must be positive")
    n_agents = 2 * n + 1
    runs_needed = _estimated_states(protocol, n, decisions, randomness, ot_mode)
    if runs_needed > bound:
        raise CapacityError(
            f"model needs at least {runs_needed} initial states, over the state cap {bound}",
            count=runs_needed,
            bound=bound,
        )
    runs = enumerate_runs(protocol, n, decisions, randomness, ot_mode=ot_mode, bound=bound, step5=step5)
    col, local_tabs, env_tab = _collect(runs, n_agents, bound)
    return _finish(protocol, n, obs_mode, ot_mode, col, local_tabs, env_tab)


def _finish(protocol, n, obs_mode, ot_mode, col: _Collected, local_tabs, env_tab) -> KripkeModel:
    n_agents = 2 * n + 1
    rounds = np.frombuffer(col.rounds, dtype=np.int64)
    verdict = np.frombuffer(col.verdict, dtype=np.int64)
    env = _ranks(env_tab)[np.frombuffer(col.env, dtype=np.int64)]
    loc = [_ranks(local_tabs[i])[np.frombuffer(col.locals_[i], dtype=np.int64)] for i in range(n_agents)]
    dec = np.stack([np.frombuffer(col.decisions[i], dtype=np.int8) for i in range(n_agents)], axis=1)

    # lexicographic order on (round, env, local_0, ..., local_2n); np.lexsort sorts by the last key first
    order = np.lexsort(tuple(reversed([rounds, env, *loc])))
    new_id = np.empty_like(order)
    new_id[order] = np.arange(order.size)
    S = order.size

    rounds, verdict, env = rounds[order], verdict[order], env[order]
    loc = [l[order] for l in loc]
    dec = np.ascontiguousarray(dec[order])

    obs = np.empty((n_agents, S), dtype=np.int64)
    for i in range(n_agents):
        if obs_mode == "full-local-state":
            cols = np.stack([rounds, loc[i], verdict], axis=1)
        else:
            cols = np.stack([dec[:, i].astype(np.int64), verdict], axis=1)
        _, inverse = np.unique(cols, axis=0, return_inverse=True)
        obs[i] = inverse.reshape(-1)

    count_kind = protocol == "dcp_sum"
    atoms = {"v=unknown": verdict == PENDING}
    for c in (range(n_agents + 1) if count_kind else (0, 1)):
        atoms[f"v={c}"] = verdict == c
    for i in range(n_agents):
        atoms[f"d{i}=0"] = dec[:, i] == 0
        atoms[f"d{i}=1"] = dec[:, i] == 1

    init = new_id[np.frombuffer(col.init, dtype=np.int64)]
    src = new_id[np.frombuffer(col.src, dtype=np.int64)]
    dst = new_id[np.frombuffer(col.dst, dtype=np.int64)]
    meta = {
        "protocol": protocol,
        "n": n,
        "judges": n_agents,
        "obs_mode": obs_mode,
        "ot_mode": ot_mode if protocol != "dcp_sum" else None,
        "verdict_kind": "count" if count_kind else "binary",
    }
    model = KripkeModel(
        [f"J{i}" for i in range(n_agents)], S, init, src, dst, atoms, obs,
        meta=meta, decisions=dec, verdicts=verdict,
    )
    model.rounds = rounds

    loc_ids = [np.frombuffer(col.locals_[i], dtype=np.int64)[order] for i in range(n_agents)]

    def describe(s: int) -> dict:
        def history(tab, node):
            items = []
            while True:
                parent, payload = tab.keys[node]
                items.append(payload)
                if parent is None:
                    break
                node = parent
            root, *delivered = reversed(items)
            return {"decision": root[0], "randomness": list(root[1]), "received": [list(d) for d in delivered]}

        return {
            "round": int(rounds[s]),
            "locals": {f"J{i}": history(local_tabs[i], int(loc_ids[i][s])) for i in range(n_agents)},
        }

    model._describe = describe
    return model
