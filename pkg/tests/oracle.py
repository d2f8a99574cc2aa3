"""Independent reference implementations used only by the tests.

Nothing here imports the library's evaluation code.  Temporal operators are
evaluated from their path semantics with bounded prefixes (a path of length
|S| inside a set must revisit a state, so the bound is exact), universal
operators are evaluated directly rather than through dualities, and
knowledge is a plain scan over observation classes.
"""

from __future__ import annotations

import itertools
import random

from judgebench import mck


class NaiveModel:
    """Plain-Python view of a model: successor lists, labels and observation ids."""

    def __init__(self, n, init, succ, labels, obs):
        self.n = n
        self.init = list(init)
        self.succ = [sorted(set(s)) for s in succ]
        self.labels = [set(x) for x in labels]
        self.obs = [list(row) for row in obs]

    @classmethod
    def from_model(cls, m):
        succ = [m.successors(s).tolist() for s in range(m.n_states)]
        labels = [set(m.labels(s)) for s in range(m.n_states)]
        return cls(m.n_states, m.init.tolist(), succ, labels, m.obs.tolist())


def _bounded(n, step, start):
    cur = start
    for _ in range(n + 1):
        nxt = step(cur)
        if nxt == cur:
            return cur
        cur = nxt
    return cur


def evaluate(nm: NaiveModel, f) -> set[int]:
    S = range(nm.n)
    ev = lambda g: evaluate(nm, g)  # noqa: E731
    if isinstance(f, mck.Atom):
        return {s for s in S if f.name in nm.labels[s]}
    if isinstance(f, mck.Const):
        return set(S) if f.value else set()
    if isinstance(f, mck.Not):
        return set(S) - ev(f.arg)
    if isinstance(f, mck.And):
        return ev(f.left) & ev(f.right)
    if isinstance(f, mck.Or):
        return ev(f.left) | ev(f.right)
    if isinstance(f, mck.Implies):
        return (set(S) - ev(f.left)) | ev(f.right)
    if isinstance(f, (mck.K, mck.P)):
        inner = ev(f.arg)
        row = nm.obs[f.agent]
        classes = {}
        for s in S:
            classes.setdefault(row[s], []).append(s)
        out = set()
        for members in classes.values():
            if isinstance(f, mck.K):
                if all(t in inner for t in members):
                    out.update(members)
            elif any(t in inner for t in members):
                out.update(members)
        return out
    if isinstance(f, mck.EX):
        inner = ev(f.arg)
        return {s for s in S if any(t in inner for t in nm.succ[s])}
    if isinstance(f, mck.AX):
        inner = ev(f.arg)
        return {s for s in S if all(t in inner for t in nm.succ[s])}
    if isinstance(f, (mck.EU, mck.EF)):
        phi = ev(f.left) if isinstance(f, mck.EU) else set(S)
        psi = ev(f.right if isinstance(f, mck.EU) else f.arg)
        # W_k: some path reaches psi within k steps through phi
        return _bounded(nm.n, lambda w: w | {s for s in phi if any(t in w for t in nm.succ[s])}, set(psi))
    if isinstance(f, (mck.AU, mck.AF)):
        phi = ev(f.left) if isinstance(f, mck.AU) else set(S)
        psi = ev(f.right if isinstance(f, mck.AU) else f.arg)
        return _bounded(nm.n, lambda w: w | {s for s in phi if all(t in w for t in nm.succ[s])}, set(psi))
    if isinstance(f, mck.EG):
        phi = ev(f.arg)
        # L_k: a path of k more steps stays inside phi
        return _bounded(nm.n, lambda w: {s for s in w if any(t in w for t in nm.succ[s])}, set(phi))
    if isinstance(f, mck.AG):
        phi = ev(f.arg)
        # G_k: every path stays inside phi for k more steps
        return _bounded(nm.n, lambda w: {s for s in w if all(t in w for t in nm.succ[s])}, set(phi))
    raise TypeError(f"unknown node {f!r}")


# -- random instances ---------------------------------------------------------

ATOMS = ("p", "q", "r")


def random_model_spec(rng: random.Random, max_states: int = 2000, agents: int = 2):
    n = rng.randint(1, max_states)
    n_init = rng.randint(1, min(3, n))
    init = list(range(n_init))
    succ = [[] for _ in range(n)]
    # a random spanning forest from the initial states keeps every state reachable
    for s in range(n_init, n):
        succ[rng.randrange(0, s)].append(s)
    for s in range(n):
        for _ in range(rng.choice((0, 0, 1, 1, 2))):
            succ[s].append(rng.randrange(n))
        if not succ[s]:
            succ[s].append(rng.choice((s, rng.randrange(n))))
    labels = [[a for a in ATOMS if rng.random() < 0.4] for _ in range(n)]
    obs = []
    for _ in range(agents):
        k = rng.randint(1, max(1, n // rng.choice((1, 2, 4, 16))))
        obs.append([rng.randrange(k) for _ in range(n)])
    edges = [(s, t) for s in range(n) for t in succ[s]]
    return n, init, edges, labels, obs


_UNARY_NODES = ("Not", "K", "P", "EX", "AX", "EF", "AF", "EG", "AG")
_BINARY_NODES = ("And", "Or", "Implies", "EU", "AU")


def random_formula(rng: random.Random, depth: int, agents: int = 2):
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.08:
            return mck.Const(rng.random() < 0.5)
        return mck.Atom(rng.choice(ATOMS))
    if rng.random() < 0.55:
        op = rng.choice(_UNARY_NODES)
        arg = random_formula(rng, depth - 1, agents)
        if op in ("K", "P"):
            return getattr(mck, op)(rng.randrange(agents), arg)
        return getattr(mck, op)(arg)
    op = rng.choice(_BINARY_NODES)
    return getattr(mck, op)(random_formula(rng, depth - 1, agents), random_formula(rng, depth - 1, agents))


# -- protocol-level oracles ----------------------------------------------------


def count_majority(bits) -> int:
    ones = 0
    for b in bits:
        if b == 1:
            ones += 1
    return 1 if 2 * ones > len(bits) else 0


def xor_strings(a: str, b: str) -> str:
    return "".join("1" if x != y else "0" for x, y in zip(a, b))


def compatible_oracle(i, j, d_i, v, total) -> bool:
    """Enumerate every full assignment and collect the d_j values consistent with (d_i, v)."""
    seen = set()
    for full in itertools.product((0, 1), repeat=total):
        if full[i] == d_i and count_majority(full) == v:
            seen.add(full[j])
    return seen == {0, 1}
