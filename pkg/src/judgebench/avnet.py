"""Broadcast-only majority over a prime-order group, built on anonymous veto nonces.

Judges ``J_0..J_{2n}`` share a group of prime order ``q`` inside ``Z_p^*``.

1. Each judge publishes ``g^{x_i}``; the products of earlier and later
   publics give ``g^{y_i}`` and a nonce ``g^{N_i} = g^{x_i y_i}`` whose
   product over all judges is 1.
2. The majority values ``M = {n+1..2n+1}`` are raised to every ``x_i`` in
   turn and shuffled, giving ``M' = {g^{kX}}`` with ``X = prod x_i``.
3. Each judge publishes ``(g^{N_i} g^{v_i})^{x_i}`` and the values travel
   round the ring for ``2n+1`` rounds, so the product of the final values is
   ``g^{(sum v) X}``.  The verdict is guilty iff it lands in ``M'``.

Zero-knowledge proofs of the ``x_i`` are placeholders that always verify.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from sympy import isprime

from .core import check_bits
from .errors import ParameterError


@dataclass(frozen=True)
class GroupParams:
    p: int
    q: int
    g: int

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "g": self.g}


PRESETS: dict[str, tuple[int, int, int]] = {
    "toy": (23, 11, 2),
    "small": (2147483579, 1073741789, 4),  # 31-bit safe prime
    "medium": (2305843009213691579, 1152921504606845789, 4),  # 61-bit safe prime
}

_SMALL_Q_WARNING = 1 << 16


def setup_group(preset: str | None = None, *, p: int | None = None, q: int | None = None, g: int | None = None) -> GroupParams:
    """Validate ``(p, q, g)``: both prime, ``q | p-1``, and ``g`` of order exactly ``q``."""
    if preset is not None:
        if preset not in PRESETS:
            raise ParameterError(f"unknown group preset {preset!r}; known: {sorted(PRESETS)}")
        p, q, g = PRESETS[preset]
    if p is None or q is None or g is None:
        raise ParameterError("give a preset or all of p, q, g")
    if not isprime(p):
        raise ParameterError(f"p = {p} is not prime")
    if not isprime(q):
        raise ParameterError(f"q = {q} is not prime")
    if (p - 1) % q:
        raise ParameterError(f"q = {q} does not divide p - 1 = {p - 1}")
    if not 1 < g < p:
        raise ParameterError(f"g = {g} is outside 2..p-1")
    if pow(g, q, p) != 1:
        raise ParameterError(f"g = {g} does not lie in the order-{q} subgroup")
    # q prime and g != 1 with g^q = 1 means the order is exactly q
    return GroupParams(p, q, g)


def _check_capacity(gp: GroupParams, n_judges: int) -> None:
    if gp.q <= n_judges:
        raise ParameterError(f"group order {gp.q} must exceed the number of judges {n_judges}")
    if gp.q < _SMALL_Q_WARNING:
        warnings.warn(f"group order {gp.q} is below 2^16; use only for testing", stacklevel=3)


def _rng(rng) -> random.Random:
    return rng if isinstance(rng, random.Random) else random.Random(rng)


@dataclass(frozen=True)
class AvNetRound1:
    n: int
    secrets: tuple[int, ...]
    publics: tuple[int, ...]
    g_y: tuple[int, ...]
    nonces: tuple[int, ...]
    proofs: tuple[str, ...]


@dataclass(frozen=True)
class AvNetShuffle:
    majority_values: tuple[int, ...]
    permutations: tuple[dict, ...]
    rounds: tuple[tuple[int, ...], ...]  # round i is J_i's announced sequence

    @property
    def final(self) -> tuple[int, ...]:
        return self.rounds[-1]

    @property
    def final_set(self) -> frozenset[int]:
        return frozenset(self.final)


@dataclass(frozen=True)
class AvNetVotes:
    votes: tuple[int, ...]
    chain: tuple[tuple[int, ...], ...]  # chain[r-1][i] = z_{i,r}
    product: int


@dataclass
class AvNetTranscript:
    group: GroupParams
    round1: AvNetRound1
    shuffle: AvNetShuffle
    votes: AvNetVotes
    verdict: int
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "group": self.group.to_json(),
            "round1": list(self.round1.publics),
            "shuffle_rounds": [list(r) for r in self.shuffle.rounds],
            "vote_rounds": [list(r) for r in self.votes.chain],
            "verdict": self.verdict,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def stub_proof(gp: GroupParams, public: int) -> str:
    """Placeholder for a proof of knowledge of ``log_g public``."""
    return f"zk-stub:{public}"


def verify_stub_proof(gp: GroupParams, public: int, proof: str) -> bool:
    return proof == f"zk-stub:{public}"


def step1_nonces(gp: GroupParams, secrets: Sequence[int] | None = None, *, n: int | None = None, rng=None) -> AvNetRound1:
    """Publish ``g^{x_i}`` and derive ``g^{y_i}`` and the nonces ``g^{N_i}``."""
    p, q, g = gp.p, gp.q, gp.g
    if secrets is None:
        if n is None:
            raise ParameterError("give explicit secrets or n")
        r = _rng(rng)
        secrets = [r.randrange(1, q) for _ in range(2 * n + 1)]
    xs = tuple(int(x) for x in secrets)
    if len(xs) % 2 == 0:
        raise ParameterError(f"need 2n+1 secrets, got {len(xs)}")
    for x in xs:
        if not 1 <= x < q:
            raise ParameterError(f"secret {x} outside 1..q-1")
    m = len(xs)
    publics = tuple(pow(g, x, p) for x in xs)
    # prefix and suffix products of the publics
    prefix = [1] * (m + 1)
    for i, h in enumerate(publics):
        prefix[i + 1] = prefix[i] * h % p
    suffix = [1] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] * publics[i] % p
    g_y = tuple(prefix[i] * pow(suffix[i + 1], -1, p) % p for i in range(m))
    nonces = tuple(pow(gy, x, p) for gy, x in zip(g_y, xs))
    prod = 1
    for z in nonces:
        prod = prod * z % p
    if prod != 1:
        raise AssertionError("nonce product is not 1; group parameters are inconsistent")
    proofs = tuple(stub_proof(gp, h) for h in publics)
    return AvNetRound1(m // 2, xs, publics, g_y, nonces, proofs)


def _check_permutation(perm, values: tuple[int, ...]) -> dict:
    if isinstance(perm, Mapping):
        mapping = {int(k): int(v) for k, v in perm.items()}
    else:
        seq = list(perm)
        if len(seq) != len(values):
            raise ParameterError(f"permutation must list {len(values)} images")
        mapping = dict(zip(values, (int(x) for x in seq)))
    if set(mapping) != set(values) or set(mapping.values()) != set(values):
        raise ParameterError(f"not a bijection on {sorted(values)}: {mapping}")
    return mapping


def step2_shuffle(gp: GroupParams, r1: AvNetRound1, permutations=None, *, rng=None) -> AvNetShuffle:
    """``2n+1`` sequential rounds; ``J_i`` raises every value to ``x_i`` and moves slot ``k`` to ``p_i(k)``."""
    p = gp.p
    n = r1.n
    M = tuple(range(n + 1, 2 * n + 2))
    _check_capacity(gp, 2 * n + 1)
    if permutations is None:
        r = _rng(rng)
        permutations = []
        for _ in range(2 * n + 1):
            img = list(M)
            r.shuffle(img)
            permutations.append(img)
    if len(permutations) != 2 * n + 1:
        raise ParameterError(f"need {2 * n + 1} permutations, got {len(permutations)}")
    perms = tuple(_check_permutation(pi, M) for pi in permutations)
    current = {k: pow(gp.g, k, p) for k in M}
    rounds = []
    for x, pi in zip(r1.secrets, perms):
        nxt = {}
        for k in M:
            nxt[pi[k]] = pow(current[k], x, p)
        current = nxt
        rounds.append(tuple(current[k] for k in M))
    return AvNetShuffle(M, perms, tuple(rounds))


def step3_votes_and_verdict(gp: GroupParams, r1: AvNetRound1, shuffle: AvNetShuffle, votes: Sequence[int]):
    """Run the vote ring and compare the product with ``M'``; returns ``(verdict, AvNetVotes)``."""
    p, g = gp.p, gp.g
    vs = check_bits(votes, "votes")
    m = len(r1.secrets)
    if len(vs) != m:
        raise ParameterError(f"need {m} votes, got {len(vs)}")
    xs = r1.secrets
    z = [pow(r1.nonces[i] * pow(g, vs[i], p) % p, xs[i], p) for i in range(m)]
    chain = [tuple(z)]
    for _ in range(2, m + 1):
        prev = chain[-1]
        chain.append(tuple(pow(prev[i - 1], xs[i], p) for i in range(m)))
    product = 1
    for val in chain[-1]:
        product = product * val % p
    verdict = int(product in shuffle.final_set)
    return verdict, AvNetVotes(vs, tuple(chain), product)


def run_avnet(gp: GroupParams, votes: Sequence[int], *, secrets=None, permutations=None, rng=None) -> AvNetTranscript:
    votes = check_bits(votes, "votes")
    if len(votes) % 2 == 0:
        raise ParameterError(f"need an odd number of votes, got {len(votes)}")
    r = _rng(rng)
    r1 = step1_nonces(gp, secrets, n=len(votes) // 2, rng=r)
    sh = step2_shuffle(gp, r1, permutations, rng=r)
    verdict, vt = step3_votes_and_verdict(gp, r1, sh, votes)
    return AvNetTranscript(gp, r1, sh, vt, verdict)


def exponent_product(gp: GroupParams, secrets: Sequence[int]) -> int:
    """``X = prod x_i mod q``."""
    X = 1
    for x in secrets:
        X = X * x % gp.q
    return X
