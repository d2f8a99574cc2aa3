import itertools
import json
import random
import warnings

import pytest

from judgebench import avnet
from judgebench.errors import ParameterError

pytestmark = pytest.mark.filterwarnings("ignore:group order")


def toy():
    return avnet.setup_group("toy")


def test_setup_examples():
    gp = avnet.setup_group(p=23, q=11, g=2)
    assert pow(2, 11, 23) == 1 and gp.g == 2
    with pytest.raises(ParameterError):
        avnet.setup_group(p=23, q=11, g=22)
    with pytest.raises(ParameterError):
        avnet.setup_group(p=15, q=7, g=2)
    with pytest.raises(ParameterError):
        avnet.setup_group(p=23, q=7, g=2)
    with pytest.raises(ParameterError):
        avnet.setup_group("nope")


@pytest.mark.parametrize("name", sorted(avnet.PRESETS))
def test_presets_valid(name):
    gp = avnet.setup_group(name)
    assert (gp.p - 1) % gp.q == 0 and pow(gp.g, gp.q, gp.p) == 1


def test_step1_worked_example():
    r1 = avnet.step1_nonces(toy(), [3, 5, 7])
    # g^{y_1} = g^{x_0} / g^{x_2} = 2^{(3 - 7) mod 11}
    assert r1.g_y[1] == pow(2, (3 - 7) % 11, 23) == pow(2, 7, 23)
    prod = 1
    for z in r1.nonces:
        prod = prod * z % 23
    assert prod == 1


def test_step1_degenerate_single_judge():
    r1 = avnet.step1_nonces(toy(), [4])
    assert r1.g_y == (1,) and r1.nonces == (1,)


def test_step1_rejects_zero_secret():
    with pytest.raises(ParameterError):
        avnet.step1_nonces(toy(), [0, 1, 2])


def test_shuffle_identity_and_sets():
    gp = toy()
    r1 = avnet.step1_nonces(gp, [3, 5, 7])
    X = avnet.exponent_product(gp, r1.secrets)
    ident = avnet.step2_shuffle(gp, r1, [[2, 3]] * 3)
    assert ident.final == tuple(pow(2, k * X % 11, 23) for k in (2, 3))
    other = avnet.step2_shuffle(gp, r1, [[3, 2], [2, 3], [2, 3]])
    assert other.final_set == ident.final_set
    assert other.final != ident.final
    with pytest.raises(ParameterError):
        avnet.step2_shuffle(gp, r1, [[2, 2]] * 3)


def test_votes_examples():
    gp = toy()
    for votes, want in [((0, 0, 0), 0), ((1, 1, 0), 1), ((1, 0, 0), 0)]:
        r1 = avnet.step1_nonces(gp, [3, 5, 7])
        sh = avnet.step2_shuffle(gp, r1, rng=1)
        verdict, vt = avnet.step3_votes_and_verdict(gp, r1, sh, votes)
        assert verdict == want
        if not any(votes):
            assert vt.product == 1
    with pytest.raises(ParameterError):
        avnet.step3_votes_and_verdict(gp, r1, sh, (1, 0))


@pytest.mark.parametrize("preset", ["toy", "small"])
def test_chain_algebra_exponent_side(preset):
    gp = avnet.setup_group(preset)
    rng = random.Random(11)
    for n in (1, 2):
        m = 2 * n + 1
        for votes in itertools.product((0, 1), repeat=m):
            tr = avnet.run_avnet(gp, votes, rng=rng)
            xs = tr.round1.secrets
            q = gp.q
            X = avnet.exponent_product(gp, xs)
            # rebuild every N_i from the secrets alone
            N = []
            for i in range(m):
                y = (sum(xs[:i]) - sum(xs[i + 1:])) % q
                N.append(xs[i] * y % q)
            assert sum(N) % q == 0
            assert tr.votes.product == pow(gp.g, sum(N[i] + votes[i] for i in range(m)) * X % q, gp.p)
            assert tr.votes.product == pow(gp.g, sum(votes) * X % q, gp.p)
            for i in range(m):
                assert tr.votes.chain[0][i] == pow(gp.g, (N[i] + votes[i]) * xs[i] % q, gp.p)


def test_collision_safety():
    gp = toy()
    for n in (1, 2):
        for seed in range(10):
            r1 = avnet.step1_nonces(gp, n=n, rng=seed)
            X = avnet.exponent_product(gp, r1.secrets)
            values = [pow(gp.g, k * X % gp.q, gp.p) for k in [0, *range(n + 1, 2 * n + 2)]]
            assert len(set(values)) == n + 2


def test_group_too_small_for_judges():
    gp = avnet.setup_group(p=7, q=3, g=2)
    r1 = avnet.step1_nonces(gp, [1, 2, 1])
    with pytest.raises(ParameterError):
        avnet.step2_shuffle(gp, r1, rng=0)


def test_small_group_warns():
    gp = toy()
    r1 = avnet.step1_nonces(gp, [1, 2, 3])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        avnet.step2_shuffle(gp, r1, rng=0)
    assert any("below 2^16" in str(w.message) for w in caught)


def test_transcript_json():
    tr = avnet.run_avnet(avnet.setup_group("small"), (1, 0, 1), rng=3)
    doc = json.loads(tr.dumps())
    assert set(doc) == {"group", "round1", "shuffle_rounds", "vote_rounds", "verdict"}
    assert len(doc["shuffle_rounds"]) == 3 and len(doc["vote_rounds"]) == 3
    assert doc["verdict"] == 1
    assert all(avnet.verify_stub_proof(tr.group, h, p) for h, p in zip(tr.round1.publics, tr.round1.proofs))
