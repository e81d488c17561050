"""Circuit construction, canonical forms, matching, parsing."""

import itertools
import random

import pytest

from polyrew import (Circuit, CircuitError, ParseError, Signature,
                     apply_context, compose, dualize_circuit, find_matches,
                     generator, identity, iter_matches, parse_circuit,
                     random_circuit, tensor, tensor_all)
from polyrew.circuits import leftmost_match


def brute_force_isomorphic(a, b):
    """Equality oracle: try every node bijection that preserves wiring.

    Exponential, so only usable on small circuits, but it makes no use
    of the canonicalization code under test.
    """
    if (a.n_in, a.n_out) != (b.n_in, b.n_out):
        return False
    if len(a.nodes) != len(b.nodes):
        return False
    n = len(a.nodes)
    for perm in itertools.permutations(range(n)):
        if any(a.nodes[i] != b.nodes[perm[i]] for i in range(n)):
            continue

        def conv(t):
            if t[0] == "node":
                return ("node", perm[t[1]], t[2])
            return t

        if tuple(conv(t) for t in a.inputs) != b.inputs:
            continue
        if all(tuple(conv(t) for t in a.node_out[i]) == b.node_out[perm[i]]
               for i in range(n)):
            return True
    return False


@pytest.fixture(scope="module")
def small_circuits(circuit_sig):
    rng = random.Random(11)
    return [random_circuit(circuit_sig, rng, max_nodes=4, max_width=4)
            for _ in range(60)]


def test_equality_matches_brute_force_oracle(small_circuits):
    # quadratic over the pool, so keep the pool small
    pool = small_circuits[:25]
    for a in pool:
        for b in pool:
            assert (a == b) == brute_force_isomorphic(a, b), (
                a.text(), b.text())


def test_parse_text_round_trip(circuit_sig, small_circuits):
    for c in small_circuits:
        assert parse_circuit(c.text(), circuit_sig) == c


def test_canonical_is_stable(small_circuits):
    for c in small_circuits:
        k = c.canonical()
        assert k.canonical() == k
        assert k.key == c.key


def test_interchange_law(circuit_sig):
    mu = generator(circuit_sig["mu"])
    delta = generator(circuit_sig["delta"])
    tau = generator(circuit_sig["tau"])
    lhs = compose(tensor(delta, tau), tensor(tau, mu))
    rhs = tensor(compose(delta, tau), compose(tau, mu))
    assert lhs == rhs


def test_tensor_unit_and_composition_identities(circuit_sig, small_circuits):
    for c in small_circuits[:20]:
        assert tensor(c, identity(0)) == c
        assert tensor(identity(0), c) == c
        assert compose(identity(c.n_in), c) == c
        assert compose(c, identity(c.n_out)) == c


def test_tensor_all_matches_left_fold(circuit_sig):
    parts = [generator(circuit_sig["delta"]), identity(2),
             generator(circuit_sig["mu"])]
    folded = parts[0]
    for p in parts[1:]:
        folded = tensor(folded, p)
    assert tensor_all(parts) == folded
    assert tensor_all([], unit_arity=3) == identity(3)


def test_compose_arity_mismatch_raises(circuit_sig):
    mu = generator(circuit_sig["mu"])
    with pytest.raises(CircuitError):
        compose(mu, mu)


def test_signature_rejects_duplicates_and_reserved_names():
    with pytest.raises(CircuitError):
        Signature((("f", 1, 1), ("f", 2, 1)))
    with pytest.raises(CircuitError):
        Signature((("id", 1, 1),))
    with pytest.raises(CircuitError):
        Signature((("f", -1, 1),))


def test_find_matches_of_delta_in_coassociativity_shape(circuit_sig):
    delta = generator(circuit_sig["delta"])
    host = parse_circuit("delta ; id(1) * delta", circuit_sig)
    matches = find_matches(delta, host)
    assert len(matches) == 2
    for ctx in matches:
        assert apply_context(ctx, delta) == host


def test_matches_plug_back_to_host(circuit_sig, small_circuits, rds):
    patterns = [r.lhs for r in rds.polygraph.rules]
    hits = 0
    for host in small_circuits:
        for pat in patterns:
            for ctx in find_matches(pat, host):
                hits += 1
                assert apply_context(ctx, pat) == host
    assert hits > 10  # the pool must actually exercise the matcher


def test_iter_matches_agrees_with_find_matches(circuit_sig, small_circuits,
                                               rds):
    patterns = [r.lhs for r in rds.polygraph.rules]
    for host in small_circuits[:30]:
        for pat in patterns:
            eager = {c.key() for c in find_matches(pat, host)}
            lazy = {c.key() for c in iter_matches(pat, host)}
            assert eager == lazy


def test_leftmost_match_is_first_sorted_match(circuit_sig, small_circuits,
                                              rds):
    patterns = [r.lhs for r in rds.polygraph.rules]
    for host in small_circuits[:30]:
        for pat in patterns:
            all_matches = find_matches(pat, host)
            first = leftmost_match(pat, host)
            if not all_matches:
                assert first is None
            else:
                assert first.key() == all_matches[0].key()
                assert first.matched_nodes == all_matches[0].matched_nodes


def test_match_needs_nonempty_pattern(circuit_sig):
    with pytest.raises(CircuitError):
        find_matches(identity(1), generator(circuit_sig["delta"]))


def test_dualize_is_an_involution(circuit_sig, small_circuits):
    pairs = {"delta": "mu", "mu": "delta", "epsilon": "eta", "eta": "epsilon",
             "tau": "tau"}
    for c in small_circuits:
        d = dualize_circuit(c, pairs)
        assert (d.n_in, d.n_out) == (c.n_out, c.n_in)
        assert dualize_circuit(d, pairs) == c


def test_parse_reports_location():
    sig = Signature((("mu", 2, 1),))
    with pytest.raises(ParseError) as err:
        parse_circuit("mu ; bogus", sig)
    assert "bogus" in str(err.value)
    assert "line 1" in str(err.value)


def test_parse_rejects_arity_mismatch(circuit_sig):
    with pytest.raises(ParseError):
        parse_circuit("delta ; delta", circuit_sig)


def test_random_circuit_is_deterministic(circuit_sig):
    a = random_circuit(circuit_sig, random.Random(5))
    b = random_circuit(circuit_sig, random.Random(5))
    assert a == b
