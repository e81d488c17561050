"""Term language: parsing, rewriting, families, the finite-set reading."""

import random

import pytest

from polyrew import (App, Signature, TermError, TermFamily, Var,
                     finset_semantics, generator, identity, compose, tensor,
                     longest_path_measure, match_term, normalize_term,
                     parse_circuit, parse_term, parse_trs, project_pi,
                     render_trs, sharp, term_universe, trs_step, uniformize)
from polyrew.terms import (family_compose, family_identity, family_tensor,
                           occurrences, replace_at)


def enumerate_terms(signature, depth, n_vars):
    """Independent oracle for term_universe: plain recursive closure."""
    level = {Var(i) for i in range(1, n_vars + 1)}
    for _ in range(depth):
        nxt = set(level)
        for op in signature:
            if op.n_in == 0:
                nxt.add(App(op.name, ()))
        for op in signature:
            if op.n_in == 2:
                nxt.update(App(op.name, (a, b))
                           for a in level for b in level)
            elif op.n_in == 1:
                nxt.update(App(op.name, (a,)) for a in level)
        level = nxt
    return level


@pytest.mark.parametrize("depth,n_vars", [(0, 2), (1, 1), (1, 2), (2, 1),
                                          (2, 2)])
def test_term_universe_matches_recursive_closure(term_sig, depth, n_vars):
    got = term_universe(term_sig, depth, n_vars)
    assert len(got) == len(set(got))  # no duplicates
    assert set(got) == enumerate_terms(term_sig, depth, n_vars)


def test_term_universe_hand_counts(term_sig):
    assert len(term_universe(term_sig, 1, 1)) == 3
    assert len(term_universe(term_sig, 2, 1)) == 11
    # counts satisfy |T(d)| = |T(d-1)|^2 + n_vars + 1 for this signature
    t2 = len(term_universe(term_sig, 2, 3))
    assert len(term_universe(term_sig, 3, 3)) == t2 * t2 + 3 + 1


def test_parse_term_round_trip():
    for text in ["x1", "eta", "mu(x1, mu(eta, x2))",
                 "mu(mu(x1, x1), mu(x2, x3))"]:
        assert str(parse_term(text)) == text


def test_parse_term_rejects_garbage():
    from polyrew import ParseError
    for bad in ["", "mu(x1", "mu(x1,)", "1x", "mu(x1, x2))"]:
        with pytest.raises(ParseError):
            parse_term(bad)


def test_sharp_is_highest_variable_index():
    assert sharp(parse_term("x3")) == 3
    assert sharp(parse_term("mu(x1, x4)")) == 4
    assert sharp(parse_term("eta")) == 0


def test_trs_round_trip(r0, r1, r2):
    for preset in (r0, r1, r2):
        again = parse_trs(render_trs(preset.trs))
        assert [str(r) for r in again.rules] == \
            [str(r) for r in preset.trs.rules]


def test_trs_step_enumerates_all_single_step_reducts(r0):
    t = parse_term("mu(mu(x1, eta), x2)")
    steps = {(name, str(v)) for name, _, v in trs_step(r0.trs, t)}
    assert steps == {("A", "mu(x1, mu(eta, x2))"), ("R", "mu(x1, x2)")}


def flatten_leaves(term):
    if isinstance(term, Var):
        return [term]
    if term.op == "eta":
        return []
    return flatten_leaves(term.args[0]) + flatten_leaves(term.args[1])


def right_comb(leaves):
    if not leaves:
        return parse_term("eta")
    out = leaves[-1]
    for leaf in reversed(leaves[:-1]):
        out = App("mu", (leaf, out))
    return out


def test_normal_forms_are_flattened_right_combs(r0, term_sig):
    # associativity plus both unit rules normalize any term to the right
    # comb over its variable sequence; that is checkable independently
    rng = random.Random(2)
    pool = term_universe(term_sig, 3, 2)
    for t in rng.sample(pool, 120):
        nf, status, _ = normalize_term(r0.trs, t)
        assert status == "normal-form"
        assert nf == right_comb(flatten_leaves(t))


def test_normalize_term_counts_steps(r0):
    t = parse_term("mu(mu(eta, x1), eta)")
    nf, status, steps = normalize_term(r0.trs, t)
    assert nf == Var(1)
    assert status == "normal-form"
    assert steps >= 2


def test_longest_path_measure_hand_values(r0):
    assert longest_path_measure(r0.trs, parse_term("x1")) == 1
    assert longest_path_measure(r0.trs, parse_term("mu(eta, x1)")) == 2
    # A then R beats the direct R step: 1 + 2 steps
    assert longest_path_measure(r0.trs, parse_term("mu(mu(x1, eta), x2)")) == 3


def test_longest_path_measure_drops_along_every_step(r0, term_sig):
    rng = random.Random(5)
    memo = {}
    for t in rng.sample(term_universe(term_sig, 2, 2), 30):
        m = longest_path_measure(r0.trs, t, _memo=memo)
        for _, _, v in trs_step(r0.trs, t):
            assert longest_path_measure(r0.trs, v, _memo=memo) < m


def test_match_term_and_replace_at():
    pattern = parse_term("mu(x1, x2)")
    t = parse_term("mu(mu(x1, eta), x2)")
    binding = match_term(pattern, t)
    assert binding == {1: parse_term("mu(x1, eta)"), 2: Var(2)}
    assert match_term(parse_term("mu(x1, x1)"), t) is None
    swapped = replace_at(t, (0,), Var(5))
    assert swapped == parse_term("mu(x5, x2)")


def test_occurrences_lists_variables_in_order():
    assert list(occurrences(parse_term("mu(mu(x2, eta), x1)"))) == [2, 1]


def test_uniformize_renames_variables_left_to_right():
    trs = parse_trs("op f : 2 -> 1\nw: f(x3, x7) => f(x7, x3)\n")
    uni = uniformize(trs.rules[0])
    assert str(uni.lhs) == "f(x1, x2)"
    assert str(uni.rhs) == "f(x2, x1)"


def test_left_linearity_flag(r2):
    by_name = {r.name: r for r in r2.trs.rules}
    assert by_name["A"].left_linear
    assert by_name["C"].left_linear
    assert not by_name["S"].left_linear


# -- term families ---------------------------------------------------------


def test_family_compose_substitutes_outputs():
    f = TermFamily(2, (parse_term("mu(x1, x2)"), Var(1)))
    g = TermFamily(2, (parse_term("mu(x2, x1)"),))
    assert family_compose(f, g) == TermFamily(2, (parse_term("mu(x1, mu(x1, x2))"),))


def test_family_identity_laws():
    f = TermFamily(2, (parse_term("mu(x2, x1)"), Var(2)))
    assert family_compose(family_identity(2), f) == f
    assert family_compose(f, family_identity(2)) == f


def test_family_tensor_shifts_variables():
    f = TermFamily(1, (parse_term("mu(x1, x1)"),))
    g = TermFamily(2, (Var(2),))
    assert family_tensor(f, g) == TermFamily(3, (parse_term("mu(x1, x1)"),
                                                 Var(3)))


def test_project_pi_is_functorial(circuit_sig):
    a = parse_circuit("delta ; id(1) * delta", circuit_sig)
    b = parse_circuit("tau * id(1)", circuit_sig)
    assert project_pi(compose(a, b)) == \
        family_compose(project_pi(a), project_pi(b))
    assert project_pi(tensor(a, b)) == \
        family_tensor(project_pi(a), project_pi(b))


def test_project_pi_generator_readings(circuit_sig):
    assert project_pi(generator(circuit_sig["tau"])) == \
        TermFamily(2, (Var(2), Var(1)))
    assert project_pi(generator(circuit_sig["delta"])) == \
        TermFamily(1, (Var(1), Var(1)))
    assert project_pi(generator(circuit_sig["epsilon"])) == TermFamily(1, ())
    assert project_pi(generator(circuit_sig["mu"])) == \
        TermFamily(2, (parse_term("mu(x1, x2)"),))


def test_project_pi_rejects_multi_output_operators():
    sig = Signature((("split", 1, 2),))
    with pytest.raises(TermError):
        project_pi(generator(sig["split"]))


# -- finite-set semantics ----------------------------------------------------


def test_finset_semantics_of_pure_wire_circuits(circuit_sig):
    ff = finset_semantics(parse_circuit("tau ; tau", circuit_sig))
    assert (ff.n_in, ff.n_out, ff.backmap) == (2, 2, (0, 1))
    ff = finset_semantics(parse_circuit("delta ; epsilon * id(1)",
                                        circuit_sig))
    assert (ff.n_in, ff.n_out, ff.backmap) == (1, 1, (0,))
    ff = finset_semantics(parse_circuit("tau", circuit_sig))
    assert ff.backmap == (1, 0)


def test_finset_agrees_with_term_reading(circuit_sig):
    # on tau/delta/epsilon circuits the term family is all variables and
    # must list exactly the finite-set backmap, one-based
    rng = random.Random(9)
    wire_sig = Signature((("tau", 2, 2), ("delta", 1, 2), ("epsilon", 1, 0)))
    from polyrew import random_circuit
    for _ in range(50):
        c = random_circuit(wire_sig, rng, max_nodes=6, max_width=5)
        ff = finset_semantics(c)
        fam = project_pi(c)
        assert fam.terms == tuple(Var(i + 1) for i in ff.backmap)


def test_finset_rejects_operator_nodes(circuit_sig):
    with pytest.raises(TermError):
        finset_semantics(parse_circuit("mu", circuit_sig))
