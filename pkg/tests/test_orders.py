"""Interpretation algebra, symbolic orders, termination certificates."""

from collections import Counter
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyrew import (InterpError, check_rule, compare_multiset, compare_sym,
                     data_dir, interpret, interpretation_by_name,
                     layered_termination, make_f1, make_f3, make_g,
                     monotonicity_check, parse_circuit, parse_interp)
from polyrew.orders import MultisetExpr, SymExpr, compare_counter


def dm_oracle(a, b):
    """Multiset order on concrete counters, decided independently: over a
    total order it is the lexicographic order on descending sequences."""
    ka = tuple(sorted(a.elements(), reverse=True))
    kb = tuple(sorted(b.elements(), reverse=True))
    if ka == kb:
        return "EQ"
    return "GT" if ka > kb else "LT"


small_counters = st.lists(st.integers(min_value=0, max_value=5),
                          max_size=6).map(Counter)


@given(small_counters, small_counters)
def test_compare_counter_matches_descending_lex_oracle(a, b):
    assert compare_counter(a, b) == dm_oracle(a, b)


def test_compare_counter_hand_cases():
    assert compare_counter(Counter([4]), Counter([3, 3, 3, 3])) == "GT"
    assert compare_counter(Counter([2, 1]), Counter([2])) == "GT"
    assert compare_counter(Counter(), Counter([0])) == "LT"
    assert compare_counter(Counter([1, 1]), Counter([1, 1])) == "EQ"


# -- symbolic polynomials ----------------------------------------------------


def sym_env(draw_vals):
    return {f"x{i}": v for i, v in enumerate(draw_vals, start=1)}


simple_envs = st.lists(st.integers(min_value=1, max_value=7), min_size=3,
                       max_size=3).map(sym_env)


def x(i):
    return SymExpr.var(f"x{i}", "N*")


@given(simple_envs)
def test_sym_eval_is_a_ring_homomorphism(env):
    a = x(1) + x(2) * SymExpr.const(3)
    b = x(3) * x(1) + SymExpr.const(2)
    assert (a + b).eval(env) == a.eval(env) + b.eval(env)
    assert (a * b).eval(env) == a.eval(env) * b.eval(env)


@given(simple_envs)
def test_sym_substitution_commutes_with_eval(env):
    a = x(1) * x(1) + x(2)
    sub = {"x1": x(2) + SymExpr.const(1), "x2": SymExpr.const(4)}
    direct = a.substitute(sub).eval(env)
    stagewise = a.eval({"x1": sub["x1"].eval(env), "x2": 4,
                        "x3": env["x3"]})
    assert direct == stagewise


@given(simple_envs)
def test_compare_sym_gt_is_sound_on_positive_points(env):
    pairs = [(x(1) + SymExpr.const(1), x(1)),
             (x(1) * SymExpr.const(2), x(1)),
             (x(1) * x(2) + x(3), x(3)),
             (x(1) + x(2) + x(3), x(2))]
    for hi, lo in pairs:
        assert compare_sym(hi, lo) == "GT"
        assert hi.eval(env) > lo.eval(env)


def test_compare_sym_refutations():
    assert compare_sym(x(1), x(2)) == "UNKNOWN"
    assert compare_sym(x(1), x(1) + SymExpr.const(1)) == "LT"
    assert compare_sym(x(1) + x(2), x(1) + x(2)) == "EQ"
    # x1 >= 1 in carrier N*, so x1 + x2 dominates x2 + 1 weakly but
    # not strictly at x1 = 1
    assert compare_sym(x(1) + x(2), x(2) + SymExpr.const(1)) in ("GE", "EQ",
                                                                 "UNKNOWN")


@given(simple_envs)
def test_compare_multiset_gt_is_sound_on_positive_points(env):
    hi = MultisetExpr.ul(x(1) + SymExpr.const(1))
    lo = MultisetExpr.ul(x(1), 100) + MultisetExpr.ul(SymExpr.const(1), 5)
    assert compare_multiset(hi, lo) == "GT"
    assert compare_counter(hi.eval(env), lo.eval(env)) == "GT"


def test_multiset_eval_respects_multiplicities():
    m = MultisetExpr.ul(x(1), x(2)) + MultisetExpr.ul(SymExpr.const(3))
    got = m.eval({"x1": 2, "x2": 4})
    assert got == Counter({2: 4, 3: 1})


def test_multiset_rejects_negative_multiplicity():
    m = MultisetExpr.ul(x(1), SymExpr.const(-1))
    with pytest.raises(InterpError):
        m.eval({"x1": 1})


# -- interpretations on circuits ---------------------------------------------


def test_heat_counting_interpretation_on_copy_shapes(circuit_sig):
    f1 = make_f1(circuit_sig)
    tri = interpret(f1, parse_circuit("delta", circuit_sig))
    assert [str(c) for c in tri.cov] == ["x1", "x1"]
    assert str(tri.con[0]) == "1 + y1 + y2"


def test_interpret_respects_circuit_equality(circuit_sig):
    f1 = make_f1(circuit_sig)
    a = parse_circuit("delta * id(1) ; id(1) * tau", circuit_sig)
    b = parse_circuit("(delta ; id(1) * id(1)) * id(1) ; id(1) * tau",
                      circuit_sig)
    assert a == b
    ta, tb = interpret(f1, a), interpret(f1, b)
    assert [c.key() for c in ta.cov] == [c.key() for c in tb.cov]
    assert ta.heat.key() == tb.heat.key()


def test_copy_associativity_check_is_strict_with_composite_con(circuit_sig,
                                                               rds):
    f1 = make_f1(circuit_sig)
    rule = next(r for r in rds.polygraph.rules if r.name == "delta_assoc")
    chk = check_rule(f1, rule)
    assert chk.verdict == "strict"
    assert str(chk.lhs.con[0]) == "2 + y1 + y2 + y3"
    assert str(chk.rhs.con[0]) == "2 + y1 + y2 + y3"
    assert chk.heat_cmp == "GT"


def test_braid_rule_needs_the_second_layer(circuit_sig, rds):
    f1, g = make_f1(circuit_sig), make_g(circuit_sig)
    rule = next(r for r in rds.polygraph.rules if r.name == "yang_baxter")
    assert check_rule(f1, rule).verdict == "invariant"
    chk = check_rule(g, rule)
    assert chk.verdict == "strict"
    assert str(chk.lhs.heat) == "2 + 2*x1 + 2*x2 + 2*x3"
    assert str(chk.rhs.heat) == "1 + 2*x1 + 2*x2 + 2*x3"


def test_strict_verdicts_concretize_to_descent(circuit_sig, rds):
    # a symbolic strict verdict must mean real multiset descent at every
    # positive evaluation point; probe a grid of them
    f1 = make_f1(circuit_sig)
    envs = [{f"{v}{i}": val for v in "xy" for i in range(1, 7)}
            for val in (1, 2, 5)]
    envs.append({f"{v}{i}": 1 + (i * 3 + ord(v)) % 4
                 for v in "xy" for i in range(1, 7)})
    for rule in rds.polygraph.rules:
        chk = check_rule(f1, rule)
        for env in envs:
            l = chk.lhs.heat.eval(env)
            r = chk.rhs.heat.eval(env)
            if chk.verdict == "strict":
                assert compare_counter(l, r) == "GT", (rule.name, env)
            elif chk.verdict == "invariant":
                assert compare_counter(l, r) == "EQ", (rule.name, env)


def test_monotonicity_check_clears_builtin_interpretations(circuit_sig):
    for interp in (make_f1(circuit_sig), make_g(circuit_sig)):
        report = monotonicity_check(interp)
        assert set(report) == set(circuit_sig.names())
        assert all(v == "nonneg-coefficients" for v in report.values())


def test_bundled_interp_files_match_builders(circuit_sig):
    for fname, builder in (("f1.interp", make_f1), ("g.interp", make_g)):
        text = (data_dir() / fname).read_text()
        parsed = parse_interp(text, name=fname.split(".")[0])
        built = builder(circuit_sig)
        assert parsed.name == built.name
        assert parsed.carrier == built.carrier
        assert parsed.heat_kind == built.heat_kind
        for op in circuit_sig:
            assert parsed.triple(op).describe() == \
                built.triple(op).describe()


def test_interpretation_by_name_accepts_files_and_rejects_unknown(
        circuit_sig, tmp_path):
    assert interpretation_by_name("f1", circuit_sig).name == "f1"
    assert interpretation_by_name("g", circuit_sig).name == "g"
    with pytest.raises(Exception) as err:
        interpretation_by_name("no_such", circuit_sig)
    assert "no_such" in str(err.value)
    copy = tmp_path / "mine.interp"
    copy.write_text((data_dir() / "f1.interp").read_text())
    loaded = interpretation_by_name(str(copy), circuit_sig)
    assert loaded.heat_kind == "multiset"


# -- layered certificates ------------------------------------------------------


def test_single_layer_certificate_fails_on_the_braid_rule(circuit_sig, rds):
    cert = layered_termination(rds.polygraph.rules,
                               [make_f1(circuit_sig)])
    assert not cert.certified
    assert [f[0] for f in cert.failures] == ["yang_baxter"]


def test_two_layer_certificate_covers_everything(circuit_sig, rds):
    cert = layered_termination(rds.polygraph.rules,
                               [make_f1(circuit_sig), make_g(circuit_sig)])
    assert cert.certified
    assert cert.layer_names == ("f1", "g")
    assert cert.layer_names[cert.assignment["yang_baxter"]] == "g"
    for rule in rds.polygraph.rules:
        if rule.name != "yang_baxter":
            assert cert.layer_names[cert.assignment[rule.name]] == "f1"


def test_certificate_layer_order_matters_for_assignment(circuit_sig, rds):
    # g alone certifies nothing that needs f1 strictness to be checked
    # first; swapping layers must not silently certify
    cert = layered_termination(rds.polygraph.rules,
                               [make_g(circuit_sig)])
    assert not cert.certified


def test_certificate_json_lists_failures(circuit_sig, rds):
    cert = layered_termination(rds.polygraph.rules, [make_f1(circuit_sig)])
    doc = cert.to_json()
    assert doc["certified"] is False
    assert [f["rule"] for f in doc["failures"]] == ["yang_baxter"]
    lines = cert.summary_lines()
    assert any("NOT CERTIFIED" in ln for ln in lines)
    assert lines[-1] == "not certified"
