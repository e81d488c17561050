"""Termination orders for circuits via two-sided polynomial interpretations.

Every operator gets a triple: a covariant map sending input values
downward, a contravariant map sending output values upward, and a heat,
which is either a natural number or a finite multiset of natural
numbers.  Triples compose along the circuit structure, heats add up,
and a rewriting rule is oriented by comparing the triples of its two
sides: strict rules drop the heat and never increase the maps,
invariant rules change nothing, so stacking interpretations in layers
gives a termination certificate for the whole system.

All comparisons here are symbolic and sound-but-incomplete: a verdict
of GT/GE/LT/LE/EQ holds for every assignment of the variables in the
declared carrier (naturals, or naturals starting at 1), while UNKNOWN
commits to nothing.  Polynomials are compared by shifting every
variable to its carrier minimum and inspecting signs of coefficients;
multisets by cancelling shared generators and then checking that each
leftover on the small side sits strictly below a guaranteed leftover on
the big side.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from itertools import product as iter_product

from .circuits import fold_circuit
from .errors import DataFormatError, InterpError, ParseError

CARRIER_NAT = "N"
CARRIER_POS = "N*"
_CARRIER_MIN = {CARRIER_NAT: 0, CARRIER_POS: 1}

EQ = "EQ"
GT = "GT"
GE = "GE"
LT = "LT"
LE = "LE"
UNKNOWN = "UNKNOWN"

STRICT = "strict"
INVARIANT = "invariant"
NONSTRICT = "nonstrict"
UNDECIDED = "unknown"


def _unify_carrier(a, b):
    if a is None:
        return b
    if b is None or a == b:
        return a
    raise InterpError(f"mixed carriers {a} and {b}")


def _mono_mul(m1, m2):
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


class SymExpr:
    """A polynomial with integer coefficients over named variables.

    Variables live in the expression's carrier: N (minimum 0) or N*
    (minimum 1).  Instances are immutable; +, * and ** build new ones.
    """

    __slots__ = ("carrier", "_d", "_key", "_shift")

    def __init__(self, d, carrier=None):
        clean = {}
        has_vars = False
        for m, c in d.items():
            if c != 0:
                clean[m] = c
                if m:
                    has_vars = True
        self._d = clean
        self.carrier = carrier if has_vars else None
        if has_vars and carrier not in _CARRIER_MIN:
            raise InterpError(f"bad carrier {carrier!r}")
        self._key = None
        self._shift = None

    @staticmethod
    def const(n):
        return SymExpr({(): int(n)})

    @staticmethod
    def var(name, carrier):
        return SymExpr({((name, 1),): 1}, carrier)

    def key(self):
        if self._key is None:
            self._key = tuple(sorted(self._d.items()))
        return self._key

    def variables(self):
        out = set()
        for m in self._d:
            for v, _ in m:
                out.add(v)
        return out

    def is_zero(self):
        return not self._d

    def is_const(self):
        return all(not m for m in self._d)

    def const_value(self):
        if not self.is_const():
            raise InterpError("not a constant")
        return self._d.get((), 0)

    def __add__(self, other):
        other = as_sym(other)
        carrier = _unify_carrier(self.carrier, other.carrier)
        d = dict(self._d)
        for m, c in other._d.items():
            d[m] = d.get(m, 0) + c
        return SymExpr(d, carrier)

    __radd__ = __add__

    def __mul__(self, other):
        other = as_sym(other)
        carrier = _unify_carrier(self.carrier, other.carrier)
        d = {}
        for m1, c1 in self._d.items():
            for m2, c2 in other._d.items():
                m = _mono_mul(m1, m2)
                d[m] = d.get(m, 0) + c1 * c2
        return SymExpr(d, carrier)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = SymExpr.const(1)
        for _ in range(int(n)):
            out = out * self
        return out

    def _sub(self, other):
        """Internal difference; may leave negative coefficients."""
        other = as_sym(other)
        carrier = _unify_carrier(self.carrier, other.carrier)
        d = dict(self._d)
        for m, c in other._d.items():
            d[m] = d.get(m, 0) - c
        return SymExpr(d, carrier)

    def substitute(self, mapping):
        """Replace variables by expressions (names absent stay put)."""
        out_carrier = None
        acc = SymExpr.const(0)
        for m, c in self._d.items():
            term = SymExpr.const(c)
            for v, e in m:
                if v in mapping:
                    base = as_sym(mapping[v])
                else:
                    base = SymExpr.var(v, self.carrier)
                term = term * base ** e
            acc = acc + term
        return acc

    def shifted(self):
        """Coefficients after moving every variable to start at 0."""
        if self._shift is None:
            if self.carrier in (None, CARRIER_NAT):
                self._shift = dict(self._d)
            else:
                lo = _CARRIER_MIN[self.carrier]
                sub = {v: SymExpr.var(v, CARRIER_NAT) + lo
                       for v in self.variables()}
                self._shift = dict(self.substitute(sub)._d)
        return self._shift

    def eval(self, env):
        lo = _CARRIER_MIN.get(self.carrier, 0)
        for v in self.variables():
            if v not in env:
                raise InterpError(f"no value for variable {v}")
            if env[v] < lo:
                raise InterpError(
                    f"value {env[v]} for {v} below carrier minimum {lo}")
        total = 0
        for m, c in self._d.items():
            val = c
            for v, e in m:
                val *= env[v] ** e
            total += val
        return total

    def __str__(self):
        if not self._d:
            return "0"
        bits = []
        for m, c in sorted(self._d.items()):
            factors = []
            if c != 1 or not m:
                factors.append(str(c))
            for v, e in m:
                factors.extend([v] * e)
            bits.append("*".join(factors))
        return " + ".join(bits)

    def __repr__(self):
        return f"SymExpr({self})"

    def __eq__(self, other):
        if not isinstance(other, SymExpr):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def as_sym(x):
    if isinstance(x, SymExpr):
        return x
    if isinstance(x, int):
        return SymExpr.const(x)
    raise InterpError(f"cannot turn {x!r} into a polynomial")


def compare_sym(a, b):
    """Pointwise comparison over the carrier: EQ/GT/GE/LT/LE/UNKNOWN."""
    a = as_sym(a)
    b = as_sym(b)
    _unify_carrier(a.carrier, b.carrier)
    if a.key() == b.key():
        return EQ
    d = a._sub(b).shifted()
    vals = list(d.values())
    if all(v >= 0 for v in vals):
        return GT if d.get((), 0) >= 1 else GE
    if all(v <= 0 for v in vals):
        return LT if d.get((), 0) <= -1 else LE
    return UNKNOWN


def _surely_positive(coeff_shifted):
    """True when the shifted form proves the value is always >= 1."""
    return (all(v >= 0 for v in coeff_shifted.values())
            and coeff_shifted.get((), 0) >= 1)


def refute_compare(a, b, claim, width=3):
    """Search small assignments for a counterexample to a comparison claim.

    claim is one of GE/GT/LE/LT/EQ.  Returns a falsifying environment
    or None.  Reported separately from compare_sym; never used to turn
    an UNKNOWN into a definite verdict.
    """
    a = as_sym(a)
    b = as_sym(b)
    carrier = _unify_carrier(a.carrier, b.carrier)
    lo = _CARRIER_MIN.get(carrier, 0)
    names = sorted(a.variables() | b.variables())
    tests = {
        GE: lambda x, y: x >= y, GT: lambda x, y: x > y,
        LE: lambda x, y: x <= y, LT: lambda x, y: x < y,
        EQ: lambda x, y: x == y,
    }
    ok = tests[claim]
    for values in iter_product(range(lo, lo + width + 1), repeat=len(names)):
        env = dict(zip(names, values))
        if not ok(a.eval(env), b.eval(env)):
            return env
    return None


class MultisetExpr:
    """A formal multiset: generators ul(p) with polynomial multiplicities."""

    __slots__ = ("items", "_key")

    def __init__(self, items=()):
        merged = {}
        for gen, coeff in items:
            gen = as_sym(gen)
            coeff = as_sym(coeff)
            k = (gen.carrier or "", gen.key())
            if k in merged:
                merged[k] = (gen, merged[k][1] + coeff)
            else:
                merged[k] = (gen, coeff)
        self.items = tuple(
            (gen, coeff) for k, (gen, coeff) in sorted(merged.items())
            if not coeff.is_zero())
        self._key = None

    @staticmethod
    def ul(gen, coeff=1):
        return MultisetExpr(((as_sym(gen), as_sym(coeff)),))

    @staticmethod
    def zero():
        return MultisetExpr(())

    def key(self):
        if self._key is None:
            self._key = tuple((g.key(), c.key()) for g, c in self.items)
        return self._key

    def is_zero(self):
        return not self.items

    def __add__(self, other):
        if not isinstance(other, MultisetExpr):
            raise InterpError("can only add multisets to multisets")
        return MultisetExpr(self.items + other.items)

    def scale(self, factor):
        factor = as_sym(factor)
        return MultisetExpr(tuple((g, c * factor) for g, c in self.items))

    def substitute(self, mapping):
        return MultisetExpr(tuple((g.substitute(mapping),
                                   c.substitute(mapping))
                                  for g, c in self.items))

    def variables(self):
        out = set()
        for g, c in self.items:
            out |= g.variables() | c.variables()
        return out

    def eval(self, env):
        out = Counter()
        for g, c in self.items:
            n = c.eval(env)
            if n < 0:
                raise InterpError("multiset multiplicity went negative")
            if n:
                out[g.eval(env)] += n
        return out

    def __str__(self):
        if not self.items:
            return "0"
        bits = []
        for g, c in self.items:
            if c.is_const() and c.const_value() == 1:
                bits.append(f"ul({g})")
            elif c.is_const() or c.is_zero() or len(c._d) == 1:
                bits.append(f"{c}*ul({g})")
            else:
                bits.append(f"({c})*ul({g})")
        return " + ".join(bits)

    def __repr__(self):
        return f"MultisetExpr({self})"

    def __eq__(self, other):
        if not isinstance(other, MultisetExpr):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def compare_multiset(a, b):
    """Pointwise multiset-order comparison: EQ/GT/GE/LT/LE/UNKNOWN.

    First cancels shared generators through coefficient comparison,
    then tries to dominate every leftover of one side by a provably
    present, strictly larger generator on the other side.
    """
    if not isinstance(a, MultisetExpr) or not isinstance(b, MultisetExpr):
        raise InterpError("compare_multiset needs two multisets")
    right = {(g.carrier, g.key()): (g, c) for g, c in b.items}
    left_rest = []
    right_rest = []
    for g, c in a.items:
        k = (g.carrier, g.key())
        if k not in right:
            left_rest.append((g, c))
            continue
        g2, c2 = right.pop(k)
        v = compare_sym(c, c2)
        if v == EQ:
            continue
        if v in (GT, GE):
            left_rest.append((g, c._sub(c2)))
        elif v in (LT, LE):
            right_rest.append((g, c2._sub(c)))
        else:
            left_rest.append((g, c))
            right_rest.append((g, c2))
    right_rest.extend(right.values())

    if not left_rest and not right_rest:
        return EQ

    def present(side):
        return any(_surely_positive(c.shifted()) for _, c in side)

    def dominated(small, big):
        for g_s, _ in small:
            hit = False
            for g_b, c_b in big:
                if (_surely_positive(c_b.shifted())
                        and compare_sym(g_b, g_s) == GT):
                    hit = True
                    break
            if not hit:
                return False
        return True

    if not right_rest:
        return GT if present(left_rest) else GE
    if not left_rest:
        return LT if present(right_rest) else LE
    if dominated(right_rest, left_rest):
        return GT
    if dominated(left_rest, right_rest):
        return LT
    return UNKNOWN


def compare_counter(a, b):
    """Exact multiset-order comparison of two concrete Counters."""
    extra_a = +(Counter(a) - Counter(b))
    extra_b = +(Counter(b) - Counter(a))
    if not extra_a and not extra_b:
        return EQ
    if not extra_b:
        return GT
    if not extra_a:
        return LT
    return GT if max(extra_a) > max(extra_b) else LT


def compare_heat(a, b):
    if isinstance(a, MultisetExpr) and isinstance(b, MultisetExpr):
        return compare_multiset(a, b)
    if isinstance(a, MultisetExpr) or isinstance(b, MultisetExpr):
        raise InterpError("cannot compare a multiset heat with a scalar one")
    return compare_sym(a, b)


# -- interpretation triples ------------------------------------------------


@dataclass(frozen=True)
class InterpTriple:
    """Covariant map, contravariant map and heat for one arrow.

    cov has one polynomial per output, in x1..x{n_in}; con has one per
    input, in y1..y{n_out}; the heat mixes both variable families.
    """

    n_in: int
    n_out: int
    cov: tuple
    con: tuple
    heat: object

    def __post_init__(self):
        if len(self.cov) != self.n_out:
            raise InterpError("cov length must equal n_out")
        if len(self.con) != self.n_in:
            raise InterpError("con length must equal n_in")
        xs = {f"x{i}" for i in range(1, self.n_in + 1)}
        ys = {f"y{j}" for j in range(1, self.n_out + 1)}
        for e in self.cov:
            if not e.variables() <= xs:
                raise InterpError(f"cov uses foreign variables: {e}")
        for e in self.con:
            if not e.variables() <= ys:
                raise InterpError(f"con uses foreign variables: {e}")
        hv = (self.heat.variables()
              if isinstance(self.heat, (SymExpr, MultisetExpr)) else None)
        if hv is None or not hv <= xs | ys:
            raise InterpError("heat uses foreign variables")

    def describe(self):
        cov = ", ".join(str(e) for e in self.cov)
        con = ", ".join(str(e) for e in self.con)
        return f"cov=({cov}) con=({con}) heat={self.heat}"


def _xvars(n, carrier):
    return tuple(SymExpr.var(f"x{i}", carrier) for i in range(1, n + 1))


def _yvars(n, carrier):
    return tuple(SymExpr.var(f"y{j}", carrier) for j in range(1, n + 1))


def o_identity(n, carrier, heat_kind):
    zero = MultisetExpr.zero() if heat_kind == "multiset" \
        else SymExpr.const(0)
    return InterpTriple(n, n, _xvars(n, carrier), _yvars(n, carrier), zero)


def o_compose(f, g):
    """Triple of `f followed by g`."""
    if f.n_out != g.n_in:
        raise InterpError("triple arities do not compose")
    xsub = {f"x{i + 1}": f.cov[i] for i in range(f.n_out)}
    ysub = {f"y{j + 1}": g.con[j] for j in range(g.n_in)}
    cov = tuple(e.substitute(xsub) for e in g.cov)
    con = tuple(e.substitute(ysub) for e in f.con)
    heat = f.heat.substitute(ysub) + g.heat.substitute(xsub)
    return InterpTriple(f.n_in, g.n_out, cov, con, heat)


def _shift_expr(e, dx, dy):
    """Renumber x-variables by dx and y-variables by dy."""
    sub = {}
    for v in e.variables():
        off = dx if v[0] == "x" else dy
        sub[v] = SymExpr.var(f"{v[0]}{int(v[1:]) + off}", e.carrier)
    return e.substitute(sub)


def _shift_heat(h, dx, dy):
    if isinstance(h, SymExpr):
        return _shift_expr(h, dx, dy)
    return MultisetExpr(tuple((_shift_expr(g, dx, dy),
                               _shift_expr(c, dx, dy))
                              for g, c in h.items))


def o_tensor(f, g):
    cov = f.cov + tuple(_shift_expr(e, f.n_in, f.n_out) for e in g.cov)
    con = f.con + tuple(_shift_expr(e, f.n_in, f.n_out) for e in g.con)
    heat = f.heat + _shift_heat(g.heat, f.n_in, f.n_out)
    return InterpTriple(f.n_in + g.n_in, f.n_out + g.n_out, cov, con, heat)


def _swap_xy(e):
    sub = {}
    for v in e.variables():
        other = "y" if v[0] == "x" else "x"
        sub[v] = SymExpr.var(other + v[1:], e.carrier)
    return e.substitute(sub)


def dual_triple(t):
    """Mirror a triple: swap the two maps and the heat's variable roles."""
    if isinstance(t.heat, SymExpr):
        heat = _swap_xy(t.heat)
    else:
        heat = MultisetExpr(tuple((_swap_xy(g), _swap_xy(c))
                                  for g, c in t.heat.items))
    return InterpTriple(t.n_out, t.n_in,
                        tuple(_swap_xy(e) for e in t.con),
                        tuple(_swap_xy(e) for e in t.cov),
                        heat)


class Interpretation:
    """A named table of triples, one per operator, over one carrier."""

    def __init__(self, name, carrier, heat_kind, table=None, description=""):
        if carrier not in _CARRIER_MIN:
            raise InterpError(f"bad carrier {carrier!r}")
        if heat_kind not in ("scalar", "multiset"):
            raise InterpError(f"bad heat kind {heat_kind!r}")
        self.name = name
        self.carrier = carrier
        self.heat_kind = heat_kind
        self.description = description
        self.table = {}
        self._ids = {}
        for op_name, triple in (table or {}).items():
            self.set(op_name, triple)

    def set(self, op_name, triple):
        want_mset = self.heat_kind == "multiset"
        if isinstance(triple.heat, MultisetExpr) != want_mset:
            raise InterpError(
                f"heat kind mismatch for {op_name} in {self.name}")
        self.table[op_name] = triple

    def triple(self, op):
        if op.name not in self.table:
            raise InterpError(
                f"interpretation {self.name} has no entry for operator "
                f"{op.name}")
        t = self.table[op.name]
        if (t.n_in, t.n_out) != (op.n_in, op.n_out):
            raise InterpError(
                f"interpretation {self.name} entry for {op.name} has "
                f"arity {t.n_in}->{t.n_out}, operator is "
                f"{op.n_in}->{op.n_out}")
        return t

    def identity(self, n):
        if n not in self._ids:
            self._ids[n] = o_identity(n, self.carrier, self.heat_kind)
        return self._ids[n]

    def __repr__(self):
        return f"<Interpretation {self.name} ({len(self.table)} ops)>"


def interpret(interp, circuit):
    """Fold an interpretation over a circuit, producing one triple."""
    return fold_circuit(circuit, interp.triple, interp.identity,
                        o_compose, o_tensor)


def monotonicity_check(interp):
    """Check the syntactic criterion: every coefficient is nonnegative.

    Tables built from nonnegative polynomials are monotone in every
    argument, which is what soundness of the order needs.  Returns a
    dict op name -> "nonneg-coefficients" | "inconclusive"; an
    inconclusive entry is never silently treated as monotone.
    """
    out = {}
    for name, t in interp.table.items():
        exprs = list(t.cov) + list(t.con)
        if isinstance(t.heat, SymExpr):
            exprs.append(t.heat)
        else:
            for g, c in t.heat.items:
                exprs.extend((g, c))
        ok = all(v >= 0 for e in exprs for v in e._d.values())
        out[name] = "nonneg-coefficients" if ok else "inconclusive"
    return out


# -- rule checking and layered certificates --------------------------------


_GOOD = (EQ, GE, GT)


@dataclass
class RuleCheck:
    rule: str
    verdict: str
    cov_cmp: tuple
    con_cmp: tuple
    heat_cmp: str
    lhs: InterpTriple
    rhs: InterpTriple

    def to_json(self):
        return {
            "rule": self.rule,
            "verdict": self.verdict,
            "cov": list(self.cov_cmp),
            "con": list(self.con_cmp),
            "heat": self.heat_cmp,
            "lhs": self.lhs.describe(),
            "rhs": self.rhs.describe(),
        }


def check_rule(interp, rule):
    """Compare both sides of a rule under one interpretation.

    Verdicts: strict (maps never increase, heat strictly drops),
    invariant (everything equal), nonstrict (never increases), unknown.
    """
    lt = interpret(interp, rule.lhs)
    rt = interpret(interp, rule.rhs)
    if (lt.n_in, lt.n_out) != (rt.n_in, rt.n_out):
        raise InterpError(f"rule {rule.name} sides have different arities")
    cov_cmp = tuple(compare_sym(a, b) for a, b in zip(lt.cov, rt.cov))
    con_cmp = tuple(compare_sym(a, b) for a, b in zip(lt.con, rt.con))
    heat_cmp = compare_heat(lt.heat, rt.heat)
    maps = cov_cmp + con_cmp
    if all(v == EQ for v in maps) and heat_cmp == EQ:
        verdict = INVARIANT
    elif all(v in _GOOD for v in maps) and heat_cmp == GT:
        verdict = STRICT
    elif all(v in _GOOD for v in maps) and heat_cmp in (GE, EQ):
        verdict = NONSTRICT
    else:
        verdict = UNDECIDED
    return RuleCheck(rule.name, verdict, cov_cmp, con_cmp, heat_cmp, lt, rt)


@dataclass
class Certificate:
    """Outcome of a layered termination check.

    Every rule must be strict in some layer and invariant in all layers
    before it; `assignment` records the layer per rule, `checks` keeps
    the per-layer evidence so the verdicts can be re-derived.
    """

    certified: bool
    layer_names: tuple
    assignment: dict
    checks: dict
    failures: list = field(default_factory=list)

    def to_json(self):
        return {
            "certified": self.certified,
            "layers": list(self.layer_names),
            "assignment": {k: v for k, v in self.assignment.items()},
            "failures": [
                {"rule": r, "layer": self.layer_names[k], "verdict": v}
                for r, k, v in self.failures],
            "checks": {
                rule: [c.to_json() for c in per_layer]
                for rule, per_layer in self.checks.items()},
        }

    def summary_lines(self):
        lines = []
        for rule, layer in self.assignment.items():
            if layer is None:
                r, k, v = next(f for f in self.failures if f[0] == rule)
                lines.append(f"{rule}: NOT CERTIFIED "
                             f"({v} in layer {self.layer_names[k]})")
            else:
                lines.append(
                    f"{rule}: strict in layer {self.layer_names[layer]}")
        lines.append("certified" if self.certified else "not certified")
        return lines


def layered_termination(rules, layers):
    """Assign every rule to a layer where it is strict, or fail honestly.

    layers is an ordered list of Interpretation objects.  A rule may be
    strict in layer k only when it is invariant in layers 0..k-1; rules
    that run out of layers leave the certificate uncertified.
    """
    if not layers:
        raise InterpError("need at least one interpretation layer")
    assignment = {}
    checks = {}
    failures = []
    for rule in rules:
        per_layer = []
        assigned = None
        for k, interp in enumerate(layers):
            rc = check_rule(interp, rule)
            per_layer.append(rc)
            if rc.verdict == STRICT:
                assigned = k
                break
            if rc.verdict != INVARIANT:
                failures.append((rule.name, k, rc.verdict))
                break
        else:
            failures.append((rule.name, len(layers) - 1, per_layer[-1].verdict))
        assignment[rule.name] = assigned
        checks[rule.name] = per_layer
    certified = all(v is not None for v in assignment.values())
    return Certificate(certified, tuple(i.name for i in layers),
                       assignment, checks, failures)


# -- built-in interpretation tables -----------------------------------------


def _heat_zero(kind):
    return MultisetExpr.zero() if kind == "multiset" else SymExpr.const(0)


def make_f1(signature):
    """Multiset-heat interpretation over N* for resource + term operators.

    Covers tau, delta, epsilon and any operator with a single output;
    this is the workhorse table that orients the wire-management rules.
    """
    C = CARRIER_POS

    def xv(i):
        return SymExpr.var(f"x{i}", C)

    def yv(j):
        return SymExpr.var(f"y{j}", C)

    ul = MultisetExpr.ul
    table = {}
    for op in signature:
        if op.name == "tau":
            heat = ul(yv(2), xv(1) * xv(2)) + ul(xv(1) + xv(2), yv(2))
            table["tau"] = InterpTriple(2, 2, (xv(2), xv(1)),
                                        (yv(2), yv(1)), heat)
        elif op.name == "delta":
            table["delta"] = InterpTriple(
                1, 2, (xv(1), xv(1)), (yv(1) + yv(2) + 1,),
                ul(xv(1)) + ul(yv(2)))
        elif op.name == "epsilon":
            table["epsilon"] = InterpTriple(
                1, 0, (), (SymExpr.const(1),), MultisetExpr.zero())
        elif op.n_out == 1:
            total = SymExpr.const(1)
            for i in range(1, op.n_in + 1):
                total = total + xv(i)
            table[op.name] = InterpTriple(
                op.n_in, 1, (total,),
                tuple(yv(1) for _ in range(op.n_in)), ul(yv(1)))
        else:
            raise InterpError(
                f"operator {op.name} ({op.n_in}->{op.n_out}) has no "
                f"entry in this table")
    return Interpretation("f1", C, "multiset", table,
                          "multiset heat over positive counts")


def make_g(signature):
    """Scalar-heat interpretation over N; breaks the wire-crossing ties."""
    C = CARRIER_NAT

    def xv(i):
        return SymExpr.var(f"x{i}", C)

    def yv(j):
        return SymExpr.var(f"y{j}", C)

    zero = SymExpr.const(0)
    table = {}
    for op in signature:
        if op.name == "tau":
            table["tau"] = InterpTriple(
                2, 2, (xv(2), xv(1) + 1), (yv(2), yv(1)), xv(1) + xv(2))
        elif op.name == "delta":
            table["delta"] = InterpTriple(
                1, 2, (xv(1), xv(1)), (yv(1) + yv(2),), zero)
        elif op.name == "epsilon":
            table["epsilon"] = InterpTriple(
                1, 0, (), (SymExpr.const(1),), zero)
        elif op.n_out == 1:
            total = SymExpr.const(0)
            for i in range(1, op.n_in + 1):
                total = total + xv(i)
            table[op.name] = InterpTriple(
                op.n_in, 1, (total,),
                tuple(yv(1) for _ in range(op.n_in)), zero)
        else:
            raise InterpError(
                f"operator {op.name} ({op.n_in}->{op.n_out}) has no "
                f"entry in this table")
    return Interpretation("g", C, "scalar", table,
                          "scalar heat counting crossings")


def make_f3(signature):
    """Multiset-heat table for the self-dual two-generator theory.

    Expects mu, eta, delta, epsilon, tau and optionally kappa; tau and
    kappa share one entry, which makes the table compatible with the
    vertical-flip duality of that preset.
    """
    C = CARRIER_POS

    def xv(i):
        return SymExpr.var(f"x{i}", C)

    def yv(j):
        return SymExpr.var(f"y{j}", C)

    ul = MultisetExpr.ul
    braided = InterpTriple(
        2, 2, (xv(1) + xv(2), xv(1)), (yv(1) + yv(2), yv(1)),
        ul(xv(1)) + ul(yv(1)))
    known = {
        "mu": InterpTriple(2, 1, (xv(1) + xv(2),), (yv(1), yv(1)),
                           ul(xv(1)) + ul(yv(1))),
        "eta": InterpTriple(0, 1, (SymExpr.const(1),), (), ul(yv(1))),
        "delta": InterpTriple(1, 2, (xv(1), xv(1)), (yv(1) + yv(2),),
                              ul(xv(1)) + ul(yv(1))),
        "epsilon": InterpTriple(1, 0, (), (SymExpr.const(1),), ul(xv(1))),
        "tau": braided,
        "kappa": braided,
    }
    table = {}
    for op in signature:
        if op.name not in known:
            raise InterpError(f"operator {op.name} has no entry in this "
                              f"table")
        table[op.name] = known[op.name]
    return Interpretation("lz2", C, "multiset", table,
                          "self-dual multiset heat table")


# -- interpretation files ----------------------------------------------------


_POLY_TOKENS = re.compile(r"[a-z][a-z0-9_]*|\d+|[()+*^,]|\S")
_POLY_VAR_RE = re.compile(r"^[xy][1-9][0-9]*$")


def parse_poly(text, carrier, allow_ul=False, line=1, env=None):
    """Parse a polynomial, or with allow_ul a multiset expression.

    Values are pairs (scalar, multiset); sums add componentwise, a
    product may touch at most one ul() factor.  The public result is a
    SymExpr (no ul present) or a MultisetExpr (pure sum of ul terms).
    With env, identifiers are resolved through the given name -> SymExpr
    mapping instead of the default x1/y1 convention.
    """
    toks = [(m.group(0), line, m.start() + 1)
            for m in _POLY_TOKENS.finditer(text)]
    pos = 0

    def peek():
        return toks[pos][0] if pos < len(toks) else None

    def where():
        if pos < len(toks):
            return toks[pos][1], toks[pos][2]
        return line, len(text) + 1

    def fail(msg):
        ln, col = where()
        raise ParseError(msg, ln, col)

    def atom():
        nonlocal pos
        t = peek()
        if t is None:
            fail("expected a polynomial")
        if t.isdigit():
            pos += 1
            return (SymExpr.const(int(t)), MultisetExpr.zero())
        if t == "(":
            pos += 1
            v = total()
            if peek() != ")":
                fail("expected ')'")
            pos += 1
            return v
        if t == "ul":
            if not allow_ul:
                fail("ul(...) not allowed in a scalar polynomial")
            pos += 1
            if peek() != "(":
                fail("expected '(' after ul")
            pos += 1
            inner = total()
            if not inner[1].is_zero():
                fail("nested ul(...) is not allowed")
            if peek() != ")":
                fail("expected ')'")
            pos += 1
            return (SymExpr.const(0), MultisetExpr.ul(inner[0]))
        if env is not None:
            if re.match(r"^[a-z][a-z0-9_]*$", t):
                pos += 1
                if t not in env:
                    fail(f"unknown variable {t!r}")
                return (env[t], MultisetExpr.zero())
        elif _POLY_VAR_RE.match(t):
            pos += 1
            return (SymExpr.var(t, carrier), MultisetExpr.zero())
        fail(f"unexpected token {t!r} in polynomial")

    def power():
        nonlocal pos
        v = atom()
        while peek() == "^":
            pos += 1
            e = peek()
            if e is None or not e.isdigit():
                fail("expected an integer exponent")
            pos += 1
            if not v[1].is_zero():
                fail("cannot exponentiate a ul(...) term")
            v = (v[0] ** int(e), MultisetExpr.zero())
        return v

    def prod():
        nonlocal pos
        v = power()
        while peek() == "*":
            pos += 1
            w = power()
            if not v[1].is_zero() and not w[1].is_zero():
                fail("a product may contain at most one ul(...) factor")
            if not v[1].is_zero():
                v = (SymExpr.const(0), v[1].scale(w[0]))
            elif not w[1].is_zero():
                v = (SymExpr.const(0), w[1].scale(v[0]))
            else:
                v = (v[0] * w[0], MultisetExpr.zero())
        return v

    def total():
        nonlocal pos
        v = prod()
        while peek() == "+":
            pos += 1
            w = prod()
            v = (v[0] + w[0], v[1] + w[1])
        return v

    scalar, mset = total()
    if pos != len(toks):
        fail(f"trailing input {peek()!r} in polynomial")
    if allow_ul:
        if not mset.is_zero() and not scalar.is_zero():
            raise ParseError("multiset heat cannot carry a scalar part",
                             line, 1)
        if mset.is_zero() and not scalar.is_zero():
            raise ParseError("multiset heat must be a sum of ul(...) terms",
                             line, 1)
        return mset
    return scalar


def parse_poly_list(text, carrier, line=1, env=None):
    """Parse `(p1, p2, ...)` or `()` into a tuple of polynomials."""
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise ParseError("expected a parenthesized list", line, 1)
    inner = text[1:-1].strip()
    if not inner:
        return ()
    parts = []
    depth = 0
    cur = []
    for ch in inner:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    if parts and not parts[-1].strip():
        parts.pop()  # allow a trailing comma, as in (k + l + 1,)
    return tuple(parse_poly(p, carrier, line=line, env=env) for p in parts)


_INTERP_IDENT = re.compile(r"^[a-z][a-z0-9_]*$")


def _interp_vars(text, ln):
    names = [v.strip() for v in text.split(",")] if text.strip() else []
    for v in names:
        if not _INTERP_IDENT.match(v) or v == "ul":
            raise ParseError(f"bad variable name {v!r}", ln, 1)
    if len(set(names)) != len(names):
        raise ParseError("repeated variable name", ln, 1)
    return names


def parse_interp(text, name=None):
    """Parse an interpretation file into an Interpretation.

    Header lines `interpretation NAME`, `carrier N|N*` and
    `heat scalar|multiset`, then one line per operator giving its
    triple over named input and output variables:

        tau: cov(i, j) = (j, i); con(k, l) = (l, k); heat = i*j*ul(l) + l*ul(i+j)

    The cov variable list fixes the input arity and the con list the
    output arity; cov produces one polynomial per output, con one per
    input, and heat may use both variable sets.
    """
    header = {}
    entries = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^(interpretation|carrier|heat)\s+(\S+)$", line)
        if m and not entries:
            header[m.group(1)] = m.group(2)
            continue
        m = re.match(r"^([a-z][a-z0-9_]*)\s*:\s*(.*)$", line)
        if not m:
            raise ParseError(f"unrecognized line: {line!r}", ln, 1)
        entries.append((m.group(1), m.group(2), ln))

    carrier = header.get("carrier")
    if carrier not in _CARRIER_MIN:
        raise DataFormatError(f"missing or bad carrier: {carrier!r}")
    heat_kind = header.get("heat")
    if heat_kind not in ("scalar", "multiset"):
        raise DataFormatError(f"missing or bad heat kind: {heat_kind!r}")
    iname = name or header.get("interpretation") or "unnamed"
    table = {}
    for opname, body, ln in entries:
        if opname in table:
            raise ParseError(f"duplicate entry for {opname}", ln, 1)
        parts = [p.strip() for p in body.split(";")]
        if len(parts) != 3:
            raise ParseError(
                "entry needs cov(...), con(...) and heat separated by ';'",
                ln, 1)
        m_cov = re.match(r"^cov\s*\(([^)]*)\)\s*=\s*(.*)$", parts[0])
        m_con = re.match(r"^con\s*\(([^)]*)\)\s*=\s*(.*)$", parts[1])
        m_heat = re.match(r"^heat\s*=\s*(.*)$", parts[2])
        if not (m_cov and m_con and m_heat):
            raise ParseError(
                "entry parts must read cov(vars) = (...), "
                "con(vars) = (...), heat = ...", ln, 1)
        cov_vars = _interp_vars(m_cov.group(1), ln)
        con_vars = _interp_vars(m_con.group(1), ln)
        cov_env = {v: SymExpr.var(f"x{k + 1}", carrier)
                   for k, v in enumerate(cov_vars)}
        con_env = {v: SymExpr.var(f"y{k + 1}", carrier)
                   for k, v in enumerate(con_vars)}
        if set(cov_env) & set(con_env):
            raise ParseError(
                "a variable cannot name both an input and an output", ln, 1)
        cov = parse_poly_list(m_cov.group(2), carrier, line=ln, env=cov_env)
        con = parse_poly_list(m_con.group(2), carrier, line=ln, env=con_env)
        heat = parse_poly(m_heat.group(1), carrier,
                          allow_ul=heat_kind == "multiset", line=ln,
                          env={**cov_env, **con_env})
        n_in, n_out = len(cov_vars), len(con_vars)
        if len(cov) != n_out or len(con) != n_in:
            raise ParseError(
                f"{opname}: cov must list {n_out} value(s) and con "
                f"{n_in}, got {len(cov)} and {len(con)}", ln, 1)
        table[opname] = InterpTriple(n_in, n_out, cov, con, heat)
    return Interpretation(iname, carrier, heat_kind, table)


# -- concrete term-measure interpretation -----------------------------------


class TermMeasureInterp:
    """Concrete interpretation whose values are (term, count) pairs.

    Wires carry pairs of a first-order term and a positive integer;
    duplication charges its count against a measure of the duplicated
    term (by default 1 + the longest rewrite path, so the underlying
    system must terminate).  Heats come out as concrete Counters; use
    compare_counter to order them.  This gives pointwise evidence at
    sampled inputs rather than a symbolic certificate.
    """

    def __init__(self, trs, measure=None):
        self.trs = trs
        self._memo = {}
        if measure is None:
            from .terms import longest_path_measure
            measure = lambda t: longest_path_measure(  # noqa: E731
                trs, t, _memo=self._memo)
        self.measure = measure

    def _gen(self, op):
        from .terms import App
        measure = self.measure

        def tau(vals):
            (u, i), (v, j) = vals
            return ((v, j), (u, i)), Counter()

        def delta(vals):
            ((u, i),) = vals
            return ((u, i), (u, i)), Counter({measure(u): i})

        def epsilon(vals):
            return (), Counter()

        def apply_op(vals, name=op.name):
            terms = tuple(u for u, _ in vals)
            counts = [i for _, i in vals]
            t = App(name, terms)
            if not vals:
                return ((t, 1),), Counter()
            s = sum(counts)
            return ((t, 2 * s),), Counter({measure(t): s})

        if op.name == "tau":
            return (2, 2, tau)
        if op.name == "delta":
            return (1, 2, delta)
        if op.name == "epsilon":
            return (1, 0, epsilon)
        if op.n_out != 1:
            raise InterpError(
                f"operator {op.name} has no concrete interpretation")
        return (op.n_in, op.n_out, apply_op)

    def run(self, circuit, inputs):
        """Evaluate a circuit on (term, count) pairs; returns (outs, heat)."""
        for u, i in inputs:
            if i < 1:
                raise InterpError("counts must be positive")

        def gen(op):
            return self._gen(op)

        def identity(n):
            return (n, n, lambda vals: (tuple(vals), Counter()))

        def comp(f, g):
            fi, fo, ff = f
            gi, go, gf = g

            def h(vals):
                mid, h1 = ff(vals)
                out, h2 = gf(mid)
                return out, h1 + h2

            return (fi, go, h)

        def tens(f, g):
            fi, fo, ff = f
            gi, go, gf = g

            def h(vals):
                a, h1 = ff(vals[:fi])
                b, h2 = gf(vals[fi:])
                return a + b, h1 + h2

            return (fi + gi, fo + go, h)

        n_in, n_out, fn = fold_circuit(circuit, gen, identity, comp, tens)
        if len(inputs) != n_in:
            raise InterpError(f"circuit needs {n_in} inputs")
        return fn(tuple(inputs))

    def heat_comparison(self, rule, inputs):
        """Compare the heats of a rule's sides at one concrete input."""
        _, hl = self.run(rule.lhs, inputs)
        _, hr = self.run(rule.rhs, inputs)
        return compare_counter(hl, hr)
