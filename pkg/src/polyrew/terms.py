"""First-order terms, term families, and plain term rewriting.

Terms are built from numbered variables x1, x2, ... and operators that
each produce a single result.  A term family packages an ordered tuple
of terms over a shared variable supply x1..xn, so families compose like
circuits: `family_compose(f, g)` plugs the terms of f into the
variables of g.  Families are the target of the wire-counting readback
from circuits (`project_pi`), and finite-set semantics
(`finset_semantics`) interprets resource-management circuits as plain
functions between finite sets, which gives an independent check.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Union

from .circuits import Operator, Signature, fold_circuit
from .errors import ParseError, TermError

RESOURCE_OPS = (
    Operator("tau", 2, 2),
    Operator("delta", 1, 2),
    Operator("epsilon", 1, 0),
)
RESOURCE_NAMES = frozenset(op.name for op in RESOURCE_OPS)
_RESOURCE_NAMES = RESOURCE_NAMES
_VAR_RE = re.compile(r"^x([1-9][0-9]*)$")


@dataclass(frozen=True)
class Var:
    idx: int  # 1-based

    def __str__(self):
        return f"x{self.idx}"


@dataclass(frozen=True)
class App:
    op: str
    args: tuple

    def __str__(self):
        if not self.args:
            return self.op
        return f"{self.op}({', '.join(str(a) for a in self.args)})"


Term = Union[Var, App]


def occurrences(term):
    """Variable indices in left-to-right preorder, with repetitions."""
    if isinstance(term, Var):
        return [term.idx]
    out = []
    for a in term.args:
        out.extend(occurrences(a))
    return out


def variables(term):
    """Distinct variable indices in order of first occurrence."""
    seen = []
    for v in occurrences(term):
        if v not in seen:
            seen.append(v)
    return seen


def sharp(term):
    """Greatest variable index occurring in the term; 0 when ground."""
    return max(occurrences(term), default=0)


def substitute(term, mapping):
    """Replace each variable index through mapping (missing ones stay)."""
    if isinstance(term, Var):
        return mapping.get(term.idx, term)
    return App(term.op, tuple(substitute(a, mapping) for a in term.args))


def term_size(term):
    if isinstance(term, Var):
        return 1
    return 1 + sum(term_size(a) for a in term.args)


# -- term families -------------------------------------------------------


@dataclass(frozen=True)
class TermFamily:
    """An ordered tuple of terms over variables x1..x{n_in}."""

    n_in: int
    terms: tuple

    def __post_init__(self):
        for t in self.terms:
            for v in occurrences(t):
                if not 1 <= v <= self.n_in:
                    raise TermError(
                        f"variable x{v} outside supply x1..x{self.n_in}")

    @property
    def n_out(self):
        return len(self.terms)

    def __str__(self):
        body = ", ".join(str(t) for t in self.terms)
        return f"<{self.n_in} | {body}>"


def family_identity(n):
    return TermFamily(n, tuple(Var(i) for i in range(1, n + 1)))


def family_compose(f, g):
    """Feed the terms of f into the variables of g (f acts first)."""
    if f.n_out != g.n_in:
        raise TermError(
            f"cannot compose family {f.n_in}->{f.n_out} with "
            f"{g.n_in}->{g.n_out}")
    mapping = {i + 1: f.terms[i] for i in range(f.n_out)}
    return TermFamily(f.n_in, tuple(substitute(t, mapping) for t in g.terms))


def family_tensor(f, g):
    shift = {i + 1: Var(i + 1 + f.n_in) for i in range(g.n_in)}
    moved = tuple(substitute(t, shift) for t in g.terms)
    return TermFamily(f.n_in + g.n_in, f.terms + moved)


# -- readbacks from circuits ----------------------------------------------


def project_pi(circuit):
    """Read a circuit back as a term family, forgetting resource steps.

    Wire-management operators tau, delta, epsilon turn into variable
    shuffling, duplication and deletion; every other operator must have
    exactly one output and becomes a plain term constructor.
    """
    def gen(op):
        if op.name == "tau":
            return TermFamily(2, (Var(2), Var(1)))
        if op.name == "delta":
            return TermFamily(1, (Var(1), Var(1)))
        if op.name == "epsilon":
            return TermFamily(1, ())
        if op.n_out != 1:
            raise TermError(
                f"operator {op.name} ({op.n_in}->{op.n_out}) has no term "
                f"reading")
        return TermFamily(op.n_in,
                          (App(op.name,
                               tuple(Var(i) for i in range(1, op.n_in + 1))),))

    return fold_circuit(circuit, gen, family_identity, family_compose,
                        family_tensor)


@dataclass(frozen=True)
class FinFun:
    """A function between finite sets, as a circuit-style arrow.

    An arrow m -> n sends an m-tuple to an n-tuple by projection:
    output i copies input backmap[i].  This is the finite-set meaning of
    circuits built only from tau, delta, epsilon.
    """

    n_in: int
    n_out: int
    backmap: tuple

    def __post_init__(self):
        if len(self.backmap) != self.n_out:
            raise TermError("backmap length must equal n_out")
        for v in self.backmap:
            if not 0 <= v < self.n_in:
                raise TermError("backmap index out of range")

    def apply(self, values):
        if len(values) != self.n_in:
            raise TermError("wrong tuple length")
        return tuple(values[i] for i in self.backmap)


def finfun_identity(n):
    return FinFun(n, n, tuple(range(n)))


def finfun_compose(f, g):
    if f.n_out != g.n_in:
        raise TermError("finite function arities do not match")
    return FinFun(f.n_in, g.n_out, tuple(f.backmap[i] for i in g.backmap))


def finfun_tensor(f, g):
    moved = tuple(v + f.n_in for v in g.backmap)
    return FinFun(f.n_in + g.n_in, f.n_out + g.n_out, f.backmap + moved)


def finset_semantics(circuit):
    """Interpret a wire-management circuit as a finite-set function.

    Only tau, delta and epsilon nodes are allowed; anything else has no
    canonical finite-set meaning here and raises TermError.
    """
    def gen(op):
        if op.name == "tau":
            return FinFun(2, 2, (1, 0))
        if op.name == "delta":
            return FinFun(1, 2, (0, 0))
        if op.name == "epsilon":
            return FinFun(1, 0, ())
        raise TermError(
            f"operator {op.name} is not a wire-management operator")

    return fold_circuit(circuit, gen, finfun_identity, finfun_compose,
                        finfun_tensor)


# -- term rewriting --------------------------------------------------------


@dataclass(frozen=True)
class TrsRule:
    name: str
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise TermError(f"rule {self.name}: left side is a variable")
        lvars = set(occurrences(self.lhs))
        rvars = set(occurrences(self.rhs))
        if not rvars <= lvars:
            raise TermError(
                f"rule {self.name}: right side invents variables")

    @property
    def left_linear(self):
        occ = occurrences(self.lhs)
        return len(occ) == len(set(occ))

    def uniformized(self):
        """Rename variables to x1..xk in order of first occurrence."""
        order = variables(self.lhs)
        mapping = {v: Var(i + 1) for i, v in enumerate(order)}
        lhs = substitute(self.lhs, mapping)
        rhs = substitute(self.rhs, mapping)
        if lhs == self.lhs and rhs == self.rhs:
            return self
        return TrsRule(self.name, lhs, rhs)

    def __str__(self):
        return f"{self.name}: {self.lhs} => {self.rhs}"


def uniformize(rule):
    """Rename a rule's variables to x1..xk by first occurrence on the left."""
    return rule.uniformized()


class Trs:
    """A term rewriting system over a single-sorted algebraic signature."""

    def __init__(self, signature, rules):
        for op in signature:
            if op.n_out != 1:
                raise TermError(
                    f"operator {op.name} has {op.n_out} outputs; term "
                    f"operators must have exactly one")
        self.signature = signature
        self.rules = tuple(rules)
        names = [r.name for r in self.rules]
        if len(set(names)) != len(names):
            raise TermError("duplicate rule names")
        for r in self.rules:
            self._check_term(r.lhs)
            self._check_term(r.rhs)

    def _check_term(self, term):
        if isinstance(term, Var):
            return
        op = self.signature[term.op]
        if op.n_in != len(term.args):
            raise TermError(
                f"{term.op} used with {len(term.args)} arguments, "
                f"declared {op.n_in}")
        for a in term.args:
            self._check_term(a)

    def rule(self, name):
        for r in self.rules:
            if r.name == name:
                return r
        raise TermError(f"no rule named {name!r}")

    def uniformized(self):
        return Trs(self.signature, [r.uniformized() for r in self.rules])


def match_term(pattern, term):
    """One-way matching; returns a substitution dict or None."""
    subst = {}

    def go(p, t):
        if isinstance(p, Var):
            if p.idx in subst:
                return subst[p.idx] == t
            subst[p.idx] = t
            return True
        if isinstance(t, Var) or p.op != t.op:
            return False
        return all(go(pa, ta) for pa, ta in zip(p.args, t.args))

    return subst if go(pattern, term) else None


def subterm_at(term, path):
    for i in path:
        term = term.args[i]
    return term


def replace_at(term, path, repl):
    if not path:
        return repl
    args = list(term.args)
    args[path[0]] = replace_at(args[path[0]], path[1:], repl)
    return App(term.op, tuple(args))


def trs_step(trs, term):
    """All one-step rewrites of a term: (rule name, path, result) list.

    Results are ordered by rule declaration order, then position in
    left-outside-first order.
    """
    positions = []

    def walk(t, path):
        positions.append((path, t))
        if isinstance(t, App):
            for i, a in enumerate(t.args):
                walk(a, path + (i,))

    walk(term, ())
    out = []
    for rule in trs.rules:
        for path, sub in positions:
            s = match_term(rule.lhs, sub)
            if s is not None:
                out.append((rule.name, path,
                            replace_at(term, path, substitute(rule.rhs, s))))
    return out


def normalize_term(trs, term, fuel=10000):
    """Leftmost-outermost normalization with a step budget."""
    steps = 0
    while steps < fuel:
        nxt = trs_step(trs, term)
        if not nxt:
            return term, "normal-form", steps
        term = nxt[0][2]
        steps += 1
    return term, "fuel-exhausted", steps


def longest_path_measure(trs, term, _memo=None, _fuel=100000):
    """1 + the length of the longest rewrite sequence from the term.

    Only meaningful for terminating systems; the fuel bound guards
    against accidental non-termination and raises TermError when hit.
    """
    memo = _memo if _memo is not None else {}

    def go(t, depth):
        if depth > _fuel:
            raise TermError("longest-path measure exceeded its budget")
        if t in memo:
            return memo[t]
        best = 0
        for _, _, r in trs_step(trs, t):
            cand = 1 + go(r, depth + 1)
            if cand > best:
                best = cand
        memo[t] = best
        return best

    return 1 + go(term, 0)


def term_universe(signature, depth, n_vars):
    """All terms of nesting depth at most `depth` over x1..x{n_vars}.

    A variable has depth 0 and an application one more than its deepest
    argument, so nullary operators enter at depth 1.  The list grows
    like |U(d-1)|^k per k-ary operator; keep the bounds small.
    """
    ops = list(signature)
    universe = [Var(i) for i in range(1, n_vars + 1)]
    seen = set(universe)
    for _ in range(depth):
        layer = []
        for op in ops:
            for args in itertools.product(universe, repeat=op.n_in):
                t = App(op.name, args)
                if t not in seen:
                    seen.add(t)
                    layer.append(t)
        universe.extend(layer)
    return universe


# -- parsing ---------------------------------------------------------------


_TERM_TOKENS = re.compile(r"[a-z_][a-z0-9_]*|\d+|[(),]|=>|:|->|\S")


def parse_term(text, line=1):
    toks = [(m.group(0), line, m.start() + 1)
            for m in _TERM_TOKENS.finditer(text)]
    pos = 0

    def peek():
        return toks[pos][0] if pos < len(toks) else None

    def where():
        if pos < len(toks):
            return toks[pos][1], toks[pos][2]
        return line, len(text) + 1

    def term():
        nonlocal pos
        t = peek()
        ln, col = where()
        if t is None:
            raise ParseError("expected a term", ln, col)
        m = _VAR_RE.match(t)
        if m:
            pos += 1
            return Var(int(m.group(1)))
        if not re.match(r"^[a-z_][a-z0-9_]*$", t):
            raise ParseError(f"unexpected token {t!r} in term", ln, col)
        pos += 1
        args = []
        if peek() == "(":
            pos += 1
            if peek() != ")":
                args.append(term())
                while peek() == ",":
                    pos += 1
                    args.append(term())
            if peek() != ")":
                ln2, col2 = where()
                raise ParseError("expected ')' in term", ln2, col2)
            pos += 1
        return App(t, tuple(args))

    out = term()
    if pos != len(toks):
        ln, col = where()
        raise ParseError(f"trailing input {peek()!r} in term", ln, col)
    return out


def parse_trs(text):
    """Parse a term rewriting system file.

    Lines (comments start with '#'):
        op mu : 2 -> 1
        A: mu(mu(x1, x2), x3) => mu(x1, mu(x2, x3))
    """
    sig = Signature()
    rules = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("op "):
            m = re.match(r"^op\s+([a-z_][a-z0-9_]*)\s*:\s*(\d+)\s*->\s*(\d+)$",
                         line)
            if not m:
                raise ParseError("malformed operator line", ln, 1)
            if m.group(3) != "1":
                raise ParseError("term operators must have one output", ln, 1)
            sig.add(Operator(m.group(1), int(m.group(2)), 1))
        else:
            m = re.match(r"^([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(.*)$", line)
            if not m:
                raise ParseError(f"unrecognized line: {line!r}", ln, 1)
            body = m.group(2)
            if "=>" not in body:
                raise ParseError("rule needs '=>'", ln, 1)
            left, right = body.split("=>", 1)
            rules.append(TrsRule(m.group(1),
                                 parse_term(left.strip(), line=ln),
                                 parse_term(right.strip(), line=ln)))
    return Trs(sig, rules)


def render_trs(trs):
    lines = [f"op {op.name} : {op.n_in} -> 1" for op in trs.signature]
    lines.append("")
    lines.extend(f"{r.name}: {r.lhs} => {r.rhs}" for r in trs.rules)
    return "\n".join(lines) + "\n"
