"""Compiling term rewriting systems into circuit polygraphs.

A term over operators of shape n -> 1 becomes a circuit once variable
sharing is made explicit: every variable of the context is copied as
many times as it occurs (or erased when it does not occur), the copies
are routed to their occurrence positions with swaps, and the term tree
itself sits below as a skeleton of algebraic generators.  The resource
operators tau (swap), delta (copy) and epsilon (erase) carry their own
structural rule set; the translated system is the structural layer
plus one circuit rule per term rule.

Simulation of a term step inside the circuit world only works for
left-linear rules: the left side of a nonlinear rule needs an explicit
copy operator that instance circuits do not contain.
"""

from __future__ import annotations

from .circuits import (Signature, apply_context, compose, iter_matches,
                       generator, identity, tensor, tensor_all)
from .engine import (Polygraph, ReductionTrace, Rule, TraceStep, normalize)
from .errors import RewriteError, SimulationError, TermError
from .terms import (RESOURCE_OPS, App, Var, match_term, occurrences,
                    project_pi, replace_at, sharp, substitute)

TAU = RESOURCE_OPS[0]
DELTA = RESOURCE_OPS[1]
EPSILON = RESOURCE_OPS[2]


def build_sigma_c(signature):
    """Extend an algebraic signature with the three resource operators.

    Every operator of the input must produce exactly one output, and
    none may be named like a resource operator.
    """
    out = Signature()
    for op in RESOURCE_OPS:
        out.add(op)
    for op in signature:
        if op.n_out != 1:
            raise TermError(
                f"operator {op.name} has {op.n_out} outputs; the "
                f"translation covers single-output operators only")
        if op.name in (TAU.name, DELTA.name, EPSILON.name):
            raise TermError(
                f"operator name {op.name} collides with a resource "
                f"operator")
        out.add(op)
    return out


# -- wiring-layer builders --------------------------------------------------


def delta_comb(n):
    """Copy one wire into n, as a left-leaning comb of binary copies."""
    if n == 0:
        return generator(EPSILON)
    if n == 1:
        return identity(1)
    return compose(generator(DELTA),
                   tensor(delta_comb(n - 1), identity(1)))


def tau_n1(n):
    """Rotate the last of n+1 wires to the front.

    Defined by the recursion on n: the base case is a single wire, and
    each step swaps the rotated wire one position further up.
    """
    if n == 0:
        return identity(1)
    return compose(tensor(identity(1), tau_n1(n - 1)),
                   tensor(generator(TAU), identity(n - 1)))


def tau_1n(n):
    """Rotate the first of n+1 wires to the back (mirror of tau_n1)."""
    if n == 0:
        return identity(1)
    return compose(tensor(tau_1n(n - 1), identity(1)),
                   tensor(identity(n - 1), generator(TAU)))


def delta_n(n):
    """Duplicate a vector of n wires: outputs are the n firsts then the
    n seconds.

    Recursion: copy the first n-1 wires, copy the last wire, then
    rotate its first copy up past the second copies of the others.
    """
    if n == 0:
        return identity(0)
    return compose(tensor(delta_n(n - 1), generator(DELTA)),
                   tensor_all([identity(n - 1), tau_n1(n - 1),
                               identity(1)]))


def permutation_circuit(order):
    """A swap network sending input order[i] to output position i.

    Built by bubble sort over adjacent transpositions, so the result
    uses only the binary swap operator.
    """
    n = len(order)
    if sorted(order) != list(range(n)):
        raise TermError(f"not a permutation: {order}")
    target = [0] * n
    for i, j in enumerate(order):
        target[j] = i
    cur = list(range(n))
    circ = identity(n)
    changed = True
    while changed:
        changed = False
        for pos in range(n - 1):
            if target[cur[pos]] > target[cur[pos + 1]]:
                layer = tensor_all([identity(pos), generator(TAU),
                                    identity(n - pos - 2)])
                circ = compose(circ, layer)
                cur[pos], cur[pos + 1] = cur[pos + 1], cur[pos]
                changed = True
    return circ


# -- the structural rule set ------------------------------------------------

# delta_tau_left runs opposite to the delta_tau_right mirror: oriented
# this way both strictly shed interpretation heat (see orders), which
# the reversed orientation does not.  That asymmetry leaves two reducts
# no other rule reaches, so the last two rules absorb them: a crossing
# of the upper comb outputs, and a duplication caught between crossings.
# Without them four bounded critical pairs end in distinct normal forms.
_RDELTA_RULES = (
    ("delta_assoc", "delta ; (id(1) * delta)", "delta ; (delta * id(1))"),
    ("delta_comm", "delta ; tau", "delta"),
    ("counit_left", "delta ; (epsilon * id(1))", "id(1)"),
    ("counit_right", "delta ; (id(1) * epsilon)", "id(1)"),
    ("tau_invol", "tau ; tau", "id(2)"),
    ("yang_baxter",
     "(id(1) * tau) ; (tau * id(1)) ; (id(1) * tau)",
     "(tau * id(1)) ; (id(1) * tau) ; (tau * id(1))"),
    ("eps_tau_left", "tau ; (id(1) * epsilon)", "epsilon * id(1)"),
    ("eps_tau_right", "tau ; (epsilon * id(1))", "id(1) * epsilon"),
    ("delta_tau_left",
     "(id(1) * delta) ; (tau * id(1)) ; (id(1) * tau)",
     "tau ; (delta * id(1))"),
    ("delta_tau_right",
     "tau ; (id(1) * delta)",
     "(delta * id(1)) ; (id(1) * tau) ; (tau * id(1))"),
    ("delta_comm_comb",
     "delta ; (delta * id(1)) ; (id(1) * tau)",
     "delta ; (delta * id(1))"),
    ("delta_tau_cross",
     "tau ; (delta * id(1)) ; (id(1) * tau)",
     "(id(1) * delta) ; (tau * id(1))"),
)


def build_rdelta_sigma(signature):
    """The structural polygraph for a signature of algebraic operators.

    Twelve rules manage the resource operators among themselves; each
    algebraic operator contributes four more, letting copies, erasures
    and swaps commute past it.  Every rule is checked to preserve the
    term-family projection before it is admitted.
    """
    from .circuits import parse_circuit
    sigma_c = build_sigma_c(signature)
    rules = []
    for name, lhs, rhs in _RDELTA_RULES:
        rules.append(Rule(name, parse_circuit(lhs, sigma_c),
                          parse_circuit(rhs, sigma_c)))
    for op in signature:
        n = op.n_in
        g = generator(op)
        dup_lhs = compose(g, generator(DELTA))
        dup_rhs = compose(delta_n(n), tensor(g, g))
        rules.append(Rule(f"dup_{op.name}", dup_lhs, dup_rhs))
        erase_lhs = compose(g, generator(EPSILON))
        erase_rhs = tensor_all([generator(EPSILON)] * n) if n \
            else identity(0)
        rules.append(Rule(f"erase_{op.name}", erase_lhs, erase_rhs))
        pl_lhs = compose(tensor(g, identity(1)), generator(TAU))
        pl_rhs = compose(tau_n1(n), tensor(identity(1), g))
        rules.append(Rule(f"perm_left_{op.name}", pl_lhs, pl_rhs))
        pr_lhs = compose(tensor(identity(1), g), generator(TAU))
        pr_rhs = compose(tau_1n(n), tensor(g, identity(1)))
        rules.append(Rule(f"perm_right_{op.name}", pr_lhs, pr_rhs))
    for r in rules:
        if project_pi(r.lhs) != project_pi(r.rhs):
            raise RewriteError(
                f"structural rule {r.name} changes the term projection")
    return Polygraph(sigma_c, rules, name="structural")


# -- terms to circuits ------------------------------------------------------


def term_to_circuit(term, n_vars, signature):
    """The naive circuit of a term in a context of n_vars variables.

    Copies every context variable to its occurrence count, routes the
    copies to occurrence positions with a swap network, and stacks the
    algebraic skeleton underneath.  Result: n_vars -> 1, not reduced.
    """
    occ = occurrences(term)  # 1-based variable indices
    counts = [0] * n_vars
    for v in occ:
        if v > n_vars:
            raise TermError(
                f"term uses x{v} outside its declared context")
        counts[v - 1] += 1

    combs = [delta_comb(c) for c in counts]
    copies = tensor_all(combs) if combs else identity(0)

    # wire j in grouped order (all copies of x1, then x2, ...) must
    # exit at the position of its occurrence
    starts = []
    acc = 0
    for i in range(n_vars):
        starts.append(acc)
        acc += counts[i]
    occ_positions = {v: [] for v in range(1, n_vars + 1)}
    for pos, v in enumerate(occ):
        occ_positions[v].append(pos)
    wire_target = [None] * len(occ)
    for i in range(n_vars):
        for k in range(counts[i]):
            wire_target[starts[i] + k] = occ_positions[i + 1][k]
    order = [None] * len(occ)
    for j, t in enumerate(wire_target):
        order[t] = j
    routing = permutation_circuit(order) if occ else identity(0)

    skeleton = _skeleton(term, signature)
    return compose(compose(copies, routing), skeleton)


def _skeleton(term, signature):
    if isinstance(term, Var):
        return identity(1)
    op = signature[term.op]
    parts = [_skeleton(a, signature) for a in term.args]
    body = tensor_all(parts) if parts else identity(0)
    return compose(body, generator(op))


def phi(term, n, signature, structural=None, fuel=10000):
    """The canonical circuit of a term at context width n.

    Builds the naive circuit and reduces it to normal form under the
    structural rules.  The result projects back to the one-element
    family (term) at width n; n must cover every variable of the term.
    """
    top = sharp(term)
    if n < top:
        raise TermError(
            f"context width {n} does not cover x{top} in {term}")
    if structural is None:
        structural = build_rdelta_sigma(signature)
    raw = term_to_circuit(term, n, signature)
    tr = normalize(structural, raw, fuel=fuel, record=False)
    if tr.status != "normal-form":
        raise RewriteError(
            f"structural reduction of {term} ran out of fuel ({fuel})")
    return tr.result


# -- whole systems ----------------------------------------------------------


class TranslationResult:
    """A translated polygraph plus a record of how it was produced."""

    def __init__(self, polygraph, manifest):
        self.polygraph = polygraph
        self.manifest = manifest

    def __repr__(self):
        return f"<TranslationResult {self.polygraph!r}>"


def translate_trs(trs, normalize_sides=True, include_structural=True,
                  fuel=10000):
    """Turn a term rewriting system into a circuit polygraph.

    Each rule is uniformized (variables renumbered by first occurrence
    on the left), both sides are compiled in the context of the left
    side's variables, and, when normalize_sides is set, the compiled
    sides are reduced under the structural rules so the wiring layer is
    in normal form.  The structural rules themselves are included ahead
    of the translated ones unless include_structural is off.
    """
    structural = build_rdelta_sigma(trs.signature)
    sigma_c = structural.signature
    rules = list(structural.rules) if include_structural else []
    taken = {r.name for r in rules}
    manifest_rules = []
    if include_structural:
        resource_names = {name for name, _, _ in _RDELTA_RULES}
        for r in structural.rules:
            manifest_rules.append({
                "name": r.name,
                "provenance": "resource" if r.name in resource_names
                else "operator",
                "lhs_circuit": r.lhs.text(),
                "rhs_circuit": r.rhs.text(),
            })
    for r in trs.rules:
        if r.name in taken:
            raise RewriteError(
                f"rule name {r.name} collides with a structural rule")
        taken.add(r.name)
        u = r.uniformized()
        n_vars = sharp(u.lhs)
        lhs_c = term_to_circuit(u.lhs, n_vars, trs.signature)
        rhs_c = term_to_circuit(u.rhs, n_vars, trs.signature)
        if normalize_sides:
            for side, c in (("lhs", lhs_c), ("rhs", rhs_c)):
                tr = normalize(structural, c, fuel=fuel, record=False)
                if tr.status != "normal-form":
                    raise RewriteError(
                        f"structural normalization of {r.name} {side} "
                        f"ran out of fuel")
                if side == "lhs":
                    lhs_c = tr.result
                else:
                    rhs_c = tr.result
        rules.append(Rule(r.name, lhs_c, rhs_c))
        manifest_rules.append({
            "name": r.name,
            "provenance": "translated",
            "left_linear": r.left_linear,
            "uniformized": u.lhs != r.lhs or u.rhs != r.rhs,
            "vars": n_vars,
            "lhs_term": str(u.lhs),
            "rhs_term": str(u.rhs),
            "lhs_circuit": lhs_c.text(),
            "rhs_circuit": rhs_c.text(),
        })
    manifest = {
        "operators": {op.name: op.n_in for op in trs.signature},
        "resource_operators": [TAU.name, DELTA.name, EPSILON.name],
        "normalized_sides": bool(normalize_sides),
        "rules": manifest_rules,
    }
    return TranslationResult(
        Polygraph(sigma_c, rules, name="translated"), manifest)


# -- simulation -------------------------------------------------------------


def _rule_results(rule, term):
    """All one-step results of applying one rule anywhere in a term."""
    positions = []

    def walk(t, path):
        positions.append((path, t))
        if isinstance(t, App):
            for i, a in enumerate(t.args):
                walk(a, path + (i,))

    walk(term, ())
    out = []
    for path, sub in positions:
        s = match_term(rule.lhs, sub)
        if s is not None:
            out.append(replace_at(term, path, substitute(rule.rhs, s)))
    return out


def simulate_step(trs, alpha, before, after, n=None, structural=None,
                  fuel=10000, phi_cache=None, trace_cache=None,
                  record=True):
    """Mirror one term rewriting step inside the circuit world.

    Requires that `before` rewrites to `after` in one step of the rule
    alpha (a rule object or a rule name of trs) and that alpha is
    left-linear; its compiled left side is then a pure operator
    skeleton that can be matched inside the compiled term.  One match
    is rewritten, the wiring debris is cleared by the structural rules,
    and the run must land on the compiled `after`.

    Returns the combined reduction trace: the first step applies the
    translated rule and its result is the witness circuit; the
    remaining steps are structural.  Raises SimulationError when the
    premise fails or when no occurrence reproduces the step.

    phi_cache, when given, is a mutable mapping that memoizes compiled
    circuits across calls, keyed by (term, context width); exhaustive
    sweeps revisit the same terms constantly and save most of the work.
    trace_cache likewise memoizes the structural normalization of
    candidate witness circuits: when one term has several redexes of
    the same rule, each target gets probed against the same candidates,
    so sharing their reductions collapses a quadratic retry pattern.
    Both caches assume a fixed structural system, fuel and record flag.

    record=False skips storing intermediate circuits in the returned
    trace (lengths and the outcome are kept); exhaustive sweeps that
    only need the verdict save a lot of memory that way.
    """
    rule = trs.rule(alpha) if isinstance(alpha, str) else alpha
    if not rule.left_linear:
        raise SimulationError(
            f"rule {rule.name} is not left-linear; its compiled left "
            f"side contains an explicit copy that term instances lack")
    if not any(res == after for res in _rule_results(rule, before)):
        raise SimulationError(
            f"{before} does not rewrite to {after} by {rule.name}")
    if n is None:
        n = sharp(before)
    if n < sharp(before):
        raise SimulationError(
            f"context width {n} does not cover the variables of "
            f"{before}")
    if structural is None:
        structural = build_rdelta_sigma(trs.signature)

    def compiled(term, width):
        if phi_cache is None:
            return phi(term, width, trs.signature, structural, fuel)
        got = phi_cache.get((term, width))
        if got is None:
            got = phi_cache[(term, width)] = phi(
                term, width, trs.signature, structural, fuel)
        return got

    start = compiled(before, n)
    target = compiled(after, n)
    uni = rule.uniformized()
    k = sharp(uni.lhs)
    pattern = compiled(uni.lhs, k)
    replacement = compiled(uni.rhs, k)
    # any occurrence whose witness normalizes to the target settles the
    # question, so stream matches and stop at the first that does
    for ctx in iter_matches(pattern, start):
        witness = apply_context(ctx, replacement)
        if trace_cache is None:
            tail = normalize(structural, witness, fuel=fuel, record=record)
        else:
            tail = trace_cache.get(witness)
            if tail is None:
                tail = trace_cache[witness] = normalize(
                    structural, witness, fuel=fuel, record=record)
        if tail.status == "normal-form" and tail.result == target:
            steps = []
            if record:
                steps.append(TraceStep(rule.name,
                                       tuple(ctx.matched_nodes or ()),
                                       witness))
                steps.extend(tail.steps)
            return ReductionTrace(start, tail.result, "normal-form",
                                  "simulation", steps, 1 + tail.length)
    raise SimulationError(
        f"no occurrence of {rule.name} in the compiled {before} "
        f"reproduces the step to {after}")
