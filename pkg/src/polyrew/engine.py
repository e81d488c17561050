"""Rewriting engine for circuits: rules, strategies, critical pairs.

A polygraph bundles a signature with an ordered list of rules, each a
pair of parallel circuits.  Rewriting replaces a convex occurrence of a
left side with the corresponding right side; matching is modulo
exchange, so a rule applies wherever some layering of the host exposes
its left side.  Strategies: "leftmost" picks the first rule in
declaration order and its first match in canonical order, "random"
draws uniformly from all (rule, match) pairs, "all" returns every
one-step reduct.  Normalization is fuel-bounded and reports honestly
whether it reached a normal form or ran out of budget.

Critical pairs are found by gluing two left sides along every
compatible nonempty overlap of their nodes, completing the glued graph
to a circuit with a planar boundary, and rewriting both ways.  The
search is exhaustive up to the node bound, and the report says when
anything was skipped for size.
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass, field

from .circuits import (Circuit, Context, Operator, Signature, apply_context,
                       find_matches, leftmost_match, parse_circuit)
from .errors import CircuitError, ParseError, RewriteError


class Rule:
    """A rewriting rule: two parallel circuits, left with at least a node."""

    __slots__ = ("name", "lhs", "rhs", "_lhs_ops")

    def __init__(self, name, lhs, rhs):
        if (lhs.n_in, lhs.n_out) != (rhs.n_in, rhs.n_out):
            raise RewriteError(
                f"rule {name}: sides are {lhs.n_in}->{lhs.n_out} and "
                f"{rhs.n_in}->{rhs.n_out}")
        if not lhs.nodes:
            raise RewriteError(
                f"rule {name}: left side must contain at least one node")
        self.name = name
        self.lhs = lhs
        self.rhs = rhs
        self._lhs_ops = lhs.op_counter()

    def could_fire_in(self, host_ops):
        for k, v in self._lhs_ops.items():
            if host_ops.get(k, 0) < v:
                return False
        return True

    def __repr__(self):
        return f"<Rule {self.name}>"


class Polygraph:
    """A signature plus an ordered family of rewriting rules."""

    def __init__(self, signature, rules, name="anonymous"):
        self.signature = signature
        self.rules = tuple(rules)
        self.name = name
        seen = set()
        for r in self.rules:
            if r.name in seen:
                raise RewriteError(f"duplicate rule name {r.name}")
            seen.add(r.name)
            for side in (r.lhs, r.rhs):
                for op in side.nodes:
                    if op.name not in signature:
                        raise RewriteError(
                            f"rule {r.name} uses operator {op.name} not in "
                            f"the signature")

    def rule(self, name):
        for r in self.rules:
            if r.name == name:
                return r
        raise RewriteError(f"no rule named {name!r}")

    def __repr__(self):
        return (f"<Polygraph {self.name}: {len(self.signature)} ops, "
                f"{len(self.rules)} rules>")


@dataclass
class RewriteStep:
    rule: str
    context: Context
    result: Circuit

    def to_json(self):
        return {"rule": self.rule,
                "nodes": list(self.context.matched_nodes or ()),
                "result": self.result.text()}


def rewrite_step(poly, circuit, strategy="leftmost", rng=None):
    """One-step reducts of a circuit under a polygraph.

    Returns a list of RewriteStep: at most one for "leftmost" and
    "random", all of them for "all".  The host is canonicalized first,
    so reported node ids refer to the canonical numbering.
    """
    host = circuit.canonical()
    host_ops = host.op_counter()
    collected = []
    for rule in poly.rules:
        if not rule.could_fire_in(host_ops):
            continue
        if strategy == "leftmost":
            ctx = leftmost_match(rule.lhs, host)
            if ctx is None:
                continue
            return [RewriteStep(rule.name, ctx,
                                apply_context(ctx, rule.rhs))]
        matches = find_matches(rule.lhs, host)
        if not matches:
            continue
        collected.extend((rule, ctx) for ctx in matches)
    if not collected:
        return []
    if strategy == "random":
        if rng is None:
            rng = _random.Random(0)
        rule, ctx = rng.choice(collected)
        return [RewriteStep(rule.name, ctx, apply_context(ctx, rule.rhs))]
    if strategy == "all":
        return [RewriteStep(rule.name, ctx, apply_context(ctx, rule.rhs))
                for rule, ctx in collected]
    raise RewriteError(f"unknown strategy {strategy!r}")


@dataclass
class TraceStep:
    rule: str
    nodes: tuple
    result: Circuit


@dataclass
class ReductionTrace:
    """Outcome of a normalization run.

    status is "normal-form" when rewriting stopped because nothing
    applies, "fuel-exhausted" when the budget ran out first; result is
    the last circuit either way.  length counts steps taken even when
    the run did not record them.
    """

    start: Circuit
    result: Circuit
    status: str
    strategy: str
    steps: list = field(default_factory=list)
    length: int = 0

    def to_json(self, include_circuits=True):
        out = {
            "status": self.status,
            "strategy": self.strategy,
            "length": self.length,
            "start": self.start.text(),
            "result": self.result.text(),
        }
        if include_circuits:
            out["steps"] = [
                {"rule": s.rule, "nodes": list(s.nodes),
                 "result": s.result.text()}
                for s in self.steps]
        else:
            out["steps"] = [{"rule": s.rule, "nodes": list(s.nodes)}
                            for s in self.steps]
        return out


def normalize(poly, circuit, fuel=10000, strategy="leftmost", seed=None,
              record=True):
    """Rewrite until no rule applies or the fuel runs out."""
    if fuel < 0:
        raise RewriteError("fuel must be nonnegative")
    rng = _random.Random(seed) if strategy == "random" else None
    current = circuit
    steps = []
    taken = 0
    for _ in range(fuel):
        nxt = rewrite_step(poly, current, strategy=strategy, rng=rng)
        if not nxt:
            return ReductionTrace(circuit, current, "normal-form",
                                  strategy, steps, taken)
        step = nxt[0]
        if record:
            steps.append(TraceStep(step.rule,
                                   tuple(step.context.matched_nodes or ()),
                                   step.result))
        current = step.result
        taken += 1
    nxt = rewrite_step(poly, current, strategy=strategy, rng=rng)
    if not nxt:
        return ReductionTrace(circuit, current, "normal-form", strategy,
                              steps, taken)
    return ReductionTrace(circuit, current, "fuel-exhausted", strategy,
                          steps, taken)


# -- critical pairs ---------------------------------------------------------


@dataclass
class CriticalPair:
    rule_left: str
    rule_right: str
    source: Circuit
    left: Circuit
    right: Circuit
    overlap_size: int

    def to_json(self):
        return {
            "rules": [self.rule_left, self.rule_right],
            "source": self.source.text(),
            "left": self.left.text(),
            "right": self.right.text(),
            "overlap": self.overlap_size,
        }


@dataclass
class CriticalPairReport:
    pairs: list
    max_nodes: int
    skipped_oversize: int

    @property
    def complete_within_bound(self):
        return self.skipped_oversize == 0

    def to_json(self):
        return {
            "max_nodes": self.max_nodes,
            "skipped_oversize": self.skipped_oversize,
            "complete_within_bound": self.complete_within_bound,
            "pairs": [p.to_json() for p in self.pairs],
        }


def _overlap_maps(lhs1, lhs2):
    """Nonempty partial injections nodes(lhs2) -> nodes(lhs1), op-matched."""
    n2 = len(lhs2.nodes)
    out = []

    def walk(j2, acc):
        if j2 == n2:
            if acc:
                out.append(dict(acc))
            return
        walk(j2 + 1, acc)
        for j1 in range(len(lhs1.nodes)):
            if j1 in acc.values():
                continue
            if lhs1.nodes[j1] != lhs2.nodes[j2]:
                continue
            acc[j2] = j1
            walk(j2 + 1, acc)
            del acc[j2]

    walk(0, {})
    return out


def _glue(lhs1, lhs2, shared):
    """Union of the two patterns along shared nodes, or None on conflict.

    Returns (nodes, in_src, out_tgt) where in_src[(j, p)] is the feeding
    node port or None when open, and out_tgt likewise for outputs.
    """
    n1 = len(lhs1.nodes)
    glued2 = {}
    nodes = list(lhs1.nodes)
    for j2 in range(len(lhs2.nodes)):
        if j2 in shared:
            glued2[j2] = shared[j2]
        else:
            glued2[j2] = len(nodes)
            nodes.append(lhs2.nodes[j2])

    in_src = {}
    out_tgt = {}
    for j, op in enumerate(nodes):
        for p in range(op.n_in):
            in_src[(j, p)] = None
        for q in range(op.n_out):
            out_tgt[(j, q)] = None

    def add_wire(src, tgt):
        if in_src[tgt] not in (None, src) or out_tgt[src] not in (None, tgt):
            return False
        in_src[tgt] = src
        out_tgt[src] = tgt
        return True

    srcs1, _ = lhs1.sources()
    for j in range(n1):
        for p, s in enumerate(srcs1[j]):
            if s[0] == "node":
                if not add_wire((s[1], s[2]), (j, p)):
                    return None
    srcs2, _ = lhs2.sources()
    for j2 in range(len(lhs2.nodes)):
        for p, s in enumerate(srcs2[j2]):
            if s[0] == "node":
                if not add_wire((glued2[s[1]], s[2]), (glued2[j2], p)):
                    return None
    return nodes, in_src, out_tgt


def _assemble(nodes, in_src, out_tgt):
    """Complete a glued graph to a circuit by choosing boundary orders.

    Searches for a firing schedule in which every node's wired inputs
    sit adjacent on the frontier; open input wires are slotted in at
    firing time and their left-to-right order is read off a master
    order that all frontier insertions respect.  Returns a Circuit or
    None when no planar completion exists.
    """
    n = len(nodes)
    bound_ins = {}
    for j, op in enumerate(nodes):
        bound_ins[j] = tuple(("n",) + in_src[(j, p)]
                             for p in range(op.n_in)
                             if in_src[(j, p)] is not None)

    seen = set()
    schedule = []

    def walk(frontier, fired):
        if len(fired) == n:
            return True
        state = (frozenset(fired), frontier)
        if state in seen:
            return False
        seen.add(state)
        for j in range(n):
            if j in fired:
                continue
            src_ok = all(in_src[(j, p)] is None
                         or in_src[(j, p)][0] in fired
                         for p in range(nodes[j].n_in))
            if not src_ok:
                continue
            ins = bound_ins[j]
            positions = []
            if ins:
                try:
                    i = frontier.index(ins[0])
                except ValueError:
                    continue
                if frontier[i:i + len(ins)] == ins:
                    positions = [i]
            else:
                positions = list(range(len(frontier) + 1))
            for i in positions:
                outs = tuple(("n", j, q) for q in range(nodes[j].n_out))
                new = frontier[:i] + outs + frontier[i + len(ins):]
                schedule.append((j, i))
                if walk(new, fired | {j}):
                    return True
                schedule.pop()
        return False

    if not walk((), frozenset()):
        return None

    # Replay the schedule, maintaining a master token order that every
    # frontier snapshot is a subsequence of.  Consumed tokens stay in
    # the master list as ghosts, and every token remembers the span of
    # the cone that produced it (span_l .. the token itself), so later
    # wires from the boundary are threaded outside whole cones rather
    # than merely next to a single wire.  Free input wires are slotted
    # in when their node fires; the input interface order is read back
    # from the master list at the end.
    master = []
    frontier = []
    free_tokens = set()
    span_l = {}
    for j, i in schedule:
        op = nodes[j]
        ins = bound_ins[j]
        if ins:
            assert tuple(frontier[i:i + len(ins)]) == ins
        block = []
        for p in range(op.n_in):
            s = in_src[(j, p)]
            if s is None:
                tok = ("free", j, p)
                free_tokens.add(tok)
                block.append(tok)
            else:
                block.append(("n",) + s)
        # weave free tokens into master: a run before a bound member
        # goes just left of that member's whole cone, later runs just
        # right of the preceding bound member; with no bound members at
        # all the run sits between the neighbouring frontier cones
        if ins:
            insert_at = master.index(span_l[ins[0]])
        elif i < len(frontier):
            insert_at = master.index(span_l[frontier[i]])
        elif frontier:
            insert_at = master.index(frontier[-1]) + 1
        else:
            insert_at = len(master)
        pending = insert_at
        for tok in block:
            if tok[0] == "free":
                master.insert(pending, tok)
                span_l[tok] = tok
                pending += 1
            else:
                pending = master.index(tok) + 1
        outs = [("n", j, q) for q in range(op.n_out)]
        master[pending:pending] = outs
        cone_left = span_l[block[0]] if block else outs[0]
        for k, tok in enumerate(outs):
            span_l[tok] = cone_left if k == 0 else tok
        frontier[i:i + len(ins)] = outs

    out_tokens = list(frontier)
    n_in = len(free_tokens)
    n_out = len(out_tokens)

    inputs = []
    for tok in master:
        if tok in free_tokens:
            inputs.append(("node", tok[1], tok[2]))
    node_out = []
    for j, op in enumerate(nodes):
        row = []
        for q in range(op.n_out):
            t = out_tgt[(j, q)]
            if t is not None:
                row.append(("node", t[0], t[1]))
            else:
                row.append(("out", out_tokens.index(("n", j, q))))
        node_out.append(tuple(row))
    try:
        circ = Circuit(n_in, n_out, tuple(nodes), tuple(inputs),
                       tuple(node_out))
    except CircuitError:
        return None
    if circ._schedule() is None:
        return None
    return circ


def critical_pairs(poly, max_nodes=8):
    """All critical overlaps between rule left sides, up to a size bound.

    Pairs whose glued source would exceed max_nodes are counted as
    skipped; identity self-overlaps are excluded.  Sources are
    completed to circuits with a canonical boundary choice.
    """
    pairs = []
    seen = set()
    skipped = 0
    rules = poly.rules
    for i1, r1 in enumerate(rules):
        for i2 in range(i1, len(rules)):
            r2 = rules[i2]
            for shared in _overlap_maps(r1.lhs, r2.lhs):
                if i1 == i2 and all(k == v for k, v in shared.items()) \
                        and len(shared) == len(r1.lhs.nodes):
                    continue
                glued = _glue(r1.lhs, r2.lhs, shared)
                if glued is None:
                    continue
                nodes, in_src, out_tgt = glued
                if len(nodes) > max_nodes:
                    skipped += 1
                    continue
                source = _assemble(nodes, in_src, out_tgt)
                if source is None:
                    continue
                image1 = frozenset(range(len(r1.lhs.nodes)))
                glued2 = {}
                k = len(r1.lhs.nodes)
                for j2 in range(len(r2.lhs.nodes)):
                    if j2 in shared:
                        glued2[j2] = shared[j2]
                    else:
                        glued2[j2] = k
                        k += 1
                image2 = frozenset(glued2.values())
                ctx1 = _match_with_image(r1.lhs, source, image1)
                ctx2 = _match_with_image(r2.lhs, source, image2)
                if ctx1 is None or ctx2 is None:
                    continue
                left = apply_context(ctx1, r1.rhs)
                right = apply_context(ctx2, r2.rhs)
                key = (r1.name, r2.name, source.key,
                       tuple(sorted((left.key, right.key))))
                if key in seen:
                    continue
                seen.add(key)
                pairs.append(CriticalPair(r1.name, r2.name, source, left,
                                          right, len(shared)))
    return CriticalPairReport(pairs, max_nodes, skipped)


def _match_with_image(pattern, host, image):
    """A context for pattern in host whose matched nodes are exactly image.

    Node ids refer to the host as constructed; they are translated
    through the canonical renumbering that find_matches works in.
    """
    order = host.canonical_map()
    want = frozenset(order[j] for j in image)
    for ctx in find_matches(pattern, host.canonical()):
        if frozenset(ctx.matched_nodes) == want:
            return ctx
    return None


@dataclass
class JoinResult:
    pair: CriticalPair
    verdict: str  # "joined" | "distinct-normal-forms" | "undecided"
    left_trace: ReductionTrace
    right_trace: ReductionTrace
    meet: Circuit = None

    def to_json(self):
        return {
            "rules": [self.pair.rule_left, self.pair.rule_right],
            "source": self.pair.source.text(),
            "verdict": self.verdict,
            "left_status": self.left_trace.status,
            "right_status": self.right_trace.status,
            "left_length": self.left_trace.length,
            "right_length": self.right_trace.length,
            "meet": self.meet.text() if self.meet is not None else None,
        }


def check_joinability(poly, pair, fuel=200, probe_seeds=(0, 1, 2)):
    """Try to join both reducts of a critical pair.

    Leftmost normalization first; when that leaves distinct normal
    forms, a few seeded random strategies probe for a common reduct
    before giving up.  Verdicts stay honest: "undecided" means fuel ran
    out somewhere, not that the pair is unjoinable.
    """
    lt = normalize(poly, pair.left, fuel=fuel, record=False)
    rt = normalize(poly, pair.right, fuel=fuel, record=False)
    if lt.status == "normal-form" and rt.status == "normal-form":
        if lt.result == rt.result:
            return JoinResult(pair, "joined", lt, rt, lt.result)
    lefts = {lt.result: lt} if lt.status == "normal-form" else {}
    rights = {rt.result: rt} if rt.status == "normal-form" else {}
    for seed in probe_seeds:
        l2 = normalize(poly, pair.left, fuel=fuel, strategy="random",
                       seed=seed, record=False)
        r2 = normalize(poly, pair.right, fuel=fuel, strategy="random",
                       seed=seed, record=False)
        if l2.status == "normal-form":
            lefts[l2.result] = l2
        if r2.status == "normal-form":
            rights[r2.result] = r2
        common = set(lefts) & set(rights)
        if common:
            c = common.pop()
            return JoinResult(pair, "joined", lefts[c], rights[c], c)
    if lt.status == "normal-form" and rt.status == "normal-form" \
            and not (set(lefts) & set(rights)):
        return JoinResult(pair, "distinct-normal-forms", lt, rt)
    return JoinResult(pair, "undecided", lt, rt)


def check_local_confluence(poly, max_nodes=8, fuel=200, probe_seeds=(0, 1, 2)):
    """Critical pairs plus joinability verdicts, bundled for reporting."""
    report = critical_pairs(poly, max_nodes=max_nodes)
    joins = [check_joinability(poly, p, fuel=fuel, probe_seeds=probe_seeds)
             for p in report.pairs]
    return report, joins


# -- polygraph files --------------------------------------------------------


def parse_polygraph(text, name="anonymous"):
    """Parse a polygraph file: a signature block then a rules block.

    Format (comments with '#'):

        signature
          mu : 2 -> 1
        rules
          assoc : (mu * id(1)) ; mu => (id(1) * mu) ; mu
    """
    import re as _re
    sig = Signature()
    rules = []
    section = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "signature":
            section = "signature"
            continue
        if line == "rules":
            section = "rules"
            continue
        if section == "signature":
            m = _re.match(
                r"^([a-z][a-z0-9_]*)\s*:\s*(\d+)\s*->\s*(\d+)$", line)
            if not m:
                raise ParseError("malformed signature entry", ln, 1)
            sig.add(Operator(m.group(1), int(m.group(2)), int(m.group(3))))
        elif section == "rules":
            m = _re.match(r"^([a-zA-Z][a-zA-Z0-9_]*)\s*:\s*(.*)$", line)
            if not m or "=>" not in m.group(2):
                raise ParseError("malformed rule entry", ln, 1)
            lhs_text, rhs_text = m.group(2).split("=>", 1)
            lhs = parse_circuit(lhs_text.strip(), sig)
            rhs = parse_circuit(rhs_text.strip(), sig)
            rules.append(Rule(m.group(1), lhs, rhs))
        else:
            raise ParseError("expected 'signature' or 'rules' header", ln, 1)
    return Polygraph(sig, rules, name=name)


def render_polygraph(poly):
    lines = ["signature"]
    for op in poly.signature:
        lines.append(f"  {op.name} : {op.n_in} -> {op.n_out}")
    lines.append("")
    lines.append("rules")
    for r in poly.rules:
        lines.append(f"  {r.name} : {r.lhs.text()} => {r.rhs.text()}")
    return "\n".join(lines) + "\n"
