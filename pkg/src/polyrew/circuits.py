"""Circuits: anchored wiring diagrams built from composition and tensor.

A circuit is an immutable directed port graph with an ordered input
boundary and an ordered output boundary.  Every node is labelled with an
operator that fixes how many input and output ports it has, and every
wire connects one source port (a circuit input or a node output) to one
target port (a circuit output or a node input).  There is no implicit
crossing: a diagram that swaps two wires must contain an explicit node
that does the swapping.

Two circuits count as equal when their port graphs are isomorphic by an
isomorphism that fixes both boundaries pointwise and preserves the port
order at every node.  This is decided through a canonical form, cached
on each instance, so circuits can be hashed and put in sets.

The module also provides convex subcircuit matching (`find_matches`),
context plugging (`apply_context`), a parser and printer for a small
textual syntax (`f ; g` composes top to bottom, `*` tensors side by
side, `id(n)` is an identity bundle), and conversion of a circuit back
into a sequence of one-node layers (`Circuit.expression`).
"""

from __future__ import annotations

import re
from collections import Counter, deque
from typing import Callable, NamedTuple

from .errors import CircuitError, ParseError

HOLE_NAME = "__hole__"

_NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")
_RESERVED_NAMES = frozenset({"id"})


class Operator(NamedTuple):
    """An operator declaration: a name plus input and output arities."""

    name: str
    n_in: int
    n_out: int

    def __str__(self):
        return f"{self.name} : {self.n_in} -> {self.n_out}"


class Signature:
    """An ordered collection of distinct operator declarations."""

    def __init__(self, operators=()):
        self._ops: dict[str, Operator] = {}
        for op in operators:
            self.add(op)

    def add(self, op):
        op = Operator(*op)
        if not _NAME_RE.match(op.name):
            raise CircuitError(f"invalid operator name {op.name!r}")
        if op.name in _RESERVED_NAMES:
            raise CircuitError(f"operator name {op.name!r} is reserved")
        if op.name in self._ops:
            raise CircuitError(f"duplicate operator {op.name!r}")
        if op.n_in < 0 or op.n_out < 0:
            raise CircuitError(f"negative arity for operator {op.name!r}")
        self._ops[op.name] = op
        return op

    def __contains__(self, name):
        return name in self._ops

    def __getitem__(self, name):
        try:
            return self._ops[name]
        except KeyError:
            raise CircuitError(f"unknown operator {name!r}") from None

    def __iter__(self):
        return iter(self._ops.values())

    def __len__(self):
        return len(self._ops)

    def __eq__(self, other):
        if not isinstance(other, Signature):
            return NotImplemented
        return tuple(self._ops.values()) == tuple(other._ops.values())

    def names(self):
        return tuple(self._ops)

    def merged(self, other):
        """New signature with the operators of both; names must not clash."""
        out = Signature(self)
        for op in other:
            out.add(op)
        return out

    def __repr__(self):
        return f"Signature({list(self._ops.values())!r})"


# Wire endpoints.  A source is ("in", k) or ("node", j, q); a target is
# ("out", q) or ("node", j, p).  Indices are 0-based.


class Circuit:
    """Immutable circuit.  Build with identity/generator/compose/tensor.

    Attributes:
        n_in, n_out: boundary arities.
        nodes: tuple of Operator, one per node.
        inputs: tuple of targets, one per circuit input.
        node_out: per node, tuple of targets, one per output port.
    """

    __slots__ = ("n_in", "n_out", "nodes", "inputs", "node_out",
                 "_srcs", "_canon", "_sched", "_ops_counter")

    def __init__(self, n_in, n_out, nodes, inputs, node_out, _check=True):
        self.n_in = n_in
        self.n_out = n_out
        self.nodes = tuple(Operator(*op) for op in nodes)
        self.inputs = tuple(tuple(t) for t in inputs)
        self.node_out = tuple(tuple(tuple(t) for t in outs)
                              for outs in node_out)
        self._srcs = None
        self._canon = None
        self._sched = None
        self._ops_counter = None
        if _check:
            self._validate()

    # -- construction -------------------------------------------------

    @staticmethod
    def identity(n):
        if n < 0:
            raise CircuitError("identity arity must be >= 0")
        return Circuit(n, n, (), tuple(("out", k) for k in range(n)), (),
                       _check=False)

    @staticmethod
    def generator(op):
        op = Operator(*op)
        inputs = tuple(("node", 0, p) for p in range(op.n_in))
        outs = (tuple(("out", q) for q in range(op.n_out)),)
        return Circuit(op.n_in, op.n_out, (op,), inputs, outs, _check=False)

    # -- validation ----------------------------------------------------

    def _validate(self):
        if self.n_in < 0 or self.n_out < 0:
            raise CircuitError("negative boundary arity")
        if len(self.inputs) != self.n_in:
            raise CircuitError("inputs length does not match n_in")
        if len(self.node_out) != len(self.nodes):
            raise CircuitError("node_out length does not match nodes")
        for j, op in enumerate(self.nodes):
            if len(self.node_out[j]) != op.n_out:
                raise CircuitError(
                    f"node {j} ({op.name}) has wrong output count")
        seen = set()
        n_nodes = len(self.nodes)

        def check_target(t):
            if t[0] == "out":
                if not 0 <= t[1] < self.n_out:
                    raise CircuitError(f"target {t} out of range")
            elif t[0] == "node":
                _, j, p = t
                if not (0 <= j < n_nodes and 0 <= p < self.nodes[j].n_in):
                    raise CircuitError(f"target {t} out of range")
            else:
                raise CircuitError(f"bad target {t}")
            if t in seen:
                raise CircuitError(f"target {t} wired twice")
            seen.add(t)

        for t in self.inputs:
            check_target(t)
        for outs in self.node_out:
            for t in outs:
                check_target(t)
        want = self.n_out + sum(op.n_in for op in self.nodes)
        if len(seen) != want:
            raise CircuitError("some ports are left unwired")
        self._check_acyclic()
        if not self.nodes:
            for k, t in enumerate(self.inputs):
                if t != ("out", k):
                    raise CircuitError(
                        "node-free circuit must be an identity wiring")

    def _check_acyclic(self):
        n = len(self.nodes)
        indeg = [0] * n
        adj = [[] for _ in range(n)]
        for j in range(n):
            for t in self.node_out[j]:
                if t[0] == "node":
                    adj[j].append(t[1])
                    indeg[t[1]] += 1
        ready = deque(j for j in range(n) if indeg[j] == 0)
        done = 0
        while ready:
            j = ready.popleft()
            done += 1
            for k in adj[j]:
                indeg[k] -= 1
                if indeg[k] == 0:
                    ready.append(k)
        if done != n:
            raise CircuitError("circuit contains a cycle")

    # -- reverse wiring ------------------------------------------------

    def sources(self):
        """Map from every target port to the source port feeding it.

        Returns (in_src, out_src): in_src[j][p] is the source of node
        j's input port p, out_src[q] is the source of circuit output q.
        """
        if self._srcs is None:
            in_src = [[None] * op.n_in for op in self.nodes]
            out_src = [None] * self.n_out

            def put(t, s):
                if t[0] == "out":
                    out_src[t[1]] = s
                else:
                    in_src[t[1]][t[2]] = s

            for k, t in enumerate(self.inputs):
                put(t, ("in", k))
            for j, outs in enumerate(self.node_out):
                for q, t in enumerate(outs):
                    put(t, ("node", j, q))
            self._srcs = (tuple(tuple(row) for row in in_src),
                          tuple(out_src))
        return self._srcs

    def wires(self):
        """All wires as (source, target) pairs, in target order."""
        in_src, out_src = self.sources()
        out = []
        for j, row in enumerate(in_src):
            for p, s in enumerate(row):
                out.append((s, ("node", j, p)))
        for q, s in enumerate(out_src):
            out.append((s, ("out", q)))
        return out

    def op_counter(self):
        if self._ops_counter is None:
            self._ops_counter = Counter(op.name for op in self.nodes)
        return self._ops_counter

    # -- canonical form ------------------------------------------------

    def _canonicalize(self):
        in_src, out_src = self.sources()
        n = len(self.nodes)
        num = {}
        order = []
        queue = deque()

        def touch(j):
            if j not in num:
                num[j] = len(order)
                order.append(j)
                queue.append(j)

        def drain():
            while queue:
                j = queue.popleft()
                for s in in_src[j]:
                    if s[0] == "node":
                        touch(s[1])
                for t in self.node_out[j]:
                    if t[0] == "node":
                        touch(t[1])

        for t in self.inputs:
            if t[0] == "node":
                touch(t[1])
        drain()
        for s in out_src:
            if s[0] == "node":
                touch(s[1])
        drain()

        if len(order) < n:
            # Leftover nodes sit in floating components with no boundary
            # wires.  Components of that kind commute past everything, so
            # order them by their own minimal encoding.
            comps = self._floating_components(set(num))
            encoded = []
            for comp in comps:
                best = None
                for seed in comp:
                    local = self._component_order(seed, comp, in_src)
                    enc = self._encode_component(local, in_src)
                    if best is None or enc < best[0]:
                        best = (enc, local)
                encoded.append(best)
            encoded.sort(key=lambda pair: pair[0])
            for _, local in encoded:
                for j in local:
                    num[j] = len(order)
                    order.append(j)

        perm = num

        def map_target(t):
            if t[0] == "out":
                return t
            return ("node", perm[t[1]], t[2])

        nodes = tuple(self.nodes[j] for j in order)
        inputs = tuple(map_target(t) for t in self.inputs)
        node_out = tuple(tuple(map_target(t) for t in self.node_out[j])
                         for j in order)
        key = (self.n_in, self.n_out, nodes, inputs, node_out)
        canon = Circuit(self.n_in, self.n_out, nodes, inputs, node_out,
                        _check=False)
        canon._canon = (key, canon, {i: i for i in range(n)})
        self._canon = (key, canon, dict(perm))

    def _floating_components(self, numbered):
        n = len(self.nodes)
        in_src, _ = self.sources()
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        for j in range(n):
            for s in in_src[j]:
                if s[0] == "node":
                    union(j, s[1])
        groups = {}
        for j in range(n):
            if j in numbered:
                continue
            groups.setdefault(find(j), []).append(j)
        return [sorted(g) for g in sorted(groups.values())]

    def _component_order(self, seed, comp, in_src):
        compset = set(comp)
        num = {}
        local = []
        queue = deque()

        def touch(j):
            if j not in num and j in compset:
                num[j] = len(local)
                local.append(j)
                queue.append(j)

        touch(seed)
        while queue:
            j = queue.popleft()
            for s in in_src[j]:
                if s[0] == "node":
                    touch(s[1])
            for t in self.node_out[j]:
                if t[0] == "node":
                    touch(t[1])
        return local

    def _encode_component(self, local, in_src):
        pos = {j: i for i, j in enumerate(local)}
        rows = []
        for j in local:
            srcs = tuple((pos[s[1]], s[2]) for s in in_src[j])
            tgts = tuple((pos[t[1]], t[2]) for t in self.node_out[j])
            rows.append((self.nodes[j], srcs, tgts))
        return tuple(rows)

    @property
    def key(self):
        """Canonical encoding; equal exactly for exchange-equal circuits."""
        if self._canon is None:
            self._canonicalize()
        return self._canon[0]

    def canonical(self):
        """The same circuit with nodes renumbered into canonical order."""
        if self._canon is None:
            self._canonicalize()
        return self._canon[1]

    def canonical_map(self):
        """Node renumbering applied by canonical(): old id -> new id."""
        if self._canon is None:
            self._canonicalize()
        return dict(self._canon[2])

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        names = ",".join(op.name for op in self.nodes)
        return f"<Circuit {self.n_in}->{self.n_out} [{names}]>"

    # -- scheduling and expressions -------------------------------------

    def _schedule(self):
        """Firing order as (node, frontier position) pairs, or None.

        A schedule exists exactly when the circuit can be written as a
        vertical stack of layers each holding a single node between
        identity wires.  Every circuit made by compose/tensor has one.
        """
        if self._sched is not None:
            return list(self._sched) if self._sched is not False else None
        in_src, out_src = self.sources()
        n = len(self.nodes)
        node_ins = [tuple(in_src[j]) for j in range(n)]
        final = tuple(out_src)
        start = tuple(("in", k) for k in range(self.n_in))
        seen = set()
        plan = []

        def fireable(frontier, fired):
            moves = []
            zeros = []
            for j in range(n):
                if fired & (1 << j):
                    continue
                ins = node_ins[j]
                if ins:
                    try:
                        i = frontier.index(ins[0])
                    except ValueError:
                        continue
                    if frontier[i:i + len(ins)] == ins:
                        moves.append((i, j))
                else:
                    zeros.append(j)
            moves.sort()
            out = [(j, i) for i, j in moves]
            for j in zeros:
                for i in range(len(frontier) + 1):
                    out.append((j, i))
            return out

        def walk(frontier, fired):
            if fired == (1 << n) - 1:
                return frontier == final
            state = (fired, frontier)
            if state in seen:
                return False
            seen.add(state)
            for j, i in fireable(frontier, fired):
                k = self.nodes[j].n_in
                new = (frontier[:i]
                       + tuple(("node", j, q)
                               for q in range(self.nodes[j].n_out))
                       + frontier[i + k:])
                plan.append((j, i))
                if walk(new, fired | (1 << j)):
                    return True
                plan.pop()
            return False

        if n == 0:
            ok = start == final
            self._sched = tuple(plan) if ok else False
            return list(plan) if ok else None
        if walk(start, 0):
            self._sched = tuple(plan)
            return list(plan)
        self._sched = False
        return None

    def expression(self):
        """Nested expression tree for this circuit.

        Nodes are ("id", n), ("gen", Operator), ("seq", parts) and
        ("par", parts).  Raises CircuitError when the circuit cannot be
        laid out as planar layers (possible only for hand-built wirings).
        """
        plan = self._schedule()
        if plan is None:
            raise CircuitError("circuit admits no layered expression")
        width = self.n_in
        slices = []
        for j, i in plan:
            op = self.nodes[j]
            parts = []
            if i:
                parts.append(("id", i))
            parts.append(("gen", op))
            rest = width - i - op.n_in
            if rest:
                parts.append(("id", rest))
            slices.append(parts[0] if len(parts) == 1 else
                          ("par", tuple(parts)))
            width += op.n_out - op.n_in
        if not slices:
            return ("id", self.n_in)
        if len(slices) == 1:
            return slices[0]
        return ("seq", tuple(slices))

    def text(self):
        """Parsable textual form of this circuit."""
        return render_expression(self.expression())

    def layer_lines(self):
        """One text line per layer, top to bottom, for terminal display."""
        expr = self.canonical().expression()
        parts = expr[1] if expr[0] == "seq" else (expr,)
        return [render_expression(p, top=True) for p in parts]


def fold_expression(expr, gen, identity, compose, tensor):
    """Evaluate an expression tree with the given interpretations.

    gen(op) and identity(n) produce values; compose(a, b) stacks a above
    b; tensor(a, b) puts a to the left of b.
    """
    kind = expr[0]
    if kind == "id":
        return identity(expr[1])
    if kind == "gen":
        return gen(expr[1])
    parts = [fold_expression(p, gen, identity, compose, tensor)
             for p in expr[1]]
    acc = parts[0]
    join = compose if kind == "seq" else tensor
    for p in parts[1:]:
        acc = join(acc, p)
    return acc


def fold_circuit(circuit, gen, identity, compose, tensor):
    return fold_expression(circuit.expression(), gen, identity, compose,
                           tensor)


def render_expression(expr, top=True):
    kind = expr[0]
    if kind == "id":
        return f"id({expr[1]})"
    if kind == "gen":
        return expr[1].name
    if kind == "par":
        # composition nested under a tensor needs parentheses
        bits = [render_expression(p, top=False) if p[0] != "seq"
                else "(" + render_expression(p, top=False) + ")"
                for p in expr[1]]
        return " * ".join(bits)
    bits = [render_expression(p, top=False) if p[0] != "seq"
            else "(" + render_expression(p, top=False) + ")"
            for p in expr[1]]
    return " ; ".join(bits)


def compose(f, g):
    """f followed by g: the outputs of f feed the inputs of g in order."""
    if f.n_out != g.n_in:
        raise CircuitError(
            f"cannot compose {f.n_in}->{f.n_out} with {g.n_in}->{g.n_out}")
    off = len(f.nodes)

    def map_g(t):
        return ("node", t[1] + off, t[2]) if t[0] == "node" else t

    g_inputs = tuple(map_g(t) for t in g.inputs)

    def map_f(t):
        return g_inputs[t[1]] if t[0] == "out" else t

    inputs = tuple(map_f(t) for t in f.inputs)
    node_out = (tuple(tuple(map_f(t) for t in outs) for outs in f.node_out)
                + tuple(tuple(map_g(t) for t in outs)
                        for outs in g.node_out))
    return Circuit(f.n_in, g.n_out, f.nodes + g.nodes, inputs, node_out,
                   _check=False)


def tensor(f, g):
    """f beside g: f keeps its wires, g's boundary indices are shifted."""
    off = len(f.nodes)

    def map_g(t):
        if t[0] == "out":
            return ("out", t[1] + f.n_out)
        return ("node", t[1] + off, t[2])

    inputs = f.inputs + tuple(map_g(t) for t in g.inputs)
    node_out = (f.node_out
                + tuple(tuple(map_g(t) for t in outs)
                        for outs in g.node_out))
    return Circuit(f.n_in + g.n_in, f.n_out + g.n_out, f.nodes + g.nodes,
                   inputs, node_out, _check=False)


def identity(n):
    return Circuit.identity(n)


def generator(op):
    return Circuit.generator(op)


def tensor_all(circuits, unit_arity=0):
    acc = Circuit.identity(unit_arity)
    first = True
    for c in circuits:
        acc = c if first else tensor(acc, c)
        first = False
    return acc


def dualize_circuit(circuit, op_map):
    """Flip a circuit upside down, renaming ops through op_map.

    op_map sends each operator name to the name of its mirror operator;
    a node with m inputs and n outputs becomes one with n inputs and m
    outputs, ports kept in order.  Inputs and outputs trade places.
    """
    n = len(circuit.nodes)
    in_src, out_src = circuit.sources()
    nodes = []
    for op in circuit.nodes:
        name = op_map[op.name]
        nodes.append(Operator(name, op.n_out, op.n_in))

    def flip_source(s):
        # a source in the original becomes a target in the dual
        if s[0] == "in":
            return ("out", s[1])
        return ("node", s[1], s[2])

    inputs = [None] * circuit.n_out
    node_out = [[None] * op.n_out for op in nodes]

    def put(src_old_target, t):
        # src_old_target: the original target whose dual port now emits t
        if src_old_target[0] == "out":
            inputs[src_old_target[1]] = t
        else:
            node_out[src_old_target[1]][src_old_target[2]] = t

    for j in range(n):
        for p, s in enumerate(in_src[j]):
            put(("node", j, p), flip_source(s))
    for q, s in enumerate(out_src):
        put(("out", q), flip_source(s))
    return Circuit(circuit.n_out, circuit.n_in, tuple(nodes),
                   tuple(inputs),
                   tuple(tuple(row) for row in node_out))


# -- contexts and matching ----------------------------------------------


class Context:
    """A circuit with one hole node, ready to receive a filler.

    The hole is an ordinary node labelled with the reserved operator
    name "__hole__"; its arities record the boundary of the subcircuit
    that was cut out.  A context never wires the hole to itself, so any
    filler with matching arities can be plugged in without creating a
    cycle.
    """

    __slots__ = ("circuit", "hole", "matched_nodes")

    def __init__(self, circuit, matched_nodes=None, _check=True):
        holes = [j for j, op in enumerate(circuit.nodes)
                 if op.name == HOLE_NAME]
        if len(holes) != 1:
            raise CircuitError("context must contain exactly one hole")
        self.circuit = circuit
        self.hole = holes[0]
        self.matched_nodes = matched_nodes
        if _check:
            h = self.hole
            for t in circuit.node_out[h]:
                if t[0] == "node" and t[1] == h:
                    raise CircuitError("context wires its hole to itself")
            if circuit._schedule() is None:
                raise CircuitError("context is not a layered circuit")

    @property
    def hole_arity(self):
        op = self.circuit.nodes[self.hole]
        return (op.n_in, op.n_out)

    def key(self):
        return self.circuit.key

    def __eq__(self, other):
        if not isinstance(other, Context):
            return NotImplemented
        return self.circuit == other.circuit

    def __hash__(self):
        return hash(self.circuit)

    def __repr__(self):
        m, n = self.hole_arity
        return f"<Context hole {m}->{n} in {self.circuit!r}>"


def apply_context(context, filler):
    """Plug a circuit into a context's hole and return the result."""
    ctx = context.circuit
    h = context.hole
    m, n = context.hole_arity
    if (filler.n_in, filler.n_out) != (m, n):
        raise CircuitError(
            f"filler is {filler.n_in}->{filler.n_out}, hole needs {m}->{n}")
    keep = [j for j in range(len(ctx.nodes)) if j != h]
    ctx_new = {j: i for i, j in enumerate(keep)}
    off = len(keep)

    def map_filler(t):
        """Resolve a filler target to a target of the result."""
        if t[0] == "node":
            return ("node", t[1] + off, t[2])
        return map_ctx(ctx.node_out[h][t[1]])

    def map_ctx(t):
        """Resolve a context target to a target of the result."""
        if t[0] == "out":
            return t
        if t[1] == h:
            return map_filler(filler.inputs[t[2]])
        return ("node", ctx_new[t[1]], t[2])

    nodes = tuple(ctx.nodes[j] for j in keep) + filler.nodes
    inputs = tuple(map_ctx(t) for t in ctx.inputs)
    node_out = (tuple(tuple(map_ctx(t) for t in ctx.node_out[j])
                      for j in keep)
                + tuple(tuple(map_filler(t) for t in outs)
                        for outs in filler.node_out))
    return Circuit(ctx.n_in, ctx.n_out, nodes, inputs, node_out,
                   _check=False)


def find_matches(pattern, host):
    """All convex occurrences of pattern inside host, as contexts.

    Returns a list of Context objects c with apply_context(c, pattern)
    equal to host, sorted by (matched node set, canonical context key).
    Patterns must contain at least one node; a match must be pluggable,
    meaning the leftover context is itself a layered circuit, so
    occurrences that would need wires rerouted around unmatched nodes
    are not reported.
    """
    results = {}
    for ctx in iter_matches(pattern, host):
        results.setdefault(ctx.key(), ctx)
    out = list(results.values())
    out.sort(key=lambda c: (tuple(sorted(c.matched_nodes)), c.key()))
    return out


def iter_matches(pattern, host):
    """Lazily yield convex occurrences of pattern inside host.

    Same matches as find_matches, but streamed in discovery order and
    without duplicate collapsing, so occurrences reachable along several
    search branches are yielded once per branch.  Use this form when any
    single match will do and cutting the rest would be wasted work.
    """
    for sigma, picked in _iter_embeddings(pattern, host):
        ctx = _cut_context(pattern, host, sigma, picked)
        if ctx is not None:
            yield ctx


def leftmost_match(pattern, host):
    """The first match by (matched node set, canonical key), or None.

    Equal to find_matches(pattern, host)[0] without cutting a context
    for every occurrence: node embeddings are cheap to enumerate, so
    they are grouped by matched node set and only the leading groups
    are cut until one produces a pluggable context.
    """
    embeddings = sorted(_iter_embeddings(pattern, host),
                        key=lambda e: tuple(sorted(e[0])))
    i = 0
    while i < len(embeddings):
        nodes = tuple(sorted(embeddings[i][0]))
        best = None
        while i < len(embeddings) and \
                tuple(sorted(embeddings[i][0])) == nodes:
            sigma, picked = embeddings[i]
            ctx = _cut_context(pattern, host, sigma, picked)
            if ctx is not None and (best is None or ctx.key() < best.key()):
                best = ctx
            i += 1
        if best is not None:
            return best
    return None


def _iter_embeddings(pattern, host):
    """Yield (sigma, through) pairs describing embeddings of pattern in
    host: sigma maps pattern nodes to host nodes, through maps pattern
    through-inputs to the host wires they ride on.  Cutting a context
    out of an embedding can still fail, so this over-approximates the
    matches."""
    if not pattern.nodes:
        raise CircuitError("cannot match a pattern with no nodes")
    p_in_src, p_out_src = pattern.sources()
    h_in_src, h_out_src = host.sources()
    np = len(pattern.nodes)
    nh = len(host.nodes)
    if np > nh:
        return
    h_ops = host.op_counter()
    p_ops = pattern.op_counter()
    for name, cnt in p_ops.items():
        if h_ops.get(name, 0) < cnt:
            return
    cand = []
    for pj in range(np):
        ok = [hj for hj in range(nh) if host.nodes[hj] == pattern.nodes[pj]]
        if not ok:
            return
        cand.append(ok)

    assign = [None] * np
    used = set()

    def compatible(pj, hj):
        for p in range(pattern.nodes[pj].n_in):
            ps = p_in_src[pj][p]
            hs = h_in_src[hj][p]
            if ps[0] == "node":
                other = assign[ps[1]]
                if other is not None and hs != ("node", other, ps[2]):
                    return False
                if other is None and hs[0] == "node" and hs[1] in used:
                    # host feeds this port from a node already claimed by
                    # a different pattern node
                    return False
        for q in range(pattern.nodes[pj].n_out):
            pt = pattern.node_out[pj][q]
            ht = host.node_out[hj][q]
            if pt[0] == "node":
                other = assign[pt[1]]
                if other is not None and ht != ("node", other, pt[2]):
                    return False
                if other is None and ht[0] == "node" and ht[1] in used:
                    return False
        return True

    def verify(sigma):
        """Re-check every internal pattern wire under a full assignment."""
        for pj in range(np):
            hj = sigma[pj]
            for p in range(pattern.nodes[pj].n_in):
                ps = p_in_src[pj][p]
                if ps[0] == "node":
                    if h_in_src[hj][p] != ("node", sigma[ps[1]], ps[2]):
                        return False
        return True

    def emit(sigma):
        through = [k for k in range(pattern.n_in)
                   if pattern.inputs[k][0] == "out"]
        if not through:
            yield sigma, {}
            return
        wires = host.wires()
        yield from _emit_through(sigma, through, 0, {}, wires)

    def walk(pj):
        if pj == np:
            if verify(assign):
                yield from emit(list(assign))
            return
        for hj in cand[pj]:
            if hj in used:
                continue
            assign[pj] = hj
            if compatible(pj, hj):
                used.add(hj)
                yield from walk(pj + 1)
                used.discard(hj)
            assign[pj] = None

    yield from walk(0)


def _emit_through(sigma, through, i, picked, wires):
    if i == len(through):
        yield sigma, dict(picked)
        return
    k = through[i]
    for w in wires:
        if w in picked.values():
            continue
        picked[k] = w
        yield from _emit_through(sigma, through, i + 1, picked, wires)
        del picked[k]


def _cut_context(pattern, host, sigma, through):
    """Carve the complement of an embedded pattern out of the host.

    sigma maps pattern nodes to host nodes; through maps pattern input
    indices whose wires pass straight through to the host wire they ride
    on.  Returns a Context, or None when the cut is not pluggable.
    """
    image = {hj: pj for pj, hj in enumerate(sigma)}
    p_in_src, _ = pattern.sources()
    keep = [j for j in range(len(host.nodes)) if j not in image]
    new_idx = {j: i for i, j in enumerate(keep)}
    hole_idx = len(keep)
    m, n = pattern.n_in, pattern.n_out

    # Where does each pattern boundary port sit in the host?
    # hole input k will swallow the host wire that fed pattern input k;
    # hole output q emits on the host wire leaving pattern output q.
    hole_in_of = {}
    hole_out_of = {}
    for k in range(m):
        t = pattern.inputs[k]
        if t[0] == "node":
            hole_in_of[("node", sigma[t[1]], t[2])] = k
    for q in range(n):
        s = _pattern_output_source(pattern, q)
        if s is not None:
            hole_out_of[("node", sigma[s[1]], s[2])] = q

    def map_source(s):
        if s[0] == "in":
            return s
        j = s[1]
        if j in image:
            key = ("node", j, s[2])
            if key not in hole_out_of:
                return None
            return ("node", hole_idx, hole_out_of[key])
        return ("node", new_idx[j], s[2])

    def map_target(t):
        if t[0] == "out":
            return t
        j = t[1]
        if j in image:
            key = ("node", j, t[2])
            if key not in hole_in_of:
                return None
            return ("node", hole_idx, hole_in_of[key])
        return ("node", new_idx[j], t[2])

    nodes = [host.nodes[j] for j in keep]
    nodes.append(Operator(HOLE_NAME, m, n))
    inputs = [None] * host.n_in
    node_out = [[None] * op.n_out for op in nodes]
    hole_outs_seen = set()
    through_of = {w: k for k, w in through.items()}

    for src, tgt in host.wires():
        src_in = src[0] == "node" and src[1] in image
        tgt_in = tgt[0] == "node" and tgt[1] in image
        if (src, tgt) in through_of:
            # the wire a pattern through-line rides on: split it into
            # source -> hole input and hole output -> target
            k = through_of[(src, tgt)]
            q = pattern.inputs[k][1]
            s2 = map_source(src)
            t2 = map_target(tgt)
            if s2 is None or t2 is None:
                return None
            if s2[0] == "node" and s2[1] == hole_idx:
                return None
            if t2[0] == "node" and t2[1] == hole_idx:
                return None
            if q in hole_outs_seen:
                return None
            _put_wire(node_out, inputs, s2, ("node", hole_idx, k))
            node_out[hole_idx][q] = t2
            hole_outs_seen.add(q)
            continue
        if src_in and tgt_in:
            leaves = ("node", src[1], src[2]) in hole_out_of
            enters = ("node", tgt[1], tgt[2]) in hole_in_of
            if not leaves and not enters:
                continue  # wire internal to the matched subcircuit
            return None  # would wire the hole back to itself
        s2 = map_source(src)
        t2 = map_target(tgt)
        if s2 is None or t2 is None:
            return None
        s_is_hole = s2[0] == "node" and s2[1] == hole_idx
        t_is_hole = t2[0] == "node" and t2[1] == hole_idx
        if s_is_hole and t_is_hole:
            return None
        if s_is_hole:
            q = s2[2]
            if q in hole_outs_seen:
                return None
            node_out[hole_idx][q] = t2
            hole_outs_seen.add(q)
        else:
            _put_wire(node_out, inputs, s2, t2)

    if any(t is None for t in inputs) or \
            any(t is None for row in node_out for t in row):
        return None
    try:
        circ = Circuit(host.n_in, host.n_out, tuple(nodes),
                       tuple(inputs),
                       tuple(tuple(row) for row in node_out))
        ctx = Context(circ, matched_nodes=tuple(sorted(sigma)))
    except CircuitError:
        return None
    rebuilt = apply_context(ctx, pattern)
    # the rebuild puts kept host nodes first and pattern nodes after, so
    # the node correspondence with the host is known; checking raw wires
    # under it avoids canonicalizing a fresh host-sized circuit per match
    if not _same_relabeled(rebuilt, host, keep + list(sigma)) \
            and rebuilt != host:
        return None
    return ctx


def _same_relabeled(a, b, order):
    """Wire-for-wire equality of a and b, with a's node i being b's
    node order[i]."""
    if (a.n_in, a.n_out) != (b.n_in, b.n_out) or len(a.nodes) != len(b.nodes):
        return False
    new_of = {j: i for i, j in enumerate(order)}
    if len(new_of) != len(b.nodes):
        return False

    def conv(t):
        return ("node", new_of[t[1]], t[2]) if t[0] == "node" else t

    for i, j in enumerate(order):
        if a.nodes[i] != b.nodes[j]:
            return False
    if a.inputs != tuple(conv(t) for t in b.inputs):
        return False
    for i, j in enumerate(order):
        if a.node_out[i] != tuple(conv(t) for t in b.node_out[j]):
            return False
    return True


def _put_wire(node_out, inputs, src, tgt):
    if src[0] == "in":
        inputs[src[1]] = tgt
    else:
        node_out[src[1]][src[2]] = tgt


def _pattern_output_source(pattern, q):
    _, out_src = pattern.sources()
    s = out_src[q]
    if s[0] == "in":
        return None  # a through wire, handled separately
    return s


# -- parsing -------------------------------------------------------------


_TOKEN_RE = re.compile(r"[a-z_][a-z0-9_]*|\d+|[();*]|\S")


def _tokenize(text):
    toks = []
    for ln, line in enumerate(text.splitlines() or [""], start=1):
        stripped = line.split("#", 1)[0]
        for m in _TOKEN_RE.finditer(stripped):
            toks.append((m.group(0), ln, m.start() + 1))
    return toks


def parse_circuit(text, signature):
    """Parse circuit syntax: `;` composes, `*` tensors, `id(n)`, parens.

    Tensor binds tighter than composition, so `a ; b * c` reads as
    `a ; (b * c)`.  Raises ParseError with a source location on any
    syntax problem, unknown operator, or arity mismatch.
    """
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos][0] if pos < len(toks) else None

    def where():
        if pos < len(toks):
            return toks[pos][1], toks[pos][2]
        if toks:
            return toks[-1][1], toks[-1][2] + len(toks[-1][0])
        return 1, 1

    def expect(tok):
        nonlocal pos
        if peek() != tok:
            ln, col = where()
            raise ParseError(f"expected {tok!r}, found {peek()!r}", ln, col)
        pos += 1

    def atom():
        nonlocal pos
        t = peek()
        ln, col = where()
        if t is None:
            raise ParseError("unexpected end of input", ln, col)
        if t == "(":
            pos += 1
            c = seq()
            expect(")")
            return c
        if t == "id":
            pos += 1
            expect("(")
            num = peek()
            if num is None or not num.isdigit():
                ln2, col2 = where()
                raise ParseError("id(...) needs a number", ln2, col2)
            pos += 1
            expect(")")
            return Circuit.identity(int(num))
        if _NAME_RE.match(t) or t == HOLE_NAME:
            pos += 1
            if t == HOLE_NAME or t in signature:
                op = (signature[t] if t in signature
                      else Operator(HOLE_NAME, 0, 0))
                return Circuit.generator(op)
            raise ParseError(f"unknown operator {t!r}", ln, col)
        raise ParseError(f"unexpected token {t!r}", ln, col)

    def ten():
        c = atom()
        while peek() == "*":
            ln, col = where()
            pos2 = pos
            expect("*")
            rhs = atom()
            c = tensor(c, rhs)
        return c

    def seq():
        nonlocal pos
        c = ten()
        while peek() == ";":
            ln, col = where()
            expect(";")
            rhs = ten()
            try:
                c = compose(c, rhs)
            except CircuitError as e:
                raise ParseError(str(e), ln, col) from None
        return c

    if not toks:
        raise ParseError("empty circuit text", 1, 1)
    c = seq()
    if pos != len(toks):
        ln, col = where()
        raise ParseError(f"trailing input {peek()!r}", ln, col)
    return c


def random_circuit(signature, rng, max_nodes=8, max_width=7):
    """Draw a random circuit over the signature, at most max_nodes nodes.

    Grows a circuit by composing generators at random offsets and by
    tensoring with stray wires.  Deterministic for a seeded rng.
    """
    ops = list(signature)
    c = Circuit.identity(rng.randint(0, 2))
    budget = rng.randint(1, max_nodes)
    for _ in range(budget):
        op = rng.choice(ops)
        g = Circuit.generator(op)
        mode = rng.random()
        if mode < 0.25 and c.n_out + op.n_in <= max_width:
            c = tensor(c, g) if rng.random() < 0.5 else tensor(g, c)
            continue
        # compose g across a random band of c's outputs
        spare = c.n_out - op.n_in
        if spare < 0:
            if c.n_out + (-spare) > max_width:
                continue
            c = tensor(c, Circuit.identity(-spare))
            spare = 0
        off = rng.randint(0, spare)
        layer = Circuit.identity(off)
        layer = tensor(layer, g)
        layer = tensor(layer, Circuit.identity(spare - off))
        c = compose(c, layer)
    return c
