"""Chart and table output for CLI runs.

Every report is a PNG figure plus a CSV with the exact numbers, so the
picture is never the only record.  Figures are quantitative summaries
(heat descent, verdict grids, join statistics); circuit diagrams are
out of scope and stay textual.

Matplotlib is imported lazily and pinned to the Agg backend, so report
generation works headless and costs nothing when unused.
"""

import csv
from collections import Counter
from pathlib import Path

from .errors import InterpError
from .orders import interpret

STATUS_COLORS = {
    "pass": "#2a9d4e",
    "expected-failure": "#4878b0",
    "fail": "#c23b3b",
}

VERDICT_COLORS = {
    "strict": "#2a9d4e",
    "invariant": "#4878b0",
    "nonstrict": "#e0a43a",
    "unknown": "#c23b3b",
    "": "#d9d9d9",
}


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def _heat_sample(interp, circuit, env_value=2):
    """Evaluate the circuit's heat at a constant environment.

    Scalar heats come back as ints.  Multiset heats come back as a
    descending-sorted tuple of generator values with multiplicity,
    which compares correctly under tuple order: the multiset extension
    of a total order is total, and on sorted sequences it is
    lexicographic.
    """
    t = interpret(interp, circuit)
    env = {v: env_value for v in t.heat.variables()}
    h = t.heat.eval(env)
    if isinstance(h, Counter):
        return tuple(sorted(h.elements(), reverse=True))
    return h


def _heat_label(sample):
    if isinstance(sample, tuple):
        if not sample:
            return "{}"
        c = Counter(sample)
        return "{" + ", ".join(f"{v}:{c[v]}" for v in sorted(c, reverse=True)) + "}"
    return str(sample)


def trace_report(out_dir, trace, interp=None, env_value=2,
                 prefix="normalize"):
    """Node-count and heat-descent charts for a recorded reduction.

    The heat series needs an interpretation that covers every operator
    in the trace; multiset heats are plotted by rank (position in the
    sorted set of observed values) because no scalar shadow of the
    multiset order is faithful.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    circuits = [trace.start] + [s.result for s in trace.steps]
    rules = [""] + [s.rule for s in trace.steps]
    nodes = [len(c.nodes) for c in circuits]
    heats = None
    if interp is not None:
        try:
            heats = [_heat_sample(interp, c, env_value) for c in circuits]
        except InterpError:
            heats = None

    rows = []
    for i, c in enumerate(circuits):
        row = [i, rules[i], nodes[i]]
        if heats is not None:
            row.append(_heat_label(heats[i]))
        rows.append(row)
    header = ["step", "rule", "nodes"]
    if heats is not None:
        header.append(f"heat@{env_value}")
    paths = [_write_csv(out / f"{prefix}_trace.csv", header, rows)]

    plt = _plt()
    n_axes = 2 if heats is not None else 1
    fig, axes = plt.subplots(n_axes, 1, figsize=(7, 2.6 * n_axes),
                             sharex=True, squeeze=False)
    ax = axes[0][0]
    ax.plot(range(len(nodes)), nodes, marker=".", color="#4878b0")
    ax.set_ylabel("nodes")
    ax.set_title(f"reduction ({trace.status}, {trace.length} steps, "
                 f"{trace.strategy})")
    if heats is not None:
        order = {k: r for r, k in enumerate(sorted(set(heats)))}
        ranks = [order[h] for h in heats]
        ax2 = axes[1][0]
        ax2.plot(range(len(ranks)), ranks, marker=".", color="#c23b3b")
        ax2.set_ylabel(f"heat rank ({interp.name})")
        ax2.set_xlabel("step")
    else:
        ax.set_xlabel("step")
    fig.tight_layout()
    png = out / f"{prefix}_descent.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    paths.append(png)
    return [str(p) for p in paths]


def certificate_report(out_dir, cert, prefix="check_term"):
    """Verdict grid for a layered termination certificate."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    layer_names = list(cert.layer_names)
    rule_names = list(cert.assignment)
    grid = []
    rows = []
    for rule in rule_names:
        per_layer = cert.checks[rule]
        verdicts = [rc.verdict for rc in per_layer]
        verdicts += [""] * (len(layer_names) - len(verdicts))
        grid.append(verdicts)
        layer = cert.assignment[rule]
        rows.append([rule,
                     layer_names[layer] if layer is not None else ""]
                    + verdicts)
    header = ["rule", "strict_layer"] + [f"verdict@{n}" for n in layer_names]
    paths = [_write_csv(out / f"{prefix}_rules.csv", header, rows)]

    plt = _plt()
    fig, ax = plt.subplots(
        figsize=(2.2 + 1.6 * len(layer_names), 1.2 + 0.28 * len(rule_names)))
    for i, verdicts in enumerate(grid):
        for j, v in enumerate(verdicts):
            ax.add_patch(plt.Rectangle((j, i), 1, 1,
                                       color=VERDICT_COLORS[v]))
            if v:
                ax.text(j + 0.5, i + 0.5, v, ha="center", va="center",
                        fontsize=7, color="white")
    ax.set_xlim(0, len(layer_names))
    ax.set_ylim(len(rule_names), 0)
    ax.set_xticks([k + 0.5 for k in range(len(layer_names))])
    ax.set_xticklabels(layer_names)
    ax.set_yticks([k + 0.5 for k in range(len(rule_names))])
    ax.set_yticklabels(rule_names, fontsize=7)
    ax.set_title("certified" if cert.certified else "NOT certified")
    fig.tight_layout()
    png = out / f"{prefix}_verdicts.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    paths.append(png)
    return [str(p) for p in paths]


def joinability_report(out_dir, results, skipped_oversize=0, prefix="cps"):
    """Verdict counts and join-length histogram for critical pairs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [[r.pair.rule_left, r.pair.rule_right, r.pair.source.text(),
             r.verdict, r.left_trace.length, r.right_trace.length,
             r.meet.text() if r.meet is not None else ""]
            for r in results]
    header = ["rule_left", "rule_right", "source", "verdict",
              "left_steps", "right_steps", "meet"]
    paths = [_write_csv(out / f"{prefix}_pairs.csv", header, rows)]

    plt = _plt()
    counts = Counter(r.verdict for r in results)
    fig, (ax, ax2) = plt.subplots(1, 2, figsize=(8, 3))
    kinds = ["joined", "distinct-normal-forms", "undecided"]
    colors = ["#2a9d4e", "#c23b3b", "#e0a43a"]
    ax.bar(range(len(kinds)), [counts.get(k, 0) for k in kinds],
           color=colors)
    ax.set_xticks(range(len(kinds)))
    ax.set_xticklabels(["joined", "distinct", "undecided"])
    ax.set_ylabel("pairs")
    title = f"{len(results)} critical pairs"
    if skipped_oversize:
        title += f" ({skipped_oversize} oversize skipped)"
    ax.set_title(title)
    lengths = [max(r.left_trace.length, r.right_trace.length)
               for r in results if r.verdict == "joined"]
    if lengths:
        ax2.hist(lengths, bins=range(max(lengths) + 2), color="#4878b0",
                 rwidth=0.9)
    ax2.set_xlabel("steps to join")
    ax2.set_ylabel("pairs")
    fig.tight_layout()
    png = out / f"{prefix}_joins.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    paths.append(png)
    return [str(p) for p in paths]


def preset_report(out_dir, report, prefix="verify"):
    """Status chart for a preset verification battery."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [[c.name, c.status, c.detail] for c in report.checks]
    paths = [_write_csv(out / f"{prefix}_checks.csv",
                        ["check", "status", "detail"], rows)]

    plt = _plt()
    names = [c.name for c in report.checks]
    colors = [STATUS_COLORS[c.status] for c in report.checks]
    fig, ax = plt.subplots(figsize=(7, 1.0 + 0.35 * len(names)))
    ax.barh(range(len(names)), [1] * len(names), color=colors)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=8)
    ax.invert_yaxis()
    ax.set_xticks([])
    for i, c in enumerate(report.checks):
        ax.text(0.02, i, c.status, va="center", fontsize=8, color="white")
    state = "ok" if report.ok else "FAILED"
    ax.set_title(f"{report.preset}: {state}")
    fig.tight_layout()
    png = out / f"{prefix}_status.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    paths.append(png)
    return [str(p) for p in paths]
