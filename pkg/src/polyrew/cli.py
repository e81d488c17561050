"""Command line front end.

Exit codes are part of the contract so the tool composes with CI:

    0   success: normal form reached, certificate granted, pairs joined
    1   bad input: parse error (with location), unknown name, misuse
    2   fuel exhausted before a normal form
    3   check ran but the property does not hold (certificate refused,
        pairs not joined, verification battery failed)

Every subcommand takes --json for a machine-readable document on
stdout, and the ones that produce runs or certificates take
--report-dir to render charts and CSV tables there.
"""

import argparse
import json
import sys

from .circuits import Signature, parse_circuit
from .engine import check_joinability, critical_pairs, normalize, \
    render_polygraph
from .errors import PolyError
from .orders import layered_termination
from .presets import interpretation_by_name, load_preset, preset_names, \
    verify_preset
from .terms import RESOURCE_OPS, finset_semantics, parse_trs, project_pi
from .translate import translate_trs

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FUEL = 2
EXIT_REFUSED = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors, which this tool reserves for
    # fuel exhaustion; route everything through exit 1 instead
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _theory(args):
    return load_preset(args.theory)


def _signature(args):
    if getattr(args, "theory", None):
        return _theory(args).polygraph.signature
    return Signature(RESOURCE_OPS)


def _layers(args, signature):
    if not args.interp:
        raise PolyError("at least one --interp is required")
    return [interpretation_by_name(name, signature) for name in args.interp]


def _emit(args, doc, lines):
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        for line in lines:
            print(line)


def _report_note(paths):
    for p in paths:
        print(f"report: {p}", file=sys.stderr)


def cmd_normalize(args):
    preset = _theory(args)
    poly = preset.polygraph
    circuit = parse_circuit(args.circuit, poly.signature)
    if args.strategy == "random" and args.seed is None:
        raise PolyError("seed required for random strategy")
    trace = normalize(poly, circuit, fuel=args.fuel,
                      strategy=args.strategy, seed=args.seed)
    shown = [s.rule for s in trace.steps[:20]]
    tail = "" if trace.length <= 20 else f", ... ({trace.length} total)"
    lines = [
        f"start:  {trace.start.text()}",
        f"result: {trace.result.text()}",
        f"status: {trace.status} after {trace.length} steps "
        f"({trace.strategy}"
        + (f", seed {args.seed}" if args.strategy == "random" else "") + ")",
    ]
    if shown:
        lines.append("rules:  " + ", ".join(shown) + tail)
    _emit(args, trace.to_json(), lines)
    if args.report_dir:
        from . import report
        interp = None
        if args.interp:
            interp = _layers(args, poly.signature)[0]
        _report_note(report.trace_report(args.report_dir, trace,
                                         interp=interp))
    return EXIT_OK if trace.status == "normal-form" else EXIT_FUEL


def cmd_translate(args):
    trs = parse_trs(_read_trs(args.trs))
    result = translate_trs(trs)
    doc = {
        "manifest": result.manifest,
        "polygraph": render_polygraph(result.polygraph),
    }
    lines = [f"{len(result.polygraph.rules)} rules over "
             f"{len(list(result.polygraph.signature))} operators"]
    for entry in result.manifest["rules"]:
        line = f"  {entry['name']}: {entry['provenance']}"
        if entry["provenance"] == "translated":
            line += ("" if entry["left_linear"] else " (not left-linear)")
        lines.append(line)
    _emit(args, doc, lines)
    return EXIT_OK


def _read_trs(spec):
    from .presets import data_dir
    from pathlib import Path
    path = Path(spec)
    if not path.exists():
        bundled = data_dir() / spec
        if bundled.exists():
            path = bundled
        else:
            raise PolyError(f"no such term system file: {spec}")
    return path.read_text()


def cmd_check_term(args):
    preset = _theory(args)
    poly = preset.polygraph
    layers = _layers(args, poly.signature)
    cert = layered_termination(poly.rules, layers)
    _emit(args, cert.to_json(), cert.summary_lines())
    if args.report_dir:
        from . import report
        _report_note(report.certificate_report(args.report_dir, cert))
    return EXIT_OK if cert.certified else EXIT_REFUSED


def cmd_cps(args):
    preset = _theory(args)
    poly = preset.polygraph
    fuel = args.fuel if args.fuel is not None else 200
    found = critical_pairs(poly, max_nodes=args.max_nodes)
    results = [check_joinability(poly, p, fuel=fuel) for p in found.pairs]
    doc = {
        "max_nodes": found.max_nodes,
        "skipped_oversize": found.skipped_oversize,
        "complete_within_bound": found.complete_within_bound,
        "pairs": [r.to_json() for r in results],
    }
    lines = []
    for r in results:
        lines.append(f"{r.pair.rule_left} / {r.pair.rule_right}: "
                     f"{r.verdict}  (source {r.pair.source.text()})")
    joined = sum(1 for r in results if r.verdict == "joined")
    lines.append(f"{joined}/{len(results)} pairs joined, "
                 f"{found.skipped_oversize} oversize skipped "
                 f"(max_nodes {found.max_nodes})")
    _emit(args, doc, lines)
    if args.report_dir:
        from . import report
        _report_note(report.joinability_report(
            args.report_dir, results,
            skipped_oversize=found.skipped_oversize))
    return EXIT_OK if joined == len(results) else EXIT_REFUSED


def cmd_semantics(args):
    sig = _signature(args)
    circuit = parse_circuit(args.circuit, sig)
    family = project_pi(circuit)
    finfun = None
    if all(node.name in ("tau", "delta", "epsilon")
           for node in circuit.nodes):
        finfun = finset_semantics(circuit)
    doc = {
        "n_in": circuit.n_in,
        "n_out": circuit.n_out,
        "terms": [str(t) for t in family.terms],
        "finset": None if finfun is None else {
            "n_in": finfun.n_in, "n_out": finfun.n_out,
            "backmap": list(finfun.backmap)},
    }
    lines = [f"circuit: {circuit.n_in} -> {circuit.n_out}",
             f"terms:   {family}"]
    if finfun is None:
        lines.append("finset:  (not a pure wire-management circuit)")
    else:
        image = ", ".join(f"y{j + 1} = x{finfun.backmap[j] + 1}"
                          for j in range(finfun.n_out)) or "()"
        lines.append(f"finset:  [{finfun.n_in}] -> [{finfun.n_out}], "
                     f"{image}")
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_verify_preset(args):
    fuel = args.fuel if args.fuel is not None else 200
    seed = args.seed if args.seed is not None else 0
    report_obj = verify_preset(args.theory, max_nodes=args.max_nodes,
                               fuel=fuel, seed=seed)
    _emit(args, report_obj.to_json(), report_obj.summary_lines())
    if args.report_dir:
        from . import report
        _report_note(report.preset_report(args.report_dir, report_obj))
    return EXIT_OK if report_obj.ok else EXIT_REFUSED


def build_parser():
    parser = _Parser(
        prog="poly",
        description="Rewrite circuits, translate term systems, and check "
                    "termination orders.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, theory=True, report=True):
        if theory:
            p.add_argument("--theory", required=True,
                           help="bundled preset (%s) or a .poly/.trs path"
                           % ", ".join(preset_names()))
        p.add_argument("--json", action="store_true",
                       help="print a JSON document instead of text")
        if report:
            p.add_argument("--report-dir", metavar="DIR",
                           help="write PNG charts and CSV tables here")

    p = sub.add_parser("normalize", help="rewrite a circuit to normal form")
    common(p)
    p.add_argument("--circuit", required=True,
                   help="circuit expression, e.g. 'tau ; tau'")
    p.add_argument("--fuel", type=_positive_int, default=10000,
                   help="step budget (default 10000)")
    p.add_argument("--strategy", choices=("leftmost", "random"),
                   default="leftmost")
    p.add_argument("--seed", type=int,
                   help="rng seed; required for --strategy random")
    p.add_argument("--interp", action="append", default=[],
                   help="interpretation for the report's heat chart")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("translate",
                       help="compile a term rewriting system to a polygraph")
    common(p, theory=False, report=False)
    p.add_argument("--trs", required=True,
                   help="term system file (path or bundled name)")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("check-term",
                       help="layered termination certificate for a theory")
    common(p)
    p.add_argument("--interp", action="append", default=[], required=True,
                   help="interpretation layer, in order; repeatable "
                        "(built-ins: f1, g, lz2; or an .interp path)")
    p.set_defaults(func=cmd_check_term)

    p = sub.add_parser("cps",
                       help="enumerate critical pairs and try to join them")
    common(p)
    p.add_argument("--max-nodes", type=_positive_int, default=8,
                   help="size bound on overlap sources (default 8)")
    p.add_argument("--fuel", type=_positive_int, default=None,
                   help="joinability budget per side (default 200)")
    p.set_defaults(func=cmd_cps)

    p = sub.add_parser("semantics",
                       help="read a circuit back as terms and, when "
                            "possible, a finite-set map")
    common(p, theory=False, report=False)
    p.add_argument("--theory",
                   help="optional theory supplying the signature")
    p.add_argument("--circuit", required=True)
    p.set_defaults(func=cmd_semantics)

    p = sub.add_parser("verify-preset",
                       help="run a preset's full self-check battery")
    common(p)
    p.add_argument("--max-nodes", type=_positive_int, default=6,
                   help="critical pair bound (default 6)")
    p.add_argument("--fuel", type=_positive_int, default=None,
                   help="joinability budget (default 200)")
    p.add_argument("--seed", type=int, default=None,
                   help="seed for sampled checks (default 0)")
    p.set_defaults(func=cmd_verify_preset)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PolyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
