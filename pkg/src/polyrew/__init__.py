"""Circuit rewriting over planar operator signatures.

The package provides:

- circuits: anchored wiring diagrams up to exchange, with parsing,
  canonical forms, matching and context plugging;
- engine: rules, polygraphs, fuel-bounded normalization strategies and
  bounded critical-pair analysis;
- terms: first-order terms, term families, and the readbacks from
  circuits to substitution families and finite-set maps;
- translate: compilation of term rewriting systems into circuit
  polygraphs with explicit copy, erase and swap operators;
- orders: interpretation-based termination orders with machine-checked
  certificate output;
- presets: bundled example systems and their verification;
- cli / report: the command line front end and its figure output.
"""

from .circuits import (Circuit, Context, Operator, Signature, apply_context,
                       compose, dualize_circuit, find_matches, generator,
                       identity, iter_matches, parse_circuit, random_circuit,
                       tensor,
                       tensor_all)
from .engine import (CriticalPair, CriticalPairReport, JoinResult, Polygraph,
                     ReductionTrace, Rule, check_joinability,
                     check_local_confluence, critical_pairs, normalize,
                     parse_polygraph, render_polygraph, rewrite_step)
from .errors import (CircuitError, DataFormatError, InterpError, ParseError,
                     PolyError, PresetError, RewriteError, SimulationError,
                     TermError)
from .orders import (Certificate, Interpretation, InterpTriple, RuleCheck,
                     TermMeasureInterp, check_rule, compare_heat,
                     compare_multiset, compare_sym, dual_triple, interpret,
                     layered_termination, make_f1, make_f3, make_g,
                     monotonicity_check, parse_interp)
from .translate import (TranslationResult, build_rdelta_sigma, build_sigma_c,
                        delta_n, phi, simulate_step, tau_1n, tau_n1,
                        term_to_circuit, translate_trs)
from .terms import (App, FinFun, TermFamily, Trs, TrsRule, Var,
                    finset_semantics, longest_path_measure, match_term,
                    normalize_term, parse_term, parse_trs, project_pi,
                    render_trs, sharp, term_universe, trs_step, uniformize)
from .presets import (Duality, DedupResult, LZ2_DUALITY, Preset,
                      PresetReport, data_dir, dedup_rules_for_checking,
                      dualize, interpretation_by_name, load_preset,
                      preset_names, verify_preset, z2_linear_map)

__version__ = "0.1.0"

__all__ = [
    "App", "Certificate", "Circuit", "CircuitError", "Context",
    "CriticalPair", "CriticalPairReport", "DataFormatError", "DedupResult",
    "Duality", "FinFun", "InterpError", "InterpTriple", "Interpretation",
    "JoinResult", "LZ2_DUALITY", "Operator", "ParseError", "PolyError",
    "Polygraph", "Preset", "PresetError", "PresetReport", "ReductionTrace",
    "RewriteError", "Rule", "RuleCheck", "Signature", "SimulationError",
    "TermError", "TermFamily", "TermMeasureInterp", "TranslationResult",
    "Trs", "TrsRule", "Var", "apply_context", "build_rdelta_sigma",
    "build_sigma_c", "check_joinability", "check_local_confluence",
    "check_rule", "compare_heat", "compare_multiset", "compare_sym",
    "compose", "critical_pairs", "data_dir", "dedup_rules_for_checking",
    "delta_n", "dual_triple", "dualize", "dualize_circuit", "find_matches",
    "finset_semantics", "generator", "identity", "interpret",
    "iter_matches",
    "interpretation_by_name", "layered_termination", "load_preset",
    "longest_path_measure", "make_f1", "make_f3", "make_g", "match_term",
    "monotonicity_check", "normalize", "normalize_term", "parse_circuit",
    "parse_interp", "parse_polygraph", "parse_term", "parse_trs", "phi",
    "preset_names", "project_pi", "random_circuit", "render_polygraph",
    "render_trs", "rewrite_step", "sharp", "simulate_step", "tau_1n",
    "tau_n1", "tensor", "tensor_all", "term_to_circuit", "term_universe",
    "translate_trs", "trs_step", "uniformize", "verify_preset",
    "z2_linear_map",
]
