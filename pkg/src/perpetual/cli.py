"""Command-line driver: run rules, check axioms, regenerate tables, apportion seats.

Exit codes: 0 when the requested check holds (or the command just produced
output), 1 when an axiom was refuted or a verification failed, 2 for usage
errors. All randomized campaigns default to a fixed seed, so every run is
reproducible unless --seed overrides it.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction

from . import apportionment, axioms, corpus, rules, sequence_io, tables
from .core import TieBreaker

EXIT_HOLDS = 0
EXIT_REFUTED = 1
EXIT_USAGE = 2


class UsageError(ValueError):
    pass


def _parse_simple_spec(spec: str):
    match = re.fullmatch(r"([0-9]+(?:,[0-9]+)*):([0-9]+)", spec.strip())
    if not match:
        raise UsageError(f"--simple expects 'sizes:k' like '2,1:3', got {spec!r}")
    sizes = tuple(int(s) for s in match.group(1).split(","))
    return sizes, int(match.group(2))


def _parse_budget(budget: str) -> dict:
    """Parse 'n<=5,k<=10,samples=2000' into a dict of integer bounds."""
    out = {}
    if not budget:
        return out
    for part in budget.split(","):
        match = re.fullmatch(r"\s*([a-z]+)\s*(?:<=|=)\s*([0-9]+)\s*", part)
        if not match:
            raise UsageError(f"cannot parse budget item {part!r}")
        out[match.group(1)] = int(match.group(2))
    return out


def _parse_bound(text: str):
    """A dry-spell bound: a constant or a linear 'a*n+b' / 'an+b' / 'n-1' form."""
    compact = text.replace(" ", "")
    match = re.fullmatch(r"(?:(\d*)\*?n)?([+-]\d+)?", compact)
    if not match or compact == "":
        raise UsageError(f"cannot parse bound {text!r}")
    if match.group(1) is None and "n" not in compact:
        return lambda n, c=int(compact): c
    slope = int(match.group(1)) if match.group(1) else 1
    offset = int(match.group(2) or 0)
    return lambda n, a=slope, b=offset: a * n + b


_DEFAULT_BOUNDS = {
    "reset": lambda n: 2 * n - 2,
    "phragmen": lambda n: 2 * n - 1,
    "consensus": tables.consensus_dry_spell_bound,
    "exponential": lambda n: rules.exponential_dry_spell_bound(n) + 1,
    "dictator": lambda n: n,
    "rotating-dictator": lambda n: n,
    "av": lambda n: 8,
    "pav": lambda n: 8,
}


def _fraction_str(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return str(value)


def _load_sequence(args):
    if args.input and args.simple:
        raise UsageError("give either --input or --simple, not both")
    if args.input:
        seq, tiebreak = sequence_io.read_sequence_file(args.input)
        return seq, tiebreak
    if args.simple:
        sizes, k = _parse_simple_spec(args.simple)
        return corpus.simple_sequence(sizes, k), None
    raise UsageError("one of --input or --simple is required")


def _witness_document(witness: axioms.Witness) -> dict:
    def jsonable(value):
        if isinstance(value, Fraction):
            return str(value)
        if isinstance(value, corpus.DecisionInstance):
            return {
                "candidates": list(value.candidates),
                "approvals": [sorted(a) for a in value.approvals],
            }
        if isinstance(value, (tuple, list)):
            return [jsonable(v) for v in value]
        if isinstance(value, dict):
            return {k: jsonable(v) for k, v in value.items()}
        return value

    return {
        "kind": witness.kind,
        "rule": witness.rule_id,
        "sequence": sequence_io.sequence_to_document(witness.seq, witness.tiebreaker),
        "details": jsonable(witness.details),
    }


def _emit_verdict(args, axiom: str, verdict: axioms.AxiomVerdict) -> int:
    print(f"{axiom} [{args.rule}]: {verdict.status}")
    for key, value in sorted(verdict.search_budget.items()):
        print(f"  {key}: {value}")
    witness_path = None
    if not verdict.holds and verdict.witness is not None:
        witness_path = args.witness_out or f"witness-{axiom}-{args.rule}.json"
        with open(witness_path, "w", encoding="utf-8") as handle:
            handle.write(sequence_io.canonical_json(_witness_document(verdict.witness)))
        print(f"  witness: {witness_path}")
    if args.report:
        report = {
            "axiom": axiom,
            "rule": args.rule,
            "status": verdict.status,
            "budget": {k: str(v) for k, v in verdict.search_budget.items()},
            "witness_path": witness_path,
        }
        with open(args.report, "w", encoding="utf-8") as handle:
            handle.write(sequence_io.canonical_json(report))
    return EXIT_HOLDS if verdict.holds else EXIT_REFUTED


def cmd_run(args) -> int:
    seq, file_tb = _load_sequence(args)
    tiebreak = file_tb
    if len(seq) > args.max_rounds and args.rule == "exponential":
        raise UsageError(
            f"the exponential rule is capped at {args.max_rounds} rounds "
            f"(weights carry 2**(k!) factors); override with --max-rounds"
        )
    run = rules.run_rule(args.rule, seq, tiebreak)
    print(" ".join(run.winners))
    if args.trace:
        for t, snapshot in enumerate(run.states):
            parts = []
            for key, values in snapshot.items():
                if isinstance(values, tuple):
                    rendered = " ".join(
                        f"{a}+{b}*pi" if isinstance(v, tuple) else _fraction_str(v)
                        for v in values
                        for a, b in [(v[0], v[1]) if isinstance(v, tuple) else (None, None)]
                    )
                    parts.append(f"{key}: {rendered}")
                else:
                    parts.append(f"{key}: {values}")
            print(f"state {t}  " + "  ".join(parts))
    return EXIT_HOLDS


def cmd_check(args) -> int:
    budget = _parse_budget(args.budget or "")
    seed = args.seed if args.seed is not None else axioms.DEFAULT_SEED
    axiom = args.axiom
    if axiom == "dryspell":
        bound = _parse_bound(args.bound) if args.bound else _DEFAULT_BOUNDS[args.rule]
        mode = args.mode
        if mode == "auto":
            probe = axioms.check_dry_spell_guarantee(
                args.rule, bound, axioms.DrySpellSearch(mode="construction"))
            if not probe.holds:
                return _emit_verdict(args, axiom, probe)
            mode = "random"
        search = axioms.DrySpellSearch(
            mode=mode,
            max_voters=budget.get("n", 4),
            max_rounds=budget.get("k", 10),
            max_candidates=budget.get("c", 4),
            samples=budget.get("samples", 2000),
            seed=seed,
            jobs=args.jobs,
        )
        return _emit_verdict(args, axiom, axioms.check_dry_spell_guarantee(args.rule, bound, search))
    if axiom == "iud":
        search = axioms.IudSearch(
            max_voters=budget.get("n", 5),
            max_rounds=budget.get("k", 2),
            candidates=budget.get("c", 2),
        )
        return _emit_verdict(args, axiom, axioms.iud_campaign(args.rule, search))
    if axiom == "simpleprop":
        verdict = axioms.check_simple_proportionality(args.rule, budget.get("n", 7))
        return _emit_verdict(args, axiom, verdict)
    if axiom in ("alq", "auq"):
        which = "lower" if axiom == "alq" else "upper"
        k = budget.get("k", 30)
        if args.parties:
            sizes = tuple(int(s) for s in args.parties.split(","))
            report, verdict = axioms.check_quota(args.rule, sizes, k, which)
            _print_quota_report(report)
            return _emit_verdict(args, axiom, verdict)
        table_budget = tables.TableBudget(quota_max_voters=budget.get("n", 5), quota_rounds=k)
        cell = tables._quota_cell(args.rule, which, table_budget)
        print(f"{axiom} [{args.rule}]: {'holds on searched space' if cell.value == tables.YES else 'refuted'}")
        print(f"  backing: {cell.backing}")
        return EXIT_HOLDS if cell.value == tables.YES else EXIT_REFUTED
    if axiom == "degree":
        if args.ell is None:
            raise UsageError("--axiom degree requires --ell")
        search = axioms.DegreeSearch(
            samples=budget.get("samples", 10000),
            max_voters=budget.get("n", 8),
            max_rounds=budget.get("k", 8),
            seed=seed,
            jobs=args.jobs,
        )
        estimate = axioms.estimate_proportionality_degree(args.rule, Fraction(args.ell), search)
        print(f"degree [{args.rule}] ell={args.ell}: minimum observed average {estimate.minimum}")
        print(f"  group: {estimate.sample.group}  budget: {estimate.search_budget}")
        return EXIT_HOLDS
    if axiom == "dictatorial":
        n = budget.get("n", 3)
        d = budget.get("d", 5)
        seq = corpus.dictator_rounds_construction(n, d)
        run = rules.run_rule(args.rule, seq)
        from .core import history

        found = axioms.detect_dictatorial_rounds(history(seq, run.winners))
        print(f"dictatorial [{args.rule}]: indices {found.indices}, "
              f"longest consecutive run {found.longest_consecutive}")
        return EXIT_REFUTED if found.longest_consecutive >= d else EXIT_HOLDS
    raise UsageError(f"unknown axiom {args.axiom!r}")


def _print_quota_report(report: axioms.QuotaReport) -> None:
    for row in report.parties:
        print(f"  party {row.label}: size {row.size}, satisfaction {row.satisfaction}, "
              f"quota [{row.lower_bound}, {row.upper_bound}]")


def cmd_table(args) -> int:
    corpus.verify_corpus()
    apportionment.verify_fixtures()
    budget = tables.QUICK_BUDGET if args.quick else tables.TableBudget()
    if args.which == "rules":
        table = tables.regenerate_rules_table(budget)
    else:
        table = tables.regenerate_classes_table(budget)
    print(tables.render_table(table, show_backing=args.show_backing), end="")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as handle:
            handle.write(sequence_io.canonical_json(tables.table_to_document(table)))
    return EXIT_HOLDS


def cmd_apportion(args) -> int:
    votes = tuple(int(v) for v in args.votes.split(","))
    inst = apportionment.from_votes(votes, args.seats)
    method = apportionment.get_method(args.method)
    seats = method(inst)
    print("seats: " + " ".join(str(p + 1) for p in seats.seats))
    print("totals: " + ",".join(str(t) for t in seats.totals(inst.parties)))
    report, violations = apportionment.quota_audit(seats, inst)
    for row in report.parties:
        print(f"  party {row.label}: share {row.size}, seats {row.satisfaction}, "
              f"quota [{row.lower_bound}, {row.upper_bound}]")
    for which, prefix, party, got, bound in violations:
        print(f"  {which}-quota violation at house size {prefix}: "
              f"party {party + 1} has {got}, bound {bound}")
    if args.verify_equivalence:
        rule_id = args.verify_equivalence
        n = sum(votes)
        if rule_id == "consensus":
            verdict = apportionment.verify_consensus_frege_identity(inst, n)
        else:
            verdict = apportionment.verify_dhondt_equivalence(rule_id, inst, n)
        print(f"equivalence with {rule_id}: {verdict.status}")
        return EXIT_HOLDS if verdict.holds else EXIT_REFUTED
    return EXIT_HOLDS


def cmd_corpus(args) -> int:
    if args.action != "verify":
        raise UsageError("the corpus command only supports 'verify'")
    verified = corpus.verify_corpus()
    apportionment.verify_fixtures()
    for entry_id in verified:
        print(f"ok {entry_id}")
    print(f"ok apportionment fixtures")
    return EXIT_HOLDS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perpetual",
        description="Exact engine for perpetual approval voting rules and their axioms.",
    )
    default_jobs = int(os.environ.get("PERPETUAL_JOBS", "1"))
    parser.add_argument("--jobs", type=int, default=default_jobs,
                        help="worker processes for randomized campaigns (default from PERPETUAL_JOBS)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one rule over a sequence")
    run.add_argument("--rule", required=True, choices=sorted(set(rules._RULE_FACTORIES)))
    run.add_argument("--input", help="sequence file (JSON)")
    run.add_argument("--simple", help="canonical simple sequence, e.g. '2,1:3'")
    run.add_argument("--trace", action="store_true", help="print per-round exact states")
    run.add_argument("--max-rounds", type=int, default=10,
                     help="safety cap for the exponential rule's factorial blowup")
    run.set_defaults(handler=cmd_run)

    check = sub.add_parser("check", help="check one axiom for one rule")
    check.add_argument("--axiom", required=True,
                       choices=["dryspell", "iud", "simpleprop", "alq", "auq", "degree", "dictatorial"])
    check.add_argument("--rule", required=True, choices=sorted(set(rules._RULE_FACTORIES)))
    check.add_argument("--budget", help="bounds like 'n<=5,k<=10,samples=2000'")
    check.add_argument("--seed", type=int, help="PRNG seed (fixed default for reproducibility)")
    check.add_argument("--bound", help="dry-spell bound to test, e.g. '2n-2' or '7'")
    check.add_argument("--mode", choices=["auto", "construction", "exhaustive", "random"],
                       default="auto", help="dry-spell search strategy")
    check.add_argument("--parties", help="party sizes for quota checks, e.g. '2,3'")
    check.add_argument("--ell", help="group-size parameter for --axiom degree")
    check.add_argument("--witness-out", help="path for the witness file on refutation")
    check.add_argument("--report", help="write a machine-readable report document here")
    check.set_defaults(handler=cmd_check)

    table = sub.add_parser("table", help="regenerate a results table from live runs")
    table.add_argument("--which", required=True, choices=["rules", "classes"])
    table.add_argument("--show-backing", action="store_true")
    table.add_argument("--json", help="also write the table as JSON to this path")
    table.add_argument("--quick", action="store_true",
                       help="smoke-test budgets (NOT the acceptance campaign sizes)")
    table.set_defaults(handler=cmd_table)

    apportion = sub.add_parser("apportion", help="apportion seats and audit quotas")
    apportion.add_argument("--method", required=True, choices=["dhondt", "frege"])
    apportion.add_argument("--votes", required=True, help="integer votes, e.g. '4,3,1'")
    apportion.add_argument("--seats", required=True, type=int)
    apportion.add_argument("--verify-equivalence", choices=["consensus", "pav", "phragmen"])
    apportion.set_defaults(handler=cmd_apportion)

    corpus_cmd = sub.add_parser("corpus", help="verify the witness corpus by replay")
    corpus_cmd.add_argument("action", choices=["verify"])
    corpus_cmd.set_defaults(handler=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except UsageError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_USAGE
    except (sequence_io.SequenceFormatError, rules.UnknownRuleError, ValueError) as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_USAGE
    except corpus.CorpusVerificationError as error:
        print(f"corpus verification failed: {error}", file=sys.stderr)
        return EXIT_REFUTED


if __name__ == "__main__":
    sys.exit(main())
