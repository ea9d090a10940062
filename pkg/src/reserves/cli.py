"""Command line surface: allocate, check, gen, verify.

Documents are JSON. Exit codes: 0 success / all axioms hold, 1 axiom
failure, 2 input error, 3 rule precondition error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from typing import Optional

from . import axioms, oracle
from .generator import random_instance_document
from .model import (Instance, Matching, ParseError, ValidationError,
                    parse_instance, validate_matching)
from .rules import (PreconditionError, UnreservedSplit, deferred_acceptance,
                    minimum_guarantees, over_and_above, rr, soft_reserves, srr)

EXIT_OK = 0
EXIT_AXIOM_FAIL = 1
EXIT_INPUT = 2
EXIT_PRECONDITION = 3

RULES = ("rr", "srr", "mg", "oaa", "da", "soft")
MATCHING_AXIOMS = ("eligibility", "respect_priorities", "nonwasteful", "max_size",
                   "max_beneficiary", "order_preservation")
HARNESS_AXIOMS = ("strategyproofness", "weak_nonbossiness")


# ---------------------------------------------------------------------------
# names and documents
# ---------------------------------------------------------------------------

def category_display_names(inst: Instance) -> dict[int, str]:
    """Display name per category id. The unreserved pair is suffixed with
    [first]/[last] only when both pools hold units; otherwise the plain name
    unambiguously refers to the nonempty pool."""
    cf, cl = inst.unreserved_first_id, inst.unreserved_last_id
    both = (cf is not None and cl is not None
            and inst.categories[cf].quota > 0 and inst.categories[cl].quota > 0)
    names = {}
    for c, cat in enumerate(inst.categories):
        if cat.kind.is_unreserved and both:
            names[c] = cat.name + ("[first]" if c == cf else "[last]")
        else:
            names[c] = cat.name
    return names


def category_id_by_name(inst: Instance) -> dict[str, int]:
    rev: dict[str, int] = {}
    for c, nm in category_display_names(inst).items():
        if nm in rev and inst.categories[c].quota == 0:
            continue
        rev[nm] = c
    return rev


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from None


def load_instance(path: str) -> tuple[Instance, dict]:
    raw = _read(path)
    inst = parse_instance(raw)
    return inst, json.loads(raw.decode("utf-8"))


def parse_split_flag(text: str) -> UnreservedSplit:
    try:
        q1, q2 = (int(part) for part in text.split(","))
    except ValueError:
        raise ParseError(f"--split must be 'q1,q2', got {text!r}") from None
    return UnreservedSplit(q1, q2)


def resolve_split(inst: Instance, doc: dict, flag: Optional[str],
                  required: bool) -> Optional[UnreservedSplit]:
    """CLI split: the flag wins, else the document's explicit one; rules that
    need a split fail without either."""
    if flag is not None:
        return parse_split_flag(flag)
    if "unreserved_split" in doc:
        sp = doc["unreserved_split"]
        return UnreservedSplit(sp["first"], sp["last"])
    if required:
        raise PreconditionError("rule needs --split q1,q2 (or unreserved_split in the instance)")
    return None


def effective_instance(inst: Instance, split: Optional[UnreservedSplit]) -> Instance:
    if split is None or not inst.has_unreserved:
        return inst
    return inst.with_split(split.q1, split.q2)


def parse_matching_doc(inst: Instance, raw: bytes) -> Matching:
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ParseError(f"invalid matching JSON: {e}") from None
    if isinstance(doc, dict) and "assignment" in doc:
        doc = doc["assignment"]
    if not isinstance(doc, dict):
        raise ParseError("matching document must be an object with an 'assignment' map")
    agent_ids = {nm: i for i, nm in enumerate(inst.agent_names)}
    cat_ids = category_id_by_name(inst)
    assignment = {}
    for agent, cat in doc.items():
        if agent not in agent_ids:
            raise ValidationError(f"unknown agent {agent!r} in matching")
        if not isinstance(cat, str) or cat not in cat_ids:
            raise ValidationError(f"unknown category {cat!r} in matching")
        assignment[agent_ids[agent]] = cat_ids[cat]
    m = Matching(assignment)
    validate_matching(inst, m)
    return m


def matching_doc(inst: Instance, m: Matching) -> dict[str, str]:
    names = category_display_names(inst)
    return {inst.agent_names[a]: names[c] for a, c in m.pairs()}


def utilization_doc(inst: Instance, m: Matching) -> dict:
    names = category_display_names(inst)
    out: dict[str, dict[str, int]] = {}
    for c, cat in enumerate(inst.categories):
        entry = out.setdefault(names[c], {"used": 0, "quota": 0})
        entry["used"] += m.count_in(c)
        entry["quota"] += cat.quota
    return out


def _names_in_witness(inst: Instance, doc: dict) -> dict:
    cat_names = category_display_names(inst)
    for key, val in doc.items():
        if key in ("agent", "envier", "envied", "affected", "agent_early", "agent_late"):
            doc[key] = inst.agent_names[val]
        elif key.startswith("category") and isinstance(val, int):
            doc[key] = cat_names[val]
    return doc


def report_doc(inst: Instance, report: axioms.AxiomReport) -> dict:
    doc = asdict(report)
    doc["witnesses"] = [_names_in_witness(inst, w) for w in doc["witnesses"]]
    if doc["note"] is None:
        del doc["note"]
    return doc


def _emit(args, payload: dict | list) -> None:
    if args.format == "json":
        text = json.dumps(payload, indent=2)
    else:
        text = _as_table(payload)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _as_table(payload, indent: str = "") -> str:
    lines = []
    if isinstance(payload, dict):
        for key, val in payload.items():
            if isinstance(val, (dict, list)) and val:
                lines.append(f"{indent}{key}:")
                lines.append(_as_table(val, indent + "  "))
            else:
                lines.append(f"{indent}{key}: {val if val or val == 0 else '-'}")
    elif isinstance(payload, list):
        for item in payload:
            if isinstance(item, (dict, list)):
                lines.append(_as_table(item, indent + "  ").rstrip())
                lines.append("")
            else:
                lines.append(f"{indent}- {item}")
        while lines and not lines[-1]:
            lines.pop()
    else:
        lines.append(f"{indent}{payload}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _run_rule(rule: str, inst: Instance, doc: dict, args):
    """Returns (matching, evaluation instance, split used, trace or None)."""
    if rule == "rr":
        matching, trace = rr(inst)
        return matching, inst, None, trace
    if rule == "srr":
        split = resolve_split(inst, doc, args.split, required=True)
        return srr(inst, split), effective_instance(inst, split), split, None
    if rule == "soft":
        split = resolve_split(inst, doc, args.split, required=True)
        return soft_reserves(inst, split), effective_instance(inst, split), split, None
    if rule == "mg":
        matching = minimum_guarantees(inst)
        split = UnreservedSplit(0, inst.unreserved_quota) if inst.has_unreserved else None
        return matching, effective_instance(inst, split), split, None
    if rule == "oaa":
        matching = over_and_above(inst)
        split = UnreservedSplit(inst.unreserved_quota, 0) if inst.has_unreserved else None
        return matching, effective_instance(inst, split), split, None
    if rule == "da":
        if not args.prefs:
            raise PreconditionError("rule da needs --prefs <path>")
        prefs_doc = json.loads(_read(args.prefs).decode("utf-8"))
        if isinstance(prefs_doc, dict) and "prefs" in prefs_doc:
            prefs_doc = prefs_doc["prefs"]
        if not isinstance(prefs_doc, dict):
            raise ParseError("preferences document must be an object with a 'prefs' map")
        agent_ids = {nm: i for i, nm in enumerate(inst.agent_names)}
        cat_ids = category_id_by_name(inst)
        prefs = {}
        for agent, cats in prefs_doc.items():
            if agent not in agent_ids:
                raise ValidationError(f"unknown agent {agent!r} in preferences")
            try:
                prefs[agent_ids[agent]] = [cat_ids[c] for c in cats]
            except (KeyError, TypeError):
                raise ValidationError(f"bad category list for agent {agent!r}") from None
        return deferred_acceptance(inst, prefs), inst, None, None
    raise ValidationError(f"unknown rule {args.rule!r} (choose from {', '.join(RULES)})")


def cmd_allocate(args) -> int:
    inst, doc = load_instance(args.instance)
    matching, work, split, trace = _run_rule(args.rule, inst, doc, args)
    out = {
        "rule": args.rule,
        "assignment": matching_doc(work, matching),
        "size": matching.size(),
        "utilization": utilization_doc(work, matching),
    }
    if split is not None:
        out["split"] = {"first": split.q1, "last": split.q2}
    if trace is not None:
        out["ms_total"] = trace.ms_total
        out["rejected"] = sorted(inst.agent_names[a] for a in trace.rejected)
        out["trace"] = [
            {"agent": inst.agent_names[d.agent], "rejected": d.rejected,
             "ms_tested": d.ms_tested}
            for d in trace.decisions
        ]
    _emit(args, out)
    return EXIT_OK


def cmd_check(args) -> int:
    inst, doc = load_instance(args.instance)
    if bool(args.matching) == bool(args.rule):
        raise ValidationError("give exactly one of --matching or --rule")

    requested = MATCHING_AXIOMS if args.axioms == "all" else tuple(
        a.strip() for a in args.axioms.split(",") if a.strip())
    for a in requested:
        if a not in MATCHING_AXIOMS + HARNESS_AXIOMS:
            raise ValidationError(f"unknown axiom {a!r}")

    if args.rule:
        matching, work, split, _ = _run_rule(args.rule, inst, doc, args)
        if args.axioms == "all" and args.rule in ("rr", "srr", "soft"):
            requested = requested + HARNESS_AXIOMS
    else:
        split = resolve_split(inst, doc, args.split, required=False)
        work = effective_instance(inst, split)
        matching = parse_matching_doc(work, _read(args.matching))

    harness_rule = {"soft": "soft_reserves"}.get(args.rule, args.rule)
    reports = []
    for axiom in requested:
        if axiom == "eligibility":
            rep = axioms.check_eligibility(work, matching)
        elif axiom == "respect_priorities":
            rep = axioms.check_respect_priorities(work, matching)
        elif axiom == "nonwasteful":
            rep = axioms.check_nonwasteful(work, matching)
        elif axiom == "max_size":
            rep = axioms.check_max_size(work, matching)
        elif axiom == "max_beneficiary":
            if args.axioms == "all" and not work.preferential_ids:
                continue
            rep = axioms.check_max_beneficiary(work, matching)
        elif axiom == "order_preservation":
            if args.axioms == "all" and not work.has_unreserved:
                continue
            rep = axioms.check_order_preservation(work, matching)
        else:  # harnesses re-run the rule on manipulated instances
            if not args.rule:
                raise ValidationError(f"axiom {axiom!r} needs --rule, not a fixed matching")
            rep = getattr(axioms, f"check_{axiom}")(
                harness_rule, inst, budget=args.manipulation_budget, split=split)
        reports.append(report_doc(work, rep))

    _emit(args, reports)
    return EXIT_OK if all(r["holds"] for r in reports) else EXIT_AXIOM_FAIL


def cmd_gen(args) -> int:
    doc = random_instance_document(
        args.agents, args.categories, max_quota=args.max_quota,
        eligibility_density=args.eligibility_density, tie_prob=args.tie_prob,
        seed=args.seed, unreserved=args.unreserved)
    _emit(args, doc)
    return EXIT_OK


def cmd_verify(args) -> int:
    passed = failed = skipped = 0
    first_discrepancy = None
    for idx in range(args.count):
        doc = random_instance_document(
            args.max_agents, args.categories, max_quota=args.max_quota,
            eligibility_density=args.eligibility_density, tie_prob=args.tie_prob,
            seed=args.seed + idx, unreserved=args.unreserved)
        inst = parse_instance(json.dumps(doc))
        problems = []
        try:
            rep = oracle.verify_characterization(inst)
            if not rep.ok:
                problems.append(f"characterization mismatch: rule-only="
                                f"{rep.only_rule_side} axiom-only={rep.only_axiom_side}")
        except oracle.OracleBoundError as e:
            print(f"instance {idx}: skipped characterization ({e})", file=sys.stderr)
            skipped += 1

        matching, _ = rr(inst)
        for name, rep2 in (
            ("eligibility", axioms.check_eligibility(inst, matching)),
            ("respect_priorities", axioms.check_respect_priorities(inst, matching)),
            ("nonwasteful", axioms.check_nonwasteful(inst, matching)),
            ("max_size", axioms.check_max_size(inst, matching)),
            ("strategyproofness",
             axioms.check_strategyproofness("rr", inst, args.manipulation_budget)),
            ("weak_nonbossiness",
             axioms.check_weak_nonbossiness("rr", inst, args.manipulation_budget)),
        ):
            if not rep2.holds:
                problems.append(f"rr violates {name}: {rep2.witnesses[:1]}")

        if inst.has_unreserved:
            split = UnreservedSplit(0, inst.unreserved_quota)
            sm = srr(inst, split)
            work = inst.with_split(split.q1, split.q2)
            for name, rep2 in (
                ("eligibility", axioms.check_eligibility(work, sm)),
                ("respect_priorities", axioms.check_respect_priorities(work, sm)),
                ("max_beneficiary", axioms.check_max_beneficiary(work, sm)),
                ("order_preservation", axioms.check_order_preservation(inst, sm, split)),
            ):
                if not rep2.holds:
                    problems.append(f"srr violates {name}: {rep2.witnesses[:1]}")

        if problems:
            failed += 1
            if first_discrepancy is None:
                first_discrepancy = (idx, problems[0])
        else:
            passed += 1

    print(f"verified {args.count} instances: {passed} passed, {failed} failed, "
          f"{skipped} skipped characterization (bound)")
    if first_discrepancy is not None:
        print(f"first discrepancy at instance {first_discrepancy[0]}: "
              f"{first_discrepancy[1]}")
    return EXIT_OK if failed == 0 else EXIT_AXIOM_FAIL


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--out", help="write output to a file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="reserves",
                                  description="priority-respecting rationing rules")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("allocate", help="run an allocation rule on an instance")
    p.add_argument("--rule", required=True,
                   help="one of rr, srr, mg, oaa, da, soft")
    p.add_argument("--instance", required=True)
    p.add_argument("--split", help="q1,q2 partition of the unreserved quota (srr/soft)")
    p.add_argument("--prefs", help="preference lists for da")
    _add_common(p)
    p.set_defaults(fn=cmd_allocate)

    p = sub.add_parser("check", help="check axioms of a matching or a rule's output")
    p.add_argument("--instance", required=True)
    p.add_argument("--matching", help="matching document path, or - for stdin")
    p.add_argument("--rule", help="check this rule's own output")
    p.add_argument("--split", help="q1,q2 for srr/soft and split-aware checks")
    p.add_argument("--prefs", help="preference lists for da")
    p.add_argument("--axioms", default="all",
                   help="comma list or 'all' (default)")
    p.add_argument("--manipulation-budget", type=int, default=8)
    _add_common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("gen", help="generate a seeded random instance")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--categories", type=int, required=True)
    p.add_argument("--max-quota", type=int, default=2)
    p.add_argument("--eligibility-density", type=float, default=0.5)
    p.add_argument("--tie-prob", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unreserved", type=int, default=0)
    _add_common(p)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("verify", help="cross-check rule outcomes against the oracle")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--max-agents", type=int, default=5)
    p.add_argument("--categories", type=int, default=2)
    p.add_argument("--max-quota", type=int, default=2)
    p.add_argument("--eligibility-density", type=float, default=0.5)
    p.add_argument("--tie-prob", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unreserved", type=int, default=0)
    p.add_argument("--manipulation-budget", type=int, default=4)
    _add_common(p)
    p.set_defaults(fn=cmd_verify)
    return top


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, ValidationError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as e:
        print(f"precondition error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
