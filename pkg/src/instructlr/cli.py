"""Command-line entry point.

One verb per pipeline operation. Model-calling verbs (seed, draft, check,
run, serve) need a --config file for the gateway; the data-shuffling verbs
work from explicit paths or fall back to the configured ones.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .agreement import krippendorff_alpha, reliability_matrix
from .annotation import (
    DEFAULT_BATCH_SIZE,
    MergeResult,
    export_review_sheet,
    import_annotations,
    latest_per_annotator,
    merge_annotations,
)
from .checker import load_exemplars, run_batch
from .config import Config, ConfigError, load_config
from .core import (
    AnnotationRecord,
    CheckedDraft,
    Draft,
    SeedInstruction,
    StageReport,
    TriageStatus,
)
from .cost import format_table, load_scenarios, scenario_table, table_to_csv
from .drafts import generate_drafts, language_name
from .gateway import GatewayError
from .grammar import load_lexicon, load_rules
from .jsonl import JsonlError, append_jsonl, read_jsonl, write_jsonl
from .pipeline import PipelineError, build_gateway, format_run_report, run_pipeline
from .resources import (
    data_path,
    load_glossary,
    load_guidelines,
    load_sentences,
    load_topics,
    select_topics,
)
from .retrieval import build_index
from .seeds import SeedBatchPlan, generate_seeds
from .stats import dataset_stats, percentage, triage_stats


class CliError(Exception):
    """Bad invocation: missing flag, missing file, unusable combination."""


# ---------------------------------------------------------------------------
# Small helpers shared by the verb handlers.

def _config_of(args) -> Config | None:
    if getattr(args, "config", None) is None:
        return None
    return load_config(args.config)


def _require_config(args) -> Config:
    config = _config_of(args)
    if config is None:
        raise CliError(f"{args.verb} requires --config")
    return config


def _pick(explicit, config_value, flag: str, verb: str) -> Path:
    """Explicit flag wins; configured path is the fallback."""
    if explicit is not None:
        return Path(explicit)
    if config_value is not None:
        return config_value
    raise CliError(f"{verb} needs {flag} or --config")


def _print_report(report: StageReport, out: Path) -> int:
    """Print the stage outcome; nonzero when any item failed."""
    print(
        f"{report.stage}: {report.produced}/{report.requested} produced, "
        f"{report.retries} retries, {len(report.failures)} failed, "
        f"{report.elapsed_seconds:.2f}s -> {out}"
    )
    for item_id, reason in report.failures:
        print(f"  failure {item_id}: {reason}", file=sys.stderr)
    return 1 if report.failures else 0


def _merge_result_to_obj(result: MergeResult) -> dict:
    return {
        "draft_id": result.draft_id,
        "needs_adjudication": result.needs_adjudication,
        "is_correct": result.is_correct,
        "final_instruction": result.final_instruction,
        "final_response": result.final_response,
        "category_tally": [
            {"category": token, "count": count}
            for token, count in result.category_tally
        ],
        "annotators": result.annotators,
    }


def _merge_result_from_obj(obj: dict) -> MergeResult:
    return MergeResult(
        draft_id=obj["draft_id"],
        needs_adjudication=obj["needs_adjudication"],
        is_correct=obj["is_correct"],
        final_instruction=obj.get("final_instruction"),
        final_response=obj.get("final_response"),
        category_tally=tuple(
            (entry["category"], entry["count"])
            for entry in obj.get("category_tally", [])
        ),
        annotators=obj["annotators"],
    )


def read_merge_results(path: str | Path) -> dict[str, MergeResult]:
    results: dict[str, MergeResult] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            result = _merge_result_from_obj(json.loads(line))
            results[result.draft_id] = result
    return results


def _read_annotations(args) -> tuple[list[AnnotationRecord], Path]:
    config = _config_of(args)
    journal = _pick(
        args.annotations,
        config.paths.annotations if config else None,
        "--annotations",
        args.verb,
    )
    if not journal.exists():
        raise CliError(f"no annotations at {journal}")
    return read_jsonl(journal, AnnotationRecord), journal


# ---------------------------------------------------------------------------
# Verb handlers.

def cmd_seed(args) -> int:
    config = _require_config(args)
    gateway = build_gateway(config)
    topics = load_topics(args.topics)
    selected = select_topics(topics, config.pipeline.topics)
    count = args.count or config.pipeline.seeds_per_topic
    plan = SeedBatchPlan({t.name_fr: count for t in selected})
    seeds, report = generate_seeds(
        plan, selected, gateway, max_retries=config.pipeline.max_retries
    )
    out = _pick(args.out, config.paths.seeds, "--out", "seed")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(seeds, out)
    return _print_report(report, out)


def cmd_draft(args) -> int:
    config = _require_config(args)
    gateway = build_gateway(config)
    seeds_path = _pick(args.seeds, config.paths.seeds, "--seeds", "draft")
    seeds = read_jsonl(seeds_path, SeedInstruction)
    lang = args.lang or config.pipeline.lang
    drafts, report = generate_drafts(
        seeds,
        load_topics(),
        lang,
        gateway,
        load_guidelines(lang=lang),
        max_retries=config.pipeline.max_retries,
    )
    out = _pick(args.out, config.paths.drafts, "--out", "draft")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(drafts, out)
    return _print_report(report, out)


def cmd_check(args) -> int:
    config = _require_config(args)
    gateway = build_gateway(config)
    lang = config.pipeline.lang
    drafts_path = _pick(args.in_path, config.paths.drafts, "--in", "check")
    drafts = read_jsonl(drafts_path, Draft)

    if args.kb:
        kb_dir = Path(args.kb)
        sentences = load_sentences(kb_dir / "sentences.txt")
        rules = load_rules(kb_dir / "rules.json")
        glossary = load_glossary(kb_dir / "glossary.tsv")
    else:
        sentences = load_sentences(lang=lang)
        rules = load_rules(data_path("rules", f"{lang}.json"))
        glossary = load_glossary(lang=lang)
    kb = build_index(sentences, rules, glossary)
    lexicon_path = args.lexicon or data_path("lexicon", f"{lang}.tsv")
    lexicon = load_lexicon(lexicon_path)
    try:
        exemplars = load_exemplars(lang=lang)
    except FileNotFoundError:
        exemplars = []

    checked, summary, report = run_batch(
        drafts,
        kb,
        lexicon,
        gateway,
        exemplars=exemplars,
        n_shot=config.pipeline.n_shot,
        language_name=language_name(lang),
        max_retries=config.pipeline.max_retries,
    )
    out = _pick(args.out, config.paths.checked, "--out", "check")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(checked, out)
    code = _print_report(report, out)
    shares = summary.percentages()
    print(
        f"triage: accepted {summary.accepted} ({shares['accepted']:.2f}%), "
        f"low {summary.low_priority} ({shares['low_priority']:.2f}%), "
        f"top {summary.top_priority} ({shares['top_priority']:.2f}%)"
    )
    return code


def cmd_export_review(args) -> int:
    config = _config_of(args)
    checked_path = _pick(
        args.in_path,
        config.paths.checked if config else None,
        "--in",
        "export-review",
    )
    checked = read_jsonl(checked_path, CheckedDraft)
    out_dir = _pick(
        args.out_dir,
        config.paths.review_dir if config else None,
        "--out-dir",
        "export-review",
    )
    statuses = (
        (TriageStatus.from_token(args.filter),) if args.filter else None
    )
    batch_size = args.batch_size or (
        config.pipeline.review_batch_size if config else DEFAULT_BATCH_SIZE
    )
    paths = export_review_sheet(
        checked, out_dir, statuses=statuses, batch_size=batch_size
    )
    rows = sum(1 for cd in checked if cd.status is not TriageStatus.ACCEPTED)
    if statuses is not None:
        rows = sum(1 for cd in checked if cd.status in statuses)
    print(f"exported {rows} rows to {len(paths)} sheet(s)")
    for path in paths:
        print(f"  {path}")
    return 0


def cmd_import_review(args) -> int:
    config = _config_of(args)
    journal = _pick(
        args.annotations,
        config.paths.annotations if config else None,
        "--annotations",
        "import-review",
    )
    known = None
    checked_path = args.checked or (config.paths.checked if config else None)
    if checked_path is not None and Path(checked_path).exists():
        known = {
            cd.draft.id for cd in read_jsonl(checked_path, CheckedDraft)
        }
    records, errors = import_annotations(args.in_path, args.annotator, known)
    journal.parent.mkdir(parents=True, exist_ok=True)
    append_jsonl(records, journal)
    print(f"imported {len(records)} record(s) from {args.in_path} -> {journal}")
    for row_no, message in errors:
        print(f"row {row_no}: {message}", file=sys.stderr)
    return 1 if errors else 0


def cmd_merge(args) -> int:
    records, journal = _read_annotations(args)
    config = _config_of(args)
    merged = merge_annotations(latest_per_annotator(records))
    out = _pick(
        args.out,
        config.paths.work_dir / "merged.jsonl" if config else None,
        "--out",
        "merge",
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        json.dumps(_merge_result_to_obj(merged[draft_id]), ensure_ascii=False)
        for draft_id in sorted(merged)
    ]
    out.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    finals = [r for r in merged.values() if not r.needs_adjudication]
    corrected = sum(1 for r in finals if r.is_correct is False)
    print(
        f"merged {len(merged)} draft(s) from {journal}: "
        f"{len(finals)} final ({corrected} corrected), "
        f"{len(merged) - len(finals)} need adjudication -> {out}"
    )
    return 0


def cmd_agreement(args) -> int:
    records, _ = _read_annotations(args)
    matrix, draft_ids, rater_ids = reliability_matrix(
        latest_per_annotator(records)
    )
    if args.items is not None:
        if args.items < 2:
            raise CliError("--items must be at least 2")
        matrix = matrix[: args.items]
        draft_ids = draft_ids[: args.items]
    alpha = krippendorff_alpha(matrix)
    ratings = sum(1 for row in matrix for cell in row if cell is not None)
    print(
        f"alpha={alpha:.4f} items={len(draft_ids)} "
        f"raters={len(rater_ids)} ratings={ratings}"
    )
    return 0


def cmd_stats(args) -> int:
    config = _config_of(args)
    final_path = _pick(
        args.in_path, config.paths.final if config else None, "--in", "stats"
    )
    drafts = read_jsonl(final_path, Draft)
    ds = dataset_stats(drafts)

    checked = None
    checked_path = args.checked or (config.paths.checked if config else None)
    if checked_path is not None and Path(checked_path).exists():
        checked = read_jsonl(checked_path, CheckedDraft)
    merged = read_merge_results(args.merged) if args.merged else None
    triage = triage_stats(checked, merged) if checked is not None else None

    if args.json:
        payload: dict = {
            "dataset": {
                "total": ds.total,
                "instruction_words": {
                    "1-10": ds.instr_1_10,
                    "11-20": ds.instr_11_20,
                    ">20": ds.instr_over_20,
                },
                "response_words": {
                    "<50": ds.resp_under_50,
                    "50-100": ds.resp_50_100,
                    ">100": ds.resp_over_100,
                },
                "cot_count": ds.cot_count,
                "type_counts": ds.type_counts,
            }
        }
        if triage is not None:
            payload["triage"] = {
                "counts": {
                    "accepted": triage.summary.accepted,
                    "low_priority": triage.summary.low_priority,
                    "top_priority": triage.summary.top_priority,
                },
                "percentages": triage.status_percentages,
                "top_categories": [
                    {"category": token, "count": count, "pct": pct}
                    for token, count, pct in triage.top_categories
                ],
                "low_outcomes": [
                    {"outcome": name, "count": count, "pct": pct}
                    for name, count, pct in triage.low_outcomes
                ],
            }
        print(json.dumps(payload, ensure_ascii=False, indent=2))
        return 0

    total = ds.total
    print(f"records: {total}")
    print("instruction words:")
    for label, count in (
        ("1-10", ds.instr_1_10),
        ("11-20", ds.instr_11_20),
        (">20", ds.instr_over_20),
    ):
        print(f"  {label:<7} {count:>8}  {percentage(count, total):6.2f}%")
    print("response words:")
    for label, count in (
        ("<50", ds.resp_under_50),
        ("50-100", ds.resp_50_100),
        (">100", ds.resp_over_100),
    ):
        print(f"  {label:<7} {count:>8}  {percentage(count, total):6.2f}%")
    print(
        f"chain-of-thought: {ds.cot_count}  "
        f"{percentage(ds.cot_count, total):.2f}%"
    )
    print("instruction types:")
    for name, count in ds.type_counts.items():
        print(f"  {name:<16} {count:>8}  {percentage(count, total):6.2f}%")

    if triage is not None:
        s = triage.summary
        print("triage:")
        for label, count in (
            ("accepted", s.accepted),
            ("low_priority", s.low_priority),
            ("top_priority", s.top_priority),
        ):
            pct = triage.status_percentages.get(label, 0.0)
            print(f"  {label:<13} {count:>8}  {pct:6.2f}%")
        if triage.top_categories:
            print("top-priority categories:")
            for token, count, pct in triage.top_categories:
                print(f"  {token:<20} {count:>8}  {pct:6.2f}%")
        if triage.low_outcomes:
            print("low-priority outcomes:")
            for name, count, pct in triage.low_outcomes:
                print(f"  {name:<20} {count:>8}  {pct:6.2f}%")
    return 0


def cmd_cost(args) -> int:
    scenarios = load_scenarios(args.scenarios)
    rows = scenario_table(scenarios)
    if args.out:
        table_to_csv(rows, args.out)
        print(f"wrote {len(rows)} scenario(s) to {args.out}")
    else:
        print(format_table(rows))
    return 0


def cmd_run(args) -> int:
    config = _require_config(args)
    report = run_pipeline(config)
    print(format_run_report(report))
    return 0


def cmd_serve(args) -> int:
    config = _require_config(args)
    from .service import serve

    serve(config)
    return 0


# ---------------------------------------------------------------------------
# Parser wiring.

def _add_config(parser, required=False):
    parser.add_argument(
        "--config",
        required=required,
        help="TOML run configuration",
        metavar="PATH",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="instructlr",
        description="Instruction-dataset pipeline for low-resource languages",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("seed", help="generate French seed instructions")
    _add_config(p, required=True)
    p.add_argument("--topics", metavar="PATH", help="topic catalog JSON")
    p.add_argument("--count", type=int, metavar="N", help="seeds per topic")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(handler=cmd_seed)

    p = sub.add_parser("draft", help="translate seeds into target-language drafts")
    _add_config(p, required=True)
    p.add_argument("--seeds", metavar="PATH")
    p.add_argument("--lang", metavar="CODE")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(handler=cmd_draft)

    p = sub.add_parser("check", help="quality-check and triage drafts")
    _add_config(p, required=True)
    p.add_argument("--in", dest="in_path", metavar="PATH")
    p.add_argument(
        "--kb",
        metavar="DIR",
        help="directory with sentences.txt, rules.json, glossary.tsv",
    )
    p.add_argument("--lexicon", metavar="PATH")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("export-review", help="write review CSV batches")
    _add_config(p)
    p.add_argument("--in", dest="in_path", metavar="PATH")
    p.add_argument("--out-dir", metavar="DIR")
    p.add_argument(
        "--filter",
        choices=[s.value for s in TriageStatus if s is not TriageStatus.ACCEPTED],
    )
    p.add_argument("--batch-size", type=int, metavar="N")
    p.set_defaults(handler=cmd_export_review)

    p = sub.add_parser("import-review", help="import a filled review sheet")
    _add_config(p)
    p.add_argument("--annotator", required=True, metavar="ID")
    p.add_argument("--in", dest="in_path", required=True, metavar="PATH")
    p.add_argument("--annotations", metavar="PATH", help="journal to append to")
    p.add_argument("--checked", metavar="PATH", help="known drafts source")
    p.set_defaults(handler=cmd_import_review)

    p = sub.add_parser("merge", help="merge annotations by majority vote")
    _add_config(p)
    p.add_argument("--annotations", metavar="PATH")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(handler=cmd_merge)

    p = sub.add_parser("agreement", help="inter-annotator agreement (alpha)")
    _add_config(p)
    p.add_argument("--annotations", metavar="PATH")
    p.add_argument("--items", type=int, metavar="N", help="use the first N items")
    p.set_defaults(handler=cmd_agreement)

    p = sub.add_parser("stats", help="dataset and triage statistics")
    _add_config(p)
    p.add_argument("--in", dest="in_path", metavar="PATH")
    p.add_argument("--checked", metavar="PATH")
    p.add_argument("--merged", metavar="PATH", help="merge verb output")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("cost", help="production-cost scenario table")
    p.add_argument("--scenarios", metavar="PATH", help="preset JSON override")
    p.add_argument("--out", metavar="PATH", help="write CSV instead of text")
    p.set_defaults(handler=cmd_cost)

    p = sub.add_parser("run", help="run all pipeline stages")
    _add_config(p, required=True)
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("serve", help="start the review REST service")
    _add_config(p, required=True)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (CliError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PipelineError, GatewayError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (JsonlError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
