"""Operator entry point: run workloads, run the adaptive-logic ablation,
validate rule files, analyze record logs, and replay resource traces.

Every subcommand validates its inputs before creating any output, writes
under ``--out``, and fails with a single-line machine-parsable error on
stderr (exit status 2) when validation fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import metrics
from .config import Settings, load_settings
from .executors import ExecutionRecord, WorkloadReport, compare_reports, run_workload
from .resources import DEFAULT_ALPHA, ResourceMonitor, TraceReplaySource, pressure
from .rules import load_rules, revalidate_rules, exemplar_registry, RuleRegistry, save_rules
from .types import AnswerType, RoutingError, RoutingMode, ValidationError
from .workload import WorkloadItem, generate_mixed_workload, load_workload_jsonl

_MODE_NAMES = {
    "adaptive": RoutingMode.ADAPTIVE,
    "forced-hybrid": RoutingMode.FORCED_HYBRID,
    "forced-neural": RoutingMode.FORCED_NEURAL,
    "forced-symbolic": RoutingMode.FORCED_SYMBOLIC,
}

RECORD_COLUMNS = (
    "id", "dataset", "decided_path", "final_path", "reason", "kappa",
    "kappa_eff", "pressure", "latency_s", "success", "correct", "confidence",
    "fusion_case", "retries", "timed_out", "cost", "answer_type", "answer_value",
)


def _answer_value_str(rec: ExecutionRecord) -> tuple[str, str]:
    if rec.answer is None:
        return "", ""
    if rec.answer.answer_type is AnswerType.DATE:
        y, m, d = rec.answer.value  # type: ignore[misc]
        return rec.answer.answer_type.value, f"{y:04d}-{m:02d}-{d:02d}"
    return rec.answer.answer_type.value, str(rec.answer.value)


def write_records_csv(records: list[ExecutionRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        for r in records:
            answer_type, answer_value = _answer_value_str(r)
            writer.writerow([
                r.query_id,
                r.dataset,
                r.decision.path.value,
                r.final_path.value,
                r.decision.reason.value,
                repr(r.breakdown.kappa),
                repr(r.breakdown.kappa_eff),
                repr(r.decision.pressure),
                repr(r.latency_s),
                int(r.success),
                "" if r.correct is None else int(r.correct),
                repr(r.confidence),
                r.fusion_case.value if r.fusion_case else "",
                r.retries,
                int(r.timed_out),
                repr(r.cost),
                answer_type,
                answer_value,
            ])


def write_decisions_jsonl(records: list[ExecutionRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            d = r.decision
            fh.write(json.dumps({
                "id": r.query_id,
                "kappa_eff": d.kappa_eff,
                "pressure": d.pressure,
                "thresholds": {
                    "t_low_k": d.thresholds.t_low_k,
                    "t_high_k": d.thresholds.t_high_k,
                    "t_low_r": d.thresholds.t_low_r,
                    "t_high_r": d.thresholds.t_high_r,
                },
                "utilities": (
                    {p.value: u for p, u in sorted(d.utilities.items(), key=lambda kv: kv[0].value)}
                    if d.utilities else None
                ),
                "path": d.path.value,
                "reason": d.reason.value,
            }, sort_keys=True) + "\n")


def write_thresholds_csv(report: WorkloadReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["completed", "t_low_k", "t_high_k", "t_low_r", "t_high_r"])
        for completed, th in report.trajectory:
            writer.writerow([completed, repr(th.t_low_k), repr(th.t_high_k),
                             repr(th.t_low_r), repr(th.t_high_r)])


def write_report_json(report_dict: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_dict, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _prepare_out_dir(out: str, overwrite: bool) -> None:
    if os.path.isdir(out) and os.listdir(out) and not overwrite:
        raise ValidationError(
            f"output directory {out!r} is not empty; pass --overwrite to reuse it"
        )
    os.makedirs(out, exist_ok=True)


def _load_inputs(args: argparse.Namespace) -> tuple[Settings, list[WorkloadItem], RuleRegistry]:
    overrides: dict = {"control": {"mode": _MODE_NAMES[args.mode].value}}
    settings = load_settings(args.config, overrides)
    if args.workload:
        if not os.path.isfile(args.workload):
            raise ValidationError(f"workload file not found: {args.workload}")
        items = load_workload_jsonl(args.workload)
    else:
        items = generate_mixed_workload(args.n, args.seed)
    if args.rules:
        if not os.path.isfile(args.rules):
            raise ValidationError(f"rule file not found: {args.rules}")
        registry = load_rules(args.rules, settings.min_support)
    else:
        registry = exemplar_registry(settings.min_support)
    return settings, items, registry


def _run_one(settings: Settings, items: list[WorkloadItem], registry: RuleRegistry,
             seed: int, mode: RoutingMode) -> WorkloadReport:
    from dataclasses import replace as dc_replace

    cfg = dc_replace(settings.control, mode=mode)
    model = settings.model if settings.model.seed else dc_replace(settings.model, seed=seed)
    return run_workload(
        items, cfg, model, seed=seed, registry=registry, thresholds=settings.thresholds
    )


def cmd_run(args: argparse.Namespace) -> int:
    settings, items, registry = _load_inputs(args)
    _prepare_out_dir(args.out, args.overwrite)
    report = _run_one(settings, items, registry, args.seed, _MODE_NAMES[args.mode])
    write_report_json(report.to_dict(), os.path.join(args.out, "report.json"))
    write_records_csv(report.records, os.path.join(args.out, "records.csv"))
    write_decisions_jsonl(report.records, os.path.join(args.out, "decisions.jsonl"))
    write_thresholds_csv(report, os.path.join(args.out, "thresholds.csv"))
    d = report.to_dict()
    print(
        f"processed {d['n']} queries mode={d['mode']} "
        f"mean_latency={d['latency']['mean']:.3f}s em={d['exact_match']['rate']}"
    )
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    settings, items, registry = _load_inputs(args)
    _prepare_out_dir(args.out, args.overwrite)
    adaptive = _run_one(settings, items, registry, args.seed, RoutingMode.ADAPTIVE)
    forced = _run_one(settings, items, registry, args.seed, RoutingMode.FORCED_HYBRID)
    comparison = compare_reports(adaptive, forced)
    write_report_json(adaptive.to_dict(), os.path.join(args.out, "report_adaptive.json"))
    write_report_json(forced.to_dict(), os.path.join(args.out, "report_forced_hybrid.json"))
    write_report_json(comparison, os.path.join(args.out, "ablation.json"))
    print("configuration      mean_latency_s   em_rate")
    print(f"adaptive           {comparison['adaptive_mean_latency_s']:>14.3f}   "
          f"{comparison['adaptive_em']}")
    print(f"forced-hybrid      {comparison['forced_mean_latency_s']:>14.3f}   "
          f"{comparison['forced_em']}")
    print(f"delta latency: {comparison['delta_latency_pct']:.1f}%  "
          f"delta em: {comparison['delta_em_pp']:.2f}pp  "
          f"cohens d (latency): {comparison['cohens_d_latency']:.3f}")
    return 0


def cmd_validate_rules(args: argparse.Namespace) -> int:
    if not os.path.isfile(args.rules):
        raise ValidationError(f"rule file not found: {args.rules}")
    if not os.path.isfile(args.corpus):
        raise ValidationError(f"corpus file not found: {args.corpus}")
    registry = load_rules(args.rules, min_support=0)
    corpus: list[str] = []
    with open(args.corpus, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("{"):
                try:
                    corpus.append(str(json.loads(line)["text"]))
                    continue
                except (KeyError, ValueError):
                    pass
            corpus.append(line)
    kept, dropped = revalidate_rules(registry.rules(), corpus, args.min_support)
    save_rules(kept, args.out_file)
    print(f"kept {len(kept)} dropped {len(dropped)} (min_support={args.min_support})")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    if not os.path.isfile(args.records):
        raise ValidationError(f"records file not found: {args.records}")
    report = metrics.analyze_records(args.records, seed=args.seed)
    _prepare_out_dir(args.out, args.overwrite)
    with open(os.path.join(args.out, "stats.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    print(
        f"n={report.n} pearson_r={report.pearson_r:.4f} "
        f"spearman_rho={report.spearman_rho:.4f} r2={report.r_squared:.4f} "
        f"slope={report.slope:.4f} intercept={report.intercept:.4f}"
    )
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    if not os.path.isfile(args.trace):
        raise ValidationError(f"trace file not found: {args.trace}")
    source = TraceReplaySource(args.trace)
    _prepare_out_dir(args.out, args.overwrite)
    monitor = ResourceMonitor(alpha=args.alpha)
    out_path = os.path.join(args.out, "smoothed.csv")
    n = 0
    max_p = 0.0
    sum_p = 0.0
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_ms", "cpu", "gpu", "mem", "power", "pressure"])
        while True:
            sample = source.read()
            if sample is None:
                break
            s = monitor.ingest_sample(sample)
            p = pressure(s)
            writer.writerow([repr(s.t_ms), repr(s.cpu), repr(s.gpu), repr(s.mem),
                             repr(s.power), repr(p)])
            n += 1
            sum_p += p
            max_p = max(max_p, p)
    mean_p = sum_p / n if n else 0.0
    print(f"replayed {n} samples mean_pressure={mean_p:.4f} max_pressure={max_p:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptroute",
        description="Adaptive query routing: run workloads, ablations, and analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--workload", help="workload JSONL; omit to generate the default mix")
        p.add_argument("--rules", help="rule JSONL; omit for the built-in exemplar set")
        p.add_argument("--config", help="TOML settings file")
        p.add_argument("--mode", choices=sorted(_MODE_NAMES), default="adaptive")
        p.add_argument("--seed", type=int, required=True, help="simulation seed")
        p.add_argument("--n", type=int, default=1000,
                       help="generated workload size when --workload is omitted")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--overwrite", action="store_true",
                       help="allow writing into a non-empty output directory")

    p_run = sub.add_parser("run", help="process a workload and write reports")
    add_run_args(p_run)
    p_run.set_defaults(func=cmd_run)

    p_ablate = sub.add_parser(
        "ablate", help="matched adaptive vs forced-hybrid runs on the same queries"
    )
    add_run_args(p_ablate)
    p_ablate.set_defaults(func=cmd_ablate)

    p_rules = sub.add_parser("validate-rules", help="recount supports over a corpus")
    p_rules.add_argument("--rules", required=True)
    p_rules.add_argument("--corpus", required=True,
                         help="JSONL with a text field, or plain text lines")
    p_rules.add_argument("--min-support", type=int, default=5)
    p_rules.add_argument("--out-file", required=True, help="filtered rule file to write")
    p_rules.set_defaults(func=cmd_validate_rules)

    p_stats = sub.add_parser("stats", help="statistics over a records.csv")
    p_stats.add_argument("--records", required=True)
    p_stats.add_argument("--seed", type=int, default=0)
    p_stats.add_argument("--out", required=True)
    p_stats.add_argument("--overwrite", action="store_true")
    p_stats.set_defaults(func=cmd_stats)

    p_replay = sub.add_parser("replay", help="replay a resource trace through the smoother")
    p_replay.add_argument("--trace", required=True)
    p_replay.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p_replay.add_argument("--out", required=True)
    p_replay.add_argument("--overwrite", action="store_true")
    p_replay.set_defaults(func=cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RoutingError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
