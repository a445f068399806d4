"""Single entry point: ingest / lint / stats / cooccur / catalogue / serve.

Exit codes: 0 success, 1 usage error, 2 data error, 3 violations found when
--fail-on-violation is set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

from . import analytics, catalogue as catalogue_mod, config as config_mod, report
from .detectors import default_registry, run_all
from .ingest import (
    Corpus,
    DumpSource,
    IngestReport,
    UnreadableSource,
    load_store,
    parse_dump,
    save_store,
)
from .model import validate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VIOLATIONS = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; the contract is 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def parse_date(text: str) -> datetime:
    """ISO-8601 date or datetime; a bare date means end of that day, UTC."""
    try:
        if len(text) == 10:
            day = datetime.fromisoformat(text)
            return day.replace(tzinfo=timezone.utc) + timedelta(days=1) - timedelta(milliseconds=1)
        parsed = datetime.fromisoformat(text)
        if parsed.tzinfo is None:
            parsed = parsed.replace(tzinfo=timezone.utc)
        return parsed.astimezone(timezone.utc)
    except ValueError:
        print(f"error: not an ISO-8601 date: {text!r}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> _Parser:
    parser = _Parser(prog="itelint", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse dump files into a store")
    p_ingest.add_argument("paths", nargs="+")
    p_ingest.add_argument("--out", required=True, help="store file to write")
    p_ingest.add_argument("--repo", help="repo name (default: file stem per input)")

    p_lint = sub.add_parser("lint", help="run the detectors")
    p_lint.add_argument("store", nargs="?")
    p_lint.add_argument("--project")
    p_lint.add_argument("--as-of", dest="as_of")
    p_lint.add_argument("--config-dir", dest="config_dir",
                        default=os.environ.get("ITELINT_CONFIG_DIR"))
    p_lint.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p_lint.add_argument("--list-detectors", action="store_true")
    p_lint.add_argument("--fail-on-violation", action="store_true")

    p_stats = sub.add_parser("stats", help="evolution statistics as CSV")
    p_stats.add_argument("store")
    p_stats.add_argument("--group-by", dest="group_by",
                         choices=("activity", "theme", "code"), default="activity")

    p_cooccur = sub.add_parser("cooccur", help="issue type co-occurrence ranking")
    p_cooccur.add_argument("store")

    p_cat = sub.add_parser("catalogue", help="inspect the best-practice catalogue")
    cat_sub = p_cat.add_subparsers(dest="cat_command", required=True)
    cat_sub.add_parser("list")
    p_show = cat_sub.add_parser("show")
    p_show.add_argument("id")

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("store")
    p_serve.add_argument("--port", type=int,
                         default=int(os.environ.get("ITELINT_PORT", "8334")))
    p_serve.add_argument("--config-dir", dest="config_dir",
                         default=os.environ.get("ITELINT_CONFIG_DIR"))

    return parser


def _load(store: str) -> Corpus:
    corpus, _ = load_store(store)
    return corpus


def _filter_project(corpus: Corpus, project: str) -> Corpus:
    out = Corpus()
    for repo, proj, issue in corpus.all_issues():
        if proj == project:
            out.add(repo, issue)
    return out


def _effective(config_dir, registry, project=None):
    layers = config_mod.context_layers(config_dir, registry, project=project)
    return config_mod.resolve(layers, registry)


def cmd_ingest(args) -> int:
    corpus = Corpus()
    total = IngestReport()
    for path in args.paths:
        repo = args.repo or Path(path).stem
        try:
            part, rep = parse_dump(DumpSource(path=Path(path), repo_name=repo))
        except (UnreadableSource, json.JSONDecodeError) as exc:
            print(f"error: cannot read {path}: {exc}", file=sys.stderr)
            return EXIT_DATA
        corpus.merge(part)
        total = total.merged(rep)
    bad_records = sum(
        1 for _, _, issue in corpus.all_issues() if validate(issue)
    )
    save_store(corpus, total, args.out)
    print(
        f"ingested {total.ingested} issues from {total.documents_read} documents "
        f"(skipped {total.skipped}, dropped events {total.events_dropped}, "
        f"invariant warnings {bad_records}) -> {args.out}"
    )
    return EXIT_OK


def cmd_lint(args) -> int:
    registry = default_registry()
    if args.list_detectors:
        if args.format == "json":
            sys.stdout.write(report.render_json(registry.describe()))
        else:
            for spec in registry.describe():
                params = ", ".join(f"{p['name']}={p['default']!r}" for p in spec["params"])
                bps = ",".join(spec["bp_ids"]) or "-"
                print(f"{spec['id']:<28}{spec['scope']:<6}{bps:<12}{params}")
        return EXIT_OK
    if not args.store:
        print("error: store required unless --list-detectors", file=sys.stderr)
        return EXIT_USAGE
    try:
        corpus = _load(args.store)
    except (UnreadableSource, json.JSONDecodeError, KeyError) as exc:
        print(f"error: bad store: {exc}", file=sys.stderr)
        return EXIT_DATA
    if args.project:
        corpus = _filter_project(corpus, args.project)
    try:
        cfg = _effective(args.config_dir, registry, project=args.project)
    except (config_mod.DuplicateLayerKind, config_mod.UnknownDetectorId,
            config_mod.ParamTypeMismatch, json.JSONDecodeError) as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_DATA
    as_of = parse_date(args.as_of) if args.as_of else None
    result = run_all(corpus, cfg, registry, as_of=as_of)
    payload = report.run_payload(result, cfg)
    if args.format == "json":
        sys.stdout.write(report.render_json(payload))
    elif args.format == "csv":
        sys.stdout.write(report.rates_csv(payload["projects"]))
    else:
        sys.stdout.write(report.rates_table(payload["projects"], payload["score"]))
        for violation in result.violations:
            print(f"  {violation.detector_id}: {violation.issue_key}: {violation.explanation}")
    if args.fail_on_violation and result.violations:
        return EXIT_VIOLATIONS
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        corpus = _load(args.store)
    except (UnreadableSource, json.JSONDecodeError, KeyError) as exc:
        print(f"error: bad store: {exc}", file=sys.stderr)
        return EXIT_DATA
    print("metric,group,statistic,value")
    blocks = []
    if args.group_by in ("activity", "code"):
        blocks.append(("evolution_count", analytics.evolution_counts(corpus, args.group_by)))
    blocks.append(("time_offset_days", analytics.evolution_time_offsets(corpus, args.group_by)))
    for metric, groups in blocks:
        for label, stats in analytics.summarize(groups).items():
            for stat, value in stats.to_dict().items():
                print(f"{metric},{label},{stat},{value:g}")
    return EXIT_OK


def cmd_cooccur(args) -> int:
    from .typemap import cooccurrence_rank

    try:
        corpus = _load(args.store)
    except (UnreadableSource, json.JSONDecodeError, KeyError) as exc:
        print(f"error: bad store: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"{'rank':<6}{'count':<7}{'%':<8}{'sum %':<8}codes")
    for rank, pattern in enumerate(cooccurrence_rank(corpus), start=1):
        codes = ", ".join(pattern.codes) or "(none)"
        print(f"{rank:<6}{pattern.count:<7}{pattern.percent:<8.2f}{pattern.cumulative:<8.2f}{codes}")
    return EXIT_OK


def cmd_catalogue(args) -> int:
    registry = default_registry()
    cat = catalogue_mod.load_catalogue(detector_ids=set(registry.ids()))
    if args.cat_command == "list":
        for pid in sorted(cat.practices):
            bp = cat.practices[pid]
            print(f"{pid}  {bp.name:<34} {bp.summary['objective']}")
        return EXIT_OK
    bp = cat.get(args.id)
    if bp is None:
        print(f"error: no practice {args.id}", file=sys.stderr)
        return EXIT_DATA
    print(catalogue_mod.render_practice(bp))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ApiSession, create_app

    try:
        corpus = _load(args.store)
    except (UnreadableSource, json.JSONDecodeError, KeyError) as exc:
        print(f"error: bad store: {exc}", file=sys.stderr)
        return EXIT_DATA
    # the environment variable wins over the flag, by contract
    port = int(os.environ["ITELINT_PORT"]) if os.environ.get("ITELINT_PORT") else args.port
    session = ApiSession(corpus=corpus, config_dir=args.config_dir)
    uvicorn.run(create_app(session), host="127.0.0.1", port=port)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    handlers = {
        "ingest": cmd_ingest,
        "lint": cmd_lint,
        "stats": cmd_stats,
        "cooccur": cmd_cooccur,
        "catalogue": cmd_catalogue,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
