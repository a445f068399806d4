"""Turn detector runs into consumable artifacts: per-project rates, per-issue
health rows, weighted health scores, and historical trend series.

The health score is a complement of the weighted mean violation rate over
enabled detectors that had at least one applicable issue:

    score = 100 * (1 - sum(weight_d * rate_d) / sum(weight_d))

Detectors with no applicable issues are excluded from the mean rather than
treated as rate zero, so absence of evidence never inflates health. The
formula is deliberately simple and documented so users can audit it;
multiplying all weights by a constant leaves the score unchanged.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import datetime

from .analytics import box_stats
from .config import EffectiveConfig
from .detectors import (
    RunContext,
    RunResult,
    _applies,
    build_value_universe,
    run_all,
    truncate_issue,
)
from .evolution import default_codebook
from .ingest import Corpus
from .model import IssueRecord
from .registry import Registry
from .typemap import default_mapping


def render_json(payload) -> str:
    """The one JSON renderer: CLI output and API responses must byte-match."""
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# --- per-project rates --------------------------------------------------------

def project_rates(result: RunResult) -> dict:
    """Violation rate per (detector, repo, project) plus cross-project spread
    per detector. Cells without applicable issues report a null rate, never
    zero: a project with no evidence is not a clean project."""
    rows = []
    per_detector: dict[str, list] = {}
    for (detector_id, repo, project), cell in sorted(result.cells.items()):
        rate = result.rate(detector_id, repo, project)
        rows.append(
            {
                "detector_id": detector_id,
                "repo": repo,
                "project": project,
                **cell.to_dict(),
                "rate": rate,
            }
        )
        if rate is not None:
            per_detector.setdefault(detector_id, []).append(rate)
    spread = {
        detector_id: box_stats(rates).to_dict()
        for detector_id, rates in sorted(per_detector.items())
    }
    return {
        "as_of": result.as_of.isoformat() if result.as_of else None,
        "evaluated_at": result.now.isoformat(),
        "config_fingerprint": result.config_fingerprint,
        "detector_params": result.enabled_params,
        "cells": rows,
        "cross_project": spread,
    }


# --- issue health ---------------------------------------------------------------

@dataclass(frozen=True)
class IssueHealth:
    issue_key: str
    rows: list  # {"detector_id", "status", "explanation"}

    def to_dict(self) -> dict:
        return {"issue_key": self.issue_key, "rows": self.rows}


def issue_health(
    issue: IssueRecord,
    cfg: EffectiveConfig,
    registry: Registry,
    as_of: datetime | None = None,
    now: datetime | None = None,
    corpus: Corpus | None = None,
    repo: str | None = None,
) -> IssueHealth:
    """One row per registered detector: ok / violation / not_applicable /
    disabled. Disabled detectors stay visible rather than vanishing.

    When the issue's corpus is at hand it feeds the repo-wide value universe
    for the consistency check; otherwise the universe is built from the issue
    alone.
    """
    book = default_codebook()
    mapping = default_mapping()
    if as_of is not None:
        cut = truncate_issue(issue, as_of, book)
        if cut is None:
            rows = [
                {"detector_id": spec.id, "status": "not_applicable",
                 "explanation": "issue did not exist yet"}
                for spec in registry
            ]
            return IssueHealth(issue_key=issue.key, rows=rows)
        issue = cut
    if now is None:
        now = as_of or _issue_horizon(issue)
    ctx = RunContext(now=now, book=book, mapping=mapping)
    if corpus is not None and repo is not None and repo in corpus.repos:
        universe_issues = [
            i for project in corpus.repos[repo].values() for i in project
        ]
        if as_of is not None:
            universe_issues = [
                t for t in (truncate_issue(i, as_of, book) for i in universe_issues) if t
            ]
    else:
        universe_issues = [issue]
    ctx.universe = build_value_universe(universe_issues, book)

    rows = []
    for spec in registry:
        det_cfg = cfg.detectors[spec.id]
        if not det_cfg.enabled:
            rows.append({"detector_id": spec.id, "status": "disabled",
                         "explanation": "disabled by configuration"})
            continue
        if not _applies(det_cfg.params, issue, mapping):
            rows.append({"detector_id": spec.id, "status": "not_applicable",
                         "explanation": "issue type out of scope"})
            continue
        result = spec.run(issue, det_cfg.params, ctx)
        if not result.applicable:
            rows.append({"detector_id": spec.id, "status": "not_applicable",
                         "explanation": "preconditions not met"})
        elif result.violations:
            rows.append({
                "detector_id": spec.id,
                "status": "violation",
                "explanation": "; ".join(v.explanation for v in result.violations),
            })
        else:
            rows.append({"detector_id": spec.id, "status": "ok", "explanation": ""})
    return IssueHealth(issue_key=issue.key, rows=rows)


def _issue_horizon(issue: IssueRecord) -> datetime:
    stamps = [issue.created]
    if issue.resolved:
        stamps.append(issue.resolved)
    stamps += [e.when for e in issue.changelog]
    stamps += [c.when for c in issue.comments]
    return max(stamps)


# --- weighted score ----------------------------------------------------------------

@dataclass(frozen=True)
class HealthScore:
    score: float | None  # None when no detector had applicable issues
    contributions: list  # {"detector_id", "weight", "rate", "applicable"}

    def to_dict(self) -> dict:
        return {"score": self.score, "contributions": self.contributions}


def health_score(result: RunResult, cfg: EffectiveConfig) -> HealthScore:
    per_detector: dict[str, dict] = {}
    for (detector_id, _, _), cell in result.cells.items():
        agg = per_detector.setdefault(detector_id, {"applicable": 0, "violating": 0})
        agg["applicable"] += cell.applicable
        agg["violating"] += cell.violating

    contributions = []
    weighted = 0.0
    total_weight = 0.0
    for detector_id in sorted(per_detector):
        agg = per_detector[detector_id]
        weight = cfg.detectors[detector_id].weight
        if agg["applicable"] == 0:
            contributions.append(
                {"detector_id": detector_id, "weight": weight, "rate": None,
                 "applicable": 0}
            )
            continue
        rate = agg["violating"] / agg["applicable"]
        contributions.append(
            {"detector_id": detector_id, "weight": weight, "rate": rate,
             "applicable": agg["applicable"]}
        )
        weighted += weight * rate
        total_weight += weight
    score = 100.0 * (1.0 - weighted / total_weight) if total_weight > 0 else None
    return HealthScore(score=score, contributions=contributions)


# --- trends ---------------------------------------------------------------------------

def trend_series(
    corpus: Corpus,
    cfg: EffectiveConfig,
    registry: Registry,
    dates,
) -> list[dict]:
    """Health score and per-detector rates at each date, ascending."""
    points = []
    for date in sorted(dates):
        result = run_all(corpus, cfg, registry, as_of=date)
        score = health_score(result, cfg)
        rates = {}
        for (detector_id, _, _), cell in result.cells.items():
            agg = rates.setdefault(detector_id, {"applicable": 0, "violating": 0})
            agg["applicable"] += cell.applicable
            agg["violating"] += cell.violating
        points.append(
            {
                "date": date.isoformat(),
                "score": score.score,
                "rates": {
                    d: (a["violating"] / a["applicable"] if a["applicable"] else None)
                    for d, a in sorted(rates.items())
                },
                "violations": len(result.violations),
            }
        )
    return points


# --- rendering ---------------------------------------------------------------------

def run_payload(result: RunResult, cfg: EffectiveConfig) -> dict:
    return {
        "projects": project_rates(result),
        "score": health_score(result, cfg).to_dict(),
        "violations": [v.to_dict() for v in result.violations],
    }


def rates_csv(payload: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["detector_id", "repo", "project", "applicable", "not_applicable",
         "violating_issues", "violations", "rate"]
    )
    for row in payload["cells"]:
        writer.writerow(
            [row["detector_id"], row["repo"], row["project"], row["applicable"],
             row["not_applicable"], row["violating_issues"], row["violations"],
             "" if row["rate"] is None else f"{row['rate']:.6f}"]
        )
    return buf.getvalue()


def rates_table(payload: dict, score: dict) -> str:
    lines = []
    header = f"{'detector':<28}{'repo':<14}{'project':<14}{'appl':>6}{'viol':>6}  rate"
    lines.append(header)
    lines.append("-" * len(header))
    for row in payload["cells"]:
        rate = "n/a" if row["rate"] is None else f"{100 * row['rate']:.1f}%"
        lines.append(
            f"{row['detector_id']:<28}{row['repo']:<14}{row['project']:<14}"
            f"{row['applicable']:>6}{row['violating_issues']:>6}  {rate}"
        )
    if score["score"] is None:
        lines.append("health score: n/a (no applicable issues)")
    else:
        lines.append(f"health score: {score['score']:.1f}")
    return "\n".join(lines) + "\n"
