from __future__ import annotations

import random

import pytest

from conftest import T0, at, ev, issue

from itelint.config import ConfigLayer, resolve
from itelint.detectors import corpus_horizon, run_all
from itelint.ingest import Corpus
from itelint.report import (
    health_score,
    issue_health,
    project_rates,
    render_json,
    run_payload,
    trend_series,
)


def bug(key, project="P", **kw):
    return issue(key=key, project=project, raw_type="Bug", **kw)


def corpus_with(*records):
    corpus = Corpus()
    for record in records:
        corpus.add("repo", record)
    return corpus


class TestProjectRates:
    def test_two_of_ten(self, registry, default_cfg):
        records = [
            bug(f"P-{i}", status="Closed", resolution="Fixed",
                assignee=None if i < 2 else "alice")
            for i in range(10)
        ]
        result = run_all(corpus_with(*records), default_cfg, registry)
        payload = project_rates(result)
        row = next(r for r in payload["cells"]
                   if r["detector_id"] == "missing_assignee" and r["project"] == "P")
        assert row["rate"] == pytest.approx(0.20)

    def test_zero_applicable_is_null_not_zero(self, registry, default_cfg):
        records = [bug("P-1", status="Open")]
        result = run_all(corpus_with(*records), default_cfg, registry)
        payload = project_rates(result)
        row = next(r for r in payload["cells"] if r["detector_id"] == "missing_assignee")
        assert row["rate"] is None
        assert row["applicable"] == 0

    def test_params_surfaced(self, registry, default_cfg):
        result = run_all(corpus_with(bug("P-1")), default_cfg, registry)
        payload = project_rates(result)
        assert payload["detector_params"]["missing_assignee"]["closed_statuses"]


class TestIssueHealth:
    def test_row_per_registered_detector(self, registry, default_cfg):
        health = issue_health(bug("P-1"), default_cfg, registry)
        assert len(health.rows) == len(registry.ids())

    def test_fresh_empty_issue(self, registry, default_cfg):
        record = bug("P-2", summary="hm")
        health = issue_health(record, default_cfg, registry)
        by_id = {row["detector_id"]: row for row in health.rows}
        assert by_id["sufficient_description"]["status"] == "violation"
        assert by_id["missing_assignee"]["status"] == "not_applicable"
        assert by_id["missing_severity"]["status"] == "disabled"

    def test_all_disabled(self, registry):
        layers = [ConfigLayer(kind="organisation", scope="default", settings={
            d: {"enabled": False} for d in registry.ids()
        })]
        cfg = resolve(layers, registry)
        health = issue_health(bug("P-3"), cfg, registry)
        assert {row["status"] for row in health.rows} == {"disabled"}

    def test_violation_rows_carry_explanations(self, registry, default_cfg):
        record = bug("P-4", status="Closed", resolution="Fixed")
        health = issue_health(record, default_cfg, registry)
        for row in health.rows:
            if row["status"] == "violation":
                assert row["explanation"]

    def test_as_of_before_creation(self, registry, default_cfg):
        record = bug("P-5", created=at(days=10))
        health = issue_health(record, default_cfg, registry, as_of=at(days=1))
        assert {row["status"] for row in health.rows} == {"not_applicable"}


class TestHealthScore:
    def test_all_clean_scores_hundred(self, registry, default_cfg):
        records = [bug("P-1", status="Closed", resolution="Fixed", assignee="alice",
                       priority="Major", description=" ".join(["w"] * 30),
                       summary="a summary string of the proper length!!",
                       environment="prod", components=["core"],
                       comments=[__import__("conftest").comment(at(days=1))],
                       events=[ev(at(days=1), "Status", "Closed", "Open", author="alice")])]
        # keep only detectors this record satisfies
        result = run_all(corpus_with(*records), default_cfg, registry)
        score = health_score(result, default_cfg)
        assert score.score == pytest.approx(100.0)

    def test_single_detector_total_violation_scores_zero(self, registry):
        layers = [ConfigLayer(kind="organisation", scope="default", settings={
            d: {"enabled": d == "missing_assignee"} for d in registry.ids()
        })]
        cfg = resolve(layers, registry)
        records = [bug("P-1", status="Closed", resolution="Fixed")]
        result = run_all(corpus_with(*records), cfg, registry)
        assert health_score(result, cfg).score == pytest.approx(0.0)

    def test_weighted_mean(self, registry):
        # weights 1 and 3, rates 0.0 and 0.4 -> 100 * (1 - 1.2/4) = 70
        layers = [ConfigLayer(kind="organisation", scope="default", settings={
            **{d: {"enabled": False} for d in registry.ids()},
            "missing_assignee": {"enabled": True, "weight": 1},
            "no_comments": {"enabled": True, "weight": 3},
        })]
        cfg = resolve(layers, registry)
        records = []
        for i in range(5):
            assigned = "alice"  # never violates missing_assignee
            silent = i < 2  # 2 of 5 violate no_comments
            comments = [] if silent else [__import__("conftest").comment(at(days=1))]
            records.append(bug(f"P-{i}", status="Closed", resolution="Fixed",
                               assignee=assigned, comments=comments))
        result = run_all(corpus_with(*records), cfg, registry)
        assert health_score(result, cfg).score == pytest.approx(70.0)

    def test_weight_scale_invariance(self, registry):
        def cfg_with_scale(scale):
            layers = [ConfigLayer(kind="organisation", scope="default", settings={
                **{d: {"enabled": False} for d in registry.ids()},
                "missing_assignee": {"enabled": True, "weight": 2 * scale},
                "no_comments": {"enabled": True, "weight": 3 * scale},
            })]
            return resolve(layers, registry)

        records = [bug("P-1", status="Closed", resolution="Fixed")]
        corpus = corpus_with(*records)
        cfg1, cfg2 = cfg_with_scale(1), cfg_with_scale(2)
        s1 = health_score(run_all(corpus, cfg1, registry), cfg1).score
        s2 = health_score(run_all(corpus, cfg2, registry), cfg2).score
        assert s1 == pytest.approx(s2)

    def test_no_applicable_is_none(self, registry, default_cfg):
        result = run_all(Corpus(), default_cfg, registry)
        assert health_score(result, default_cfg).score is None


class TestTrendSeries:
    def test_before_anything_existed(self, registry, default_cfg):
        corpus = corpus_with(bug("P-1", created=at(days=100)))
        points = trend_series(corpus, default_cfg, registry, [at(days=1)])
        assert points[0]["score"] is None

    def test_now_matches_current_run(self, registry, default_cfg):
        import genissues

        corpus = genissues.make_corpus(random.Random(8), 25)
        horizon = corpus_horizon(corpus)
        current = run_all(corpus, default_cfg, registry, as_of=horizon)
        point = trend_series(corpus, default_cfg, registry, [horizon])[0]
        assert point["score"] == health_score(current, default_cfg).score
        assert point["violations"] == len(current.violations)
        aggregated: dict = {}
        for (det, _, _), cell in current.cells.items():
            slot = aggregated.setdefault(det, [0, 0])
            slot[0] += cell.applicable
            slot[1] += cell.violating
        expected = {det: (v / a if a else None) for det, (a, v) in aggregated.items()}
        assert point["rates"] == expected

    def test_dates_sorted_ascending(self, registry, default_cfg):
        corpus = corpus_with(bug("P-1"))
        dates = [at(days=30), at(days=10), at(days=20)]
        points = trend_series(corpus, default_cfg, registry, dates)
        assert [p["date"] for p in points] == sorted(p["date"] for p in points)

    def test_applicable_shifts_across_mass_closing(self, registry, default_cfg):
        # ten bugs all close on day 50; closed-only detectors apply after, not before
        records = []
        for i in range(10):
            records.append(bug(
                f"P-{i}", status="Closed", resolution="Fixed", resolved=at(days=50),
                events=[ev(T0, "Status", "Open", creational=True),
                        ev(at(days=50), "Status", "Closed", "Open"),
                        ev(at(days=50), "Resolution", "Fixed", None)],
            ))
        corpus = corpus_with(*records)
        before = run_all(corpus, default_cfg, registry, as_of=at(days=40))
        after = run_all(corpus, default_cfg, registry, as_of=at(days=60))
        cell_before = before.cells[("missing_assignee", "repo", "P")]
        cell_after = after.cells[("missing_assignee", "repo", "P")]
        assert cell_before.applicable == 0
        assert cell_after.applicable == 10


class TestRendering:
    def test_render_json_stable(self):
        assert render_json({"b": 1, "a": [1, 2]}) == render_json({"a": [1, 2], "b": 1})

    def test_run_payload_shape(self, registry, default_cfg):
        result = run_all(corpus_with(bug("P-1")), default_cfg, registry)
        payload = run_payload(result, default_cfg)
        assert set(payload) == {"projects", "score", "violations"}
