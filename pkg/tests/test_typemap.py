from __future__ import annotations

import json
from importlib import resources

from conftest import issue

from itelint.ingest import Corpus
from itelint.typemap import (
    cooccurrence_rank,
    default_mapping,
    map_issue_type,
    usage_set,
)


class TestMapIssueType:
    def test_table_examples(self):
        assert map_issue_type("Defect") == ("Maintenance", "BugReport")
        assert map_issue_type("User Story") == ("Requirements", "Story")
        assert map_issue_type("Roadmap item") == ("Requirements", "Epic")
        assert map_issue_type("Dev Sub-task") == ("Development", "SubTask")
        assert map_issue_type("Backport") == ("Maintenance", "LegacyUpgrade")
        assert map_issue_type("Build Failure") == ("Maintenance", "ContinuousIntegration")
        assert map_issue_type("IT Help") == ("UserSupport", "UserSupport")

    def test_unknown_names(self):
        for name in ("Fug", "New Project", "GitHub Integration", "Spike", ""):
            assert map_issue_type(name) == ("Other", "Other")

    def test_stable_under_case_and_whitespace(self):
        assert map_issue_type("  user   STORY ") == map_issue_type("User Story")
        assert map_issue_type("BUG") == map_issue_type("Bug")

    def test_every_shipped_name_maps(self):
        data = json.loads(resources.files("itelint.data").joinpath("typemap.json").read_text())
        for activity, codes in data.items():
            for code, names in codes.items():
                for name in names:
                    assert map_issue_type(name) == (activity, code)

    def test_extension(self):
        mapping = default_mapping().extended({"Spike": ("Development", "Task")})
        assert mapping.lookup("spike") == ("Development", "Task")


def issues_of_types(*names):
    return [issue(key=f"T-{i}", raw_type=name) for i, name in enumerate(names)]


class TestUsageSet:
    def test_five_uses_suffice(self):
        project = issues_of_types(*["Bug"] * 5 + ["Task"] * 95)
        assert "BugReport" in usage_set(project)

    def test_small_project_ratio(self):
        # 4 of 30 is above ten percent for an under-50-issue project
        project = issues_of_types(*["Bug"] * 4 + ["Task"] * 26)
        assert "BugReport" in usage_set(project)

    def test_below_both_thresholds_excluded(self):
        project = issues_of_types(*["Bug"] * 3 + ["Task"] * 97)
        assert "BugReport" not in usage_set(project)

    def test_large_project_ratio_does_not_apply(self):
        # 4 of 50: not under the small-project bound, count under five
        project = issues_of_types(*["Bug"] * 4 + ["Task"] * 46)
        assert "BugReport" not in usage_set(project)


def corpus_of(project_types: dict) -> Corpus:
    corpus = Corpus()
    for name, types in project_types.items():
        for i, raw in enumerate(types):
            corpus.add("repo", issue(key=f"{name}-{i}", project=name, raw_type=raw))
    return corpus


class TestCooccurrence:
    def test_identical_sets_merge(self):
        corpus = corpus_of(
            {"A": ["Bug"] * 5, "B": ["Bug"] * 5}
        )
        patterns = cooccurrence_rank(corpus)
        assert len(patterns) == 1
        assert patterns[0].count == 2
        assert patterns[0].percent == 100.0

    def test_hand_enumeration(self):
        corpus = corpus_of(
            {"A": ["Bug"] * 5, "B": ["Bug"] * 5, "C": ["Task"] * 5}
        )
        patterns = cooccurrence_rank(corpus)
        assert [(p.codes, p.count) for p in patterns] == [
            (("BugReport",), 2),
            (("Task",), 1),
        ]
        assert round(patterns[0].percent, 1) == 66.7
        assert round(patterns[1].cumulative, 1) == 100.0

    def test_counts_sum_to_project_total(self):
        corpus = corpus_of(
            {"A": ["Bug"] * 5, "B": ["Task"] * 5, "C": ["Bug"] * 3 + ["Task"] * 3,
             "D": ["Epic"] * 6, "E": ["Wish"] * 2}
        )
        patterns = cooccurrence_rank(corpus)
        assert sum(p.count for p in patterns) == 5
        assert round(patterns[-1].cumulative) == 100

    def test_tie_break_is_lexicographic(self):
        corpus = corpus_of({"A": ["Bug"] * 5, "B": ["Task"] * 5})
        patterns = cooccurrence_rank(corpus)
        assert [p.codes for p in patterns] == [("BugReport",), ("Task",)]
