from __future__ import annotations

import random

import pytest

from conftest import T0, at, ev, issue

from itelint.analytics import (
    BoxStats,
    EmptyInput,
    box_stats,
    evolution_counts,
    evolution_time_offsets,
    ownership_table,
    summarize,
)
from itelint.ingest import Corpus


class TestBoxStats:
    def test_one_through_nine(self):
        stats = box_stats(range(1, 10))
        assert stats.median == 5 and stats.q1 == 2.5 and stats.q3 == 7.5
        assert stats.lower_whisker == 1 and stats.upper_whisker == 9

    def test_constant_data(self):
        stats = box_stats([4.0, 4.0, 4.0])
        assert (stats.median, stats.q1, stats.q3) == (4, 4, 4)
        assert (stats.lower_whisker, stats.upper_whisker) == (4, 4)

    def test_even_split(self):
        stats = box_stats([1, 2, 3, 4])
        assert stats.median == 2.5 and stats.q1 == 1.5 and stats.q3 == 3.5

    def test_outlier_excluded_from_whisker(self):
        # halves [1,2,3] and [4,5,100]: q1=2, q3=5, fence 9.5, 100 is outside
        stats = box_stats([1, 2, 3, 4, 5, 100])
        assert stats.q1 == 2 and stats.q3 == 5
        assert stats.upper_whisker == 5
        assert stats.lower_whisker == 1

    def test_low_outlier(self):
        stats = box_stats([-100, 10, 11, 12, 13, 14])
        assert stats.lower_whisker == 10

    def test_single_value(self):
        stats = box_stats([7])
        assert stats == BoxStats(7, 7, 7, 7, 7, 1)

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            box_stats([])

    def test_permutation_invariant(self):
        rng = random.Random(2)
        data = [rng.uniform(-50, 50) for _ in range(31)]
        shuffled = list(data)
        rng.shuffle(shuffled)
        assert box_stats(data) == box_stats(shuffled)

    def test_translation_equivariant(self):
        rng = random.Random(3)
        data = [rng.uniform(0, 9) for _ in range(20)]
        base = box_stats(data)
        shifted = box_stats([v + 11 for v in data])
        assert shifted.median == pytest.approx(base.median + 11)
        assert shifted.q1 == pytest.approx(base.q1 + 11)
        assert shifted.q3 == pytest.approx(base.q3 + 11)
        assert shifted.lower_whisker == pytest.approx(base.lower_whisker + 11)
        assert shifted.upper_whisker == pytest.approx(base.upper_whisker + 11)

    def test_whiskers_bound_box(self):
        rng = random.Random(4)
        for _ in range(200):
            data = [rng.choice([rng.uniform(0, 10), rng.uniform(0, 1000)])
                    for _ in range(rng.randint(1, 25))]
            s = box_stats(data)
            assert s.lower_whisker <= s.q1 <= s.median <= s.q3 <= s.upper_whisker


def one_issue_corpus(record):
    corpus = Corpus()
    corpus.add("repo", record)
    return corpus


class TestEvolutionCounts:
    def test_eight_changes(self):
        events = [ev(at(days=i + 1), "Priority", f"P{i}", f"P{i - 1}") for i in range(8)]
        corpus = one_issue_corpus(issue(raw_type="Story", events=events))
        groups = evolution_counts(corpus, "activity")
        assert groups == {"Requirements": [8]}

    def test_creational_excluded(self):
        events = [
            ev(T0, "Status", "Open", creational=True),
            ev(at(days=2), "Status", "Closed", "Open"),
        ]
        corpus = one_issue_corpus(issue(raw_type="Bug", events=events))
        assert evolution_counts(corpus, "code") == {"BugReport": [1]}

    def test_other_fields_excluded(self):
        events = [ev(at(days=1), "Other", "x", raw="weird_custom")]
        corpus = one_issue_corpus(issue(raw_type="Bug", events=events))
        assert evolution_counts(corpus, "activity") == {"Maintenance": [0]}


class TestEvolutionTimeOffsets:
    def test_two_day_offset(self):
        events = [ev(at(hours=48), "Status", "Closed", "Open")]
        corpus = one_issue_corpus(issue(raw_type="Bug", events=events))
        groups = evolution_time_offsets(corpus, "activity")
        assert groups["Maintenance"] == [pytest.approx(2.0)]

    def test_theme_grouping(self):
        events = [
            ev(at(days=1), "Status", "Closed", "Open"),
            ev(at(days=2), "Description", "new", "old"),
        ]
        corpus = one_issue_corpus(issue(raw_type="Bug", events=events))
        groups = evolution_time_offsets(corpus, "theme")
        assert set(groups) == {"Workflow", "Content"}

    def test_field_code_grouping(self):
        events = [ev(at(days=3), "Priority", "High", "Low")]
        corpus = one_issue_corpus(issue(raw_type="Bug", events=events))
        assert list(evolution_time_offsets(corpus, "code")) == ["Priority"]

    def test_summarize_skips_empty(self):
        assert summarize({"empty": [], "one": [1.0]}).keys() == {"one"}


class TestOwnershipTable:
    def test_all_cra(self):
        events = [ev(at(days=1), "Status", "Closed", "Open", author="alice")]
        record = issue(creator="alice", reporter="alice", assignee="alice",
                       raw_type="Bug", events=events)
        columns = ownership_table(one_issue_corpus(record))
        overall = next(c for c in columns if c.activity == "All" and c.theme == "All")
        assert overall.owner_pct == 100.0
        assert overall.subset_pct["CRA"] == 100.0

    def test_owner_split(self):
        events = [
            ev(at(days=1), "Status", "In Progress", "Open", author="alice"),
            ev(at(days=2), "Status", "Closed", "In Progress", author="mallory"),
        ]
        record = issue(creator="alice", reporter="alice", assignee="alice",
                       raw_type="Bug", events=events)
        columns = ownership_table(one_issue_corpus(record))
        overall = next(c for c in columns if c.activity == "All" and c.theme == "All")
        assert overall.owner_pct == 50.0 and overall.non_owner_pct == 50.0

    def test_percentages_sum(self):
        import genissues

        rng = random.Random(21)
        corpus = genissues.make_corpus(rng, 40)
        for column in ownership_table(corpus):
            assert column.owner_pct + column.non_owner_pct == pytest.approx(100.0)
            if any(v > 0 for v in column.subset_pct.values()):
                assert sum(column.subset_pct.values()) == pytest.approx(100.0, abs=0.5)
