from __future__ import annotations

from conftest import T0, at, comment, ev, issue, person

from itelint.model import Person, display_of, is_absent, normalize_ts, validate


class TestValidate:
    def test_well_formed_issue_is_clean(self):
        report = validate(issue(resolved=at(days=2), events=[ev(at(days=1), "Status", "Closed", "Open")]))
        assert report == []

    def test_resolved_before_created(self):
        report = validate(issue(created=at(days=2), resolved=T0))
        assert [r.rule for r in report] == ["resolved-before-created"]

    def test_changelog_out_of_order(self):
        from dataclasses import replace

        bad = issue(events=[ev(at(days=2), "Status", "A", None), ev(at(days=1), "Status", "B", "A")])
        bad = replace(bad, changelog=tuple(reversed(bad.changelog)))
        rules = [r.rule for r in validate(bad)]
        assert "changelog-unsorted" in rules

    def test_comment_before_creation_flagged(self):
        report = validate(issue(comments=[comment(at(days=-1))]))
        assert [r.rule for r in report] == ["comment-outside-lifetime"]

    def test_creational_flag_must_match_tolerance(self):
        report = validate(issue(events=[ev(at(days=3), "Status", "Open", creational=True)]))
        assert [r.rule for r in report] == ["creational-flag-inconsistent"]

    def test_validate_is_idempotent(self):
        record = issue(created=at(days=2), resolved=T0)
        assert validate(record) == validate(record)


class TestPerson:
    def test_equality_by_id(self):
        assert person("alice").matches(Person(id="alice", display="Alice A"))

    def test_fallback_to_display(self):
        a = Person(id="", display="Alice A")
        b = Person(id="", display="Alice A")
        assert a.matches(b)

    def test_string_matching(self):
        assert Person(id="u123", display="Alice").matches("Alice")
        assert Person(id="u123", display="Alice").matches("u123")
        assert not Person(id="u123", display="Alice").matches("bob")


class TestHelpers:
    def test_is_absent(self):
        assert is_absent(None) and is_absent("") and is_absent("   ") and is_absent([])
        assert not is_absent("x") and not is_absent(0)

    def test_display_of(self):
        assert display_of(Person(id="a", display="Alice")) == "Alice"
        assert display_of(["x", "y"]) == "x, y"
        assert display_of(None) == ""

    def test_normalize_ts_millisecond_precision(self):
        from datetime import datetime, timezone

        dt = datetime(2022, 1, 1, 1, 1, 1, 123456, tzinfo=timezone.utc)
        assert normalize_ts(dt).microsecond == 123000
