from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from itelint.config import resolve
from itelint.detectors import default_registry
from itelint.model import ChangeEvent, Comment, IssueRecord, Person

T0 = datetime(2022, 1, 10, 9, 0, 0, tzinfo=timezone.utc)


def at(**kw) -> datetime:
    """T0 shifted by the given timedelta kwargs."""
    return T0 + timedelta(**kw)


def person(name: str) -> Person:
    return Person(id=name, display=name)


def ev(when, field, to, frm=None, author="alice", creational=False, raw=None):
    return ChangeEvent(
        when=when,
        author=person(author) if author else None,
        field_raw=raw or field.lower(),
        field=field,
        from_value=frm,
        to_value=to,
        creational=creational,
    )


def comment(when, body="looks fine", author="bob"):
    return Comment(author=person(author), when=when, body=body)


def issue(
    key="PRJ-1",
    project="PRJ",
    raw_type="Bug",
    created=T0,
    resolved=None,
    events=(),
    comments=(),
    **fields,
):
    """Compact issue builder; fields land in IssueRecord.fields as-is."""
    base = {"summary": "a perfectly reasonable summary of this issue!!"}
    base.update(fields)
    for k in ("assignee", "reporter", "creator"):
        if isinstance(base.get(k), str):
            base[k] = person(base[k])
    base = {k: v for k, v in base.items() if v is not None}
    return IssueRecord(
        key=key,
        project=project,
        raw_issue_type=raw_type,
        fields=base,
        created=created,
        resolved=resolved,
        comments=tuple(sorted(comments, key=lambda c: c.when)),
        links=(),
        changelog=tuple(sorted(events, key=lambda e: e.when)),
    )


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture()
def default_cfg(registry):
    return resolve([], registry)
