"""Field-name canonicalization, per-issue timelines, historical state
reconstruction, and change-ownership classification.

The default codebook maps every raw field name that occurs across heterogeneous
trackers onto five information themes and twenty canonical codes. Unknown names
map to the Other sentinel; their events stay in timelines (so as-of replay is
faithful) but are excluded from theme analytics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime
from importlib import resources

from .model import (
    CODE_BY_FIELD_KEY,
    FIELD_KEY_BY_CODE,
    OTHER,
    ChangeEvent,
    IssueRecord,
    Person,
)

THEMES = ("Content", "MetaContent", "RepoStructure", "Workflow", "Community")


class BeforeCreation(ValueError):
    """state_at was asked for an instant before the issue existed."""


@dataclass(frozen=True)
class FieldCodebook:
    """Raw field name -> (theme, code), plus a case-insensitive fallback."""

    exact: dict
    folded: dict

    @classmethod
    def from_mapping(cls, themes: dict) -> "FieldCodebook":
        exact: dict[str, tuple[str, str]] = {}
        folded: dict[str, tuple[str, str]] = {}
        for theme, codes in themes.items():
            for code, names in codes.items():
                for name in names:
                    exact[name] = (theme, code)
                    folded[name.casefold()] = (theme, code)
        return cls(exact=exact, folded=folded)

    @classmethod
    def default(cls) -> "FieldCodebook":
        data = resources.files("itelint.data").joinpath("codebook.json")
        return cls.from_mapping(json.loads(data.read_text()))

    @classmethod
    def load(cls, path) -> "FieldCodebook":
        with open(path, encoding="utf-8") as fh:
            return cls.from_mapping(json.load(fh))

    def extended(self, synonyms: dict) -> "FieldCodebook":
        """New codebook with extra raw-name -> (theme, code) entries."""
        exact = dict(self.exact)
        folded = dict(self.folded)
        for name, target in synonyms.items():
            exact[name] = tuple(target)
            folded[name.casefold()] = tuple(target)
        return FieldCodebook(exact=exact, folded=folded)

    def lookup(self, raw: str) -> tuple[str, str]:
        hit = self.exact.get(raw)
        if hit is None:
            hit = self.folded.get(raw.casefold())
        return hit if hit is not None else (OTHER, OTHER)


_DEFAULT_BOOK: FieldCodebook | None = None


def default_codebook() -> FieldCodebook:
    global _DEFAULT_BOOK
    if _DEFAULT_BOOK is None:
        _DEFAULT_BOOK = FieldCodebook.default()
    return _DEFAULT_BOOK


def unify_field_name(raw: str, book: FieldCodebook | None = None) -> str:
    """Canonical code for a raw field name; Other when unknown. Total."""
    if not raw:
        return OTHER
    return (book or default_codebook()).lookup(raw)[1]


def field_theme(code: str, book: FieldCodebook | None = None) -> str:
    book = book or default_codebook()
    for theme, found in book.exact.values():
        if found == code:
            return theme
    return OTHER


@dataclass(frozen=True)
class Timeline:
    """Ordered canonical events split into the creational and post-creational
    partitions. The partitions are exhaustive and disjoint."""

    events: tuple
    creational: tuple
    post_creational: tuple


def _canonical_events(issue: IssueRecord, book: FieldCodebook) -> list[ChangeEvent]:
    out = []
    for event in issue.changelog:
        if not event.field:
            event = replace(event, field=unify_field_name(event.field_raw, book))
        out.append(event)
    return out


def _backfill_events(issue: IssueRecord, events: list[ChangeEvent]) -> list[ChangeEvent]:
    """Synthesize creational events for fields set in the final state but
    absent from the history. The history alone cannot recover them."""
    touched = {e.field for e in events}
    synthetic = []
    for key, value in issue.fields.items():
        code = CODE_BY_FIELD_KEY.get(key)
        if code is None or code in touched or value is None:
            continue
        synthetic.append(
            ChangeEvent(
                when=issue.created,
                author=issue.fields.get("creator"),
                field_raw=key,
                field=code,
                from_value=None,
                to_value=value,
                creational=True,
                synthetic=True,
            )
        )
    if issue.raw_issue_type and "IssueType" not in touched:
        synthetic.append(
            ChangeEvent(
                when=issue.created,
                author=issue.fields.get("creator"),
                field_raw="issuetype",
                field="IssueType",
                to_value=issue.raw_issue_type,
                creational=True,
                synthetic=True,
            )
        )
    return synthetic


def timeline(issue: IssueRecord, book: FieldCodebook | None = None) -> Timeline:
    """Canonicalize and partition an issue's changelog.

    Ordering is stable: synthetic back-fill events come first (they carry the
    created timestamp), then the recorded events in source order.
    """
    book = book or default_codebook()
    recorded = _canonical_events(issue, book)
    events = _backfill_events(issue, recorded) + recorded
    events.sort(key=lambda e: e.when)  # stable: preserves source order on ties
    creational = tuple(e for e in events if e.creational)
    post = tuple(e for e in events if not e.creational)
    return Timeline(events=tuple(events), creational=creational, post_creational=post)


@dataclass(frozen=True)
class IssueState:
    """Reconstructed view of an issue as of some instant."""

    at: datetime
    fields: dict  # keyed like IssueRecord.fields
    raw_issue_type: str
    resolved: datetime | None
    comments: tuple
    other_fields: dict  # raw name -> value for fields outside the codebook


def _creation_snapshot(issue: IssueRecord, events: list[ChangeEvent]):
    """Initial value per field: last creational value, else the from-value of
    the earliest post-creational event, else the (back-filled) final value."""
    snapshot: dict[str, object] = {}
    seen_post: set[str] = set()
    for event in events:
        name = event.field if event.field != OTHER else f"raw:{event.field_raw}"
        if event.creational:
            snapshot[name] = event.to_value
        elif name not in snapshot and name not in seen_post:
            snapshot[name] = event.from_value
            seen_post.add(name)
    return snapshot


def state_at(
    issue: IssueRecord, t: datetime, book: FieldCodebook | None = None
) -> IssueState:
    """Replay the changelog over the creation snapshot up to instant t.

    Fields never touched keep their creation values; comments are filtered to
    those made by t. Resolution timestamps are not tracked in histories, so
    resolved is taken from the final record once t has passed it.
    """
    if t < issue.created:
        raise BeforeCreation(f"{t.isoformat()} is before {issue.key} was created")
    tl = timeline(issue, book)
    values = _creation_snapshot(issue, list(tl.events))
    for event in tl.events:
        if event.when > t:
            break
        name = event.field if event.field != OTHER else f"raw:{event.field_raw}"
        values[name] = event.to_value
    fields = {}
    for code, key in FIELD_KEY_BY_CODE.items():
        if values.get(code) is not None:
            fields[key] = values[code]
    raw_type = values.get("IssueType", issue.raw_issue_type)
    resolved = issue.resolved if issue.resolved is not None and issue.resolved <= t else None
    comments = tuple(c for c in issue.comments if c.when <= t)
    other = {k[4:]: v for k, v in values.items() if k.startswith("raw:")}
    return IssueState(
        at=t,
        fields=fields,
        raw_issue_type=str(raw_type) if raw_type is not None else "",
        resolved=resolved,
        comments=comments,
        other_fields=other,
    )


OWNER_CLASSES = ("CRA", "CRa", "CrA", "Cra", "cRA", "cRa", "crA")
NON_OWNER = "cra"


@dataclass(frozen=True)
class OwnershipRole:
    """Membership of a change author in the Creator/Reporter/Assignee roles.

    The derived class spells membership with case: uppercase letters mean the
    author held that role when the change was made. cra means Non-Owner.
    """

    creator: bool
    reporter: bool
    assignee: bool
    author_known: bool = True

    @property
    def cls(self) -> str:
        return (
            ("C" if self.creator else "c")
            + ("R" if self.reporter else "r")
            + ("A" if self.assignee else "a")
        )

    @property
    def is_owner(self) -> bool:
        return self.creator or self.reporter or self.assignee


def _person_matches(author: Person, value: object) -> bool:
    if value is None:
        return False
    if isinstance(value, Person):
        return author.matches(value) or value.matches(author)
    return author.matches(value)


def classify_ownership(
    event: ChangeEvent, issue: IssueRecord, book: FieldCodebook | None = None
) -> OwnershipRole:
    """Check the change author against the role holders at change time.

    Creator is fixed at creation; reporter and assignee are taken from the
    reconstructed state just before the event, since both can themselves
    evolve. Unknown authors classify as Non-Owner, flagged via author_known.
    """
    if event.author is None or (not event.author.id and not event.author.display):
        return OwnershipRole(False, False, False, author_known=False)
    author = event.author
    tl = timeline(issue, book)
    snapshot = _creation_snapshot(issue, list(tl.events))
    reporter = snapshot.get("Reporter", issue.fields.get("reporter"))
    assignee = snapshot.get("Assignee", issue.fields.get("assignee"))
    target = replace(event, field=event.field or unify_field_name(event.field_raw, book))
    for e in tl.events:
        if e.when > event.when:
            break
        if e.when == event.when and e == target:
            break  # state just before the event itself
        if e.field == "Reporter":
            reporter = e.to_value
        elif e.field == "Assignee":
            assignee = e.to_value
    creator = issue.fields.get("creator")
    return OwnershipRole(
        creator=_person_matches(author, creator),
        reporter=_person_matches(author, reporter),
        assignee=_person_matches(author, assignee),
    )
