"""Domain types shared by every other module. In-memory only, no I/O.

All values here are immutable after construction and safe to share across
threads. Timestamps are UTC instants with millisecond precision; sources with
offsets are normalized at ingest. Empty strings in text fields are normalized
to absent so "missing field" checks cannot be dodged by "".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

# Canonical field codes. Every code the system produces is one of these plus
# the sentinel OTHER.
FIELD_CODES = (
    "Summary",
    "Description",
    "Labels",
    "Environment",
    "VersionsAffected",
    "VersionsFixed",
    "IssueType",
    "Project",
    "Components",
    "Parent",
    "IssueLinks",
    "CreatedDate",
    "ResolvedDate",
    "Status",
    "Priority",
    "Resolution",
    "Creator",
    "Reporter",
    "Assignee",
    "Comments",
)

OTHER = "Other"

# Keys used in IssueRecord.fields, and how they map to canonical codes.
# IssueType, Project, CreatedDate, ResolvedDate, Comments and IssueLinks live
# on the record itself rather than in the fields map.
FIELD_KEY_BY_CODE = {
    "Summary": "summary",
    "Description": "description",
    "Status": "status",
    "Priority": "priority",
    "Resolution": "resolution",
    "Assignee": "assignee",
    "Reporter": "reporter",
    "Creator": "creator",
    "Environment": "environment",
    "Components": "components",
    "Labels": "labels",
    "VersionsAffected": "versions_affected",
    "VersionsFixed": "versions_fixed",
    "Parent": "parent",
}
CODE_BY_FIELD_KEY = {v: k for k, v in FIELD_KEY_BY_CODE.items()}


def normalize_ts(dt: datetime) -> datetime:
    """Clamp a timestamp to UTC with millisecond precision."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    dt = dt.astimezone(timezone.utc)
    return dt.replace(microsecond=(dt.microsecond // 1000) * 1000)


def is_absent(value: object) -> bool:
    """True for None, empty/whitespace strings, and empty collections."""
    if value is None:
        return True
    if isinstance(value, str):
        return value.strip() == ""
    if isinstance(value, (list, tuple, set, dict)):
        return len(value) == 0
    return False


@dataclass(frozen=True)
class Person:
    """A tracker account. Equality is by id, falling back to display name
    when the id is missing (the dataset mixes name formats)."""

    id: str
    display: str = ""

    def key(self) -> str:
        return self.id if self.id else self.display

    def matches(self, other: object) -> bool:
        """Person-equality against another Person or a raw string value."""
        if other is None:
            return False
        if isinstance(other, Person):
            if self.id and other.id:
                return self.id == other.id
            return self.key() == other.key() and self.key() != ""
        text = str(other).strip()
        if not text:
            return False
        return text == self.id or text == self.display


def display_of(value: object) -> str:
    """Human-readable form of a field value (Person, list or scalar)."""
    if value is None:
        return ""
    if isinstance(value, Person):
        return value.display or value.id
    if isinstance(value, (list, tuple)):
        return ", ".join(str(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class Comment:
    author: Person | None
    when: datetime
    body: str = ""


@dataclass(frozen=True)
class IssueLink:
    link_type: str
    direction: str  # "inward" | "outward"
    target: str


@dataclass(frozen=True)
class ChangeEvent:
    """One timestamped field change flattened out of the changelog.

    ``creational`` marks values recorded at issue creation time (within the
    ingest tolerance of the created timestamp). ``synthetic`` marks creational
    events back-filled from the final state for fields that were set but never
    changed, and therefore absent from the history.
    """

    when: datetime
    author: Person | None
    field_raw: str
    field: str  # canonical code or OTHER
    from_value: object = None
    to_value: object = None
    creational: bool = False
    synthetic: bool = False


@dataclass(frozen=True)
class IssueRecord:
    """One issue's final field values, comments, links and raw changelog."""

    key: str
    project: str
    raw_issue_type: str
    fields: dict = field(default_factory=dict)
    created: datetime = None  # type: ignore[assignment]
    resolved: datetime | None = None
    comments: tuple = ()
    links: tuple = ()
    changelog: tuple = ()
    raw: dict = field(default_factory=dict)  # unknown source fields, as-is

    def field_value(self, code: str) -> object:
        """Current value for a canonical field code, or None."""
        if code == "IssueType":
            return self.raw_issue_type
        if code == "Project":
            return self.project
        if code == "CreatedDate":
            return self.created
        if code == "ResolvedDate":
            return self.resolved
        key = FIELD_KEY_BY_CODE.get(code)
        return self.fields.get(key) if key else None


@dataclass(frozen=True)
class ValidationIssue:
    field: str
    rule: str
    detail: str = ""


# Events within this window of the created timestamp count as creational.
CREATIONAL_TOLERANCE_MS = 2_000


def _within_creation(when: datetime, created: datetime) -> bool:
    return abs((when - created).total_seconds()) * 1000 <= CREATIONAL_TOLERANCE_MS


def validate(issue: IssueRecord) -> list[ValidationIssue]:
    """Check the model invariants. Total: never raises, reports everything.

    An empty report means the record is well-formed.
    """
    report: list[ValidationIssue] = []
    if not issue.key:
        report.append(ValidationIssue("key", "key-empty"))
    if issue.created is None:
        report.append(ValidationIssue("created", "created-missing"))
        return report
    if issue.resolved is not None and issue.resolved < issue.created:
        report.append(
            ValidationIssue(
                "resolved",
                "resolved-before-created",
                f"resolved {issue.resolved.isoformat()} < created {issue.created.isoformat()}",
            )
        )
    for seq, name in ((issue.changelog, "changelog"), (issue.comments, "comments")):
        for a, b in zip(seq, seq[1:]):
            if b.when < a.when:
                report.append(ValidationIssue(name, f"{name}-unsorted"))
                break
    now = datetime.now(timezone.utc)
    for i, comment in enumerate(issue.comments):
        if comment.when < issue.created or comment.when > now:
            report.append(
                ValidationIssue("comments", "comment-outside-lifetime", f"index {i}")
            )
            break
    for event in issue.changelog:
        if event.creational != _within_creation(event.when, issue.created):
            report.append(
                ValidationIssue(
                    "changelog",
                    "creational-flag-inconsistent",
                    f"{event.field_raw}@{event.when.isoformat()}",
                )
            )
            break
    for link in issue.links:
        if not link.target:
            report.append(ValidationIssue("links", "link-target-empty"))
            break
    for person in (
        issue.fields.get("assignee"),
        issue.fields.get("reporter"),
        issue.fields.get("creator"),
    ):
        if isinstance(person, Person) and not person.id and not person.display:
            report.append(ValidationIssue("people", "person-empty"))
            break
    return report
