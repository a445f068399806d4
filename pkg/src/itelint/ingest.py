"""Parse Jira-REST-v2-shaped JSON dumps into IssueRecords.

Accepted inputs (see tests/fixtures for concrete shapes):
  * a JSON array of issue documents,
  * an object with an "issues" array (the REST search envelope),
  * newline-delimited JSON, one issue document per line.

Every document needs a "key" and a "fields" sub-document. Changelog histories
and their items are flattened into ChangeEvents; values set at creation time
(within a 2 second tolerance of the created timestamp, allowing for clock skew
in exports) are flagged creational. Unparseable dates drop the single event and
are counted, never silently zeroed.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field as dc_field
from datetime import datetime
from pathlib import Path

from .evolution import FieldCodebook, default_codebook, unify_field_name
from .model import (
    CREATIONAL_TOLERANCE_MS,
    ChangeEvent,
    Comment,
    IssueLink,
    IssueRecord,
    Person,
    normalize_ts,
)

logger = logging.getLogger(__name__)


class MissingKey(ValueError):
    """Document carries no issue key."""


class MalformedTimestamp(ValueError):
    """A date field could not be parsed."""


class UnreadableSource(OSError):
    """The dump source could not be read at all."""


_TZ_FIX = re.compile(r"([+-]\d{2})(\d{2})$")


def parse_timestamp(value: object) -> datetime:
    """Parse the tracker's date formats into a UTC instant.

    Handles ISO-8601 with and without colons in the offset (exports typically
    use "+0000") and bare dates. Raises MalformedTimestamp otherwise.
    """
    if isinstance(value, datetime):
        return normalize_ts(value)
    if not isinstance(value, str) or not value.strip():
        raise MalformedTimestamp(f"not a date: {value!r}")
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    text = _TZ_FIX.sub(r"\1:\2", text)
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError as exc:
        raise MalformedTimestamp(str(exc)) from None
    return normalize_ts(parsed)


@dataclass
class IngestReport:
    """Bookkeeping for one parse run. Totals always reconcile:
    documents_read == ingested + skipped_missing_key + skipped_unusable."""

    documents_read: int = 0
    ingested: int = 0
    skipped_missing_key: int = 0
    skipped_unusable: int = 0
    skipped_duplicate_key: int = 0
    events_dropped: int = 0
    comments_dropped: int = 0
    state_conflicts: int = 0

    @property
    def skipped(self) -> int:
        return self.skipped_missing_key + self.skipped_unusable + self.skipped_duplicate_key

    def merged(self, other: "IngestReport") -> "IngestReport":
        return IngestReport(
            documents_read=self.documents_read + other.documents_read,
            ingested=self.ingested + other.ingested,
            skipped_missing_key=self.skipped_missing_key + other.skipped_missing_key,
            skipped_unusable=self.skipped_unusable + other.skipped_unusable,
            skipped_duplicate_key=self.skipped_duplicate_key + other.skipped_duplicate_key,
            events_dropped=self.events_dropped + other.events_dropped,
            comments_dropped=self.comments_dropped + other.comments_dropped,
            state_conflicts=self.state_conflicts + other.state_conflicts,
        )

    def to_dict(self) -> dict:
        return {
            "documents_read": self.documents_read,
            "ingested": self.ingested,
            "skipped_missing_key": self.skipped_missing_key,
            "skipped_unusable": self.skipped_unusable,
            "skipped_duplicate_key": self.skipped_duplicate_key,
            "events_dropped": self.events_dropped,
            "comments_dropped": self.comments_dropped,
            "state_conflicts": self.state_conflicts,
        }


@dataclass
class Corpus:
    """repo -> project -> list of IssueRecord."""

    repos: dict = dc_field(default_factory=dict)

    def add(self, repo: str, issue: IssueRecord) -> None:
        self.repos.setdefault(repo, {}).setdefault(issue.project, []).append(issue)

    def merge(self, other: "Corpus") -> None:
        for repo, projects in other.repos.items():
            for project, issues in projects.items():
                for issue in issues:
                    self.add(repo, issue)

    def all_issues(self):
        for repo in sorted(self.repos):
            for project in sorted(self.repos[repo]):
                for issue in self.repos[repo][project]:
                    yield repo, project, issue

    def size(self) -> int:
        return sum(1 for _ in self.all_issues())

    def find(self, key: str) -> IssueRecord | None:
        for _, _, issue in self.all_issues():
            if issue.key == key:
                return issue
        return None


@dataclass(frozen=True)
class DumpSource:
    path: Path
    repo_name: str


def _text(value: object) -> str | None:
    """Text value with empty strings normalized to absent."""
    if value is None:
        return None
    text = str(value).strip()
    return text or None


def _named(value: object) -> str | None:
    """Value that may arrive as a plain string or a {"name": ...} object."""
    if isinstance(value, dict):
        return _text(value.get("name") or value.get("value") or value.get("key"))
    return _text(value)


def _person(value: object) -> Person | None:
    if value is None:
        return None
    if isinstance(value, str):
        text = value.strip()
        return Person(id=text, display=text) if text else None
    if isinstance(value, dict):
        pid = _text(
            value.get("accountId") or value.get("name") or value.get("key")
            or value.get("emailAddress")
        )
        display = _text(value.get("displayName")) or ""
        if pid is None and not display:
            return None
        return Person(id=pid or display, display=display or (pid or ""))
    return None


def _name_list(value: object) -> list[str]:
    if not isinstance(value, list):
        return []
    out = []
    for item in value:
        name = _named(item)
        if name:
            out.append(name)
    return out


def _comments_of(fields: dict) -> list[dict]:
    # Both "comment" and "comments" occur in the wild; accept either, nested
    # in the usual {"comments": [...]} envelope or as a bare list.
    for key in ("comment", "comments"):
        node = fields.get(key)
        if isinstance(node, dict) and isinstance(node.get("comments"), list):
            return node["comments"]
        if isinstance(node, list):
            return node
    return []


def _links_of(fields: dict) -> list[IssueLink]:
    links = []
    for node in fields.get("issuelinks") or []:
        if not isinstance(node, dict):
            continue
        type_name = _named(node.get("type")) or "relates"
        if isinstance(node.get("inwardIssue"), dict):
            target = _text(node["inwardIssue"].get("key"))
            if target:
                links.append(IssueLink(link_type=type_name, direction="inward", target=target))
        if isinstance(node.get("outwardIssue"), dict):
            target = _text(node["outwardIssue"].get("key"))
            if target:
                links.append(IssueLink(link_type=type_name, direction="outward", target=target))
    return links


_KNOWN_FIELD_KEYS = {
    "summary", "description", "status", "priority", "resolution", "assignee",
    "reporter", "creator", "environment", "components", "labels", "versions",
    "fixVersions", "parent", "issuetype", "project", "created", "resolutiondate",
    "comment", "comments", "issuelinks",
}


def parse_issue(
    document: dict,
    book: FieldCodebook | None = None,
    report: IngestReport | None = None,
) -> IssueRecord:
    """Map one issue document onto an IssueRecord.

    Raises MissingKey when the document has no key and MalformedTimestamp when
    the created date is unusable. Malformed event or comment dates only drop
    that event/comment and are tallied on the report.
    """
    book = book or default_codebook()
    report = report if report is not None else IngestReport()
    key = _text(document.get("key"))
    if not key:
        raise MissingKey("document has no issue key")
    fields = document.get("fields") or {}

    created = parse_timestamp(fields.get("created"))
    resolved = None
    if fields.get("resolutiondate"):
        try:
            resolved = parse_timestamp(fields.get("resolutiondate"))
        except MalformedTimestamp:
            report.events_dropped += 1

    # Project identity is the key (it prefixes every issue key); display
    # names vary freely and would split one project into several.
    project_node = fields.get("project")
    if isinstance(project_node, dict):
        project = _text(project_node.get("key")) or _named(project_node)
    else:
        project = _text(project_node)
    project = project or key.rsplit("-", 1)[0]
    raw_type = _named(fields.get("issuetype")) or ""

    record_fields = {
        "summary": _text(fields.get("summary")),
        "description": _text(fields.get("description")),
        "status": _named(fields.get("status")),
        "priority": _named(fields.get("priority")),
        "resolution": _named(fields.get("resolution")),
        "assignee": _person(fields.get("assignee")),
        "reporter": _person(fields.get("reporter")),
        "creator": _person(fields.get("creator")),
        "environment": _text(fields.get("environment")),
        "components": _name_list(fields.get("components")),
        "labels": [str(v) for v in fields.get("labels") or [] if _text(v)],
        "versions_affected": _name_list(fields.get("versions")),
        "versions_fixed": _name_list(fields.get("fixVersions")),
        "parent": _named(fields.get("parent")),
    }
    record_fields = {k: v for k, v in record_fields.items() if not _is_empty(v)}

    comments = []
    for node in _comments_of(fields):
        if not isinstance(node, dict):
            continue
        try:
            when = parse_timestamp(node.get("created") or node.get("when"))
        except MalformedTimestamp:
            report.comments_dropped += 1
            continue
        comments.append(
            Comment(author=_person(node.get("author")), when=when, body=str(node.get("body") or ""))
        )
    comments.sort(key=lambda c: c.when)

    events = []
    changelog = document.get("changelog") or {}
    histories = changelog.get("histories") if isinstance(changelog, dict) else changelog
    for history in histories or []:
        if not isinstance(history, dict):
            continue
        try:
            when = parse_timestamp(history.get("created") or history.get("when"))
        except MalformedTimestamp:
            report.events_dropped += len(history.get("items") or []) or 1
            continue
        author = _person(history.get("author"))
        creational = abs((when - created).total_seconds()) * 1000 <= CREATIONAL_TOLERANCE_MS
        for item in history.get("items") or []:
            if not isinstance(item, dict):
                continue
            raw_name = str(item.get("field") or "")
            events.append(
                ChangeEvent(
                    when=when,
                    author=author,
                    field_raw=raw_name,
                    field=unify_field_name(raw_name, book),
                    from_value=_text(item.get("fromString")) or _text(item.get("from")),
                    to_value=_text(item.get("toString")) or _text(item.get("to")),
                    creational=creational,
                )
            )
    events.sort(key=lambda e: e.when)  # stable; source order preserved on ties

    # The dump stores some state both nested and flattened. We keep the parsed
    # final fields but count disagreements with the changelog-derived value,
    # which the reconstruction path prefers.
    last_status = next(
        (e.to_value for e in reversed(events) if e.field == "Status" and not e.creational),
        None,
    )
    if last_status is not None and record_fields.get("status") not in (None, last_status):
        report.state_conflicts += 1
        logger.debug("%s: final status %r disagrees with changelog %r",
                     key, record_fields.get("status"), last_status)

    raw_side = {k: v for k, v in fields.items() if k not in _KNOWN_FIELD_KEYS}

    return IssueRecord(
        key=key,
        project=project,
        raw_issue_type=raw_type,
        fields=record_fields,
        created=created,
        resolved=resolved,
        comments=tuple(comments),
        links=tuple(_links_of(fields)),
        changelog=tuple(events),
        raw=raw_side,
    )


def _is_empty(value: object) -> bool:
    return value is None or (isinstance(value, list) and not value)


def _iter_documents(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UnreadableSource(str(exc)) from None
    stripped = text.lstrip()
    if stripped.startswith("["):
        yield from json.loads(text)
        return
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            doc = None
        if doc is not None:
            if isinstance(doc.get("issues"), list):
                yield from doc["issues"]
            else:
                yield doc
            return
    for line in text.splitlines():
        line = line.strip()
        if line:
            yield json.loads(line)


def parse_dump(
    source: DumpSource, book: FieldCodebook | None = None
) -> tuple[Corpus, IngestReport]:
    """Parse every document of a dump. Each parseable document lands exactly
    once; the report reconciles against the number of documents read."""
    book = book or default_codebook()
    corpus = Corpus()
    report = IngestReport()
    seen_keys: set[str] = set()
    for document in _iter_documents(source.path):
        report.documents_read += 1
        if not isinstance(document, dict):
            report.skipped_unusable += 1
            continue
        try:
            issue = parse_issue(document, book, report)
        except MissingKey:
            report.skipped_missing_key += 1
            continue
        except MalformedTimestamp:
            report.skipped_unusable += 1
            continue
        if issue.key in seen_keys:
            # keys must stay unique within the corpus; first occurrence wins
            report.skipped_duplicate_key += 1
            logger.warning("duplicate issue key %s skipped", issue.key)
            continue
        seen_keys.add(issue.key)
        corpus.add(source.repo_name, issue)
        report.ingested += 1
    return corpus, report


# --- store serialization -----------------------------------------------------

def _person_dict(p: Person | None):
    return None if p is None else {"id": p.id, "display": p.display}


def _person_from(d) -> Person | None:
    return None if d is None else Person(id=d.get("id", ""), display=d.get("display", ""))


def issue_to_dict(issue: IssueRecord) -> dict:
    fields = {}
    for k, v in issue.fields.items():
        fields[k] = _person_dict(v) if isinstance(v, Person) else v
    return {
        "key": issue.key,
        "project": issue.project,
        "raw_issue_type": issue.raw_issue_type,
        "fields": fields,
        "created": issue.created.isoformat(),
        "resolved": issue.resolved.isoformat() if issue.resolved else None,
        "comments": [
            {"author": _person_dict(c.author), "when": c.when.isoformat(), "body": c.body}
            for c in issue.comments
        ],
        "links": [
            {"link_type": l.link_type, "direction": l.direction, "target": l.target}
            for l in issue.links
        ],
        "changelog": [
            {
                "when": e.when.isoformat(),
                "author": _person_dict(e.author),
                "field_raw": e.field_raw,
                "field": e.field,
                "from": e.from_value,
                "to": e.to_value,
                "creational": e.creational,
                "synthetic": e.synthetic,
            }
            for e in issue.changelog
        ],
        "raw": issue.raw,
    }


def issue_from_dict(data: dict) -> IssueRecord:
    fields = {}
    for k, v in (data.get("fields") or {}).items():
        if k in ("assignee", "reporter", "creator") and isinstance(v, dict):
            fields[k] = _person_from(v)
        else:
            fields[k] = v
    return IssueRecord(
        key=data["key"],
        project=data["project"],
        raw_issue_type=data.get("raw_issue_type", ""),
        fields=fields,
        created=parse_timestamp(data["created"]),
        resolved=parse_timestamp(data["resolved"]) if data.get("resolved") else None,
        comments=tuple(
            Comment(
                author=_person_from(c.get("author")),
                when=parse_timestamp(c["when"]),
                body=c.get("body", ""),
            )
            for c in data.get("comments") or []
        ),
        links=tuple(
            IssueLink(l["link_type"], l["direction"], l["target"])
            for l in data.get("links") or []
        ),
        changelog=tuple(
            ChangeEvent(
                when=parse_timestamp(e["when"]),
                author=_person_from(e.get("author")),
                field_raw=e.get("field_raw", ""),
                field=e.get("field", ""),
                from_value=e.get("from"),
                to_value=e.get("to"),
                creational=bool(e.get("creational")),
                synthetic=bool(e.get("synthetic")),
            )
            for e in data.get("changelog") or []
        ),
        raw=data.get("raw") or {},
    )


def save_store(corpus: Corpus, report: IngestReport, path) -> None:
    payload = {
        "repos": {
            repo: {
                project: [issue_to_dict(i) for i in issues]
                for project, issues in sorted(projects.items())
            }
            for repo, projects in sorted(corpus.repos.items())
        },
        "report": report.to_dict(),
    }
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True), encoding="utf-8")


def load_store(path) -> tuple[Corpus, IngestReport]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UnreadableSource(str(exc)) from None
    corpus = Corpus()
    for repo, projects in payload.get("repos", {}).items():
        for _, issues in projects.items():
            for data in issues:
                corpus.add(repo, issue_from_dict(data))
    rep = IngestReport(**payload.get("report", {}))
    return corpus, rep
