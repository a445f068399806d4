"""The violation detectors, their registry, and the corpus runner.

Eighteen registered detectors sit behind eleven operations. The bug-report
group applies to BugReport-coded issues by default, the text/cycle/consistency
group to all issue types; applicability is a plain ``applies_to`` param so the
configuration cascade can widen or narrow any of them.

Every detector is pure and deterministic: it sees one validated IssueRecord
(plus a repo-wide context for the consistency check), returns not-applicable
or a list of Violations, and never raises on inapplicable issues.

The fixed/closed synonym lists shipped here are deliberately conservative
defaults and the largest correctness knob in the system; repositories with
custom workflows must extend them through configuration. Reports surface the
lists in effect.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from datetime import datetime, timedelta, timezone

from .evolution import FieldCodebook, Timeline, default_codebook, state_at, timeline
from .ingest import Corpus
from .model import IssueRecord, Person, display_of, is_absent
from .registry import DetectorSpec, ParamSpec, Registry
from .typemap import TypeMapping, default_mapping

CLOSED_STATUSES = ["Closed", "Done", "Resolved"]
FIXED_RESOLUTIONS = ["Fixed", "Done", "Resolved"]
INVALID_VALUES = ["none", "not evaluated", "n/a", "-", "_", "unknown", "unset"]

# Priority values that mark an issue severe, from the shipped analysis of
# high-severity priority schemes across public trackers.
SEVERE_PRIORITIES = [
    "Critical", "Blocker", "P1: Critical", "Highest", "Critical - P2",
    "Urgent", "Blocker - P1", "P1", "2 - Critical", "P1-Urgent", "P0",
    "1 - Blocker", "P2-Critical", "P1-Blocker", "Blocking", "Severe",
]

CONSISTENCY_FIELDS = ["IssueType", "Status", "Priority", "Resolution"]
_FIELD_NAME_TOKENS = {
    "IssueType": ("issue type", "issuetype", "type"),
    "Status": ("status",),
    "Priority": ("priority",),
    "Resolution": ("resolution",),
}


def _norm(value: object) -> str:
    return display_of(value).strip().casefold()


def _in_list(value: object, synonyms: list) -> bool:
    return _norm(value) in {s.strip().casefold() for s in synonyms}


@dataclass(frozen=True)
class Violation:
    detector_id: str
    issue_key: str
    detected_at: datetime
    explanation: str
    evidence: dict

    def to_dict(self) -> dict:
        return {
            "detector_id": self.detector_id,
            "issue_key": self.issue_key,
            "detected_at": self.detected_at.isoformat(),
            "explanation": self.explanation,
            "evidence": self.evidence,
        }


@dataclass
class DetectorResult:
    applicable: bool
    violations: list = dc_field(default_factory=list)

    @classmethod
    def not_applicable(cls) -> "DetectorResult":
        return cls(applicable=False)

    @classmethod
    def ok(cls) -> "DetectorResult":
        return cls(applicable=True)


@dataclass
class RunContext:
    """Per-run state handed to every detector invocation."""

    now: datetime
    book: FieldCodebook
    mapping: TypeMapping
    universe: dict = dc_field(default_factory=dict)  # field code -> set of values
    _timelines: dict = dc_field(default_factory=dict)

    def timeline_of(self, issue: IssueRecord) -> Timeline:
        # Keyed by id() with the record pinned in the entry: the strong
        # reference keeps the id from being recycled while the context lives.
        entry = self._timelines.get(id(issue))
        if entry is None or entry[0] is not issue:
            entry = (issue, timeline(issue, self.book))
            self._timelines[id(issue)] = entry
        return entry[1]


def _mk_violation(ctx: RunContext, detector_id: str, issue: IssueRecord,
                  explanation: str, evidence: dict) -> Violation:
    return Violation(
        detector_id=detector_id,
        issue_key=issue.key,
        detected_at=ctx.now,
        explanation=explanation,
        evidence=evidence,
    )


def _is_fixed_and_closed(issue: IssueRecord, params: dict) -> bool:
    return _in_list(issue.fields.get("status"), params["closed_statuses"]) and _in_list(
        issue.fields.get("resolution"), params["fixed_resolutions"]
    )


def _placeholder(value: object, params: dict) -> bool:
    text = _norm(value)
    if text in {v.strip().casefold() for v in params.get("invalid_values", [])}:
        return True
    return any(s.casefold() in text for s in params.get("invalid_substrings", []) if s)


# --- field completeness (assignee / priority / severity / environment /
#     components / custom) -----------------------------------------------------

def _run_missing_field(detector_id: str, field_key: str, label: str):
    def run(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
        if not _is_fixed_and_closed(issue, params):
            return DetectorResult.not_applicable()
        if field_key == "custom":
            name = params.get("custom_field") or ""
            value = issue.raw.get(name) if name else None
        else:
            value = issue.fields.get(field_key)
        bad = is_absent(value) or _placeholder(value, params)
        if not bad:
            return DetectorResult.ok()
        shown = display_of(value)
        why = "empty" if is_absent(value) else f"placeholder value '{shown}'"
        result = DetectorResult.ok()
        result.violations.append(
            _mk_violation(
                ctx, detector_id, issue,
                f"Fixed and closed but the {label} field is {why}",
                {"field": label, "value": shown,
                 "status": display_of(issue.fields.get("status")),
                 "resolution": display_of(issue.fields.get("resolution"))},
            )
        )
        return result

    return run


# --- reassignment count -------------------------------------------------------

def collapse_groups(events: list, window_minutes: float) -> list:
    """Group events into bursts anchored at each group's first event: an event
    joins the current group while it is under ``window`` past the anchor.
    Bursts therefore span at most one window and count as one change."""
    groups: list[list] = []
    window = timedelta(minutes=window_minutes)
    for event in events:
        if groups and event.when - groups[-1][0].when < window:
            groups[-1].append(event)
        else:
            groups.append([event])
    return groups


def _run_reassignments(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
    tl = ctx.timeline_of(issue)
    changes = [e for e in tl.post_creational if e.field == "Assignee"]
    groups = collapse_groups(changes, params["collapse_minutes"])
    count = len(groups)
    result = DetectorResult.ok()
    if count > params["threshold"]:
        result.violations.append(
            _mk_violation(
                ctx, "reassignments", issue,
                f"Reassigned {count} times after the first assignment "
                f"(threshold {params['threshold']})",
                {"reassignments": count, "threshold": params["threshold"],
                 "changes_at": [g[0].when.isoformat() for g in groups]},
            )
        )
    return result


# --- team assignment ----------------------------------------------------------

def _run_team_assignment(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
    assignee = issue.fields.get("assignee")
    if is_absent(assignee):
        return DetectorResult.not_applicable()
    shown = display_of(assignee)
    hit = next((k for k in params["keywords"] if k.casefold() in shown.casefold()), None)
    result = DetectorResult.ok()
    if hit:
        result.violations.append(
            _mk_violation(
                ctx, "team_assignment", issue,
                f"Assigned to '{shown}', which looks like a team (keyword '{hit}')",
                {"assignee": shown, "keyword": hit},
            )
        )
    return result


# --- non-assignee resolution ----------------------------------------------------

def _run_nonassignee_resolution(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
    if issue.resolved is None:
        return DetectorResult.not_applicable()
    tl = ctx.timeline_of(issue)
    resolving = None
    for event in tl.post_creational:
        if event.field == "Status" and _in_list(event.to_value, params["closed_statuses"]):
            resolving = event
    if resolving is None or resolving.author is None:
        return DetectorResult.not_applicable()
    assignee = state_at(issue, resolving.when, ctx.book).fields.get("assignee")
    if is_absent(assignee):
        return DetectorResult.not_applicable()
    resolver = resolving.author
    matches = resolver.matches(assignee) or (
        isinstance(assignee, Person) and assignee.matches(resolver)
    )
    result = DetectorResult.ok()
    if not matches:
        result.violations.append(
            _mk_violation(
                ctx, "nonassignee_resolution", issue,
                f"Resolved by '{display_of(resolver)}' while assigned to "
                f"'{display_of(assignee)}'",
                {"resolver": display_of(resolver), "assignee": display_of(assignee),
                 "resolved_at": resolving.when.isoformat()},
            )
        )
    return result


# --- slow severe resolution -----------------------------------------------------

def _run_slow_severe(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
    if not _in_list(issue.fields.get("priority"), params["severe_priorities"]):
        return DetectorResult.not_applicable()
    window = timedelta(days=params["window_days"])
    if issue.resolved is None:
        if not params["flag_open"]:
            return DetectorResult.not_applicable()
        open_for = ctx.now - issue.created
        result = DetectorResult.ok()
        if open_for > window:
            result.violations.append(
                _mk_violation(
                    ctx, "slow_severe_resolution", issue,
                    f"Severe priority '{display_of(issue.fields.get('priority'))}' "
                    f"still open after {open_for.days} days (window {params['window_days']})",
                    {"priority": display_of(issue.fields.get("priority")),
                     "open_days": open_for.days, "window_days": params["window_days"]},
                )
            )
        return result
    took = issue.resolved - issue.created
    result = DetectorResult.ok()
    if took > window:
        result.violations.append(
            _mk_violation(
                ctx, "slow_severe_resolution", issue,
                f"Severe priority '{display_of(issue.fields.get('priority'))}' "
                f"took {took.days} days to resolve (window {params['window_days']})",
                {"priority": display_of(issue.fields.get("priority")),
                 "resolution_days": took.days, "window_days": params["window_days"],
                 "created": issue.created.isoformat(),
                 "resolved": issue.resolved.isoformat()},
            )
        )
    return result


# --- activity gap ----------------------------------------------------------------

def _run_activity_gap(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
    # Activities: creation, every changelog event, every comment. Comments are
    # included so actively-discussed issues never count as dormant.
    stamps = [issue.created]
    stamps += [e.when for e in issue.changelog]
    stamps += [c.when for c in issue.comments]
    if issue.resolved is not None:
        stamps = [s for s in stamps if s <= issue.resolved]
        stamps.append(issue.resolved)
    else:
        stamps.append(ctx.now)
    stamps.sort()
    max_gap = timedelta(days=params["max_gap_days"])
    result = DetectorResult.ok()
    for a, b in zip(stamps, stamps[1:]):
        gap = b - a
        if gap > max_gap:
            result.violations.append(
                _mk_violation(
                    ctx, "activity_gap", issue,
                    f"No activity for {gap.days} days while unresolved "
                    f"(allowed {params['max_gap_days']})",
                    {"gap_days": gap.days, "gap_start": a.isoformat(),
                     "gap_end": b.isoformat(), "max_gap_days": params["max_gap_days"]},
                )
            )
    return result


# --- reopen ----------------------------------------------------------------------

def _run_reopen(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
    tl = ctx.timeline_of(issue)
    changes = [e for e in tl.post_creational if e.field == "Status"]
    groups = collapse_groups(changes, params["collapse_minutes"])
    result = DetectorResult.ok()
    for group in groups:
        merged_from = group[0].from_value
        merged_to = group[-1].to_value
        if merged_from == merged_to:
            continue  # the burst was a net no-op
        left_closed = _in_list(merged_from, params["closed_statuses"])
        into_reopened = _norm(merged_to) == "reopened"
        if left_closed or into_reopened:
            result.violations.append(
                _mk_violation(
                    ctx, "reopen", issue,
                    f"Status left '{display_of(merged_from)}' for "
                    f"'{display_of(merged_to)}' after being closed",
                    {"from": display_of(merged_from), "to": display_of(merged_to),
                     "at": group[0].when.isoformat()},
                )
            )
    return result


# --- comment presence --------------------------------------------------------------

def _run_no_comments(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
    if not _in_list(issue.fields.get("status"), params["closed_statuses"]):
        return DetectorResult.not_applicable()
    result = DetectorResult.ok()
    if len(issue.comments) == 0:
        result.violations.append(
            _mk_violation(
                ctx, "no_comments", issue,
                "Closed without a single comment",
                {"status": display_of(issue.fields.get("status")), "comments": 0},
            )
        )
    return result


# --- text length --------------------------------------------------------------------

def _word_count(text: object) -> int:
    if is_absent(text):
        return 0
    return len(str(text).split())


def _run_sufficient_description(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
    words = _word_count(issue.fields.get("description"))
    result = DetectorResult.ok()
    if words < params["min_words"]:
        result.violations.append(
            _mk_violation(
                ctx, "sufficient_description", issue,
                f"Description has {words} words, fewer than {params['min_words']}",
                {"words": words, "min_words": params["min_words"]},
            )
        )
    return result


def _run_succinct_description(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
    words = _word_count(issue.fields.get("description"))
    result = DetectorResult.ok()
    if words > params["max_words"]:
        result.violations.append(
            _mk_violation(
                ctx, "succinct_description", issue,
                f"Description has {words} words, more than {params['max_words']}",
                {"words": words, "max_words": params["max_words"]},
            )
        )
    return result


def _run_summary_length(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
    summary = issue.fields.get("summary")
    chars = len(str(summary).strip()) if not is_absent(summary) else 0
    result = DetectorResult.ok()
    if chars < params["min_chars"] or chars > params["max_chars"]:
        result.violations.append(
            _mk_violation(
                ctx, "summary_length", issue,
                f"Summary is {chars} characters, outside "
                f"{params['min_chars']}-{params['max_chars']}",
                {"chars": chars, "min_chars": params["min_chars"],
                 "max_chars": params["max_chars"]},
            )
        )
    return result


# --- value cycles ------------------------------------------------------------------

def _allowed_pairs(entries: list) -> set:
    pairs = set()
    for entry in entries:
        parts = [p.strip().casefold() for p in entry.split("|")]
        if len(parts) == 2:
            pairs.add(frozenset(parts))
    return pairs


def _initial_value(tl: Timeline, code: str, issue: IssueRecord):
    for event in reversed(tl.creational):
        if event.field == code:
            return event.to_value
    for event in tl.post_creational:
        if event.field == code:
            return event.from_value
    return issue.field_value(code)


def _run_cycles(code: str, detector_id: str):
    def run(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
        tl = ctx.timeline_of(issue)
        sequence = [_initial_value(tl, code, issue)]
        sequence += [e.to_value for e in tl.post_creational if e.field == code]
        allowed = _allowed_pairs(params["allowed_cycles"])
        result = DetectorResult.ok()
        current = sequence[0]
        seen = {_norm(current)}
        for value in sequence[1:]:
            key = _norm(value)
            if key == _norm(current):
                continue
            if key in seen:
                edge = frozenset({_norm(current), key})
                if edge not in allowed:
                    result.violations.append(
                        _mk_violation(
                            ctx, detector_id, issue,
                            f"{code} returned to '{display_of(value)}' after leaving it "
                            f"(via '{display_of(current)}')",
                            {"field": code, "revisited": display_of(value),
                             "via": display_of(current),
                             "sequence": [display_of(v) for v in sequence]},
                        )
                    )
            seen.add(key)
            current = value
        return result

    return run


# --- properties restated in text ----------------------------------------------------

def _boundary_pattern(token: str):
    return re.compile(r"(?<!\w)" + re.escape(token) + r"(?!\w)", re.IGNORECASE)


def build_value_universe(issues, book: FieldCodebook | None = None) -> dict:
    """All historical values of the consistency fields across a repo."""
    book = book or default_codebook()
    universe: dict[str, set] = {code: set() for code in CONSISTENCY_FIELDS}
    for issue in issues:
        tl = timeline(issue, book)
        for event in tl.events:
            if event.field in universe:
                for value in (event.from_value, event.to_value):
                    if not is_absent(value):
                        universe[event.field].add(display_of(value))
        for code in CONSISTENCY_FIELDS:
            value = issue.field_value(code)
            if not is_absent(value):
                universe[code].add(display_of(value))
    return universe


def _run_inconsistent_properties(issue: IssueRecord, params: dict, ctx: RunContext) -> DetectorResult:
    fields = [f for f in params["fields"] if f in _FIELD_NAME_TOKENS]
    texts = [("description", str(issue.fields.get("description") or ""))]
    texts += [(f"comment[{i}]", c.body) for i, c in enumerate(issue.comments)]
    result = DetectorResult.ok()
    for location, text in texts:
        if not text:
            continue
        for code in fields:
            tokens = _FIELD_NAME_TOKENS[code]
            name_hit = next(
                (t for t in tokens if _boundary_pattern(t).search(text)), None
            )
            if name_hit is None:
                continue
            values = sorted(ctx.universe.get(code, ()))
            value_hit = next(
                (v for v in values if _boundary_pattern(v).search(text)), None
            )
            if value_hit is None:
                continue
            result.violations.append(
                _mk_violation(
                    ctx, "inconsistent_properties", issue,
                    f"{location} mentions the {code} field and its value "
                    f"'{value_hit}'; the field itself may be stale",
                    {"location": location, "field": code,
                     "name_token": name_hit, "value": value_hit},
                )
            )
    return result


# --- registry -------------------------------------------------------------------

def _syn_params() -> list:
    return [
        ParamSpec("closed_statuses", "string_list", list(CLOSED_STATUSES),
                  "status values that count as closed"),
        ParamSpec("fixed_resolutions", "string_list", list(FIXED_RESOLUTIONS),
                  "resolution values that count as fixed"),
    ]


def default_registry() -> Registry:
    reg = Registry()

    def missing(det_id, field_key, label, bp_ids, extra=(), enabled=True):
        run = _run_missing_field(det_id, field_key, label)
        reg.add(
            DetectorSpec(
                id=det_id,
                bp_ids=tuple(bp_ids),
                scope="Issue",
                params=tuple(
                    [
                        *_syn_params(),
                        ParamSpec("invalid_values", "string_list", list(INVALID_VALUES),
                                  "exact values treated as unset"),
                        ParamSpec("invalid_substrings", "string_list",
                                  ["unassigned"] if field_key == "assignee" else [],
                                  "substrings that mark a placeholder"),
                        ParamSpec("applies_to", "string_list", ["BugReport"],
                                  "homogenized type codes, or All"),
                        *extra,
                    ]
                ),
                run=run,
                description=f"Fixed and closed issues must have the {label} field set",
                enabled_default=enabled,
            )
        )

    missing("missing_assignee", "assignee", "assignee", ["BP08"])
    missing("missing_priority", "priority", "priority", ["BP09"])
    missing("missing_severity", "custom", "severity", ["BP10"],
            extra=[ParamSpec("custom_field", "string", "severity",
                             "name of the custom field holding severity")],
            enabled=False)
    missing("missing_environment", "environment", "environment", ["BP11"])
    missing("missing_components", "components", "components", [])

    reg.add(DetectorSpec(
        id="reassignments", bp_ids=("BP18",), scope="Issue",
        params=(
            ParamSpec("threshold", "int", 1, "re-assignments beyond this violate"),
            ParamSpec("collapse_minutes", "float", 5.0,
                      "changes within this window count as one"),
            ParamSpec("applies_to", "string_list", ["BugReport"], ""),
        ),
        run=_run_reassignments,
        description="Count post-creation assignee changes, bursts collapsed",
    ))

    reg.add(DetectorSpec(
        id="team_assignment", bp_ids=("BP03",), scope="Issue",
        params=(
            ParamSpec("keywords", "string_list", ["team", "group", "backlog"],
                      "assignee substrings that indicate a team"),
            ParamSpec("applies_to", "string_list", ["BugReport"], ""),
        ),
        run=_run_team_assignment,
        description="Assignee looks like a team, group or backlog account",
    ))

    reg.add(DetectorSpec(
        id="nonassignee_resolution", bp_ids=("BP12",), scope="Issue",
        params=(
            ParamSpec("closed_statuses", "string_list", list(CLOSED_STATUSES), ""),
            ParamSpec("applies_to", "string_list", ["BugReport"], ""),
        ),
        run=_run_nonassignee_resolution,
        description="The resolving author differs from the assignee at that instant",
    ))

    reg.add(DetectorSpec(
        id="slow_severe_resolution", bp_ids=("BP20",), scope="Issue",
        params=(
            ParamSpec("window_days", "duration_days", 7, "allowed resolution time"),
            ParamSpec("severe_priorities", "string_list", list(SEVERE_PRIORITIES),
                      "priority values that count as severe"),
            ParamSpec("flag_open", "bool", False,
                      "also flag unresolved severe issues older than the window"),
            ParamSpec("applies_to", "string_list", ["BugReport"], ""),
        ),
        run=_run_slow_severe,
        description="Severe issues must resolve within the window",
    ))

    reg.add(DetectorSpec(
        id="activity_gap", bp_ids=("BP13", "BP14"), scope="Issue",
        params=(
            ParamSpec("max_gap_days", "duration_days", 90,
                      "longest allowed silence before resolution"),
            ParamSpec("applies_to", "string_list", ["BugReport"], ""),
        ),
        run=_run_activity_gap,
        description="A gap in activity while unresolved marks a dormant issue",
    ))

    reg.add(DetectorSpec(
        id="reopen", bp_ids=("BP19",), scope="Issue",
        params=(
            ParamSpec("collapse_minutes", "float", 5.0, ""),
            ParamSpec("closed_statuses", "string_list", list(CLOSED_STATUSES), ""),
            ParamSpec("applies_to", "string_list", ["BugReport"], ""),
        ),
        run=_run_reopen,
        description="Status left a closed state, bursts collapsed",
    ))

    reg.add(DetectorSpec(
        id="no_comments", bp_ids=("BP15",), scope="Issue",
        params=(
            ParamSpec("closed_statuses", "string_list", list(CLOSED_STATUSES), ""),
            ParamSpec("applies_to", "string_list", ["BugReport"], ""),
        ),
        run=_run_no_comments,
        description="Closed without any discussion",
    ))

    reg.add(DetectorSpec(
        id="sufficient_description", bp_ids=("BP04",), scope="Issue",
        params=(
            ParamSpec("min_words", "int", 10, "minimum description words"),
            ParamSpec("applies_to", "string_list", ["All"], ""),
        ),
        run=_run_sufficient_description,
        description="Description long enough to explain the issue",
    ))

    reg.add(DetectorSpec(
        id="succinct_description", bp_ids=("BP05",), scope="Issue",
        params=(
            ParamSpec("max_words", "int", 250, "maximum description words"),
            ParamSpec("applies_to", "string_list", ["All"], ""),
        ),
        run=_run_succinct_description,
        description="Description not so long it buries the point",
    ))

    reg.add(DetectorSpec(
        id="summary_length", bp_ids=(), scope="Issue",
        params=(
            ParamSpec("min_chars", "int", 39, ""),
            ParamSpec("max_chars", "int", 70, ""),
            ParamSpec("applies_to", "string_list", ["All"], ""),
        ),
        run=_run_summary_length,
        description="Summary length inside the readable range",
    ))

    status_cycles = _run_cycles("Status", "status_cycles")
    reg.add(DetectorSpec(
        id="status_cycles", bp_ids=("BP06",), scope="Issue",
        params=(
            ParamSpec("allowed_cycles", "string_list", [],
                      "permitted unordered pairs, written 'A|B'"),
            ParamSpec("applies_to", "string_list", ["All"], ""),
        ),
        run=status_cycles,
        description="Status revisits a value it had left",
    ))

    assignee_cycles = _run_cycles("Assignee", "assignee_cycles")
    reg.add(DetectorSpec(
        id="assignee_cycles", bp_ids=("BP07",), scope="Issue",
        params=(
            ParamSpec("allowed_cycles", "string_list", [], "permitted pairs, 'A|B'"),
            ParamSpec("applies_to", "string_list", ["All"], ""),
        ),
        run=assignee_cycles,
        description="Assignee revisits a person it had left",
    ))

    reg.add(DetectorSpec(
        id="inconsistent_properties", bp_ids=("BP17",), scope="ITS",
        params=(
            ParamSpec("fields", "string_list", list(CONSISTENCY_FIELDS),
                      "field codes searched for in text"),
            ParamSpec("applies_to", "string_list", ["All"], ""),
        ),
        run=_run_inconsistent_properties,
        description="Issue text restates a field name and one of its known values",
    ))

    return reg


# --- truncation and the runner -----------------------------------------------

def truncate_issue(
    issue: IssueRecord, t: datetime, book: FieldCodebook | None = None
) -> IssueRecord | None:
    """The issue as it existed at instant t; None if it did not yet exist."""
    if issue.created > t:
        return None
    state = state_at(issue, t, book)
    return IssueRecord(
        key=issue.key,
        project=issue.project,
        raw_issue_type=state.raw_issue_type or issue.raw_issue_type,
        fields=state.fields,
        created=issue.created,
        resolved=state.resolved,
        comments=state.comments,
        links=issue.links,
        changelog=tuple(e for e in issue.changelog if e.when <= t),
        raw=issue.raw,
    )


def truncate_corpus(corpus: Corpus, t: datetime, book: FieldCodebook | None = None) -> Corpus:
    out = Corpus()
    for repo, _, issue in corpus.all_issues():
        cut = truncate_issue(issue, t, book)
        if cut is not None:
            out.add(repo, cut)
    return out


def corpus_horizon(corpus: Corpus) -> datetime | None:
    """Latest timestamp anywhere in the corpus; the deterministic 'now'."""
    latest = None
    for _, _, issue in corpus.all_issues():
        stamps = [issue.created]
        if issue.resolved:
            stamps.append(issue.resolved)
        stamps += [e.when for e in issue.changelog]
        stamps += [c.when for c in issue.comments]
        top = max(stamps)
        latest = top if latest is None or top > latest else latest
    return latest


@dataclass
class Cell:
    applicable: int = 0
    not_applicable: int = 0
    violating: int = 0
    violations: int = 0

    def to_dict(self) -> dict:
        return {
            "applicable": self.applicable,
            "not_applicable": self.not_applicable,
            "violating_issues": self.violating,
            "violations": self.violations,
        }


@dataclass
class RunResult:
    now: datetime
    as_of: datetime | None
    violations: list
    cells: dict  # (detector_id, repo, project) -> Cell
    config_fingerprint: str
    enabled_params: dict  # detector id -> params in effect

    def rate(self, detector_id: str, repo: str, project: str) -> float | None:
        cell = self.cells.get((detector_id, repo, project))
        if cell is None or cell.applicable == 0:
            return None
        return cell.violating / cell.applicable


def _applies(spec_params: dict, issue: IssueRecord, mapping: TypeMapping) -> bool:
    allowed = spec_params.get("applies_to", ["All"])
    if "All" in allowed:
        return True
    code = mapping.lookup(issue.raw_issue_type)[1]
    return code in allowed


def run_all(
    corpus: Corpus,
    cfg,
    registry: Registry | None = None,
    as_of: datetime | None = None,
    now: datetime | None = None,
    book: FieldCodebook | None = None,
    mapping: TypeMapping | None = None,
) -> RunResult:
    """Run every enabled detector over the corpus.

    With as_of set, detection sees each issue reconstructed at that instant
    (truncated timelines and all). ``now`` is the evaluation instant used for
    open-ended checks; it defaults to as_of, then to the corpus horizon, so
    identical inputs always produce identical output.
    """
    registry = registry or default_registry()
    book = book or default_codebook()
    mapping = mapping or default_mapping()

    if as_of is not None:
        corpus = truncate_corpus(corpus, as_of, book)
    if now is None:
        now = as_of or corpus_horizon(corpus) or datetime.now(timezone.utc)

    enabled = [spec for spec in registry if cfg.detectors[spec.id].enabled]
    needs_universe = any(spec.id == "inconsistent_properties" for spec in enabled)

    violations: list[Violation] = []
    cells: dict[tuple, Cell] = {}
    enabled_params = {spec.id: dict(cfg.detectors[spec.id].params) for spec in enabled}

    for repo in sorted(corpus.repos):
        ctx = RunContext(now=now, book=book, mapping=mapping)
        if needs_universe:
            repo_issues = [
                i for project in corpus.repos[repo].values() for i in project
            ]
            ctx.universe = build_value_universe(repo_issues, book)
        for project in sorted(corpus.repos[repo]):
            issues = sorted(corpus.repos[repo][project], key=lambda i: i.key)
            for spec in enabled:
                params = cfg.detectors[spec.id].params
                cell = cells.setdefault((spec.id, repo, project), Cell())
                for issue in issues:
                    if not _applies(params, issue, mapping):
                        cell.not_applicable += 1
                        continue
                    result = spec.run(issue, params, ctx)
                    if not result.applicable:
                        cell.not_applicable += 1
                        continue
                    cell.applicable += 1
                    if result.violations:
                        cell.violating += 1
                        cell.violations += len(result.violations)
                        violations.extend(result.violations)

    violations.sort(key=lambda v: (v.detector_id, v.issue_key, v.explanation))
    return RunResult(
        now=now,
        as_of=as_of,
        violations=violations,
        cells=cells,
        config_fingerprint=cfg.fingerprint(),
        enabled_params=enabled_params,
    )
