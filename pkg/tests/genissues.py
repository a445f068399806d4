"""Seeded synthetic issue factory for property and oracle tests.

Issues are built by forward simulation, so the final field values always agree
with the changelog replay. Gap lengths mix minutes, hours and long silences to
exercise both the burst-collapse windows and the dormancy detector; some fields
are set only in the final state (never in the history) to exercise the
creational back-fill path.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from itelint.ingest import Corpus
from itelint.model import ChangeEvent, Comment, IssueRecord, Person

BASE = datetime(2021, 3, 1, 12, 0, 0, tzinfo=timezone.utc)

PEOPLE = ["alice", "bob", "carol", "dave", "erin", "frank"]
TEAMISH = ["Backlog-Sharding Team", "Support Group", "triage backlog"]
PLACEHOLDERISH = ["unassigned@example.org", "None", "-"]

TYPES = [
    "Bug", "Defect", "Incident", "Issue",      # -> BugReport
    "Task", "Sub-Task", "User Story", "Epic",  # development / requirements
    "Improvement", "Wish", "New Feature",
    "Mystery",                                 # -> Other
]

STATUSES = ["Open", "In Progress", "QA", "Blocked", "Resolved", "Closed", "Done", "Reopened"]
CLOSED = {"resolved", "closed", "done"}
PRIORITIES = ["Blocker", "Critical", "Highest", "Major", "Minor", "Trivial", "P1", "P3"]
RESOLUTIONS = ["Fixed", "Done", "Resolved", "Won't Fix", "Duplicate", "Incomplete"]
COMPONENTS = ["core", "ui", "parser", "docs"]
WORDS = (
    "alpha beta gamma delta epsilon zeta eta theta iota kappa lam mu nu xi "
    "omicron pi rho sigma tau upsilon phi chi psi omega"
).split()


def person(rng: random.Random, teamish=False, placeholderish=False) -> Person:
    pool = list(PEOPLE)
    if teamish:
        pool += TEAMISH
    if placeholderish:
        pool += PLACEHOLDERISH
    name = rng.choice(pool)
    return Person(id=name, display=name)


def words(rng: random.Random, n: int) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(n))


def _gap(rng: random.Random) -> timedelta:
    roll = rng.random()
    if roll < 0.35:
        return timedelta(minutes=rng.uniform(0.5, 9.5))
    if roll < 0.55:
        return timedelta(hours=rng.uniform(1, 20))
    if roll < 0.9:
        return timedelta(days=rng.uniform(1, 40))
    return timedelta(days=rng.uniform(91, 200))


def make_issue(rng: random.Random, key: str, project: str) -> IssueRecord:
    created = BASE + timedelta(days=rng.uniform(0, 60))
    raw_type = rng.choice(TYPES)
    creator = person(rng)

    # live state the simulation evolves
    state: dict[str, object] = {
        "status": rng.choice(["Open", "In Progress"]),
        "priority": rng.choice(PRIORITIES) if rng.random() < 0.85 else None,
        "assignee": person(rng, teamish=True, placeholderish=True).id
        if rng.random() < 0.7 else None,
        "description": words(rng, rng.choice([0, 3, 8, 12, 40, 260])) or None,
        "environment": words(rng, 3) if rng.random() < 0.3 else None,
    }

    events: list[ChangeEvent] = []

    def creational(field_raw, field, value):
        events.append(
            ChangeEvent(
                when=created, author=creator, field_raw=field_raw, field=field,
                from_value=None, to_value=value, creational=True,
            )
        )

    # roughly half the set fields get an explicit creational record; the rest
    # only exist in the final state and must be back-filled by the consumer
    creational("status", "Status", state["status"])
    if state["priority"] and rng.random() < 0.6:
        creational("priority", "Priority", state["priority"])
    if state["assignee"] and rng.random() < 0.6:
        creational("assignee", "Assignee", state["assignee"])
    if state["description"] and rng.random() < 0.4:
        creational("description", "Description", state["description"])

    t = created
    resolved = None
    for _ in range(rng.randint(0, 14)):
        t = t + _gap(rng)
        author = person(rng) if rng.random() < 0.93 else None
        field = rng.choice(
            ["status", "status", "status", "assignee", "assignee", "priority",
             "description", "environment", "resolution", "labels"]
        )
        if field == "status":
            new = rng.choice(STATUSES)
            if new == state["status"]:
                continue
            events.append(ChangeEvent(
                when=t, author=author, field_raw="status", field="Status",
                from_value=state["status"], to_value=new,
            ))
            state["status"] = new
            if new.casefold() in CLOSED:
                resolved = t
                if state.get("resolution") is None and rng.random() < 0.8:
                    res = rng.choice(RESOLUTIONS)
                    events.append(ChangeEvent(
                        when=t, author=author, field_raw="resolution", field="Resolution",
                        from_value=state.get("resolution"), to_value=res,
                    ))
                    state["resolution"] = res
            else:
                resolved = None
        elif field == "assignee":
            new = person(rng, teamish=True, placeholderish=True).id
            if new == state["assignee"]:
                continue
            events.append(ChangeEvent(
                when=t, author=author, field_raw="assignee", field="Assignee",
                from_value=state["assignee"], to_value=new,
            ))
            state["assignee"] = new
        elif field == "priority":
            new = rng.choice(PRIORITIES)
            if new == state["priority"]:
                continue
            events.append(ChangeEvent(
                when=t, author=author, field_raw="priority", field="Priority",
                from_value=state["priority"], to_value=new,
            ))
            state["priority"] = new
        elif field == "description":
            new = words(rng, rng.choice([2, 9, 15, 255, 300]))
            events.append(ChangeEvent(
                when=t, author=author, field_raw="description", field="Description",
                from_value=state["description"], to_value=new,
            ))
            state["description"] = new
        elif field == "environment":
            new = words(rng, 4)
            events.append(ChangeEvent(
                when=t, author=author, field_raw="environment", field="Environment",
                from_value=state["environment"], to_value=new,
            ))
            state["environment"] = new
        elif field == "resolution":
            new = rng.choice(RESOLUTIONS)
            if new == state.get("resolution"):
                continue
            events.append(ChangeEvent(
                when=t, author=author, field_raw="resolution", field="Resolution",
                from_value=state.get("resolution"), to_value=new,
            ))
            state["resolution"] = new
        else:  # an uncoded custom field, lands on Other
            events.append(ChangeEvent(
                when=t, author=author, field_raw="CustomField17", field="Other",
                from_value=None, to_value=words(rng, 1),
            ))

    horizon = t + timedelta(days=rng.uniform(0, 5))
    comments = []
    for _ in range(rng.randint(0, 4)):
        when = created + timedelta(
            seconds=rng.uniform(60, max(61.0, (horizon - created).total_seconds()))
        )
        body = words(rng, rng.randint(1, 12))
        if rng.random() < 0.15:
            body = f"setting status to {rng.choice(STATUSES)} as discussed"
        comments.append(Comment(author=person(rng), when=when, body=body))
    comments.sort(key=lambda c: c.when)

    if state["status"].casefold() not in CLOSED:
        resolved = None
    if resolved is None and rng.random() < 0.05:
        # created already resolved, with no closing event in the history
        resolved = created
        state["status"] = "Closed"
        if not state.get("resolution"):
            state["resolution"] = "Fixed"

    fields: dict[str, object] = {}
    summary = words(rng, rng.choice([2, 6, 9, 14])) or "untitled"
    fields["summary"] = summary
    for key_ in ("status", "priority", "description", "environment", "resolution"):
        if state.get(key_):
            fields[key_] = state[key_]
    if state["assignee"]:
        fields["assignee"] = Person(id=str(state["assignee"]), display=str(state["assignee"]))
    fields["creator"] = creator
    if rng.random() < 0.8:
        fields["reporter"] = creator if rng.random() < 0.7 else person(rng)
    if rng.random() < 0.4:
        fields["components"] = rng.sample(COMPONENTS, rng.randint(1, 2))
    if rng.random() < 0.3:
        fields["labels"] = [rng.choice(WORDS)]

    raw = {}
    if rng.random() < 0.3:
        raw["severity"] = rng.choice(["S1", "S2", "-", "N/A"])

    return IssueRecord(
        key=key,
        project=project,
        raw_issue_type=raw_type,
        fields=fields,
        created=created,
        resolved=resolved,
        comments=tuple(comments),
        links=(),
        changelog=tuple(sorted(events, key=lambda e: e.when)),
        raw=raw,
    )


def make_corpus(rng: random.Random, n_issues: int, repo: str = "synth") -> Corpus:
    corpus = Corpus()
    projects = ["ALPHA", "BETA", "GAMMA"]
    for i in range(n_issues):
        project = rng.choice(projects)
        corpus.add(repo, make_issue(rng, f"{project}-{i + 1}", project))
    return corpus
