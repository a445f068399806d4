"""Descriptive statistics over evolution timelines.

Quartiles use the median-of-halves convention: the data is split on its
median, and for odd n the central element is excluded from both halves. The
whiskers are the most extreme actual data points within 1.5 IQR of the box;
values beyond them are outliers and never stretch a whisker.
"""

from __future__ import annotations

from dataclasses import dataclass

from .evolution import FieldCodebook, classify_ownership, default_codebook, field_theme, timeline
from .model import OTHER
from .typemap import TypeMapping, default_mapping

WHISKER_REACH = 1.5


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class BoxStats:
    median: float
    q1: float
    q3: float
    lower_whisker: float
    upper_whisker: float
    n: int

    def to_dict(self) -> dict:
        return {
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "lower_whisker": self.lower_whisker,
            "upper_whisker": self.upper_whisker,
            "n": self.n,
        }


def _median(sorted_values: list) -> float:
    n = len(sorted_values)
    mid = n // 2
    if n % 2:
        return float(sorted_values[mid])
    return (sorted_values[mid - 1] + sorted_values[mid]) / 2.0


def box_stats(values) -> BoxStats:
    """Five-number summary with median-of-halves quartiles."""
    data = sorted(float(v) for v in values)
    n = len(data)
    if n == 0:
        raise EmptyInput("box_stats needs at least one value")
    med = _median(data)
    half = n // 2
    if n == 1:
        q1 = q3 = med
    else:
        q1 = _median(data[:half])
        q3 = _median(data[-half:])
    iqr = q3 - q1
    lo_fence = q1 - WHISKER_REACH * iqr
    hi_fence = q3 + WHISKER_REACH * iqr
    inside_lo = [v for v in data if v >= lo_fence]
    inside_hi = [v for v in data if v <= hi_fence]
    lower = min(inside_lo) if inside_lo else q1
    upper = max(inside_hi) if inside_hi else q3
    # The box itself always bounds the whiskers.
    lower = min(lower, q1)
    upper = max(upper, q3)
    return BoxStats(median=med, q1=q1, q3=q3, lower_whisker=lower, upper_whisker=upper, n=n)


def _issue_group(issue, group_by: str, mapping: TypeMapping) -> str:
    activity, code = mapping.lookup(issue.raw_issue_type)
    return activity if group_by == "activity" else code


def evolution_counts(
    corpus,
    group_by: str = "activity",
    mapping: TypeMapping | None = None,
    book: FieldCodebook | None = None,
) -> dict:
    """Post-creational evolutions per issue, grouped by the issue's activity
    theme or homogenized type code. Events on fields outside the codebook are
    not counted."""
    if group_by not in ("activity", "code"):
        raise ValueError(f"group_by must be activity or code, not {group_by!r}")
    mapping = mapping or default_mapping()
    book = book or default_codebook()
    groups: dict[str, list] = {}
    for _, _, issue in corpus.all_issues():
        tl = timeline(issue, book)
        count = sum(1 for e in tl.post_creational if e.field != OTHER)
        groups.setdefault(_issue_group(issue, group_by, mapping), []).append(count)
    return groups


def evolution_time_offsets(
    corpus,
    group_by: str = "activity",
    mapping: TypeMapping | None = None,
    book: FieldCodebook | None = None,
) -> dict:
    """Days between issue creation and each post-creational evolution.

    group_by: "activity" (the issue's activity theme), "theme" (the changed
    field's information theme) or "code" (the changed field's code).
    """
    if group_by not in ("activity", "theme", "code"):
        raise ValueError(f"group_by must be activity, theme or code, not {group_by!r}")
    mapping = mapping or default_mapping()
    book = book or default_codebook()
    groups: dict[str, list] = {}
    for _, _, issue in corpus.all_issues():
        for event in timeline(issue, book).post_creational:
            if event.field == OTHER:
                continue
            offset = (event.when - issue.created).total_seconds() / 86400.0
            if group_by == "activity":
                label = mapping.lookup(issue.raw_issue_type)[0]
            elif group_by == "theme":
                label = field_theme(event.field, book)
            else:
                label = event.field
            groups.setdefault(label, []).append(offset)
    return groups


def summarize(groups: dict) -> dict:
    """box_stats per group, skipping empty groups."""
    return {label: box_stats(values) for label, values in sorted(groups.items()) if values}


OWNER_SUBSETS = ("CRA", "CRa", "CrA", "Cra", "cRA", "cRa", "crA")


@dataclass(frozen=True)
class OwnershipColumn:
    activity: str  # activity theme or "All"
    theme: str  # information theme or "All"
    events: int
    owner_pct: float
    non_owner_pct: float
    subset_pct: dict  # owner-subset class -> pct of owner events
    flagged_unknown_authors: int

    def to_dict(self) -> dict:
        return {
            "activity": self.activity,
            "theme": self.theme,
            "events": self.events,
            "owner_pct": self.owner_pct,
            "non_owner_pct": self.non_owner_pct,
            "subsets": dict(self.subset_pct),
            "flagged_unknown_authors": self.flagged_unknown_authors,
        }


def ownership_table(
    corpus,
    mapping: TypeMapping | None = None,
    book: FieldCodebook | None = None,
) -> list[OwnershipColumn]:
    """Who evolves issues, split by activity x information theme.

    Owner% and Non-Owner% add to 100 per column; the seven owner subsets add
    to 100 of the owner evolutions. Unknown authors count as Non-Owner and are
    tallied separately.
    """
    mapping = mapping or default_mapping()
    book = book or default_codebook()
    tally: dict[tuple, dict] = {}

    def bucket(activity, theme):
        slot = tally.get((activity, theme))
        if slot is None:
            slot = {"events": 0, "owner": 0, "unknown": 0,
                    "subsets": {s: 0 for s in OWNER_SUBSETS}}
            tally[(activity, theme)] = slot
        return slot

    for _, _, issue in corpus.all_issues():
        activity = mapping.lookup(issue.raw_issue_type)[0]
        for event in timeline(issue, book).post_creational:
            if event.field == OTHER or event.synthetic:
                continue
            theme = field_theme(event.field, book)
            role = classify_ownership(event, issue, book)
            for col in ((activity, theme), (activity, "All"), ("All", theme), ("All", "All")):
                slot = bucket(*col)
                slot["events"] += 1
                if not role.author_known:
                    slot["unknown"] += 1
                if role.is_owner:
                    slot["owner"] += 1
                    slot["subsets"][role.cls] += 1

    columns = []
    for (activity, theme), slot in sorted(tally.items()):
        events = slot["events"]
        owner = slot["owner"]
        owner_pct = 100.0 * owner / events if events else 0.0
        subsets = {
            s: (100.0 * slot["subsets"][s] / owner if owner else 0.0)
            for s in OWNER_SUBSETS
        }
        columns.append(
            OwnershipColumn(
                activity=activity,
                theme=theme,
                events=events,
                owner_pct=owner_pct,
                non_owner_pct=100.0 - owner_pct if events else 0.0,
                subset_pct=subsets,
                flagged_unknown_authors=slot["unknown"],
            )
        )
    return columns
