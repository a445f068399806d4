"""Homogenize raw issue types into activity themes and codes, compute which
codes a project actually uses, and rank usage-set co-occurrence across
projects.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

ACTIVITIES = ("Requirements", "Development", "Maintenance", "UserSupport", "Other")

TYPE_CODES = (
    "Epic",
    "Story",
    "NewFeature",
    "FeatureRequest",
    "ImprovementSuggestion",
    "Task",
    "SubTask",
    "QualityAssurance",
    "Documentation",
    "BugReport",
    "LegacyUpgrade",
    "ContinuousIntegration",
    "UserSupport",
    "Other",
)

# A code counts as "used" by a project at >= 5 occurrences, or at >= 10% of
# all issues for projects with fewer than 50 issues.
USAGE_MIN_COUNT = 5
USAGE_SMALL_PROJECT = 50
USAGE_SMALL_RATIO = 0.10


def _norm(raw: str) -> str:
    return " ".join(raw.split()).casefold()


@dataclass(frozen=True)
class TypeMapping:
    """Raw type name -> (activity, code). Lookup is stable under case and
    whitespace normalization of the raw name; unknown names map to Other."""

    table: dict

    @classmethod
    def from_mapping(cls, activities: dict) -> "TypeMapping":
        table: dict[str, tuple[str, str]] = {}
        for activity, codes in activities.items():
            for code, names in codes.items():
                for name in names:
                    table[_norm(name)] = (activity, code)
        return cls(table=table)

    @classmethod
    def default(cls) -> "TypeMapping":
        data = resources.files("itelint.data").joinpath("typemap.json")
        return cls.from_mapping(json.loads(data.read_text()))

    @classmethod
    def load(cls, path) -> "TypeMapping":
        with open(path, encoding="utf-8") as fh:
            return cls.from_mapping(json.load(fh))

    def extended(self, extra: dict) -> "TypeMapping":
        table = dict(self.table)
        for name, target in extra.items():
            table[_norm(name)] = tuple(target)
        return TypeMapping(table=table)

    def lookup(self, raw: str) -> tuple[str, str]:
        if not raw:
            return ("Other", "Other")
        return self.table.get(_norm(raw), ("Other", "Other"))


_DEFAULT: TypeMapping | None = None


def default_mapping() -> TypeMapping:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = TypeMapping.default()
    return _DEFAULT


def map_issue_type(raw: str, mapping: TypeMapping | None = None) -> tuple[str, str]:
    """(activity, code) for a raw issue type name. Total and deterministic."""
    return (mapping or default_mapping()).lookup(raw)


def usage_set(issues, mapping: TypeMapping | None = None) -> frozenset:
    """Codes a project genuinely uses, per the count/ratio threshold rule."""
    mapping = mapping or default_mapping()
    counts: dict[str, int] = {}
    total = 0
    for issue in issues:
        total += 1
        code = mapping.lookup(issue.raw_issue_type)[1]
        counts[code] = counts.get(code, 0) + 1
    used = set()
    for code, n in counts.items():
        if n >= USAGE_MIN_COUNT:
            used.add(code)
        elif total < USAGE_SMALL_PROJECT and total > 0 and n / total >= USAGE_SMALL_RATIO:
            used.add(code)
    return frozenset(used)


@dataclass(frozen=True)
class UsagePattern:
    codes: tuple  # sorted code names
    count: int
    percent: float
    cumulative: float


def cooccurrence_rank(corpus, mapping: TypeMapping | None = None) -> list[UsagePattern]:
    """Rank identical usage sets across all projects of a corpus.

    Sorted by project count descending; ties broken by the lexicographic order
    of the sorted code tuple so the ranking is deterministic.
    """
    mapping = mapping or default_mapping()
    sets: dict[tuple, int] = {}
    total_projects = 0
    for repo in sorted(corpus.repos):
        for project in sorted(corpus.repos[repo]):
            total_projects += 1
            used = tuple(sorted(usage_set(corpus.repos[repo][project], mapping)))
            sets[used] = sets.get(used, 0) + 1
    ranked = sorted(sets.items(), key=lambda kv: (-kv[1], kv[0]))
    patterns = []
    running = 0.0
    for codes, count in ranked:
        pct = 100.0 * count / total_projects if total_projects else 0.0
        running += pct
        patterns.append(UsagePattern(codes=codes, count=count, percent=pct, cumulative=running))
    return patterns
