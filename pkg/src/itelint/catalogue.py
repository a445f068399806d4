"""Load, validate, and query the shipped catalogue of best practices.

Each practice is one JSON document with five sections (meta, summary,
recommendation, context, violation). Every dimension must be present and hold
either content, "None" (no known value) or "Unknown" (a value should exist but
could not be determined) — the two sentinels stay machine-distinguishable so
gaps can be surfaced rather than papered over.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

ITS_SCOPES = ("Issue", "IssuePair", "Project", "Sprint", "ITS")

_SECTIONS = {
    "meta": ("name", "sources"),
    "summary": ("objective", "motivation"),
    "recommendation": ("process", "its"),
    "context": (
        "stakeholder_benefits",
        "stakeholder_costs",
        "its_scope",
        "issue_types",
        "inclusion_factors",
        "exclusion_factors",
    ),
    "violation": ("smells", "consequences", "causes", "algorithmic_detection"),
}


class SchemaViolation(ValueError):
    """A catalogue document does not satisfy the ontology schema."""


@dataclass(frozen=True)
class BestPractice:
    id: str
    meta: dict
    summary: dict
    recommendation: dict
    context: dict
    violation: dict

    @property
    def name(self) -> str:
        return self.meta["name"]

    @property
    def detector_id(self) -> str | None:
        return self.violation.get("detector_id")

    @property
    def its_scope(self) -> str:
        return self.context["its_scope"]

    @property
    def issue_types(self) -> list:
        types = self.context["issue_types"]
        return types if isinstance(types, list) else [types]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "meta": self.meta,
            "summary": self.summary,
            "recommendation": self.recommendation,
            "context": self.context,
            "violation": self.violation,
        }


def _dimension_ok(value) -> bool:
    if isinstance(value, str):
        return value.strip() != ""
    if isinstance(value, list):
        return all(isinstance(v, str) and v.strip() for v in value)
    return False


def validate_practice(doc: dict) -> list[str]:
    """Schema problems for one document; empty when it conforms."""
    problems = []
    pid = doc.get("id")
    if not isinstance(pid, str) or not pid.strip():
        problems.append("id: missing")
    for section, dims in _SECTIONS.items():
        node = doc.get(section)
        if not isinstance(node, dict):
            problems.append(f"{section}: section missing")
            continue
        for dim in dims:
            if dim not in node:
                problems.append(f"{section}.{dim}: dimension absent")
            elif not _dimension_ok(node[dim]):
                problems.append(f"{section}.{dim}: empty value")
    context = doc.get("context") or {}
    scope = context.get("its_scope")
    if isinstance(scope, str) and scope not in ITS_SCOPES:
        problems.append(f"context.its_scope: unknown scope {scope!r}")
    return problems


@dataclass
class Catalogue:
    practices: dict = field(default_factory=dict)  # id -> BestPractice
    smells: dict = field(default_factory=dict)  # smell id -> {"smell", "bp_ids"}

    def get(self, pid: str) -> BestPractice | None:
        return self.practices.get(pid)

    def __len__(self) -> int:
        return len(self.practices)

    def query(
        self,
        issue_type: str | None = None,
        its_scope: str | None = None,
        has_detector: bool | None = None,
        smell_id: str | None = None,
    ) -> list[BestPractice]:
        """Conjunction of filters, returned in deterministic id order."""
        allowed_ids = None
        if smell_id is not None:
            link = self.smells.get(smell_id)
            allowed_ids = set(link["bp_ids"]) if link else set()
        out = []
        for pid in sorted(self.practices):
            bp = self.practices[pid]
            if allowed_ids is not None and pid not in allowed_ids:
                continue
            if its_scope is not None and bp.its_scope != its_scope:
                continue
            if has_detector is not None and bool(bp.detector_id) != has_detector:
                continue
            if issue_type is not None and not _type_matches(bp.issue_types, issue_type):
                continue
            out.append(bp)
        return out

    def smell_links(self, bp_id: str) -> list[str]:
        return sorted(s for s, link in self.smells.items() if bp_id in link["bp_ids"])


def _type_matches(types: list, wanted: str) -> bool:
    folded = wanted.replace(" ", "").casefold()
    for t in types:
        entry = t.replace(" ", "").casefold()
        if entry == "all" or entry == folded:
            return True
    return False


def load_catalogue(
    documents=None, smell_table=None, detector_ids=None
) -> Catalogue:
    """Build a catalogue from documents (default: the shipped data).

    Raises SchemaViolation naming the first offending entry and dimension.
    When a detector-id universe is provided, cross-links are checked against
    it so a practice can never point at an unregistered detector.
    """
    if documents is None:
        data_dir = resources.files("itelint.data").joinpath("catalogue")
        documents = [
            json.loads(entry.read_text())
            for entry in sorted(data_dir.iterdir(), key=lambda e: e.name)
            if entry.name.endswith(".json")
        ]
    if smell_table is None:
        smell_table = json.loads(
            resources.files("itelint.data").joinpath("smells.json").read_text()
        )

    catalogue = Catalogue()
    for doc in documents:
        problems = validate_practice(doc)
        if problems:
            raise SchemaViolation(f"{doc.get('id', '<no id>')}: {problems[0]}")
        detector = (doc.get("violation") or {}).get("detector_id")
        if detector and detector_ids is not None and detector not in detector_ids:
            raise SchemaViolation(f"{doc['id']}: violation.detector_id: unknown detector {detector!r}")
        bp = BestPractice(
            id=doc["id"],
            meta=doc["meta"],
            summary=doc["summary"],
            recommendation=doc["recommendation"],
            context=doc["context"],
            violation=doc["violation"],
        )
        if bp.id in catalogue.practices:
            raise SchemaViolation(f"{bp.id}: duplicate id")
        catalogue.practices[bp.id] = bp

    for entry in smell_table:
        for bp_id in entry["bp_ids"]:
            if bp_id not in catalogue.practices:
                raise SchemaViolation(f"{entry['id']}: links to unknown practice {bp_id}")
        catalogue.smells[entry["id"]] = {"smell": entry["smell"], "bp_ids": list(entry["bp_ids"])}
    return catalogue


def render_practice(bp: BestPractice, width: int = 78) -> str:
    """Plain-text table of one practice, section by section."""
    import textwrap

    lines = [f"{bp.id}: {bp.name}", "=" * width]
    sections = (
        ("Meta", bp.meta, ("name", "sources")),
        ("Summary", bp.summary, ("objective", "motivation")),
        ("Recommendation", bp.recommendation, ("process", "its")),
        ("Context", bp.context, _SECTIONS["context"]),
        ("Violation", bp.violation, _SECTIONS["violation"]),
    )
    for title, node, dims in sections:
        lines.append(title)
        lines.append("-" * len(title))
        for dim in dims:
            value = node.get(dim)
            label = dim.replace("_", " ").title()
            if isinstance(value, list):
                value = "; ".join(value)
            wrapped = textwrap.wrap(f"{label}: {value}", width=width) or [f"{label}:"]
            lines.extend(wrapped)
        if node.get("detector_id"):
            lines.append(f"Detector: {node['detector_id']}")
        lines.append("")
    return "\n".join(lines)
