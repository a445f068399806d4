"""Detector registry plumbing: parameter schemas, detector specs, and the
registry container the configuration cascade resolves against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

PARAM_TYPES = ("int", "float", "duration_days", "string", "string_list", "bool")

DEFAULT_WEIGHT = 5
WEIGHT_MIN, WEIGHT_MAX = 1, 12

# Context layer kinds in increasing precedence. Organisations may insert
# custom kinds (e.g. a customer layer) via Registry.layer_kinds.
DEFAULT_LAYER_KINDS = ("organisation", "team", "project", "sprint", "individual")


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: str
    default: object
    description: str = ""

    def check(self, value: object) -> str | None:
        """None when value fits the declared type, else a problem string."""
        kind = self.type
        if kind == "bool":
            ok = isinstance(value, bool)
        elif kind == "int":
            ok = isinstance(value, int) and not isinstance(value, bool)
        elif kind in ("float", "duration_days"):
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        elif kind == "string":
            ok = isinstance(value, str)
        elif kind == "string_list":
            ok = isinstance(value, list) and all(isinstance(v, str) for v in value)
        else:
            return f"unknown param type {kind!r}"
        if not ok:
            return f"expected {kind}, got {type(value).__name__}"
        return None


@dataclass(frozen=True)
class DetectorSpec:
    """One registered violation detector."""

    id: str
    bp_ids: tuple
    scope: str  # "Issue" | "ITS"
    params: tuple  # ParamSpec ...
    run: object  # callable(issue, params, ctx) -> DetectorResult
    description: str = ""
    enabled_default: bool = True

    def param(self, name: str) -> ParamSpec | None:
        for spec in self.params:
            if spec.name == name:
                return spec
        return None

    def default_params(self) -> dict:
        return {p.name: p.default for p in self.params}


@dataclass
class Registry:
    detectors: dict = field(default_factory=dict)  # id -> DetectorSpec, ordered
    layer_kinds: tuple = DEFAULT_LAYER_KINDS

    def add(self, spec: DetectorSpec) -> None:
        if spec.id in self.detectors:
            raise ValueError(f"duplicate detector id {spec.id}")
        self.detectors[spec.id] = spec

    def get(self, detector_id: str) -> DetectorSpec | None:
        return self.detectors.get(detector_id)

    def ids(self) -> list[str]:
        return list(self.detectors)

    def __contains__(self, detector_id: str) -> bool:
        return detector_id in self.detectors

    def __iter__(self):
        return iter(self.detectors.values())

    def precedence(self, kind: str) -> int:
        return self.layer_kinds.index(kind)

    def describe(self) -> list[dict]:
        """Introspection listing for --list-detectors and GET /detectors."""
        out = []
        for spec in self.detectors.values():
            out.append(
                {
                    "id": spec.id,
                    "bp_ids": list(spec.bp_ids),
                    "scope": spec.scope,
                    "enabled_default": spec.enabled_default,
                    "description": spec.description,
                    "params": [
                        {
                            "name": p.name,
                            "type": p.type,
                            "default": p.default,
                            "description": p.description,
                        }
                        for p in spec.params
                    ],
                }
            )
        return out
