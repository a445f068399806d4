"""The nested configuration cascade.

Layers are partial, per-detector settings tied to a context (organisation,
team, project, sprint, individual — in increasing precedence). Only keys a
layer explicitly sets participate in merging; everything else inherits from
lower-precedence layers and ultimately from the registry defaults. Resolution
is per-key: a team layer that only sets a weight inherits enabled and params
from the organisation.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .registry import DEFAULT_WEIGHT, Registry, WEIGHT_MAX, WEIGHT_MIN

WEIGHT_BANDS = ((1, 4, "Low"), (5, 8, "Medium"), (9, 12, "High"))


def weight_band(weight: int) -> str:
    for lo, hi, label in WEIGHT_BANDS:
        if lo <= weight <= hi:
            return label
    return "?"


class DuplicateLayerKind(ValueError):
    pass


class UnknownDetectorId(ValueError):
    pass


class ParamTypeMismatch(TypeError):
    pass


@dataclass(frozen=True)
class ConfigLayer:
    """One precedence layer's partial settings.

    settings: detector id -> {"enabled": bool?, "params": {...}?, "weight": int?}
    """

    kind: str
    scope: str
    settings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "scope": self.scope, "detectors": self.settings}

    @classmethod
    def from_dict(cls, data: dict) -> "ConfigLayer":
        return cls(
            kind=data.get("kind", ""),
            scope=data.get("scope", ""),
            settings=data.get("detectors") or {},
        )


@dataclass(frozen=True)
class EffectiveDetectorConfig:
    enabled: bool
    params: dict
    weight: int


@dataclass(frozen=True)
class EffectiveConfig:
    """Fully-resolved settings, total over every registered detector."""

    detectors: dict  # id -> EffectiveDetectorConfig

    def enabled_ids(self) -> list[str]:
        return [d for d, cfg in self.detectors.items() if cfg.enabled]

    def fingerprint(self) -> str:
        payload = {
            d: {"enabled": c.enabled, "params": c.params, "weight": c.weight}
            for d, c in self.detectors.items()
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class LayerProblem:
    detector: str
    key: str
    problem: str

    def to_dict(self) -> dict:
        return {"detector": self.detector, "key": self.key, "problem": self.problem}


def validate_layer(layer: ConfigLayer, registry: Registry) -> list[LayerProblem]:
    """Report unknown detector ids, out-of-range weights and param type errors.
    Never raises; an empty report means the layer is usable."""
    problems = []
    if layer.kind and layer.kind not in registry.layer_kinds:
        problems.append(LayerProblem("", "kind", f"unknown layer kind {layer.kind!r}"))
    for det_id, entry in layer.settings.items():
        spec = registry.get(det_id)
        if spec is None:
            problems.append(LayerProblem(det_id, "", "unknown detector id"))
            continue
        if not isinstance(entry, dict):
            problems.append(LayerProblem(det_id, "", "settings must be an object"))
            continue
        for key in entry:
            if key not in ("enabled", "params", "weight"):
                problems.append(LayerProblem(det_id, key, "unknown setting"))
        if "enabled" in entry and not isinstance(entry["enabled"], bool):
            problems.append(LayerProblem(det_id, "enabled", "must be a boolean"))
        if "weight" in entry:
            weight = entry["weight"]
            if not isinstance(weight, int) or isinstance(weight, bool):
                problems.append(LayerProblem(det_id, "weight", "must be an integer"))
            elif not WEIGHT_MIN <= weight <= WEIGHT_MAX:
                problems.append(
                    LayerProblem(
                        det_id,
                        "weight",
                        f"out of range: {weight} not in [{WEIGHT_MIN}, {WEIGHT_MAX}]",
                    )
                )
        for name, value in (entry.get("params") or {}).items():
            pspec = spec.param(name)
            if pspec is None:
                problems.append(LayerProblem(det_id, f"params.{name}", "unknown param"))
                continue
            issue = pspec.check(value)
            if issue:
                problems.append(LayerProblem(det_id, f"params.{name}", issue))
    return problems


def merge_layers(layers, registry: Registry) -> ConfigLayer:
    """Collapse a stack into one virtual layer: per key, the highest-precedence
    setter wins. Raises on duplicate kinds so ambiguous stacks cannot merge."""
    ordered = sorted(layers, key=lambda l: registry.precedence(l.kind))
    seen_kinds = set()
    for layer in ordered:
        if layer.kind in seen_kinds:
            raise DuplicateLayerKind(f"two layers of kind {layer.kind!r} in one stack")
        seen_kinds.add(layer.kind)
    settings: dict[str, dict] = {}
    for layer in ordered:  # low to high precedence: later writes win per key
        for det_id, entry in layer.settings.items():
            slot = settings.setdefault(det_id, {"params": {}})
            if "enabled" in entry:
                slot["enabled"] = entry["enabled"]
            if "weight" in entry:
                slot["weight"] = entry["weight"]
            for name, value in (entry.get("params") or {}).items():
                slot["params"][name] = value
    cleaned = {}
    for det_id, slot in settings.items():
        entry = {}
        if "enabled" in slot:
            entry["enabled"] = slot["enabled"]
        if "weight" in slot:
            entry["weight"] = slot["weight"]
        if slot["params"]:
            entry["params"] = slot["params"]
        cleaned[det_id] = entry
    kind = ordered[-1].kind if ordered else registry.layer_kinds[0]
    scope = ordered[-1].scope if ordered else "merged"
    return ConfigLayer(kind=kind, scope=scope, settings=cleaned)


def resolve(layers, registry: Registry) -> EffectiveConfig:
    """Merge a layer stack over the registry defaults into a total config.

    Raises DuplicateLayerKind, UnknownDetectorId or ParamTypeMismatch; use
    validate_layer for the report-returning variant.
    """
    merged = merge_layers(layers, registry)
    for det_id, entry in merged.settings.items():
        spec = registry.get(det_id)
        if spec is None:
            raise UnknownDetectorId(det_id)
        for name, value in (entry.get("params") or {}).items():
            pspec = spec.param(name)
            if pspec is None:
                raise ParamTypeMismatch(f"{det_id}: unknown param {name!r}")
            problem = pspec.check(value)
            if problem:
                raise ParamTypeMismatch(f"{det_id}.{name}: {problem}")
        weight = entry.get("weight")
        if weight is not None and (
            not isinstance(weight, int)
            or isinstance(weight, bool)
            or not WEIGHT_MIN <= weight <= WEIGHT_MAX
        ):
            raise ParamTypeMismatch(f"{det_id}.weight: out of range {weight!r}")

    detectors = {}
    for spec in registry:
        entry = merged.settings.get(spec.id, {})
        params = spec.default_params()
        params.update(entry.get("params") or {})
        detectors[spec.id] = EffectiveDetectorConfig(
            enabled=entry.get("enabled", spec.enabled_default),
            params=params,
            weight=entry.get("weight", DEFAULT_WEIGHT),
        )
    return EffectiveConfig(detectors=detectors)


# --- the layer tree on disk ---------------------------------------------------

def layer_path(config_dir, kind: str, scope: str) -> Path:
    return Path(config_dir) / kind / f"{scope}.json"


def load_layer(config_dir, kind: str, scope: str) -> ConfigLayer | None:
    path = layer_path(config_dir, kind, scope)
    if not path.exists():
        return None
    data = json.loads(path.read_text(encoding="utf-8"))
    data.setdefault("kind", kind)
    data.setdefault("scope", scope)
    return ConfigLayer.from_dict(data)


def save_layer(config_dir, layer: ConfigLayer) -> None:
    path = layer_path(config_dir, layer.kind, layer.scope)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".json.tmp")
    tmp.write_text(json.dumps(layer.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
    tmp.replace(path)  # atomic on POSIX


def context_layers(
    config_dir,
    registry: Registry,
    project: str | None = None,
    team: str | None = None,
    sprint: str | None = None,
    individual: str | None = None,
) -> list[ConfigLayer]:
    """Layers applying to a context: the organisation default plus whichever
    scoped layers exist for the given context ids."""
    if config_dir is None:
        return []
    wanted = {
        "organisation": "default",
        "team": team,
        "project": project,
        "sprint": sprint,
        "individual": individual,
    }
    layers = []
    for kind in registry.layer_kinds:
        scope = wanted.get(kind)
        if scope is None:
            continue
        layer = load_layer(config_dir, kind, scope)
        if layer is not None:
            layers.append(layer)
    return layers
