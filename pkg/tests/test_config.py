from __future__ import annotations

import random

import pytest

from itelint.config import (
    ConfigLayer,
    DuplicateLayerKind,
    ParamTypeMismatch,
    UnknownDetectorId,
    load_layer,
    merge_layers,
    resolve,
    save_layer,
    validate_layer,
    weight_band,
)
from itelint.registry import DEFAULT_WEIGHT


def layer(kind, scope="x", **settings):
    return ConfigLayer(kind=kind, scope=scope, settings=settings)


class TestResolve:
    def test_empty_stack_gives_registry_defaults(self, registry):
        cfg = resolve([], registry)
        assert set(cfg.detectors) == set(registry.ids())
        gap = cfg.detectors["activity_gap"]
        assert gap.enabled and gap.weight == DEFAULT_WEIGHT
        assert gap.params["max_gap_days"] == 90
        assert cfg.detectors["missing_severity"].enabled is False

    def test_higher_layer_overrides(self, registry):
        org = layer("organisation", activity_gap={"enabled": True})
        team = layer("team", activity_gap={"enabled": False})
        cfg = resolve([org, team], registry)
        assert cfg.detectors["activity_gap"].enabled is False

    def test_per_key_resolution_not_per_block(self, registry):
        org = layer(
            "organisation",
            activity_gap={"enabled": False, "params": {"max_gap_days": 30}, "weight": 9},
        )
        team = layer("team", activity_gap={"weight": 2})
        cfg = resolve([org, team], registry)
        gap = cfg.detectors["activity_gap"]
        assert gap.weight == 2  # overridden
        assert gap.enabled is False  # inherited from org
        assert gap.params["max_gap_days"] == 30  # inherited from org

    def test_params_merge_per_name(self, registry):
        org = layer("organisation",
                    summary_length={"params": {"min_chars": 20, "max_chars": 80}})
        team = layer("team", summary_length={"params": {"max_chars": 100}})
        cfg = resolve([org, team], registry)
        assert cfg.detectors["summary_length"].params["min_chars"] == 20
        assert cfg.detectors["summary_length"].params["max_chars"] == 100

    def test_duplicate_kind_rejected(self, registry):
        with pytest.raises(DuplicateLayerKind):
            resolve([layer("team"), layer("team")], registry)

    def test_unknown_detector_rejected(self, registry):
        with pytest.raises(UnknownDetectorId):
            resolve([layer("team", nonsense={"enabled": True})], registry)

    def test_param_type_mismatch_rejected(self, registry):
        with pytest.raises(ParamTypeMismatch):
            resolve(
                [layer("team", sufficient_description={"params": {"min_words": "ten"}})],
                registry,
            )

    def test_weight_out_of_range_rejected(self, registry):
        with pytest.raises(ParamTypeMismatch):
            resolve([layer("team", activity_gap={"weight": 13})], registry)

    def test_empty_layer_is_identity(self, registry):
        org = layer("organisation", activity_gap={"weight": 7})
        with_empty = resolve([org, layer("team")], registry)
        without = resolve([org], registry)
        assert with_empty == without


class TestValidateLayer:
    def test_out_of_range_weight(self, registry):
        problems = validate_layer(layer("team", activity_gap={"weight": 13}), registry)
        assert any(p.key == "weight" and "out of range" in p.problem for p in problems)

    def test_param_type_error(self, registry):
        problems = validate_layer(
            layer("team", sufficient_description={"params": {"min_words": "ten"}}),
            registry,
        )
        assert any(p.key == "params.min_words" for p in problems)

    def test_unknown_detector(self, registry):
        problems = validate_layer(layer("team", bogus={"enabled": True}), registry)
        assert any(p.detector == "bogus" for p in problems)

    def test_well_formed_layer_is_clean(self, registry):
        good = layer("team", activity_gap={"enabled": True, "weight": 9,
                                           "params": {"max_gap_days": 30}})
        assert validate_layer(good, registry) == []


class TestAssociativity:
    def test_merge_then_resolve_matches_direct(self, registry):
        rng = random.Random(5)
        ids = registry.ids()
        kinds = list(registry.layer_kinds)

        def random_layer(kind):
            settings = {}
            for det in rng.sample(ids, rng.randint(0, 4)):
                entry = {}
                if rng.random() < 0.6:
                    entry["enabled"] = rng.random() < 0.5
                if rng.random() < 0.5:
                    entry["weight"] = rng.randint(1, 12)
                settings[det] = entry
            return ConfigLayer(kind=kind, scope="s", settings=settings)

        for _ in range(50):
            stack = [random_layer(k) for k in kinds if rng.random() < 0.8]
            if not stack:
                continue
            split = rng.randint(1, len(stack))
            direct = resolve(stack, registry)
            prefix = merge_layers(stack[:split], registry)
            recombined = resolve([prefix] + stack[split:], registry)
            assert direct == recombined


class TestFiles:
    def test_round_trip(self, tmp_path, registry):
        original = layer("project", scope="ALPHA", activity_gap={"weight": 3})
        save_layer(tmp_path, original)
        loaded = load_layer(tmp_path, "project", "ALPHA")
        assert loaded == original

    def test_missing_layer_is_none(self, tmp_path):
        assert load_layer(tmp_path, "team", "nope") is None


def test_weight_bands():
    assert weight_band(1) == "Low" and weight_band(4) == "Low"
    assert weight_band(5) == "Medium" and weight_band(8) == "Medium"
    assert weight_band(9) == "High" and weight_band(12) == "High"


def test_custom_layer_kind(registry):
    # organisations may insert their own kinds, e.g. a customer layer between
    # team and project
    import dataclasses

    custom = dataclasses.replace(
        registry, layer_kinds=("organisation", "team", "customer", "project",
                               "sprint", "individual"),
    )
    stack = [
        layer("team", activity_gap={"weight": 3}),
        layer("customer", activity_gap={"weight": 8}),
    ]
    cfg = resolve(stack, custom)
    assert cfg.detectors["activity_gap"].weight == 8
    problems = validate_layer(layer("customer", activity_gap={"weight": 8}), custom)
    assert problems == []
