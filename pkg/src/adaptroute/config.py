"""Canonical defaults and TOML config loading.

One file holds every tunable the engine exposes; CLI flags override file
values, and file values override the built-in defaults below.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Any, Mapping

from .complexity import ComplexityWeights
from .executors import ControlConfig, SyntheticModel
from .fusion import FusionPolicy
from .router import ThresholdSet, UtilityWeights
from .types import ConfigError, RoutingMode

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


def load_toml(path: str) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), Mapping):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclass
class Settings:
    """Fully resolved run settings."""

    thresholds: ThresholdSet = field(default_factory=ThresholdSet)
    utility: UtilityWeights = field(default_factory=UtilityWeights)
    complexity: ComplexityWeights = field(default_factory=ComplexityWeights)
    fusion: FusionPolicy = field(default_factory=FusionPolicy)
    control: ControlConfig = field(default_factory=ControlConfig)
    model: SyntheticModel = field(default_factory=SyntheticModel)
    min_support: int = 5
    resource_alpha: float = 0.3
    sample_period_ms: float = 100.0


def settings_from_dict(cfg: Mapping[str, Any]) -> Settings:
    """Build Settings from a (possibly partial) config mapping."""
    try:
        th = cfg.get("thresholds", {})
        thresholds = ThresholdSet(
            t_low_k=float(th.get("t_low_k", 0.4)),
            t_high_k=float(th.get("t_high_k", 0.8)),
            t_low_r=float(th.get("t_low_r", 0.6)),
            t_high_r=float(th.get("t_high_r", 0.85)),
        )
        ut = cfg.get("utility", {})
        utility = UtilityWeights(
            w_acc=float(ut.get("w_acc", 0.6)),
            w_lat=float(ut.get("w_lat", 0.25)),
            w_cost=float(ut.get("w_cost", 0.15)),
            tau_max=float(ut.get("tau_max", 30.0)),
            c_max=float(ut.get("c_max", 1.0)),
        )
        cx = cfg.get("complexity", {})
        complexity = ComplexityWeights(
            w_a=float(cx.get("w_a", 1.0)),
            w_l=float(cx.get("w_l", 1.0)),
            w_sh1=float(cx.get("w_sh1", 0.05)),
            w_sh2=float(cx.get("w_sh2", 0.1)),
            max_corpus_len=int(cx.get("max_corpus_len", 48)),
        )
        fu = cfg.get("fusion", {})
        fusion = FusionPolicy(
            beta_agree=float(fu.get("beta_agree", 1.2)),
            beta_conflict=float(fu.get("beta_conflict", 0.8)),
            beta_mismatch=float(fu.get("beta_mismatch", 0.6)),
            min_confidence=float(fu.get("min_confidence", 0.3)),
            numeric_tolerance=float(fu.get("numeric_tolerance", 1e-6)),
        )
        ct = cfg.get("control", {})
        control = ControlConfig(
            retry_limit=int(ct.get("retry_limit", 2)),
            max_query_time_s=float(ct.get("max_query_time_s", 30.0)),
            optimizer_cadence=int(ct.get("optimizer_cadence", 10)),
            mode=RoutingMode(ct.get("mode", RoutingMode.ADAPTIVE.value)),
            hint_delta=float(ct.get("hint_delta", 0.15)),
            fusion_overhead_s=float(ct.get("fusion_overhead_s", 0.02)),
        )
        model = SyntheticModel.from_dict(cfg.get("model", {}))
        rules = cfg.get("rules", {})
        resources = cfg.get("resources", {})
        return Settings(
            thresholds=thresholds,
            utility=utility,
            complexity=complexity,
            fusion=fusion,
            control=control,
            model=model,
            min_support=int(rules.get("min_support", 5)),
            resource_alpha=float(resources.get("alpha", 0.3)),
            sample_period_ms=float(resources.get("period_ms", 100.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad configuration: {exc}") from exc


def load_settings(path: str | None = None, overrides: Mapping[str, Any] | None = None) -> Settings:
    """Defaults, then the TOML file, then programmatic overrides."""
    cfg: dict = {}
    if path is not None:
        cfg = _merge(cfg, load_toml(path))
    if overrides:
        cfg = _merge(cfg, overrides)
    return settings_from_dict(cfg)
