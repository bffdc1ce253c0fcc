"""Engine and task configuration dataclasses."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .distance import WeightsConfig, DEFAULT_WEIGHTS
from .nodes import SchemaDef
from .parser import parse_schema


@dataclass(frozen=True)
class EngineConfig:
    weights: WeightsConfig = DEFAULT_WEIGHTS
    rule_toggles: tuple = ()  # ((rule id, enabled), ...); absent means enabled
    auto_accept_threshold: Fraction = Fraction(2)  # 2 * default w3
    hint_verbosity: str = "full"  # "full" | "terse"
    hint_cap: int = 10
    atom_cap: int = 64

    def toggles_dict(self):
        return dict(self.rule_toggles)

    def to_dict(self):
        return {
            "weights": {"w1": str(self.weights.w1), "w2": str(self.weights.w2),
                        "w3": str(self.weights.w3)},
            "rule_toggles": {k: v for k, v in self.rule_toggles},
            "auto_accept_threshold": str(self.auto_accept_threshold),
            "hint_verbosity": self.hint_verbosity,
            "hint_cap": self.hint_cap,
            "atom_cap": self.atom_cap,
        }

    @classmethod
    def from_dict(cls, d):
        w = d.get("weights", {})
        weights = WeightsConfig(
            Fraction(w.get("w1", "4")), Fraction(w.get("w2", "2")),
            Fraction(w.get("w3", "1")))
        return cls(
            weights=weights,
            rule_toggles=tuple(sorted(d.get("rule_toggles", {}).items())),
            auto_accept_threshold=Fraction(d.get("auto_accept_threshold", "2")),
            hint_verbosity=d.get("hint_verbosity", "full"),
            hint_cap=int(d.get("hint_cap", 10)),
            atom_cap=int(d.get("atom_cap", 64)),
        )


DEFAULT_CONFIG = EngineConfig()


@dataclass
class Task:
    id: str
    description: str
    schema_sql: str
    seed_sql: str
    hidden_sql: str
    reference_sql: str  # the lecturer solution
    output_order_required: bool = False
    config: EngineConfig = field(default_factory=EngineConfig)

    @cached_property
    def schema(self) -> SchemaDef:
        return parse_schema(self.schema_sql)

    def data_scripts(self):
        return [s for s in (self.seed_sql, self.hidden_sql) if s and s.strip()]
