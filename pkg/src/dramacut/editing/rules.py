"""Highlight rule sets, shipped as JSON data files per target audience."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from dramacut.errors import ConfigError, LoadError

FORMAT_VERSION = 1


class Audience(str, enum.Enum):
    MALE = "Male"
    FEMALE = "Female"


@dataclass(frozen=True)
class Rule:
    pattern: str
    points: int
    category: str = ""


@dataclass(frozen=True)
class HighlightRuleSet:
    audience: Audience
    rules: tuple[Rule, ...]

    def __post_init__(self):
        for i, rule in enumerate(self.rules):
            if not rule.pattern.strip():
                raise LoadError("rule pattern must be non-empty", f"/rules/{i}/pattern")
            if rule.points not in (1, 2, 3):
                raise LoadError(f"points must be 1, 2 or 3, got {rule.points}", f"/rules/{i}/points")

    def render(self) -> str:
        """Prompt text listing every pattern with its points, grouped by category."""
        lines, current = [], None
        for rule in self.rules:
            if rule.category != current:
                current = rule.category
                if current:
                    lines.append(f"### {current}")
            unit = "point" if rule.points == 1 else "points"
            lines.append(f"- {rule.pattern} ({rule.points} {unit})")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "audience": self.audience.value,
            "rules": [
                {"category": r.category, "pattern": r.pattern, "points": r.points} if r.category
                else {"pattern": r.pattern, "points": r.points}
                for r in self.rules
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> HighlightRuleSet:
        if not isinstance(data, dict):
            raise LoadError("rule set must be an object")
        if data.get("format_version", FORMAT_VERSION) != FORMAT_VERSION:
            raise LoadError(f"unsupported format_version {data.get('format_version')}", "/format_version")
        try:
            audience = Audience(data.get("audience"))
        except ValueError:
            raise LoadError(f"unknown audience {data.get('audience')!r}", "/audience") from None
        raw = data.get("rules")
        if not isinstance(raw, list):
            raise LoadError("rules must be a list", "/rules")
        rules = []
        for i, item in enumerate(raw):
            if not isinstance(item, dict):
                raise LoadError("rule must be an object", f"/rules/{i}")
            pattern, points = item.get("pattern"), item.get("points")
            if not isinstance(pattern, str):
                raise LoadError("pattern must be a string", f"/rules/{i}/pattern")
            if not isinstance(points, int) or isinstance(points, bool):
                raise LoadError("points must be an integer", f"/rules/{i}/points")
            rules.append(Rule(pattern, points, str(item.get("category", ""))))
        return cls(audience, tuple(rules))


def load_rules(path: str | Path) -> HighlightRuleSet:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"cannot read rule set {path}: {exc}") from exc
    return HighlightRuleSet.from_dict(data)


def save_rules(rules: HighlightRuleSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(rules.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def builtin_rules(audience: Audience | str) -> HighlightRuleSet:
    try:
        audience = Audience(audience)
    except ValueError:
        raise ConfigError(f"unknown audience {audience!r}") from None
    name = f"rules_{audience.value.lower()}.json"
    text = resources.files("dramacut.data").joinpath(name).read_text(encoding="utf-8")
    return HighlightRuleSet.from_dict(json.loads(text))
