"""Containment policy flags and dated scenario schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import yaml

from .config import ConfigError, scenario_path

FLAGS = ("sanitary_hospitals", "case_isolation", "family_isolation",
         "workplace_isolation", "schools_closed", "leisure_closed",
         "social_distancing", "contact_ban", "mandatory_telework")

ISOLATION_PERIODS = 42  # two weeks
HOSPITAL_HYGIENE_UNDER_POLICY = 0.1
HOME_PREFERENCE_MULTIPLIER_SD = 2.0
CONTACT_REDUCTION_SD = 0.5


@dataclass
class PolicySet:
    sanitary_hospitals: bool = False
    case_isolation: bool = False
    family_isolation: bool = False
    workplace_isolation: bool = False
    schools_closed: bool = False
    leisure_closed: bool = False
    social_distancing: bool = False
    contact_ban: bool = False
    mandatory_telework: bool = False

    @property
    def home_multiplier(self) -> float:
        return HOME_PREFERENCE_MULTIPLIER_SD if self.social_distancing else 1.0

    @property
    def hospital_hygiene(self) -> float | None:
        return HOSPITAL_HYGIENE_UNDER_POLICY if self.sanitary_hospitals else None

    def effective_contacts(self, gamma: int) -> int:
        if not self.social_distancing:
            return gamma
        return int(math.floor(gamma * CONTACT_REDUCTION_SD + 0.5))

    def with_flags(self, names, value: bool = True) -> "PolicySet":
        changes = {}
        for name in names:
            if name not in FLAGS:
                raise ConfigError(f"unknown policy flag: {name}")
            changes[name] = value
        return replace(self, **changes)


@dataclass
class ScenarioSchedule:
    name: str
    steps: list[tuple[int, tuple[str, ...]]] = field(default_factory=list)
    lift_all_day: int | None = None

    def __post_init__(self):
        days = [d for d, _ in self.steps]
        if days != sorted(days):
            raise ConfigError("scenario schedule days must be nondecreasing")

    def policies_at(self, day: int) -> PolicySet:
        """Flags active at the start of the given elapsed-days index."""
        ps = PolicySet()
        if self.lift_all_day is not None and day >= self.lift_all_day:
            return ps
        for d, names in self.steps:
            if day >= d:
                ps = ps.with_flags(names)
        return ps

    def activation_days(self) -> dict[str, int]:
        out = {}
        for d, names in self.steps:
            for name in names:
                out.setdefault(name, d)
        return out


PRESETS = ("baseline", "rapid", "delayed", "baseline_lift100", "none")


def scenario_schedule(name_or_path: str) -> ScenarioSchedule:
    """Load a preset schedule by name or a custom YAML schedule by path."""
    if name_or_path == "none":
        return ScenarioSchedule(name="none", steps=[])
    if name_or_path in PRESETS:
        text = scenario_path(name_or_path).read_text(encoding="utf-8")
    else:
        try:
            with open(name_or_path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError:
            raise ConfigError(
                f"unknown scenario '{name_or_path}'; available presets: "
                + ", ".join(PRESETS))
    doc = yaml.safe_load(text) or {}
    steps = []
    for entry in doc.get("schedule", []) or []:
        day = int(entry["day"])
        names = tuple(str(x) for x in entry.get("add", []))
        for nm in names:
            if nm not in FLAGS:
                raise ConfigError(f"unknown policy flag in schedule: {nm}")
        steps.append((day, names))
    lift = doc.get("lift_all_day")
    return ScenarioSchedule(name=str(doc.get("name", name_or_path)),
                            steps=steps,
                            lift_all_day=None if lift is None else int(lift))
