"""Smell catalog metadata and the rule configuration file format.

Rules files are flat ``key = value`` text::

    # comment
    enabled = CS1, CS2, CS4
    threshold.CS2 = 10
    metric.CS3 = nlf
    threshold.CS3 = 2
    iff_include_private = false

``thresholds.CSn`` is accepted as a synonym of ``threshold.CSn``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .metrics import METRIC_NAMES

SMELL_IDS = tuple(f"CS{i}" for i in range(1, 20))

# smells with a bespoke detector
BESPOKE = ("CS1", "CS2", "CS4", "CS5", "CS9", "CS17", "CS19")
# smells carried by the metric-threshold rule; a mapping must be configured
GENERIC = tuple(s for s in SMELL_IDS if s not in BESPOKE)
THRESHOLD_SMELLS = ("CS2", "CS19") + GENERIC

DEFAULT_THRESHOLDS = {"CS2": 10.0, "CS19": 3.0}
METRIC_CHOICES = METRIC_NAMES + ("sloc",)


class RuleConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    id: str
    name: str
    short: str
    help: str
    severity: str  # info | warning


def _generic_rule(smell_id: str) -> Rule:
    return Rule(
        smell_id,
        f"cost-smell-{smell_id.lower()}",
        f"Cost smell {smell_id} (metric threshold rule)",
        f"{smell_id} has no bespoke detector. It fires when the metric mapped to it with "
        f"`metric.{smell_id}` exceeds `threshold.{smell_id}` in the rules file; without a mapping it never fires.",
        "warning",
    )


RULEBOOK: dict[str, Rule] = {
    "CS1": Rule(
        "CS1",
        "storage-write-in-loop",
        "State variable written inside a loop",
        "Every iteration pays for a storage write. Accumulate in a local variable inside the loop and "
        "write the state variable once afterwards.",
        "warning",
    ),
    "CS2": Rule(
        "CS2",
        "many-public-members",
        "Contract exposes many public members",
        "Each public function or public state variable adds a selector to the dispatcher and grows the "
        "deployed bytecode. Keep members internal or private unless they must be part of the ABI. "
        "Selector ordering effects are not modelled.",
        "warning",
    ),
    "CS4": Rule(
        "CS4",
        "explicit-default-initialization",
        "Variable explicitly initialised to its default value",
        "Storage and memory are zero-initialised. Assigning 0, false, an empty string or address(0) "
        "spends gas to store a value that is already there.",
        "warning",
    ),
    "CS5": Rule(
        "CS5",
        "library-usage",
        "Library usage trades deployment cost for execution cost",
        "Linking a library shrinks the deployed contract, but every call into a deployed library pays "
        "for an extra message call. Weigh how often the code runs against the one-off deployment saving.",
        "info",
    ),
    "CS9": Rule(
        "CS9",
        "return-local-variable",
        "Function returns a local variable instead of a named return value",
        "Declaring the return value with a name and assigning to it avoids an extra local and slightly "
        "reduces contract size.",
        "warning",
    ),
    "CS17": Rule(
        "CS17",
        "unpacked-storage",
        "Small state variables could share a storage slot",
        "State variables are laid out in declaration order. Two variables narrower than 32 bytes that "
        "are separated by a full-slot variable occupy two slots; declaring them next to each other packs "
        "them into one.",
        "info",
    ),
    "CS19": Rule(
        "CS19",
        "deep-call-chain",
        "Deep chain of internal calls",
        "Each internal call costs jumps and stack shuffling. Very deep chains of small functions can be "
        "flattened where readability allows. Recursive cycles never trigger this rule.",
        "info",
    ),
}
for _sid in GENERIC:
    RULEBOOK[_sid] = _generic_rule(_sid)


def smell_number(smell_id: str) -> int:
    return int(smell_id[2:])


@dataclass
class RuleConfig:
    enabled: frozenset[str] = frozenset(SMELL_IDS)
    thresholds: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    metrics: dict[str, str] = field(default_factory=dict)  # generic smell -> metric name
    iff_include_private: bool = False

    def threshold(self, smell_id: str) -> float:
        return self.thresholds[smell_id]


def _parse_bool(value: str, line_no: int) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise RuleConfigError(f"line {line_no}: expected a boolean, got {value!r}")


def _smell_id(raw: str, line_no: int) -> str:
    sid = raw.strip().upper()
    if sid not in SMELL_IDS:
        raise RuleConfigError(f"line {line_no}: unknown smell id {raw!r}")
    return sid


def parse_rules(text: str) -> RuleConfig:
    cfg = RuleConfig()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise RuleConfigError(f"line {line_no}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "enabled":
            items = [v for v in (x.strip() for x in value.split(",")) if v]
            cfg.enabled = frozenset(_smell_id(v, line_no) for v in items)
        elif key == "iff_include_private":
            cfg.iff_include_private = _parse_bool(value, line_no)
        elif key.startswith(("threshold.", "thresholds.")):
            sid = _smell_id(key.split(".", 1)[1], line_no)
            if sid not in THRESHOLD_SMELLS:
                raise RuleConfigError(f"line {line_no}: {sid} does not take a threshold")
            try:
                cfg.thresholds[sid] = float(value)
            except ValueError:
                raise RuleConfigError(f"line {line_no}: threshold must be numeric, got {value!r}") from None
        elif key.startswith("metric."):
            sid = _smell_id(key.split(".", 1)[1], line_no)
            if sid not in GENERIC:
                raise RuleConfigError(f"line {line_no}: {sid} has a bespoke detector and takes no metric")
            if value not in METRIC_CHOICES:
                raise RuleConfigError(f"line {line_no}: unknown metric {value!r}")
            cfg.metrics[sid] = value
        else:
            raise RuleConfigError(f"line {line_no}: unknown key {key!r}")
    for sid in cfg.metrics:
        if sid not in cfg.thresholds:
            raise RuleConfigError(f"{sid} maps to metric {cfg.metrics[sid]!r} but has no threshold")
    return cfg


def load_rules(path: Union[str, Path]) -> RuleConfig:
    return parse_rules(Path(path).read_text(encoding="utf-8"))
