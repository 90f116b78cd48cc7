"""Gas-cost metrics, cost-smell detection and correlation statistics for Solidity."""

from .metrics import MetricVector, compute_metrics, per_contract_metrics
from .parser import parse
from .rules import RuleConfig, load_rules, parse_rules
from .smells import SmellFinding, detect

__version__ = "0.1.0"

__all__ = [
    "MetricVector",
    "RuleConfig",
    "SmellFinding",
    "__version__",
    "compute_metrics",
    "detect",
    "load_rules",
    "parse",
    "parse_rules",
    "per_contract_metrics",
]
