"""
Validators Module
==================
Validation reports and checks for experiment inputs: sweep grids, regime
and estimator names, and scene templates against the array.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence


class Severity(Enum):
    """Validation severity levels."""
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"


@dataclass
class ValidationMessage:
    """A single validation message."""
    severity: Severity
    message: str
    location: Optional[str] = None

    def __str__(self) -> str:
        return f"{self.location}: {self.message}" if self.location else self.message


@dataclass
class ValidationReport:
    """Validation report containing all messages."""
    messages: List[ValidationMessage] = field(default_factory=list)

    @property
    def errors(self) -> List[str]:
        return [str(m) for m in self.messages if m.severity == Severity.ERROR]

    @property
    def warnings(self) -> List[str]:
        return [str(m) for m in self.messages if m.severity == Severity.WARNING]

    @property
    def info(self) -> List[str]:
        return [str(m) for m in self.messages if m.severity == Severity.INFO]

    @property
    def is_valid(self) -> bool:
        return len(self.errors) == 0

    def add_error(self, message: str, location: Optional[str] = None) -> None:
        self.messages.append(ValidationMessage(Severity.ERROR, message, location))

    def add_warning(self, message: str, location: Optional[str] = None) -> None:
        self.messages.append(ValidationMessage(Severity.WARNING, message, location))

    def add_info(self, message: str, location: Optional[str] = None) -> None:
        self.messages.append(ValidationMessage(Severity.INFO, message, location))

    def extend(self, errors: Iterable[str], location: Optional[str] = None) -> None:
        """Add a list of error strings (as returned by model validate())."""
        for message in errors:
            self.add_error(message, location)

    def to_dict(self) -> Dict[str, Any]:
        return {"errors": self.errors, "warnings": self.warnings, "info": self.info}


def validate_sweep_grid(grid: Sequence[Any], integer: bool = False) -> List[str]:
    """
    Check a sweep grid: non-empty, finite, strictly monotone.

    Args:
        grid: Grid values
        integer: Require whole numbers (sensor, target and sample counts)

    Returns:
        List of error messages (empty when valid)
    """
    if not grid:
        return ["grid must not be empty"]
    errors = []
    try:
        values = [float(v) for v in grid]
    except (TypeError, ValueError):
        return ["grid values must be numbers"]
    if not all(math.isfinite(v) for v in values):
        errors.append("grid values must be finite")
    if integer and any(v != int(v) for v in values if math.isfinite(v)):
        errors.append("grid values must be integers")
    steps = [b - a for a, b in zip(values, values[1:])]
    if steps and not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
        errors.append("grid must be strictly monotone")
    return errors


def validate_choices(values: Sequence[str], allowed: Sequence[str], what: str) -> List[str]:
    """Every value must be one of allowed, without duplicates."""
    errors = [f"unknown {what} '{v}' (expected one of {', '.join(allowed)})" for v in values if v not in allowed]
    if len(set(values)) != len(values):
        errors.append(f"duplicate {what} entries")
    if not values:
        errors.append(f"at least one {what} is required")
    return errors


def validate_scene_template(
    k_targets: int,
    m_sensors: int,
    doa_range: Sequence[float],
    min_separation: float,
    doas: Optional[Sequence[float]] = None,
    distances: Optional[Sequence[float]] = None,
) -> List[str]:
    """Scene template checks that need the array size (angles in radians)."""
    errors = []
    if k_targets < 1 or k_targets >= m_sensors:
        errors.append(f"need 1 <= k_targets < m_sensors, got K={k_targets}, M={m_sensors}")
    low, high = doa_range
    if not -math.pi / 2 <= low < high <= math.pi / 2:
        errors.append("doa_range must satisfy -90 deg <= low < high <= 90 deg")
    elif k_targets > 1 and (k_targets - 1) * math.sin(min_separation) >= math.sin(high) - math.sin(low):
        errors.append("doa_range too narrow for k_targets at the minimum separation")
    if min_separation < 0:
        errors.append("min_separation must be >= 0")
    if doas is not None:
        if len(doas) != k_targets:
            errors.append(f"doas has {len(doas)} entries, expected {k_targets}")
        if any(abs(d) >= math.pi / 2 for d in doas):
            errors.append("doas must lie strictly inside (-90, 90) deg")
        if len(set(doas)) != len(doas):
            errors.append("doas must be pairwise distinct")
    if distances is not None and len(distances) != k_targets:
        errors.append(f"distances has {len(distances)} entries, expected {k_targets}")
    return errors
