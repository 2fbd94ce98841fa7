"""
Check records, reports and their JSON form.

Floats are written in scientific notation with 17 significant digits, which
round-trips every double exactly.
"""

import json
import math
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from gradedkms import __version__, settings
from gradedkms.linalg import GradedKmsError


class ReportIOError(GradedKmsError):
    """
    Raised when a report cannot be written or read.
    """

    def __init__(self, path, reason: str):
        self.path = path
        super().__init__(f"report {path}: {reason}")


class CheckRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    samples: int = 0
    """
    Number of elements or pairs the residual was maximized over.
    """
    max_residual: Optional[float] = None
    """
    Largest relative residual, already divided by the scale. None when the
    check was skipped.
    """
    scale: float = 1.0
    passed: bool = Field(default=False, alias="pass")
    seconds: float = 0.0
    skipped: bool = False

    @classmethod
    def measured(
        cls,
        name: str,
        residual: float,
        tolerance: float,
        samples: int = 0,
        scale: float = 1.0,
        seconds: float = 0.0,
    ) -> "CheckRecord":
        residual = float(residual)
        return cls(
            name=name,
            samples=samples,
            max_residual=residual,
            scale=scale,
            passed=bool(residual < tolerance),
            seconds=seconds,
        )

    @classmethod
    def skip(cls, name: str) -> "CheckRecord":
        return cls(name=name, skipped=True, passed=False)

    @property
    def failed(self) -> bool:
        return not self.skipped and not self.passed


class Report(BaseModel):
    version: str = __version__
    tolerance: float = settings.DEFAULT_TOLERANCE
    scenario: Dict[str, Any] = Field(default_factory=dict)
    records: List[CheckRecord] = Field(default_factory=list)
    observations: Dict[str, Any] = Field(default_factory=dict)
    """
    Recorded, not asserted, measurements.
    """

    @model_validator(mode="after")
    def sort_records(self):
        self.records = sorted(self.records, key=lambda r: r.name)
        return self

    def add(self, record: CheckRecord):
        self.records = sorted(self.records + [record], key=lambda r: r.name)

    @property
    def all_passed(self) -> bool:
        return not any(r.failed for r in self.records)

    @property
    def exit_code(self) -> int:
        return 0 if self.all_passed else 1

    def record(self, name: str) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)


_FLOAT_MARK = "__float__"
_FLOAT_RE = re.compile(f'"{_FLOAT_MARK}([^"]*)"')


def _format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, f".{settings.REPORT_FLOAT_DIGITS - 1}e")


def _mark_floats(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return _FLOAT_MARK + _format_float(value)
    if isinstance(value, dict):
        return {str(k): _mark_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_mark_floats(v) for v in value]
    return value


def dumps_report(report: Report) -> str:
    data = _mark_floats(report.model_dump(by_alias=True))
    text = json.dumps(data, indent=2, ensure_ascii=False)
    return _FLOAT_RE.sub(lambda m: m.group(1), text) + "\n"


def loads_report(text: str) -> Report:
    return Report.model_validate(json.loads(text))


def emit_report(report: Report, path: Union[str, Path]):
    """
    Writes the report as UTF-8 JSON.

    Raises:
        ReportIOError: the file cannot be written.
    """
    try:
        with open(path, "w", encoding=settings.REPORT_ENCODING) as f:
            f.write(dumps_report(report))
    except OSError as e:
        raise ReportIOError(path, str(e)) from e


def load_report(path: Union[str, Path]) -> Report:
    try:
        with open(path, encoding=settings.REPORT_ENCODING) as f:
            return loads_report(f.read())
    except (OSError, json.JSONDecodeError) as e:
        raise ReportIOError(path, str(e)) from e


def render_summary(report: Report) -> str:
    """
    One line per record, for the terminal.
    """
    lines = []
    for r in report.records:
        if r.skipped:
            status = "SKIP"
            residual = "-"
        else:
            status = "PASS" if r.passed else "FAIL"
            residual = f"{r.max_residual:.3e}"
        lines.append(f"{status:4} {r.name:40} {residual:>10} {r.seconds:.2f}s")
    return "\n".join(lines)
