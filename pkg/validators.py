"""
Validation framework for raw per-record CSV input and per-group AUC tables.
Rules inspect the parsed table and report every problem with its line number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

VALUE_COLUMN = "value"
TASK_COLUMN = "task"
AUC_COLUMN = "auc"
NEGATIVES_COLUMN = "n0"
POSITIVES_COLUMN = "n1"


class Severity(Enum):
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"


@dataclass
class ValidationIssue:
    rule_id: str
    message: str
    severity: Severity
    line: Optional[int] = None  # 1-based line number when applicable


@dataclass
class ValidationResult:
    issues: List[ValidationIssue] = field(default_factory=list)

    @property
    def is_ok(self) -> bool:
        return all(i.severity != Severity.ERROR for i in self.issues)

    def add(self, issue: ValidationIssue) -> None:
        self.issues.append(issue)

    def extend(self, issues: List[ValidationIssue]) -> None:
        self.issues.extend(issues)

    def errors(self) -> List[ValidationIssue]:
        return [i for i in self.issues if i.severity == Severity.ERROR]

    def as_lines(self) -> List[str]:
        lines = []
        for i in self.issues:
            loc = f" (line {i.line})" if i.line is not None else ""
            lines.append(f"[{i.severity.value}] {i.rule_id}{loc}: {i.message}")
        return lines

    def as_text(self) -> str:
        if not self.issues:
            return "No issues found."
        return "\n".join(self.as_lines())


@dataclass
class CsvTable:
    header: List[str]
    rows: List[tuple[int, List[str]]]  # (line number, fields)

    def column(self, name: str) -> int:
        return self.header.index(name)


class BaseRule:
    rule_id: str = "BASE"

    def check(self, table: CsvTable) -> List[ValidationIssue]:  # pragma: no cover - interface
        return []


class RuleHasRows(BaseRule):
    rule_id = "has_rows"

    def check(self, table: CsvTable) -> List[ValidationIssue]:
        if not table.rows:
            return [ValidationIssue(self.rule_id, "No data rows after the header.", Severity.ERROR, None)]
        return []


class RuleHeader(BaseRule):
    rule_id = "header"

    def __init__(self, attributes: Sequence[str], required: Sequence[str] = (VALUE_COLUMN,)) -> None:
        self.attributes = list(attributes)
        self.required = list(required)

    def check(self, table: CsvTable) -> List[ValidationIssue]:
        issues: List[ValidationIssue] = []
        seen = set()
        for name in table.header:
            if name in seen:
                issues.append(ValidationIssue(self.rule_id, f"Duplicate column '{name}'.", Severity.ERROR, 1))
            seen.add(name)
        for name in self.required:
            if name not in table.header:
                issues.append(ValidationIssue(self.rule_id, f"Missing '{name}' column.", Severity.ERROR, 1))
        for name in self.attributes:
            if name not in table.header:
                issues.append(ValidationIssue(self.rule_id, f"Missing attribute column '{name}'.", Severity.ERROR, 1))
        if not self.attributes:
            issues.append(ValidationIssue(self.rule_id, "No attribute columns.", Severity.ERROR, 1))
        return issues


class RuleFieldCount(BaseRule):
    rule_id = "field_count"

    def check(self, table: CsvTable) -> List[ValidationIssue]:
        width = len(table.header)
        return [
            ValidationIssue(self.rule_id, f"Expected {width} fields, found {len(fields)}.", Severity.ERROR, line)
            for line, fields in table.rows
            if len(fields) != width
        ]


class RuleNumericValue(BaseRule):
    rule_id = "numeric_value"

    def __init__(self, column: str = VALUE_COLUMN, lower: Optional[float] = None, upper: Optional[float] = None) -> None:
        self.column = column
        self.lower = lower
        self.upper = upper

    def check(self, table: CsvTable) -> List[ValidationIssue]:
        if self.column not in table.header:
            return []
        col = table.column(self.column)
        issues: List[ValidationIssue] = []
        for line, fields in table.rows:
            if col >= len(fields):
                continue
            try:
                v = float(fields[col])
            except ValueError:
                issues.append(ValidationIssue(self.rule_id, f"Value {fields[col]!r} is not a number.", Severity.ERROR, line))
                continue
            if not math.isfinite(v):
                issues.append(ValidationIssue(self.rule_id, f"Value {fields[col]!r} is not finite.", Severity.ERROR, line))
            elif (self.lower is not None and v < self.lower) or (self.upper is not None and v > self.upper):
                issues.append(
                    ValidationIssue(
                        self.rule_id,
                        f"Value {fields[col]!r} in '{self.column}' is outside [{self.lower}, {self.upper}].",
                        Severity.ERROR,
                        line,
                    )
                )
        return issues


class RuleCount(BaseRule):
    rule_id = "count"

    def __init__(self, column: str) -> None:
        self.column = column

    def check(self, table: CsvTable) -> List[ValidationIssue]:
        if self.column not in table.header:
            return []
        col = table.column(self.column)
        issues: List[ValidationIssue] = []
        for line, fields in table.rows:
            if col >= len(fields):
                continue
            text = fields[col]
            if not (text.isdigit() and text.isascii()):
                issues.append(
                    ValidationIssue(self.rule_id, f"'{self.column}' must be a nonnegative integer, got {text!r}.", Severity.ERROR, line)
                )
        return issues


class RuleKnownLevels(BaseRule):
    rule_id = "known_levels"

    def __init__(self, levels: Dict[str, Sequence[str]]) -> None:
        self.levels = {name: list(values) for name, values in levels.items()}

    def check(self, table: CsvTable) -> List[ValidationIssue]:
        issues: List[ValidationIssue] = []
        for name, known in self.levels.items():
            if name not in table.header:
                continue
            col = table.column(name)
            allowed = set(known)
            for line, fields in table.rows:
                if col < len(fields) and fields[col] not in allowed:
                    issues.append(
                        ValidationIssue(
                            self.rule_id,
                            f"Unknown level {fields[col]!r} for '{name}' (known levels: {', '.join(known)}).",
                            Severity.ERROR,
                            line,
                        )
                    )
        return issues


class RuleEmptyTask(BaseRule):
    rule_id = "empty_task"

    def check(self, table: CsvTable) -> List[ValidationIssue]:
        if TASK_COLUMN not in table.header:
            return []
        col = table.column(TASK_COLUMN)
        return [
            ValidationIssue(self.rule_id, "Empty task id.", Severity.ERROR, line)
            for line, fields in table.rows
            if col < len(fields) and fields[col].strip() == ""
        ]


class RecordValidator:
    """Composite validator for raw record tables."""

    def __init__(self, attributes: Sequence[str], levels: Optional[Dict[str, Sequence[str]]] = None) -> None:
        self.rules: List[BaseRule] = [
            RuleHeader(attributes),
            RuleHasRows(),
            RuleFieldCount(),
            RuleNumericValue(),
            RuleEmptyTask(),
        ]
        if levels:
            self.rules.append(RuleKnownLevels(levels))

    def validate(self, table: CsvTable) -> ValidationResult:
        result = ValidationResult()
        for rule in self.rules:
            result.extend(rule.check(table))
        return result


class RuleUniqueGroups(BaseRule):
    rule_id = "unique_groups"

    def __init__(self, key_columns: Sequence[str]) -> None:
        self.key_columns = list(key_columns)

    def check(self, table: CsvTable) -> List[ValidationIssue]:
        keys = [c for c in self.key_columns if c in table.header]
        if TASK_COLUMN in table.header:
            keys.append(TASK_COLUMN)
        cols = [table.column(c) for c in keys]
        first: Dict[tuple, int] = {}
        issues: List[ValidationIssue] = []
        for line, fields in table.rows:
            if len(fields) != len(table.header):
                continue
            key = tuple(fields[c] for c in cols)
            if key in first:
                issues.append(
                    ValidationIssue(self.rule_id, f"Group {', '.join(key)} repeats line {first[key]}.", Severity.ERROR, line)
                )
            else:
                first[key] = line
        return issues


class AucTableValidator(RecordValidator):
    """One row per group (and task) carrying a precomputed AUC and its class counts."""

    def __init__(self, attributes: Sequence[str], levels: Optional[Dict[str, Sequence[str]]] = None) -> None:
        self.rules = [
            RuleHeader(attributes, (AUC_COLUMN, NEGATIVES_COLUMN, POSITIVES_COLUMN)),
            RuleHasRows(),
            RuleFieldCount(),
            RuleNumericValue(AUC_COLUMN, 0.0, 1.0),
            RuleCount(NEGATIVES_COLUMN),
            RuleCount(POSITIVES_COLUMN),
            RuleEmptyTask(),
            RuleUniqueGroups(attributes),
        ]
        if levels:
            self.rules.append(RuleKnownLevels(levels))
