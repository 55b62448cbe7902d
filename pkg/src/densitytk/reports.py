"""Inequality records and self-checking reports.

Every certificate the CLI emits carries an ``inequalities`` list whose
entries hold the exact left and right rational of each claimed relation.
``verify_report`` re-parses those values and re-evaluates every relation,
so a report can be fed back and checked without recomputing the instance.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import ParseError, ValidationError
from .jsonio import format_rational, parse_rational

__all__ = ["Check", "checks_to_json", "verify_report", "RELATIONS"]

RELATIONS = {
    "<": operator.lt,
    "<=": operator.le,
    "==": operator.eq,
    ">=": operator.ge,
    ">": operator.gt,
}


@dataclass(frozen=True)
class Check:
    """One exact relation between two rationals, with a label for reports."""

    label: str
    lhs: Fraction
    relation: str
    rhs: Fraction

    def __post_init__(self) -> None:
        if self.relation not in RELATIONS:
            raise ValidationError(f"unknown relation {self.relation!r}")

    @property
    def holds(self) -> bool:
        return RELATIONS[self.relation](self.lhs, self.rhs)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "lhs": format_rational(self.lhs),
            "relation": self.relation,
            "rhs": format_rational(self.rhs),
            "holds": self.holds,
        }


def checks_to_json(checks: list[Check]) -> tuple[list[dict], bool]:
    """Serialized records plus the conjunction of all of them."""
    records = [c.to_json() for c in checks]
    return records, all(r["holds"] for r in records)


def verify_report(report: Any) -> tuple[bool, list[str]]:
    """Re-evaluate every inequality record of an emitted report.

    Returns (ok, failures).  ok means: the report has a well-formed
    ``inequalities`` list, every recorded relation re-evaluates to its
    recorded ``holds`` flag, the ``verified`` field equals the
    conjunction, and that conjunction is true.
    """
    failures: list[str] = []
    if not isinstance(report, dict):
        return False, ["report must be a JSON object"]
    records = report.get("inequalities")
    if not isinstance(records, list):
        return False, ["report has no 'inequalities' list"]
    conjunction = True
    for i, rec in enumerate(records):
        where = f"inequalities[{i}]"
        if not isinstance(rec, dict):
            failures.append(f"{where}: not an object")
            conjunction = False
            continue
        try:
            lhs = parse_rational(rec.get("lhs"), where)
            rhs = parse_rational(rec.get("rhs"), where)
        except ParseError as exc:
            failures.append(str(exc))
            conjunction = False
            continue
        relation = rec.get("relation")
        if relation not in RELATIONS:
            failures.append(f"{where}: unknown relation {relation!r}")
            conjunction = False
            continue
        actual = RELATIONS[relation](lhs, rhs)
        if actual != rec.get("holds"):
            failures.append(
                f"{where} ({rec.get('label')}): recorded holds={rec.get('holds')}"
                f" but {rec.get('lhs')} {relation} {rec.get('rhs')} is {actual}"
            )
        if not actual:
            conjunction = False
            if actual == rec.get("holds"):
                failures.append(
                    f"{where} ({rec.get('label')}): {rec.get('lhs')} {relation} {rec.get('rhs')} fails"
                )
    if "verified" in report and bool(report["verified"]) != conjunction:
        failures.append(
            f"report claims verified={report['verified']} but the records conjoin to {conjunction}"
        )
    ok = conjunction and not failures
    return ok, failures
