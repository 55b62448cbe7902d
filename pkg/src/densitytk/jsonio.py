"""JSON interchange for every domain type.

Rationals travel as "num/den" strings (integers are accepted on input);
floating-point literals are rejected so nothing inexact can enter.
Validation errors carry a JSON-pointer-style location.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Mapping

from .density import (
    DensityEstimate,
    FiniteIndexSet,
    IndexSet,
    PeriodicIndexSet,
    RealSequence,
    SampledIndexSet,
    TailRule,
)
from .errors import ParseError, ValidationError
from .measure import FiniteMeasureSpace, Functional, MSet
from .bergelson import SetFamily
from .witness import BoundedFamily

__all__ = [
    "parse_rational",
    "format_rational",
    "index_set_to_json",
    "index_set_from_json",
    "space_to_json",
    "space_from_json",
    "functional_to_json",
    "functional_from_json",
    "sets_file_from_json",
    "set_family_to_json",
    "sequence_from_json",
    "sequence_to_json",
    "bounded_family_from_json",
    "bounded_family_to_json",
    "estimate_to_json",
]


def parse_rational(value: Any, location: str = "") -> Fraction:
    if isinstance(value, bool):
        raise ParseError(f"{location}: expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise ParseError(f"{location}: floating-point literals are not accepted; use \"num/den\"")
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"{location}: bad rational literal {value!r} ({exc})") from None
    raise ParseError(f"{location}: expected a rational, got {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    f = Fraction(value)
    return f"{f.numerator}/{f.denominator}"


def _expect_object(value: Any, location: str) -> dict:
    if not isinstance(value, dict):
        raise ParseError(f"{location}: expected an object, got {type(value).__name__}")
    return value


def _expect_list(value: Any, location: str) -> list:
    if not isinstance(value, list):
        raise ParseError(f"{location}: expected an array, got {type(value).__name__}")
    return value


def _expect_int(value: Any, location: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ParseError(f"{location}: expected an integer, got {value!r}")
    return value


def _int_list(value: Any, location: str) -> tuple[int, ...]:
    return tuple(_expect_int(v, f"{location}/{i}") for i, v in enumerate(_expect_list(value, location)))


def _get(obj: dict, key: str, location: str) -> Any:
    if key not in obj:
        raise ParseError(f"{location}: missing required key {key!r}")
    return obj[key]


def index_set_to_json(index_set: IndexSet) -> dict:
    if isinstance(index_set, FiniteIndexSet):
        return {"kind": "finite", "elements": list(index_set.elements)}
    if isinstance(index_set, PeriodicIndexSet):
        return {
            "kind": "periodic",
            "threshold": index_set.threshold,
            "period": index_set.period,
            "residues": list(index_set.residues),
            "exceptions": list(index_set.exceptions),
        }
    return {"kind": "sampled", "horizon": index_set.horizon, "members": list(index_set.members)}


def index_set_from_json(obj: Any, location: str = "") -> IndexSet:
    data = _expect_object(obj, location)
    kind = _get(data, "kind", location)
    try:
        if kind == "finite":
            return FiniteIndexSet(elements=_int_list(_get(data, "elements", location), f"{location}/elements"))
        if kind == "periodic":
            return PeriodicIndexSet(
                threshold=_expect_int(_get(data, "threshold", location), f"{location}/threshold"),
                period=_expect_int(_get(data, "period", location), f"{location}/period"),
                residues=_int_list(_get(data, "residues", location), f"{location}/residues"),
                exceptions=_int_list(data.get("exceptions", []), f"{location}/exceptions"),
            )
        if kind == "sampled":
            return SampledIndexSet(
                horizon=_expect_int(_get(data, "horizon", location), f"{location}/horizon"),
                members=_int_list(_get(data, "members", location), f"{location}/members"),
            )
    except ValidationError as exc:
        raise ValidationError(str(exc), location) from None
    raise ParseError(f"{location}/kind: unknown index-set kind {kind!r}")


def space_to_json(space: FiniteMeasureSpace) -> dict:
    return {
        "points": list(space.points),
        "weights": {p: format_rational(w) for p, w in zip(space.points, space.weights)},
    }


def space_from_json(obj: Any, location: str = "") -> FiniteMeasureSpace:
    data = _expect_object(obj, location)
    raw_points = _expect_list(_get(data, "points", location), f"{location}/points")
    points = []
    for i, p in enumerate(raw_points):
        if not isinstance(p, str):
            raise ParseError(f"{location}/points/{i}: point names must be strings")
        points.append(p)
    weights_obj = _expect_object(_get(data, "weights", location), f"{location}/weights")
    if set(weights_obj) != set(points):
        raise ValidationError("weights must cover exactly the listed points", f"{location}/weights")
    try:
        return FiniteMeasureSpace(
            points=tuple(points),
            weights=tuple(parse_rational(weights_obj[p], f"{location}/weights/{p}") for p in points),
        )
    except ValidationError as exc:
        raise ValidationError(str(exc), location) from None


def functional_to_json(functional: Functional) -> dict:
    return {"weights": {p: format_rational(w) for p, w in zip(functional.points, functional.weights)}}


def functional_from_json(obj: Any, space: FiniteMeasureSpace, location: str = "") -> Functional:
    data = _expect_object(obj, location)
    weights_obj = _expect_object(_get(data, "weights", location), f"{location}/weights")
    if set(weights_obj) != set(space.points):
        raise ValidationError(
            "functional weights must cover exactly the space's points", f"{location}/weights"
        )
    try:
        return Functional(
            points=space.points,
            weights=tuple(parse_rational(weights_obj[p], f"{location}/weights/{p}") for p in space.points),
        )
    except ValidationError as exc:
        raise ValidationError(str(exc), location) from None


def sets_file_from_json(obj: Any, space: FiniteMeasureSpace, location: str = "") -> dict[int, MSet]:
    """A bare family file: index -> list of member points."""
    data = _expect_object(obj, location)
    sets: dict[int, MSet] = {}
    for key, value in data.items():
        here = f"{location}/{key}"
        try:
            n = int(key)
        except ValueError:
            raise ParseError(f"{here}: family keys must be integers") from None
        if n < 1:
            raise ValidationError("family indices start at 1", here)
        names = _expect_list(value, here)
        for i, p in enumerate(names):
            if not isinstance(p, str):
                raise ParseError(f"{here}/{i}: point names must be strings")
        try:
            sets[n] = space.subset(names)
        except ValidationError as exc:
            raise ValidationError(str(exc), here) from None
    return sets


def set_family_to_json(family: SetFamily) -> dict:
    return {
        "space": space_to_json(family.space),
        "index_set": index_set_to_json(family.index_set),
        "horizon": family.horizon,
        "a": format_rational(family.a),
        "sets": {str(n): list(family.sets[n].members()) for n in family.prefix_indices},
    }


def sequence_to_json(seq: RealSequence) -> dict:
    tail = None
    if seq.tail is not None:
        tail = {"period": seq.tail.period, "values": [format_rational(v) for v in seq.tail.values]}
    return {
        "prefix": [format_rational(v) for v in seq.prefix],
        "tail": tail,
        "bound": format_rational(seq.bound),
    }


def sequence_from_json(obj: Any, location: str = "") -> RealSequence:
    data = _expect_object(obj, location)
    prefix = tuple(
        parse_rational(v, f"{location}/prefix/{i}")
        for i, v in enumerate(_expect_list(_get(data, "prefix", location), f"{location}/prefix"))
    )
    tail = None
    if data.get("tail") is not None:
        tail_obj = _expect_object(data["tail"], f"{location}/tail")
        values = tuple(
            parse_rational(v, f"{location}/tail/values/{i}")
            for i, v in enumerate(
                _expect_list(_get(tail_obj, "values", f"{location}/tail"), f"{location}/tail/values")
            )
        )
        try:
            tail = TailRule(
                period=_expect_int(_get(tail_obj, "period", f"{location}/tail"), f"{location}/tail/period"),
                values=values,
            )
        except ValidationError as exc:
            raise ValidationError(str(exc), f"{location}/tail") from None
    try:
        if "bound" in data:
            return RealSequence(
                prefix=prefix, tail=tail, bound=parse_rational(data["bound"], f"{location}/bound")
            )
        return RealSequence.from_values(prefix, tail=tail)
    except ValidationError as exc:
        raise ValidationError(str(exc), location) from None


def bounded_family_to_json(family: BoundedFamily) -> dict:
    return {
        "bound": format_rational(family.bound),
        "functions": {
            str(n): {p: format_rational(v) for p, v in sorted(family.functions[n].items())}
            for n in range(1, family.size + 1)
        },
    }


def bounded_family_from_json(obj: Any, space: FiniteMeasureSpace, location: str = "") -> BoundedFamily:
    data = _expect_object(obj, location)
    bound = parse_rational(_get(data, "bound", location), f"{location}/bound")
    raw = _expect_object(_get(data, "functions", location), f"{location}/functions")
    functions: dict[int, dict[str, Fraction]] = {}
    for key, value in raw.items():
        here = f"{location}/functions/{key}"
        try:
            n = int(key)
        except ValueError:
            raise ParseError(f"{here}: function keys must be integers") from None
        g_obj = _expect_object(value, here)
        functions[n] = {p: parse_rational(v, f"{here}/{p}") for p, v in g_obj.items()}
    try:
        return BoundedFamily(space=space, functions=functions, bound=bound)
    except ValidationError as exc:
        raise ValidationError(str(exc), location) from None


def estimate_to_json(estimate: DensityEstimate) -> dict:
    return {
        "exact": None if estimate.exact is None else format_rational(estimate.exact),
        "lower_at_horizon": format_rational(estimate.lower_at_horizon),
        "upper_at_horizon": format_rational(estimate.upper_at_horizon),
        "horizon": estimate.horizon,
        "checkpoints": list(estimate.checkpoints),
    }
