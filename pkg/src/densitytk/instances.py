"""Instance bundles: ingestion of named instances and seeded generation.

A bundle file groups spaces, index sets, set families, bounded function
families, functionals, and sequences under names, so one JSON file can
describe a whole experiment.  Generated instances are deterministic in
their seed and record it; identical seeds give bit-identical bundles.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .bergelson import SetFamily
from .density import FiniteIndexSet, IndexSet, PeriodicIndexSet, RealSequence
from .errors import ParseError, ProfileInfeasible, ValidationError
from .jsonio import (
    bounded_family_from_json,
    bounded_family_to_json,
    format_rational,
    functional_from_json,
    functional_to_json,
    index_set_from_json,
    index_set_to_json,
    parse_rational,
    sequence_from_json,
    sequence_to_json,
    sets_file_from_json,
    space_from_json,
    space_to_json,
)
from .measure import FiniteMeasureSpace, Functional, MSet
from .witness import BoundedFamily

__all__ = [
    "InstanceBundle",
    "GenerationProfile",
    "WitnessInstance",
    "parse_instance",
    "bundle_from_json",
    "bundle_to_json",
    "generate_instance",
    "generate_witness_instance",
]

MAX_PROFILE_POINTS = 12
MAX_PROFILE_SETS = 20


@dataclass(frozen=True)
class InstanceBundle:
    spaces: dict[str, FiniteMeasureSpace] = field(default_factory=dict)
    index_sets: dict[str, IndexSet] = field(default_factory=dict)
    families: dict[str, SetFamily] = field(default_factory=dict)
    bounded_families: dict[str, BoundedFamily] = field(default_factory=dict)
    functionals: dict[str, Functional] = field(default_factory=dict)
    sequences: dict[str, RealSequence] = field(default_factory=dict)
    seed: int | None = None

    def sole(self, section: str) -> Any:
        table = getattr(self, section)
        if len(table) != 1:
            raise ValidationError(
                f"bundle has {len(table)} entries under {section!r}; name one explicitly"
            )
        return next(iter(table.values()))

    def lookup(self, section: str, name: str | None) -> Any:
        table = getattr(self, section)
        if name is None:
            return self.sole(section)
        if name not in table:
            raise ValidationError(f"bundle has no {section!r} entry named {name!r}")
        return table[name]


def parse_instance(path: str | Path) -> InstanceBundle:
    """Read and eagerly validate a bundle file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return bundle_from_json(data)


def _family_from_json(obj: dict, bundle: InstanceBundle, location: str) -> SetFamily:
    space_name = obj.get("space")
    if not isinstance(space_name, str):
        raise ParseError(f"{location}/space: expected a space name")
    if space_name not in bundle.spaces:
        raise ValidationError(f"unknown space {space_name!r}", f"{location}/space")
    space = bundle.spaces[space_name]
    sets = sets_file_from_json(obj["sets"], space, f"{location}/sets")
    if "index_set" in obj:
        ref = obj["index_set"]
        if isinstance(ref, str):
            if ref not in bundle.index_sets:
                raise ValidationError(f"unknown index set {ref!r}", f"{location}/index_set")
            index_set = bundle.index_sets[ref]
        else:
            index_set = index_set_from_json(ref, f"{location}/index_set")
    else:
        index_set = FiniteIndexSet(tuple(sorted(sets)))
    horizon = obj.get("horizon", max(sets, default=1))
    if not isinstance(horizon, int) or isinstance(horizon, bool):
        raise ParseError(f"{location}/horizon: expected an integer")
    a = parse_rational(obj.get("a", 0), f"{location}/a")
    try:
        return SetFamily(space=space, index_set=index_set, horizon=horizon, sets=sets, a=a)
    except ValidationError as exc:
        raise ValidationError(str(exc), location) from None


def bundle_from_json(data: Any) -> InstanceBundle:
    if not isinstance(data, dict):
        raise ParseError("bundle must be a JSON object")
    seed = data.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise ParseError("/seed: expected an integer")
    bundle = InstanceBundle(seed=seed)
    for name, obj in data.get("spaces", {}).items():
        bundle.spaces[name] = space_from_json(obj, f"/spaces/{name}")
    for name, obj in data.get("index_sets", {}).items():
        bundle.index_sets[name] = index_set_from_json(obj, f"/index_sets/{name}")
    for name, obj in data.get("functionals", {}).items():
        loc = f"/functionals/{name}"
        if not isinstance(obj, dict):
            raise ParseError(f"{loc}: expected an object")
        space_name = obj.get("space")
        if isinstance(space_name, str):
            if space_name not in bundle.spaces:
                raise ValidationError(f"unknown space {space_name!r}", f"{loc}/space")
            bundle.functionals[name] = functional_from_json(obj, bundle.spaces[space_name], loc)
        else:
            weights = obj.get("weights")
            if not isinstance(weights, dict):
                raise ParseError(f"{loc}/weights: expected an object")
            bundle.functionals[name] = Functional.from_weights(
                {p: parse_rational(v, f"{loc}/weights/{p}") for p, v in weights.items()}
            )
    for name, obj in data.get("sequences", {}).items():
        bundle.sequences[name] = sequence_from_json(obj, f"/sequences/{name}")
    for name, obj in data.get("families", {}).items():
        loc = f"/families/{name}"
        if not isinstance(obj, dict):
            raise ParseError(f"{loc}: expected an object")
        if "functions" in obj:
            space_name = obj.get("space")
            if not isinstance(space_name, str) or space_name not in bundle.spaces:
                raise ValidationError(f"unknown space {space_name!r}", f"{loc}/space")
            bundle.bounded_families[name] = bounded_family_from_json(obj, bundle.spaces[space_name], loc)
        elif "sets" in obj:
            bundle.families[name] = _family_from_json(obj, bundle, loc)
        else:
            raise ParseError(f"{loc}: a family needs either 'sets' or 'functions'")
    return bundle


def bundle_to_json(bundle: InstanceBundle) -> dict:
    out: dict[str, Any] = {}
    if bundle.seed is not None:
        out["seed"] = bundle.seed
    if bundle.spaces:
        out["spaces"] = {name: space_to_json(s) for name, s in bundle.spaces.items()}
    if bundle.index_sets:
        out["index_sets"] = {name: index_set_to_json(i) for name, i in bundle.index_sets.items()}
    families: dict[str, Any] = {}
    for name, fam in bundle.families.items():
        space_name = _space_name_of(bundle, fam.space)
        families[name] = {
            "space": space_name,
            "index_set": index_set_to_json(fam.index_set),
            "horizon": fam.horizon,
            "a": format_rational(fam.a),
            "sets": {str(n): list(fam.sets[n].members()) for n in fam.prefix_indices},
        }
    for name, fam in bundle.bounded_families.items():
        entry = bounded_family_to_json(fam)
        entry["space"] = _space_name_of(bundle, fam.space)
        families[name] = entry
    if families:
        out["families"] = families
    if bundle.functionals:
        out["functionals"] = {name: functional_to_json(f) for name, f in bundle.functionals.items()}
    if bundle.sequences:
        out["sequences"] = {name: sequence_to_json(s) for name, s in bundle.sequences.items()}
    return out


def _space_name_of(bundle: InstanceBundle, space: FiniteMeasureSpace) -> str:
    for name, s in bundle.spaces.items():
        if s == space:
            return name
    raise ValidationError("family references a space that is not in the bundle")


@dataclass(frozen=True)
class GenerationProfile:
    """Bounds and targets for seeded set-family instances."""

    points: int = 6
    family_size: int = 8
    a: Fraction = Fraction(1, 2)
    b: Fraction = Fraction(1, 4)
    max_attempts: int = 32

    def __post_init__(self) -> None:
        if not 1 <= self.points <= MAX_PROFILE_POINTS:
            raise ValidationError(f"profile points must be in 1..{MAX_PROFILE_POINTS}")
        if not 1 <= self.family_size <= MAX_PROFILE_SETS:
            raise ValidationError(f"profile family size must be in 1..{MAX_PROFILE_SETS}")
        if not 0 < self.a <= 1:
            raise ValidationError("profile a must satisfy 0 < a <= 1")
        if not 0 <= self.b < 1:
            raise ValidationError("profile b must satisfy 0 <= b < 1")
        if self.max_attempts < 1:
            raise ValidationError("profile needs at least one attempt")


def _draw_probability_weights(rng: random.Random, n_points: int) -> list[Fraction]:
    while True:
        raw = [rng.randint(0, 12) for _ in range(n_points)]
        total = sum(raw)
        if total > 0:
            return [Fraction(w, total) for w in raw]


def _draw_index_set(rng: random.Random, b: Fraction) -> PeriodicIndexSet:
    period = rng.randint(1, 6)
    k_min = int(b * period) + 1
    if k_min > period:
        raise ProfileInfeasible(f"no residue count k <= {period} has k/{period} > b = {b}")
    k = rng.randint(k_min, period)
    residues = tuple(sorted(rng.sample(range(period), k)))
    return PeriodicIndexSet(threshold=0, period=period, residues=residues)


def _draw_set(
    rng: random.Random,
    space: FiniteMeasureSpace,
    a: Fraction,
    max_attempts: int,
) -> MSet:
    """Rejection-sample a subset with μ >= a, ramping the inclusion bias.

    The bias reaches 1 on the final attempt, so the support itself (with
    μ = total mass) is drawn whenever a <= total mass; otherwise the
    profile is infeasible.
    """
    support = [i for i, w in enumerate(space.weights) if w > 0]
    base = float(a)
    for attempt in range(max_attempts):
        prob = min(1.0, base + attempt / max_attempts)
        bits = 0
        for i in support:
            if rng.random() < prob:
                bits |= 1 << i
        candidate = MSet(space, bits)
        if space.measure(candidate) >= a:
            return candidate
    raise ProfileInfeasible(f"could not reach μ(A) >= {a} within {max_attempts} attempts")


def generate_instance(seed: int, profile: GenerationProfile = GenerationProfile()) -> InstanceBundle:
    """Deterministic seeded instance: one probability space, one eventually
    periodic index set with density > b, and one family with μ(A_n) >= a."""
    rng = random.Random(seed)
    points = tuple(f"x{i + 1}" for i in range(profile.points))
    weights = _draw_probability_weights(rng, profile.points)
    space = FiniteMeasureSpace(points=points, weights=tuple(weights))
    index_set = _draw_index_set(rng, profile.b)
    horizon = 0
    count = 0
    while count < profile.family_size:
        horizon += 1
        if index_set.contains(horizon):
            count += 1
    sets = {
        n: _draw_set(rng, space, profile.a, profile.max_attempts)
        for n in range(1, horizon + 1)
        if index_set.contains(n)
    }
    family = SetFamily(space=space, index_set=index_set, horizon=horizon, sets=sets, a=profile.a)
    bundle = InstanceBundle(seed=seed)
    bundle.spaces["space"] = space
    bundle.index_sets["I0"] = index_set
    bundle.families["family"] = family
    return bundle


@dataclass(frozen=True)
class WitnessInstance:
    """A bounded family plus functional data satisfying the r-bound by construction."""

    space: FiniteMeasureSpace
    family: BoundedFamily
    functional: Functional
    index_set: IndexSet
    horizon: int
    r: Fraction


def generate_witness_instance(seed: int, points: int = 4, horizon: int = 16) -> WitnessInstance:
    """Seeded instance on which |T(f_n)| > r holds for every n in I ∧ horizon.

    Functions at indexed positions are blended toward the constant bound
    until the functional clears r, so success is guaranteed; positions
    outside the index set stay unconstrained.
    """
    if not 1 <= points <= MAX_PROFILE_POINTS:
        raise ValidationError(f"points must be in 1..{MAX_PROFILE_POINTS}")
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    rng = random.Random(seed)
    names = tuple(f"x{i + 1}" for i in range(points))
    t_weights = [Fraction(rng.randint(0, 8), 8) for _ in range(points)]
    if all(w == 0 for w in t_weights):
        t_weights[rng.randrange(points)] = Fraction(1, 2)
    functional = Functional(points=names, weights=tuple(t_weights))
    space = functional.as_space()
    bound = Fraction(1)
    r = Fraction(rng.randint(1, 4), 8) * functional.total
    period = rng.randint(1, 4)
    k = rng.randint(1, period)
    index_set = PeriodicIndexSet(
        threshold=0, period=period, residues=tuple(sorted(rng.sample(range(period), k)))
    )

    def draw_function() -> dict[str, Fraction]:
        return {p: Fraction(rng.randint(-8, 8), 8) for p in names}

    functions: dict[int, dict[str, Fraction]] = {}
    for n in range(1, horizon + 1):
        g = draw_function()
        if index_set.contains(n):
            sign = 1 if rng.random() < 0.5 else -1
            for step in range(9):
                if abs(functional.apply(g)) > r:
                    break
                theta = Fraction(step + 1, 9)
                g = {p: (1 - theta) * v + theta * sign * bound for p, v in g.items()}
            else:
                g = {p: sign * bound for p in names}
        functions[n] = g
    family = BoundedFamily(space=space, functions=functions, bound=bound)
    return WitnessInstance(
        space=space,
        family=family,
        functional=functional,
        index_set=index_set,
        horizon=horizon,
        r=r,
    )
