"""Finite measure spaces with exact rational weights.

A space is a finite list of named points with nonnegative weights.  The
same data serves as a finitely additive measure and, read as a weight
vector, as a positive linear functional on bounded functions (on a
finite ground set the two notions coincide).  Subsets are bit vectors
over the point list, and the algebra generated by finitely many subsets
is represented by its atoms, so inner and outer measure reduce to atom
sums.

All values are immutable; concurrent readers need no coordination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .errors import ValidationError

__all__ = [
    "MAX_ALGEBRA_GENERATORS",
    "FiniteMeasureSpace",
    "MSet",
    "Functional",
    "FiniteAlgebra",
    "measure",
    "apply_functional",
    "inner_outer",
]

# Sign-vector atom classification is capped so the algebra stays enumerable.
MAX_ALGEBRA_GENERATORS = 16

ZERO = Fraction(0)


def _validate_weight_vector(points: tuple[str, ...], weights: tuple[Fraction, ...], what: str) -> None:
    if not points:
        raise ValidationError(f"{what} needs at least one point")
    if len(set(points)) != len(points):
        raise ValidationError(f"{what} has duplicate point names")
    if len(weights) != len(points):
        raise ValidationError(f"{what} needs one weight per point")
    for p, w in zip(points, weights):
        if w < 0:
            raise ValidationError(f"{what}: weight of {p} is negative ({w})")


@dataclass(frozen=True)
class FiniteMeasureSpace:
    """Named points with nonnegative rational weights, in a fixed order."""

    points: tuple[str, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        _validate_weight_vector(self.points, self.weights, "measure space")
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    @classmethod
    def from_weights(cls, weights: Mapping[str, Fraction]) -> "FiniteMeasureSpace":
        pts = tuple(weights)
        return cls(points=pts, weights=tuple(Fraction(weights[p]) for p in pts))

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def total_mass(self) -> Fraction:
        return sum(self.weights, ZERO)

    @property
    def is_probability(self) -> bool:
        return self.total_mass == 1

    def index_of(self, point: str) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise ValidationError(f"unknown point {point!r}") from None

    def weight(self, point: str) -> Fraction:
        return self.weights[self.index_of(point)]

    def subset(self, points: Iterable[str]) -> "MSet":
        bits = 0
        for p in points:
            bits |= 1 << self.index_of(p)
        return MSet(space=self, bits=bits)

    @property
    def empty_set(self) -> "MSet":
        return MSet(space=self, bits=0)

    @property
    def full_set(self) -> "MSet":
        return MSet(space=self, bits=(1 << self.size) - 1)

    @property
    def support(self) -> "MSet":
        bits = 0
        for i, w in enumerate(self.weights):
            if w > 0:
                bits |= 1 << i
        return MSet(space=self, bits=bits)

    def measure(self, subset: "MSet") -> Fraction:
        if subset.space != self:
            raise ValidationError("subset belongs to a different space")
        total = ZERO
        bits = subset.bits
        while bits:
            low = bits & -bits
            total += self.weights[low.bit_length() - 1]
            bits ^= low
        return total


@dataclass(frozen=True)
class MSet:
    """A subset of a space's ground set, as a bit vector over its point order."""

    space: FiniteMeasureSpace
    bits: int

    def __post_init__(self) -> None:
        if self.bits < 0 or self.bits >= 1 << self.space.size:
            raise ValidationError("bit vector does not fit the ground set")

    def __contains__(self, point: str) -> bool:
        return bool(self.bits >> self.space.index_of(point) & 1)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __iter__(self) -> Iterator[str]:
        return iter(self.members())

    def members(self) -> tuple[str, ...]:
        return tuple(p for i, p in enumerate(self.space.points) if self.bits >> i & 1)

    @property
    def is_empty(self) -> bool:
        return self.bits == 0

    def _coerce(self, other: "MSet") -> None:
        if other.space != self.space:
            raise ValidationError("operands live on different spaces")

    def union(self, other: "MSet") -> "MSet":
        self._coerce(other)
        return MSet(self.space, self.bits | other.bits)

    def intersection(self, other: "MSet") -> "MSet":
        self._coerce(other)
        return MSet(self.space, self.bits & other.bits)

    def difference(self, other: "MSet") -> "MSet":
        self._coerce(other)
        return MSet(self.space, self.bits & ~other.bits)

    def complement(self) -> "MSet":
        return MSet(self.space, self.space.full_set.bits ^ self.bits)

    def issubset(self, other: "MSet") -> bool:
        self._coerce(other)
        return self.bits & ~other.bits == 0


def measure(space: FiniteMeasureSpace, subset: MSet) -> Fraction:
    """Sum of the weights of the subset's members; additive on disjoint unions."""
    return space.measure(subset)


@dataclass(frozen=True)
class Functional:
    """A positive linear functional, i.e. a nonnegative weight vector over X."""

    points: tuple[str, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        _validate_weight_vector(self.points, self.weights, "functional")
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})
        object.__setattr__(
            self, "_support", tuple((p, w) for p, w in zip(self.points, self.weights) if w > 0)
        )

    @classmethod
    def from_weights(cls, weights: Mapping[str, Fraction]) -> "Functional":
        pts = tuple(weights)
        return cls(points=pts, weights=tuple(Fraction(weights[p]) for p in pts))

    @classmethod
    def point_mass(cls, points: Iterable[str], at: str) -> "Functional":
        pts = tuple(points)
        if at not in pts:
            raise ValidationError(f"point-mass location {at!r} is not a ground-set point")
        return cls(points=pts, weights=tuple(Fraction(1) if p == at else ZERO for p in pts))

    @property
    def total(self) -> Fraction:
        """T(1), the functional applied to the constant one."""
        return sum(self.weights, ZERO)

    def apply(self, g: Mapping[str, Fraction]) -> Fraction:
        """T(g) = sum of w_x * g(x); g must be defined on every point."""
        for p in self.points:
            if p not in g:
                raise ValidationError(f"function is undefined at point {p!r}")
        total = ZERO
        for p, w in self._support:
            total += w * g[p]
        return total

    def apply_indicator(self, subset: MSet) -> Fraction:
        """T(χ_A): the induced measure of A."""
        total = ZERO
        for p, w in self._support:
            if p in subset:
                total += w
        return total

    def as_space(self) -> FiniteMeasureSpace:
        """The measure space E ↦ T(χ_E) defined by this functional's weights."""
        return FiniteMeasureSpace(points=self.points, weights=self.weights)


def apply_functional(functional: Functional, g: Mapping[str, Fraction]) -> Fraction:
    """Evaluate a positive linear functional; linear in g and monotone."""
    return functional.apply(g)


@dataclass(frozen=True)
class FiniteAlgebra:
    """The set algebra generated by finitely many subsets, stored by its atoms.

    Atoms are the classes of the membership-profile partition: two
    points share an atom exactly when every generator treats them the
    same way.  Algebra members are exactly the unions of atoms.
    """

    space: FiniteMeasureSpace
    generators: tuple[MSet, ...]
    atoms: tuple[MSet, ...]

    @classmethod
    def generated_by(cls, space: FiniteMeasureSpace, generators: Iterable[MSet]) -> "FiniteAlgebra":
        gens = tuple(generators)
        if len(gens) > MAX_ALGEBRA_GENERATORS:
            raise ValidationError(
                f"at most {MAX_ALGEBRA_GENERATORS} generators are supported, got {len(gens)}"
            )
        for g in gens:
            if g.space != space:
                raise ValidationError("generator belongs to a different space")
        profiles: dict[tuple[bool, ...], int] = {}
        for i in range(space.size):
            profile = tuple(bool(g.bits >> i & 1) for g in gens)
            profiles[profile] = profiles.get(profile, 0) | (1 << i)
        # Atom order follows the first occurrence of each profile in point order.
        seen: list[int] = []
        claimed = 0
        for i in range(space.size):
            profile = tuple(bool(g.bits >> i & 1) for g in gens)
            bits = profiles[profile]
            if not claimed >> i & 1:
                seen.append(bits)
                claimed |= bits
        atoms = tuple(MSet(space, bits) for bits in seen)
        return cls(space=space, generators=gens, atoms=atoms)

    def contains(self, subset: MSet) -> bool:
        if subset.space != self.space:
            raise ValidationError("subset belongs to a different space")
        for atom in self.atoms:
            inter = atom.bits & subset.bits
            if inter != 0 and inter != atom.bits:
                return False
        return True

    def members(self) -> Iterator[MSet]:
        """All 2**len(atoms) algebra members, as unions of atoms."""
        for mask in range(1 << len(self.atoms)):
            bits = 0
            for i, atom in enumerate(self.atoms):
                if mask >> i & 1:
                    bits |= atom.bits
            yield MSet(self.space, bits)


def inner_outer(space: FiniteMeasureSpace, algebra: FiniteAlgebra, subset: MSet) -> tuple[Fraction, Fraction]:
    """Inner and outer measure of a subset relative to a finite algebra.

    inner = sum of the measures of the atoms contained in the subset,
    outer = sum over the atoms meeting it; these equal
    sup{μ(B) : B in the algebra, B ⊆ A} and
    inf{μ(B) : B in the algebra, A ⊆ B}.
    """
    if algebra.space != space:
        raise ValidationError("algebra belongs to a different space")
    if subset.space != space:
        raise ValidationError("subset belongs to a different space")
    inner = ZERO
    outer = ZERO
    for atom in algebra.atoms:
        if atom.bits & subset.bits:
            outer += space.measure(atom)
            if atom.bits & ~subset.bits == 0:
                inner += space.measure(atom)
    return inner, outer
