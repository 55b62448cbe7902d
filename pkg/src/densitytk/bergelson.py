"""Common-point selection for finite families of positive-measure sets.

Given sets A_n ⊆ X indexed over a prefix I0 ∧ N, each of measure at
least ``a``, the averaging profile

    F(x) = |{k in I0 ∧ N : x in A_k}| / |I0 ∧ N|

has weighted mean equal to the mean of the μ(A_k).  On a probability
space the maximum of F is therefore at least ``a``, and a maximizing
point x turns into a selection I = {n : x in A_n} with
|I| >= a·|I0 ∧ N| whose sets all share x, hence have the finite
intersection property.  Restricting the argmax to positive-weight
points strengthens that to strictly positive measure for every
subfamily intersection.

A brute-force oracle enumerates all subfamilies on small instances to
validate selector optimality, and prefix-ratio certificates factor
|I ∧ η|/η through F and |I0 ∧ η|/η at admitted checkpoints
(those with |I0 ∧ η|/η > b).

Operations are pure; concurrent evaluation is safe because ties are
broken only after a full scan in ground-set order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .density import (
    FiniteIndexSet,
    IndexSet,
    PeriodicIndexSet,
    default_checkpoints,
    members_upto,
    prefix_count,
)
from .errors import (
    EmptyIndexPrefix,
    NoPositivePoint,
    PrefixDensityTooLow,
    TooLargeForOracle,
    ValidationError,
)
from .measure import FiniteMeasureSpace, MSet

__all__ = [
    "ORACLE_PREFIX_LIMIT",
    "SetFamily",
    "CardinalityBound",
    "SelectionResult",
    "IdentityCheck",
    "RatioCertificate",
    "OracleResult",
    "averaging_profile",
    "averaging_identity_check",
    "select_common_point",
    "density_ratio_certificate",
    "fip_oracle",
    "admitted_checkpoints",
    "default_ratio_threshold",
]

ORACLE_PREFIX_LIMIT = 20

ZERO = Fraction(0)


@dataclass(frozen=True)
class SetFamily:
    """Sets A_n over a common space, indexed by n in I0 ∧ horizon.

    ``a`` is the declared measure floor; μ(A_n) >= a is checked for
    every indexed set at construction time.
    """

    space: FiniteMeasureSpace
    index_set: IndexSet
    horizon: int
    sets: Mapping[int, MSet]
    a: Fraction

    def __post_init__(self) -> None:
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ValidationError("family horizon must be a positive integer")
        if self.a < 0:
            raise ValidationError("measure floor a must be >= 0")
        prefix = tuple(members_upto(self.index_set, self.horizon))
        if set(self.sets) != set(prefix):
            missing = sorted(set(prefix) - set(self.sets))
            extra = sorted(set(self.sets) - set(prefix))
            raise ValidationError(
                f"family must index exactly I0 ∧ {self.horizon}"
                f" (missing {missing}, extra {extra})"
            )
        for n in prefix:
            a_n = self.sets[n]
            if a_n.space != self.space:
                raise ValidationError(f"set at index {n} belongs to a different space")
            if self.space.measure(a_n) < self.a:
                raise ValidationError(
                    f"μ(A_{n}) = {self.space.measure(a_n)} is below the declared floor {self.a}"
                )
        object.__setattr__(self, "_prefix", prefix)

    @property
    def prefix_indices(self) -> tuple[int, ...]:
        return self._prefix

    def indices_upto(self, n: int) -> list[int]:
        if not 1 <= n <= self.horizon:
            raise ValidationError(f"prefix length {n} outside 1..{self.horizon}")
        return [k for k in self._prefix if k <= n]


def averaging_profile(family: SetFamily, n: int) -> dict[str, Fraction]:
    """F(x) = (membership count of x among A_k, k in I0 ∧ n) / |I0 ∧ n|."""
    idxs = family.indices_upto(n)
    if not idxs:
        raise EmptyIndexPrefix(f"I0 ∧ {n} is empty")
    counts = [0] * family.space.size
    for k in idxs:
        bits = family.sets[k].bits
        while bits:
            low = bits & -bits
            counts[low.bit_length() - 1] += 1
            bits ^= low
    denom = len(idxs)
    return {p: Fraction(counts[i], denom) for i, p in enumerate(family.space.points)}


@dataclass(frozen=True)
class IdentityCheck:
    """Both sides of the weighted-average identity, compared exactly."""

    lhs: Fraction
    rhs: Fraction
    holds: bool


def averaging_identity_check(family: SetFamily, n: int) -> IdentityCheck:
    """Check Σ_x μ({x})·F(x) = (1/|I0 ∧ n|)·Σ_k μ(A_k) as exact rationals.

    ``holds`` additionally requires lhs >= a, the declared measure floor.
    """
    profile = averaging_profile(family, n)
    idxs = family.indices_upto(n)
    lhs = ZERO
    for p, w in zip(family.space.points, family.space.weights):
        lhs += w * profile[p]
    total = ZERO
    for k in idxs:
        total += family.space.measure(family.sets[k])
    rhs = total / len(idxs)
    return IdentityCheck(lhs=lhs, rhs=rhs, holds=(lhs == rhs and lhs >= family.a))


@dataclass(frozen=True)
class CardinalityBound:
    """The selector guarantee |selected| >= a·|I0 ∧ n| with its exact pieces."""

    a: Fraction
    prefix_size: int
    selected_size: int

    @property
    def bound(self) -> Fraction:
        return self.a * self.prefix_size

    @property
    def verified(self) -> bool:
        return self.selected_size >= self.bound


@dataclass(frozen=True)
class SelectionResult:
    """A witness point with the indices it certifies.

    selected = {n in I0 ∧ horizon : witness in A_n}, so the witness lies
    in every selected set and |selected| = f_value · prefix_size.
    """

    witness: str
    selected: FiniteIndexSet
    f_value: Fraction
    cardinality_bound: CardinalityBound
    horizon: int


def select_common_point(family: SetFamily, n: int, restrict_positive: bool = False) -> SelectionResult:
    """Pick the point maximizing the averaging profile; ties go to ground-set order.

    On a probability space the averaging identity forces
    max F >= a, so the selection satisfies |selected| >= a·|I0 ∧ n|; the
    recorded cardinality bound re-verifies that inequality exactly.
    With ``restrict_positive`` the argmax runs over positive-weight
    points only, so every finite subfamily of the selected sets has an
    intersection of strictly positive measure (all contain the witness).
    """
    profile = averaging_profile(family, n)
    idxs = family.indices_upto(n)
    if restrict_positive:
        candidates = [p for p, w in zip(family.space.points, family.space.weights) if w > 0]
        if not candidates:
            raise NoPositivePoint("no point has positive weight")
    else:
        candidates = list(family.space.points)
    witness = candidates[0]
    for p in candidates[1:]:
        if profile[p] > profile[witness]:
            witness = p
    picked = tuple(k for k in idxs if witness in family.sets[k])
    f_value = profile[witness]
    if len(picked) != f_value * len(idxs):
        raise AssertionError("selection size must equal F(witness)·|I0 ∧ n|")
    return SelectionResult(
        witness=witness,
        selected=FiniteIndexSet(picked),
        f_value=f_value,
        cardinality_bound=CardinalityBound(
            a=family.a, prefix_size=len(idxs), selected_size=len(picked)
        ),
        horizon=n,
    )


@dataclass(frozen=True)
class RatioCertificate:
    """Exact prefix-ratio factorization at an admitted checkpoint.

    selected_ratio = |I ∧ η|/η factors as f_value · prefix_ratio, with
    prefix_ratio = |I0 ∧ η|/η > b by admission.  When f_value >= a the
    product beats both candidate lower bounds a·b (declared floor) and
    f_value·b (per-instance profile value).
    """

    eta: int
    b: Fraction
    a: Fraction
    witness: str
    selected_count: int
    index_prefix_count: int
    selected_ratio: Fraction
    prefix_ratio: Fraction
    f_value: Fraction

    @property
    def factorization_holds(self) -> bool:
        return self.selected_ratio == self.f_value * self.prefix_ratio

    @property
    def declared_bound(self) -> Fraction:
        return self.a * self.b

    @property
    def profile_bound(self) -> Fraction:
        return self.f_value * self.b

    @property
    def meets_declared_bound(self) -> bool:
        return self.selected_ratio > self.declared_bound

    @property
    def meets_profile_bound(self) -> bool:
        return self.selected_ratio > self.profile_bound


def density_ratio_certificate(
    family: SetFamily, selection: SelectionResult, eta: int, b: Fraction
) -> RatioCertificate:
    """Certify |I ∧ η|/η = F_η(witness)·(|I0 ∧ η|/η) > a·b at one checkpoint.

    Requires the admission inequality |I0 ∧ η|/η > b (PrefixDensityTooLow
    otherwise) and a selection computed at horizon η, for which the
    factorization is an exact equality.
    """
    b = Fraction(b)
    if b <= 0:
        raise ValidationError("prefix-ratio threshold b must be > 0")
    if selection.horizon != eta:
        raise ValidationError(
            f"selection was computed at horizon {selection.horizon}, certificate wants {eta}"
        )
    i0_count = prefix_count(family.index_set, eta)
    prefix_ratio = Fraction(i0_count, eta)
    if prefix_ratio <= b:
        raise PrefixDensityTooLow(f"|I0 ∧ {eta}|/{eta} = {prefix_ratio} <= b = {b}")
    selected_count = len(selection.selected.elements)
    return RatioCertificate(
        eta=eta,
        b=b,
        a=family.a,
        witness=selection.witness,
        selected_count=selected_count,
        index_prefix_count=i0_count,
        selected_ratio=Fraction(selected_count, eta),
        prefix_ratio=prefix_ratio,
        f_value=selection.f_value,
    )


def admitted_checkpoints(
    index_set: IndexSet, b: Fraction, up_to: int, checkpoints: tuple[int, ...] | None = None
) -> list[int]:
    """Prefix lengths η <= up_to with |I0 ∧ η|/η > b, from the given checkpoints."""
    cps = checkpoints if checkpoints is not None else default_checkpoints(up_to)
    return [c for c in cps if c <= up_to and Fraction(prefix_count(index_set, c), c) > b]


def default_ratio_threshold(index_set: IndexSet) -> Fraction:
    """Default b: the exact density of an eventually periodic I0, minus 1/10."""
    if not isinstance(index_set, PeriodicIndexSet):
        raise ValidationError("default b is only defined for eventually periodic index sets")
    return index_set.exact_density - Fraction(1, 10)


@dataclass(frozen=True)
class OracleResult:
    max_size: int
    best_subset: tuple[int, ...]


def fip_oracle(family: SetFamily, n: int) -> OracleResult:
    """Exhaustively find the largest subfamily of {A_k : k in I0 ∧ n} with
    nonempty total intersection.

    For a finite family, having the finite intersection property is the
    same as having a common point, so this is the brute-force ground
    truth the selector must match.  Every one of the 2^m subfamilies is
    enumerated (intersections built by dynamic programming over masks);
    the first maximum in mask order is returned.
    """
    idxs = family.indices_upto(n)
    m = len(idxs)
    if m > ORACLE_PREFIX_LIMIT:
        raise TooLargeForOracle(f"|I0 ∧ {n}| = {m} exceeds the exhaustive limit {ORACLE_PREFIX_LIMIT}")
    bits = [family.sets[k].bits for k in idxs]
    inter = [0] * (1 << m)
    inter[0] = family.space.full_set.bits
    best_size = 0
    best_mask = 0
    for mask in range(1, 1 << m):
        low = mask & -mask
        value = inter[mask ^ low] & bits[low.bit_length() - 1]
        inter[mask] = value
        if value:
            size = mask.bit_count()
            if size > best_size:
                best_size = size
                best_mask = mask
    return OracleResult(
        max_size=best_size,
        best_subset=tuple(idxs[i] for i in range(m) if best_mask >> i & 1),
    )
