"""Exact asymptotic-density arithmetic over subsets of the positive integers.

Index sets come in three representations:

* finite sets of positive integers (upper density exactly 0),
* eventually periodic sets: a residue pattern modulo ``period`` governs
  membership from ``threshold`` on, with finitely many flipped positions
  below it (upper density exactly ``len(residues)/period``),
* sampled sets whose membership is known only up to a horizon and
  refuses queries beyond it.

All arithmetic is rational; there is no floating point anywhere.  For
sets without an exact density, the limsup/liminf of the prefix ratios
|I ∩ {1..n}|/n is estimated by the max/min of those ratios over the
supplied checkpoints restricted to the stabilized window
``16*n >= horizon``.  Such estimates are certificates about the
truncation, never asymptotic proofs, and every verdict built on them
carries its horizon and tolerance.

Everything in this module is immutable and safe for concurrent readers.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import HorizonExceeded, ValidationError

__all__ = [
    "STABILIZATION_DIVISOR",
    "DEFAULT_ZERO_DENSITY_TOLERANCE",
    "FiniteIndexSet",
    "PeriodicIndexSet",
    "SampledIndexSet",
    "IndexSet",
    "DensityEstimate",
    "TailRule",
    "RealSequence",
    "DLimVerdict",
    "prefix_count",
    "members_upto",
    "default_checkpoints",
    "upper_density",
    "d_lim_verdict",
]

# A checkpoint n participates in limsup/liminf estimates when 16*n >= horizon;
# earlier prefixes are treated as transient.
STABILIZATION_DIVISOR = 16

DEFAULT_ZERO_DENSITY_TOLERANCE = Fraction(1, 100)

ZERO = Fraction(0)
ONE = Fraction(1)


def _check_sorted_positive(values: tuple[int, ...], what: str) -> None:
    prev = 0
    for v in values:
        if not isinstance(v, int) or isinstance(v, bool):
            raise ValidationError(f"{what} must contain integers, got {v!r}")
        if v <= prev:
            raise ValidationError(f"{what} must be strictly increasing and >= 1")
        prev = v


@dataclass(frozen=True)
class FiniteIndexSet:
    """A finite set of positive integers, kept sorted."""

    elements: tuple[int, ...]

    kind = "finite"

    def __post_init__(self) -> None:
        _check_sorted_positive(self.elements, "finite index set")

    def contains(self, n: int) -> bool:
        i = bisect_left(self.elements, n)
        return i < len(self.elements) and self.elements[i] == n

    def count_upto(self, n: int) -> int:
        return bisect_right(self.elements, n)

    @property
    def exact_density(self) -> Fraction:
        return ZERO


@dataclass(frozen=True)
class PeriodicIndexSet:
    """An eventually periodic set of positive integers.

    For n >= threshold, membership is ``n % period in residues``.  Each
    entry of ``exceptions`` names a position below the threshold where
    that rule is flipped, so a purely periodic set has an empty
    exception list and any threshold.  Flipping commutes with
    complementation, which is why the complement shares the exception
    list.
    """

    threshold: int
    period: int
    residues: tuple[int, ...]
    exceptions: tuple[int, ...] = ()

    kind = "periodic"

    def __post_init__(self) -> None:
        if self.period < 1:
            raise ValidationError("period must be >= 1")
        if self.threshold < 0:
            raise ValidationError("threshold must be >= 0")
        prev = -1
        for r in self.residues:
            if not isinstance(r, int) or r <= prev or r >= self.period:
                raise ValidationError("residues must be strictly increasing within {0..period-1}")
            prev = r
        _check_sorted_positive(self.exceptions, "exceptions")
        for e in self.exceptions:
            if e >= self.threshold:
                raise ValidationError("exceptions must lie strictly below the threshold")

    def contains(self, n: int) -> bool:
        base = (n % self.period) in self.residues
        if n < self.threshold and n in self.exceptions:
            return not base
        return base

    def count_upto(self, n: int) -> int:
        total = 0
        for r in self.residues:
            first = r if r >= 1 else self.period
            if first <= n:
                total += (n - first) // self.period + 1
        for e in self.exceptions:
            if e <= n:
                total += -1 if (e % self.period) in self.residues else 1
        return total

    @property
    def exact_density(self) -> Fraction:
        return Fraction(len(self.residues), self.period)

    def complement(self) -> "PeriodicIndexSet":
        rest = tuple(r for r in range(self.period) if r not in self.residues)
        return PeriodicIndexSet(self.threshold, self.period, rest, self.exceptions)


@dataclass(frozen=True)
class SampledIndexSet:
    """Membership known exactly for 1..horizon and undefined beyond it."""

    horizon: int
    members: tuple[int, ...]

    kind = "sampled"

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValidationError("horizon must be >= 1")
        _check_sorted_positive(self.members, "members")
        if self.members and self.members[-1] > self.horizon:
            raise ValidationError("members must not exceed the horizon")

    def _check(self, n: int) -> None:
        if n > self.horizon:
            raise HorizonExceeded(f"query at {n} exceeds sampling horizon {self.horizon}")

    def contains(self, n: int) -> bool:
        self._check(n)
        i = bisect_left(self.members, n)
        return i < len(self.members) and self.members[i] == n

    def count_upto(self, n: int) -> int:
        self._check(n)
        return bisect_right(self.members, n)

    @property
    def exact_density(self) -> None:
        return None


IndexSet = Union[FiniteIndexSet, PeriodicIndexSet, SampledIndexSet]


def prefix_count(index_set: IndexSet, n: int) -> int:
    """|I ∩ {1..n}|, exactly.  Raises HorizonExceeded on sampled sets past n."""
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"prefix length must be a positive integer, got {n!r}")
    return index_set.count_upto(n)


def members_upto(index_set: IndexSet, n: int) -> list[int]:
    """Sorted list of the members of I ∩ {1..n}."""
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"prefix length must be a positive integer, got {n!r}")
    if isinstance(index_set, FiniteIndexSet):
        return list(index_set.elements[: bisect_right(index_set.elements, n)])
    if isinstance(index_set, SampledIndexSet):
        index_set._check(n)
        return list(index_set.members[: bisect_right(index_set.members, n)])
    return [k for k in range(1, n + 1) if index_set.contains(k)]


@dataclass(frozen=True)
class DensityEstimate:
    """Exact density when the representation determines one, plus horizon ratios.

    ``lower_at_horizon`` and ``upper_at_horizon`` are the min and max of
    the prefix ratios over the stabilized checkpoints.
    """

    exact: Fraction | None
    lower_at_horizon: Fraction
    upper_at_horizon: Fraction
    horizon: int
    checkpoints: tuple[int, ...]

    def __post_init__(self) -> None:
        if not (ZERO <= self.lower_at_horizon <= self.upper_at_horizon <= ONE):
            raise ValidationError("need 0 <= lower <= upper <= 1")
        if self.exact is not None and not (ZERO <= self.exact <= ONE):
            raise ValidationError("exact density must lie in [0, 1]")

    @property
    def verdict_value(self) -> Fraction:
        """The value a zero-density verdict compares with its tolerance."""
        return self.exact if self.exact is not None else self.upper_at_horizon


def default_checkpoints(horizon: int) -> tuple[int, ...]:
    """Powers of two up to the horizon, plus the horizon itself."""
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    cps = []
    c = 1
    while c <= horizon:
        cps.append(c)
        c *= 2
    if cps[-1] != horizon:
        cps.append(horizon)
    return tuple(cps)


def upper_density(index_set: IndexSet, checkpoints: tuple[int, ...] | list[int]) -> DensityEstimate:
    """Density estimate of an index set over the given prefix checkpoints.

    Finite and eventually periodic sets get their exact density (0 and
    len(residues)/period).  The horizon bounds come from the prefix
    ratios at checkpoints in the stabilized window; checkpoints must be
    within the horizon of sampled sets.
    """
    cps = tuple(sorted(set(checkpoints)))
    if not cps:
        raise ValidationError("checkpoints must be nonempty")
    horizon = cps[-1]
    ratios = [Fraction(prefix_count(index_set, c), c) for c in cps]
    stabilized = [
        ratio for c, ratio in zip(cps, ratios) if c * STABILIZATION_DIVISOR >= horizon
    ]
    return DensityEstimate(
        exact=index_set.exact_density,
        lower_at_horizon=min(stabilized),
        upper_at_horizon=max(stabilized),
        horizon=horizon,
        checkpoints=cps,
    )


@dataclass(frozen=True)
class TailRule:
    """Values cycling with the given period immediately after the prefix."""

    period: int
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.period < 1:
            raise ValidationError("tail period must be >= 1")
        if len(self.values) != self.period:
            raise ValidationError("tail rule needs exactly one value per residue")


@dataclass(frozen=True)
class RealSequence:
    """A rational sequence given by an explicit prefix and an optional periodic tail.

    ``bound`` is a uniform bound: |a_n| <= bound for every evaluable n.
    """

    prefix: tuple[Fraction, ...]
    tail: TailRule | None
    bound: Fraction

    def __post_init__(self) -> None:
        if self.bound < 0:
            raise ValidationError("bound must be >= 0")
        for i, v in enumerate(self.prefix):
            if v > self.bound or -v > self.bound:
                raise ValidationError(f"prefix value a_{i + 1} = {v} exceeds bound {self.bound}")
        if self.tail is not None:
            for v in self.tail.values:
                if v > self.bound or -v > self.bound:
                    raise ValidationError(f"tail value {v} exceeds bound {self.bound}")

    @classmethod
    def from_values(cls, values, tail: TailRule | None = None, bound: Fraction | None = None) -> "RealSequence":
        prefix = tuple(Fraction(v) for v in values)
        if bound is None:
            candidates = [abs(v) for v in prefix]
            if tail is not None:
                candidates.extend(abs(v) for v in tail.values)
            bound = max(candidates, default=ZERO)
        return cls(prefix=prefix, tail=tail, bound=Fraction(bound))

    def evaluable_to(self, n: int) -> bool:
        return self.tail is not None or n <= len(self.prefix)

    def value_at(self, n: int) -> Fraction:
        if n < 1:
            raise ValidationError("sequence positions start at 1")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        if self.tail is None:
            raise ValidationError(f"a_{n} is beyond the evaluable prefix (length {len(self.prefix)})")
        return self.tail.values[(n - len(self.prefix) - 1) % self.tail.period]


@dataclass(frozen=True)
class DLimVerdict:
    """Truncation-relative zero-density verdict for an exception set."""

    holds: bool
    exception_set: IndexSet
    density: DensityEstimate


def _exceptional_prefix_indices(seq: RealSequence, center: Fraction, radius: Fraction, upto: int) -> list[int]:
    out = []
    neg = -radius
    if center == 0:
        for n, v in enumerate(seq.prefix[:upto], start=1):
            if v > radius or v < neg:
                out.append(n)
    else:
        for n, v in enumerate(seq.prefix[:upto], start=1):
            d = v - center
            if d > radius or d < neg:
                out.append(n)
    return out


def d_lim_verdict(
    seq: RealSequence,
    limit: Fraction,
    radius: Fraction,
    horizon: int,
    tolerance: Fraction = DEFAULT_ZERO_DENSITY_TOLERANCE,
    checkpoints: tuple[int, ...] | None = None,
) -> DLimVerdict:
    """Does the sequence stay within ``radius`` of ``limit`` outside a null set?

    The exception set {n : |a_n - limit| > radius} is represented as
    faithfully as the sequence allows:

    * with a periodic tail rule the full exception set is eventually
      periodic and its density is exact;
    * with a bare prefix, exceptions that die out before the stabilized
      window form a finite set (exact density 0), and otherwise the set
      stays sampled with a horizon-based estimate.

    The verdict holds when the exact density, or failing that the upper
    horizon estimate, is at most ``tolerance``.  It certifies the
    truncation at ``horizon``, nothing beyond it.
    """
    limit = Fraction(limit)
    radius = Fraction(radius)
    tolerance = Fraction(tolerance)
    if radius <= 0:
        raise ValidationError("radius must be > 0")
    if tolerance < 0:
        raise ValidationError("tolerance must be >= 0")
    if not isinstance(horizon, int) or horizon < 1:
        raise ValidationError("horizon must be a positive integer")
    if not seq.evaluable_to(horizon):
        raise ValidationError(
            f"horizon {horizon} exceeds the evaluable prefix (length {len(seq.prefix)}, no tail rule)"
        )

    prefix_len = len(seq.prefix)
    exception_set: IndexSet
    if seq.tail is not None:
        q = seq.tail.period
        bad = [
            j
            for j, v in enumerate(seq.tail.values)
            if abs(v - limit) > radius
        ]
        residues = tuple(sorted((prefix_len + 1 + j) % q for j in bad))
        flagged = set(_exceptional_prefix_indices(seq, limit, radius, prefix_len))
        flips = tuple(
            n for n in range(1, prefix_len + 1) if (n in flagged) != ((n % q) in residues)
        )
        exception_set = PeriodicIndexSet(
            threshold=prefix_len + 1, period=q, residues=residues, exceptions=flips
        )
    else:
        hits = _exceptional_prefix_indices(seq, limit, radius, horizon)
        if not hits or hits[-1] * STABILIZATION_DIVISOR <= horizon:
            # No exceptions survive into the stabilized window: as a
            # truncation-relative object the exception set is finite.
            exception_set = FiniteIndexSet(tuple(hits))
        else:
            exception_set = SampledIndexSet(horizon=horizon, members=tuple(hits))

    density = upper_density(exception_set, checkpoints or default_checkpoints(horizon))
    return DLimVerdict(
        holds=density.verdict_value <= tolerance,
        exception_set=exception_set,
        density=density,
    )
