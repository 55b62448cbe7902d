"""Two-directional witness pipelines for weak density convergence.

Backward direction: given a positive linear functional T with
|T(f_n)| > r on an index prefix, the level sets A_n = {|f_n| > δ}
(with 0 < δ < s/T(1), 0 < s < r) satisfy the exact chain

    r < |T(f_n)| <= M·T(χ_{A_n}) + s,   hence   μ(A_n) > (r - s)/M,

where μ is the measure E ↦ T(χ_E).  Selecting a common positive-weight
point for those level sets yields indices J and a constant witness
sequence along which |f_n| stays >= δ, i.e. the tail-minimum form of
the conclusion.

Forward direction: a witness sequence whose tail window keeps |f_n|
strictly above r turns evaluation at its last point into a positive
linear functional exceeding r on the same indices.

Ideal objects are replaced by stated finite surrogates: the liminf over
an infinite tail becomes the minimum over the half-tail window
k in [ceil(K/2), K], and the limit functional becomes evaluation at the
last witness point (exact whenever the witness sequence is eventually
constant, which covers every single-witness selection produced here).
All certificate inequalities are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .bergelson import SetFamily, select_common_point
from .density import (
    DEFAULT_ZERO_DENSITY_TOLERANCE,
    DLimVerdict,
    FiniteIndexSet,
    IndexSet,
    RealSequence,
    d_lim_verdict,
    members_upto,
)
from .errors import HypothesisViolation, TailViolation, ValidationError
from .measure import FiniteMeasureSpace, Functional, MSet

__all__ = [
    "BoundedFamily",
    "BackwardCertificate",
    "ForwardCertificate",
    "default_witness_parameters",
    "tail_window",
    "build_level_sets",
    "backward_pipeline",
    "forward_functional",
    "weak_d_convergence_check",
]

ZERO = Fraction(0)


@dataclass(frozen=True)
class BoundedFamily:
    """Functions f_1..f_N on a common ground set with a uniform bound M."""

    space: FiniteMeasureSpace
    functions: Mapping[int, Mapping[str, Fraction]]
    bound: Fraction

    def __post_init__(self) -> None:
        if self.bound < 0:
            raise ValidationError("uniform bound must be >= 0")
        keys = set(self.functions)
        size = len(keys)
        if keys != set(range(1, size + 1)):
            raise ValidationError("functions must be indexed contiguously from 1")
        point_set = set(self.space.points)
        checked_ids: set[int] = set()
        for n in range(1, size + 1):
            g = self.functions[n]
            if id(g) in checked_ids:
                continue
            checked_ids.add(id(g))
            if set(g) != point_set:
                raise ValidationError(f"f_{n} must be defined on exactly the ground set")
            for p, v in g.items():
                if v > self.bound or -v > self.bound:
                    raise ValidationError(f"|f_{n}({p})| = {abs(v)} exceeds the bound {self.bound}")

    @property
    def size(self) -> int:
        return len(self.functions)

    def value(self, n: int, point: str) -> Fraction:
        return self.functions[n][point]


def default_witness_parameters(r: Fraction, functional: Functional) -> tuple[Fraction, Fraction]:
    """Midpoint defaults: s = r/2 and δ = s/(2·T(1))."""
    s = Fraction(r) / 2
    return s, s / (2 * functional.total)


def tail_window(length: int) -> range:
    """Half-tail surrogate for a liminf: positions ceil(K/2)..K, 1-based."""
    if length < 1:
        raise ValidationError("witness sequence must be nonempty")
    return range((length + 1) // 2, length + 1)


def _resolve_parameters(
    functional: Functional, r: Fraction, s: Fraction | None, delta: Fraction | None
) -> tuple[Fraction, Fraction, Fraction]:
    r = Fraction(r)
    if r <= 0:
        raise ValidationError("r must be > 0")
    total = functional.total
    if total <= 0:
        raise ValidationError("the functional must have T(1) > 0")
    if s is None:
        s = r / 2
    else:
        s = Fraction(s)
    if not 0 < s < r:
        raise ValidationError(f"need 0 < s < r, got s = {s}, r = {r}")
    if delta is None:
        delta = s / (2 * total)
    else:
        delta = Fraction(delta)
    if not 0 < delta * total < s:
        raise ValidationError(f"need 0 < δ < s/T(1), got δ = {delta}")
    return r, s, delta


def build_level_sets(
    family: BoundedFamily,
    functional: Functional,
    index_set: IndexSet,
    n: int,
    r: Fraction,
    s: Fraction | None = None,
    delta: Fraction | None = None,
) -> SetFamily:
    """Level sets A_k = {x : |f_k(x)| > δ} for k in I ∧ n, over T's measure.

    Verifies |T(f_k)| > r for every indexed k (HypothesisViolation
    otherwise) and the chain |T(f_k)| <= M·T(χ_{A_k}) + s, which forces
    μ(A_k) > (r - s)/M; the returned family declares that floor.
    """
    r, s, delta = _resolve_parameters(functional, r, s, delta)
    if tuple(functional.points) != tuple(family.space.points):
        raise ValidationError("functional and family must share the same ground set")
    if not isinstance(n, int) or not 1 <= n <= family.size:
        raise ValidationError(f"truncation {n!r} outside 1..{family.size}")
    if family.bound > 0:
        floor = (r - s) / family.bound
    else:
        # A zero uniform bound forces T(f_k) = 0, so any indexed k violates the hypothesis.
        floor = ZERO
    space = functional.as_space()
    sets: dict[int, MSet] = {}
    for k in members_upto(index_set, n):
        g = family.functions[k]
        t_k = functional.apply(g)
        if abs(t_k) <= r:
            raise HypothesisViolation(f"|T(f_{k})| = {abs(t_k)} <= r = {r}")
        level = space.subset(p for p in space.points if abs(g[p]) > delta)
        mu = space.measure(level)
        if abs(t_k) >= family.bound * mu + s or mu <= floor:
            raise AssertionError("level-set measure chain failed; this cannot happen")
        sets[k] = level
    return SetFamily(space=space, index_set=index_set, horizon=n, sets=sets, a=floor)


@dataclass(frozen=True)
class BackwardCertificate:
    """Witness data extracted from a functional satisfying the r-bound.

    ``tail_min`` maps each selected index to the minimum of |f_n| over
    the tail window of the witness points; the certificate is valid when
    every such minimum is >= δ, μ(A_n) > (r - s)/M on the whole index
    prefix, and δ·T(1) < s.
    """

    r: Fraction
    s: Fraction
    delta: Fraction
    level_sets: SetFamily
    selected: FiniteIndexSet
    points: tuple[str, ...]
    tail_min: Mapping[int, Fraction]


def backward_pipeline(
    family: BoundedFamily,
    functional: Functional,
    index_set: IndexSet,
    n: int,
    r: Fraction,
    s: Fraction | None = None,
    delta: Fraction | None = None,
) -> BackwardCertificate:
    """Level sets, positive-weight common point, and tail minima in one pass.

    The witness sequence is the selected point repeated once per
    selected index, so its tail window is constant and the tail minimum
    at index n is exactly |f_n(witness)| > δ.
    """
    r, s, delta = _resolve_parameters(functional, r, s, delta)
    level_family = build_level_sets(family, functional, index_set, n, r, s, delta)
    selection = select_common_point(level_family, n, restrict_positive=True)
    picked = selection.selected.elements
    length = max(1, len(picked))
    points = (selection.witness,) * length
    window = tail_window(length)
    tail_min: dict[int, Fraction] = {}
    for k in picked:
        g = family.functions[k]
        tail_min[k] = min(abs(g[points[j - 1]]) for j in window)
        if tail_min[k] < delta:
            raise AssertionError("selected index violates the δ floor; this cannot happen")
    return BackwardCertificate(
        r=r,
        s=s,
        delta=delta,
        level_sets=level_family,
        selected=selection.selected,
        points=points,
        tail_min=tail_min,
    )


@dataclass(frozen=True)
class ForwardCertificate:
    """Evaluation functional built from the tail of a witness sequence."""

    tail_index: int
    functional: Functional
    checked: tuple[int, ...]


def forward_functional(
    family: BoundedFamily,
    points: Sequence[str],
    index_set: IndexSet,
    n: int,
    r: Fraction,
) -> ForwardCertificate:
    """Turn witness points into a point-mass functional with |T(f_k)| > r.

    Requires |f_k(x_j)| > r for every k in I ∧ n and every j in the tail
    window; TailViolation names the first failure.  The functional is the
    point mass at the last witness point, and |T(f_k)| = |f_k(x_K)| is
    re-verified exactly for every indexed k.
    """
    r = Fraction(r)
    if r <= 0:
        raise ValidationError("r must be > 0")
    pts = tuple(points)
    window = tail_window(len(pts))
    for p in pts:
        family.space.index_of(p)
    if not isinstance(n, int) or not 1 <= n <= family.size:
        raise ValidationError(f"truncation {n!r} outside 1..{family.size}")
    idxs = members_upto(index_set, n)
    for k in idxs:
        g = family.functions[k]
        for j in window:
            if abs(g[pts[j - 1]]) <= r:
                raise TailViolation(
                    f"|f_{k}(x_{j})| = {abs(g[pts[j - 1]])} <= r = {r} inside the tail window"
                )
    functional = Functional.point_mass(family.space.points, pts[-1])
    for k in idxs:
        if abs(functional.apply(family.functions[k])) <= r:
            raise AssertionError("point-mass evaluation disagrees with the tail check")
    return ForwardCertificate(tail_index=len(pts), functional=functional, checked=tuple(idxs))


def weak_d_convergence_check(
    family: BoundedFamily,
    functionals: Sequence[Functional],
    r: Fraction,
    n: int,
    tolerance: Fraction = DEFAULT_ZERO_DENSITY_TOLERANCE,
) -> list[DLimVerdict]:
    """Zero-density verdicts for the sequences T(f_1), ..., T(f_n), one per functional."""
    if not functionals:
        raise ValidationError("at least one functional is required")
    if not isinstance(n, int) or not 1 <= n <= family.size:
        raise ValidationError(f"truncation {n!r} outside 1..{family.size}")
    verdicts = []
    for functional in functionals:
        if tuple(functional.points) != tuple(family.space.points):
            raise ValidationError("functional and family must share the same ground set")
        values = tuple(functional.apply(family.functions[k]) for k in range(1, n + 1))
        seq = RealSequence(prefix=values, tail=None, bound=family.bound * functional.total)
        verdicts.append(d_lim_verdict(seq, ZERO, r, n, tolerance))
    return verdicts
