from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densitytk import (
    EmptyIndexPrefix,
    FiniteIndexSet,
    FiniteMeasureSpace,
    NoPositivePoint,
    PeriodicIndexSet,
    PrefixDensityTooLow,
    SetFamily,
    TooLargeForOracle,
    ValidationError,
    admitted_checkpoints,
    averaging_identity_check,
    averaging_profile,
    default_ratio_threshold,
    density_ratio_certificate,
    fip_oracle,
    select_common_point,
)

NATURALS = PeriodicIndexSet(threshold=0, period=1, residues=(0,))
EVENS = PeriodicIndexSet(threshold=0, period=2, residues=(0,))


def uniform(n):
    return FiniteMeasureSpace(
        points=tuple(f"x{i + 1}" for i in range(n)), weights=(F(1, n),) * n
    )


def two_point_family():
    space = uniform(2)
    sets = {1: space.subset(["x1"]), 2: space.subset(["x1"]), 3: space.subset(["x2"])}
    return SetFamily(space=space, index_set=NATURALS, horizon=3, sets=sets, a=F(1, 2))


def cyclic_family():
    space = uniform(4)
    sets = {
        1: space.subset(["x1", "x2"]),
        2: space.subset(["x2", "x3"]),
        3: space.subset(["x3", "x4"]),
        4: space.subset(["x4", "x1"]),
    }
    return SetFamily(space=space, index_set=NATURALS, horizon=4, sets=sets, a=F(1, 2))


def constant_family(space, subset, horizon, a, index_set=NATURALS):
    sets = {n: subset for n in range(1, horizon + 1) if index_set.contains(n)}
    return SetFamily(space=space, index_set=index_set, horizon=horizon, sets=sets, a=a)


@st.composite
def random_families(draw, max_points=6, max_sets=10):
    n_pts = draw(st.integers(1, max_points))
    raw = draw(st.lists(st.integers(0, 8), min_size=n_pts, max_size=n_pts))
    if sum(raw) == 0:
        raw[0] = 1
    total = sum(raw)
    space = FiniteMeasureSpace(
        points=tuple(f"x{i + 1}" for i in range(n_pts)),
        weights=tuple(F(w, total) for w in raw),
    )
    size = draw(st.integers(1, max_sets))
    masks = draw(
        st.lists(st.integers(0, (1 << n_pts) - 1), min_size=size, max_size=size)
    )
    sets = {n: space.subset([]) for n in range(1, size + 1)}
    for n, mask in enumerate(masks, start=1):
        sets[n] = space.subset([p for i, p in enumerate(space.points) if mask >> i & 1])
    a = min(space.measure(s) for s in sets.values())
    return SetFamily(space=space, index_set=NATURALS, horizon=size, sets=sets, a=a)


class TestAveragingProfile:
    def test_full_sets_give_one(self):
        space = uniform(3)
        fam = constant_family(space, space.full_set, 5, F(1))
        assert averaging_profile(fam, 5) == {p: F(1) for p in space.points}

    def test_two_point_counts(self):
        prof = averaging_profile(two_point_family(), 3)
        assert prof == {"x1": F(2, 3), "x2": F(1, 3)}

    def test_empty_sets_allowed_at_zero_floor(self):
        space = uniform(2)
        fam = constant_family(space, space.empty_set, 4, F(0))
        assert averaging_profile(fam, 4) == {p: F(0) for p in space.points}

    def test_empty_prefix_rejected(self):
        space = uniform(2)
        late = FiniteIndexSet((5, 6))
        fam = SetFamily(
            space=space,
            index_set=late,
            horizon=6,
            sets={5: space.full_set, 6: space.full_set},
            a=F(1),
        )
        with pytest.raises(EmptyIndexPrefix):
            averaging_profile(fam, 3)

    def test_declared_floor_checked_at_construction(self):
        space = uniform(2)
        with pytest.raises(ValidationError):
            constant_family(space, space.subset(["x1"]), 3, F(3, 4))


class TestAveragingIdentity:
    def test_two_point_instance(self):
        chk = averaging_identity_check(two_point_family(), 3)
        assert chk.lhs == chk.rhs == F(1, 2)
        assert chk.holds

    def test_full_sets_hit_total_mass(self):
        space = uniform(3)
        fam = constant_family(space, space.full_set, 4, F(1))
        chk = averaging_identity_check(fam, 4)
        assert chk.lhs == chk.rhs == space.total_mass

    def test_single_set_at_the_floor(self):
        space = uniform(4)
        a = F(1, 4)
        fam = constant_family(space, space.subset(["x3"]), 1, a)
        chk = averaging_identity_check(fam, 1)
        assert chk.lhs == chk.rhs == a

    @given(random_families(), st.data())
    @settings(max_examples=150)
    def test_exact_equality_always(self, fam, data):
        n = data.draw(st.integers(1, fam.horizon))
        chk = averaging_identity_check(fam, n)
        assert chk.lhs == chk.rhs
        assert chk.holds


class TestSelectCommonPoint:
    def test_two_point_instance(self):
        sel = select_common_point(two_point_family(), 3)
        assert sel.witness == "x1"
        assert sel.selected.elements == (1, 2)
        assert sel.cardinality_bound.verified
        assert 2 >= F(1, 2) * 3

    def test_cyclic_tie_breaks_to_first_point(self):
        sel = select_common_point(cyclic_family(), 4)
        assert sel.f_value == F(1, 2)
        assert sel.witness == "x1"
        assert sel.selected.elements == (1, 4)
        assert sel.cardinality_bound.selected_size == 2 == F(1, 2) * 4

    def test_identical_sets_select_everything(self):
        space = uniform(3)
        subset = space.subset(["x2"])
        fam = constant_family(space, subset, 6, space.measure(subset))
        sel = select_common_point(fam, 6)
        assert sel.selected.elements == (1, 2, 3, 4, 5, 6)

    def test_positive_restriction_skips_null_witnesses(self):
        space = FiniteMeasureSpace(points=("x1", "x2"), weights=(F(0), F(1)))
        sets = {
            1: space.subset(["x1"]),
            2: space.subset(["x1", "x2"]),
            3: space.subset(["x1"]),
        }
        fam = SetFamily(space=space, index_set=NATURALS, horizon=3, sets=sets, a=F(0))
        free = select_common_point(fam, 3)
        assert free.witness == "x1"
        positive = select_common_point(fam, 3, restrict_positive=True)
        assert positive.witness == "x2"
        assert positive.selected.elements == (2,)
        mu = space.measure(sets[2])
        assert mu > 0

    def test_no_positive_point(self):
        space = FiniteMeasureSpace(points=("x1",), weights=(F(0),))
        fam = constant_family(space, space.full_set, 2, F(0))
        with pytest.raises(NoPositivePoint):
            select_common_point(fam, 2, restrict_positive=True)

    @given(random_families(), st.data())
    @settings(max_examples=150)
    def test_guarantee_and_membership(self, fam, data):
        n = data.draw(st.integers(1, fam.horizon))
        sel = select_common_point(fam, n)
        prefix = [k for k in fam.prefix_indices if k <= n]
        assert sel.cardinality_bound.selected_size >= fam.a * len(prefix)
        assert sel.cardinality_bound.verified
        for k in sel.selected.elements:
            assert sel.witness in fam.sets[k]
        # selected is exactly the witness's membership set
        assert sel.selected.elements == tuple(
            k for k in prefix if sel.witness in fam.sets[k]
        )

    @given(random_families(), st.integers(1, 64))
    @settings(max_examples=60)
    def test_scale_invariance_of_selection(self, fam, c_num):
        c = F(c_num, 7)
        scaled_space = FiniteMeasureSpace(
            points=fam.space.points, weights=tuple(c * w for w in fam.space.weights)
        )
        scaled = SetFamily(
            space=scaled_space,
            index_set=fam.index_set,
            horizon=fam.horizon,
            sets={
                n: scaled_space.subset(fam.sets[n].members()) for n in fam.prefix_indices
            },
            a=c * fam.a,
        )
        before = select_common_point(fam, fam.horizon)
        after = select_common_point(scaled, fam.horizon)
        assert before.witness == after.witness
        assert before.selected == after.selected
        chk0 = averaging_identity_check(fam, fam.horizon)
        chk1 = averaging_identity_check(scaled, fam.horizon)
        assert chk1.lhs == c * chk0.lhs and chk1.rhs == c * chk0.rhs


class TestFipOracle:
    def test_two_point_instance(self):
        res = fip_oracle(two_point_family(), 3)
        assert res.max_size == 2
        assert res.best_subset == (1, 2)

    def test_cyclic_instance(self):
        res = fip_oracle(cyclic_family(), 4)
        assert res.max_size == 2

    def test_identical_sets(self):
        space = uniform(2)
        fam = constant_family(space, space.subset(["x1"]), 7, F(1, 2))
        res = fip_oracle(fam, 7)
        assert res.max_size == 7
        assert res.best_subset == (1, 2, 3, 4, 5, 6, 7)

    def test_refuses_large_prefixes(self):
        space = uniform(2)
        fam = constant_family(space, space.full_set, 21, F(1))
        with pytest.raises(TooLargeForOracle):
            fip_oracle(fam, 21)

    @given(random_families(max_sets=9), st.data())
    @settings(max_examples=100)
    def test_selector_is_optimal(self, fam, data):
        n = data.draw(st.integers(1, fam.horizon))
        sel = select_common_point(fam, n)
        res = fip_oracle(fam, n)
        assert sel.cardinality_bound.selected_size == res.max_size
        # the oracle's subfamily really does share a point
        common = fam.space.full_set
        for k in res.best_subset:
            common = common.intersection(fam.sets[k])
        if res.best_subset:
            assert not common.is_empty


class TestRatioCertificate:
    def test_two_point_instance_on_naturals(self):
        fam = two_point_family()
        sel = select_common_point(fam, 3)
        cert = density_ratio_certificate(fam, sel, 3, F(9, 10))
        assert cert.selected_ratio == F(2, 3)
        assert cert.factorization_holds
        assert cert.prefix_ratio == 1
        assert cert.meets_declared_bound and cert.meets_profile_bound

    def test_evens_with_full_sets(self):
        space = uniform(2)
        fam = constant_family(space, space.full_set, 8, F(1), index_set=EVENS)
        sel = select_common_point(fam, 8)
        cert = density_ratio_certificate(fam, sel, 8, F(1, 4))
        assert cert.selected_ratio == F(1, 2)
        assert cert.f_value == 1
        assert cert.selected_ratio > 1 * F(1, 4)

    def test_cyclic_at_three_quarters(self):
        fam = cyclic_family()
        sel = select_common_point(fam, 4)
        cert = density_ratio_certificate(fam, sel, 4, F(3, 4))
        assert cert.selected_ratio == F(1, 2)
        assert cert.f_value * cert.prefix_ratio == F(1, 2)
        assert cert.selected_ratio > F(1, 2) * F(3, 4)

    def test_admission_failure(self):
        space = uniform(2)
        fam = constant_family(space, space.full_set, 8, F(1), index_set=EVENS)
        sel = select_common_point(fam, 8)
        with pytest.raises(PrefixDensityTooLow):
            density_ratio_certificate(fam, sel, 8, F(1, 2))

    def test_selection_horizon_must_match(self):
        fam = two_point_family()
        sel = select_common_point(fam, 2)
        with pytest.raises(ValidationError):
            density_ratio_certificate(fam, sel, 3, F(1, 4))

    def test_admitted_checkpoints_and_default_threshold(self):
        b = default_ratio_threshold(EVENS)
        assert b == F(1, 2) - F(1, 10)
        etas = admitted_checkpoints(EVENS, b, 64)
        assert etas == [2, 4, 8, 16, 32, 64]
        assert admitted_checkpoints(EVENS, F(3, 4), 64) == []
        with pytest.raises(ValidationError):
            default_ratio_threshold(FiniteIndexSet((1, 2)))
