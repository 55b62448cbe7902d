import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densitytk import (
    BoundedFamily,
    FiniteIndexSet,
    Functional,
    HypothesisViolation,
    PeriodicIndexSet,
    TailViolation,
    ValidationError,
    backward_pipeline,
    build_level_sets,
    forward_functional,
    generate_witness_instance,
    weak_d_convergence_check,
)
from densitytk.witness import default_witness_parameters, tail_window

NATURALS = PeriodicIndexSet(threshold=0, period=1, residues=(0,))
EVENS = PeriodicIndexSet(threshold=0, period=2, residues=(0,))


def indicator_family(horizon, hot):
    """f_n = indicator of x1 scaled by hot(n), on a 2-point ground set."""
    t = Functional.point_mass(("x1", "x2"), "x1")
    functions = {
        n: {"x1": hot(n), "x2": F(0)} for n in range(1, horizon + 1)
    }
    family = BoundedFamily(space=t.as_space(), functions=functions, bound=F(1))
    return t, family


class TestBuildLevelSets:
    def test_even_indicator_levels(self):
        t, family = indicator_family(8, lambda n: F(1) if n % 2 == 0 else F(0))
        fam = build_level_sets(family, t, EVENS, 8, F(1, 2), s=F(1, 4))
        assert fam.prefix_indices == (2, 4, 6, 8)
        for n in fam.prefix_indices:
            assert "x1" in fam.sets[n]
            mu = fam.space.measure(fam.sets[n])
            assert mu == 1
            assert mu > F(1, 4)  # (r - s)/M with M = 1
        assert fam.a == F(1, 4)

    def test_constant_bound_fills_the_space(self):
        t = Functional(points=("x1", "x2"), weights=(F(1, 2), F(1, 2)))
        functions = {n: {"x1": F(1), "x2": F(1)} for n in range(1, 5)}
        family = BoundedFamily(space=t.as_space(), functions=functions, bound=F(1))
        fam = build_level_sets(family, t, NATURALS, 4, F(1, 2))
        for n in fam.prefix_indices:
            assert fam.sets[n] == fam.space.full_set
            assert fam.space.measure(fam.sets[n]) == 1

    def test_hypothesis_violation(self):
        t, family = indicator_family(6, lambda n: F(0))
        with pytest.raises(HypothesisViolation):
            build_level_sets(family, t, EVENS, 6, F(1, 2))

    def test_cancellation_violates(self):
        t = Functional(points=("x1", "x2"), weights=(F(1, 2), F(1, 2)))
        functions = {n: {"x1": F(1), "x2": F(-1)} for n in range(1, 5)}
        family = BoundedFamily(space=t.as_space(), functions=functions, bound=F(1))
        with pytest.raises(HypothesisViolation):
            build_level_sets(family, t, NATURALS, 4, F(1, 2))

    def test_parameter_ranges(self):
        t, family = indicator_family(4, lambda n: F(1))
        with pytest.raises(ValidationError):
            build_level_sets(family, t, NATURALS, 4, F(1, 2), s=F(1, 2))
        with pytest.raises(ValidationError):
            build_level_sets(family, t, NATURALS, 4, F(1, 2), s=F(1, 4), delta=F(1, 4))
        with pytest.raises(ValidationError):
            build_level_sets(family, t, NATURALS, 4, F(0))

    def test_defaults_sit_at_midpoints(self):
        t = Functional(points=("x1",), weights=(F(2),))
        s, delta = default_witness_parameters(F(1, 2), t)
        assert s == F(1, 4)
        assert delta == F(1, 16)
        assert 0 < delta < s / t.total

    def test_measure_floor_weakens_as_s_grows(self):
        t, family = indicator_family(4, lambda n: F(1))
        floors = []
        for s in (F(1, 8), F(1, 4), F(3, 8)):
            fam = build_level_sets(family, t, EVENS, 4, F(1, 2), s=s)
            floors.append(fam.a)
        assert floors == sorted(floors, reverse=True)
        assert floors == [F(3, 8), F(1, 4), F(1, 8)]


class TestBackwardPipeline:
    def test_even_indicator_certificate(self):
        t, family = indicator_family(8, lambda n: F(1) if n % 2 == 0 else F(0))
        cert = backward_pipeline(family, t, EVENS, 8, F(1, 2), s=F(1, 4))
        assert cert.selected.elements == (2, 4, 6, 8)
        assert set(cert.points) == {"x1"}
        assert all(v == 1 for v in cert.tail_min.values())
        assert all(v >= cert.delta for v in cert.tail_min.values())

    def test_constant_bound_selects_whole_prefix(self):
        t = Functional(points=("x1", "x2"), weights=(F(1, 2), F(1, 2)))
        functions = {n: {"x1": F(1), "x2": F(1)} for n in range(1, 7)}
        family = BoundedFamily(space=t.as_space(), functions=functions, bound=F(1))
        cert = backward_pipeline(family, t, NATURALS, 6, F(1, 2))
        assert cert.selected.elements == (1, 2, 3, 4, 5, 6)

    def test_violation_propagates(self):
        t = Functional(points=("x1", "x2"), weights=(F(1, 2), F(1, 2)))
        functions = {n: {"x1": F(1), "x2": F(-1)} for n in range(1, 5)}
        family = BoundedFamily(space=t.as_space(), functions=functions, bound=F(1))
        with pytest.raises(HypothesisViolation):
            backward_pipeline(family, t, NATURALS, 4, F(1, 2))

    def test_witness_avoids_zero_weight_points(self):
        # x1 carries the functional's mass; x2 is a null point that also clears δ
        t = Functional(points=("x1", "x2"), weights=(F(1), F(0)))
        functions = {n: {"x1": F(1, 2), "x2": F(1)} for n in range(1, 4)}
        family = BoundedFamily(space=t.as_space(), functions=functions, bound=F(1))
        cert = backward_pipeline(family, t, NATURALS, 3, F(1, 4))
        assert set(cert.points) == {"x1"}


class TestForwardFunctional:
    def test_constant_witness(self):
        _, family = indicator_family(8, lambda n: F(1))
        cert = forward_functional(family, ["x1"] * 4, NATURALS, 8, F(1, 2))
        assert cert.checked == (1, 2, 3, 4, 5, 6, 7, 8)
        assert cert.tail_index == 4
        assert cert.functional.apply(family.functions[1]) == 1

    def test_zero_value_in_window_is_named(self):
        _, family = indicator_family(4, lambda n: F(1) if n % 2 == 0 else F(0))
        with pytest.raises(TailViolation):
            forward_functional(family, ["x1", "x1"], NATURALS, 4, F(1, 2))

    def test_head_of_sequence_is_ignored(self):
        # early points may fail r as long as the tail window clears it
        t = Functional.point_mass(("x1", "x2"), "x1")
        functions = {n: {"x1": F(1), "x2": F(0)} for n in range(1, 4)}
        family = BoundedFamily(space=t.as_space(), functions=functions, bound=F(1))
        points = ["x2", "x2", "x2", "x1", "x1", "x1", "x1"]
        assert list(tail_window(7)) == [4, 5, 6, 7]
        cert = forward_functional(family, points, NATURALS, 3, F(1, 2))
        assert cert.tail_index == 7

    def test_roundtrip_from_backward(self):
        t, family = indicator_family(8, lambda n: F(1) if n % 2 == 0 else F(0))
        back = backward_pipeline(family, t, EVENS, 8, F(1, 2), s=F(1, 4))
        forward = forward_functional(
            family, back.points, back.selected, 8, back.delta / 2
        )
        assert forward.checked == back.selected.elements
        for n in forward.checked:
            assert abs(forward.functional.apply(family.functions[n])) > back.delta / 2

    @given(st.integers(0, 400))
    @settings(max_examples=80, deadline=None)
    def test_roundtrip_on_seeded_instances(self, seed):
        inst = generate_witness_instance(seed)
        back = backward_pipeline(
            inst.family, inst.functional, inst.index_set, inst.horizon, inst.r
        )
        level = back.level_sets
        floor = level.a
        for n in level.prefix_indices:
            assert level.space.measure(level.sets[n]) > floor
        for n in back.selected.elements:
            assert back.tail_min[n] >= back.delta
        forward = forward_functional(
            inst.family, back.points, back.selected, inst.horizon, back.delta / 2
        )
        assert forward.checked == back.selected.elements


class TestDeltaSoundness:
    @given(st.data())
    @settings(max_examples=80)
    def test_small_functions_stay_below_s(self, data):
        n_pts = data.draw(st.integers(1, 5))
        points = tuple(f"x{i + 1}" for i in range(n_pts))
        weights = tuple(
            data.draw(st.fractions(min_value=0, max_value=2, max_denominator=8))
            for _ in range(n_pts)
        )
        t = Functional(points=points, weights=weights)
        if t.total == 0:
            return
        r = data.draw(st.fractions(min_value=F(1, 8), max_value=2, max_denominator=8))
        s, delta = default_witness_parameters(r, t)
        g = {
            p: data.draw(
                st.fractions(min_value=-1, max_value=1, max_denominator=16)
            )
            * delta
            for p in points
        }
        assert all(abs(v) <= delta for v in g.values())
        assert abs(t.apply(g)) <= delta * t.total < s


class TestWeakDConvergence:
    def test_uniformly_vanishing_family_passes_everywhere(self):
        t1 = Functional(points=("x1", "x2"), weights=(F(1, 2), F(1, 2)))
        t2 = Functional.point_mass(("x1", "x2"), "x2")
        horizon = 512
        functions = {
            n: {"x1": F(1, n), "x2": F(1, n)} for n in range(1, horizon + 1)
        }
        family = BoundedFamily(space=t1.as_space(), functions=functions, bound=F(1))
        verdicts = weak_d_convergence_check(family, [t1, t2], F(1, 16), horizon)
        assert all(v.holds for v in verdicts)

    def test_even_spikes_fail_for_point_mass(self):
        t = Functional.point_mass(("x1", "x2"), "x1")
        horizon = 1024
        hot = {"x1": F(1), "x2": F(0)}
        cold = {"x1": F(0), "x2": F(0)}
        functions = {n: hot if n % 2 == 0 else cold for n in range(1, horizon + 1)}
        family = BoundedFamily(space=t.as_space(), functions=functions, bound=F(1))
        (verdict,) = weak_d_convergence_check(family, [t], F(1, 2), horizon)
        assert not verdict.holds
        assert verdict.density.upper_at_horizon == F(1, 2)

    def test_square_spikes_pass_at_tolerance(self):
        t = Functional.point_mass(("x1",), "x1")
        horizon = 10**6
        hot = {"x1": F(1)}
        cold = {"x1": F(0)}
        squares = {k * k for k in range(1, math.isqrt(horizon) + 1)}
        functions = {n: (hot if n in squares else cold) for n in range(1, horizon + 1)}
        family = BoundedFamily(space=t.as_space(), functions=functions, bound=F(1))
        (verdict,) = weak_d_convergence_check(
            family, [t], F(1, 2), horizon, tolerance=F(1, 100)
        )
        assert verdict.holds
        assert verdict.exception_set.members == tuple(sorted(squares))

    def test_functionals_required(self):
        _, family = indicator_family(4, lambda n: F(0))
        with pytest.raises(ValidationError):
            weak_d_convergence_check(family, [], F(1, 2), 4)
