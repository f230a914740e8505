import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lplab.errors import DomainError
from lplab.numerics import RandomSource
from lplab.sets import (
    CoefficientSet,
    ConvexPolytope,
    DiscreteSet,
    dedup,
    hausdorff_by_support,
    lp_pointwise_sum,
    lp_support_sum,
    m_add,
    support_function,
    unit_directions,
    volume_hull,
)


def as_set(A):
    return {tuple(np.round(row, 9) + 0.0) for row in A.points}


class TestCoefficientSet:
    def test_rejects_origin_only(self):
        with pytest.raises(DomainError):
            CoefficientSet.explicit([[0.0, 0.0]])

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            CoefficientSet.explicit([[1.0, -0.5]])

    def test_rejects_bad_shape(self):
        with pytest.raises(DomainError):
            CoefficientSet.explicit([[1.0, 2.0, 3.0]])

    @pytest.mark.parametrize("p", [1.2, 1.5, 2.0, 3.0, 7.5])
    def test_lp_curve_on_unit_q_sphere(self, p):
        M = CoefficientSet.lp_curve(p, 257)
        q = p / (p - 1)
        assert np.max(np.abs(M.pairs[:, 0] ** q + M.pairs[:, 1] ** q - 1)) <= 1e-12
        # endpoints and the equal-weight pair are present
        keys = {tuple(np.round(r, 12)) for r in M.pairs}
        assert (1.0, 0.0) in keys and (0.0, 1.0) in keys
        half = round(0.5 ** (1 / q), 12)
        assert (half, half) in keys

    def test_lp_curve_p1_is_classical(self):
        assert CoefficientSet.lp_curve(1.0).pairs.tolist() == [[1.0, 1.0]]

    def test_lp_curve_rejects_small_p(self):
        with pytest.raises(DomainError):
            CoefficientSet.lp_curve(0.5)

    def test_lp_curve_symmetric(self):
        assert CoefficientSet.lp_curve(2.0, 101).is_symmetric()
        assert not CoefficientSet.minkowski(0.3).is_symmetric()

    def test_convexity_gap(self):
        curve = CoefficientSet.lp_curve(2.0, 65)
        assert curve.convexity_gap() > 0.2  # the arc misses the chord region
        assert curve.convex_hull().convexity_gap() < 0.05
        two = CoefficientSet.explicit([[1, 0], [0, 1]])
        assert two.convexity_gap() == pytest.approx(math.sqrt(2) / 2, abs=0.01)


def test_dedup_keeps_unrounded_values():
    pts = np.array([[math.sqrt(2)], [math.sqrt(2) + 1e-15], [0.0], [-0.0]])
    out = dedup(pts)
    assert len(out) == 2
    assert math.sqrt(2) in out[:, 0]


class TestSupportFunction:
    def test_square(self):
        K = ConvexPolytope(DiscreteSet.box_vertices([0, 0], [1, 1]).points)
        assert support_function(K, [1.0, 0.0]) == 1.0

    def test_origin_singleton(self):
        K = ConvexPolytope([[0.0, 0.0]])
        assert support_function(K, [0.3, -0.7]) == 0.0

    def test_segment_homogeneity(self):
        K = ConvexPolytope([[-1.0], [1.0]])
        assert support_function(K, [3.0]) == 3.0

    @given(st.floats(0, 100), st.floats(-1, 1), st.floats(-1, 1))
    @settings(max_examples=50, deadline=None)
    def test_positive_homogeneity(self, t, u0, u1):
        K = ConvexPolytope(RandomSource(3).generator().normal(size=(12, 2)))
        u = np.array([u0, u1])
        assert support_function(K, t * u) == pytest.approx(t * support_function(K, u), rel=1e-12, abs=1e-12)

    def test_polytope_vertices_are_extreme(self):
        pts = np.vstack([DiscreteSet.box_vertices([0, 0], [1, 1]).points, [[0.5, 0.5], [0.2, 0.7]]])
        assert len(ConvexPolytope(pts).vertices) == 4


class TestMAdd:
    def test_singletons(self):
        out = m_add(DiscreteSet([[0.0]]), DiscreteSet([[3.0]]), CoefficientSet.classical())
        assert out.points.tolist() == [[3.0]]

    def test_projection_pairs_give_union(self):
        gen = RandomSource(1).generator()
        A, B = DiscreteSet(gen.random((7, 2))), DiscreteSet(gen.random((5, 2)))
        out = m_add(A, B, CoefficientSet.explicit([[1, 0], [0, 1]]))
        assert as_set(out) == as_set(A) | as_set(B)

    def test_lp_curve_max_is_sqrt2(self):
        A = DiscreteSet(np.linspace(0, 1, 103).reshape(-1, 1))
        out = m_add(A, A, CoefficientSet.lp_curve(2.0, 1001))
        assert out.points.max() == pytest.approx(math.sqrt(2), abs=1e-3)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            m_add(DiscreteSet([[0.0]]), DiscreteSet([[0.0, 1.0]]), CoefficientSet.classical())

    def test_monotone(self):
        gen = RandomSource(2).generator()
        A = DiscreteSet(gen.random((6, 2)))
        A2 = DiscreteSet(np.vstack([A.points, gen.random((3, 2))]))
        B = DiscreteSet(gen.random((4, 2)))
        M = CoefficientSet.explicit([[1, 0.5], [0.2, 0.3]])
        M2 = CoefficientSet.explicit([[1, 0.5], [0.2, 0.3], [0.7, 0.7]])
        assert as_set(m_add(A, B, M)) <= as_set(m_add(A2, B, M2))

    def test_symmetric_m_commutes(self):
        gen = RandomSource(4).generator()
        A, B = DiscreteSet(gen.random((5, 2))), DiscreteSet(gen.random((6, 2)))
        assert as_set(lp_pointwise_sum(A, B, 2.5, 33)) == as_set(lp_pointwise_sum(B, A, 2.5, 33))


class TestLpPointwiseSum:
    def test_p1_is_minkowski(self):
        out = lp_pointwise_sum(DiscreteSet([[1.5]]), DiscreteSet([[2.0]]), 1.0)
        assert out.points.tolist() == [[3.5]]

    def test_unit_segments_give_sqrt2(self):
        A = DiscreteSet.interval(0, 1, 11)
        out = lp_pointwise_sum(A, A, 2.0, 1001)
        assert out.points.min() == 0.0
        assert out.points.max() == pytest.approx(math.sqrt(2), abs=1e-9)

    def test_contains_first_summand_when_second_is_origin(self):
        A = DiscreteSet(RandomSource(5).generator().random((6, 2)))
        out = lp_pointwise_sum(A, DiscreteSet([[0.0, 0.0]]), 3.0, 17)
        assert as_set(A) <= as_set(out)

    @given(st.floats(0.1, 3), st.floats(0.1, 3), st.floats(1, 6))
    @settings(max_examples=40, deadline=None)
    def test_segment_closed_form(self, a, b, p):
        # independent oracle: the maximal endpoint is (a^p + b^p)^(1/p) by Hölder
        out = lp_pointwise_sum(DiscreteSet([[0.0], [a]]), DiscreteSet([[0.0], [b]]), p, 1001)
        exact = (a**p + b**p) ** (1 / p)
        assert out.points.max() <= exact * (1 + 1e-12)
        assert out.points.max() >= exact * (1 - 1e-3)

    def test_rejects_small_p(self):
        with pytest.raises(DomainError):
            lp_pointwise_sum(DiscreteSet([[0.0]]), DiscreteSet([[0.0]]), 0.9)


class TestLpSupportSum:
    def test_identity_case(self):
        K = ConvexPolytope([[-1.0, -0.5], [2.0, 0.0], [0.0, 1.5]])
        U = unit_directions(2, 32)
        table = lp_support_sum(K, K, 3.0, U)
        assert np.allclose(table.values, 2 ** (1 / 3) * support_function(K, U))

    def test_segments(self):
        table = lp_support_sum(ConvexPolytope([[0.0], [1.0]]), ConvexPolytope([[0.0], [2.0]]), 2.0, [[1.0]])
        assert table.values[0] == pytest.approx(math.sqrt(5), rel=1e-15)

    def test_origin_summand(self):
        K = ConvexPolytope([[-1.0, -1.0], [1.0, -1.0], [0.0, 2.0]])
        U = unit_directions(2, 16)
        table = lp_support_sum(K, ConvexPolytope([[0.0, 0.0]]), 2.0, U)
        assert np.allclose(table.values, support_function(K, U))

    def test_rejects_body_missing_origin(self):
        K = ConvexPolytope([[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]])
        with pytest.raises(DomainError, match="origin"):
            lp_support_sum(K, K, 2.0, unit_directions(2, 8))

    def test_pointwise_and_support_forms_agree(self):
        # hull of the pointwise sum of dense samples vs the support-form body
        def square_samples(k):
            t = np.linspace(-1, 1, k)
            edges = [np.column_stack([t, np.full(k, c)]) for c in (-1, 1)] + [np.column_stack([np.full(k, c), t]) for c in (-1, 1)]
            return DiscreteSet(np.vstack(edges))

        K = ConvexPolytope(DiscreteSet.box_vertices([-1, -1], [1, 1]).points)
        L = ConvexPolytope([[-0.5, -0.5], [1.0, -0.5], [-0.5, 1.0]])
        U = unit_directions(2, 180)
        table = lp_support_sum(K, L, 2.0, U)
        dists = []
        for k, res in ((3, 33), (9, 257)):
            Ks = DiscreteSet(K.vertices)
            Ls = DiscreteSet(np.vstack([L.vertices, [[0.25, 0.25]]]))
            if k > 3:
                Ks = square_samples(k)
            S = lp_pointwise_sum(Ks, Ls, 2.0, res)
            dists.append(hausdorff_by_support(S.extreme_points(), table))
        assert dists[1] <= dists[0]
        assert dists[1] < 5e-3


class TestVolumeHull:
    def test_unit_square(self):
        assert volume_hull(DiscreteSet.box_vertices([0, 0], [1, 1])) == (1.0, 0.0)

    def test_rectangle(self):
        assert volume_hull(DiscreteSet.box_vertices([0, 0], [2, 1])) == (2.0, 0.0)

    def test_interval(self):
        assert volume_hull(DiscreteSet.interval(-1, 2)) == (3.0, 0.0)

    def test_simplex_3d(self):
        pts = np.vstack([np.zeros(3), np.eye(3)])
        est, err = volume_hull(DiscreteSet(pts), 10**6, RandomSource(11))
        assert err > 0
        assert abs(est - 1 / 6) <= 3 * err

    def test_flat_hull(self):
        assert volume_hull(DiscreteSet([[0, 0], [1, 1], [2, 2]]))[0] == 0.0
