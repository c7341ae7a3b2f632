import mpmath
import pytest
from hypothesis import given, strategies as st
from mpmath import mpf

from horoflow import (
    INFINITY,
    BoundaryPoint,
    FuchsianWordBall,
    Isometry,
    IsometryClass,
    Point,
    SplitMix64,
    UnitTangent,
    apply_isometry,
    backward_endpoint,
    boundary_gap,
    busemann,
    classify_isometry,
    classify_isometry_detailed,
    d1,
    d1_quotient,
    geodesic_flow,
    hyp_distance,
    precision,
    reverse,
    stable_vector,
    vector_point,
)
from horoflow.horocycle import random_isometry

I = Point(0, 1)


def simpson(f, a, b, n=400):
    # independent quadrature oracle for arc length along the imaginary axis
    h = (b - a) / n
    total = f(a) + f(b)
    for k in range(1, n):
        total += f(a + k * h) * (4 if k % 2 else 2)
    return total * h / 3


finite_pts = st.builds(
    Point,
    st.floats(min_value=-3, max_value=3),
    st.floats(min_value=0.2, max_value=4),
)
boundaries = st.one_of(
    st.just(INFINITY),
    st.builds(BoundaryPoint.finite, st.floats(min_value=-4, max_value=4)),
)


class TestDistance:
    def test_identity(self):
        assert hyp_distance(I, I) == 0

    def test_vertical_segment_matches_quadrature(self):
        oracle = simpson(lambda y: 1.0 / y, 1.0, 2.0, n=1000)
        assert abs(oracle - 0.6931471805599453) < 1e-12
        assert abs(hyp_distance(I, Point(0, 2)) - oracle) < 1e-11

    def test_unit_offset(self):
        # |z - w| = 1 at heights 1, 1: cosh d = 1.5
        assert abs(hyp_distance(I, Point(1, 1)) - mpmath.acosh(1.5)) < 1e-15

    @given(finite_pts, finite_pts)
    def test_symmetry_and_positivity(self, p, q):
        d = hyp_distance(p, q)
        assert d >= 0
        assert abs(d - hyp_distance(q, p)) < 1e-15

    def test_isometry_invariance(self):
        rng = SplitMix64(11)
        for _ in range(100):
            g = random_isometry(rng)
            p = Point(rng.uniform(-2, 2), rng.log_uniform(0.3, 3))
            q = Point(rng.uniform(-2, 2), rng.log_uniform(0.3, 3))
            d = hyp_distance(p, q)
            moved = hyp_distance(g.apply_point(p), g.apply_point(q))
            assert abs(moved - d) <= 1e-9 * max(1, d)


class TestIsometry:
    def test_identity_action(self):
        assert apply_isometry(Isometry.identity(), I) == I

    def test_parabolic_fixes_infinity(self):
        assert apply_isometry(Isometry.translation(1), INFINITY).is_infinite

    def test_boundary_to_finite(self):
        m = Isometry(mpf(0.5), mpf(-1), mpf(1), mpf(0))
        assert apply_isometry(m, INFINITY).finite_value == mpf(0.5)

    def test_point_stays_in_upper_half_plane(self):
        rng = SplitMix64(3)
        for _ in range(50):
            g = random_isometry(rng)
            p = g.apply_point(Point(rng.uniform(-2, 2), rng.log_uniform(0.2, 4)))
            assert p.y > 0

    def test_normalization_and_projective_equality(self):
        g = Isometry(2, 0, 0, 2)
        assert g.projectively_equal(Isometry.identity())
        h = Isometry(-1, 0, 0, -1)
        assert h.projectively_equal(Isometry.identity())

    def test_nonpositive_determinant_rejected(self):
        with pytest.raises(ValueError):
            Isometry(1, 0, 0, -1)

    def test_classification(self):
        assert classify_isometry(Isometry.translation(1)) is IsometryClass.PARABOLIC
        assert classify_isometry(Isometry.dilation(2)) is IsometryClass.HYPERBOLIC
        assert classify_isometry(Isometry.identity()) is IsometryClass.IDENTITY
        assert (
            classify_isometry(Isometry.rotation_about_i(0.5))
            is IsometryClass.ELLIPTIC
        )

    def test_dilation_trace_value(self):
        g = Isometry.dilation(2)
        assert abs(abs(g.trace) - 3 / mpmath.sqrt(2)) < 1e-15

    def test_borderline_trace_flag(self):
        # trace 2 + 1e-10 at determinant exactly 1: within tolerance of
        # parabolic but not equal, so reported parabolic with low confidence
        near = Isometry(mpf(1) + mpf("1e-10"), mpf(1), mpf("1e-10"), mpf(1))
        kind, borderline = classify_isometry_detailed(near)
        assert kind is IsometryClass.PARABOLIC
        assert borderline
        exact = Isometry.translation(5)
        kind, borderline = classify_isometry_detailed(exact)
        assert kind is IsometryClass.PARABOLIC
        assert not borderline

    def test_inverse_composition(self):
        rng = SplitMix64(5)
        for _ in range(25):
            g = random_isometry(rng)
            assert (g @ g.inverse()).projectively_equal(Isometry.identity())


class TestBusemann:
    def test_limit_definition_at_infinity(self):
        # oracle: d(x, c(T)) - d(y, c(T)) along c(t) = i e^t
        far = Point(0, mpmath.exp(30))
        oracle = hyp_distance(Point(0, 2), far) - hyp_distance(I, far)
        value = busemann(INFINITY, Point(0, 2), I)
        assert abs(value - oracle) < 1e-9
        assert abs(value + mpmath.log(2)) < 1e-12

    def test_limit_definition_finite_center(self):
        xi = BoundaryPoint.finite(0.75)
        x, y = Point(-1, 0.5), Point(2, 1.75)
        u = UnitTangent(y, xi)
        far = vector_point(u, 30)
        oracle = hyp_distance(x, far) - hyp_distance(y, far)
        assert abs(busemann(xi, x, y) - oracle) < 1e-9

    def test_same_point_vanishes(self):
        assert busemann(BoundaryPoint.finite(0.3), I, I) == 0

    @given(boundaries, finite_pts, finite_pts, finite_pts)
    def test_cocycle(self, xi, x, y, z):
        total = busemann(xi, x, y) + busemann(xi, y, z)
        assert abs(busemann(xi, x, z) - total) < 1e-12

    @given(boundaries, finite_pts, finite_pts)
    def test_bounded_by_distance(self, xi, x, y):
        assert abs(busemann(xi, x, y)) <= hyp_distance(x, y) + 1e-12


class TestVectors:
    def test_backward_endpoints(self):
        assert backward_endpoint(UnitTangent(I, INFINITY)).value == 0
        assert backward_endpoint(UnitTangent(I, BoundaryPoint.finite(1))).value == -1
        assert backward_endpoint(
            UnitTangent(Point(0, 2), BoundaryPoint.finite(0))
        ).is_infinite

    def test_backward_differs_from_forward(self):
        rng = SplitMix64(9)
        for _ in range(50):
            u = UnitTangent(
                Point(rng.uniform(-2, 2), rng.log_uniform(0.3, 3)),
                BoundaryPoint.finite(rng.uniform(-3, 3)),
            )
            assert boundary_gap(backward_endpoint(u), u.forward) > 0

    def test_vertical_flow(self):
        u = UnitTangent(I, INFINITY)
        flowed = geodesic_flow(u, mpf(2))
        assert flowed.forward.is_infinite
        assert abs(flowed.base.y - mpmath.exp(2)) < 1e-15
        assert flowed.base.x == 0

    def test_zero_time_is_identity(self):
        u = UnitTangent(Point(0.3, 0.7), BoundaryPoint.finite(2))
        flowed = geodesic_flow(u, 0)
        assert hyp_distance(flowed.base, u.base) < 1e-14

    @given(
        finite_pts,
        boundaries,
        st.floats(min_value=-3, max_value=3),
        st.floats(min_value=-3, max_value=3),
    )
    def test_flow_composition(self, base, fwd, s, t):
        u = UnitTangent(base, fwd)
        once = geodesic_flow(u, mpf(s) + mpf(t))
        twice = geodesic_flow(geodesic_flow(u, t), s)
        assert d1(once, twice) < 1e-9

    def test_flow_moves_unit_speed(self):
        u = UnitTangent(Point(-0.4, 1.3), BoundaryPoint.finite(2.5))
        for t in (0.5, 1.5, 3.0):
            assert abs(hyp_distance(vector_point(u, t), u.base) - t) < 1e-12

    def test_flow_time_guard(self):
        with pytest.raises(ValueError):
            geodesic_flow(UnitTangent(I, INFINITY), mpf("2e6"))


class TestD1:
    def test_self_distance(self):
        u = UnitTangent(Point(0.2, 1.1), BoundaryPoint.finite(3))
        assert d1(u, u) == 0

    def test_reversed_vertical(self):
        u = UnitTangent(I, INFINITY)
        assert abs(d1(u, reverse(u)) - 2) < 1e-14

    @given(finite_pts, boundaries, finite_pts, boundaries)
    def test_symmetry(self, p, a, q, b):
        u, v = UnitTangent(p, a), UnitTangent(q, b)
        assert abs(d1(u, v) - d1(v, u)) < 1e-13

    def test_stable_vector_keeps_level(self):
        u = UnitTangent(Point(0.5, 2.0), BoundaryPoint.finite(-1))
        v = stable_vector(u, mpf("0.8"))
        assert v.forward == u.forward
        assert abs(busemann(u.forward, v.base, u.base)) < 1e-13


class TestWordBall:
    def test_translation_ball_count(self):
        ball = FuchsianWordBall([Isometry.translation(1)], 3)
        assert len(ball) == 7  # shifts by -3 .. 3, deduplicated
        assert any(len(ball.word(i)) == 0 for i in range(len(ball)))

    def test_duplicate_generators_collapse(self):
        g = Isometry.translation(1)
        minus_g = Isometry(mpf(-1), mpf(-1), mpf(0), mpf(-1))
        ball = FuchsianWordBall([g, minus_g], 2)
        assert len(ball) == 5  # same projective generator twice

    def test_closed_under_inverse(self):
        gens = [Isometry.translation(1), Isometry.dilation(2)]
        ball = FuchsianWordBall(gens, 2)
        elements = ball.elements
        for g in elements[: len(elements) : 7]:
            inv = g.inverse()
            assert any(inv.projectively_equal(h) for h in elements)

    def test_quotient_zero_on_same_vector(self):
        ball = FuchsianWordBall([Isometry.translation(1)], 2)
        u = UnitTangent(I, INFINITY)
        assert d1_quotient(u, u, ball) == 0

    def test_quotient_zero_on_translate(self):
        g = Isometry.translation(2)
        ball = FuchsianWordBall([Isometry.translation(1)], 2)
        u = UnitTangent(Point(0.3, 1.4), BoundaryPoint.finite(5))
        moved = g.apply_vector(u)
        assert d1_quotient(u, moved, ball) < 1e-12

    def test_quotient_monotone_in_word_length(self):
        gens = [Isometry.translation(1)]
        u = UnitTangent(I, INFINITY)
        v = Isometry.translation(3).apply_vector(
            UnitTangent(Point(0.1, 1.2), INFINITY)
        )
        values = [
            d1_quotient(u, v, FuchsianWordBall(gens, length))
            for length in (1, 2, 3)
        ]
        assert values[0] >= values[1] >= values[2]
        assert values[2] < 1e-9 + values[0]


class TestScalarValidation:
    def test_point_requires_positive_height(self):
        with pytest.raises(ValueError):
            Point(0, 0)
        with pytest.raises(ValueError):
            Point(0, -1)

    def test_nonfinite_coordinates_rejected(self):
        with pytest.raises(ValueError):
            Point(mpf("inf"), 1)
        with pytest.raises(ValueError):
            Point(mpf("nan"), 1)
        with pytest.raises(ValueError):
            BoundaryPoint.finite(mpf("inf"))
        with pytest.raises(ValueError):
            Isometry(mpf("nan"), 0, 0, 1)

    def test_fixed_precision_is_deterministic(self):
        def compute():
            with precision(80):
                return hyp_distance(Point(mpf(1) / 3, mpf(2) / 7), Point(0.25, 1.5))

        assert compute() == compute()

    def test_precision_changes_rounding(self):
        with precision(53):
            low = hyp_distance(Point(mpf(1) / 3, mpf(2) / 7), Point(0.25, 1.5))
        with precision(200):
            high = hyp_distance(Point(mpf(1) / 3, mpf(2) / 7), Point(0.25, 1.5))
        assert low != high
        assert abs(low - high) < 1e-15
