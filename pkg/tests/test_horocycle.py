import mpmath
import pytest
from mpmath import mpf

from horoflow import (
    INFINITY,
    BoundaryPoint,
    Horocycle,
    Isometry,
    OrientedPair,
    Point,
    SplitMix64,
    TangencyData,
    UnitTangent,
    hyp_distance,
    key_proposition_check,
    make_oriented_tangency,
    make_parabolic,
    random_isometry,
    random_tangency,
    reverse,
    standardize_tangency,
    tangency,
    tangent_horocycle,
    translation_length,
    vector_point,
    wind,
    winding_time,
)

I = Point(0, 1)
UP = UnitTangent(I, INFINITY)


class TestHorocycle:
    def test_euclidean_round_trip_line(self):
        h = Horocycle.from_height(2.5)
        kind, height = h.euclidean()
        assert kind == "line"
        assert abs(height - 2.5) < 1e-12

    def test_euclidean_round_trip_circle(self):
        h = Horocycle.from_diameter(1.5, 0.8)
        kind, of, diam = h.euclidean()
        assert kind == "circle"
        assert of == mpf(1.5)
        assert abs(diam - 0.8) < 1e-9 * 0.8

    def test_level_convention_at_infinity(self):
        # level s means Euclidean height e^s
        h = Horocycle(INFINITY, mpf(1))
        assert abs(h.euclidean()[1] - mpmath.e) < 1e-12
        assert abs(h.busemann_residual(Point(3, mpmath.e))) < 1e-12

    def test_residual_vanishes_on_circle(self):
        h = Horocycle.from_diameter(-0.5, 1.2)
        # the top of the circle lies on it
        assert abs(h.busemann_residual(Point(-0.5, 1.2))) < 1e-12

    def test_apply_isometry(self):
        rng = SplitMix64(21)
        h = Horocycle.from_diameter(0.5, 1.0)
        for _ in range(20):
            g = random_isometry(rng)
            moved = h.apply(g)
            pt = g.apply_point(h.point_on())
            assert abs(moved.busemann_residual(pt)) < 1e-9


class TestOrientedPair:
    def test_rejects_non_parabolic(self):
        with pytest.raises(ValueError):
            OrientedPair(Horocycle.from_height(1), Isometry.dilation(2))

    def test_rejects_center_mismatch(self):
        with pytest.raises(ValueError):
            OrientedPair(Horocycle.from_diameter(2, 1), Isometry.translation(1))

    def test_valid_pair(self):
        pair = OrientedPair(Horocycle.from_height(1), Isometry.translation(1))
        assert translation_length(pair) == 1


class TestTranslationLength:
    def test_height_scaling(self):
        assert (
            translation_length(
                OrientedPair(Horocycle.from_height(1), Isometry.translation(1))
            )
            == 1
        )
        assert (
            translation_length(
                OrientedPair(Horocycle.from_height(2), Isometry.translation(1))
            )
            == mpf(0.5)
        )

    def test_isometry_invariance(self):
        rng = SplitMix64(33)
        pair = OrientedPair(Horocycle.from_height(1.3), Isometry.translation(0.7))
        ell = translation_length(pair)
        for _ in range(30):
            moved = pair.apply(random_isometry(rng))
            assert abs(translation_length(moved) - ell) < 1e-9 * ell


class TestTangentHorocycle:
    def test_unit_tangent_circle(self):
        h = tangent_horocycle(UP, BoundaryPoint.finite(1))
        kind, of, diam = h.euclidean()
        assert kind == "circle"
        assert of == 1
        assert abs(diam - 2) < 1e-12

    def test_tangency_at_exponential_height(self):
        h = tangent_horocycle(UP, BoundaryPoint.finite(mpmath.e))
        # touches the axis at u(1), i.e. at Euclidean height e
        assert abs(h.busemann_residual(Point(0, mpmath.e))) < 1e-12

    def test_rejects_geodesic_endpoints(self):
        with pytest.raises(ValueError):
            tangent_horocycle(UP, INFINITY)
        with pytest.raises(ValueError):
            tangent_horocycle(UP, BoundaryPoint.finite(0))

    def test_equivariance(self):
        rng = SplitMix64(8)
        xi = BoundaryPoint.finite(0.7)
        h = tangent_horocycle(UP, xi)
        for _ in range(20):
            g = random_isometry(rng)
            direct = tangent_horocycle(g.apply_vector(UP), g.apply_boundary(xi))
            moved = h.apply(g)
            assert abs(direct.level - moved.level) < 1e-9
            assert abs(direct.center.value - moved.center.value) < 1e-9 * (
                1 + abs(moved.center.value)
            )


class TestMakeParabolic:
    def test_horizontal_case(self):
        rightward = UnitTangent(I, BoundaryPoint.finite(1))
        p = make_parabolic(INFINITY, Horocycle.from_height(1), 1, rightward)
        assert p.projectively_equal(Isometry.translation(1))

    def test_conjugated_case(self):
        # horocycle of diameter 1 at 0 is internally tangent to the unit
        # circle geodesic from 1 to -1 at the point i
        horo = Horocycle.from_diameter(0, 1)
        vec = UnitTangent(I, BoundaryPoint.finite(-1))
        p = make_parabolic(BoundaryPoint.finite(0), horo, mpf("0.3"), vec)
        pair = OrientedPair(horo, p)
        assert abs(translation_length(pair) - mpf("0.3")) < 1e-9
        conj = Isometry(mpf(0), mpf(-1), mpf(1), mpf(0))
        back = (conj.inverse() @ p) @ conj
        assert abs(back.c) < 1e-12  # conjugate of a horizontal translation

    def test_orientation_flip_gives_inverse(self):
        rightward = UnitTangent(I, BoundaryPoint.finite(1))
        p = make_parabolic(INFINITY, Horocycle.from_height(1), 1, rightward)
        q = make_parabolic(INFINITY, Horocycle.from_height(1), 1, reverse(rightward))
        assert q.projectively_equal(p.inverse())

    def test_rejects_non_tangent_vector(self):
        with pytest.raises(ValueError):
            make_parabolic(INFINITY, Horocycle.from_height(5), 1, UP)


class TestWinding:
    def test_wind_moves_endpoint_by_parabolic(self):
        td = make_oriented_tangency(UP, BoundaryPoint.finite(1), mpf("0.05"))
        w = wind(td)
        assert w.base is td.vector.base
        expected = td.pair.parabolic.apply_boundary(INFINITY)
        assert w.forward.finite_value == expected.finite_value

    def test_wind_round_trip(self):
        td = make_oriented_tangency(UP, BoundaryPoint.finite(1), mpf("0.05"))
        w = wind(td)
        back = td.pair.parabolic.inverse().apply_boundary(w.forward)
        assert back.is_infinite

    def test_winding_time_against_limit_definition(self):
        u = UnitTangent(I, BoundaryPoint.finite(2))
        td = make_oriented_tangency(u, BoundaryPoint.finite(0.5), mpf("0.2"))
        tau = winding_time(td)
        far = vector_point(u, 30)
        moved = td.pair.parabolic.inverse().apply_point(u.base)
        oracle = hyp_distance(moved, far) - hyp_distance(u.base, far)
        assert abs(tau - oracle) < 1e-9

    def test_winding_time_bound_randomized(self):
        rng = SplitMix64(77)
        for _ in range(300):
            td = random_tangency(rng)
            tau = winding_time(td)
            assert abs(tau) <= translation_length(td.pair) + 1e-9

    def test_winding_time_vanishes_with_length(self):
        taus = []
        for ell in (mpf("1e-2"), mpf("1e-4"), mpf("1e-6")):
            td = make_oriented_tangency(UP, BoundaryPoint.finite(2), ell)
            taus.append(abs(winding_time(td)))
        assert taus[0] < 1e-2 and taus[1] < 1e-4 and taus[2] < 1e-6


class TestTangencyData:
    def test_builder_accepts_tangent_pair(self):
        td0 = make_oriented_tangency(UP, BoundaryPoint.finite(2), mpf("0.1"))
        td = tangency(UP, td0.pair)
        assert abs(td.tangent_time - mpmath.log(2)) < 1e-12

    def test_builder_rejects_wrong_level(self):
        # the diameter-1 horocycle at 2 is tangent to the geodesic through
        # (2, 1) toward 1, but the vertical at i touches the diameter-4 one
        horo = Horocycle.from_diameter(2, 1)
        tangent_vec = UnitTangent(Point(2, 1), BoundaryPoint.finite(1))
        pair = OrientedPair(
            horo,
            make_parabolic(BoundaryPoint.finite(2), horo, mpf("0.1"), tangent_vec),
        )
        with pytest.raises(ValueError):
            tangency(UP, pair)

    def test_builder_rejects_reversed_orientation(self):
        td0 = make_oriented_tangency(UP, BoundaryPoint.finite(2), mpf("0.1"))
        flipped = OrientedPair(td0.pair.horocycle, td0.pair.parabolic.inverse())
        with pytest.raises(ValueError):
            tangency(UP, flipped)

    def test_negative_time_tangency_rejected(self):
        # the tangency of the vertical through 4i with the circle at -2
        # happens at height 2, behind the upward ray
        up_high = UnitTangent(Point(0, 4), INFINITY)
        with pytest.raises(ValueError):
            make_oriented_tangency(up_high, BoundaryPoint.finite(-2), mpf("0.1"))

    def test_random_tangency_is_valid(self):
        rng = SplitMix64(13)
        for _ in range(50):
            td = random_tangency(rng)
            assert isinstance(td, TangencyData)
            assert td.tangent_time >= -1e-9


class TestKeyProposition:
    def test_standardization_quantities(self):
        td = make_oriented_tangency(UP, BoundaryPoint.finite(2), mpf("0.1"))
        st = standardize_tangency(td)
        # forward endpoint e^{t1} and apex height cosh(t1) with t1 = log 2
        assert abs(st.x_forward - 2) < 1e-12
        assert abs(st.t1 - mpmath.log(2)) < 1e-12
        assert abs(st.radius_u - mpf(5) / 4) < 1e-12
        assert abs(st.ell - mpf("0.1")) < 1e-12

    def test_bound_holds_on_random_configurations(self):
        rng = SplitMix64(99)
        grid = [mpf(20) * k / 80 for k in range(81)]
        for _ in range(20):
            rep = key_proposition_check(random_tangency(rng), grid)
            assert rep.passed
            assert rep.max_value <= rep.bound + 1e-9

    def test_proximity_scales_with_length(self):
        grid = [mpf(10) * k / 50 for k in range(51)]
        maxima = []
        for ell in (mpf("0.1"), mpf("0.01"), mpf("0.001")):
            td = make_oriented_tangency(UP, BoundaryPoint.finite(3), ell)
            rep = key_proposition_check(td, grid)
            maxima.append(rep.max_value)
        assert maxima[1] < maxima[0] / 5
        assert maxima[2] < maxima[1] / 5

    def test_branch_handoff_near_tangency_time(self):
        td = make_oriented_tangency(UP, BoundaryPoint.finite(4), mpf("0.05"))
        grid = [mpf(6) * k / 120 for k in range(121)]
        rep = key_proposition_check(td, grid)
        switches = [
            (a, b) for a, b in zip(rep.branch, rep.branch[1:]) if a != b
        ]
        assert switches, "expected the minimizing branch to hand off"
        assert rep.branch[0] == 0 and rep.branch[-1] == 1

    def test_rejects_negative_grid(self):
        td = make_oriented_tangency(UP, BoundaryPoint.finite(2), mpf("0.1"))
        with pytest.raises(ValueError):
            key_proposition_check(td, [-1, 0, 1])
