"""Horocycles, oriented pairs, tangency, winding, and the winding-time bounds.

A horocycle is stored as (center, level): the level s is the value with
H = {z : B_center(z, i) = -s}, so a horocycle centered at oo with level s
is the horizontal line at Euclidean height e^s, and one centered at a
finite xi has Euclidean diameter (xi^2 + 1) e^{-s}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import mpmath
from mpmath import mpf

from .numeric import SplitMix64, to_scalar
from .plane import (
    INFINITY,
    BoundaryPoint,
    Isometry,
    IsometryClass,
    Point,
    UnitTangent,
    backward_endpoint,
    base_origin,
    boundary_gap,
    busemann,
    classify_isometry,
    hyp_distance,
    standardizer,
    vector_points,
)

RESIDUAL_TOL = mpf("1e-9")


@dataclass(frozen=True)
class Horocycle:
    center: BoundaryPoint
    level: mpf

    def __post_init__(self):
        object.__setattr__(self, "level", to_scalar(self.level))
        if not mpmath.isfinite(self.level):
            raise ValueError("horocycle level must be finite")

    @classmethod
    def from_height(cls, height) -> "Horocycle":
        """Horocycle centered at oo at Euclidean height h."""
        h = to_scalar(height)
        if h <= 0:
            raise ValueError("height must be positive")
        return cls(INFINITY, mpmath.log(h))

    @classmethod
    def from_diameter(cls, center, diameter) -> "Horocycle":
        """Horocycle tangent to the real line at a finite center."""
        xi = to_scalar(center)
        d = to_scalar(diameter)
        if d <= 0:
            raise ValueError("diameter must be positive")
        return cls(BoundaryPoint(xi), mpmath.log((xi * xi + 1) / d))

    def euclidean(self):
        """('line', height) for center oo, else ('circle', tangent_x, diameter)."""
        if self.center.is_infinite:
            return ("line", mpmath.exp(self.level))
        xi = self.center.value
        return ("circle", xi, (xi * xi + 1) * mpmath.exp(-self.level))

    def point_on(self) -> Point:
        """A representative point: (0, h) on a line, the circle's top otherwise."""
        if self.center.is_infinite:
            return Point(mpf(0), mpmath.exp(self.level))
        kind, xi, diam = self.euclidean()
        return Point(xi, diam)

    def busemann_residual(self, p: Point) -> mpf:
        """B_center(p, i) + level; zero exactly when p lies on the horocycle."""
        return busemann(self.center, p, base_origin()) + self.level

    def apply(self, g: Isometry) -> "Horocycle":
        center = g.apply_boundary(self.center)
        rep = g.apply_point(self.point_on())
        return Horocycle(center, -busemann(center, rep, base_origin()))


@dataclass(frozen=True)
class OrientedPair:
    """A horocycle together with a parabolic isometry preserving it."""

    horocycle: Horocycle
    parabolic: Isometry

    def __post_init__(self):
        kind = classify_isometry(self.parabolic)
        if kind is not IsometryClass.PARABOLIC:
            raise ValueError(f"expected a parabolic isometry, got {kind.value}")
        fp = self.parabolic.fixed_boundary_point()
        gap = boundary_gap(fp, self.horocycle.center)
        if not (gap <= RESIDUAL_TOL * (1 + _chart_scale(self.horocycle.center))):
            raise ValueError(
                f"parabolic fixed point {fp!r} does not match the center "
                f"{self.horocycle.center!r}"
            )
        moved = self.parabolic.apply_point(self.horocycle.point_on())
        res = abs(self.horocycle.busemann_residual(moved))
        if not (res <= RESIDUAL_TOL):
            raise ValueError(f"parabolic does not preserve the horocycle: {res}")

    def apply(self, g: Isometry) -> "OrientedPair":
        return OrientedPair(
            self.horocycle.apply(g), (g @ self.parabolic) @ g.inverse()
        )


def _chart_scale(b: BoundaryPoint) -> mpf:
    return mpf(0) if b.is_infinite else abs(b.value)


@dataclass(frozen=True)
class TangencyData:
    """A vector tangent to an oriented pair, with the tangency point and time."""

    vector: UnitTangent
    pair: OrientedPair
    tangent_time: mpf
    tangent_point: Point

    def __post_init__(self):
        object.__setattr__(self, "tangent_time", to_scalar(self.tangent_time))
        if self.tangent_time < -RESIDUAL_TOL:
            raise ValueError(
                f"tangency lies at negative time {self.tangent_time}; the forward "
                "ray does not meet the horocycle"
            )
        res = abs(self.pair.horocycle.busemann_residual(self.tangent_point))
        if not (res <= RESIDUAL_TOL):
            raise ValueError(f"tangent point is off the horocycle by {res}")
        on_ray = vector_points(self.vector, [self.tangent_time])[0]
        gap = hyp_distance(on_ray, self.tangent_point)
        if not (gap <= RESIDUAL_TOL):
            raise ValueError(f"tangent point is off the ray by {gap}")

    def apply(self, g: Isometry) -> "TangencyData":
        return TangencyData(
            g.apply_vector(self.vector),
            self.pair.apply(g),
            self.tangent_time,
            g.apply_point(self.tangent_point),
        )


def _center_to_infinity(center: BoundaryPoint) -> Isometry:
    """An isometry sending the given boundary point to oo."""
    if center.is_infinite:
        return Isometry.identity()
    # inverse of [[xi, -1], [1, 0]], which maps oo to xi
    return Isometry(mpf(0), mpf(1), mpf(-1), center.value)


def translation_length(pair: OrientedPair) -> mpf:
    """Length of the horocyclic arc from x to p(x), independent of x.

    Conjugate the center to oo: the horocycle becomes the line at height
    h and the parabolic a translation by lam, so the arc length is
    |lam| / h.
    """
    w = _center_to_infinity(pair.horocycle.center)
    p_hat = (w @ pair.parabolic) @ w.inverse()
    if abs(p_hat.c) > RESIDUAL_TOL:
        raise ValueError("conjugated parabolic is not a translation")
    lam = p_hat.a * p_hat.b
    h = w.apply_point(pair.horocycle.point_on()).y
    return abs(lam) / h


def tangent_horocycle(u: UnitTangent, xi: BoundaryPoint) -> Horocycle:
    """The unique horocycle centered at xi tangent to the geodesic of u."""
    return _tangent_data(u, xi)[0]


def _tangent_data(u: UnitTangent, xi: BoundaryPoint):
    """(horocycle, tangency time, tangency point) for the geodesic of u and xi.

    Standardize u to (i, oo); xi lands at a finite x0 != 0, and the
    horocycle tangent to the imaginary axis centered at x0 touches it at
    height |x0|, i.e. at time log|x0| along u.
    """
    t = standardizer(u)
    x_hat = t.apply_boundary(xi)
    if x_hat.is_infinite or x_hat.value == 0:
        raise ValueError("center coincides with an endpoint of the geodesic")
    inv = t.inverse()
    contact = inv.apply_point(Point(mpf(0), abs(x_hat.value)))
    level = -busemann(xi, contact, base_origin())
    return Horocycle(xi, level), mpmath.log(abs(x_hat.value)), contact


def make_parabolic(
    fixed_point: BoundaryPoint,
    horocycle: Horocycle,
    length,
    orientation_positive_for: UnitTangent,
) -> Isometry:
    """Parabolic fixing the center, preserving the horocycle, with the given
    translation length, signed so the vector is tangent to the oriented pair.

    The sign comes from the conjugated picture: with the center at oo the
    horocycle is horizontal and the vector's geodesic is a half-circle
    with its apex on it; the positive orientation moves the apex in the
    direction of travel, which is the sign of (forward - backward) there.
    """
    ell = to_scalar(length)
    if ell <= 0:
        raise ValueError("translation length must be positive")
    gap = boundary_gap(fixed_point, horocycle.center)
    if not (gap <= RESIDUAL_TOL * (1 + _chart_scale(horocycle.center))):
        raise ValueError("fixed point does not match the horocycle center")
    w = _center_to_infinity(horocycle.center)
    h = w.apply_point(horocycle.point_on()).y
    v_hat = w.apply_vector(orientation_positive_for)
    fwd = v_hat.forward
    bwd = backward_endpoint(v_hat)
    if fwd.is_infinite or bwd.is_infinite:
        raise ValueError("vector geodesic is not tangent to the horocycle")
    apex = abs(fwd.value - bwd.value) / 2
    if not (abs(apex - h) <= RESIDUAL_TOL * (1 + h)):
        raise ValueError(
            f"vector geodesic (apex height {apex}) is not tangent to the "
            f"horocycle (height {h})"
        )
    lam = ell * h if fwd.value > bwd.value else -ell * h
    return (w.inverse() @ Isometry.translation(lam)) @ w


def tangency(u: UnitTangent, pair: OrientedPair) -> TangencyData:
    """Tangency data for a vector tangent to the oriented pair.

    Rejects vectors whose geodesic meets the horocycle transversally or
    not at all, and vectors tangent only to the reversed orientation.
    """
    horo, t0, contact = _tangent_data(u, pair.horocycle.center)
    if not (abs(horo.level - pair.horocycle.level) <= RESIDUAL_TOL):
        raise ValueError(
            "vector geodesic is not tangent to this horocycle "
            f"(tangent level {horo.level}, horocycle level {pair.horocycle.level})"
        )
    oriented = make_parabolic(
        pair.horocycle.center, pair.horocycle, translation_length(pair), u
    )
    if not oriented.projectively_equal(pair.parabolic, RESIDUAL_TOL):
        raise ValueError("vector is tangent to the reversed orientation")
    return TangencyData(u, pair, t0, contact)


def make_oriented_tangency(u: UnitTangent, xi: BoundaryPoint, length) -> TangencyData:
    """Build the tangent horocycle at xi and the positively oriented pair for u."""
    horo, t0, contact = _tangent_data(u, xi)
    p = make_parabolic(xi, horo, length, u)
    return TangencyData(u, OrientedPair(horo, p), t0, contact)


def wind(td: TangencyData) -> UnitTangent:
    """Same basepoint, forward endpoint pushed by the parabolic."""
    return UnitTangent(
        td.vector.base, td.pair.parabolic.apply_boundary(td.vector.forward)
    )


def winding_time(td: TangencyData) -> mpf:
    """tau = B_{u(+oo)}(p^{-1} u(0), u(0)); |tau| never exceeds the
    translation length, which is verified before returning."""
    u0 = td.vector.base
    moved = td.pair.parabolic.inverse().apply_point(u0)
    tau = busemann(td.vector.forward, moved, u0)
    ell = translation_length(td.pair)
    if abs(tau) > ell + RESIDUAL_TOL * (1 + ell):
        raise ArithmeticError(
            f"winding time {tau} exceeds the translation length {ell}"
        )
    return tau


@dataclass(frozen=True)
class StandardTangency:
    """Tangency data conjugated to: horocycle centered at oo, base at i,
    parabolic z -> z + lam with lam > 0 (reflecting if needed)."""

    ell: mpf
    lam: mpf
    x_forward: mpf  # forward endpoint, equals e^{t1}
    t1: mpf  # tangency time along u
    radius_u: mpf  # apex height of u's half-circle
    center_u: mpf
    radius_v: mpf  # apex height of the wound vector's half-circle
    center_v: mpf
    t1_prime: mpf
    contact_distance: mpf  # d(q, q') between the two tangency points
    tau: mpf
    reflected: bool

    @property
    def u_std(self) -> UnitTangent:
        return UnitTangent(base_origin(), BoundaryPoint(self.x_forward))

    @property
    def v_std(self) -> UnitTangent:
        return UnitTangent(base_origin(), BoundaryPoint(self.x_forward + self.lam))

    @property
    def p_std(self) -> Isometry:
        return Isometry.translation(self.lam)


def standardize_tangency(td: TangencyData) -> StandardTangency:
    w = _center_to_infinity(td.pair.horocycle.center)
    z = w.apply_point(td.vector.base)
    s = Isometry(mpf(1), -z.x, mpf(0), z.y) @ w
    p_hat = (s @ td.pair.parabolic) @ s.inverse()
    if abs(p_hat.c) > RESIDUAL_TOL:
        raise ValueError("conjugated parabolic is not a translation")
    lam = p_hat.a * p_hat.b
    fwd = s.apply_boundary(td.vector.forward)
    if fwd.is_infinite:
        raise ValueError("vector points at the horocycle center")
    xf = fwd.value
    reflected = lam < 0
    if reflected:
        lam, xf = -lam, -xf
    if not (xf > 0):
        raise ValueError("standardized forward endpoint must be positive")

    r_u = (xf * xf + 1) / (2 * xf)
    c_u = (xf * xf - 1) / (2 * xf)
    xf_v = xf + lam
    r_v = (xf_v * xf_v + 1) / (2 * xf_v)
    c_v = (xf_v * xf_v - 1) / (2 * xf_v)
    dqq = hyp_distance(Point(c_u, r_u), Point(c_v, r_v))
    ell = lam / r_u

    u0 = base_origin()
    tau = busemann(
        BoundaryPoint(xf), Isometry.translation(-lam).apply_point(u0), u0
    )
    return StandardTangency(
        ell=ell,
        lam=lam,
        x_forward=xf,
        t1=mpmath.log(xf),
        radius_u=r_u,
        center_u=c_u,
        radius_v=r_v,
        center_v=c_v,
        t1_prime=mpmath.log(xf_v),
        contact_distance=dqq,
        tau=tau,
        reflected=reflected,
    )


@dataclass(frozen=True)
class CaseRecord:
    """Worst observed value of one branch of the winding estimate on its t-range."""

    bound: mpf
    observed: mpf | None
    count: int

    @property
    def margin(self) -> mpf | None:
        return None if self.observed is None else self.bound - self.observed

    @property
    def passed(self) -> bool:
        return self.observed is None or self.observed <= self.bound + RESIDUAL_TOL


@dataclass(frozen=True)
class KeyPropReport:
    """Grid verification of the 12*ell winding bound and its per-case pieces.

    values[k] is min(d1(g_{t+tau} v, g_t u), d1(g_{t+tau} v, p g_t u)) at
    grid[k]; branch[k] records which argument achieved it (0: identity,
    1: the parabolic), which is what exhibits the handoff near t1.
    Case bounds (6, 8, 10 times ell, against the pair's translation
    length) apply to the unshifted d1 on t <= t1 - 1, t >= t1, and the
    unit gap between them.
    """

    ell: mpf
    tau: mpf
    t1: mpf
    lam: mpf
    grid: tuple
    values: tuple
    branch: tuple
    max_value: mpf
    bound: mpf
    case_a: CaseRecord
    case_b: CaseRecord
    case_c: CaseRecord
    est_radius_growth: mpf  # 2 e^{b'} - 2 e^{b}, in [0, lam)
    est_center_shift: mpf  # q1' - q1, in [0, lam)
    est_contact_distance: mpf  # d(q, q') <= 1.5 ell

    @property
    def margin(self) -> mpf:
        return self.bound - self.max_value

    @property
    def estimates_ok(self) -> bool:
        lam_hi = self.lam + RESIDUAL_TOL * (1 + self.lam)
        return (
            -RESIDUAL_TOL <= self.est_radius_growth < lam_hi
            and -RESIDUAL_TOL <= self.est_center_shift < lam_hi
            and self.est_contact_distance
            <= mpf(3) / 2 * self.ell + RESIDUAL_TOL * (1 + self.ell)
        )

    @property
    def passed(self) -> bool:
        return (
            self.max_value <= self.bound + RESIDUAL_TOL
            and self.case_a.passed
            and self.case_b.passed
            and self.case_c.passed
            and self.estimates_ok
        )


def key_proposition_check(td: TangencyData, t_grid: Sequence) -> KeyPropReport:
    """Evaluate the winding proximity bound on a grid of nonnegative times."""
    st = standardize_tangency(td)
    grid = [to_scalar(t) for t in t_grid]
    if any(t < 0 for t in grid):
        raise ValueError("grid times must be nonnegative")

    u, v, p = st.u_std, st.v_std, st.p_std
    tau, ell, lam, t1 = st.tau, st.ell, st.lam, st.t1

    u_pts = vector_points(u, [s for t in grid for s in (t, t + 1)])
    v_shift = vector_points(v, [s for t in grid for s in (t + tau, t + tau + 1)])
    v_pts = vector_points(v, [s for t in grid for s in (t, t + 1)])

    values = []
    branch = []
    case_obs = {"a": [], "b": [], "c": []}
    for k, t in enumerate(grid):
        u0, u1 = u_pts[2 * k], u_pts[2 * k + 1]
        pu0, pu1 = p.apply_point(u0), p.apply_point(u1)
        vs0, vs1 = v_shift[2 * k], v_shift[2 * k + 1]
        d_id = hyp_distance(vs0, u0) + hyp_distance(vs1, u1)
        d_p = hyp_distance(vs0, pu0) + hyp_distance(vs1, pu1)
        if d_id <= d_p:
            values.append(d_id)
            branch.append(0)
        else:
            values.append(d_p)
            branch.append(1)
        v0, v1 = v_pts[2 * k], v_pts[2 * k + 1]
        if t <= t1 - 1:
            case_obs["a"].append(hyp_distance(v0, u0) + hyp_distance(v1, u1))
        elif t >= t1:
            case_obs["b"].append(hyp_distance(v0, pu0) + hyp_distance(v1, pu1))
        else:
            case_obs["c"].append(hyp_distance(v0, u0) + hyp_distance(v1, u1))

    def record(key: str, factor: int) -> CaseRecord:
        obs = case_obs[key]
        return CaseRecord(
            bound=factor * ell,
            observed=max(obs) if obs else None,
            count=len(obs),
        )

    return KeyPropReport(
        ell=ell,
        tau=tau,
        t1=t1,
        lam=lam,
        grid=tuple(grid),
        values=tuple(values),
        branch=tuple(branch),
        max_value=max(values),
        bound=12 * ell,
        case_a=record("a", 6),
        case_b=record("b", 8),
        case_c=record("c", 10),
        est_radius_growth=2 * (st.radius_v - st.radius_u),
        est_center_shift=st.center_v - st.center_u,
        est_contact_distance=st.contact_distance,
    )


def random_isometry(rng: SplitMix64, spread: float = 2.0) -> Isometry:
    """Random element: translation, dilation, and rotation about i composed."""
    shift = Isometry.translation(rng.uniform(-spread, spread))
    stretch = Isometry.dilation(rng.log_uniform(0.3, 3.0))
    turn = Isometry.rotation_about_i(rng.uniform(0.0, 3.141592653589793))
    return (shift @ stretch) @ turn


def random_tangency(
    rng: SplitMix64,
    max_tangency_time: float = 2.5,
    ell_range: tuple[float, float] = (1e-3, 0.4),
    move: bool = True,
) -> TangencyData:
    """Seeded random tangency configuration, both orientations, general position.

    Configurations are drawn in the standardized picture, where a
    tangency time t1 >= 0 fixes the geodesic through i with forward
    endpoint e^{t1} tangent to the height cosh(t1) horocycle, then
    mirrored with probability 1/2 and pushed by a random isometry.
    """
    t1 = rng.uniform(0.0, max_tangency_time)
    ell = rng.log_uniform(*ell_range)
    c, s = mpmath.cosh(to_scalar(t1)), mpmath.sinh(to_scalar(t1))
    mirror = rng.coin()
    xf = -mpmath.exp(to_scalar(t1)) if mirror else mpmath.exp(to_scalar(t1))
    lam = -to_scalar(ell) * c if mirror else to_scalar(ell) * c
    td = TangencyData(
        UnitTangent(base_origin(), BoundaryPoint(xf)),
        OrientedPair(Horocycle(INFINITY, mpmath.log(c)), Isometry.translation(lam)),
        to_scalar(t1),
        Point(-s if mirror else s, c),
    )
    if move:
        td = td.apply(random_isometry(rng))
    return td
