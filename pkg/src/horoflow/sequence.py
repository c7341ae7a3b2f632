"""Synthetic tangent-pair sequences and the iterated winding construction.

Everything is built in the normalized position: the reference vector is
(i, oo), the n-th horocycle is the Euclidean circle of center
(x_n, x_n) and radius x_n with x_n = e^{t_n}, tangent to the imaginary
axis at height x_n, and the n-th parabolic fixes x_n with translation
length ell_n = margin * eps / (12 * 4^n).  Each winding step pushes the
forward endpoint by the next parabolic through the product
beta_n = alpha_0 ... alpha_n while the basepoint stays at i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
from mpmath import mpf

from .numeric import det_tolerance, to_scalar
from .plane import (
    INFINITY,
    BoundaryPoint,
    FuchsianWordBall,
    Isometry,
    Point,
    UnitTangent,
    base_origin,
    compose_with_drift,
    d1_quotient,
    geodesic_flow,
    hyp_distance,
    vector_points,
)
from .horocycle import (
    OrientedPair,
    TangencyData,
    _tangent_data,
    make_oriented_tangency,
    tangency,
    translation_length,
    wind,
    winding_time,
)

# disjointness threshold for consecutive tangent horoballs: x_{n+1}/x_n > 3 + 2*sqrt(2)
MIN_SPACING = math.log(3 + 2 * math.sqrt(2))


class PrecisionExhausted(RuntimeError):
    """Raised when the construction degrades numerically before reaching
    the requested depth; carries the last depth that was completed."""

    def __init__(self, message: str, depth_reached: int):
        super().__init__(f"{message} (depth reached: {depth_reached})")
        self.depth_reached = depth_reached


@dataclass(frozen=True)
class PairSequenceSpec:
    """Parameters of a synthetic pair sequence.

    depth is the largest pair index: a spec of depth N produces the
    pairs 0..N.  Lengths follow ell_n = margin_factor * epsilon /
    (12 * 4^n), so margin_factor < 1 keeps the summability condition
    strict, and spacing must exceed log(3 + 2*sqrt(2)) for the
    horoballs to stay pairwise disjoint.
    """

    epsilon: mpf
    depth: int
    spacing: mpf
    margin_factor: mpf
    t0: mpf = field(default_factory=lambda: mpf(0))

    def __post_init__(self):
        object.__setattr__(self, "epsilon", to_scalar(self.epsilon))
        object.__setattr__(self, "spacing", to_scalar(self.spacing))
        object.__setattr__(self, "margin_factor", to_scalar(self.margin_factor))
        object.__setattr__(self, "t0", to_scalar(self.t0))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if int(self.depth) != self.depth or self.depth < 0:
            raise ValueError("depth must be a nonnegative integer")
        object.__setattr__(self, "depth", int(self.depth))
        if not (self.spacing > MIN_SPACING):
            raise ValueError(
                f"spacing {self.spacing} too small: consecutive horoballs overlap "
                f"(needs > log(3 + 2*sqrt(2)) = {MIN_SPACING:.10f})"
            )
        if not (0 < self.margin_factor < 1):
            raise ValueError("margin_factor must lie strictly between 0 and 1")
        if self.t0 < 0:
            raise ValueError("t0 must be nonnegative")

    def length(self, n: int) -> mpf:
        return self.margin_factor * self.epsilon / (12 * mpf(4) ** n)

    def time(self, n: int) -> mpf:
        return self.t0 + n * self.spacing

    def fixed_point(self, n: int) -> mpf:
        return mpmath.exp(self.time(n))

    @property
    def length_sum_bound(self) -> mpf:
        """Full series of lengths: margin * epsilon / 9."""
        return self.margin_factor * self.epsilon / 9


@dataclass(frozen=True)
class PairSequence:
    """The normalized reference vector with its sequence of oriented pairs."""

    spec: PairSequenceSpec
    base: UnitTangent
    pairs: tuple[OrientedPair, ...]
    tangencies: tuple[TangencyData, ...]
    times: tuple[mpf, ...]
    fixed_points: tuple[mpf, ...]
    lengths: tuple[mpf, ...]


def build_pair_sequence(spec: PairSequenceSpec) -> PairSequence:
    """Construct the pairs 0..depth tangent to the vertical vector at i."""
    base = UnitTangent(base_origin(), INFINITY)
    tds = []
    for n in range(spec.depth + 1):
        xn = spec.fixed_point(n)
        tds.append(make_oriented_tangency(base, BoundaryPoint(xn), spec.length(n)))
    fixed = tuple(spec.fixed_point(n) for n in range(spec.depth + 1))
    for a, b in zip(fixed, fixed[1:]):
        # circles centered (a, a) and (b, b) with radii a and b
        if not (2 * (b - a) ** 2 > (a + b) ** 2):
            raise ValueError("spacing too small: horoballs overlap")
    return PairSequence(
        spec=spec,
        base=base,
        pairs=tuple(td.pair for td in tds),
        tangencies=tuple(tds),
        times=tuple(td.tangent_time for td in tds),
        fixed_points=fixed,
        lengths=tuple(spec.length(n) for n in range(spec.depth + 1)),
    )


@dataclass(frozen=True)
class WindingSequence:
    """State of the iterated winding up to the spec's depth N.

    vectors[n] is based at i and points at products[n](oo); times[n] is
    the height cocycle B_oo(products[n]^{-1} i, i).  limit_forward and
    limit_time are the depth-N surrogates of the limiting endpoint and
    time, and w_alpha flows (i, limit_forward) by limit_time.  The true
    limiting endpoint of any infinite continuation of this sequence lies
    strictly inside (xi_lower, xi_upper).
    """

    spec: PairSequenceSpec
    pair_sequence: PairSequence
    letters: tuple[Isometry, ...]
    products: tuple[Isometry, ...]
    vectors: tuple[UnitTangent, ...]
    times: tuple[mpf, ...]
    winding_times: tuple[mpf, ...]
    shrunk_lengths: tuple[mpf, ...]
    limit_forward: BoundaryPoint
    limit_time: mpf
    w_alpha: UnitTangent
    xi_lower: mpf
    xi_upper: mpf
    region_margins: tuple[mpf, ...]
    max_det_drift: mpf
    max_step_residual: mpf

    @property
    def depth(self) -> int:
        return self.spec.depth


def _inverse_base_image(beta: Isometry) -> Point:
    return beta.inverse().apply_point(base_origin())


def iterate_winding(ps: PairSequence) -> WindingSequence:
    """Run the winding recursion along the pair sequence.

    Step n takes the vertical vector w_n = beta_n^{-1} v_n, finds the
    shrunk horocycle tangent to its ray at the next fixed point, winds,
    and pushes forward; v_{n+1} = (i, beta_{n+1}(oo)) is kept in exact
    normalized form and the defining relation is verified as a residual.
    Degraded arithmetic (determinant drift, or the vertical ray missing
    the next horoball picture) raises PrecisionExhausted.
    """
    spec = ps.spec
    det_tol = det_tolerance()
    origin = base_origin()

    letters = [td.pair.parabolic for td in ps.tangencies]
    beta = letters[0]
    products = [beta]
    tau0 = winding_time(ps.tangencies[0])
    vectors = [wind(ps.tangencies[0])]
    winding_times = [tau0]
    z = _inverse_base_image(beta)
    times = [-mpmath.log(z.y)]
    shrunk = []
    region_margins = []
    max_drift = mpf(0)
    max_residual = abs(times[0] - tau0)

    for n in range(spec.depth):
        x_next = ps.fixed_points[n + 1]
        w_base = _inverse_base_image(beta)
        if not (w_base.x > 0 and w_base.x < x_next):
            raise PrecisionExhausted(
                f"beta_{n}^-1 i = ({w_base.x}, {w_base.y}) left the expected region",
                n,
            )
        # distance (squared, relative) of w_base from the next horoball boundary
        ball_margin = (
            (w_base.x - x_next) ** 2 + (w_base.y - x_next) ** 2
        ) / x_next**2 - 1
        if ball_margin < -det_tol:
            raise PrecisionExhausted(
                f"beta_{n}^-1 i entered the open horoball at {x_next}", n
            )
        region_margins.append(ball_margin)
        w_vec = UnitTangent(w_base, INFINITY)
        if not (w_base.y < x_next - w_base.x):
            raise PrecisionExhausted(
                f"vertical ray from beta_{n}^-1 i misses the tangent circle at {x_next}",
                n,
            )
        td = tangency(
            w_vec,
            OrientedPair(
                _tangent_data(w_vec, BoundaryPoint(x_next))[0],
                ps.pairs[n + 1].parabolic,
            ),
        )
        shrunk.append(translation_length(td.pair))
        tau = winding_time(td)
        winding_times.append(tau)
        wound = wind(td)

        beta, drift = compose_with_drift(beta, letters[n + 1])
        if drift > det_tol:
            raise PrecisionExhausted(
                f"determinant drift {drift} exceeds tolerance {det_tol}", n
            )
        max_drift = max(max_drift, drift)
        products.append(beta)

        v_next = UnitTangent(origin, beta.apply_boundary(INFINITY))
        # the defining relation: v_{n+1} = beta_n * wound vector
        prev = products[n]
        pushed = prev.apply_vector(wound)
        residual = hyp_distance(pushed.base, origin) + abs(
            pushed.forward.finite_value - v_next.forward.finite_value
        ) / (1 + abs(v_next.forward.finite_value))
        max_residual = max(max_residual, residual)
        vectors.append(v_next)

        z = _inverse_base_image(beta)
        times.append(-mpmath.log(z.y))

    limit_forward = vectors[-1].forward
    limit_time = times[-1]
    w_alpha = geodesic_flow(UnitTangent(origin, limit_forward), limit_time)

    # enclosure of the limiting endpoint of any admissible continuation:
    # the tail product maps oo into (x_{N+1}, alpha_{N+1}(oo))
    x_tail = spec.fixed_point(spec.depth + 1)
    ell_tail = spec.length(spec.depth + 1)
    xi_lower = beta.apply_boundary(BoundaryPoint(x_tail)).finite_value
    xi_upper = beta.apply_boundary(
        BoundaryPoint(x_tail * (1 + 2 / ell_tail))
    ).finite_value
    if not (xi_lower < xi_upper < limit_forward.finite_value):
        raise PrecisionExhausted(
            "endpoint enclosure collapsed; not enough working precision", spec.depth
        )

    return WindingSequence(
        spec=spec,
        pair_sequence=ps,
        letters=tuple(letters),
        products=tuple(products),
        vectors=tuple(vectors),
        times=tuple(times),
        winding_times=tuple(winding_times),
        shrunk_lengths=tuple(shrunk),
        limit_forward=limit_forward,
        limit_time=limit_time,
        w_alpha=w_alpha,
        xi_lower=xi_lower,
        xi_upper=xi_upper,
        region_margins=tuple(region_margins),
        max_det_drift=max_drift,
        max_step_residual=max_residual,
    )


def letters_ball(ws: WindingSequence, max_word_length: int | None = None) -> FuchsianWordBall:
    """Word ball over exactly the letters of the sequence; defaults to depth + 2."""
    length = ws.depth + 2 if max_word_length is None else int(max_word_length)
    return FuchsianWordBall(ws.letters, length)


def stable_times(ws: WindingSequence, l_max: int) -> tuple[list[mpf], list[mpf]]:
    """(D_n, T_l) tables controlling when the shadowing bounds switch on.

    D_n is the largest basepoint distance from i among the leveled
    vectors g_{r_k} beta_k^{-1} v_k for k <= n; T_0 = eps / 9 and
    T_l = max(log(sinh(D_{l-1}/2) * 2^{l+2} / eps), eps / 9).
    """
    eps = ws.spec.epsilon
    origin = base_origin()
    dists = []
    for k in range(min(l_max, ws.depth) + 1):
        w_base = _inverse_base_image(ws.products[k])
        leveled = geodesic_flow(UnitTangent(w_base, INFINITY), ws.times[k])
        dists.append(hyp_distance(leveled.base, origin))
    d_table = [max(dists[: n + 1]) for n in range(len(dists))]
    t_table = [eps / 9]
    for l in range(1, l_max + 1):
        d_prev = d_table[min(l - 1, len(d_table) - 1)]
        t_val = mpmath.log(mpmath.sinh(d_prev / 2) * mpf(2) ** (l + 2) / eps)
        t_table.append(max(t_val, eps / 9))
    return d_table, t_table


@dataclass(frozen=True)
class PmCell:
    n: int
    l: int
    t_start: mpf
    bound: mpf
    observed: mpf
    sample_count: int

    @property
    def margin(self) -> mpf:
        return self.bound - self.observed

    @property
    def passed(self) -> bool:
        return self.observed < self.bound


@dataclass(frozen=True)
class PmReport:
    epsilon: mpf
    cells: tuple[PmCell, ...]
    d_table: tuple[mpf, ...]
    t_table: tuple[mpf, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.cells)

    @property
    def min_margin(self) -> mpf:
        return min(c.margin for c in self.cells)


def verify_pm(
    ws: WindingSequence,
    l_max: int,
    t_grid_per_decade: int,
    ball: FuchsianWordBall,
) -> PmReport:
    """Check the shadowing table: for every n, l <= l_max and sampled
    t >= T_l, the quotient d1 between g_{t+r_n} v_n and g_t u stays below
    (sum_{k<=n} 2^-k) * eps / 2^l.

    Samples cover [T_l, T_l + 10] with 10 * t_grid_per_decade points.
    """
    if l_max > ws.depth:
        raise ValueError(f"l_max {l_max} exceeds the sequence depth {ws.depth}")
    if ball.max_word_length < ws.depth + 2:
        raise ValueError("word ball shorter than depth + 2")
    eps = ws.spec.epsilon
    d_table, t_table = stable_times(ws, l_max)
    u = ws.pair_sequence.base
    count = max(2, int(round(10 * t_grid_per_decade)))

    cells = []
    for n in range(l_max + 1):
        v_n = ws.vectors[n]
        r_n = ws.times[n]
        coeff = 2 - mpf(2) ** (-n)
        for l in range(l_max + 1):
            t_start = t_table[l]
            bound = coeff * eps / mpf(2) ** l
            worst = mpf(0)
            for j in range(count):
                t = t_start + 10 * mpf(j) / (count - 1)
                val = d1_quotient(
                    geodesic_flow(v_n, t + r_n), geodesic_flow(u, t), ball
                )
                if val > worst:
                    worst = val
            cells.append(
                PmCell(
                    n=n,
                    l=l,
                    t_start=t_start,
                    bound=bound,
                    observed=worst,
                    sample_count=count,
                )
            )
    return PmReport(
        epsilon=eps,
        cells=tuple(cells),
        d_table=tuple(d_table),
        t_table=tuple(t_table),
    )


@dataclass(frozen=True)
class Cor1Tail:
    l: int
    t_start: mpf
    bound: mpf
    observed: mpf

    @property
    def passed(self) -> bool:
        return self.observed <= self.bound


@dataclass(frozen=True)
class Cor1Report:
    epsilon: mpf
    t_max: mpf
    grid_size: int
    sup_value: mpf
    bound: mpf
    tails: tuple[Cor1Tail, ...]

    @property
    def margin(self) -> mpf:
        return self.bound - self.sup_value

    @property
    def all_passed(self) -> bool:
        return self.sup_value <= self.bound and all(t.passed for t in self.tails)


def verify_cor1(
    ws: WindingSequence,
    t_max,
    ball: FuchsianWordBall,
    grid_size: int = 500,
) -> Cor1Report:
    """Check sup_{t in [0, t_max]} of the quotient d1 between the flowed
    surrogate w_alpha and the flowed reference vector against 3 * eps,
    plus the tail decay bounds eps / 2^{l-1} beyond each reachable T_l."""
    eps = ws.spec.epsilon
    t_hi = to_scalar(t_max)
    u = ws.pair_sequence.base
    w = ws.w_alpha
    grid = [t_hi * mpf(j) / (grid_size - 1) for j in range(grid_size)]
    values = [
        d1_quotient(geodesic_flow(w, t), geodesic_flow(u, t), ball) for t in grid
    ]

    _, t_table = stable_times(ws, min(ws.depth, 8))
    tails = []
    for l, t_start in enumerate(t_table):
        if t_start > t_hi:
            break
        obs = max(v for t, v in zip(grid, values) if t >= t_start)
        tails.append(
            Cor1Tail(
                l=l, t_start=t_start, bound=eps / mpf(2) ** (l - 1), observed=obs
            )
        )
    return Cor1Report(
        epsilon=eps,
        t_max=t_hi,
        grid_size=grid_size,
        sup_value=max(values),
        bound=3 * eps,
        tails=tuple(tails),
    )


def xi_of_sequence(letters: Sequence[Isometry]) -> mpf:
    """Endpoint of the full product of the letters applied to oo."""
    if not letters:
        raise ValueError("need at least one letter")
    g = letters[0]
    for h in letters[1:]:
        g = g @ h
    image = g.apply_boundary(INFINITY)
    return image.finite_value


@dataclass(frozen=True)
class SeparationRecord:
    n: int
    value: mpf
    fixed_point: mpf

    @property
    def margin(self) -> mpf:
        return self.value - self.fixed_point

    @property
    def passed(self) -> bool:
        return self.value > self.fixed_point


def xi_nested_separation(ws: WindingSequence) -> tuple[SeparationRecord, ...]:
    """Tail endpoints stay right of their leading fixed points:
    alpha_n ... alpha_N (oo) > x_n for every n.

    The n-th tail value equals beta_{n-1}^{-1} applied to the endpoint
    surrogate, computed directly from the tail product so no
    cancellation occurs.
    """
    records = []
    for n in range(ws.depth + 1):
        value = xi_of_sequence(ws.letters[n:])
        records.append(
            SeparationRecord(
                n=n, value=value, fixed_point=ws.pair_sequence.fixed_points[n]
            )
        )
    return tuple(records)
