"""Upper half-plane geometry.

Points, boundary points, Mobius isometries, Busemann cocycles, unit
tangent vectors, the geodesic flow, the d1 distance on the unit tangent
bundle, and finite word balls used to approximate quotient distances.

Model: H = {x + iy : y > 0} with metric ds^2 = (dx^2 + dy^2) / y^2.
Distances come from cosh d(p, q) = 1 + |p - q|^2 / (2 p.y q.y).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import mpmath
import numpy as np
from mpmath import mpf

from .numeric import (
    det_tolerance,
    require_finite,
    to_scalar,
    trace_tolerance,
)

MAX_FLOW_TIME = mpf("1e6")


@dataclass(frozen=True)
class Point:
    """A point of the open upper half-plane."""

    x: mpf
    y: mpf

    def __post_init__(self):
        object.__setattr__(self, "x", require_finite(self.x, "x coordinate"))
        y = require_finite(self.y, "y coordinate")
        if y <= 0:
            raise ValueError(f"point must lie above the real axis, got y = {y}")
        object.__setattr__(self, "y", y)

    def __repr__(self):
        return f"Point({mpmath.nstr(self.x, 12)}, {mpmath.nstr(self.y, 12)})"


def base_origin() -> Point:
    """The reference point i used for horocycle levels."""
    return Point(mpf(0), mpf(1))


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the boundary circle R u {oo}; value None encodes oo."""

    value: mpf | None

    def __post_init__(self):
        if self.value is not None:
            object.__setattr__(
                self, "value", require_finite(self.value, "boundary point")
            )

    @classmethod
    def finite(cls, x) -> "BoundaryPoint":
        return cls(to_scalar(x))

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    @property
    def finite_value(self) -> mpf:
        if self.value is None:
            raise ValueError("boundary point at infinity has no finite value")
        return self.value

    def __repr__(self):
        if self.value is None:
            return "BoundaryPoint(oo)"
        return f"BoundaryPoint({mpmath.nstr(self.value, 12)})"


INFINITY = BoundaryPoint(None)


def boundary_gap(a: BoundaryPoint, b: BoundaryPoint) -> mpf:
    """Gap |a - b| in the real chart; oo against a finite point gives +inf."""
    if a.is_infinite and b.is_infinite:
        return mpf(0)
    if a.is_infinite or b.is_infinite:
        return mpf("+inf")
    return abs(a.value - b.value)


def chordal_gap(a: BoundaryPoint, b: BoundaryPoint) -> mpf:
    """Gap in the stereographic chart, bounded by 1 and finite at oo."""
    if a.is_infinite and b.is_infinite:
        return mpf(0)
    if a.is_infinite:
        return 1 / mpmath.sqrt(1 + b.value**2)
    if b.is_infinite:
        return 1 / mpmath.sqrt(1 + a.value**2)
    return abs(a.value - b.value) / mpmath.sqrt((1 + a.value**2) * (1 + b.value**2))


class IsometryClass(Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"
    ELLIPTIC = "elliptic"


@dataclass(frozen=True)
class Isometry:
    """Orientation-preserving isometry z -> (az + b) / (cz + d).

    The matrix is rescaled to determinant 1 on construction and is only
    meaningful up to sign.
    """

    a: mpf
    b: mpf
    c: mpf
    d: mpf

    def __post_init__(self):
        a = require_finite(self.a, "a")
        b = require_finite(self.b, "b")
        c = require_finite(self.c, "c")
        d = require_finite(self.d, "d")
        det = a * d - b * c
        if not (det > 0):
            raise ValueError(f"matrix must have positive determinant, got {det}")
        s = mpmath.sqrt(det)
        object.__setattr__(self, "a", a / s)
        object.__setattr__(self, "b", b / s)
        object.__setattr__(self, "c", c / s)
        object.__setattr__(self, "d", d / s)

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(mpf(1), mpf(0), mpf(0), mpf(1))

    @classmethod
    def translation(cls, lam) -> "Isometry":
        """z -> z + lam."""
        return cls(mpf(1), to_scalar(lam), mpf(0), mpf(1))

    @classmethod
    def dilation(cls, factor) -> "Isometry":
        """z -> factor * z for factor > 0."""
        f = to_scalar(factor)
        if f <= 0:
            raise ValueError("dilation factor must be positive")
        r = mpmath.sqrt(f)
        return cls(r, mpf(0), mpf(0), 1 / r)

    @classmethod
    def rotation_about_i(cls, theta) -> "Isometry":
        """Elliptic element fixing i, rotating its tangent space by 2*theta."""
        t = to_scalar(theta)
        return cls(mpmath.cos(t), -mpmath.sin(t), mpmath.sin(t), mpmath.cos(t))

    def entries(self) -> tuple[mpf, mpf, mpf, mpf]:
        return (self.a, self.b, self.c, self.d)

    def compose(self, other: "Isometry") -> "Isometry":
        return compose_with_drift(self, other)[0]

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return self.compose(other)

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    @property
    def trace(self) -> mpf:
        return self.a + self.d

    def sign_normalized(self) -> "Isometry":
        """Representative with the largest-magnitude entry positive."""
        entries = self.entries()
        mags = [abs(e) for e in entries]
        lead = entries[mags.index(max(mags))]
        if lead < 0:
            g = Isometry.__new__(Isometry)
            object.__setattr__(g, "a", -self.a)
            object.__setattr__(g, "b", -self.b)
            object.__setattr__(g, "c", -self.c)
            object.__setattr__(g, "d", -self.d)
            return g
        return self

    def projectively_equal(self, other: "Isometry", tol=None) -> bool:
        if tol is None:
            tol = det_tolerance()
        p = self.sign_normalized()
        q = other.sign_normalized()
        return all(abs(x - y) <= tol for x, y in zip(p.entries(), q.entries()))

    def apply_point(self, p: Point) -> Point:
        cx = self.c * p.x + self.d
        cy = self.c * p.y
        den = cx * cx + cy * cy
        nx = ((self.a * p.x + self.b) * cx + self.a * self.c * p.y * p.y) / den
        ny = p.y / den
        return Point(nx, ny)

    def apply_boundary(self, b: BoundaryPoint) -> BoundaryPoint:
        if b.is_infinite:
            if self.c == 0:
                return INFINITY
            return BoundaryPoint(self.a / self.c)
        den = self.c * b.value + self.d
        if den == 0:
            return INFINITY
        return BoundaryPoint((self.a * b.value + self.b) / den)

    def apply_vector(self, u: "UnitTangent") -> "UnitTangent":
        return UnitTangent(self.apply_point(u.base), self.apply_boundary(u.forward))

    def fixed_boundary_point(self) -> BoundaryPoint:
        """Boundary fixed point of a parabolic (or hyperbolic attractive pair midpoint).

        Only meaningful for non-identity parabolics: c = 0 fixes oo,
        otherwise the unique fixed point is (a - d) / (2c).
        """
        if self.c == 0:
            return INFINITY
        return BoundaryPoint((self.a - self.d) / (2 * self.c))

    def __repr__(self):
        e = [mpmath.nstr(v, 10) for v in self.entries()]
        return f"Isometry([[{e[0]}, {e[1]}], [{e[2]}, {e[3]}]])"


def compose_with_drift(g: Isometry, h: Isometry) -> tuple[Isometry, mpf]:
    """Matrix product plus the raw determinant drift |det - 1| before renormalizing."""
    a = g.a * h.a + g.b * h.c
    b = g.a * h.b + g.b * h.d
    c = g.c * h.a + g.d * h.c
    d = g.c * h.b + g.d * h.d
    drift = abs(a * d - b * c - 1)
    return Isometry(a, b, c, d), drift


def apply_isometry(g: Isometry, z):
    """Apply g to a Point, BoundaryPoint, or UnitTangent."""
    if isinstance(z, Point):
        return g.apply_point(z)
    if isinstance(z, BoundaryPoint):
        return g.apply_boundary(z)
    if isinstance(z, UnitTangent):
        return g.apply_vector(z)
    raise TypeError(f"cannot apply isometry to {type(z).__name__}")


def classify_isometry(g: Isometry, tol=None) -> IsometryClass:
    return classify_isometry_detailed(g, tol)[0]


def classify_isometry_detailed(g: Isometry, tol=None) -> tuple[IsometryClass, bool]:
    """Classification by |trace|, with a borderline flag.

    The flag marks traces within tolerance of 2 but not exactly 2: such
    elements are reported parabolic with low confidence.
    """
    if tol is None:
        tol = trace_tolerance()
    n = g.sign_normalized()
    if (
        abs(n.b) <= tol
        and abs(n.c) <= tol
        and abs(n.a - 1) <= tol
        and abs(n.d - 1) <= tol
    ):
        return IsometryClass.IDENTITY, False
    t = abs(g.trace)
    gap = abs(t - 2)
    if gap <= tol:
        return IsometryClass.PARABOLIC, gap != 0
    if t > 2:
        return IsometryClass.HYPERBOLIC, False
    return IsometryClass.ELLIPTIC, False


def hyp_distance(p: Point, q: Point) -> mpf:
    """Distance from cosh d = 1 + |p - q|^2 / (2 p.y q.y), evaluated as
    2 asinh(sqrt(.../2)) so nearby points lose no relative precision."""
    dx = p.x - q.x
    dy = p.y - q.y
    q2 = (dx * dx + dy * dy) / (2 * p.y * q.y)
    return 2 * mpmath.asinh(mpmath.sqrt(q2 / 2))


def busemann(xi: BoundaryPoint, x: Point, y: Point) -> mpf:
    """Busemann cocycle B_xi(x, y) = lim_t [d(x, c(t)) - d(y, c(t))], c(t) -> xi.

    For xi = oo this is log(y.y) - log(x.y); a finite center is conjugated
    to oo by z -> 1/(xi - z), under which heights become
    Im(1/(xi - z)) = z.y / |xi - z|^2.
    """
    if xi.is_infinite:
        return mpmath.log(y.y) - mpmath.log(x.y)
    v = xi.value

    def conjugated_height(p: Point) -> mpf:
        return p.y / ((v - p.x) ** 2 + p.y**2)

    return mpmath.log(conjugated_height(y)) - mpmath.log(conjugated_height(x))


@dataclass(frozen=True)
class UnitTangent:
    """Unit tangent vector, stored as basepoint plus forward endpoint."""

    base: Point
    forward: BoundaryPoint

    def __repr__(self):
        return f"UnitTangent({self.base!r}, {self.forward!r})"


def backward_endpoint(u: UnitTangent) -> BoundaryPoint:
    """Second boundary endpoint of the geodesic through u.

    Finite forward xi and base (x, y): the geodesic is the half-circle
    centered at c = (xi^2 - x^2 - y^2) / (2 (xi - x)), so the other
    endpoint is 2c - xi.  A base directly above xi gives the vertical
    line, whose other endpoint is oo.
    """
    if u.forward.is_infinite:
        return BoundaryPoint(u.base.x)
    xi = u.forward.value
    if xi == u.base.x:
        return INFINITY
    c = (xi * xi - u.base.x**2 - u.base.y**2) / (2 * (xi - u.base.x))
    return BoundaryPoint(2 * c - xi)


def pair_standardizer(eta: BoundaryPoint, xi: BoundaryPoint) -> Isometry:
    """Isometry sending the ordered boundary pair (eta, xi) to (0, oo)."""
    if eta.is_infinite and xi.is_infinite:
        raise ValueError("boundary points must be distinct")
    if xi.is_infinite:
        return Isometry.translation(-eta.value)
    if eta.is_infinite:
        return Isometry(mpf(0), mpf(1), mpf(-1), xi.value)
    e, f = eta.value, xi.value
    if e == f:
        raise ValueError("boundary points must be distinct")
    if e < f:
        return Isometry(mpf(1), -e, mpf(-1), f)
    return Isometry(mpf(1), -e, mpf(1), -f)


def standardizer(u: UnitTangent) -> Isometry:
    """Isometry T with T(u) = (i, oo): backward to 0, forward to oo, base to i."""
    m = pair_standardizer(backward_endpoint(u), u.forward)
    z = m.apply_point(u.base)
    scale = Isometry(mpf(1), -z.x, mpf(0), z.y)
    return scale @ m


def geodesic_flow(u: UnitTangent, t) -> UnitTangent:
    """Flow u for time t along its geodesic; the forward endpoint is unchanged.

    Vectors pointing at oo flow exactly (y scales by e^t); anything else
    is conjugated to the standard vertical geodesic and back.
    """
    s = to_scalar(t)
    if abs(s) > MAX_FLOW_TIME:
        raise ValueError(f"flow time {s} exceeds the supported range {MAX_FLOW_TIME}")
    if u.forward.is_infinite:
        return UnitTangent(Point(u.base.x, u.base.y * mpmath.exp(s)), u.forward)
    inv = standardizer(u).inverse()
    return UnitTangent(inv.apply_point(Point(mpf(0), mpmath.exp(s))), u.forward)


def vector_points(u: UnitTangent, times: Sequence) -> list[Point]:
    """Basepoints of the flow of u at many times, sharing one conjugation."""
    vertical = u.forward.is_infinite
    inv = None if vertical else standardizer(u).inverse()
    out = []
    for t in times:
        s = to_scalar(t)
        if abs(s) > MAX_FLOW_TIME:
            raise ValueError(f"flow time {s} exceeds the supported range")
        if vertical:
            out.append(Point(u.base.x, u.base.y * mpmath.exp(s)))
        else:
            out.append(inv.apply_point(Point(mpf(0), mpmath.exp(s))))
    return out


def vector_point(u: UnitTangent, t) -> Point:
    return vector_points(u, [t])[0]


def time_one_point(u: UnitTangent) -> Point:
    return vector_point(u, 1)


def reverse(u: UnitTangent) -> UnitTangent:
    return UnitTangent(u.base, backward_endpoint(u))


def stable_vector(u: UnitTangent, s) -> UnitTangent:
    """Vector on the stable horocycle of u at signed horocyclic offset s.

    Same forward endpoint, same Busemann level; s = 0 returns u itself.
    """
    inv = standardizer(u).inverse()
    return UnitTangent(inv.apply_point(Point(to_scalar(s), mpf(1))), u.forward)


def d1(u: UnitTangent, v: UnitTangent) -> mpf:
    """d(u(0), v(0)) + d(u(1), v(1)), a metric on the unit tangent bundle."""
    return hyp_distance(u.base, v.base) + hyp_distance(
        time_one_point(u), time_one_point(v)
    )


class FuchsianWordBall:
    """All reduced words of bounded length in a set of generators and inverses.

    Elements are deduplicated projectively.  Matrices are additionally
    kept as float32/float64 arrays so that sweeps over the whole ball can
    be vectorized; exact elements are rebuilt on demand from their words.
    """

    def __init__(self, generators: Sequence[Isometry], max_word_length: int):
        if max_word_length < 1:
            raise ValueError("max_word_length must be at least 1")
        gens = [g.sign_normalized() for g in generators]
        if not gens:
            raise ValueError("need at least one generator")
        self.generators = tuple(gens)
        self.max_word_length = int(max_word_length)
        self._alphabet: list[Isometry] = list(self.generators) + [
            g.inverse() for g in self.generators
        ]
        k = len(self.generators)
        self._inverse_letter = [i + k for i in range(k)] + [i for i in range(k)]
        self._build()
        self._exact_cache: dict[int, Isometry] = {}
        self._elements_cache: tuple[Isometry, ...] | None = None

    def _build(self):
        gen_mats = np.array(
            [[[float(g.a), float(g.b)], [float(g.c), float(g.d)]] for g in self._alphabet],
            dtype=np.float64,
        )
        n_letters = gen_mats.shape[0]
        L = self.max_word_length

        mats = [np.eye(2, dtype=np.float64)[None, :, :]]
        words = [np.full((1, L), -1, dtype=np.int16)]
        level_mats = mats[0]
        level_words = words[0]
        for depth in range(L):
            new_mats = []
            new_words = []
            last = level_words[:, depth - 1] if depth > 0 else np.full(
                (level_mats.shape[0],), -2, dtype=np.int16
            )
            for j in range(n_letters):
                mask = last != self._inverse_letter[j]
                if not mask.any():
                    continue
                prod = np.einsum("nij,jk->nik", level_mats[mask], gen_mats[j])
                w = level_words[mask].copy()
                w[:, depth] = j
                new_mats.append(prod)
                new_words.append(w)
            level_mats = np.concatenate(new_mats, axis=0)
            level_words = np.concatenate(new_words, axis=0)
            mats.append(level_mats)
            words.append(level_words)

        all_mats = np.concatenate(mats, axis=0)
        all_words = np.concatenate(words, axis=0)

        flat = all_mats.reshape(-1, 4)
        # projective sign normalization: largest-magnitude entry positive
        lead = np.take_along_axis(
            flat, np.argmax(np.abs(flat), axis=1)[:, None], axis=1
        )[:, 0]
        sign = np.where(lead < 0, -1.0, 1.0)
        flat = flat * sign[:, None]
        # dedup on keys quantized at 1e-9 relative to each matrix's scale
        scale = np.maximum(np.abs(flat).max(axis=1), 1.0)
        keys = np.round(flat / (scale[:, None] * 1e-9)).astype(np.int64)
        _, first = np.unique(keys, axis=0, return_index=True)
        keep = np.sort(first)

        self._mats = np.ascontiguousarray(flat[keep].reshape(-1, 2, 2))
        self._mats32 = self._mats.astype(np.float32)
        self._words = all_words[keep]

    def __len__(self) -> int:
        return self._mats.shape[0]

    @property
    def element_count(self) -> int:
        return len(self)

    def word(self, index: int) -> tuple[int, ...]:
        row = self._words[index]
        return tuple(int(j) for j in row if j >= 0)

    def exact_element(self, index: int) -> Isometry:
        cached = self._exact_cache.get(index)
        if cached is not None:
            return cached
        g = Isometry.identity()
        for j in self.word(index):
            g = g @ self._alphabet[j]
        self._exact_cache[index] = g
        return g

    @property
    def elements(self) -> tuple[Isometry, ...]:
        """Deduplicated elements as exact isometries (materialized lazily)."""
        if self._elements_cache is None:
            self._elements_cache = tuple(
                self.exact_element(i) for i in range(len(self))
            )
        return self._elements_cache

    def boundary_images_float(self) -> np.ndarray:
        """gamma(oo) = a/c for every element, +-inf where c = 0 (float64)."""
        a = self._mats[:, 0, 0]
        c = self._mats[:, 1, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            out = a / c
        out[c == 0.0] = np.inf
        return out


def _coshm1_all(mats, x, y, wx, wy, suspects: bool = False):
    """cosh(d(w, gamma z)) - 1 for every gamma, in the array's own dtype.

    With suspects=True also returns a mask of elements whose denominator
    term C x + D cancels below the dtype's noise floor: their values are
    unreliable and must not be used to exclude candidates.
    """
    dt = mats.dtype.type
    x, y, wx, wy = dt(x), dt(y), dt(wx), dt(wy)
    A = mats[:, 0, 0]
    B = mats[:, 0, 1]
    C = mats[:, 1, 0]
    D = mats[:, 1, 1]
    cx = C * x + D
    den = cx * cx + (C * C) * (y * y)
    gx = ((A * x + B) * cx + (A * C) * (y * y)) / den
    gy = y / den
    q = ((gx - wx) ** 2 + (gy - wy) ** 2) / ((2 * wy) * gy)
    if not suspects:
        return q
    eps = np.finfo(mats.dtype).eps
    noise = 8 * eps * np.maximum(np.abs(C * x), np.abs(D))
    return q, np.abs(cx) <= noise


def d1_quotient_detail(
    u: UnitTangent, v: UnitTangent, ball: FuchsianWordBall
) -> tuple[mpf, tuple[int, ...]]:
    """Min over the ball of d1(u, gamma v), plus the minimizing word.

    This is an upper bound on the true quotient distance (the ball is a
    finite subset of the group).  Candidates are pruned with float
    passes on the basepoint distance, which is a lower bound for d1;
    survivors are evaluated exactly.
    """
    u0, u1 = u.base, time_one_point(u)
    v0, v1 = v.base, time_one_point(v)

    best = hyp_distance(u0, v0) + hyp_distance(u1, v1)
    best_word: tuple[int, ...] = ()

    x0, y0 = float(v0.x), float(v0.y)
    x1, y1 = float(v1.x), float(v1.y)
    w0x, w0y = float(u0.x), float(u0.y)
    w1x, w1y = float(u1.x), float(u1.y)

    def evaluate(indices, d_est) -> None:
        nonlocal best, best_word
        order = np.argsort(d_est, kind="stable")
        slack = 1e-4 + 1e-5 * float(best)
        for pos in order:
            if d_est[pos] > float(best) + slack:
                break
            idx = int(indices[pos])
            word = ball.word(idx)
            if not word:
                continue  # identity is the running initial value
            g = ball.exact_element(idx)
            val = hyp_distance(u0, g.apply_point(v0)) + hyp_distance(
                u1, g.apply_point(v1)
            )
            if val < best:
                best = val
                best_word = word

    def refine(indices) -> np.ndarray:
        """Float64 estimate of the full d1 for the given elements;
        pole-contaminated entries are forced to the front (value -1)."""
        sub = ball._mats[indices]
        q0, pole0 = _coshm1_all(sub, x0, y0, w0x, w0y, suspects=True)
        q1, pole1 = _coshm1_all(sub, x1, y1, w1x, w1y, suspects=True)
        d_est = np.arccosh(np.maximum(q0 + 1.0, 1.0)) + np.arccosh(
            np.maximum(q1 + 1.0, 1.0)
        )
        d_est[pole0 | pole1 | ~np.isfinite(d_est)] = -1.0
        return d_est

    # coarse float32 pass on the basepoint term, a lower bound for d1;
    # candidates whose denominator cancels below float32 resolution are
    # unreliable and are kept unconditionally
    q32, pole32 = _coshm1_all(ball._mats32, x0, y0, w0x, w0y, suspects=True)

    # seed the cutoff from the most promising candidates
    k = min(64, len(ball) - 1)
    seed = np.argpartition(np.where(np.isfinite(q32), q32, np.inf), k)[: k + 1]
    suspects = np.flatnonzero(pole32)
    if suspects.size:
        seed = np.unique(np.concatenate([seed, suspects[:256]]))
    evaluate(seed, refine(seed))

    # complete scan at the seeded threshold
    bf = float(best)
    cut = np.cosh(min(bf * (1 + 1e-5) + 1e-4, 700.0)) - 1.0
    keep = ~(q32 > np.float32(cut * 1.001 + 1e-6)) | pole32
    keep[seed] = False
    cand = np.flatnonzero(keep)
    if cand.size:
        evaluate(cand, refine(cand))
    return best, best_word


def d1_quotient(u: UnitTangent, v: UnitTangent, ball: FuchsianWordBall) -> mpf:
    """Quotient distance upper bound: min over gamma in the ball of d1(u, gamma v)."""
    return d1_quotient_detail(u, v, ball)[0]
