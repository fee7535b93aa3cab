"""Points on ``y^2 = (x - e1)(x - e2)(x - e3)`` over a quadratic tower.

Besides the chord-and-tangent group law this module has the radical
halving formula: given ``P0 = (x0, y0)`` pick ``r_i`` with
``r_i^2 = x0 - e_i`` and ``r1 r2 r3 = -y0``; then

    P = (x0 + (r1 r2 + r2 r3 + r3 r1),
         -(r1 + r2)(r2 + r3)(r3 + r1))

satisfies ``2P = P0``.  The ordinate expands to
``-y0 - (r1 + r2 + r3)(r1 r2 + r2 r3 + r3 r1)``; with ``+`` in front of
the product the point is not on the curve unless ``y0 = 0``.  The four
admissible sign patterns give the four halves.  Division polynomials serve as an independent check on orders.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .exactfield import Tower, TowerElement, TowerError, adjoin_sqrt, sqrt_in_tower

__all__ = [
    "Point",
    "INFINITY",
    "Curve",
    "HalvingError",
    "InvariantViolation",
    "NotOnCurveError",
    "halve",
    "division_poly",
    "poly_eval",
    "Torsion",
    "enumerate_torsion",
    "point_order",
]


class NotOnCurveError(ValueError):
    pass


class HalvingError(ArithmeticError):
    """A half of the point does not exist over the tower."""


class InvariantViolation(AssertionError):
    """An enumerated structure does not have the shape group theory forces."""


@dataclass(frozen=True)
class Point:
    x: Optional[TowerElement] = None
    y: Optional[TowerElement] = None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def sort_key(self) -> tuple:
        if self.is_infinity:
            return (0,)
        return (1, self.x.coeffs, self.y.coeffs)

    def to_json(self) -> dict:
        if self.is_infinity:
            return {"infinity": True}
        return {"x": self.x.to_json(), "y": self.y.to_json()}

    def __repr__(self):
        return "Point(inf)" if self.is_infinity else f"Point({self.x!r}, {self.y!r})"


INFINITY = Point()


class Curve:
    """The curve ``y^2 = (x - e1)(x - e2)(x - e3)`` with distinct tower roots."""

    def __init__(self, roots: Sequence[TowerElement]):
        roots = list(roots)
        if len(roots) != 3:
            raise ValueError("a curve needs exactly three roots")
        tower = max((r.tower for r in roots), key=lambda t: t.depth)
        roots = tuple(r.embed(tower) for r in roots)
        if len(set(roots)) != 3:
            raise ValueError("curve roots must be distinct")
        self.tower: Tower = tower
        self.roots = roots
        e1, e2, e3 = roots
        self.a2 = -(e1 + e2 + e3)
        self.a4 = e1 * e2 + e1 * e3 + e2 * e3
        self.a6 = -(e1 * e2 * e3)

    def __repr__(self):
        return f"Curve(roots={list(self.roots)!r}, {self.tower!r})"

    def over(self, tower: Tower) -> "Curve":
        """The same curve with roots embedded in an extension tower."""
        return Curve([r.embed(tower) for r in self.roots])

    def shifted(self) -> "Curve":
        """The translate with the first root moved to 0."""
        e1 = self.roots[0]
        return Curve([r - e1 for r in self.roots])

    def rhs(self, x: TowerElement) -> TowerElement:
        e1, e2, e3 = self.roots
        return (x - e1) * (x - e2) * (x - e3)

    def contains(self, P: Point) -> bool:
        if P.is_infinity:
            return True
        return P.y * P.y == self.rhs(P.x)

    def point(self, x, y) -> Point:
        x = self.tower.scalar(x) if not isinstance(x, TowerElement) else x.embed(self.tower)
        y = self.tower.scalar(y) if not isinstance(y, TowerElement) else y.embed(self.tower)
        P = Point(x, y)
        if not self.contains(P):
            raise NotOnCurveError(f"{P!r} is not on {self!r}")
        return P

    def two_torsion(self) -> list[Point]:
        zero = self.tower.zero()
        return [INFINITY] + [Point(e, zero) for e in self.roots]

    # group law ---------------------------------------------------------------

    def neg(self, P: Point) -> Point:
        return P if P.is_infinity else Point(P.x, -P.y)

    def add(self, P: Point, Q: Point) -> Point:
        if P.is_infinity:
            return Q
        if Q.is_infinity:
            return P
        if P.x == Q.x:
            if P.y == -Q.y:
                return INFINITY
            return self.double(P)
        lam = (Q.y - P.y) / (Q.x - P.x)
        x3 = lam * lam - self.a2 - P.x - Q.x
        return Point(x3, lam * (P.x - x3) - P.y)

    def double(self, P: Point) -> Point:
        if P.is_infinity or P.y.is_zero():
            return INFINITY
        x = P.x
        lam = (3 * x * x + 2 * self.a2 * x + self.a4) / (2 * P.y)
        x3 = lam * lam - self.a2 - 2 * x
        return Point(x3, lam * (x - x3) - P.y)

    def mul(self, n: int, P: Point) -> Point:
        if n < 0:
            return self.mul(-n, self.neg(P))
        result = INFINITY
        addend = P
        while n:
            if n & 1:
                result = self.add(result, addend)
            n >>= 1
            if n:
                addend = self.double(addend)
        return result


def point_order(curve: Curve, P: Point, limit: int = 64) -> int:
    """Order of a 2-power torsion point, by repeated doubling."""
    order = 1
    while not P.is_infinity:
        P = curve.double(P)
        order *= 2
        if order > limit:
            raise InvariantViolation("point is not 2-power torsion within the limit")
    return order


# ---------------------------------------------------------------------------
# halving


@dataclass
class HalvingStats:
    scratch_levels: int = 0


def halve(P0: Point, curve: Curve, max_scratch: int = 3, stats: Optional[HalvingStats] = None) -> list[Point]:
    """The four points ``P`` with ``2P = P0``, sorted canonically.

    Square roots ``r_i`` missing from the tower are adjoined to a scratch
    extension (at most ``max_scratch`` levels); the halves must still land
    in the curve's own tower, otherwise :class:`HalvingError` is raised.
    """
    if P0.is_infinity:
        return sorted(curve.two_torsion(), key=Point.sort_key)
    base = curve.tower
    work = base
    x0, y0 = P0.x, P0.y
    diffs = [x0 - e for e in curve.roots]
    used = 0

    def root(d):
        nonlocal work, used
        d = d.embed(work)
        r = sqrt_in_tower(d)
        if r is not None:
            return r
        if used >= max_scratch:
            raise HalvingError(f"scratch limit of {max_scratch} levels reached while halving {P0!r}")
        used += 1
        work, r = adjoin_sqrt(work, d, f"_scratch{used}")
        return r

    if y0.is_zero():
        zero_idx = [i for i, d in enumerate(diffs) if d.is_zero()]
        if len(zero_idx) != 1:
            raise NotOnCurveError(f"{P0!r} has y = 0 but x is not a root")
        i0 = zero_idx[0]
        others = [i for i in range(3) if i != i0]
        ra = root(diffs[others[0]])
        rb = root(diffs[others[1]])
        ra, rb = ra.embed(work), rb.embed(work)
        patterns = []
        for sa in (1, -1):
            for sb in (1, -1):
                r = [work.zero()] * 3
                r[others[0]] = ra * sa
                r[others[1]] = rb * sb
                patterns.append(r)
    else:
        r1 = root(diffs[0])
        r2 = root(diffs[1])
        r1, r2 = r1.embed(work), r2.embed(work)
        y0w = y0.embed(work)
        patterns = []
        for s1 in (1, -1):
            for s2 in (1, -1):
                a, b = r1 * s1, r2 * s2
                patterns.append([a, b, -y0w / (a * b)])

    x0w, y0w = x0.embed(work), y0.embed(work)
    halves = []
    for r1, r2, r3 in patterns:
        e2 = r1 * r2 + r2 * r3 + r3 * r1
        x = x0w + e2
        y = -y0w - (r1 + r2 + r3) * e2
        xb, yb = x.restrict(base), y.restrict(base)
        if xb is None or yb is None:
            raise HalvingError(f"a half of {P0!r} is not defined over {base!r}")
        halves.append(Point(xb, yb))
    if stats is not None:
        stats.scratch_levels = max(stats.scratch_levels, used)
    return sorted(set(halves), key=Point.sort_key)


# ---------------------------------------------------------------------------
# division polynomials
#
# Polynomials are coefficient lists (lowest degree first) of TowerElements.
# f_n = psi_n for odd n and f_n = psi_n / psi_2 for even n, with
# psi_2^2 = 4 (x - e1)(x - e2)(x - e3).


def _trim(p):
    while len(p) > 1 and p[-1].is_zero():
        p = p[:-1]
    return p


def _padd(p, q):
    n = max(len(p), len(q))
    zero = (p or q)[0].tower.zero()
    p = p + [zero] * (n - len(p))
    q = q + [zero] * (n - len(q))
    return _trim([a + b for a, b in zip(p, q)])


def _pneg(p):
    return [-a for a in p]


def _pmul(p, q):
    zero = p[0].tower.zero()
    out = [zero] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a.is_zero():
            continue
        for j, b in enumerate(q):
            if not b.is_zero():
                out[i + j] = out[i + j] + a * b
    return _trim(out)


def _ppow(p, n):
    out = [p[0].tower.one()]
    for _ in range(n):
        out = _pmul(out, p)
    return out


def poly_eval(p: Sequence[TowerElement], x: TowerElement) -> TowerElement:
    acc = x.tower.zero()
    for c in reversed(p):
        acc = acc * x + c.embed(x.tower)
    return acc


def division_poly(n: int, curve: Curve) -> list[TowerElement]:
    """The division polynomial ``f_n`` in x (y-factor stripped for even n), 1 <= n <= 8."""
    if not 1 <= n <= 8:
        raise ValueError("division polynomials are provided for 1 <= n <= 8")
    T = curve.tower
    c = T.scalar
    a2, a4, a6 = curve.a2, curve.a4, curve.a6
    b2, b4, b6 = 4 * a2, 2 * a4, 4 * a6
    b8 = 4 * a2 * a6 - a4 * a4
    f = {0: [c(0)], 1: [c(1)], 2: [c(1)]}
    f[3] = [b8, 3 * b6, 3 * b4, b2, c(3)]
    f[4] = [b4 * b8 - b6 * b6, b2 * b8 - b4 * b6, 10 * b8, 10 * b6, 5 * b4, b2, c(2)]
    F = [4 * a6, 4 * a4, 4 * a2, c(4)]
    F2 = _pmul(F, F)
    for k in range(5, n + 1):
        m = k // 2
        if k % 2:
            t1 = _pmul(f[m + 2], _ppow(f[m], 3))
            t2 = _pmul(f[m - 1], _ppow(f[m + 1], 3))
            if m % 2 == 0:
                t1 = _pmul(F2, t1)
            else:
                t2 = _pmul(F2, t2)
            f[k] = _padd(t1, _pneg(t2))
        else:
            t1 = _pmul(f[m + 2], _ppow(f[m - 1], 2))
            t2 = _pmul(f[m - 2], _ppow(f[m + 1], 2))
            f[k] = _pmul(f[m], _padd(t1, _pneg(t2)))
    return f[n]


def killed_by(curve: Curve, P: Point, n: int, polys: Optional[dict] = None) -> bool:
    """Whether ``nP = O``, decided from division polynomials alone."""
    if P.is_infinity:
        return True
    fn = (polys or {}).get(n) or division_poly(n, curve)
    vanishes = poly_eval(fn, P.x).is_zero()
    if n % 2 == 0:
        return vanishes or P.y.is_zero()
    return vanishes


# ---------------------------------------------------------------------------
# torsion enumeration


@dataclass
class Torsion:
    curve: Curve
    E2: list[Point]
    E4: list[Point]
    E8: list[Point]
    orders: dict[Point, int]
    scratch_levels: int = 0
    checks: dict[str, bool] = field(default_factory=dict)

    def census(self) -> tuple[int, int, int, int]:
        counts = {1: 0, 2: 0, 4: 0, 8: 0}
        for P in self.E8:
            counts[self.orders[P]] += 1
        return counts[1], counts[2], counts[4], counts[8]

    def coordinates(self) -> list[TowerElement]:
        out = []
        for P in self.E8:
            if not P.is_infinity:
                out.extend((P.x, P.y))
        return out

    def to_json(self) -> list[dict]:
        out = []
        for P in self.E8:
            d = P.to_json()
            d["order"] = self.orders[P]
            out.append(d)
        return out


def enumerate_torsion(curve: Curve, g=None, samples: int = 200, seed: int = 0) -> Torsion:
    """All of ``E[2]``, ``E[4]``, ``E[8]`` by repeated halving.

    When a generator set ``g`` is given, the curve must live in its tower, so
    every coordinate is certified to lie there.  Besides cardinalities this
    checks group closure on ``samples`` random pairs and certifies every point
    of order 8 with the division polynomials.
    """
    if g is not None and curve.tower != g.tower:
        raise TowerError("curve and generator set live in different towers")
    stats = HalvingStats()
    E2 = sorted(curve.two_torsion(), key=Point.sort_key)
    E4set = set(E2)
    for P in E2:
        if not P.is_infinity:
            E4set.update(halve(P, curve, stats=stats))
    E4 = sorted(E4set, key=Point.sort_key)
    if len(E4) != 16:
        raise InvariantViolation(f"|E[4]| = {len(E4)}, expected 16")
    E8set = set(E4)
    for P in E4:
        if not P.is_infinity and not P.y.is_zero():
            E8set.update(halve(P, curve, stats=stats))
    E8 = sorted(E8set, key=Point.sort_key)
    if len(E8) != 64:
        raise InvariantViolation(f"|E[8]| = {len(E8)}, expected 64")

    orders = {P: point_order(curve, P) for P in E8}
    tors = Torsion(curve, E2, E4, E8, orders, stats.scratch_levels)
    checks = tors.checks
    checks["on_curve"] = all(curve.contains(P) for P in E8)
    checks["census"] = tors.census() == (1, 3, 12, 48)

    doubled = {}
    for P in E8:
        D = curve.double(P)
        doubled[D] = doubled.get(D, 0) + 1
    checks["doubling_4_to_1"] = set(doubled) == E4set and all(v == 4 for v in doubled.values())

    rng = random.Random(seed)
    closed = True
    for _ in range(samples):
        P, Q = rng.choice(E8), rng.choice(E8)
        if curve.add(P, Q) not in E8set:
            closed = False
            break
    checks["closure_sampled"] = closed

    f4, f8 = division_poly(4, curve), division_poly(8, curve)
    cert = True
    for P in E8:
        if orders[P] != 8:
            continue
        if not poly_eval(f8, P.x).is_zero() or poly_eval(f4, P.x).is_zero():
            cert = False
            break
        if curve.mul(4, P) not in E2 or curve.mul(4, P).is_infinity:
            cert = False
            break
    checks["order8_certified"] = cert
    bad = [k for k, v in checks.items() if not v]
    if bad:
        raise InvariantViolation(f"torsion checks failed: {bad}")
    return tors
