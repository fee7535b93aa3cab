"""Exact arithmetic in towers of quadratic extensions of the rationals.

A tower is built from Q by adjoining square roots one level at a time.  An
element of a tower with ``k`` levels is a vector of ``2**k`` rationals over
the power-product basis: index ``S`` (a bitmask of levels) stands for the
product of the adjoined roots whose level bit is set in ``S``.  Levels are
ordered by adjunction, so the top level is the highest bit and an element
splits as ``a + b*s`` with ``a``, ``b`` in the sub-tower.

Arithmetic works on raw coefficient lists recursively over the top level;
the public :class:`TowerElement` wraps a list with its :class:`Tower`.
"""

from __future__ import annotations

import hashlib
import json
from numbers import Rational as _RationalABC
from typing import Iterable, Optional, Sequence

import gmpy2
from gmpy2 import mpq

__all__ = [
    "Rational",
    "rational",
    "format_rational",
    "QQ",
    "Tower",
    "TowerElement",
    "TowerError",
    "DegenerateRadicandError",
    "adjoin_sqrt",
    "sqrt_in_tower",
    "rational_sqrt",
    "Echelon",
    "solve_rational",
    "subalgebra_closure",
    "subalgebra_membership",
]

Rational = type(mpq(0))
ZERO = mpq(0)
ONE = mpq(1)
HALF = mpq(1, 2)


class TowerError(ValueError):
    """Structural misuse: mismatched towers, bad labels, bad coefficient vectors."""


class DegenerateRadicandError(TowerError):
    """Raised when asked to adjoin the square root of zero."""


def rational(value) -> Rational:
    """Coerce ints, ``Fraction``, ``mpq`` and ``"p/q"`` strings to an exact rational.

    Floats are rejected: nothing in this package is approximate.
    """
    if isinstance(value, Rational):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, _RationalABC):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                num, den = text.split("/")
                return mpq(int(num), int(den))
            return mpq(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not an exact rational: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_rational(q) -> str:
    q = rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rational_sqrt(q: Rational) -> Optional[Rational]:
    """Nonnegative square root of ``q`` if it is a rational square."""
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    if not (gmpy2.is_square(num) and gmpy2.is_square(den)):
        return None
    return mpq(gmpy2.isqrt(num), gmpy2.isqrt(den))


# ---------------------------------------------------------------------------
# raw coefficient-list arithmetic
#
# ``rads[k]`` is the coefficient list (length 2**k) of the level-k radicand.
# Every routine takes lists whose length is a power of two no larger than
# 2**len(rads) and returns fresh lists.


def _zeros(n):
    return [ZERO] * n


def _add(x, y):
    return [a + b for a, b in zip(x, y)]


def _sub(x, y):
    return [a - b for a, b in zip(x, y)]


def _scale(x, c):
    return [a * c for a in x]


def _mul(x, y, rads):
    n = len(x)
    if n == 1:
        return [x[0] * y[0]]
    if not any(x[1:]):
        c = x[0]
        return [c * b for b in y] if c else _zeros(n)
    if not any(y[1:]):
        c = y[0]
        return [c * a for a in x] if c else _zeros(n)
    h = n >> 1
    d = rads[h.bit_length() - 1]
    a, b = x[:h], x[h:]
    c, e = y[:h], y[h:]
    bz, ez = not any(b), not any(e)
    if bz:
        return _mul(a, c, rads) + _mul(a, e, rads)
    if ez:
        return _mul(a, c, rads) + _mul(b, c, rads)
    az, cz = not any(a), not any(c)
    be = _mul(b, e, rads)
    lo = _mul(be, d, rads)
    if az and cz:
        return lo + _zeros(h)
    if az:
        return lo + _mul(b, c, rads)
    if cz:
        return lo + _mul(a, e, rads)
    ac = _mul(a, c, rads)
    cross = _mul(_add(a, b), _add(c, e), rads)
    hi = [p - q - r for p, q, r in zip(cross, ac, be)]
    return _add(ac, lo) + hi


def _inv(x, rads):
    n = len(x)
    if n == 1:
        if not x[0]:
            raise ZeroDivisionError("inverse of zero in tower")
        return [1 / x[0]]
    h = n >> 1
    a, b = x[:h], x[h:]
    if not any(b):
        return _inv(a, rads) + _zeros(h)
    d = rads[h.bit_length() - 1]
    norm = _sub(_mul(a, a, rads), _mul(_mul(b, b, rads), d, rads))
    ni = _inv(norm, rads)
    return _mul(a, ni, rads) + [-v for v in _mul(b, ni, rads)]


def _sqrt(x, rads):
    """Some square root of ``x`` in the (sub)tower, or None.

    Norm descent over the top level: if ``x = (u + v s)**2`` then
    ``a**2 - b**2 d = (u**2 - v**2 d)**2`` and ``(a +- n)/2`` is ``u**2``
    for one choice of sign.
    """
    n = len(x)
    if n == 1:
        r = rational_sqrt(x[0])
        return None if r is None else [r]
    h = n >> 1
    d = rads[h.bit_length() - 1]
    a, b = x[:h], x[h:]
    if not any(b):
        r = _sqrt(a, rads)
        if r is not None:
            return r + _zeros(h)
        v = _sqrt(_mul(a, _inv(d, rads), rads), rads)
        if v is not None:
            return _zeros(h) + v
        return None
    norm = _sub(_mul(a, a, rads), _mul(_mul(b, b, rads), d, rads))
    m = _sqrt(norm, rads)
    if m is None:
        return None
    for t in (_add(a, m), _sub(a, m)):
        u = _sqrt(_scale(t, HALF), rads)
        if u is not None and any(u):
            v = _mul(b, _inv(_scale(u, mpq(2)), rads), rads)
            return u + v
    return None


def _canonical_sign(x):
    for c in x:
        if c:
            return x if c > 0 else [-v for v in x]
    return x


# ---------------------------------------------------------------------------
# towers and elements


class Tower:
    """An ordered list of quadratic adjunctions over Q.

    Towers are immutable.  Two towers with the same labels and radicands
    compare equal, so elements built independently from the same recipe
    interoperate.  Use :func:`adjoin_sqrt` to grow a tower; the constructor
    trusts its input and does not check that radicands are non-squares.
    """

    __slots__ = ("levels", "_rads", "_key", "_prefixes")

    def __init__(self, levels: Sequence[tuple[str, "TowerElement"]] = ()):
        levels = tuple(levels)
        labels = [lab for lab, _ in levels]
        if len(set(labels)) != len(labels):
            raise TowerError(f"duplicate level labels: {labels}")
        rads = []
        for k, (label, rad) in enumerate(levels):
            if not isinstance(rad, TowerElement) or rad.tower.depth != k:
                raise TowerError(f"radicand of level {label!r} must live in the sub-tower of depth {k}")
            if rad.tower.levels != levels[:k]:
                raise TowerError(f"radicand of level {label!r} belongs to a different tower")
            if rad.is_zero():
                raise DegenerateRadicandError(f"radicand of level {label!r} is zero")
            rads.append(list(rad.coeffs))
        self.levels = levels
        self._rads = rads
        self._key = tuple((lab, rad.coeffs) for lab, rad in levels)
        self._prefixes = {}

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def dim(self) -> int:
        return 1 << len(self.levels)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.levels)

    def level_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise TowerError(f"no level labelled {label!r}") from None

    def prefix(self, k: int) -> "Tower":
        """The sub-tower made of the first ``k`` levels."""
        if k == self.depth:
            return self
        if not 0 <= k < self.depth:
            raise TowerError(f"prefix depth {k} out of range")
        if k not in self._prefixes:
            self._prefixes[k] = self.levels[k][1].tower
        return self._prefixes[k]

    def is_prefix_of(self, other: "Tower") -> bool:
        return self.depth <= other.depth and other.levels[: self.depth] == self.levels

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Tower):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Tower({', '.join(self.labels) or 'Q'}; dim={self.dim})"

    # constructors -------------------------------------------------------

    def element(self, coeffs: Iterable) -> "TowerElement":
        return TowerElement(self, [rational(c) for c in coeffs])

    def scalar(self, q) -> "TowerElement":
        c = _zeros(self.dim)
        c[0] = rational(q)
        return TowerElement(self, c)

    def zero(self) -> "TowerElement":
        return TowerElement(self, _zeros(self.dim))

    def one(self) -> "TowerElement":
        return self.scalar(1)

    def gen(self, label: str) -> "TowerElement":
        """The adjoined square root at level ``label``."""
        k = self.level_index(label)
        c = _zeros(self.dim)
        c[1 << k] = ONE
        return TowerElement(self, c)

    def basis_element(self, mask: int) -> "TowerElement":
        c = _zeros(self.dim)
        c[mask] = ONE
        return TowerElement(self, c)

    def radicand(self, label: str) -> "TowerElement":
        return self.levels[self.level_index(label)][1]

    # serialization -------------------------------------------------------

    def tower_id(self) -> str:
        payload = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    def to_json(self) -> list[dict]:
        return [
            {"label": lab, "radicand": [format_rational(c) for c in rad.coeffs]}
            for lab, rad in self.levels
        ]

    @classmethod
    def from_json(cls, data: list[dict]) -> "Tower":
        tower = QQ
        for level in data:
            rad = tower.element(rational(c) for c in level["radicand"])
            tower = Tower(tower.levels + ((level["label"], rad),))
        return tower


class TowerElement:
    """An element of a :class:`Tower`, stored as a dense rational vector."""

    __slots__ = ("tower", "coeffs", "_hash")

    def __init__(self, tower: Tower, coeffs):
        coeffs = tuple(coeffs)
        if len(coeffs) != tower.dim:
            raise TowerError(f"expected {tower.dim} coefficients, got {len(coeffs)}")
        self.tower = tower
        self.coeffs = coeffs
        self._hash = None

    # coercion ------------------------------------------------------------

    def _coerce(self, other) -> "TowerElement":
        if isinstance(other, TowerElement):
            if other.tower is self.tower or other.tower == self.tower:
                return other
            raise TowerError(f"mismatched towers: {self.tower!r} vs {other.tower!r}")
        if isinstance(other, (int, _RationalABC, Rational)) and not isinstance(other, bool):
            return self.tower.scalar(other)
        raise TypeError(f"cannot combine TowerElement with {type(other).__name__}")

    # arithmetic ----------------------------------------------------------

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return TowerElement(self.tower, _add(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return TowerElement(self.tower, _sub(self.coeffs, other.coeffs))

    def __rsub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return other - self

    def __neg__(self):
        return TowerElement(self.tower, [-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            c = rational(other)
            return TowerElement(self.tower, [v * c for v in self.coeffs])
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return TowerElement(self.tower, _mul(list(self.coeffs), list(other.coeffs), self.tower._rads))

    __rmul__ = __mul__

    def inverse(self) -> "TowerElement":
        return TowerElement(self.tower, _inv(list(self.coeffs), self.tower._rads))

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            c = rational(other)
            if not c:
                raise ZeroDivisionError("division by zero")
            return TowerElement(self.tower, [v / c for v in self.coeffs])
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = self.tower.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # predicates ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_scalar(self) -> bool:
        return not any(self.coeffs[1:])

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, TowerElement):
            return self.tower == other.tower and self.coeffs == other.coeffs
        if isinstance(other, (int, _RationalABC, Rational)) and not isinstance(other, bool):
            return self.is_scalar() and self.coeffs[0] == rational(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.coeffs)
        return self._hash

    def sort_key(self) -> tuple:
        return self.coeffs

    # structure -----------------------------------------------------------

    def embed(self, tower: Tower) -> "TowerElement":
        """Pad this element into a tower that extends its own."""
        if tower == self.tower:
            return self if tower is self.tower else TowerElement(tower, self.coeffs)
        if not self.tower.is_prefix_of(tower):
            raise TowerError(f"{tower!r} does not extend {self.tower!r}")
        return TowerElement(tower, self.coeffs + (ZERO,) * (tower.dim - self.tower.dim))

    def restrict(self, tower: Tower) -> Optional["TowerElement"]:
        """The same element viewed in the sub-tower ``tower``, or None if it is not there."""
        if not tower.is_prefix_of(self.tower):
            raise TowerError(f"{tower!r} is not a sub-tower of {self.tower!r}")
        if any(self.coeffs[tower.dim:]):
            return None
        return TowerElement(tower, self.coeffs[: tower.dim])

    def canonical(self) -> "TowerElement":
        """``self`` or ``-self``, whichever has positive first nonzero coefficient."""
        return TowerElement(self.tower, _canonical_sign(list(self.coeffs)))

    def to_json(self) -> dict:
        return {"tower_id": self.tower.tower_id(), "coeffs": [format_rational(c) for c in self.coeffs]}

    def __repr__(self):
        terms = []
        labels = self.tower.labels
        for mask, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "*".join(labels[k] for k in range(len(labels)) if mask >> k & 1)
            coef = format_rational(c)
            terms.append(coef if not mono else f"{coef}*{mono}")
        return " + ".join(terms) if terms else "0"


QQ = Tower()


def sqrt_in_tower(x: TowerElement) -> Optional[TowerElement]:
    """A square root of ``x`` in its own tower (canonical sign), or None."""
    r = _sqrt(list(x.coeffs), x.tower._rads)
    if r is None:
        return None
    return TowerElement(x.tower, _canonical_sign(r))


def adjoin_sqrt(tower: Tower, d: TowerElement, label: str) -> tuple[Tower, TowerElement]:
    """Adjoin a square root of ``d`` unless one already exists.

    Returns the (possibly unchanged) tower and the square root as an
    element of it.  When ``d`` is already a square the canonical root is
    returned and no level is added.
    """
    if d.tower != tower:
        d = d.embed(tower)
    if d.is_zero():
        raise DegenerateRadicandError(f"cannot adjoin the square root of zero ({label!r})")
    r = sqrt_in_tower(d)
    if r is not None:
        return tower, r
    if label in tower.labels:
        raise TowerError(f"label {label!r} already used")
    new = Tower(tower.levels + ((label, TowerElement(tower, d.coeffs)),))
    return new, new.gen(label)


# ---------------------------------------------------------------------------
# linear algebra over Q and subalgebra closure


class Echelon:
    """Incrementally maintained reduced row-echelon basis of a subspace of Q^n."""

    def __init__(self, n: int):
        self.n = n
        self.rows: dict[int, list] = {}

    def __len__(self):
        return len(self.rows)

    def reduce(self, v: Sequence) -> list:
        v = list(v)
        for p in sorted(self.rows):
            c = v[p]
            if c:
                row = self.rows[p]
                v = [a - c * b for a, b in zip(v, row)]
        return v

    def contains(self, v: Sequence) -> bool:
        return not any(self.reduce(v))

    def add(self, v: Sequence) -> bool:
        """Insert ``v``; return True if it enlarged the span."""
        r = self.reduce(v)
        piv = next((i for i, c in enumerate(r) if c), None)
        if piv is None:
            return False
        inv = 1 / r[piv]
        r = [c * inv for c in r]
        for p, row in self.rows.items():
            c = row[piv]
            if c:
                self.rows[p] = [a - c * b for a, b in zip(row, r)]
        self.rows[piv] = r
        return True

    def basis(self) -> list[list]:
        return [self.rows[p] for p in sorted(self.rows)]


def solve_rational(matrix: Sequence[Sequence], rhs: Sequence) -> Optional[list]:
    """Solve ``matrix @ x = rhs`` over Q by Gaussian elimination; None if inconsistent.

    Free variables are set to zero.
    """
    rows = [list(map(rational, r)) + [rational(b)] for r, b in zip(matrix, rhs)]
    ncols = len(rows[0]) - 1 if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    if any(row[-1] for row in rows[r:]):
        return None
    x = [ZERO] * ncols
    for i, c in enumerate(pivots):
        x[c] = rows[i][-1]
    return x


def subalgebra_closure(generators: Sequence[TowerElement], tower: Optional[Tower] = None) -> Echelon:
    """Basis of the Q-subalgebra generated by ``generators`` (which is a subfield).

    Generators already in the current subalgebra are skipped; each new one is
    recorded and the span is closed under multiplication by every recorded
    generator.  A span containing 1 that is closed under multiplication by a
    generating set is the whole subalgebra.
    """
    if tower is None:
        if not generators:
            raise TowerError("need a tower or at least one generator")
        tower = generators[0].tower
    for g in generators:
        if g.tower != tower:
            raise TowerError("generators live in different towers")
    space = Echelon(tower.dim)
    space.add(tower.one().coeffs)
    elements = [tower.one()]
    used: list[TowerElement] = []
    for g in generators:
        if len(space) == tower.dim:
            break
        if space.contains(g.coeffs):
            continue
        used.append(g)
        queue = list(elements)
        # Elements already closed under the earlier generators only need g;
        # anything new needs every recorded generator.
        pending = [(e, [g]) for e in queue]
        while pending:
            e, multipliers = pending.pop()
            for h in multipliers:
                prod = e * h
                if space.add(prod.coeffs):
                    if len(space) == tower.dim:
                        return space
                    elements.append(prod)
                    pending.append((prod, list(used)))
    return space


def subalgebra_membership(generators: Sequence[TowerElement], query: TowerElement) -> bool:
    """Whether ``query`` lies in the subfield of the tower generated by ``generators``."""
    for g in generators:
        if g.tower != query.tower:
            raise TowerError("generators and query live in different towers")
    return subalgebra_closure(list(generators), query.tower).contains(query.coeffs)
