"""Explicit generators of the 4- and 8-division fields and the tower holding them.

For a curve ``y^2 = (x - a1)(x - a2)(x - a3)`` the generators are

* ``A_i`` with ``A_i^2 = a_{i+1} - a_{i+2}`` (indices mod 3),
* ``B_i`` with ``B_i^2 = A_i (A_{i+1} + zeta4 A_{i+2})``,
* ``zeta4``, ``zeta8`` with ``zeta8^2 = zeta4``, ``zeta4^2 = -1``,

and ``B_i' = zeta4 A_i^2 / B_i`` is the conjugate root with
``B_i'^2 = A_i (A_{i+1} - zeta4 A_{i+2})``.  A quartic ``y^2 = prod (x - a_i)``
is handled through the cubic with roots ``g_i = (a_{i+1} + a_{i+2})(a_i + a_4)``,
whose root differences are ``(a_i - a_4)(a_{i+1} - a_{i+2})``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .exactfield import (
    QQ,
    Rational,
    Tower,
    TowerElement,
    adjoin_sqrt,
    format_rational,
    rational,
)

__all__ = [
    "CurveInput",
    "GeneratorSet",
    "IdentityCheck",
    "IdentityReport",
    "DegenerateModelError",
    "ADJUNCTION_ORDER",
    "compute_gamma",
    "working_cubic",
    "build_tower",
    "verify_identities",
]

ADJUNCTION_ORDER = ("zeta4", "A1", "A2", "A3", "zeta8", "B1", "B2", "B3")


class DegenerateModelError(ValueError):
    """Repeated roots, or a quartic whose cubic model has repeated roots."""


@dataclass(frozen=True)
class CurveInput:
    mode: str
    roots: tuple[Rational, ...]

    def __post_init__(self):
        if self.mode not in ("degree3", "degree4"):
            raise ValueError(f"mode must be 'degree3' or 'degree4', not {self.mode!r}")
        roots = tuple(rational(r) for r in self.roots)
        want = 3 if self.mode == "degree3" else 4
        if len(roots) != want:
            raise ValueError(f"{self.mode} needs {want} roots, got {len(roots)}")
        if len(set(roots)) != len(roots):
            raise DegenerateModelError(f"roots must be distinct: {[format_rational(r) for r in roots]}")
        object.__setattr__(self, "roots", roots)

    @classmethod
    def from_json(cls, data: dict) -> "CurveInput":
        return cls(data["mode"], tuple(rational(r) for r in data["roots"]))

    def to_json(self) -> dict:
        return {"mode": self.mode, "roots": [format_rational(r) for r in self.roots]}


def compute_gamma(roots: Sequence) -> tuple[Rational, Rational, Rational]:
    """``g_i = (a_{i+1} + a_{i+2})(a_i + a_4)`` for a quartic with roots ``a_1..a_4``."""
    a = [rational(r) for r in roots]
    if len(a) != 4:
        raise ValueError("compute_gamma needs 4 roots")
    if len(set(a)) != 4:
        raise DegenerateModelError("quartic roots must be distinct")
    gamma = tuple((a[(i + 1) % 3] + a[(i + 2) % 3]) * (a[i] + a[3]) for i in range(3))
    for i in range(3):
        lhs = gamma[(i + 1) % 3] - gamma[(i + 2) % 3]
        rhs = (a[i] - a[3]) * (a[(i + 1) % 3] - a[(i + 2) % 3])
        if lhs != rhs:  # pragma: no cover - algebraic identity
            raise AssertionError(f"gamma difference identity failed at i={i + 1}")
    return gamma


def working_cubic(curve: CurveInput) -> tuple[Rational, Rational, Rational]:
    """Roots of the cubic model the torsion pipeline runs on."""
    if curve.mode == "degree3":
        return curve.roots
    gamma = compute_gamma(curve.roots)
    if len(set(gamma)) != 3:
        raise DegenerateModelError(f"cubic model has repeated roots {gamma}")
    return gamma


@dataclass(frozen=True)
class GeneratorSet:
    """All generators, living in one tower.

    ``collapsed`` names the generators whose radicand was already a square,
    so they add no level; every other generator is the tower level of the
    same name.
    """

    curve: CurveInput
    tower: Tower
    alpha: tuple[TowerElement, ...]
    gamma: Optional[tuple[TowerElement, ...]]
    A: tuple[TowerElement, ...]
    B: tuple[TowerElement, ...]
    Bp: tuple[TowerElement, ...]
    zeta4: TowerElement
    zeta8: TowerElement
    collapsed: tuple[str, ...] = field(default=())

    @property
    def named(self) -> dict[str, TowerElement]:
        d = {"zeta4": self.zeta4, "zeta8": self.zeta8}
        for i in range(3):
            d[f"A{i + 1}"] = self.A[i]
            d[f"B{i + 1}"] = self.B[i]
        return d

    def generators(self) -> list[TowerElement]:
        """The adjoined generators in adjunction order."""
        named = self.named
        return [named[name] for name in ADJUNCTION_ORDER]

    def summary(self) -> dict:
        return {
            "curve": self.curve.to_json(),
            "working_roots": [format_rational(a.coeffs[0]) for a in self.alpha],
            "dimension": self.tower.dim,
            "levels": self.tower.to_json(),
            "collapsed": list(self.collapsed),
            "tower_id": self.tower.tower_id(),
        }


def build_tower(curve: CurveInput) -> GeneratorSet:
    """Adjoin ``zeta4, A1, A2, A3, zeta8, B1, B2, B3`` to Q in that order.

    Radicands that are already squares add no level; the existing
    canonical root stands in for the generator.
    """
    roots = working_cubic(curve)
    tower = QQ
    gens: dict[str, TowerElement] = {}
    collapsed = []

    def adjoin(name, radicand):
        nonlocal tower
        new, root = adjoin_sqrt(tower, radicand, name)
        if new is tower:
            collapsed.append(name)
        tower = new
        gens[name] = root

    def cur(name):
        return gens[name].embed(tower)

    adjoin("zeta4", tower.scalar(-1))
    for i in range(3):
        adjoin(f"A{i + 1}", tower.scalar(roots[(i + 1) % 3] - roots[(i + 2) % 3]))
    adjoin("zeta8", cur("zeta4"))
    for i in range(3):
        Ai, Aj, Ak = (cur(f"A{(i + t) % 3 + 1}") for t in range(3))
        adjoin(f"B{i + 1}", Ai * (Aj + cur("zeta4") * Ak))

    final = {name: g.embed(tower) for name, g in gens.items()}
    z4 = final["zeta4"]
    A = tuple(final[f"A{i + 1}"] for i in range(3))
    B = tuple(final[f"B{i + 1}"] for i in range(3))
    Bp = tuple(z4 * A[i] * A[i] / B[i] for i in range(3))
    alpha = tuple(tower.scalar(r) for r in roots)
    gamma = alpha if curve.mode == "degree4" else None
    return GeneratorSet(curve, tower, alpha, gamma, A, B, Bp, z4, final["zeta8"], tuple(collapsed))


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    index: int
    sign: str
    passed: bool
    skipped: bool = False
    note: str = ""

    def to_json(self) -> dict:
        d = {"identity": self.name, "i": self.index, "sign": self.sign, "passed": self.passed}
        if self.skipped:
            d["skipped"] = True
            d["note"] = self.note
        return d


@dataclass
class IdentityReport:
    checks: list[IdentityCheck]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[IdentityCheck]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {"all_passed": self.all_passed, "checks": [c.to_json() for c in self.checks]}


def verify_identities(g: GeneratorSet) -> IdentityReport:
    """Check every stated identity between the generators, exactly.

    Identities, for each i mod 3:

    * ``sum_of_squares``: ``A_1^2 + A_2^2 + A_3^2 = 0`` (once);
    * ``minus_A4``: ``A_i(A_{i+1}+z A_{i+2}) * A_i(A_{i+1}-z A_{i+2}) = -A_i^4``;
    * ``B_plus_Bp``: ``(B_i +- B_i')^2 = 2 A_i A_{i+1} +- 2 z A_i^2``;
    * ``B_plus_zBp``: ``(B_i +- z B_i')^2 = 2 z A_i A_{i+2} -+ 2 A_i^2``;
    * ``sqrt_AiAi2``: ``[(1-z)^-1 (B_i - B_i') B_{i+2} / (A_i + z A_{i+1})]^2 = A_i A_{i+2}``,
      skipped when the denominator vanishes;
    * ``B_times_Bp`` and ``Bp_square``: the defining relations of ``B_i'``;
    * ``root_1mz`` and ``root_zeta8``: the square roots ``(1 -+ z)^-1 (B_i +- B_i')`` and
      ``(zeta8 + zeta8^-1)^-1 (B_i -+ z B_i')`` square to ``-A_i^2 +- z A_i A_{i+1}`` and
      ``z A_i A_{i+2} +- A_i^2``.

    Here ``z`` is ``zeta4``.
    """
    A, B, Bp, z = g.A, g.B, g.Bp, g.zeta4
    one = g.tower.one()
    checks = [IdentityCheck("sum_of_squares", 0, "", (A[0] * A[0] + A[1] * A[1] + A[2] * A[2]).is_zero())]
    z8sum_inv = (g.zeta8 + g.zeta8.inverse()).inverse()
    for i in range(3):
        Ai, Aj, Ak = A[i], A[(i + 1) % 3], A[(i + 2) % 3]
        idx = i + 1
        Ai2 = Ai * Ai
        lhs = (Ai * (Aj + z * Ak)) * (Ai * (Aj - z * Ak))
        checks.append(IdentityCheck("minus_A4", idx, "", lhs == -(Ai2 * Ai2)))
        checks.append(IdentityCheck("B_times_Bp", idx, "", B[i] * Bp[i] == z * Ai2))
        checks.append(IdentityCheck("Bp_square", idx, "", Bp[i] * Bp[i] == Ai * (Aj - z * Ak)))
        for sgn, s in (("+", 1), ("-", -1)):
            t = B[i] + Bp[i] * s
            checks.append(IdentityCheck("B_plus_Bp", idx, sgn, t * t == 2 * Ai * Aj + z * Ai2 * (2 * s)))
            t = B[i] + z * Bp[i] * s
            checks.append(IdentityCheck("B_plus_zBp", idx, sgn, t * t == 2 * z * Ai * Ak - Ai2 * (2 * s)))
            r = (one - z * s).inverse() * (B[i] + Bp[i] * s)
            checks.append(IdentityCheck("root_1mz", idx, sgn, r * r == -Ai2 + z * Ai * Aj * s))
            r = z8sum_inv * (B[i] - z * Bp[i] * s)
            checks.append(IdentityCheck("root_zeta8", idx, sgn, r * r == z * Ai * Ak + Ai2 * s))
        den = Ai + z * Aj
        if den.is_zero():
            checks.append(
                IdentityCheck("sqrt_AiAi2", idx, "", True, skipped=True, note="A_i + zeta4 A_{i+1} = 0")
            )
        else:
            r = (one - z).inverse() * (B[i] - Bp[i]) * B[(i + 2) % 3] / den
            checks.append(IdentityCheck("sqrt_AiAi2", idx, "", r * r == Ai * Ak))
    return IdentityReport(checks)
