"""Exact computations with the 8-division field of ``y^2 = (x - a1)(x - a2)(x - a3)``.

Modules:

* :mod:`~divfield.exactfield`: quadratic towers over Q and linear algebra over Q;
* :mod:`~divfield.towergen`: the generators ``zeta4, A_i, zeta8, B_i`` and their identities;
* :mod:`~divfield.ecurve`: group law, halving, division polynomials, ``E[8]``;
* :mod:`~divfield.galois`: tower automorphisms and their action on ``E[8]``;
* :mod:`~divfield.congruence`: finite quotients of ``Gamma(2)`` at 2-power level;
* :mod:`~divfield.cli`: the ``divfield`` command.
"""

from .exactfield import QQ, Tower, TowerElement, adjoin_sqrt, rational, sqrt_in_tower
from .towergen import CurveInput, GeneratorSet, build_tower, verify_identities
from .ecurve import Curve, Point, enumerate_torsion, halve

__version__ = "0.1.0"

__all__ = [
    "QQ",
    "Tower",
    "TowerElement",
    "adjoin_sqrt",
    "rational",
    "sqrt_in_tower",
    "CurveInput",
    "GeneratorSet",
    "build_tower",
    "verify_identities",
    "Curve",
    "Point",
    "enumerate_torsion",
    "halve",
]
