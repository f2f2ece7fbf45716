"""Closed-form torsion values for the interval model cases.

The analytic and metric torsions of a manifold are outside this package
(they need zeta-regularized determinants of de Rham Laplacians).  For the
two interval models they have simple closed forms, recorded here as
constants so tests and demos can check the combinatorial machinery against
them and verify the ratio identities relating the three torsions.

Conventions: the interval carries the standard metric and the trivial
one-dimensional flat line bundle.  "Flow-through" is the Morse function
h(x) = x on ([a,b], {a}, {b}) — no critical points, hence no cells.
"Interior-minimum" is a quadratic well on ([a,b], empty, {a,b}) — one
index-0 critical point, hence a single 0-cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class ModelTorsion:
    """Stored torsion values of one model case.

    t_comb is reproduced by this package; t_an and t_met are analytic
    reference constants.  The Reidemeister torsion and the
    analytic/Reidemeister ratio follow by definition.
    """

    name: str
    t_comb: float
    t_an: float
    t_met: float

    @property
    def t_re(self) -> float:
        return self.t_comb + self.t_met

    @property
    def log_ratio(self) -> float:
        return self.t_an - self.t_re


def interval_flow_through() -> ModelTorsion:
    """([a,b], {a}): gradient flows through, no cells, torsions (0, log2/2, 0)."""
    return ModelTorsion("interval, flow-through", 0.0, 0.5 * LOG2, 0.0)


def interval_interior_minimum(length: float = 1.0) -> ModelTorsion:
    """([a,b], empty): one interior minimum; the metric part carries log(b-a)."""
    if length <= 0:
        raise ValueError("interval length must be positive")
    return ModelTorsion(
        f"interval of length {length:g}, interior minimum",
        0.0,
        0.5 * (LOG2 + math.log(length)),
        0.5 * math.log(length),
    )


def cylinder_ratio(euler_characteristic: float) -> float:
    """Ratio of analytic to Reidemeister torsion of a cylinder over a closed
    base, glued flow-through along one end: chi(base) * log(2) / 2."""
    return euler_characteristic * LOG2 / 2


def boundary_ratio(boundary_euler_characteristic: float) -> float:
    """The same ratio expressed through boundary data alone:
    chi(boundary) * log(2) / 4."""
    return boundary_euler_characteristic * LOG2 / 4
