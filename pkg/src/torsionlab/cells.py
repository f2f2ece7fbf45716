"""Cochain complexes from twisted cell data.

A cell complex here is combinatorial input: ordered cell labels per degree
and, for each ((q+1)-cell, q-cell) pair, a group-ring word describing how
the attaching data winds through the symmetry group.  A representation
turns each word into a matrix block on a fiber, the blocks assemble into
differentials, and everything downstream (torsion, duality, gluing) is the
machinery of the complexes/exact modules applied to the result.

Words are lists of (element, coefficient) pairs.  An element may be a
group-element label ("t"), an integer n meaning the n-th power of the
generator labelled "t", or an explicit (label, power) pair; "e", 0 and
(label, 0) all mean the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .complexes import (
    COMPOSITION_TOL,
    CochainComplex,
    ComplexMorphism,
    tensor_product,
    torsion,
    torsion_via_laplacians,
)
from .errors import DataValidationError
from .exact import ComplexSES, long_sequence
from .vn import (
    HilbertModule,
    Morphism,
    TraceContext,
    complex_field,
    word_matrix,
)

UNITARITY_TOL = 1e-10

Word = Sequence[tuple[object, complex]]


# ---------------------------------------------------------------------------
# representations


class RegularRepresentation:
    """Finite group acting on itself, optionally tensored with a trivial fiber.

    One cell contributes an l^2(Gamma) (x) C^fiber block; incidence words
    act by right-regular permutation blocks and therefore commute with the
    left algebra action.
    """

    def __init__(self, context: TraceContext, fiber_dim: int = 1):
        if not context.is_group:
            raise DataValidationError(
                "the regular representation needs a finite-group context")
        if fiber_dim < 1:
            raise DataValidationError("fiber dimension must be >= 1")
        self.context = context
        self.fiber_dim = int(fiber_dim)
        self.block_dim = context.size * self.fiber_dim

    def module(self, ncells: int) -> HilbertModule:
        return HilbertModule(self.context, ncells * self.block_dim,
                             fiber_dim=self.fiber_dim)

    def _element(self, spec) -> int:
        ctx = self.context
        if isinstance(spec, str):
            return ctx.element_index(spec)
        if isinstance(spec, tuple):
            label, power = spec
            return ctx.power(ctx.element_index(label), int(power))
        if isinstance(spec, (int, np.integer)):
            return ctx.power(ctx.element_index("t"), int(spec))
        raise DataValidationError(f"cannot resolve group element {spec!r}")

    def inverse_element(self, spec):
        ctx = self.context
        return ctx.labels[ctx.inverse(self._element(spec))]

    def word_matrix(self, word: Word) -> np.ndarray:
        resolved = [(self._element(e), complex(c)) for e, c in word]
        return word_matrix(resolved, self.context, self.fiber_dim)


class UnitaryRepresentation:
    """Explicit unitary matrices over the complex field, one per generator.

    Useful for holonomy twists: circle(holonomy lambda) uses the 1x1
    representation {"t": [[lambda]]}.  Each supplied matrix must be unitary
    to 1e-10; inverses are adjoints, so words with negative powers are fine.
    """

    def __init__(self, generators: Mapping[str, object]):
        self.context = complex_field()
        self.generators: dict[str, np.ndarray] = {}
        dim = None
        for label, raw in generators.items():
            mat = np.asarray(raw, dtype=np.complex128)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise DataValidationError(f"generator {label!r} is not square")
            if dim is None:
                dim = mat.shape[0]
            elif mat.shape[0] != dim:
                raise DataValidationError("generators act on different fibers")
            defect = np.linalg.norm(mat.conj().T @ mat - np.eye(dim), 2)
            if defect > UNITARITY_TOL:
                raise DataValidationError(
                    f"generator {label!r} is not unitary (defect {defect:.2e})")
            self.generators[label] = mat
        if dim is None:
            raise DataValidationError("a unitary representation needs generators")
        self.fiber_dim = int(dim)
        self.block_dim = self.fiber_dim

    def module(self, ncells: int) -> HilbertModule:
        return HilbertModule(self.context, ncells * self.block_dim)

    def _elem_matrix(self, spec) -> np.ndarray:
        if isinstance(spec, (int, np.integer)):
            spec = ("t", int(spec))
        if isinstance(spec, str):
            if spec == "e":
                return np.eye(self.fiber_dim, dtype=np.complex128)
            spec = (spec, 1)
        label, power = spec
        power = int(power)
        if label == "e":
            label, power = next(iter(self.generators)), 0
        if label not in self.generators:
            raise DataValidationError(f"unknown generator {label!r}")
        base = self.generators[label]
        if power < 0:
            base, power = base.conj().T, -power
        return np.linalg.matrix_power(base, power)

    def inverse_element(self, spec):
        if isinstance(spec, (int, np.integer)):
            return -int(spec)
        if isinstance(spec, str):
            return spec if spec == "e" else (spec, -1)
        label, power = spec
        return (label, -int(power))

    def word_matrix(self, word: Word) -> np.ndarray:
        total = np.zeros((self.fiber_dim, self.fiber_dim), np.complex128)
        for elem, coeff in word:
            total += complex(coeff) * self._elem_matrix(elem)
        return total


class InfiniteCyclic:
    """Marker representation for cells twisted over the integers.

    There is no finite matrix for the generator; complexes over Z live in
    the Laurent-operator world and are handled by the tower module
    (cw_to_laurent).  build_complex refuses these with a pointer there.
    """

    fiber_dim = 1
    block_dim = 1


def adjoint_word(rep, word: Word) -> list[tuple[object, complex]]:
    """Formal adjoint: invert every element, conjugate every coefficient."""
    return [(rep.inverse_element(e), np.conj(complex(c))) for e, c in word]


# ---------------------------------------------------------------------------
# cell complexes


@dataclass(frozen=True)
class TwistedCellComplex:
    """Combinatorial cells plus group-ring incidences plus a representation.

    cells maps degree -> ordered cell labels (degrees without cells may be
    omitted); incidences maps (to_cell, from_cell) with deg(to) =
    deg(from) + 1 to a word; top_degree fixes the degree window 0..d, which
    duality needs even when the top cells are absent.
    """

    representation: object
    cells: Mapping[int, Sequence[str]]
    incidences: Mapping[tuple[str, str], Word]
    top_degree: int

    def __post_init__(self):
        if self.top_degree < 0:
            raise DataValidationError("top degree must be >= 0")
        seen: dict[str, int] = {}
        for q, labels in self.cells.items():
            if not 0 <= q <= self.top_degree:
                raise DataValidationError(
                    f"cells in degree {q} outside window 0..{self.top_degree}")
            for label in labels:
                if label in seen:
                    raise DataValidationError(f"duplicate cell label {label!r}")
                seen[label] = q
        for (to_cell, from_cell), _ in self.incidences.items():
            if to_cell not in seen or from_cell not in seen:
                missing = to_cell if to_cell not in seen else from_cell
                raise DataValidationError(f"incidence names unknown cell {missing!r}")
            if seen[to_cell] != seen[from_cell] + 1:
                raise DataValidationError(
                    f"incidence ({to_cell!r}, {from_cell!r}) does not drop "
                    "exactly one degree")

    def degree_cells(self, q: int) -> list[str]:
        return list(self.cells.get(q, ()))

    def cell_degree(self, label: str) -> int:
        for q, labels in self.cells.items():
            if label in labels:
                return q
        raise DataValidationError(f"unknown cell {label!r}")


def build_complex(cw: TwistedCellComplex, validate: bool = True,
                  tol: float | None = None) -> CochainComplex:
    """Assemble the cochain complex of a cell complex under its representation.

    Raises DataValidationError naming the offending ((q+2)-cell, q-cell)
    pair if the incidence words do not compose to zero.
    """
    rep = cw.representation
    if isinstance(rep, InfiniteCyclic):
        raise DataValidationError(
            "infinite-cyclic twists have no finite matrices; convert with "
            "the tower module (cw_to_laurent) instead")
    block = rep.block_dim
    layers = [cw.degree_cells(q) for q in range(cw.top_degree + 1)]
    modules = [rep.module(len(layer)) for layer in layers]
    diffs = []
    for q in range(cw.top_degree):
        cols, rows = layers[q], layers[q + 1]
        mat = np.zeros((len(rows) * block, len(cols) * block), np.complex128)
        for (to_cell, from_cell), word in cw.incidences.items():
            if from_cell in cols and to_cell in rows:
                iy = rows.index(to_cell)
                ix = cols.index(from_cell)
                mat[iy * block:(iy + 1) * block,
                    ix * block:(ix + 1) * block] = rep.word_matrix(word)
        diffs.append(Morphism(modules[q], modules[q + 1], mat))
    c = CochainComplex(modules, diffs, 0, validate=False)
    if validate:
        _check_cell_composition(cw, c, layers, block, tol)
    return c


def _check_cell_composition(cw, c, layers, block, tol):
    factor = COMPOSITION_TOL if tol is None else tol
    for q in range(len(c.differentials) - 1):
        a, b = c.differentials[q + 1], c.differentials[q]
        if 0 in a.shape or 0 in b.shape:
            continue
        product = a.matrix @ b.matrix
        bound = factor * max(1e-300, a.norm() * b.norm())
        if np.linalg.norm(product, 2) <= bound:
            continue
        worst, worst_pair = 0.0, None
        for iz, z in enumerate(layers[q + 2]):
            for ix, x in enumerate(layers[q]):
                blk = product[iz * block:(iz + 1) * block,
                              ix * block:(ix + 1) * block]
                norm = float(np.linalg.norm(blk))
                if norm > worst:
                    worst, worst_pair = norm, (z, x)
        raise DataValidationError(
            "incidence words do not compose to zero "
            f"(worst block norm {worst:.3e})",
            location=f"cells {worst_pair}")


def t_comb(cw: TwistedCellComplex, rank_tol: float | None = None) -> float:
    """Combinatorial torsion: alternating weighted log det' of the Laplacians."""
    return torsion_via_laplacians(build_complex(cw), rank_tol)


def euler_characteristic(cw: TwistedCellComplex) -> float:
    return build_complex(cw, validate=False).euler_characteristic()


# ---------------------------------------------------------------------------
# duality


def dual_complex(cw: TwistedCellComplex) -> TwistedCellComplex:
    """Poincare dual: q-cells become (d-q)-cells, words become signed adjoints.

    The dual incidence for the pair dual(x) <- dual(y) is
    (-1)^(q(d-q)) times the adjoint of the original word for y <- x, which
    makes the built differentials satisfy delta^D_(d-q-1) = sign * delta_q^*
    with the identity reindexing of cells.
    """
    rep = cw.representation
    d = cw.top_degree
    cells = {d - q: tuple(labels) for q, labels in cw.cells.items()}
    incidences: dict[tuple[str, str], list] = {}
    for (to_cell, from_cell), word in cw.incidences.items():
        q = cw.cell_degree(from_cell)
        sign = (-1) ** (q * (d - q))
        flipped = [(e, sign * c) for e, c in adjoint_word(rep, word)]
        incidences[(from_cell, to_cell)] = flipped
    return TwistedCellComplex(rep, cells, incidences, d)


def duality_residual(cw: TwistedCellComplex, rank_tol: float | None = None) -> float:
    """|T_comb(M, lower) - (-1)^(d+1) T_comb of the dual| (Poincare duality)."""
    sign = (-1) ** (cw.top_degree + 1)
    return abs(t_comb(cw, rank_tol) - sign * t_comb(dual_complex(cw), rank_tol))


def flip_cell_signs(cw: TwistedCellComplex, labels: Iterable[str]) -> TwistedCellComplex:
    """Reverse the orientation of the named cells (negate their words)."""
    chosen = set(labels)
    unknown = chosen - {x for ls in cw.cells.values() for x in ls}
    if unknown:
        raise DataValidationError(f"unknown cells {sorted(unknown)!r}")
    incidences = {}
    for (to_cell, from_cell), word in cw.incidences.items():
        sign = (-1) ** ((to_cell in chosen) + (from_cell in chosen))
        incidences[(to_cell, from_cell)] = [(e, sign * c) for e, c in word]
    return TwistedCellComplex(cw.representation, cw.cells, incidences,
                              cw.top_degree)


# ---------------------------------------------------------------------------
# built-in examples


def point(rep) -> TwistedCellComplex:
    """One 0-cell, nothing else."""
    return TwistedCellComplex(rep, {0: ("pt",)}, {}, 0)


def interval_tau1(rep) -> TwistedCellComplex:
    """Interval rel one endpoint, gradient flowing through: no cells at all."""
    return TwistedCellComplex(rep, {}, {}, 1)


def interval_tau2(rep) -> TwistedCellComplex:
    """Interval rel both endpoints: a single interior minimum, no 1-cells."""
    return TwistedCellComplex(rep, {0: ("c",)}, {}, 1)


def circle(rep) -> TwistedCellComplex:
    """One minimum, one maximum, attaching word rho(t) - 1."""
    word = (("t", 1.0), ("e", -1.0))
    return TwistedCellComplex(rep, {0: ("min",), 1: ("max",)},
                              {("max", "min"): word}, 1)


def circle_holonomy(lam: complex) -> TwistedCellComplex:
    """The circle twisted by a 1-dimensional holonomy lambda (|lambda| = 1)."""
    return circle(UnitaryRepresentation({"t": [[lam]]}))


def disjoint_union(a: TwistedCellComplex, b: TwistedCellComplex) -> TwistedCellComplex:
    if a.representation is not b.representation and not _compatible_reps(
            a.representation, b.representation):
        raise DataValidationError("factors use different representations")
    overlap = ({x for ls in a.cells.values() for x in ls}
               & {x for ls in b.cells.values() for x in ls})
    if overlap:
        raise DataValidationError(f"cell labels collide: {sorted(overlap)!r}")
    d = max(a.top_degree, b.top_degree)
    cells = {q: tuple(a.degree_cells(q)) + tuple(b.degree_cells(q))
             for q in range(d + 1)
             if a.degree_cells(q) or b.degree_cells(q)}
    incidences = dict(a.incidences)
    incidences.update(b.incidences)
    return TwistedCellComplex(a.representation, cells, incidences, d)


def relabel(cw: TwistedCellComplex, prefix: str) -> TwistedCellComplex:
    """Prefix every cell label (to make unions and gluings collision-free)."""
    cells = {q: tuple(prefix + x for x in labels)
             for q, labels in cw.cells.items()}
    incidences = {(prefix + y, prefix + x): word
                  for (y, x), word in cw.incidences.items()}
    return TwistedCellComplex(cw.representation, cells, incidences,
                              cw.top_degree)


def _compatible_reps(a, b) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, RegularRepresentation):
        return a.context.matches(b.context) and a.fiber_dim == b.fiber_dim
    if isinstance(a, UnitaryRepresentation):
        return (set(a.generators) == set(b.generators)
                and all(np.array_equal(a.generators[k], b.generators[k])
                        for k in a.generators))
    return isinstance(a, InfiniteCyclic)


# ---------------------------------------------------------------------------
# gluing


@dataclass(frozen=True)
class GluingSpec:
    """Cut system: upper subcomplex, lower quotient, and interface words.

    coupling maps ((q+1)-cell of upper, q-cell of lower) to the word carried
    by gradient lines crossing the cut; the assembled differential is block
    triangular, so the upper complex includes and the lower one quotients,
    giving the short exact sequence of the gluing formula.
    """

    lower: TwistedCellComplex
    upper: TwistedCellComplex
    coupling: Mapping[tuple[str, str], Word]


def glue(spec: GluingSpec) -> tuple[TwistedCellComplex, ComplexSES]:
    """Assemble the glued complex and its inclusion/restriction sequence."""
    lower, upper = spec.lower, spec.upper
    if not _compatible_reps(lower.representation, upper.representation):
        raise DataValidationError("gluing factors use different representations")
    if lower.top_degree != upper.top_degree:
        raise DataValidationError("gluing factors must share a degree window")
    d = lower.top_degree
    lower_labels = {x for ls in lower.cells.values() for x in ls}
    upper_labels = {x for ls in upper.cells.values() for x in ls}
    if lower_labels & upper_labels:
        raise DataValidationError(
            f"cell labels collide: {sorted(lower_labels & upper_labels)!r}")
    for to_cell, from_cell in spec.coupling:
        if to_cell not in upper_labels:
            raise DataValidationError(
                f"coupling target {to_cell!r} is not an upper cell")
        if from_cell not in lower_labels:
            raise DataValidationError(
                f"coupling source {from_cell!r} is not a lower cell")
        if upper.cell_degree(to_cell) != lower.cell_degree(from_cell) + 1:
            raise DataValidationError(
                f"coupling ({to_cell!r}, {from_cell!r}) does not raise the "
                "degree by one")
    cells = {q: tuple(upper.degree_cells(q)) + tuple(lower.degree_cells(q))
             for q in range(d + 1)
             if upper.degree_cells(q) or lower.degree_cells(q)}
    incidences = dict(upper.incidences)
    incidences.update(lower.incidences)
    incidences.update(spec.coupling)
    glued = TwistedCellComplex(lower.representation, cells, incidences, d)

    built = build_complex(glued)
    c_up = build_complex(upper)
    c_low = build_complex(lower)
    include, restrict = [], []
    block = glued.representation.block_dim
    for q in range(d + 1):
        n_up = len(upper.degree_cells(q)) * block
        n_low = len(lower.degree_cells(q)) * block
        inc = np.zeros((n_up + n_low, n_up), np.complex128)
        inc[:n_up, :] = np.eye(n_up)
        prj = np.zeros((n_low, n_up + n_low), np.complex128)
        prj[:, n_up:] = np.eye(n_low)
        include.append(Morphism(c_up.module(q), built.module(q), inc))
        restrict.append(Morphism(built.module(q), c_low.module(q), prj))
    ses = ComplexSES(ComplexMorphism(c_up, built, include),
                     ComplexMorphism(built, c_low, restrict))
    return glued, ses


def glue_check(spec: GluingSpec, representation=None,
               rank_tol: float | None = None) -> dict:
    """Evaluate the gluing formula: T_comb of the whole against the pieces.

    Returns t_comb (glued), t_comb_upper, t_comb_lower, t_h (torsion of the
    long sequence of the gluing SES) and the residual
    |t_comb - t_comb_upper - t_comb_lower - t_h|.
    """
    if representation is not None:
        spec = GluingSpec(
            lower=TwistedCellComplex(representation, spec.lower.cells,
                                     spec.lower.incidences, spec.lower.top_degree),
            upper=TwistedCellComplex(representation, spec.upper.cells,
                                     spec.upper.incidences, spec.upper.top_degree),
            coupling=spec.coupling)
    glued, ses = glue(spec)
    total = t_comb(glued, rank_tol)
    upper = t_comb(spec.upper, rank_tol)
    lower = t_comb(spec.lower, rank_tol)
    t_h = torsion(long_sequence(ses, rank_tol), rank_tol)
    return {
        "t_comb": total,
        "t_comb_upper": upper,
        "t_comb_lower": lower,
        "t_h": t_h,
        "residual": abs(total - upper - lower - t_h),
    }


def circle_from_arcs(rep, coupling_word: Word | None = None) -> GluingSpec:
    """The circle cut into two arcs: lower arc keeps the minimum, upper the
    maximum, and the interface carries 1 - t (or a custom coupling word)."""
    word = (("e", 1.0), ("t", -1.0)) if coupling_word is None else coupling_word
    lower = TwistedCellComplex(rep, {0: ("low_min",)}, {}, 1)
    upper = TwistedCellComplex(rep, {1: ("up_max",)}, {}, 1)
    return GluingSpec(lower=lower, upper=upper,
                      coupling={("up_max", "low_min"): word})


# ---------------------------------------------------------------------------
# products


def product_complex(a: TwistedCellComplex, b: TwistedCellComplex) -> CochainComplex:
    """Built complex of the product cell structure (tensor of the factors)."""
    return tensor_product(build_complex(a), build_complex(b))
