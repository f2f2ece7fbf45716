"""Short exact sequences of complexes and torsion additivity.

A short exact sequence 0 -> C1 -f-> C2 -g-> C3 -> 0 of cochain complexes
induces a long exact sequence on harmonic (cohomology) spaces; packaging
that long sequence as an acyclic complex turns torsion additivity into a
single residual:

    log T(C2) = log T(C1) + log T(C3) + log T(H)
                - sum_i (-1)^i log T(0 -> C1_i -> C2_i -> C3_i -> 0).

The connecting map is computed by the usual zig-zag (lift along g, apply
the middle differential, pull back along f, project to harmonics); two
independent lifting strategies are provided so the choice can be checked
rather than trusted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complexes import (
    COMPOSITION_TOL,
    CochainComplex,
    ComplexMorphism,
    HodgeData,
    hodge,
    induced_harmonic_map,
    mapping_cone,
    torsion,
)
from .errors import DataValidationError
from .vn import GRAM_FLOOR_SLACK, RANK_TOL_SCALE, Morphism, log_vol

CONNECTING_STRATEGIES = ("pinv", "complement")


def _gram_spectrum(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of mat* mat with numerical-noise eigenvalues clamped to 0."""
    gram = mat.conj().T @ mat
    gram = 0.5 * (gram + gram.conj().T)
    w, v = np.linalg.eigh(gram)
    if w.size:
        floor = (max(float(w[-1]), 0.0) * max(mat.shape)
                 * np.finfo(float).eps * GRAM_FLOOR_SLACK)
        w = np.where(w > floor, w, 0.0)
    return w, v


def _rank(mat: np.ndarray, rank_tol: float | None) -> int:
    if 0 in mat.shape:
        return 0
    w, _ = _gram_spectrum(mat)
    sigma = np.sqrt(w)
    tol = (float(sigma[-1]) * max(mat.shape) * RANK_TOL_SCALE
           if rank_tol is None else rank_tol)
    return int(np.count_nonzero(sigma > tol))


def _least_squares(mat: np.ndarray, rhs: np.ndarray,
                   rank_tol: float | None) -> np.ndarray:
    """Minimal-norm least-squares solve through the Gram spectrum of mat."""
    if 0 in mat.shape:
        return np.zeros((mat.shape[1], rhs.shape[1]), np.complex128)
    if mat.shape[0] >= mat.shape[1]:
        w, v = _gram_spectrum(mat)
        sigma = np.sqrt(w)
        tol = (float(sigma[-1]) * max(mat.shape) * RANK_TOL_SCALE
               if rank_tol is None else rank_tol)
        keep = sigma > tol
        coeff = v[:, keep].conj().T @ (mat.conj().T @ rhs)
        return v[:, keep] @ (coeff / w[keep][:, None])
    w, v = _gram_spectrum(mat.conj().T)
    sigma = np.sqrt(w)
    tol = (float(sigma[-1]) * max(mat.shape) * RANK_TOL_SCALE
           if rank_tol is None else rank_tol)
    keep = sigma > tol
    coeff = v[:, keep].conj().T @ rhs
    return mat.conj().T @ (v[:, keep] @ (coeff / w[keep][:, None]))


class ComplexSES:
    """Degreewise short exact sequence 0 -> C1 -f-> C2 -g-> C3 -> 0.

    Validation checks, at every degree, that g o f vanishes, f is injective,
    g is surjective and the ranks account for the middle dimension; any
    failure raises DataValidationError naming the offending degree.
    """

    def __init__(self, f: ComplexMorphism, g: ComplexMorphism,
                 validate: bool = True, rank_tol: float | None = None):
        if f.target is not g.source and not _same_complex(f.target, g.source):
            raise DataValidationError(
                "the two morphisms do not share a middle complex")
        self.f = f
        self.g = g
        self.first = f.source
        self.middle = g.source
        self.last = g.target
        self.rank_tol = rank_tol
        self._hodges: list[HodgeData | None] = [None, None, None]
        if not self.first.context.matches(self.last.context):
            raise DataValidationError("complexes live over different contexts")
        if validate:
            self.validate(rank_tol)

    def validate(self, rank_tol: float | None = None) -> None:
        for i in self.degrees():
            fm = self.f.component(i).matrix
            gm = self.g.component(i).matrix
            if fm.shape[0] and fm.shape[1] and gm.shape[0]:
                comp = gm @ fm
                scale = np.linalg.norm(fm, 2) * np.linalg.norm(gm, 2)
                if np.linalg.norm(comp, 2) > COMPOSITION_TOL * max(scale, 1.0):
                    raise DataValidationError(
                        "composition g o f is not zero",
                        location=f"degree {i}")
            rank_f = _rank(fm, rank_tol)
            rank_g = _rank(gm, rank_tol)
            if rank_f != self.first.module(i).ambient_dim:
                raise DataValidationError("first map is not injective",
                                          location=f"degree {i}")
            if rank_g != self.last.module(i).ambient_dim:
                raise DataValidationError("last map is not surjective",
                                          location=f"degree {i}")
            if rank_f + rank_g != self.middle.module(i).ambient_dim:
                raise DataValidationError("sequence is not exact in the middle",
                                          location=f"degree {i}")

    @property
    def offset(self) -> int:
        return self.first.offset

    def degrees(self) -> range:
        return self.first.degrees()

    def hodge(self, which: int) -> HodgeData:
        """Cached Hodge data of complex 1, 2 or 3."""
        if which not in (1, 2, 3):
            raise DataValidationError("which must be 1, 2 or 3")
        if self._hodges[which - 1] is None:
            c = (self.first, self.middle, self.last)[which - 1]
            self._hodges[which - 1] = hodge(c, self.rank_tol)
        return self._hodges[which - 1]


def _same_complex(a: CochainComplex, b: CochainComplex) -> bool:
    if a.offset != b.offset or len(a.modules) != len(b.modules):
        return False
    if any(x.ambient_dim != y.ambient_dim for x, y in zip(a.modules, b.modules)):
        return False
    return all(np.array_equal(x.matrix, y.matrix)
               for x, y in zip(a.differentials, b.differentials))


def connecting_hom(ses: ComplexSES, i: int, strategy: str = "pinv",
                   rank_tol: float | None = None) -> Morphism:
    """Connecting map on harmonic spaces, H^i(C3) -> H^(i+1)(C1).

    strategy "pinv" lifts along g with a minimal-norm solve; "complement"
    restricts g to the orthogonal complement of its kernel and inverts
    there.  Both land in (ker g)^perp, and any other lift differs by an
    image element that the final harmonic projection kills.
    """
    if strategy not in CONNECTING_STRATEGIES:
        raise DataValidationError(
            f"unknown strategy {strategy!r}; expected one of {CONNECTING_STRATEGIES}")
    tol = rank_tol if rank_tol is not None else ses.rank_tol
    h1 = ses.hodge(1)
    h3 = ses.hodge(3)
    dom = h3.harmonic_module(i)
    cod = h1.harmonic_module(i + 1)
    if dom.ambient_dim == 0 or cod.ambient_dim == 0:
        return Morphism.zero(dom, cod)
    hbasis = h3.harmonic_basis(i)
    gm = ses.g.component(i).matrix
    if strategy == "pinv":
        u = _least_squares(gm, hbasis, tol)
    else:
        w, v = _gram_spectrum(gm)
        sigma = np.sqrt(w)
        cut = (float(sigma[-1]) * max(gm.shape) * RANK_TOL_SCALE
               if tol is None else tol)
        basis = v[:, sigma > cut]
        restricted = gm @ basis
        if restricted.shape[0] != restricted.shape[1]:
            raise DataValidationError("map is not surjective",
                                      location=f"degree {i}")
        u = basis @ np.linalg.solve(restricted, hbasis)
    v_mid = ses.middle.differential(i).matrix @ u
    w_back = _least_squares(ses.f.component(i + 1).matrix, v_mid, tol)
    mat = h1.harmonic_basis(i + 1).conj().T @ w_back
    return Morphism(dom, cod, mat)


def long_sequence(ses: ComplexSES, rank_tol: float | None = None,
                  strategy: str = "pinv", validate: bool = True) -> CochainComplex:
    """The long sequence on harmonic spaces as one acyclic complex.

    Degree i of the three complexes lands at degrees 3i, 3i+1, 3i+2 (so the
    whole complex has offset 3 * offset); the differentials cycle through
    the induced map of f, the induced map of g and the connecting map.
    """
    tol = rank_tol if rank_tol is not None else ses.rank_tol
    h1, h2, h3 = ses.hodge(1), ses.hodge(2), ses.hodge(3)
    modules = []
    diffs: list[Morphism] = []
    top = ses.first.top_degree
    for i in ses.degrees():
        modules.extend([h1.harmonic_module(i), h2.harmonic_module(i),
                        h3.harmonic_module(i)])
        diffs.append(induced_harmonic_map(ses.f, i, h1, h2, tol))
        diffs.append(induced_harmonic_map(ses.g, i, h2, h3, tol))
        if i < top:
            diffs.append(connecting_hom(ses, i, strategy, tol))
    # A map that is zero in exact arithmetic comes out of the zig-zag with
    # tiny nonzero entries; relative-to-itself rank decisions would promote
    # that noise to full rank, so snap maps that are negligible against the
    # scale of the whole sequence to honest zeros.
    scale = max([d.norm() for d in diffs if min(d.shape)] + [1.0])
    dim = max(m.ambient_dim for m in modules) if modules else 1
    snap = scale * max(dim, 2) * RANK_TOL_SCALE
    diffs = [d if not min(d.shape) or d.norm() > snap
             else Morphism.zero(d.domain, d.codomain) for d in diffs]
    seq = CochainComplex(modules, diffs, 3 * ses.offset, validate=False)
    if validate:
        # Composites vanish only up to the scale of the zig-zag inputs, so
        # check against the overall data scale rather than per-factor norms
        # (a mathematically zero harmonic map has tiny, noisy norm).
        scale = max([1.0] + [d.norm() for d in diffs if min(d.shape)])
        for k in range(len(diffs) - 1):
            a, b = diffs[k + 1], diffs[k]
            if 0 in a.shape or 0 in b.shape:
                continue
            err = float(np.linalg.norm(a.matrix @ b.matrix, 2))
            if err > COMPOSITION_TOL * scale * scale:
                raise DataValidationError(
                    "long sequence maps do not compose to zero",
                    location=f"positions {k} -> {k + 2}")
        if not hodge(seq, tol).is_acyclic():
            raise DataValidationError("long sequence is not exact")
    return seq


def three_stage_torsion(c: CochainComplex, rank_tol: float | None = None) -> float:
    """log Vol(reduced d_first) - log Vol(reduced d_second) for a 3-term complex.

    Positional signs: the complex is read as if it sat at degrees 0, 1, 2,
    whatever its actual offset, so this agrees with torsion() up to the
    degree-offset sign rule.
    """
    if len(c.modules) != 3:
        raise DataValidationError(
            f"three-stage torsion needs exactly 3 modules, got {len(c.modules)}")
    data = hodge(c, rank_tol)
    return (log_vol(data.reduced_morphism(c.offset), rank_tol)
            - log_vol(data.reduced_morphism(c.offset + 1), rank_tol))


@dataclass(frozen=True)
class MilnorReport:
    """Both sides of the torsion additivity identity for one sequence."""

    t1: float
    t2: float
    t3: float
    t_h: float
    degreewise: dict[int, float]
    lhs: float
    rhs: float
    residual: float


def milnor_check(ses: ComplexSES, rank_tol: float | None = None) -> MilnorReport:
    """Evaluate torsion additivity for a short exact sequence of complexes.

    lhs is log T(C2); rhs collects log T(C1) + log T(C3) + log T(H) minus
    the alternating sum of the degreewise (modulewise) sequence torsions.
    """
    tol = rank_tol if rank_tol is not None else ses.rank_tol
    t1 = torsion(ses.first, tol, ses.hodge(1))
    t2 = torsion(ses.middle, tol, ses.hodge(2))
    t3 = torsion(ses.last, tol, ses.hodge(3))
    t_h = torsion(long_sequence(ses, tol))
    degreewise = {}
    for i in ses.degrees():
        stage = CochainComplex(
            [ses.first.module(i), ses.middle.module(i), ses.last.module(i)],
            [ses.f.component(i), ses.g.component(i)], 0)
        degreewise[i] = three_stage_torsion(stage, tol)
    correction = sum((-1) ** i * v for i, v in degreewise.items())
    lhs = t2
    rhs = t1 + t3 + t_h - correction
    return MilnorReport(t1=t1, t2=t2, t3=t3, t_h=t_h, degreewise=degreewise,
                        lhs=lhs, rhs=rhs, residual=abs(lhs - rhs))


def cone_ses(f: ComplexMorphism) -> ComplexSES:
    """The short exact sequence 0 -> C2 -> cone(f) -> SC1 -> 0."""
    _, include, project = mapping_cone(f)
    return ComplexSES(include, project)
