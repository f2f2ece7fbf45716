"""Cochain complexes of Hilbert modules and their torsion.

A complex here is a finite run of modules over one trace context with
differentials d_i raising degree by one and d_{i+1} o d_i = 0 (validated
numerically on construction).  Complexes may start at any degree: the
``offset`` records the true degree of the first module, and every
degree-sensitive formula (torsion signs, Euler characteristics, Laplacian
weights) uses true degrees.

Torsion is computed by two deliberately independent routes:

* ``torsion``              -- alternating sum of log-volumes of the reduced
                              differentials coming out of the orthogonal
                              (Hodge) decomposition;
* ``torsion_via_laplacians`` -- (1/2) sum over q of (-1)^(q+1) q log det'
                              of the degree-q Laplacian.

They are cross-checked in the tests, never merged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataValidationError
from .vn import (
    RANK_AMBIGUITY_FACTOR,
    HilbertModule,
    Morphism,
    TraceContext,
    default_rank_tol,
    direct_sum_modules,
    log_vol,
    singular_values,
)

#: Validation tolerance factor for d o d = 0 and chain-rule checks.
COMPOSITION_TOL = 1e-10


def _phase_normalize(columns: np.ndarray) -> np.ndarray:
    """Rotate each column so its first nonzero entry is positive real."""
    out = columns.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12 * max(1.0, float(np.abs(col).max(initial=0.0))))[0]
        if len(nz):
            pivot = col[nz[0]]
            if abs(pivot) > 0:
                out[:, j] = col * (np.conj(pivot) / abs(pivot))
    return out


@dataclass(eq=False)
class CochainComplex:
    """Modules C_offset, ..., C_{offset+n} with differentials between them."""

    modules: list[HilbertModule]
    differentials: list[Morphism]
    offset: int = 0

    def __init__(self, modules: Sequence[HilbertModule], differentials: Sequence[Morphism],
                 offset: int = 0, validate: bool = True, tol: float | None = None):
        self.modules = list(modules)
        self.differentials = list(differentials)
        self.offset = int(offset)
        if not self.modules:
            raise DataValidationError("a complex needs at least one module")
        if len(self.differentials) != len(self.modules) - 1:
            raise DataValidationError(
                f"{len(self.modules)} modules need {len(self.modules) - 1} "
                f"differentials, got {len(self.differentials)}")
        ctx = self.modules[0].context
        for i, m in enumerate(self.modules):
            if not m.context.matches(ctx):
                raise DataValidationError("all modules must share one trace context",
                                          location=f"degree {self.offset + i}")
        for i, d in enumerate(self.differentials):
            if not (d.domain.matches(self.modules[i]) and d.codomain.matches(self.modules[i + 1])):
                raise DataValidationError(
                    "differential does not connect consecutive modules",
                    location=f"degree {self.offset + i}")
        if validate:
            self.validate(tol)

    def validate(self, tol: float | None = None) -> None:
        """Check d_{i+1} o d_i = 0 up to tol x ||d_{i+1}|| ||d_i||."""
        factor = COMPOSITION_TOL if tol is None else tol
        for i in range(len(self.differentials) - 1):
            a, b = self.differentials[i + 1], self.differentials[i]
            if 0 in a.shape or 0 in b.shape:
                continue
            bound = factor * max(1e-300, a.norm() * b.norm())
            err = float(np.linalg.norm(a.matrix @ b.matrix, 2))
            if err > bound:
                raise DataValidationError(
                    f"d o d != 0 (norm {err:.3e} > {bound:.3e})",
                    location=f"degrees {self.offset + i} -> {self.offset + i + 2}")

    # -- structure ---------------------------------------------------------

    @property
    def context(self) -> TraceContext:
        return self.modules[0].context

    @property
    def top_degree(self) -> int:
        return self.offset + len(self.modules) - 1

    def degrees(self) -> range:
        return range(self.offset, self.top_degree + 1)

    def module(self, q: int) -> HilbertModule:
        """Module at true degree q (zero module outside the stored window)."""
        i = q - self.offset
        if 0 <= i < len(self.modules):
            return self.modules[i]
        return HilbertModule(self.context, 0)

    def differential(self, q: int) -> Morphism:
        """d_q : C_q -> C_{q+1} at true degree q (zero outside the window)."""
        i = q - self.offset
        if 0 <= i < len(self.differentials):
            return self.differentials[i]
        return Morphism.zero(self.module(q), self.module(q + 1))

    def euler_characteristic(self) -> float:
        """Sum of (-1)^q vn_dim(C_q) over true degrees."""
        return float(sum((-1) ** q * self.module(q).vn_dim for q in self.degrees()))

    def shifted(self, by: int) -> "CochainComplex":
        """Same data placed ``by`` degrees higher."""
        return CochainComplex(self.modules, self.differentials, self.offset + by,
                              validate=False)


def pad_complex(c: CochainComplex, lo: int, hi: int) -> CochainComplex:
    """Extend with zero modules so the window covers true degrees [lo, hi]."""
    if lo > c.offset or hi < c.top_degree:
        raise DataValidationError("padding window must contain the complex")
    modules = [c.module(q) for q in range(lo, hi + 1)]
    diffs = [c.differential(q) for q in range(lo, hi)]
    return CochainComplex(modules, diffs, lo, validate=False)


def direct_sum(a: CochainComplex, b: CochainComplex) -> CochainComplex:
    """Degreewise orthogonal direct sum (blocks of a first)."""
    if not a.context.matches(b.context):
        raise DataValidationError("direct sum needs a common trace context")
    lo, hi = min(a.offset, b.offset), max(a.top_degree, b.top_degree)
    modules, diffs = [], []
    for q in range(lo, hi + 1):
        modules.append(direct_sum_modules([a.module(q), b.module(q)]))
    for q in range(lo, hi):
        da, db = a.differential(q), b.differential(q)
        top = np.hstack([da.matrix, np.zeros((da.shape[0], db.shape[1]), np.complex128)])
        bot = np.hstack([np.zeros((db.shape[0], da.shape[1]), np.complex128), db.matrix])
        diffs.append(Morphism(modules[q - lo], modules[q - lo + 1], np.vstack([top, bot])))
    return CochainComplex(modules, diffs, lo, validate=False)


# ---------------------------------------------------------------------------
# Hodge decomposition


@dataclass(eq=False)
class HodgeData:
    """Orthogonal decomposition C_i = harmonic + image(d_{i-1}) + image(d_i^*).

    Per stored index i (true degree offset + i):

    * ``plus_bases[i]``  -- orthonormal columns spanning image(d_{i-1}),
    * ``minus_bases[i]`` -- orthonormal columns spanning image(d_i^*),
    * ``harmonic_bases[i]`` -- orthonormal columns spanning the complement,
    * ``reduced[i]``     -- the invertible matrix of d_i from the minus
                            subspace at i to the plus subspace at i+1, in
                            those bases.

    Bases are deterministic: eigensolver order (ascending) plus fixed-phase
    normalization, so repeated runs agree bitwise.
    """

    complex: CochainComplex
    harmonic_bases: list[np.ndarray]
    plus_bases: list[np.ndarray]
    minus_bases: list[np.ndarray]
    reduced: list[np.ndarray]
    warnings: list[str] = field(default_factory=list)

    @property
    def offset(self) -> int:
        return self.complex.offset

    def harmonic_dim(self, q: int) -> int:
        i = q - self.offset
        if 0 <= i < len(self.harmonic_bases):
            return self.harmonic_bases[i].shape[1]
        return 0

    def harmonic_basis(self, q: int) -> np.ndarray:
        i = q - self.offset
        if 0 <= i < len(self.harmonic_bases):
            return self.harmonic_bases[i]
        return np.zeros((self.complex.module(q).ambient_dim, 0), np.complex128)

    def harmonic_module(self, q: int) -> HilbertModule:
        return HilbertModule(self.complex.context, self.harmonic_dim(q), free=False)

    def reduced_morphism(self, q: int) -> Morphism:
        """Reduced differential at true degree q as a morphism of carriers."""
        i = q - self.offset
        ctx = self.complex.context
        if not 0 <= i < len(self.reduced):
            zero = HilbertModule(ctx, 0, free=False)
            return Morphism.zero(zero, zero)
        r = self.reduced[i]
        return Morphism(HilbertModule(ctx, r.shape[1], free=False),
                        HilbertModule(ctx, r.shape[0], free=False), r)

    def is_acyclic(self) -> bool:
        return all(b.shape[1] == 0 for b in self.harmonic_bases)


def _range_basis(matrix: np.ndarray, rank_tol: float | None,
                 warnings: list[str], label: str) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases (V of the coimage, U of the range) of a matrix.

    Both come from one Hermitian eigendecomposition of m* m; columns are
    ordered by descending singular value and phase-normalized.
    """
    rows, cols = matrix.shape
    if rows == 0 or cols == 0:
        return (np.zeros((cols, 0), np.complex128), np.zeros((rows, 0), np.complex128))
    gram = matrix.conj().T @ matrix
    gram = 0.5 * (gram + gram.conj().T)
    w, v = np.linalg.eigh(gram)
    top = float(w[-1])
    floor = top * max(matrix.shape) * np.finfo(float).eps * 8.0
    sv = np.sqrt(np.where(w > floor, w, 0.0))
    if rank_tol is None:
        tol = float(sv[-1]) * max(matrix.shape) * 2.0 ** -40
    else:
        tol = rank_tol
    ambiguous = (sv > tol / RANK_AMBIGUITY_FACTOR) & (sv <= tol * RANK_AMBIGUITY_FACTOR) & (sv > 0)
    if np.any(ambiguous):
        warnings.append(
            f"{label}: singular value within a factor {RANK_AMBIGUITY_FACTOR:g} "
            f"of the rank tolerance {tol:.3e}")
    keep = sv > tol
    order = np.argsort(-sv[keep])
    v_kept = _phase_normalize(v[:, keep][:, order])
    u = matrix @ v_kept
    u /= np.linalg.norm(u, axis=0, keepdims=True)
    u = _phase_normalize(u)
    return v_kept, u


def hodge(c: CochainComplex, rank_tol: float | None = None) -> HodgeData:
    """Orthogonal decomposition of every module and the reduced differentials.

    The reduced differential at degree q is invertible from the coimage of
    d_q onto its range; the degree-q harmonic space is the kernel of d_q
    intersected with the kernel of d_{q-1}^*, realized as the orthogonal
    complement of range(d_{q-1}) + range(d_q^*).
    """
    n = len(c.modules)
    warnings: list[str] = []
    minus, plus_next = [], []
    for i, d in enumerate(c.differentials):
        v, u = _range_basis(d.matrix, rank_tol, warnings, f"d at degree {c.offset + i}")
        minus.append(v)
        plus_next.append(u)

    harmonic_bases, plus_bases, minus_bases, reduced = [], [], [], []
    for i in range(n):
        dim = c.modules[i].ambient_dim
        plus = plus_next[i - 1] if i >= 1 else np.zeros((dim, 0), np.complex128)
        mnus = minus[i] if i < len(minus) else np.zeros((dim, 0), np.complex128)
        span = np.hstack([plus, mnus])
        h_dim = dim - span.shape[1]
        if h_dim < 0:
            raise DataValidationError(
                "rank bookkeeping failed (image + coimage exceed the module)",
                location=f"degree {c.offset + i}")
        if h_dim == 0 or dim == 0:
            harm = np.zeros((dim, 0), np.complex128)
        else:
            proj = np.eye(dim, dtype=np.complex128) - span @ span.conj().T
            proj = 0.5 * (proj + proj.conj().T)
            w, vecs = np.linalg.eigh(proj)
            harm = _phase_normalize(vecs[:, dim - h_dim:])
        harmonic_bases.append(harm)
        plus_bases.append(plus)
        minus_bases.append(mnus)

    for i, d in enumerate(c.differentials):
        reduced.append(plus_next[i].conj().T @ d.matrix @ minus[i])

    return HodgeData(c, harmonic_bases, plus_bases, minus_bases, reduced, warnings)


# ---------------------------------------------------------------------------
# torsion, route one: reduced differentials


def torsion(c: CochainComplex, rank_tol: float | None = None,
            hodge_data: HodgeData | None = None) -> float:
    """Alternating sum over true degrees q of (-1)^q log-volume of the
    reduced differential at q."""
    h = hodge_data if hodge_data is not None else hodge(c, rank_tol)
    total = 0.0
    for i, r in enumerate(h.reduced):
        q = c.offset + i
        if min(r.shape) == 0:
            continue
        total += (-1) ** q * log_vol(h.reduced_morphism(q), rank_tol)
    return float(total)


# ---------------------------------------------------------------------------
# torsion, route two: Laplacians


def laplacian(c: CochainComplex, q: int) -> Morphism:
    """delta_q^* delta_q + delta_{q-1} delta_{q-1}^* on the degree-q module."""
    d_q = c.differential(q)
    d_prev = c.differential(q - 1)
    mod = c.module(q)
    acc = np.zeros((mod.ambient_dim, mod.ambient_dim), np.complex128)
    if d_q.shape[0] and d_q.shape[1]:
        acc += d_q.matrix.conj().T @ d_q.matrix
    if d_prev.shape[0] and d_prev.shape[1]:
        acc += d_prev.matrix @ d_prev.matrix.conj().T
    acc = 0.5 * (acc + acc.conj().T)
    return Morphism(mod, mod, acc)


def log_det_prime(op: Morphism, rank_tol: float | None = None) -> float:
    """kappa times the sum of log of eigenvalues above the rank tolerance.

    The operator must be numerically self-adjoint and nonnegative; zero
    modes are dropped (det' convention), the zero operator gives 0.0.
    """
    if op.domain.ambient_dim != op.codomain.ambient_dim:
        raise DataValidationError("log det' needs an endomorphism")
    m = op.matrix
    if m.shape[0] == 0:
        return 0.0
    scale = max(1e-300, float(np.abs(m).max()))
    if float(np.linalg.norm(m - m.conj().T, 2)) > 1e-10 * scale:
        raise DataValidationError("operator is not self-adjoint")
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if float(w[0]) < -1e-10 * scale:
        raise DataValidationError("operator is not nonnegative")
    top = max(float(w[-1]), 0.0)
    floor = top * m.shape[0] * np.finfo(float).eps * 8.0
    w = np.where(w > floor, w, 0.0)
    tol = top * m.shape[0] * 2.0 ** -40 if rank_tol is None else rank_tol
    kept = w[w > tol]
    if len(kept) == 0:
        return 0.0
    return float(op.context.kappa * np.log(kept).sum())


def torsion_via_laplacians(c: CochainComplex, rank_tol: float | None = None) -> float:
    """(1/2) sum over true degrees q of (-1)^(q+1) q log det' Laplacian_q."""
    total = 0.0
    for q in c.degrees():
        if q == 0:
            continue
        total += (-1) ** (q + 1) * q * log_det_prime(laplacian(c, q), rank_tol)
    return float(0.5 * total)


# ---------------------------------------------------------------------------
# constructions: tensor product, suspension, mapping cone


def _tensor_modules(a: HilbertModule, b: HilbertModule) -> HilbertModule:
    if a.context.is_group and b.context.is_group:
        raise DataValidationError("tensor products need at least one factor over the complex field")
    ctx = a.context if a.context.is_group else b.context
    ambient = a.ambient_dim * b.ambient_dim
    # kron layout: when the group factor is second, (copies, group, fiber)
    # survives with the same fiber; when it is first, the field factor is
    # absorbed into the fiber.
    if b.context.is_group:
        fiber = b.fiber_dim
    elif a.context.is_group:
        fiber = max(a.fiber_dim * b.ambient_dim, 1)
    else:
        fiber = 1
    if ambient == 0:
        fiber = 1
    return HilbertModule(ctx, ambient, free=a.free and b.free, fiber_dim=fiber)


def tensor_product(c1: CochainComplex, c2: CochainComplex) -> CochainComplex:
    """Degreewise tensor product with the alternating-sign differential.

    C_j = sum over k of C1_k (x) C2_{j-k}, and on the (k, j-k) summand the
    differential acts by d1 (x) id + (-1)^k id (x) d2 (sign by the true
    degree k of the first factor).  At least one factor must live over the
    complex field; the product inherits the group context of the other.
    """
    if c1.context.is_group and c2.context.is_group:
        raise DataValidationError("tensor products need at least one factor over the complex field")
    lo = c1.offset + c2.offset
    hi = c1.top_degree + c2.top_degree
    summands: dict[int, list[int]] = {}
    modules: list[HilbertModule] = []
    for j in range(lo, hi + 1):
        ks = [k for k in c1.degrees() if c2.offset <= j - k <= c2.top_degree]
        summands[j] = ks
        mods = [_tensor_modules(c1.module(k), c2.module(j - k)) for k in ks]
        modules.append(direct_sum_modules(mods) if mods else
                       HilbertModule(c1.context if c1.context.is_group else c2.context, 0))

    diffs: list[Morphism] = []
    for j in range(lo, hi):
        src, dst = modules[j - lo], modules[j - lo + 1]
        mat = np.zeros((dst.ambient_dim, src.ambient_dim), np.complex128)
        src_ks, dst_ks = summands[j], summands[j + 1]
        src_starts, pos = {}, 0
        for k in src_ks:
            src_starts[k] = pos
            pos += c1.module(k).ambient_dim * c2.module(j - k).ambient_dim
        dst_starts, pos = {}, 0
        for k in dst_ks:
            dst_starts[k] = pos
            pos += c1.module(k).ambient_dim * c2.module(j + 1 - k).ambient_dim
        for k in src_ks:
            a_dim = c1.module(k).ambient_dim
            b_dim = c2.module(j - k).ambient_dim
            if a_dim == 0 or b_dim == 0:
                continue
            # d1 (x) id : summand (k, j-k) -> (k+1, j-k)
            if (k + 1) in dst_starts:
                d1 = c1.differential(k)
                if d1.shape[0]:
                    block = np.kron(d1.matrix, np.eye(b_dim))
                    r0, c0 = dst_starts[k + 1], src_starts[k]
                    mat[r0:r0 + block.shape[0], c0:c0 + block.shape[1]] += block
            # (-1)^k id (x) d2 : summand (k, j-k) -> (k, j-k+1)
            if k in dst_starts:
                d2 = c2.differential(j - k)
                if d2.shape[0]:
                    block = (-1) ** k * np.kron(np.eye(a_dim), d2.matrix)
                    r0, c0 = dst_starts[k], src_starts[k]
                    mat[r0:r0 + block.shape[0], c0:c0 + block.shape[1]] += block
        diffs.append(Morphism(src, dst, mat))
    return CochainComplex(modules, diffs, lo)


def suspension(c: CochainComplex) -> CochainComplex:
    """(SC)_i = C_{i+1} with differentials negated."""
    return CochainComplex(c.modules, [-d for d in c.differentials], c.offset - 1,
                          validate=False)


@dataclass(eq=False)
class ComplexMorphism:
    """A degreewise morphism commuting with the differentials.

    Source and target must cover the same degree window (use ``pad_complex``
    to align); the chain rule d_target f_i = f_{i+1} d_source is validated
    numerically.
    """

    source: CochainComplex
    target: CochainComplex
    components: list[Morphism]

    def __init__(self, source: CochainComplex, target: CochainComplex,
                 components: Sequence[Morphism], validate: bool = True,
                 tol: float | None = None):
        if source.offset != target.offset or len(source.modules) != len(target.modules):
            raise DataValidationError(
                "source and target must cover the same degree window "
                f"(got offsets {source.offset}/{target.offset}, lengths "
                f"{len(source.modules)}/{len(target.modules)})")
        if len(components) != len(source.modules):
            raise DataValidationError("one component per degree required")
        for i, f in enumerate(components):
            if not (f.domain.matches(source.modules[i]) and f.codomain.matches(target.modules[i])):
                raise DataValidationError("component shapes do not match the complexes",
                                          location=f"degree {source.offset + i}")
        self.source = source
        self.target = target
        self.components = list(components)
        if validate:
            self.validate(tol)

    def validate(self, tol: float | None = None) -> None:
        factor = COMPOSITION_TOL if tol is None else tol
        for i in range(len(self.components) - 1):
            d_s = self.source.differentials[i]
            d_t = self.target.differentials[i]
            lhs = d_t.matrix @ self.components[i].matrix
            rhs = self.components[i + 1].matrix @ d_s.matrix
            if lhs.size == 0:
                continue
            scale = max(1e-300,
                        max(d_t.norm(), d_s.norm()) *
                        max(self.components[i].norm(), self.components[i + 1].norm(), 1.0))
            if float(np.linalg.norm(lhs - rhs, 2)) > factor * scale:
                raise DataValidationError(
                    "components do not commute with the differentials",
                    location=f"degree {self.source.offset + i}")

    @property
    def offset(self) -> int:
        return self.source.offset

    def component(self, q: int) -> Morphism:
        i = q - self.offset
        if 0 <= i < len(self.components):
            return self.components[i]
        return Morphism.zero(self.source.module(q), self.target.module(q))


def mapping_cone(f: ComplexMorphism) -> tuple[CochainComplex, ComplexMorphism, ComplexMorphism]:
    """Cone of f : C1 -> C2 with its inclusion and projection.

    Cone_i = C2_i + C1_{i+1} with differential [[d2, f_{i+1}], [0, -d1]];
    returns (cone, j, p) where j : C2 -> cone is (id, 0) and
    p : cone -> SC1 is (0, id), all padded to the cone's degree window.
    """
    c1, c2 = f.source, f.target
    lo, hi = c1.offset - 1, c1.top_degree
    cone_modules = [direct_sum_modules([c2.module(i), c1.module(i + 1)])
                    for i in range(lo, hi + 1)]
    cone_diffs = []
    for i in range(lo, hi):
        src, dst = cone_modules[i - lo], cone_modules[i - lo + 1]
        d2 = c2.differential(i)
        d1 = c1.differential(i + 1)
        fi = f.component(i + 1)
        top = np.hstack([d2.matrix, fi.matrix])
        bot = np.hstack([np.zeros((d1.shape[0], d2.shape[1]), np.complex128), -d1.matrix])
        cone_diffs.append(Morphism(src, dst, np.vstack([top, bot])))
    cone = CochainComplex(cone_modules, cone_diffs, lo)

    c2_pad = pad_complex(c2, lo, hi)
    sc1_pad = pad_complex(suspension(c1), lo, hi)
    j_parts, p_parts = [], []
    for i in range(lo, hi + 1):
        n2 = c2.module(i).ambient_dim
        n1 = c1.module(i + 1).ambient_dim
        j_mat = np.vstack([np.eye(n2), np.zeros((n1, n2))]).astype(np.complex128)
        p_mat = np.hstack([np.zeros((n1, n2)), np.eye(n1)]).astype(np.complex128)
        j_parts.append(Morphism(c2_pad.module(i), cone_modules[i - lo], j_mat))
        p_parts.append(Morphism(cone_modules[i - lo], sc1_pad.module(i), p_mat))
    j = ComplexMorphism(c2_pad, cone, j_parts)
    p = ComplexMorphism(cone, sc1_pad, p_parts)
    return cone, j, p


# ---------------------------------------------------------------------------
# induced maps on harmonic spaces and torsion transfer


def induced_harmonic_map(f: ComplexMorphism, q: int,
                         hodge_source: HodgeData | None = None,
                         hodge_target: HodgeData | None = None,
                         rank_tol: float | None = None) -> Morphism:
    """Compression of f_q to the harmonic subspaces (the map on cohomology)."""
    hs = hodge_source if hodge_source is not None else hodge(f.source, rank_tol)
    ht = hodge_target if hodge_target is not None else hodge(f.target, rank_tol)
    basis_s = hs.harmonic_basis(q)
    basis_t = ht.harmonic_basis(q)
    mat = basis_t.conj().T @ f.component(q).matrix @ basis_s
    return Morphism(hs.harmonic_module(q), ht.harmonic_module(q), mat)


def torsion_transfer_residual(f: ComplexMorphism, rank_tol: float | None = None) -> float:
    """Residual of the torsion comparison along a degreewise isomorphism f.

    For invertible components: log T(target) = log T(source)
    - sum (-1)^q log_vol(f_q) + sum (-1)^q log_vol(H(f_q)).
    """
    hs = hodge(f.source, rank_tol)
    ht = hodge(f.target, rank_tol)
    t_source = torsion(f.source, rank_tol, hs)
    t_target = torsion(f.target, rank_tol, ht)
    vol_sum = 0.0
    harm_sum = 0.0
    for q in f.source.degrees():
        comp = f.component(q)
        if min(comp.shape) > 0:
            vol_sum += (-1) ** q * log_vol(comp, rank_tol)
        hq = induced_harmonic_map(f, q, hs, ht, rank_tol)
        if min(hq.shape) > 0:
            harm_sum += (-1) ** q * log_vol(hq, rank_tol)
    return abs(t_target - t_source + vol_sum - harm_sum)
