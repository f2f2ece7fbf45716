"""Linear algebra over a finite trace algebra.

The objects here are finite-dimensional Hilbert modules over either the
complex numbers or the group algebra of a finite group Gamma, carrying the
normalized trace (kappa = 1 or 1/|Gamma|).  Morphisms are dense complex
matrices; the quantities of interest are trace-normalized:

* ``vn_trace``   -- kappa times the matrix trace,
* ``log_vol``    -- kappa times the sum of log singular values over the
                    numerical rank (a log-scale Fuglede-Kadison determinant
                    of the induced map coimage -> range),
* ``spectral_distribution`` -- the right-continuous counting function
                    F(lambda) = kappa * #{sigma : sigma^2 <= lambda}.

All volumes live on the log scale; a zero morphism has ``log_vol`` 0 by the
empty-product convention, and rank truncation means the value is always
finite.  Singular values are always obtained from a Hermitian eigensolver
applied to f*f, never from a nonsymmetric solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DataValidationError

#: Relative floor used by ``default_rank_tol``: spectral norm x max dimension x 2^-40.
RANK_TOL_SCALE = 2.0 ** -40

#: Factor-of-ten window around the rank tolerance that flags an ambiguous rank call.
RANK_AMBIGUITY_FACTOR = 10.0


def _as_matrix(matrix) -> np.ndarray:
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2:
        raise DataValidationError(f"expected a 2-d matrix, got array of shape {a.shape}")
    return a


# ---------------------------------------------------------------------------
# trace contexts


@dataclass(frozen=True, eq=False)
class TraceContext:
    """The algebra a computation is linear over, with its normalized trace.

    Either the complex field (``table is None``, kappa = 1) or a finite group
    given by its multiplication table (kappa = 1/|Gamma|).  ``table[i, j]`` is
    the index of g_i * g_j.  Group axioms are checked on construction via the
    ``finite_group`` factory.
    """

    kappa: float
    table: np.ndarray | None = None
    labels: tuple[str, ...] | None = None
    _identity: int = field(default=-1, repr=False)
    _inverse: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_group(self) -> bool:
        return self.table is not None

    @property
    def size(self) -> int:
        """|Gamma| for group contexts, 1 for the complex field."""
        return 1 if self.table is None else self.table.shape[0]

    @property
    def identity(self) -> int:
        if not self.is_group:
            raise DataValidationError("the complex field has no group identity index")
        return self._identity

    def inverse(self, i: int) -> int:
        if self._inverse is None:
            raise DataValidationError("inverse table only exists for group contexts")
        return int(self._inverse[i])

    def multiply(self, i: int, j: int) -> int:
        assert self.table is not None
        return int(self.table[i, j])

    def element_index(self, element) -> int:
        """Resolve a group element given as index or label."""
        assert self.table is not None
        if isinstance(element, (int, np.integer)):
            idx = int(element)
            if not 0 <= idx < self.size:
                raise DataValidationError(f"group element index {idx} out of range")
            return idx
        if self.labels is not None and element in self.labels:
            return self.labels.index(element)
        raise DataValidationError(f"unknown group element {element!r}")

    def power(self, i: int, n: int) -> int:
        """g_i**n resolved through the multiplication table (n may be negative)."""
        g = i if n >= 0 else self.inverse(i)
        out = self._identity
        for _ in range(abs(n)):
            out = self.multiply(out, g)
        return out

    def matches(self, other: "TraceContext") -> bool:
        if self.is_group != other.is_group:
            return False
        if not self.is_group:
            return True
        return bool(np.array_equal(self.table, other.table))

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        if not self.is_group:
            return "TraceContext(C)"
        return f"TraceContext(group of order {self.size})"


def complex_field() -> TraceContext:
    """Plain complex scalars: kappa = 1."""
    return TraceContext(kappa=1.0)


def finite_group(table, labels: Sequence[str] | None = None) -> TraceContext:
    """Context for the group algebra of a finite group.

    ``table`` is the |Gamma| x |Gamma| index matrix of products.  Identity,
    inverses and associativity are verified; violations raise
    ``DataValidationError``.
    """
    t = np.asarray(table, dtype=np.int64)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DataValidationError("group table must be square")
    n = t.shape[0]
    if n == 0:
        raise DataValidationError("group table must be nonempty")
    if t.min() < 0 or t.max() >= n:
        raise DataValidationError("group table entries must be indices into the group")

    arange = np.arange(n)
    identity = -1
    for e in range(n):
        if np.array_equal(t[e], arange) and np.array_equal(t[:, e], arange):
            identity = e
            break
    if identity < 0:
        raise DataValidationError("group table has no two-sided identity")

    inverse = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        js = np.nonzero(t[i] == identity)[0]
        if len(js) != 1 or t[js[0], i] != identity:
            raise DataValidationError(f"group element {i} has no two-sided inverse")
        inverse[i] = js[0]

    # associativity: (gi gj) gk == gi (gj gk) for all triples
    left = t[t, :]          # left[i, j, k] = (gi gj) gk
    right = t[:, t]         # right[i, j, k] = gi (gj gk)
    if not np.array_equal(left, right):
        raise DataValidationError("group table is not associative")

    if labels is not None:
        labels = tuple(str(x) for x in labels)
        if len(labels) != n or len(set(labels)) != n:
            raise DataValidationError("group labels must be distinct, one per element")
    ctx = TraceContext(kappa=1.0 / n, table=t, labels=labels,
                       _identity=identity, _inverse=inverse)
    t.setflags(write=False)
    return ctx


def cyclic_group(m: int) -> TraceContext:
    """Z/m with labels e, t, t^2, ...

    The context is assembled directly: modular addition is associative by
    construction, so the cubic table check (reserved for user-supplied
    tables) is skipped and large orders stay affordable.
    """
    if m < 1:
        raise DataValidationError("cyclic group order must be >= 1")
    i = np.arange(m)
    table = (i[:, None] + i[None, :]) % m
    labels = tuple(["e"] + [f"t^{k}" if k > 1 else "t" for k in range(1, m)])
    ctx = TraceContext(kappa=1.0 / m, table=table, labels=labels,
                       _identity=0, _inverse=(-i) % m)
    table.setflags(write=False)
    return ctx


# ---------------------------------------------------------------------------
# modules and morphisms


@dataclass(frozen=True, eq=False)
class HilbertModule:
    """A finitely generated Hilbert module over a trace context.

    ``vn_dim`` is kappa * ambient_dim.  Over a group context a free module
    l^2(Gamma)^k (x) C^fiber has ambient dimension a multiple of |Gamma|;
    public constructions keep that invariant.  Internal subspace carriers
    (harmonic spaces, coimages of reduced differentials) are genuinely
    non-free submodules and are created with ``free=False``.

    ``fiber_dim`` is a layout hint for free group modules: coordinates are
    ordered (copy index, group index, fiber index) with the fiber innermost,
    so the algebra acts by I_copies (x) lambda(g) (x) I_fiber.  It has no
    meaning over the complex field or for non-free carriers.
    """

    context: TraceContext
    ambient_dim: int
    free: bool = True
    fiber_dim: int = 1

    def __post_init__(self):
        if self.ambient_dim < 0:
            raise DataValidationError("ambient dimension must be >= 0")
        if self.fiber_dim < 1:
            raise DataValidationError("fiber dimension must be >= 1")
        if self.free and self.context.is_group and \
                self.ambient_dim % (self.context.size * self.fiber_dim):
            raise DataValidationError(
                f"free module over a group of order {self.context.size} with fiber "
                f"{self.fiber_dim} needs ambient dimension divisible by "
                f"{self.context.size * self.fiber_dim}, got {self.ambient_dim}")

    @property
    def vn_dim(self) -> float:
        return self.context.kappa * self.ambient_dim

    def matches(self, other: "HilbertModule") -> bool:
        return self.ambient_dim == other.ambient_dim and self.context.matches(other.context)


def regular_module(context: TraceContext, rank: int = 1, fiber_dim: int = 1) -> HilbertModule:
    """l^2(Gamma)^rank (x) C^fiber (or C^(rank*fiber) over the complex field)."""
    if rank < 0 or fiber_dim < 1:
        raise DataValidationError("rank must be >= 0 and fiber dimension >= 1")
    return HilbertModule(context, context.size * rank * fiber_dim, fiber_dim=fiber_dim)


def direct_sum_modules(modules: Sequence[HilbertModule]) -> HilbertModule:
    """Orthogonal direct sum; keeps a common fiber layout when there is one."""
    if not modules:
        raise DataValidationError("direct sum needs at least one module")
    ctx = modules[0].context
    for m in modules[1:]:
        if not m.context.matches(ctx):
            raise DataValidationError("direct sum of modules over different contexts")
    ambient = sum(m.ambient_dim for m in modules)
    free = all(m.free for m in modules)
    fibers = {m.fiber_dim for m in modules if m.ambient_dim > 0}
    fiber = fibers.pop() if len(fibers) == 1 else 1
    if free and ctx.is_group and ambient % (ctx.size * fiber):
        fiber = 1
    if free and ctx.is_group and ambient % ctx.size:
        free = False
    return HilbertModule(ctx, ambient, free=free, fiber_dim=fiber)


@dataclass(frozen=True, eq=False)
class Morphism:
    """A module map given by a dense complex matrix (codomain x domain)."""

    domain: HilbertModule
    codomain: HilbertModule
    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if m.shape != (self.codomain.ambient_dim, self.domain.ambient_dim):
            raise DataValidationError(
                f"matrix shape {m.shape} does not match codomain x domain "
                f"({self.codomain.ambient_dim}, {self.domain.ambient_dim})")
        if not self.domain.context.matches(self.codomain.context):
            raise DataValidationError("domain and codomain live over different contexts")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def context(self) -> TraceContext:
        return self.domain.context

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def adjoint(self) -> "Morphism":
        return Morphism(self.codomain, self.domain, self.matrix.conj().T)

    @property
    def H(self) -> "Morphism":
        return self.adjoint()

    def norm(self) -> float:
        """Spectral norm."""
        if 0 in self.matrix.shape:
            return 0.0
        return float(np.linalg.norm(self.matrix, 2))

    def __matmul__(self, other: "Morphism") -> "Morphism":
        if not isinstance(other, Morphism):
            return NotImplemented
        if not other.codomain.matches(self.domain):
            raise DataValidationError(
                f"cannot compose: inner modules have ambient dims "
                f"{other.codomain.ambient_dim} vs {self.domain.ambient_dim}")
        return Morphism(other.domain, self.codomain, self.matrix @ other.matrix)

    def __add__(self, other: "Morphism") -> "Morphism":
        if not isinstance(other, Morphism):
            return NotImplemented
        return Morphism(self.domain, self.codomain, self.matrix + other.matrix)

    def __sub__(self, other: "Morphism") -> "Morphism":
        if not isinstance(other, Morphism):
            return NotImplemented
        return Morphism(self.domain, self.codomain, self.matrix - other.matrix)

    def __neg__(self) -> "Morphism":
        return Morphism(self.domain, self.codomain, -self.matrix)

    def __mul__(self, scalar) -> "Morphism":
        return Morphism(self.domain, self.codomain, self.matrix * complex(scalar))

    __rmul__ = __mul__

    @staticmethod
    def identity(module: HilbertModule) -> "Morphism":
        return Morphism(module, module, np.eye(module.ambient_dim, dtype=np.complex128))

    @staticmethod
    def zero(domain: HilbertModule, codomain: HilbertModule) -> "Morphism":
        return Morphism(domain, codomain,
                        np.zeros((codomain.ambient_dim, domain.ambient_dim), np.complex128))


# ---------------------------------------------------------------------------
# traces, singular values, volumes


def vn_trace(f: Morphism) -> complex:
    """kappa times the matrix trace (defined for endomorphisms)."""
    if f.domain.ambient_dim != f.codomain.ambient_dim:
        raise DataValidationError("trace requires an endomorphism")
    return complex(f.context.kappa * np.trace(f.matrix))


#: Gram-level noise floor: eigh resolves eigenvalues of f*f only down to about
#: machine epsilon times the largest one (times dimension); anything below that
#: is numerically indistinguishable from zero and must not survive the square
#: root, where it would masquerade as a singular value ~ sqrt(eps) * norm.
GRAM_FLOOR_SLACK = 8.0


def singular_values(f: Morphism) -> np.ndarray:
    """Singular values in ascending order, from eigh applied to f*f.

    Eigenvalues below the eigensolver's resolution (relative machine epsilon
    at the scale of ||f*f||, dimension-weighted) are clamped to zero before
    the square root; the domain dimension many values are returned (zeros
    included).
    """
    m = f.matrix
    if m.shape[1] == 0:
        return np.zeros(0)
    gram = m.conj().T @ m
    gram = 0.5 * (gram + gram.conj().T)
    w = np.linalg.eigvalsh(gram)
    top = float(w[-1]) if len(w) else 0.0
    floor = top * max(m.shape) * np.finfo(float).eps * GRAM_FLOOR_SLACK
    w = np.where(w > floor, w, 0.0)
    return np.sqrt(w)


def default_rank_tol(f: Morphism, sv: np.ndarray | None = None) -> float:
    """Spectral norm x max(matrix dims) x 2^-40 (0 for the zero morphism)."""
    if sv is None:
        sv = singular_values(f)
    top = float(sv[-1]) if len(sv) else 0.0
    return top * max(f.shape + (1,)) * RANK_TOL_SCALE


def _resolved_tol(f: Morphism, sv: np.ndarray, rank_tol: float | None) -> float:
    return default_rank_tol(f, sv) if rank_tol is None else float(rank_tol)


def log_vol(f: Morphism, rank_tol: float | None = None) -> float:
    """kappa * sum of log sigma over singular values above the rank tolerance.

    Zero morphisms (and empty matrices) give 0.0 by the empty-product
    convention; rank truncation keeps the value finite always.
    """
    sv = singular_values(f)
    tol = _resolved_tol(f, sv, rank_tol)
    kept = sv[sv > tol]
    if len(kept) == 0:
        return 0.0
    return float(f.context.kappa * np.log(kept).sum())


def polar_decompose(f: Morphism, rank_tol: float | None = None) -> tuple[Morphism, Morphism]:
    """Return ``(f_iso, f_wiso)`` with f = f_iso o f_wiso.

    f_wiso = (f* f)^(1/2) is the Hermitian square root on the domain and
    f_iso = f (f* f)^(-1/2) (pseudo-inverted on the numerical support) is a
    partial isometry, isometric on the closure of the range of f_wiso.  Both
    come from one Hermitian eigendecomposition of f*f.
    """
    m = f.matrix
    gram = m.conj().T @ m
    gram = 0.5 * (gram + gram.conj().T)
    w, v = np.linalg.eigh(gram)
    top = float(w[-1]) if len(w) else 0.0
    floor = top * max(m.shape + (1,)) * np.finfo(float).eps * GRAM_FLOOR_SLACK
    sv = np.sqrt(np.where(w > floor, w, 0.0))
    tol = _resolved_tol(f, sv, rank_tol)
    wiso = (v * sv) @ v.conj().T
    wiso = 0.5 * (wiso + wiso.conj().T)
    inv = np.where(sv > tol, 1.0 / np.where(sv > tol, sv, 1.0), 0.0)
    iso = m @ ((v * inv) @ v.conj().T)
    return (Morphism(f.domain, f.codomain, iso),
            Morphism(f.domain, f.domain, wiso))


# ---------------------------------------------------------------------------
# spectral distribution functions


@dataclass(frozen=True, eq=False)
class SpectralDistribution:
    """Right-continuous step function F(lambda) = kappa * #{sigma^2 <= lambda}.

    ``lambdas`` are the ascending jump locations and ``values`` the cumulative
    values there, so F(lambda) = values[bisect_right(lambdas, lambda) - 1]
    (0 below the first jump).  ``total`` equals the vn-dimension of the domain.
    """

    lambdas: np.ndarray
    values: np.ndarray
    total: float

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        val = np.asarray(self.values, dtype=float)
        if lam.shape != val.shape or lam.ndim != 1:
            raise DataValidationError("jump locations and values must be equal-length vectors")
        if np.any(np.diff(lam) < 0) or np.any(np.diff(val) < 0):
            raise DataValidationError("spectral distribution must be nondecreasing")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "values", val)

    def value_at(self, lam: float) -> float:
        """F(lam), right-continuous."""
        idx = int(np.searchsorted(self.lambdas, lam, side="right"))
        return 0.0 if idx == 0 else float(self.values[idx - 1])

    def masses(self) -> tuple[np.ndarray, np.ndarray]:
        """Jump locations with their masses."""
        prev = np.concatenate(([0.0], self.values[:-1]))
        return self.lambdas, self.values - prev


def spectral_distribution(f: Morphism, rank_tol: float | None = None) -> SpectralDistribution:
    """Counting function of f*f eigenvalues, kappa-normalized.

    Singular values at or below the rank tolerance are treated as exactly
    zero (same truncation rule as ``log_vol`` / ``log_det_prime``).
    """
    sv = singular_values(f)
    tol = _resolved_tol(f, sv, rank_tol)
    lam = np.where(sv > tol, sv, 0.0) ** 2
    lam = np.sort(lam)
    uniq, counts = np.unique(lam, return_counts=True)
    values = f.context.kappa * np.cumsum(counts)
    total = f.context.kappa * f.domain.ambient_dim
    return SpectralDistribution(uniq, values, float(total))


def stieltjes_log_vol(dist: SpectralDistribution) -> float:
    """(1/2) * integral of log(lambda) dF over (0, infinity), as a jump sum.

    Independent route to ``log_vol``: F jumps at squared singular values, so
    the half-log Stieltjes sum reproduces kappa * sum log sigma.
    """
    lam, mass = dist.masses()
    keep = lam > 0.0
    if not np.any(keep):
        return 0.0
    return float(0.5 * np.sum(np.log(lam[keep]) * mass[keep]))


def is_determinant_class(f: Morphism, rank_tol: float | None = None) -> bool:
    """Whether integral of log(lambda) dF over (0, 1] is finite.

    In this finite-dimensional regime rank truncation makes the integral a
    finite sum, so the answer is always True; the predicate exists (and
    actually computes the sum) for API fidelity with the infinite-dimensional
    notion.
    """
    dist = spectral_distribution(f, rank_tol)
    lam, mass = dist.masses()
    keep = (lam > 0.0) & (lam <= 1.0)
    value = float(np.sum(np.log(lam[keep]) * mass[keep])) if np.any(keep) else 0.0
    return bool(np.isfinite(value))


# ---------------------------------------------------------------------------
# multiplicativity residuals


def _require_invertible(f: Morphism, name: str, rank_tol: float | None) -> None:
    if f.domain.ambient_dim != f.codomain.ambient_dim:
        raise DataValidationError(f"{name} must be square to be invertible, got {f.shape}")
    if f.domain.ambient_dim == 0:
        return
    sv = singular_values(f)
    tol = _resolved_tol(f, sv, rank_tol)
    if sv[0] <= tol:
        raise DataValidationError(
            f"{name} is numerically singular (smallest singular value {sv[0]:.3e} "
            f"<= tolerance {tol:.3e})")


def log_vol_additivity_residual(f: Morphism, g: Morphism,
                                rank_tol: float | None = None) -> float:
    """|log_vol(g o f) - log_vol(g) - log_vol(f)| for invertible f, g."""
    if not f.codomain.matches(g.domain):
        raise DataValidationError("g o f undefined: codomain of f is not the domain of g")
    _require_invertible(f, "f", rank_tol)
    _require_invertible(g, "g", rank_tol)
    return abs(log_vol(g @ f, rank_tol) - log_vol(g, rank_tol) - log_vol(f, rank_tol))


def block_triangular_log_vol_residual(f: Morphism, g: Morphism, h: Morphism,
                                      rank_tol: float | None = None) -> float:
    """Residual of the block rule: vol of [[f, h], [0, g]] vs vol f + vol g.

    f : W1 -> W1', g : W2 -> W2', h : W2 -> W1'; f and g invertible.
    """
    if not h.domain.matches(g.domain) or not h.codomain.matches(f.codomain):
        raise DataValidationError("h must map the domain of g into the codomain of f")
    _require_invertible(f, "f", rank_tol)
    _require_invertible(g, "g", rank_tol)
    dom = direct_sum_modules([f.domain, g.domain])
    cod = direct_sum_modules([f.codomain, g.codomain])
    top = np.hstack([f.matrix, h.matrix])
    bottom = np.hstack([np.zeros((g.shape[0], f.shape[1]), np.complex128), g.matrix])
    block = Morphism(dom, cod, np.vstack([top, bottom]))
    return abs(log_vol(block, rank_tol) - log_vol(f, rank_tol) - log_vol(g, rank_tol))


# ---------------------------------------------------------------------------
# group-ring matrices and linearity over the algebra


def right_regular(context: TraceContext, element) -> np.ndarray:
    """Permutation matrix of the right action delta_h -> delta_{h g}."""
    g = context.element_index(element)
    n = context.size
    m = np.zeros((n, n), np.complex128)
    for h in range(n):
        m[context.multiply(h, g), h] = 1.0
    return m


def left_regular(context: TraceContext, element) -> np.ndarray:
    """Permutation matrix of the algebra action delta_h -> delta_{g h}."""
    g = context.element_index(element)
    n = context.size
    m = np.zeros((n, n), np.complex128)
    for h in range(n):
        m[context.multiply(g, h), h] = 1.0
    return m


def group_ring_matrix(word: Iterable[tuple[object, complex]], context: TraceContext,
                      fiber_dim: int = 1) -> Morphism:
    """Sum of coeff x (right-regular block of g) (x) identity on the fiber.

    ``word`` is an iterable of (element, coefficient) pairs; elements may be
    indices or labels.  The result is an endomorphism of l^2(Gamma) (x) C^fiber
    and commutes with the (left-regular) algebra action by construction.
    """
    if not context.is_group:
        raise DataValidationError("group-ring matrices need a finite-group context")
    if fiber_dim < 1:
        raise DataValidationError("fiber dimension must be >= 1")
    n = context.size
    total = np.zeros((n * fiber_dim, n * fiber_dim), np.complex128)
    eye = np.eye(fiber_dim)
    for element, coeff in word:
        total += complex(coeff) * np.kron(right_regular(context, element), eye)
    module = regular_module(context, 1, fiber_dim)
    return Morphism(module, module, total)


def word_matrix(word: Iterable[tuple[object, complex]], context: TraceContext,
                fiber_dim: int = 1) -> np.ndarray:
    """The bare matrix of ``group_ring_matrix`` (one regular block)."""
    n = context.size
    total = np.zeros((n * fiber_dim, n * fiber_dim), np.complex128)
    eye = np.eye(fiber_dim)
    for element, coeff in word:
        total += complex(coeff) * np.kron(right_regular(context, element), eye)
    return total


def _algebra_action(module: HilbertModule, g: int) -> np.ndarray:
    ctx = module.context
    n = ctx.size
    block = n * module.fiber_dim
    if not module.free or module.ambient_dim % block:
        raise DataValidationError("algebra action needs a free module with known layout")
    copies = module.ambient_dim // block
    act = np.kron(left_regular(ctx, g), np.eye(module.fiber_dim))
    return np.kron(np.eye(copies), act)


def a_linearity_residual(f: Morphism) -> float:
    """Worst commutator norm of f against the blockwise algebra action.

    Both modules must be free (layout: copies-major, fiber innermost); over
    the complex field the residual is 0 by convention.  The algebra acts by
    left-regular permutation blocks on each l^2(Gamma) summand, which is the
    action every right-regular generator block commutes with.
    """
    ctx = f.context
    if not ctx.is_group:
        return 0.0
    worst = 0.0
    for g in range(ctx.size):
        act_dom = _algebra_action(f.domain, g)
        act_cod = _algebra_action(f.codomain, g)
        resid = f.matrix @ act_dom - act_cod @ f.matrix
        if resid.size:
            worst = max(worst, float(np.linalg.norm(resid, 2)))
    return worst
