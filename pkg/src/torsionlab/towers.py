"""Finite-quotient approximation of determinants over the integer line.

A translation-invariant operator on l^2(Z)^n is an n x n matrix of Laurent
polynomials in the shift t.  Reducing modulo m turns the shift into the
cyclic shift on Z/m, every entry into an m x m circulant, and the operator
into a morphism over the Z/m trace context whose normalized log-determinant
is exactly computable.  Running these up a divisibility-nested tower of
levels approximates the true L2 log-determinant of the operator, which is
independently available as a symbol integral over the unit circle (a Mahler
measure in the scalar case) — the two routes cross-validate each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DataValidationError, NumericalError, QuadratureError
from .vn import (
    Morphism,
    SpectralDistribution,
    cyclic_group,
    regular_module,
    right_regular,
)

DEFAULT_LEVELS = tuple(2 ** k for k in range(1, 13))
LEVEL_AGREEMENT_TOL = 1e-9
QUAD_TOL = 1e-8
MAX_REFINEMENT = 22
SELFADJOINT_TOL = 1e-10
EIG_FLOOR_SLACK = 8.0
INTEGER_DET_CAP = 2.0 ** 26


# ---------------------------------------------------------------------------
# Laurent polynomials and matrices


@dataclass(frozen=True)
class LaurentPoly:
    """Finite Laurent polynomial sum of coeff * t^exponent.

    Terms are kept canonical: ascending exponents, equal exponents merged,
    exact-zero coefficients dropped — so equal polynomials compare equal.
    """

    terms: tuple[tuple[int, complex], ...] = ()

    def __post_init__(self):
        merged: dict[int, complex] = {}
        for exponent, coeff in self.terms:
            e = int(exponent)
            merged[e] = merged.get(e, 0.0 + 0.0j) + complex(coeff)
        canonical = tuple((e, merged[e]) for e in sorted(merged) if merged[e] != 0)
        object.__setattr__(self, "terms", canonical)

    @classmethod
    def constant(cls, value: complex) -> "LaurentPoly":
        return cls(((0, complex(value)),))

    @classmethod
    def shift(cls, exponent: int = 1, coeff: complex = 1.0) -> "LaurentPoly":
        return cls(((int(exponent), complex(coeff)),))

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        return LaurentPoly(self.terms + other.terms)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        return LaurentPoly(tuple((e1 + e2, c1 * c2)
                                 for e1, c1 in self.terms
                                 for e2, c2 in other.terms))

    def scale(self, value: complex) -> "LaurentPoly":
        return LaurentPoly(tuple((e, complex(value) * c) for e, c in self.terms))

    def adjoint(self) -> "LaurentPoly":
        return LaurentPoly(tuple((-e, np.conj(c)) for e, c in self.terms))

    def coeff_abs_sum(self) -> float:
        return float(sum(abs(c) for _, c in self.terms))

    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self) -> str:
        """Human form, e.g. "2 - t - t^-1".

        Real-coefficient output parses back through parse_laurent; terms
        with genuinely complex coefficients are rendered parenthesized for
        reading only.
        """
        if not self.terms:
            return "0"
        pieces = []
        for e, c in self.terms:
            if c.imag == 0:
                sign = "-" if c.real < 0 else "+"
                mag = abs(c.real)
                coeff = "" if mag == 1 and e != 0 else format(mag, "g")
            else:
                sign = "+"
                coeff = str(complex(c))
            if e == 0:
                body = coeff or "1"
            else:
                power = "t" if e == 1 else f"t^{e}"
                body = f"{coeff}*{power}" if coeff else power
            pieces.append((sign, body))
        first_sign, first_body = pieces[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __call__(self, z: complex | np.ndarray):
        """Evaluate at a point (or array of points) of the complex plane."""
        z = np.asarray(z, dtype=np.complex128)
        total = np.zeros_like(z)
        for e, c in self.terms:
            total = total + c * z ** e
        return total


def parse_laurent(text: str) -> LaurentPoly:
    """Parse expressions like "2 - t - t^-1" or "3*t^2 + 1.5".

    Terms are separated by top-level + and -; each term is an optional
    complex coefficient, an optional '*', and an optional t-power.
    """
    cleaned = text.replace("**", "^").replace(" ", "")
    if not cleaned:
        raise DataValidationError("empty operator expression")
    pieces: list[tuple[int, complex]] = []
    token = ""
    tokens: list[str] = []
    for i, ch in enumerate(cleaned):
        if ch in "+-" and i > 0 and cleaned[i - 1] not in "+-*^eEjJ(":
            tokens.append(token)
            token = ch
        else:
            token += ch
    tokens.append(token)
    for raw in tokens:
        term = raw.lstrip("+")
        sign = 1.0
        while term.startswith("-"):
            sign = -sign
            term = term[1:]
        if not term:
            raise DataValidationError(f"cannot parse term {raw!r}")
        try:
            if "t" in term:
                head, _, tail = term.partition("t")
                head = head.rstrip("*")
                coeff = complex(head) if head else 1.0 + 0.0j
                exponent = int(tail.lstrip("^")) if tail else 1
            else:
                coeff = complex(term)
                exponent = 0
        except ValueError:
            raise DataValidationError(f"cannot parse term {raw!r}") from None
        pieces.append((exponent, sign * coeff))
    return LaurentPoly(tuple(pieces))


@dataclass(frozen=True)
class LaurentMatrix:
    """Rectangular matrix of Laurent polynomials."""

    rows: tuple[tuple[LaurentPoly, ...], ...]

    def __post_init__(self):
        if not self.rows or not self.rows[0]:
            raise DataValidationError("a Laurent matrix needs at least one entry")
        width = len(self.rows[0])
        if any(len(row) != width for row in self.rows):
            raise DataValidationError("ragged Laurent matrix")

    @classmethod
    def from_scalar(cls, poly: LaurentPoly) -> "LaurentMatrix":
        return cls(((poly,),))

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[LaurentPoly]]) -> "LaurentMatrix":
        return cls(tuple(tuple(row) for row in entries))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def entry(self, i: int, j: int) -> LaurentPoly:
        return self.rows[i][j]

    def adjoint(self) -> "LaurentMatrix":
        n, m = self.shape
        return LaurentMatrix(tuple(tuple(self.rows[i][j].adjoint()
                                         for i in range(n)) for j in range(m)))

    def __add__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        if self.shape != other.shape:
            raise DataValidationError("shape mismatch in Laurent matrix sum")
        n, m = self.shape
        return LaurentMatrix(tuple(tuple(self.rows[i][j] + other.rows[i][j]
                                         for j in range(m)) for i in range(n)))

    def __matmul__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise DataValidationError("shape mismatch in Laurent matrix product")
        out = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = LaurentPoly()
                for s in range(k):
                    acc = acc + self.rows[i][s] * other.rows[s][j]
                row.append(acc)
            out.append(tuple(row))
        return LaurentMatrix(tuple(out))

    def selfadjointness_defect(self) -> float:
        n, m = self.shape
        if n != m:
            return float("inf")
        worst = 0.0
        star = self.adjoint()
        for i in range(n):
            for j in range(m):
                diff = self.rows[i][j] - star.rows[i][j]
                worst = max(worst, diff.coeff_abs_sum())
        return worst

    def norm_bound(self) -> float:
        """Row/column sum of coefficient l1 norms: a uniform bound on the
        operator norm of the symbol and of every finite specialization."""
        n, m = self.shape
        sums = [[self.rows[i][j].coeff_abs_sum() for j in range(m)]
                for i in range(n)]
        row = max(sum(r) for r in sums)
        col = max(sum(sums[i][j] for i in range(n)) for j in range(m))
        return float(max(row, col, 1e-300))

    def symbol(self, theta: np.ndarray) -> np.ndarray:
        """Evaluate entrywise at z = exp(2 pi i theta); returns (..., n, m)."""
        theta = np.asarray(theta, dtype=float)
        z = np.exp(2j * np.pi * theta)
        n, m = self.shape
        out = np.zeros(theta.shape + (n, m), np.complex128)
        for i in range(n):
            for j in range(m):
                out[..., i, j] = self.rows[i][j](z)
        return out


def _as_laurent_matrix(op) -> LaurentMatrix:
    if isinstance(op, LaurentMatrix):
        return op
    if isinstance(op, LaurentPoly):
        return LaurentMatrix.from_scalar(op)
    raise DataValidationError("expected a Laurent polynomial or matrix")


# ---------------------------------------------------------------------------
# finite quotients


def specialize(op, m: int) -> Morphism:
    """Reduce mod m: the shift becomes the cyclic shift on l^2(Z/m)."""
    mat = _as_laurent_matrix(op)
    if m < 1:
        raise DataValidationError("quotient order must be >= 1")
    ctx = cyclic_group(m)
    n, k = mat.shape
    out = np.zeros((n * m, k * m), np.complex128)
    for i in range(n):
        for j in range(k):
            poly = mat.rows[i][j]
            if poly.is_zero():
                continue
            block = out[i * m:(i + 1) * m, j * m:(j + 1) * m]
            for e, c in poly.terms:
                block += c * right_regular(ctx, e % m)
    return Morphism(regular_module(ctx, rank=k), regular_module(ctx, rank=n), out)


def _level_eigenvalues(op: LaurentMatrix, m: int,
                       specializer=None) -> tuple[np.ndarray, float]:
    """Eigenvalues of the level-m specialization, clamped at the noise floor.

    The spectrum provably sits in [0, norm_bound]; eigensolver roundoff a
    few ulps past the bound is clamped back so counting functions evaluated
    exactly at the bound see the whole spectrum.
    """
    f = (specializer or specialize)(op, m)
    mat = f.matrix
    scale = op.norm_bound()
    if np.abs(mat - mat.conj().T).max() > SELFADJOINT_TOL * scale:
        raise DataValidationError("operator is not selfadjoint")
    herm = 0.5 * (mat + mat.conj().T)
    if np.abs(herm.imag).max() == 0.0:
        w = np.linalg.eigvalsh(herm.real)
    else:
        w = np.linalg.eigvalsh(herm)
    if float(w[0]) < -1e-10 * scale:
        raise DataValidationError(
            f"operator is not nonnegative (eigenvalue {float(w[0]):.3e} at level {m})")
    if float(w[-1]) > scale * (1 + 1e-10):
        raise NumericalError(
            f"level {m} exceeds the uniform spectral bound {scale!r}")
    w = np.minimum(w, scale)
    floor = scale * mat.shape[0] * np.finfo(float).eps * EIG_FLOOR_SLACK
    return np.where(w > floor, w, 0.0), scale


@dataclass(frozen=True)
class TowerLevel:
    """One finite quotient: spectral data of the level-m specialization.

    ``distribution`` is the (1/m)-normalized eigenvalue counting function;
    ``log_det`` the normalized log-determinant (1/m) sum of log of nonzero
    eigenvalues; ``smallest_positive`` / ``largest`` bracket the nonzero
    spectrum.
    """

    m: int
    distribution: SpectralDistribution
    log_det: float
    smallest_positive: float
    largest: float


def _make_level(op: LaurentMatrix, m: int, specializer=None) -> TowerLevel:
    w, scale = _level_eigenvalues(op, m, specializer)
    positive = w[w > 0.0]
    log_det = float(np.sum(np.log(positive)) / m) if positive.size else 0.0
    uniq, counts = np.unique(w, return_counts=True)
    dist = SpectralDistribution(uniq, np.cumsum(counts) / m,
                                float(w.size / m))
    smallest = float(positive[0]) if positive.size else 0.0
    largest = float(w[-1]) if w.size else 0.0
    ibp = _integrate_by_parts(dist, max(scale, largest))
    if abs(ibp - log_det) > LEVEL_AGREEMENT_TOL * max(1.0, abs(log_det)):
        raise NumericalError(
            f"eigenvalue sum and Stieltjes routes disagree at level {m}: "
            f"{log_det!r} vs {ibp!r}")
    return TowerLevel(m, dist, log_det, smallest, largest)


def _integrate_by_parts(dist: SpectralDistribution, b: float) -> float:
    """(log b)(N(b) - N(0)) minus the exact step integral of (N - N(0))/lambda.

    The counting function is a step function, so the integral is a finite
    sum of plateau heights times log-length of the plateaus.
    """
    lam, mass = dist.masses()
    keep = lam > 0.0
    lam, mass = lam[keep], mass[keep]
    if lam.size == 0:
        return 0.0
    top_mass = float(np.sum(mass))
    cum = np.cumsum(mass)
    edges = np.concatenate((lam, [b]))
    integral = float(np.sum(cum * (np.log(edges[1:]) - np.log(edges[:-1]))))
    return float(np.log(b) * top_mass - integral)


def level_log_det(op, m: int) -> float:
    """Normalized log det' of the level-m quotient (two internal routes)."""
    return _make_level(_as_laurent_matrix(op), m).log_det


@dataclass(frozen=True)
class ApproxTower:
    """A nested family of finite quotients of one selfadjoint operator."""

    operator: LaurentMatrix
    levels: tuple[TowerLevel, ...]
    norm_bound: float

    def level_values(self) -> list[tuple[int, float]]:
        return [(level.m, level.log_det) for level in self.levels]


def approx_tower(op, levels: Iterable[int] = DEFAULT_LEVELS,
                 specializer=None) -> ApproxTower:
    """Build the tower, validating selfadjointness and level nesting.

    ``specializer`` maps (operator, level) to the finite-quotient Morphism
    and defaults to the integer-line reduction; supplying another quotient
    scheme reuses all the spectral bookkeeping unchanged.
    """
    mat = _as_laurent_matrix(op)
    if mat.selfadjointness_defect() > SELFADJOINT_TOL * mat.norm_bound():
        raise DataValidationError("operator is not selfadjoint")
    ms = [int(m) for m in levels]
    if not ms:
        raise DataValidationError("a tower needs at least one level")
    if any(m < 1 for m in ms):
        raise DataValidationError("levels must be positive")
    for a, b in zip(ms, ms[1:]):
        if b % a != 0:
            raise DataValidationError(
                f"levels must be divisibility-nested ({a} does not divide {b})")
    bound = mat.norm_bound()
    built = [_make_level(mat, m, specializer) for m in ms]
    return ApproxTower(mat, tuple(built), bound)


# ---------------------------------------------------------------------------
# circle-integral oracles


def _symbol_eigenvalues(op: LaurentMatrix, theta: np.ndarray) -> np.ndarray:
    sym = op.symbol(theta)
    if op.shape == (1, 1):
        return sym[..., 0].real
    sym = 0.5 * (sym + np.conj(np.swapaxes(sym, -1, -2)))
    return np.linalg.eigvalsh(sym)


def fourier_log_det(op, tol: float = QUAD_TOL,
                    max_refinement: int = MAX_REFINEMENT) -> float:
    """Mean over the circle of the log-product of positive symbol eigenvalues.

    Composite midpoint quadrature on dyadic grids with one Richardson
    extrapolation step; the returned value is the first extrapolated
    estimate whose successive difference is below ``tol``.  Isolated symbol
    zeros give integrable log singularities: plain midpoint converges like
    1/K there, and the extrapolation removes that leading term.  If the
    extrapolated estimates have not settled after ``max_refinement``
    doublings the computation fails with the last bracket.
    """
    mat = _as_laurent_matrix(op)
    if mat.selfadjointness_defect() > SELFADJOINT_TOL * mat.norm_bound():
        raise DataValidationError("operator is not selfadjoint")
    n = mat.shape[0]
    floor = mat.norm_bound() * n * np.finfo(float).eps * EIG_FLOOR_SLACK

    def estimate(k: int) -> float:
        points = 1 << k
        theta = (np.arange(points) + 0.5) / points
        w = _symbol_eigenvalues(mat, theta)
        if float(w.min()) < -1e-8 * mat.norm_bound():
            raise DataValidationError(
                "symbol is not positive-semidefinite on the circle "
                f"(eigenvalue {float(w.min()):.3e})")
        logs = np.where(w > floor, np.log(np.where(w > floor, w, 1.0)), 0.0)
        return float(logs.sum() / points)

    previous_est = estimate(4)
    current_est = estimate(5)
    older_ext = previous_ext = 2.0 * current_est - previous_est
    for k in range(6, max_refinement + 1):
        previous_est, current_est = current_est, estimate(k)
        extrapolated = 2.0 * current_est - previous_est
        if abs(extrapolated - previous_ext) < tol:
            return extrapolated
        older_ext, previous_ext = previous_ext, extrapolated
    raise QuadratureError("symbol integral did not converge",
                          bracket=(older_ext, previous_ext))


def fourier_counting(op, lam: float, points: int = 1 << 15) -> float:
    """Oracle spectral distribution: measure of the set of circle angles
    where the symbol has an eigenvalue at most lam, counted with
    multiplicity (vn-normalized, totals the matrix size)."""
    mat = _as_laurent_matrix(op)
    theta = (np.arange(points) + 0.5) / points
    w = _symbol_eigenvalues(mat, theta)
    return float(np.sum(w <= lam) / points)


# ---------------------------------------------------------------------------
# limit diagnostics


def limit_distribution_check(tower: ApproxTower, lam: float,
                             epsilons: Sequence[float]) -> dict:
    """Tabulate level counting functions against the circle oracle.

    For each epsilon the report row holds every level's N_m(lam + epsilon)
    and their empirical liminf (minimum over the deeper half of the tower).
    The oracle entry is the symbol-integral value of N(lam).  Anomalies
    flag any level whose counting value fails to be monotone in epsilon.
    """
    eps = sorted(float(e) for e in epsilons)
    if any(e < 0 for e in eps):
        raise DataValidationError("epsilon offsets must be nonnegative")
    rows = []
    for e in eps:
        values = {level.m: level.distribution.value_at(lam + e)
                  for level in tower.levels}
        tail = [values[level.m] for level in tower.levels[len(tower.levels) // 2:]]
        rows.append({"epsilon": e, "values": values,
                     "liminf": min(tail) if tail else 0.0})
    anomalies = []
    for level in tower.levels:
        series = [row["values"][level.m] for row in rows]
        if any(b < a - 1e-12 for a, b in zip(series, series[1:])):
            anomalies.append(level.m)
    return {
        "lambda": float(lam),
        "oracle": fourier_counting(tower.operator, lam),
        "rows": rows,
        "anomalies": anomalies,
    }


# ---------------------------------------------------------------------------
# integrality / nonnegativity diagnostics


def _require_integer_coefficients(mat: LaurentMatrix) -> None:
    n, m = mat.shape
    for i in range(n):
        for j in range(m):
            for _, c in mat.rows[i][j].terms:
                if abs(c.imag) > 1e-9 or abs(c.real - round(c.real)) > 1e-9:
                    raise DataValidationError(
                        "nonnegativity certificates need integer coefficients "
                        f"(entry ({i}, {j}) has {c!r})")


def _det_error_bound(tower: ApproxTower, level: TowerLevel) -> float:
    """First-order bound on the floating-point error of the level's det'.

    Each eigenvalue carries an absolute solver error around the clamping
    floor, so its log is off by floor/lambda; the determinant's relative
    error is that sum, plus accumulation ulps, times det' itself.
    """
    lam, mass = level.distribution.masses()
    keep = lam > 0.0
    if not np.any(keep):
        return 0.0
    dim = level.m * tower.operator.shape[0]
    floor = tower.norm_bound * dim * np.finfo(float).eps * EIG_FLOOR_SLACK
    relative = float(np.sum(mass[keep] * level.m / lam[keep])) * floor
    relative += dim * np.finfo(float).eps * 16.0
    return float(np.exp(level.log_det * level.m)) * relative


def nonnegativity_check(op, levels: Iterable[int] = tuple(2 ** k for k in range(1, 9)),
                        tol: float = 1e-6, quad_tol: float = 2e-5) -> dict:
    """Determinant-class evidence for an integer-coefficient operator.

    At every level the un-normalized det' of the specialization is a
    positive integer, so its log is >= 0; the limit value (the symbol
    integral) must then be >= 0 as well.  The report carries, per level,
    the un-normalized log det', the det' itself with its distance to the
    nearest integer whenever floating point can resolve that distance
    (small determinant and well-separated spectrum), and a passed flag;
    offending levels are listed.

    ``tol`` governs the per-level decisions; the symbol integral is only
    resolved to ``quad_tol`` (symbols whose zeros sit at irrational angles
    converge slowly under dyadic refinement), so the limit assertion uses
    the combined margin tol + quad_tol.
    """
    mat = _as_laurent_matrix(op)
    _require_integer_coefficients(mat)
    tower = approx_tower(mat, levels)
    level_rows = []
    offending = []
    for level in tower.levels:
        log_det_full = level.log_det * level.m
        row = {"m": level.m, "log_det_prime": log_det_full}
        det_error = _det_error_bound(tower, level)
        if log_det_full < np.log(INTEGER_DET_CAP) and det_error < 0.25 * tol:
            det = float(np.exp(log_det_full))
            row["det_prime"] = det
            row["integer_residual"] = abs(det - round(det))
        nonneg = log_det_full >= -tol
        row["nonnegative"] = bool(nonneg)
        if not nonneg:
            offending.append(level.m)
        level_rows.append(row)
    limit = fourier_log_det(mat, tol=quad_tol)
    margin = tol + quad_tol
    report = {
        "levels": level_rows,
        "fourier_log_det": limit,
        "fourier_nonnegative": bool(limit >= -margin),
        "offending_levels": offending,
        "passed": bool(not offending and limit >= -margin),
    }
    return report


# ---------------------------------------------------------------------------
# bridge from integer-twisted cell complexes


def cw_to_laurent(cw) -> list[LaurentMatrix]:
    """Differentials of a cell complex twisted over the integers.

    Incidence word elements must be integer shift powers ("e", "t", plain
    integers, or ("t", n)); each differential becomes a Laurent matrix with
    rows indexed by the (q+1)-cells and columns by the q-cells.
    """
    diffs: list[LaurentMatrix | None] = []
    for q in range(cw.top_degree):
        cols = cw.degree_cells(q)
        rows = cw.degree_cells(q + 1)
        if not cols or not rows:
            diffs.append(None)
            continue
        entries = [[LaurentPoly() for _ in cols] for _ in rows]
        for (to_cell, from_cell), word in cw.incidences.items():
            if from_cell in cols and to_cell in rows:
                terms = tuple((_shift_exponent(e), complex(c)) for e, c in word)
                entries[rows.index(to_cell)][cols.index(from_cell)] = LaurentPoly(terms)
        diffs.append(LaurentMatrix.from_lists(entries))
    return diffs


def _shift_exponent(element) -> int:
    if isinstance(element, (int, np.integer)):
        return int(element)
    if element == "e":
        return 0
    if element == "t":
        return 1
    if isinstance(element, tuple) and element[0] == "t":
        return int(element[1])
    raise DataValidationError(
        f"element {element!r} is not a power of the integer shift")


def laurent_laplacian(diffs: Sequence[LaurentMatrix | None], q: int) -> LaurentMatrix:
    """Degree-q Laplacian d_q* d_q + d_{q-1} d_{q-1}* of Laurent differentials."""
    up = diffs[q] if 0 <= q < len(diffs) else None
    down = diffs[q - 1] if 0 <= q - 1 < len(diffs) else None
    if up is None and down is None:
        raise DataValidationError(f"no differentials touch degree {q}")
    total = None
    if up is not None:
        total = up.adjoint() @ up
    if down is not None:
        term = down @ down.adjoint()
        total = term if total is None else total + term
    return total
