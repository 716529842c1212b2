"""Exact integer and rational linear algebra for lattice certification.

Everything in this module runs on Python's arbitrary-precision ints and
``fractions.Fraction``; no floating point is allowed to enter.  The main
entry points are :func:`smith_normal_form` (with unimodular transform
tracking), :func:`completes_to_lattice_basis`, :func:`rat_inverse` and
:func:`cokernel_order`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "IntMatrix",
    "RatMatrix",
    "SmithDecomposition",
    "SingularMatrixError",
    "smith_normal_form",
    "completes_to_lattice_basis",
    "rat_inverse",
    "cokernel_order",
    "primitive_vector",
    "exact_rank",
    "solve_square_exact",
    "kernel_vector",
    "approx_rational",
]


class SingularMatrixError(ValueError):
    """Raised when an exact inverse or solve hits a singular matrix."""


def _check_rectangular(rows: Sequence[Sequence]) -> tuple[tuple, ...]:
    rows = tuple(tuple(r) for r in rows)
    if not rows or not rows[0]:
        raise ValueError("matrix must have at least one row and one column")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged rows")
    return rows


class IntMatrix:
    """Immutable integer matrix supporting exact arithmetic.

    Entries must be Python ints (bools are rejected); all operations are
    exact.  Shapes are validated on construction.
    """

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable[int]]):
        rows = _check_rectangular(rows)
        for r in rows:
            for e in r:
                if not isinstance(e, int) or isinstance(e, bool):
                    raise TypeError(f"integer entry expected, got {e!r}")
        object.__setattr__(self, "rows", rows)

    def __setattr__(self, name, value):
        raise AttributeError("IntMatrix is immutable")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def transpose(self) -> "IntMatrix":
        return IntMatrix(list(zip(*self.rows)))

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch in matrix product")
        cols = other.transpose().rows
        return IntMatrix(
            [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self.rows]
        )

    def mul_vec(self, v: Sequence[int]) -> tuple:
        if len(v) != self.ncols:
            raise ValueError("vector length mismatch")
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.rows)

    def det(self) -> int:
        if self.nrows != self.ncols:
            raise ValueError("determinant of non-square matrix")
        return _bareiss_det([list(r) for r in self.rows])

    def to_rational(self) -> "RatMatrix":
        return RatMatrix([[Fraction(e) for e in r] for r in self.rows])

    def __eq__(self, other) -> bool:
        return isinstance(other, IntMatrix) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        return f"IntMatrix({[list(r) for r in self.rows]})"


class RatMatrix:
    """Immutable matrix over Q; entries are normalized Fractions."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        rows = _check_rectangular(rows)
        conv = []
        for r in rows:
            out = []
            for e in r:
                if isinstance(e, float):
                    raise TypeError("RatMatrix entries must be exact (int or Fraction)")
                out.append(Fraction(e))
            conv.append(tuple(out))
        object.__setattr__(self, "rows", tuple(conv))

    def __setattr__(self, name, value):
        raise AttributeError("RatMatrix is immutable")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls([[Fraction(int(i == j)) for j in range(n)] for i in range(n)])

    def transpose(self) -> "RatMatrix":
        return RatMatrix(list(zip(*self.rows)))

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch in matrix product")
        cols = other.transpose().rows
        return RatMatrix(
            [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self.rows]
        )

    def mul_vec(self, v: Sequence) -> tuple:
        if len(v) != self.ncols:
            raise ValueError("vector length mismatch")
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.rows)

    def det(self) -> Fraction:
        if self.nrows != self.ncols:
            raise ValueError("determinant of non-square matrix")
        work = [list(r) for r in self.rows]
        det = Fraction(1)
        n = self.nrows
        for c in range(n):
            piv = next((i for i in range(c, n) if work[i][c] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != c:
                work[c], work[piv] = work[piv], work[c]
                det = -det
            det *= work[c][c]
            inv = 1 / work[c][c]
            for i in range(c + 1, n):
                f = work[i][c] * inv
                if f:
                    work[i] = [a - f * b for a, b in zip(work[i], work[c])]
        return det

    def is_integer(self) -> bool:
        return all(e.denominator == 1 for r in self.rows for e in r)

    def to_int(self) -> IntMatrix:
        if not self.is_integer():
            raise ValueError("matrix has non-integer entries")
        return IntMatrix([[int(e) for e in r] for r in self.rows])

    def to_float(self):
        return [[float(e) for e in r] for r in self.rows]

    def __eq__(self, other) -> bool:
        return isinstance(other, RatMatrix) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        return f"RatMatrix({[list(r) for r in self.rows]})"


def _bareiss_det(a: list[list[int]]) -> int:
    """Fraction-free determinant; intermediate values stay integral."""
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if piv is None:
                return 0
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class SmithDecomposition:
    """Smith normal form D = U @ M @ V with unimodular U, V.

    ``D`` is diagonal with nonnegative entries, each dividing the next.
    """

    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        k = min(self.D.nrows, self.D.ncols)
        diag = [self.D.rows[i][i] for i in range(k)]
        return tuple(d for d in diag if d != 0)

    def verify(self, M: IntMatrix) -> bool:
        return (self.U @ M @ self.V == self.D
                and abs(self.U.det()) == 1 and abs(self.V.det()) == 1)


def smith_normal_form(M: IntMatrix) -> SmithDecomposition:
    """Diagonalize M over Z, returning (U, D, V) with U @ M @ V = D.

    Pivot choice is the remaining entry of smallest nonzero absolute
    value, which keeps intermediate growth tame on the small matrices
    certified here.  Diagonal entries come out nonnegative and satisfy
    the divisibility chain d1 | d2 | ... by construction: a pivot is not
    finalized until it divides every entry of the trailing submatrix.
    """
    A = [list(r) for r in M.rows]
    m, n = len(A), len(A[0])
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):
        # row_dst += c * row_src
        A[dst] = [a + c * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        for row in A:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    def negate_row(i):
        A[i] = [-a for a in A[i]]
        U[i] = [-a for a in U[i]]

    t = 0
    while t < min(m, n):
        # locate smallest-|entry| pivot in the trailing block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] != 0 and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        if A[t][t] < 0:
            negate_row(t)

        while True:
            # reduce column t, restarting on any nonzero remainder
            dirty = False
            for i in range(m):
                if i != t and A[i][t] != 0:
                    q, r = divmod(A[i][t], A[t][t])
                    add_row(t, i, -q)
                    if r != 0:
                        swap_rows(t, i)
                        dirty = True
            if dirty:
                continue
            for j in range(n):
                if j != t and A[t][j] != 0:
                    q, r = divmod(A[t][j], A[t][t])
                    add_col(t, j, -q)
                    if r != 0:
                        swap_cols(t, j)
                        dirty = True
            if dirty:
                continue
            # pivot must divide the whole trailing submatrix before we move on
            bad = next(
                ((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                 if A[i][j] % A[t][t] != 0),
                None,
            )
            if bad is None:
                break
            add_row(bad[0], t, 1)
        t += 1

    return SmithDecomposition(IntMatrix(U), IntMatrix(A), IntMatrix(V))


def completes_to_lattice_basis(vectors: Sequence[Sequence[int]]) -> bool:
    """True iff the given k vectors extend to a Z-basis of Z**d.

    Equivalent to the Smith invariant factors of the k x d stack being
    (1, ..., 1) with full rank k.  Zero vectors and k > d stacks are
    rejected outright.
    """
    vecs = [tuple(v) for v in vectors]
    if not vecs:
        return True
    d = len(vecs[0])
    if len(vecs) > d:
        return False
    if any(all(e == 0 for e in v) for v in vecs):
        return False
    snf = smith_normal_form(IntMatrix(vecs))
    factors = snf.invariant_factors
    return len(factors) == len(vecs) and all(f == 1 for f in factors)


def rat_inverse(M: RatMatrix) -> RatMatrix:
    """Exact inverse over Q via Gauss-Jordan elimination."""
    if M.nrows != M.ncols:
        raise SingularMatrixError("cannot invert a non-square matrix")
    n = M.nrows
    work = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M.rows)]
    for c in range(n):
        piv = max(range(c, n), key=lambda i: abs(work[i][c]))
        if work[piv][c] == 0:
            raise SingularMatrixError("matrix is singular over Q")
        work[c], work[piv] = work[piv], work[c]
        inv = 1 / work[c][c]
        work[c] = [e * inv for e in work[c]]
        for i in range(n):
            if i != c and work[i][c] != 0:
                f = work[i][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[c])]
    return RatMatrix([row[n:] for row in work])


def cokernel_order(M: IntMatrix) -> int | None:
    """Order of Z**d / (row span of M), or None when infinite.

    The quotient is finite exactly when the rows span a finite-index
    subgroup, i.e. the rank equals the ambient dimension; the order is
    then the product of the invariant factors.
    """
    snf = smith_normal_form(M)
    factors = snf.invariant_factors
    if len(factors) < M.ncols:
        return None
    return math.prod(factors)


def primitive_vector(v: Sequence[int]) -> tuple[int, ...]:
    """Divide an integer vector by the gcd of its entries."""
    g = math.gcd(*(abs(int(e)) for e in v)) if len(v) > 1 else abs(int(v[0]))
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(int(e) // g for e in v)


def is_primitive(v: Sequence[int]) -> bool:
    try:
        return tuple(v) == primitive_vector(v)
    except ValueError:
        return False


def exact_rank(rows: Sequence[Sequence]) -> int:
    """Rank over Q of a stack of int/Fraction rows."""
    work = [[Fraction(e) for e in r] for r in rows]
    if not work:
        return 0
    ncols = len(work[0])
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(work)) if work[i][c] != 0), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        inv = 1 / work[rank][c]
        work[rank] = [e * inv for e in work[rank]]
        for i in range(len(work)):
            if i != rank and work[i][c] != 0:
                f = work[i][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[rank])]
        rank += 1
        if rank == len(work):
            break
    return rank


def solve_square_exact(A: Sequence[Sequence], b: Sequence) -> tuple | None:
    """Solve Ax = b over Q; returns None when A is singular."""
    n = len(A)
    work = [[Fraction(e) for e in row] + [Fraction(bv)] for row, bv in zip(A, b)]
    for c in range(n):
        piv = next((i for i in range(c, n) if work[i][c] != 0), None)
        if piv is None:
            return None
        work[c], work[piv] = work[piv], work[c]
        inv = 1 / work[c][c]
        work[c] = [e * inv for e in work[c]]
        for i in range(n):
            if i != c and work[i][c] != 0:
                f = work[i][c]
                work[i] = [a - f * b2 for a, b2 in zip(work[i], work[c])]
    return tuple(row[n] for row in work)


def kernel_vector(rows: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Primitive integer kernel vector of a (d-1) x d integer stack.

    Computed by the alternating-minor (generalized cross product)
    formula; raises if the stack does not have rank d-1.
    """
    rows = [tuple(int(e) for e in r) for r in rows]
    d = len(rows[0]) if rows else 1
    if len(rows) != d - 1:
        raise ValueError("kernel_vector expects exactly d-1 rows")
    if d == 1:
        return (1,)
    v = []
    for j in range(d):
        minor = [[r[c] for c in range(d) if c != j] for r in rows]
        v.append((-1) ** j * _bareiss_det(minor))
    if all(e == 0 for e in v):
        raise ValueError("rows are linearly dependent; kernel is not a line")
    return primitive_vector(v)


def approx_rational(x: float, max_denominator: int = 10**6, tol: float = 1e-9) -> Fraction | None:
    """Heuristic rational recognition for a float, or None.

    Two-stage test: a small-denominator fraction (<= 10**4) is accepted
    at the requested tolerance, while larger denominators up to
    ``max_denominator`` must match at essentially machine precision.
    Continued-fraction convergents of quadratic irrationals with large
    denominators approximate too well for a single loose tolerance.
    """
    small = Fraction(x).limit_denominator(min(10**4, max_denominator))
    if abs(x - float(small)) <= tol:
        return small
    f = Fraction(x).limit_denominator(max_denominator)
    if abs(x - float(f)) <= 1e-13 * max(1.0, abs(x)):
        return f
    return None
