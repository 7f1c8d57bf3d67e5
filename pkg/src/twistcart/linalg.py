"""Exact sparse linear algebra over the rationals and Gaussian rationals.

Every rank, kernel, image and quotient in the workbench reduces to this
module.  Scalars are ``fractions.Fraction`` or :class:`GaussianRational`;
no floating point enters here.  All echelon bases are reduced row echelon
form with leftmost-pivot selection, so results are canonical and
independent of how the input entries were inserted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .errors import DimensionMismatch, NotContained

QQ = Fraction


class GaussianRational:
    """Element a + b*i with a, b rational; a field, conjugation-stable."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def promote(x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        return GaussianRational(x)

    def __add__(self, other):
        o = GaussianRational.promote(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.promote(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.promote(other) - self

    def __mul__(self, other):
        o = GaussianRational.promote(other)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.promote(other)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return self * GaussianRational(o.re / n, -o.im / n)

    def __rtruediv__(self, other):
        return GaussianRational.promote(other) / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"


GAUSS_I = GaussianRational(0, 1)


def scalar_zero(sample):
    return GaussianRational(0) if isinstance(sample, GaussianRational) else QQ(0)


def scalar_conj(x):
    return x.conjugate() if isinstance(x, GaussianRational) else x


@dataclass(frozen=True)
class SparseMatrix:
    """Sparse exact matrix; no stored zeros, one entry per position."""

    rows: int
    cols: int
    entries: dict

    @staticmethod
    def from_entries(rows: int, cols: int, items) -> "SparseMatrix":
        d = {}
        for r, c, v in items:
            if not (0 <= r < rows and 0 <= c < cols):
                raise DimensionMismatch(f"entry ({r},{c}) outside {rows}x{cols}")
            if (r, c) in d:
                raise ValueError(f"duplicate entry at ({r},{c})")
            if v:
                d[(r, c)] = v
        return SparseMatrix(rows, cols, d)

    @staticmethod
    def from_dense(rows_of_scalars) -> "SparseMatrix":
        rows = len(rows_of_scalars)
        cols = len(rows_of_scalars[0]) if rows else 0
        d = {}
        for i, row in enumerate(rows_of_scalars):
            if len(row) != cols:
                raise DimensionMismatch("ragged dense matrix")
            for j, v in enumerate(row):
                if v:
                    d[(i, j)] = v
        return SparseMatrix(rows, cols, d)

    @staticmethod
    def identity(n: int) -> "SparseMatrix":
        return SparseMatrix(n, n, {(i, i): QQ(1) for i in range(n)})

    @staticmethod
    def zero(rows: int, cols: int) -> "SparseMatrix":
        return SparseMatrix(rows, cols, {})

    def to_dense(self):
        out = [[QQ(0)] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows,
                            {(c, r): v for (r, c), v in self.entries.items()})

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("matrix addition shape mismatch")
        d = dict(self.entries)
        for k, v in other.entries.items():
            s = d.get(k, 0) + v
            if s:
                d[k] = s
            elif k in d:
                del d[k]
        return SparseMatrix(self.rows, self.cols, d)

    def __neg__(self) -> "SparseMatrix":
        return SparseMatrix(self.rows, self.cols,
                            {k: -v for k, v in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a) -> "SparseMatrix":
        if not a:
            return SparseMatrix.zero(self.rows, self.cols)
        return SparseMatrix(self.rows, self.cols,
                            {k: a * v for k, v in self.entries.items()})

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch("matrix product shape mismatch")
        by_row = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        d = {}
        for (r, k), v in self.entries.items():
            for c, w in by_row.get(k, ()):
                s = d.get((r, c), 0) + v * w
                d[(r, c)] = s
        return SparseMatrix(self.rows, other.cols,
                            {k: v for k, v in d.items() if v})

    def apply(self, vec):
        """Matrix times a dense vector (tuple), returning a tuple."""
        if len(vec) != self.cols:
            raise DimensionMismatch("vector length mismatch")
        out = [QQ(0)] * self.rows
        for (r, c), v in self.entries.items():
            if vec[c]:
                out[r] = out[r] + v * vec[c]
        return tuple(out)

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other):
        return (isinstance(other, SparseMatrix)
                and self.rows == other.rows and self.cols == other.cols
                and self.entries == other.entries)


def _rref(rows):
    """Reduced row echelon form in place semantics (returns new lists).

    Returns (pivot_columns, reduced_rows_without_zero_rows).  Pivot choice
    is leftmost column, first nonzero row from the top: canonical.
    """
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                pr = i
                break
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots, [tuple(row) for row in rows[:len(pivots)]]


def _cleared_rows(m: SparseMatrix):
    """Dense rows with denominators cleared; entries integral (in Z or Z[i])."""
    dense = m.to_dense()
    out = []
    for row in dense:
        dens = []
        for v in row:
            if isinstance(v, GaussianRational):
                dens.extend([v.re.denominator, v.im.denominator])
            else:
                dens.append(v.denominator)
        mult = lcm(*dens) if dens else 1
        out.append([v * mult for v in row])
    return out


def rank(m: SparseMatrix) -> int:
    """Rank by fraction-free (Bareiss) elimination on the cleared matrix."""
    rows = _cleared_rows(m)
    rows = [r for r in rows if any(r)]
    if not rows:
        return 0
    ncols = m.cols
    prev = 1
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                pr = i
                break
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        piv = rows[r][c]
        for i in range(r + 1, len(rows)):
            fi = rows[i][c]
            for j in range(c, ncols):
                # Bareiss step: exact division by the previous pivot.
                rows[i][j] = (rows[i][j] * piv - fi * rows[r][j]) / prev
        prev = piv
        r += 1
        if r == len(rows):
            break
    return r


@dataclass(frozen=True)
class Subspace:
    """Subspace of Q^n (or Q(i)^n) with a canonical RREF basis."""

    ambient_dim: int
    basis: tuple  # tuple of tuples, reduced row echelon, no zero rows

    @staticmethod
    def from_vectors(ambient_dim: int, vectors) -> "Subspace":
        vecs = [tuple(v) for v in vectors]
        for v in vecs:
            if len(v) != ambient_dim:
                raise DimensionMismatch("vector length != ambient dimension")
        _, rows = _rref(vecs)
        return Subspace(ambient_dim, tuple(rows))

    @staticmethod
    def zero(ambient_dim: int) -> "Subspace":
        return Subspace(ambient_dim, ())

    @staticmethod
    def full(ambient_dim: int) -> "Subspace":
        return Subspace(ambient_dim, tuple(
            tuple(QQ(1) if i == j else QQ(0) for j in range(ambient_dim))
            for i in range(ambient_dim)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _pivot_map(self):
        piv = {}
        for row in self.basis:
            for j, v in enumerate(row):
                if v:
                    piv[j] = row
                    break
        return piv

    def reduce(self, vec):
        """Residue of vec after subtracting its projection along the basis."""
        v = list(vec)
        for row in self.basis:
            lead = None
            for j, x in enumerate(row):
                if x:
                    lead = j
                    break
            if lead is not None and v[lead]:
                f = v[lead]
                v = [a - f * b for a, b in zip(v, row)]
        return tuple(v)

    def contains(self, vec) -> bool:
        return not any(self.reduce(vec))

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def sum(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch("subspace sum in different ambients")
        return Subspace.from_vectors(self.ambient_dim,
                                     list(self.basis) + list(other.basis))

    def __eq__(self, other):
        return (isinstance(other, Subspace)
                and self.ambient_dim == other.ambient_dim
                and self.basis == other.basis)


def kernel_basis(m: SparseMatrix) -> Subspace:
    """Canonical echelon basis of the null space of m."""
    pivots, rows = _rref(m.to_dense())
    piv_set = set(pivots)
    free = [c for c in range(m.cols) if c not in piv_set]
    vecs = []
    for fc in free:
        v = [QQ(0)] * m.cols
        v[fc] = QQ(1)
        for prow, pcol in zip(rows, pivots):
            if prow[fc]:
                v[pcol] = -prow[fc]
        vecs.append(v)
    return Subspace.from_vectors(m.cols, vecs)


def image_basis(m: SparseMatrix) -> Subspace:
    """Canonical echelon basis of the column space of m."""
    _, rows = _rref(m.transpose().to_dense())
    return Subspace(m.rows, tuple(rows))


def quotient_dim(sub: Subspace, sup: Subspace):
    """dim(sup/sub) together with coset representatives extending sub.

    Raises NotContained when sub is not inside sup.  The representatives,
    appended to sub's basis, span sup.
    """
    if sub.ambient_dim != sup.ambient_dim:
        raise DimensionMismatch("quotient of subspaces in different ambients")
    if not sup.contains_subspace(sub):
        raise NotContained("claimed subspace not contained in the ambient one")
    reps = []
    current = sub
    for v in sup.basis:
        red = current.reduce(v)
        if any(red):
            reps.append(red)
            current = current.sum(Subspace.from_vectors(sub.ambient_dim, [red]))
    return sup.dim - sub.dim, tuple(reps)


def solve(m: SparseMatrix, b):
    """One solution x of m x = b, or None when inconsistent."""
    if len(b) != m.rows:
        raise DimensionMismatch("rhs length mismatch")
    aug = [row + [bv] for row, bv in zip(m.to_dense(), b)]
    pivots, rows = _rref(aug)
    if m.cols in pivots:
        return None
    x = [QQ(0)] * m.cols
    for prow, pcol in zip(rows, pivots):
        x[pcol] = prow[-1]
    return tuple(x)


def express_in(vectors, target):
    """Coefficients c with sum(c_i * vectors[i]) = target, or None.

    Used to express cohomology classes in a chosen representative basis.
    """
    if not vectors:
        return None if any(target) else ()
    cols = len(vectors)
    n = len(vectors[0])
    m = SparseMatrix.from_entries(
        n, cols, ((i, j, vectors[j][i]) for j in range(cols) for i in range(n)))
    return solve(m, target)


def det(m: SparseMatrix):
    """Determinant by exact field elimination (square matrices only)."""
    if m.rows != m.cols:
        raise DimensionMismatch("determinant of a non-square matrix")
    rows = m.to_dense()
    n = m.rows
    sign = 1
    d = QQ(1)
    for c in range(n):
        pr = None
        for i in range(c, n):
            if rows[i][c]:
                pr = i
                break
        if pr is None:
            return QQ(0)
        if pr != c:
            rows[c], rows[pr] = rows[pr], rows[c]
            sign = -sign
        piv = rows[c][c]
        d = d * piv
        for i in range(c + 1, n):
            if rows[i][c]:
                f = rows[i][c] / piv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    return sign * d
