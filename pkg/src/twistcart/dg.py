"""Graded cochain complexes, chain maps, mapping cones and cohomology.

Complexes are bounded with an explicit top degree.  Degrees may start at
-1: the mapping cone of a pair grades its cochains by the degree of the
small-complex component, so the big complex's degree-0 piece sits in cone
degree -1 (shipped models themselves start at 0).

Cone sign convention, used verbatim everywhere including the twisted
variants in :mod:`twistcart.cartan`:

    delta(n, a) = (-d(n), d(a) + i*(n))
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidComplex
from .linalg import (QQ, SparseMatrix, Subspace, image_basis, kernel_basis,
                     quotient_dim, express_in, rank as matrix_rank)
from . import serialize


@dataclass(frozen=True)
class GradedSpace:
    """Finite family of based vector spaces indexed by an integer degree."""

    dims: dict  # degree -> list of basis labels (unique within a degree)

    def degrees(self):
        return sorted(self.dims)

    def dim(self, n: int) -> int:
        return len(self.dims.get(n, ()))

    def labels(self, n: int):
        return list(self.dims.get(n, ()))

    def validate(self):
        for n, labels in self.dims.items():
            if len(set(labels)) != len(labels):
                raise InvalidComplex(f"duplicate basis labels in degree {n}")


@dataclass(frozen=True)
class CochainComplex:
    """Bounded complex of based Q-vector spaces with degree +1 differential."""

    spaces: GradedSpace
    differentials: dict  # degree n -> SparseMatrix of shape dim(n+1) x dim(n)
    top_degree: int

    def dim(self, n: int) -> int:
        return self.spaces.dim(n)

    def d(self, n: int) -> SparseMatrix:
        m = self.differentials.get(n)
        if m is None:
            return SparseMatrix.zero(self.dim(n + 1), self.dim(n))
        return m

    def validate(self):
        self.spaces.validate()
        for n, m in self.differentials.items():
            if (m.rows, m.cols) != (self.dim(n + 1), self.dim(n)):
                raise InvalidComplex(
                    f"differential at degree {n} has shape {m.rows}x{m.cols}, "
                    f"expected {self.dim(n + 1)}x{self.dim(n)}")
        for n in self.spaces.degrees():
            if n + 1 <= self.top_degree:
                sq = self.d(n + 1) @ self.d(n)
                if not sq.is_zero():
                    raise InvalidComplex(f"d^2 != 0 out of degree {n}")

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * self.dim(n) for n in self.spaces.degrees())

    def to_json(self) -> dict:
        return {
            "degrees": self.spaces.degrees(),
            "labels": {str(n): self.spaces.labels(n)
                       for n in self.spaces.degrees()},
            "differentials": {str(n): serialize.sparse_to_json(m)
                              for n, m in sorted(self.differentials.items())},
            "topDegree": self.top_degree,
        }

    @staticmethod
    def from_json(obj) -> "CochainComplex":
        labels = {int(n): list(ls) for n, ls in obj["labels"].items()}
        spaces = GradedSpace(labels)
        diffs = {}
        for n_str, items in obj.get("differentials", {}).items():
            n = int(n_str)
            diffs[n] = serialize.sparse_from_json(
                len(labels.get(n + 1, ())), len(labels.get(n, ())), items)
        c = CochainComplex(spaces, diffs, int(obj["topDegree"]))
        c.validate()
        return c


@dataclass(frozen=True)
class ChainMap:
    """Degree-shifting map commuting with differentials up to (-1)^shift."""

    source: CochainComplex
    target: CochainComplex
    degree_shift: int
    components: dict  # source degree n -> SparseMatrix dim_target(n+shift) x dim_source(n)

    def component(self, n: int) -> SparseMatrix:
        m = self.components.get(n)
        if m is None:
            return SparseMatrix.zero(self.target.dim(n + self.degree_shift),
                                     self.source.dim(n))
        return m

    def validate(self):
        s = self.degree_shift
        sign = QQ(-1) ** s
        for n in self.source.spaces.degrees():
            if n + 1 > self.source.top_degree:
                continue
            lhs = self.target.d(n + s) @ self.component(n)
            rhs = (self.component(n + 1) @ self.source.d(n)).scale(sign)
            if lhs != rhs:
                raise InvalidComplex(
                    f"chain map fails to commute with d out of degree {n}")


@dataclass(frozen=True)
class ConePair:
    """Pair (big, small, restriction) feeding the algebraic mapping cone."""

    big: CochainComplex
    small: CochainComplex
    restriction: ChainMap  # degree 0, big -> small

    def validate(self):
        if self.restriction.degree_shift != 0:
            raise InvalidComplex("restriction must have degree shift 0")
        if self.restriction.source != self.big or \
                self.restriction.target != self.small:
            raise InvalidComplex("restriction endpoints do not match the pair")
        self.restriction.validate()


@dataclass
class CohomologyGroup:
    dim: int
    representatives: tuple  # coset representatives, vectors in degree n coords
    kernel: Subspace
    boundaries: Subspace


def cohomology(c: CochainComplex) -> dict:
    """H^n = ker d^n / im d^{n-1} with representatives, for n <= top degree."""
    c.validate()
    out = {}
    degs = [n for n in c.spaces.degrees() if n <= c.top_degree]
    for n in degs:
        z = kernel_basis(c.d(n))
        b = image_basis(c.d(n - 1)) if c.dim(n - 1) else Subspace.zero(c.dim(n))
        dim, reps = quotient_dim(b, z)
        out[n] = CohomologyGroup(dim, reps, z, b)
    return out


def mapping_cone(p: ConePair) -> CochainComplex:
    """Cone^n = big^{n+1} (+) small^n with delta(n,a) = (-d n, d a + i* n)."""
    p.validate()
    big, small, res = p.big, p.small, p.restriction
    degrees = set()
    for n in big.spaces.degrees():
        degrees.add(n - 1)
    degrees.update(small.spaces.degrees())
    dims = {}
    for n in sorted(degrees):
        labels = [("N", lab) for lab in big.spaces.labels(n + 1)]
        labels += [("A", lab) for lab in small.spaces.labels(n)]
        if labels:
            dims[n] = labels
    top = min(big.top_degree - 1, small.top_degree)
    spaces = GradedSpace(dims)

    diffs = {}
    for n in sorted(dims):
        bn, an = big.dim(n + 1), small.dim(n)
        bn1, an1 = big.dim(n + 2), small.dim(n + 1)
        entries = []
        for (r, cidx), v in big.d(n + 1).entries.items():
            entries.append((r, cidx, -v))
        for (r, cidx), v in res.component(n + 1).entries.items():
            entries.append((bn1 + r, cidx, v))
        for (r, cidx), v in small.d(n).entries.items():
            entries.append((bn1 + r, bn + cidx, v))
        diffs[n] = SparseMatrix.from_entries(bn1 + an1, bn + an, entries)
    cone = CochainComplex(spaces, diffs, top)
    cone.validate()
    return cone


@dataclass
class QuasiIsoReport:
    is_quasi_iso: bool
    per_degree: dict  # n -> {"source_dim", "target_dim", "bijective"}


def induced_map_on_cohomology(f_matrix, source_group: CohomologyGroup,
                              target_group: CohomologyGroup):
    """Matrix of the induced map in the chosen representative bases.

    Each source representative is pushed through f and expressed in the
    target's representative basis modulo the target's boundaries.
    """
    cols = []
    tg_vectors = list(target_group.representatives) + list(target_group.boundaries.basis)
    for rep in source_group.representatives:
        img = f_matrix.apply(rep)
        coeffs = express_in(tg_vectors, img)
        if coeffs is None:
            raise InvalidComplex("image of a cocycle is not a cocycle class")
        cols.append(coeffs[:target_group.dim])
    n_rows = target_group.dim
    entries = []
    for j, col in enumerate(cols):
        for i in range(n_rows):
            if col[i]:
                entries.append((i, j, col[i]))
    return SparseMatrix.from_entries(n_rows, len(cols), entries)


def is_quasi_iso(f: ChainMap, window: int) -> QuasiIsoReport:
    """True iff f induces isomorphisms on H^n for every n <= window."""
    f.validate()
    if f.degree_shift != 0:
        raise InvalidComplex("quasiisomorphism test expects degree shift 0")
    hs = cohomology(f.source)
    ht = cohomology(f.target)
    per = {}
    ok = True
    degs = sorted(set(hs) | set(ht))
    for n in degs:
        if n > window:
            continue
        sdim = hs[n].dim if n in hs else 0
        tdim = ht[n].dim if n in ht else 0
        bij = sdim == tdim
        if bij and sdim:
            m = induced_map_on_cohomology(f.component(n), hs[n], ht[n])
            bij = matrix_rank(m) == sdim
        per[n] = {"source_dim": sdim, "target_dim": tdim, "bijective": bij}
        ok = ok and bij
    return QuasiIsoReport(ok, per)


def six_node_exactness(node_dims, maps):
    """Exactness of a cyclic 6-node sequence given induced-map matrices.

    ``maps[i]`` sends node i to node (i+1) mod 6.  At each node the image
    of the incoming map must equal the kernel of the outgoing one.
    """
    report = []
    exact = True
    for i in range(6):
        incoming = maps[(i - 1) % 6]
        outgoing = maps[i]
        im = image_basis(incoming)
        ker = kernel_basis(outgoing)
        ok = im == ker
        report.append({
            "node": i,
            "dim": node_dims[i],
            "im_incoming": im.dim,
            "ker_outgoing": ker.dim,
            "exact": ok,
        })
        exact = exact and ok
    return exact, report
