"""Pointwise generalized complex linear algebra on V + V*.

Everything is exact: matrices over Fraction, eigenspaces over Gaussian
rationals.  The pairing is the canonical split form

    <X + a, Y + b> = (b(X) + a(Y)) / 2

of signature (n, n), with coordinates ordered (V basis, V* basis).
Positivity of the metric 2-form of a pair is certified by leading
principal minors of its Gram matrix, not by sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (DimensionMismatch, InputError, InvalidTriple,
                     NotCommuting, NotConstantModel, NotGC, NotIsotropic,
                     NotPositive, NotTransverse)
from .linalg import (QQ, GAUSS_I, GaussianRational, SparseMatrix, Subspace,
                     det, kernel_basis, rank, scalar_conj, solve)


# ---------------------------------------------------------------------------
# Split space and pairing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpace:
    """V + V* for an n-dimensional V; vectors are tuples of length 2n."""

    n: int

    @property
    def total_dim(self):
        return 2 * self.n

    def pairing_matrix(self) -> SparseMatrix:
        n = self.n
        entries = []
        for i in range(n):
            entries.append((i, n + i, QQ(1, 2)))
            entries.append((n + i, i, QQ(1, 2)))
        return SparseMatrix.from_entries(2 * n, 2 * n, entries)


def pairing(space: SplitSpace, u, v):
    """<X + a, Y + b> = (b(X) + a(Y)) / 2."""
    n = space.n
    if len(u) != 2 * n or len(v) != 2 * n:
        raise DimensionMismatch("vectors do not live in this split space")
    acc = 0
    for i in range(n):
        acc = acc + u[i] * v[n + i] + u[n + i] * v[i]
    return acc / 2


# ---------------------------------------------------------------------------
# Generalized complex structures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GCStructure:
    """Orthogonal J on V + V* with J^2 = -1, as an exact 2n x 2n matrix."""

    space: SplitSpace
    matrix: SparseMatrix

    def block(self, row, col) -> SparseMatrix:
        n = self.space.n
        r0, c0 = row * n, col * n
        entries = [(r - r0, c - c0, v)
                   for (r, c), v in self.matrix.entries.items()
                   if r0 <= r < r0 + n and c0 <= c < c0 + n]
        return SparseMatrix.from_entries(n, n, entries)


def is_gc(space: SplitSpace, m: SparseMatrix) -> dict:
    """Report {ok, failed} for the two structure axioms on m."""
    n2 = space.total_dim
    if (m.rows, m.cols) != (n2, n2):
        raise DimensionMismatch(f"expected a {n2}x{n2} matrix")
    failed = []
    if (m @ m) + SparseMatrix.identity(n2) != SparseMatrix.zero(n2, n2):
        failed.append("J^2 != -1")
    p = space.pairing_matrix()
    if m.transpose() @ p @ m != p:
        failed.append("J is not orthogonal for the split pairing")
    return {"ok": not failed, "failed": failed}


def gc_structure(space: SplitSpace, m: SparseMatrix) -> GCStructure:
    report = is_gc(space, m)
    if not report["ok"]:
        raise NotGC("; ".join(report["failed"]))
    return GCStructure(space, m)


def _to_gaussian(m: SparseMatrix) -> SparseMatrix:
    return SparseMatrix(m.rows, m.cols,
                        {k: GaussianRational.promote(v)
                         for k, v in m.entries.items()})


@dataclass(frozen=True)
class IsotropicSubspace:
    """Maximal isotropic L in (V + V*) (x) C with L meeting conj(L) in 0."""

    space: SplitSpace
    basis: tuple  # n complex vectors of length 2n, canonical echelon form


def i_eigenspace(j: GCStructure) -> IsotropicSubspace:
    """Kernel of (J - i) over the Gaussian rationals; checks isotropy."""
    n = j.space.n
    m = _to_gaussian(j.matrix)
    shifted = m - SparseMatrix.identity(2 * n).scale(GAUSS_I)
    ker = kernel_basis(shifted)
    if ker.dim != n:
        raise NotGC(f"sqrt(-1) eigenspace has dimension {ker.dim}, not {n}")
    _check_isotropic(j.space, ker.basis)
    _check_transverse(j.space, ker.basis)
    return IsotropicSubspace(j.space, ker.basis)


def _check_isotropic(space, basis):
    for u in basis:
        for v in basis:
            if pairing(space, u, v):
                raise NotIsotropic("subspace is not isotropic for the pairing")


def _check_transverse(space, basis):
    conj = [tuple(scalar_conj(x) for x in v) for v in basis]
    stacked = list(basis) + conj
    m = SparseMatrix.from_dense([list(v) for v in stacked]).transpose()
    if rank(m) != space.total_dim:
        raise NotTransverse("L meets its conjugate nontrivially")


def gc_from_isotropic(space: SplitSpace, basis) -> GCStructure:
    """The unique GC structure whose +i eigenspace is the given L."""
    n = space.n
    basis = [tuple(GaussianRational.promote(x) for x in v) for v in basis]
    if len(basis) != n or any(len(v) != 2 * n for v in basis):
        raise DimensionMismatch("need n independent vectors of length 2n")
    _check_isotropic(space, basis)
    _check_transverse(space, basis)
    conj = [tuple(scalar_conj(x) for x in v) for v in basis]
    cols = basis + conj
    m = SparseMatrix.from_dense([list(col) for col in cols]).transpose()
    # J = M diag(i, .., i, -i, .., -i) M^{-1}, assembled column by column:
    # solve M c = e_k, then J e_k = M (diag) c.
    entries = []
    for k in range(2 * n):
        e = tuple(GaussianRational.promote(QQ(1) if i == k else QQ(0))
                  for i in range(2 * n))
        c = solve(m, e)
        if c is None:
            raise NotTransverse("eigenbasis does not span the complexification")
        scaled = [c[i] * (GAUSS_I if i < n else -GAUSS_I)
                  for i in range(2 * n)]
        col = m.apply(tuple(scaled))
        for i, v in enumerate(col):
            vv = GaussianRational.promote(v)
            if vv.im != 0:
                raise NotTransverse("reconstructed operator is not real")
            if vv.re:
                entries.append((i, k, vv.re))
    jm = SparseMatrix.from_entries(2 * n, 2 * n, entries)
    return gc_structure(space, jm)


def b_transform(j: GCStructure, b: SparseMatrix) -> GCStructure:
    """Conjugation by the shear (1 0; b 1) for antisymmetric b."""
    n = j.space.n
    if b.transpose() != -b:
        raise InputError("b-field must be antisymmetric")
    eb = _shear(n, b)
    eminus = _shear(n, -b)
    return gc_structure(j.space, eb @ j.matrix @ eminus)


def _shear(n, b):
    entries = [(i, i, QQ(1)) for i in range(2 * n)]
    entries += [(n + r, c, v) for (r, c), v in b.entries.items()]
    return SparseMatrix.from_entries(2 * n, 2 * n, entries)


def poisson_bivector(j: GCStructure) -> SparseMatrix:
    """Upper-right block of J: the map V* -> V; always antisymmetric."""
    beta = j.block(0, 1)
    if beta.transpose() != -beta:
        raise NotGC("upper-right block failed antisymmetry")
    return beta


# ---------------------------------------------------------------------------
# Pairs from bi-Hermitian triples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GKTriple:
    """(g, I+, I-) with g symmetric positive definite and I +- g-compatible."""

    g: SparseMatrix
    i_plus: SparseMatrix
    i_minus: SparseMatrix
    b: SparseMatrix

    def validate(self):
        n = self.g.rows
        for name, m in (("g", self.g), ("I_plus", self.i_plus),
                        ("I_minus", self.i_minus), ("b", self.b)):
            if (m.rows, m.cols) != (n, n):
                raise InvalidTriple(f"{name} is not {n}x{n}")
        if self.g.transpose() != self.g:
            raise InvalidTriple("g is not symmetric")
        if not _positive_definite(self.g):
            raise InvalidTriple("g is not positive definite")
        for name, m in (("I_plus", self.i_plus), ("I_minus", self.i_minus)):
            if (m @ m) + SparseMatrix.identity(n) != SparseMatrix.zero(n, n):
                raise InvalidTriple(f"{name}^2 != -1")
            if m.transpose() @ self.g @ m != self.g:
                raise InvalidTriple(f"{name} is not compatible with g")
        if self.b.transpose() != -self.b:
            raise InvalidTriple("b is not antisymmetric")


def _positive_definite(m: SparseMatrix) -> bool:
    """Leading principal minors test; exact and complete for symmetric m."""
    for k in range(1, m.rows + 1):
        sub = SparseMatrix.from_entries(
            k, k, ((r, c, v) for (r, c), v in m.entries.items()
                   if r < k and c < k))
        if det(sub) <= 0:
            return False
    return True


def _inverse(m: SparseMatrix) -> SparseMatrix:
    n = m.rows
    entries = []
    for k in range(n):
        e = tuple(QQ(1) if i == k else QQ(0) for i in range(n))
        c = solve(m, e)
        if c is None:
            raise InputError("matrix is singular")
        entries.extend((i, k, v) for i, v in enumerate(c) if v)
    return SparseMatrix.from_entries(n, n, entries)


def _block2(n, a, b, c, d) -> SparseMatrix:
    entries = []
    for (r, cc), v in a.entries.items():
        entries.append((r, cc, v))
    for (r, cc), v in b.entries.items():
        entries.append((r, n + cc, v))
    for (r, cc), v in c.entries.items():
        entries.append((n + r, cc, v))
    for (r, cc), v in d.entries.items():
        entries.append((n + r, n + cc, v))
    return SparseMatrix.from_entries(2 * n, 2 * n, entries)


def gk_from_triple(t: GKTriple):
    """The commuting pair produced by the bi-Hermitian block formula.

    J_{1/2} = 1/2 (1 0; b 1) (I+ +- I-, -(w+^-1 -+ w-^-1);
                              w+ -+ w-,  -(I+* +- I-*)) (1 0; -b 1)
    with w+- = g I+-.  Both outputs are GC structures; they commute and
    the associated metric form is positive definite (minor test).
    """
    t.validate()
    n = t.g.rows
    space = SplitSpace(n)
    w_plus = t.g @ t.i_plus
    w_minus = t.g @ t.i_minus
    wp_inv = _inverse(w_plus)
    wm_inv = _inverse(w_minus)
    ip_t = t.i_plus.transpose()
    im_t = t.i_minus.transpose()
    half = QQ(1, 2)
    core1 = _block2(n, (t.i_plus + t.i_minus).scale(half),
                    (wp_inv - wm_inv).scale(-half),
                    (w_plus - w_minus).scale(half),
                    (ip_t + im_t).scale(-half))
    core2 = _block2(n, (t.i_plus - t.i_minus).scale(half),
                    (wp_inv + wm_inv).scale(-half),
                    (w_plus + w_minus).scale(half),
                    (ip_t - im_t).scale(-half))
    eb = _shear(n, t.b)
    eminus = _shear(n, -t.b)
    j1 = gc_structure(space, eb @ core1 @ eminus)
    j2 = gc_structure(space, eb @ core2 @ eminus)
    _check_pair(j1, j2)
    return j1, j2


def metric_gram(j1: GCStructure, j2: GCStructure) -> SparseMatrix:
    """Gram matrix of G(u, v) = <-J1 J2 u, v> in the standard basis."""
    g_op = -(j1.matrix @ j2.matrix)
    return g_op.transpose() @ j1.space.pairing_matrix()


def _check_pair(j1, j2):
    if j1.matrix @ j2.matrix != j2.matrix @ j1.matrix:
        raise NotCommuting("pair does not commute")
    g_op = -(j1.matrix @ j2.matrix)
    n2 = j1.space.total_dim
    if g_op @ g_op != SparseMatrix.identity(n2):
        raise NotCommuting("(-J1 J2)^2 != 1")
    gram = metric_gram(j1, j2)
    if gram.transpose() != gram:
        raise NotPositive("metric form is not symmetric")
    if not _positive_definite(gram):
        raise NotPositive("metric form is not positive definite")


def extract_bihermitian(j1: GCStructure, j2: GCStructure) -> GKTriple:
    """Recover (g, I+, I-, b) from a commuting positive pair.

    C+- are the (+-1)-eigenspaces of G = -J1 J2; each projects
    isomorphically to V, the graphs give b +- g, and J1 restricted to
    C+- induces I+-.
    """
    _check_pair(j1, j2)
    n = j1.space.n
    g_op = -(j1.matrix @ j2.matrix)
    lifts = {}
    for sign in (1, -1):
        shifted = g_op - SparseMatrix.identity(2 * n).scale(QQ(sign))
        ker = kernel_basis(shifted)
        if ker.dim != n:
            raise NotCommuting(f"eigenspace for {sign} has dim {ker.dim}")
        cols = [list(v) for v in ker.basis]
        full = SparseMatrix.from_dense(cols).transpose()  # 2n x n
        top = SparseMatrix.from_entries(
            n, n, ((r, c, v) for (r, c), v in full.entries.items() if r < n))
        bottom = SparseMatrix.from_entries(
            n, n, ((r - n, c, v) for (r, c), v in full.entries.items()
                   if r >= n))
        top_inv = _inverse(top)  # pi|_{C+-} is an isomorphism
        lifts[sign] = (full @ top_inv, bottom @ top_inv)
    phi_plus = lifts[1][1]
    phi_minus = lifts[-1][1]
    g = (phi_plus - phi_minus).scale(QQ(1, 2))
    b = (phi_plus + phi_minus).scale(QQ(1, 2))
    i_parts = {}
    for sign in (1, -1):
        lift = lifts[sign][0]
        jlift = j1.matrix @ lift
        i_parts[sign] = SparseMatrix.from_entries(
            n, n, ((r, c, v) for (r, c), v in jlift.entries.items() if r < n))
    triple = GKTriple(g, i_parts[1], i_parts[-1], b)
    triple.validate()
    return triple


# ---------------------------------------------------------------------------
# Moment conditions and related identities
# ---------------------------------------------------------------------------

@dataclass
class HamiltonianPointData:
    """Pointwise data of a Hamiltonian direction: J, dmu, xi_M, alpha."""

    j: GCStructure
    directions: list     # list of dicts with keys dmu, xi, alpha (tuples)
    isotropy: list       # vectors in the torus Lie algebra (coefficients)


def moment_residual(h: HamiltonianPointData):
    """Residuals of J(dmu) + xi_M + alpha and of -beta(dmu) - xi_M per direction.

    The first vanishes exactly when the defining pointwise condition
    holds; the second is implied by it (both are reported).
    """
    n = h.j.space.n
    beta = poisson_bivector(h.j)
    out = []
    for d in h.directions:
        dmu = tuple(d["dmu"])
        xi = tuple(d["xi"])
        alpha = tuple(d["alpha"])
        if len(dmu) != n or len(xi) != n or len(alpha) != n:
            raise DimensionMismatch("direction data has wrong length")
        vec = tuple([QQ(0)] * n) + dmu
        jdmu = h.j.matrix.apply(vec)
        primary = tuple(a + b for a, b in zip(jdmu, xi + alpha))
        bd = beta.apply(dmu)
        secondary = tuple(-a - b for a, b in zip(bd, xi))
        out.append({"primary": primary, "secondary": secondary,
                    "zero": not any(primary)})
    return out


def ham_eq_relations(t: GKTriple, dmu, alpha):
    """(w+^-1 dmu - w-^-1 dmu,  I+* dmu + I-* dmu - 2 alpha)."""
    t.validate()
    dmu = tuple(dmu)
    alpha = tuple(alpha)
    wp_inv = _inverse(t.g @ t.i_plus)
    wm_inv = _inverse(t.g @ t.i_minus)
    first = tuple(a - b for a, b in zip(wp_inv.apply(dmu), wm_inv.apply(dmu)))
    second = tuple(a + b - 2 * c for a, b, c in zip(
        t.i_plus.transpose().apply(dmu),
        t.i_minus.transpose().apply(dmu), alpha))
    return first, second


def hessian_identity(beta: SparseMatrix, hess: SparseMatrix):
    """A = beta compose hess; reports whether ker(hess) is inside ker(A)."""
    if beta.transpose() != -beta:
        raise InputError("beta must be antisymmetric")
    if hess.transpose() != hess:
        raise InputError("hess must be symmetric")
    a = beta @ hess
    ker_h = kernel_basis(hess)
    ker_a = kernel_basis(a)
    return a, ker_a.contains_subspace(ker_h)


def compatibility_check(alpha_map: SparseMatrix, isotropy_basis) -> bool:
    """True iff the moment one-form kills every infinitesimal isotropy."""
    for xi in isotropy_basis:
        if len(xi) != alpha_map.cols:
            raise DimensionMismatch("isotropy vector has wrong length")
        if any(alpha_map.apply(tuple(xi))):
            return False
    return True


# ---------------------------------------------------------------------------
# Constant-coefficient Courant bracket
# ---------------------------------------------------------------------------

def courant_bracket_const(n: int, x, xi, y, zeta, h3):
    """Twisted bracket of constant sections over an n-torus.

    All Lie and exterior derivative terms vanish on constants, leaving
    only the contraction term iota_Y iota_X H.  ``h3`` maps strictly
    increasing index triples (i, j, k) to coefficients.
    """
    x, y = tuple(x), tuple(y)
    if len(x) != n or len(y) != n or len(xi) != n or len(zeta) != n:
        raise DimensionMismatch("sections do not match the torus dimension")
    cov = [QQ(0)] * n
    for (i, j, k), coeff in h3.items():
        if not (0 <= i < j < k < n):
            raise NotConstantModel(
                "three-form must use strictly increasing triples in range")
        # iota_Y iota_X (e^i e^j e^k) = (XiYj - XjYi) e^k
        #   - (XiYk - XkYi) e^j + (XjYk - XkYj) e^i
        terms = ((i, j, k, QQ(1)), (i, k, j, QQ(-1)), (j, k, i, QQ(1)))
        for a, b, c, sgn in terms:
            cov[c] = cov[c] + coeff * sgn * (x[a] * y[b] - x[b] * y[a])
    vector = tuple(QQ(0) for _ in range(n))
    return vector, tuple(cov)


def h3_from_model(model, element) -> dict:
    """Translate a degree-3 torus-model form into index-triple coefficients."""
    out = {}
    for idx, coeff in element.items():
        expts = model.monomials[idx]
        triple = tuple(i for i, e in enumerate(expts) if e)
        if len(triple) != 3 or any(e > 1 for e in expts) or \
                any(model.degrees[i] != 1 for i in triple):
            raise NotConstantModel("expected a constant 3-form on a torus model")
        out[triple] = coeff
    return out
