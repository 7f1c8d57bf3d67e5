"""Filtrations of Cartan complexes, spectral pages, and formality tests.

Two filtrations of the twisted complex are supported:

  F^p: everything of total degree >= p      (differential raises p by >= 1)
  L^p: everything of polynomial degree >= p (differential preserves or
                                             raises p)

Page convention: E_0^p is the associated graded and d_r maps E_r^p to
E_r^{p+r}.  Under this convention the F-sequence of an untwisted complex
reaches the untwisted cohomology at page 2 and the first differential
induced by the twisting appears at page 3 (degree jump 3).  Reports also
carry ``shifted_labeling``, the alternative bookkeeping that starts
counting after the associated-graded page, under which those pages are
labeled 1 and 2.

Pages are computed on the padded complex, where truncation artifacts sit
at total degree about twice the padded cap, far above the trust window;
entries are reported only for complete pieces (F: p <= window, L:
p <= polyCap - 1), per the edge-exclusion policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError, WindowTooSmall
from .linalg import (QQ, SparseMatrix, Subspace, kernel_basis, quotient_dim,
                     express_in, rank as matrix_rank)
from .cartan import (CartanComplex, CDGAModel, Twisting, TwistedView,
                     twisted_view, twisted_cohomology, windowed_cohomology,
                     _assemble_result, class_coordinates)


@dataclass
class Filtration:
    """Decreasing filtration of a twisted Cartan complex by basis pieces."""

    complex: CartanComplex
    eta: Twisting
    kind: str                  # "F" (total degree) or "L" (polynomial degree)
    view: TwistedView = field(repr=False, default=None)
    trusted_max: int = 0

    def piece_value(self, key) -> int:
        return (self.view.deg_of(key) if self.kind == "F"
                else self.view.poly_of(key))

    def piece_keys(self, p: int):
        return [k for k in self.view.keys if self.piece_value(k) >= p]

    @property
    def p_range(self):
        vals = [self.piece_value(k) for k in self.view.keys]
        return min(vals), max(vals)


def make_filtration(c: CartanComplex, eta: Twisting, kind: str) -> Filtration:
    if kind not in ("F", "L"):
        raise InputError("filtration kind must be 'F' or 'L'")
    view = twisted_view(c, eta)
    min_raise = 1 if kind == "F" else 0
    measure = view.deg_of if kind == "F" else view.poly_of
    for k in view.keys:
        for k2 in view.columns[k]:
            if measure(k2) < measure(k) + min_raise:
                raise InputError(
                    f"differential violates the {kind}-filtration shift")
    trusted = c.window if kind == "F" else (
        c.poly_cap - 1 if c.rank > 0 else 0)
    return Filtration(c, eta, kind, view=view, trusted_max=trusted)


@dataclass
class SpectralPage:
    r: int
    entries: dict              # p -> dimension (trusted pieces only)
    differentials: dict        # p -> matrix of d_r: E_r^p -> E_r^{p+r}
    representatives: dict = field(repr=False, default_factory=dict)


class _PageEngine:
    """Shared Z_r^p towers over the padded complex, in ambient coordinates."""

    def __init__(self, filt: Filtration):
        self.filt = filt
        self.view = filt.view
        self.keys = self.view.keys
        self.n = len(self.keys)
        self.piece = {k: filt.piece_value(k) for k in self.keys}
        self.p_min, self.p_max = filt.p_range
        pos = self.view.position
        self._cols = {}
        for k in self.keys:
            self._cols[k] = {pos[k2]: v for k2, v in self.view.columns[k].items()}
        # Z towers: _z[(p, r)] = list of ambient vectors spanning Z_r^p.
        self._z = {}
        self._z_inf = {}
        self._im_cache = None

    def _unit_vectors(self, p):
        vecs = []
        for i, k in enumerate(self.keys):
            if self.piece[k] >= p:
                v = [QQ(0)] * self.n
                v[i] = QQ(1)
                vecs.append(tuple(v))
        return vecs

    def apply_d(self, vec):
        out = [QQ(0)] * self.n
        for i, v in enumerate(vec):
            if v:
                for j, w in self._cols[self.keys[i]].items():
                    out[j] = out[j] + v * w
        return tuple(out)

    def z(self, p, r):
        """Basis of Z_r^p = {x in F^p : d x in F^{p+r}}."""
        if p > self.p_max:
            return []
        if r == 0:
            key = (p, 0)
            if key not in self._z:
                self._z[key] = self._unit_vectors(p)
            return self._z[key]
        if p + r > self.p_max + 1:
            return self.z_inf(p)
        key = (p, r)
        if key not in self._z:
            prev = self.z(p, r - 1)
            self._z[key] = self._refine(prev, p + r)
        return self._z[key]

    def _refine(self, basis, out_piece):
        """Members of span(basis) whose differential lands in F^{out_piece}."""
        if not basis:
            return []
        bad_rows = [i for i, k in enumerate(self.keys)
                    if self.piece[k] < out_piece]
        images = [self.apply_d(v) for v in basis]
        entries = []
        for j, img in enumerate(images):
            for ii, row in enumerate(bad_rows):
                if img[row]:
                    entries.append((ii, j, img[row]))
        m = SparseMatrix.from_entries(len(bad_rows), len(basis), entries)
        out = []
        for coeff in kernel_basis(m).basis:
            v = [QQ(0)] * self.n
            for j, cval in enumerate(coeff):
                if cval:
                    for i in range(self.n):
                        if basis[j][i]:
                            v[i] = v[i] + cval * basis[j][i]
            out.append(tuple(v))
        return out

    def z_inf(self, p):
        if p not in self._z_inf:
            self._z_inf[p] = self._refine(self._unit_vectors(p),
                                          self.p_max + 2)
        return self._z_inf[p]

    def image_subspace(self):
        if self._im_cache is None:
            imgs = [self.apply_d(v) for v in self._unit_vectors(self.p_min)]
            self._im_cache = Subspace.from_vectors(self.n, imgs)
        return self._im_cache

    def boundary_piece(self, p):
        """im d intersected with F^p, via the kernel trick inside im d."""
        im = self.image_subspace()
        if not im.basis:
            return im
        bad = [i for i, k in enumerate(self.keys) if self.piece[k] < p]
        entries = []
        for j, v in enumerate(im.basis):
            for ii, row in enumerate(bad):
                if v[row]:
                    entries.append((ii, j, v[row]))
        m = SparseMatrix.from_entries(len(bad), im.dim, entries)
        vecs = []
        for coeff in kernel_basis(m).basis:
            v = [QQ(0)] * self.n
            for j, cval in enumerate(coeff):
                if cval:
                    for i in range(self.n):
                        if im.basis[j][i]:
                            v[i] = v[i] + cval * im.basis[j][i]
            vecs.append(tuple(v))
        return Subspace.from_vectors(self.n, vecs)

    def page_entry(self, p, r):
        """E_r^p = Z_r^p / (Z_{r-1}^{p+1} + d Z_{r-1}^{p-r+1}) as (dim, reps, den)."""
        numer = Subspace.from_vectors(self.n, self.z(p, r))
        den_vecs = list(self.z(p + 1, r - 1))
        # p - r + 1 may drop below the bottom piece; the tower keeps the
        # differential condition d x in F^p either way.
        for v in self.z(p - r + 1, r - 1):
            den_vecs.append(self.apply_d(v))
        # both denominator pieces land inside Z_r^p, so the quotient is valid
        den = Subspace.from_vectors(self.n, den_vecs)
        dim, reps = quotient_dim(den, numer)
        return dim, reps, den

    def inf_entry(self, p):
        numer = Subspace.from_vectors(self.n, self.z_inf(p))
        den_vecs = list(self.z_inf(p + 1)) + list(self.boundary_piece(p).basis)
        den = Subspace.from_vectors(self.n, den_vecs)
        dim, reps = quotient_dim(den, numer)
        return dim, reps, den

    def d_r_matrix(self, p, r, src_entry, tgt_entry):
        """Matrix of d_r from E_r^p to E_r^{p+r} in the chosen rep bases."""
        s_dim, s_reps, _ = src_entry
        t_dim, t_reps, t_den = tgt_entry
        cols = []
        basis = list(t_reps) + list(t_den.basis)
        for rep in s_reps:
            img = self.apply_d(rep)
            coeffs = express_in(basis, img)
            if coeffs is None:
                raise WindowTooSmall(
                    "page differential leaves the computed pieces")
            cols.append(coeffs[:t_dim])
        entries = [(i, j, v) for j, col in enumerate(cols)
                   for i, v in enumerate(col) if v]
        return SparseMatrix.from_entries(t_dim, len(cols), entries)


def pages(filt: Filtration, max_page: int):
    """Pages E_1..E_max_page plus the limit page, trusted pieces only.

    Verifies dim E_{r+1}^p <= dim E_r^p pointwise and that the next page
    has the cohomology dimensions of (E_r, d_r).
    """
    if max_page < 1:
        raise InputError("max_page must be >= 1")
    eng = _PageEngine(filt)
    trusted = [p for p in range(max(eng.p_min, 0), filt.trusted_max + 1)]
    if not trusted:
        raise WindowTooSmall("no trusted filtration pieces inside the window")
    out = []
    prev_entries = None
    span = eng.p_max - eng.p_min + 1
    last_r = min(max_page, span + 1)
    for r in range(1, last_r + 1):
        cells = {}
        for p in trusted:
            cells[p] = eng.page_entry(p, r)
        diffs = {}
        for p in trusted:
            if p + r <= filt.trusted_max:
                diffs[p] = eng.d_r_matrix(p, r, cells[p],
                                          eng.page_entry(p + r, r))
        entries = {p: cells[p][0] for p in trusted}
        if prev_entries is not None:
            for p in trusted:
                if entries[p] > prev_entries[p]:
                    raise WindowTooSmall(
                        f"page dimensions grew at piece {p}; window too small")
        # Cross-check E_{r+1} = H(E_r, d_r) where both sides are computed.
        if r >= 2:
            prev_diffs = out[-1].differentials
            for p in trusted:
                d_out = prev_diffs.get(p)
                d_in = prev_diffs.get(p - (r - 1))
                if d_out is not None and d_in is not None:
                    expect = d_out.cols - matrix_rank(d_out) - matrix_rank(d_in)
                    if entries[p] != expect:
                        raise WindowTooSmall(
                            f"page recursion mismatch at (r={r}, p={p})")
        out.append(SpectralPage(r, entries, diffs,
                                {p: cells[p][1] for p in trusted}))
        prev_entries = entries
    inf_entries = {p: eng.inf_entry(p)[0] for p in trusted}
    out.append(SpectralPage("inf", inf_entries, {}))
    return out


def collapse_page(page_list) -> int | None:
    """Smallest computed r whose dimensions already equal the limit page."""
    inf = next(p for p in page_list if p.r == "inf")
    for page in page_list:
        if page.r == "inf":
            continue
        if page.entries == inf.entries:
            return page.r
    return None


@dataclass
class ConvergenceReport:
    kind: str
    einf: dict                 # trusted piece -> dimension (page path)
    graded_twisted: dict       # trusted piece -> dimension (direct path)
    twisted_dims: tuple        # (even, odd) windowed twisted cohomology
    matches: bool
    window: int
    trusted_max: int


def convergence_check(filt: Filtration) -> ConvergenceReport:
    """Limit page against the direct windowed twisted cohomology.

    The limit entries come from the page recursion on the padded complex;
    the comparison values are the graded pieces (by degree for F, by
    polynomial degree for L) of the directly computed windowed classes.
    """
    eng = _PageEngine(filt)
    trusted = [p for p in range(max(eng.p_min, 0), filt.trusted_max + 1)]
    if not trusted:
        raise WindowTooSmall("no trusted filtration pieces inside the window")
    einf = {p: eng.inf_entry(p)[0] for p in trusted}
    tc = twisted_cohomology(filt.complex, filt.eta, check_stability=False)
    graded = tc.per_degree if filt.kind == "F" else tc.per_poly
    graded = {p: graded.get(p, 0) for p in trusted}
    matches = all(einf[p] == graded[p] for p in trusted)
    return ConvergenceReport(filt.kind, einf, graded, tc.dims(), matches,
                             filt.complex.window, filt.trusted_max)


def cofinality_check(c: CartanComplex, eta: Twisting) -> dict:
    """Exact interleaving of the two filtrations on the padded basis.

    With n the top form degree, every key of total degree >= 2p + n has
    polynomial degree >= p, and every key of polynomial degree >= p has
    total degree >= 2p - n; both are verified as subspace inclusions
    (the pieces are spanned by basis keys, so set containment is exact
    subspace containment).
    """
    view = twisted_view(c, eta)
    n = c.model.top_form_degree
    p_max = max(view.poly_of(k) for k in view.keys)
    per_p = {}
    ok = True
    for p in range(0, p_max + 1):
        f_upper = {k for k in view.keys if view.deg_of(k) >= 2 * p + n}
        f_lower = {k for k in view.keys if view.deg_of(k) >= 2 * p - n}
        l_piece = {k for k in view.keys if view.poly_of(k) >= p}
        first = f_upper <= l_piece
        second = l_piece <= f_lower
        per_p[p] = {"F_{2p+n}_in_L_p": first, "L_p_in_F_{2p-n}": second}
        ok = ok and first and second
    return {"holds": ok, "per_piece": per_p, "form_degree_bound": n}


@dataclass
class FormalityReport:
    formal: bool
    surjective: dict           # parity -> bool
    total_dims: tuple
    fiber_dims: tuple
    window: int


def _fiber_complex(c: CartanComplex) -> CartanComplex:
    model = c.model
    fiber_model = CDGAModel(
        model.generators, d_gen=model.d_gen, contractions=(),
        caps={name: cap for (name, deg), cap in
              zip(model.generators, model.caps) if deg % 2 == 0})
    return CartanComplex(fiber_model, 0, 0, _validate=False)


def formality_test(c: CartanComplex, eta: Twisting) -> FormalityReport:
    """Surjectivity of the restriction-to-fiber map on twisted cohomology.

    The target is the twisted cohomology of the model itself (trivial
    group) with twisting eta(0); surjectivity of the induced map is the
    collapse criterion for the polynomial-degree filtration.
    """
    tc = twisted_cohomology(c, eta, check_stability=False)
    fiber = _fiber_complex(c)
    eta0_model = eta.fiber_value()
    eta0 = Twisting(fiber, fiber.from_model_element(eta0_model))
    tcf = twisted_cohomology(fiber, eta0, check_stability=False)

    surjective = {}
    for parity in (0, 1):
        raw = tc._internals["raw"]["parities"][parity]
        src = raw["src"]
        cols = []
        for vec in raw["reps"]:
            el = {src[i]: v for i, v in enumerate(vec) if v}
            restricted = c.restriction_to_fiber(el)
            fib_el = {(idx, ()): v for idx, v in restricted.items()}
            cols.append(class_coordinates(tcf, parity, fib_el))
        need = tcf.dims()[parity]
        entries = [(i, j, v) for j, col in enumerate(cols)
                   for i, v in enumerate(col) if v]
        m = SparseMatrix.from_entries(need, len(cols), entries)
        surjective[parity] = (matrix_rank(m) == need)
    formal = surjective[0] and surjective[1]
    return FormalityReport(formal, surjective, tc.dims(), tcf.dims(),
                           c.window)


def pages_report_json(filt: Filtration, page_list) -> dict:
    """Page report in the documented JSON shape, both page labelings."""
    pages_json = []
    for page in page_list:
        pages_json.append({
            "r": page.r,
            "dims": {str(p): d for p, d in sorted(page.entries.items())},
        })
    return {
        "kind": filt.kind,
        "pages": pages_json,
        "collapse_page": collapse_page(page_list),
        "page_convention": "E_0 is the associated graded; d_r: p -> p+r",
        "shifted_labeling": {
            "description": "labeling that starts counting after the "
                           "associated-graded page (page r here is page "
                           "r-1 there)",
            "untwisted_page_standard": 2,
            "untwisted_page_shifted": 1,
            "first_twist_differential_standard": 3,
            "first_twist_differential_shifted": 2,
        },
        "trusted_max_piece": filt.trusted_max,
        "window": filt.complex.window,
    }
