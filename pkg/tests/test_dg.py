import pytest

from twistcart.errors import InvalidComplex
from twistcart.linalg import QQ, SparseMatrix
from twistcart.dg import (ChainMap, CochainComplex, ConePair, GradedSpace,
                          cohomology, is_quasi_iso, mapping_cone)
from twistcart import corpus


def complex_from_dims(dims, diffs, top=None):
    spaces = GradedSpace({n: [f"e{n}_{i}" for i in range(d)]
                          for n, d in dims.items() if d})
    mats = {}
    for n, rows in diffs.items():
        mats[n] = SparseMatrix.from_dense(
            [[QQ(v) for v in row] for row in rows])
    top = max(dims) if top is None else top
    c = CochainComplex(spaces, mats, top)
    c.validate()
    return c


def total_dim(h):
    return sum(g.dim for g in h.values())


def test_zero_differential_exterior_t2():
    c = complex_from_dims({0: 1, 1: 2, 2: 1}, {})
    h = cohomology(c)
    assert [h[n].dim for n in (0, 1, 2)] == [1, 2, 1]


def test_two_term_acyclic():
    c = complex_from_dims({0: 1, 1: 1}, {0: [[1]]})
    h = cohomology(c)
    assert all(g.dim == 0 for g in h.values())


def test_free_circle_cartan_view():
    c = corpus.load_complex("s1_free", 4).to_cochain_complex()
    h = cohomology(c)
    assert h[0].dim == 1
    assert all(h[n].dim == 0 for n in h if n > 0)


def test_invalid_complex_rejected():
    with pytest.raises(InvalidComplex):
        complex_from_dims({0: 1, 1: 1, 2: 1}, {0: [[1]], 1: [[1]]})


def test_cone_of_identity_acyclic():
    c = complex_from_dims({0: 1, 1: 2, 2: 1}, {})
    ident = ChainMap(c, c, 0, {n: SparseMatrix.identity(c.dim(n))
                               for n in (0, 1, 2)})
    cone = mapping_cone(ConePair(c, c, ident))
    h = cohomology(cone)
    assert all(g.dim == 0 for g in h.values())


def test_cone_of_zero_small_side_shifts():
    big = complex_from_dims({0: 1, 1: 2, 2: 1}, {})
    empty = complex_from_dims({0: 0}, {}, top=2)
    zero_map = ChainMap(big, empty, 0, {})
    cone = mapping_cone(ConePair(big, empty, zero_map))
    for n in (0, 1, 2):
        assert cone.dim(n - 1) == big.dim(n)
    h = cohomology(cone)
    hb = cohomology(big)
    for n in (0, 1, 2):
        assert h[n - 1].dim == hb[n].dim


def test_cone_euler_characteristic_bookkeeping():
    big = complex_from_dims({0: 2, 1: 3, 2: 1}, {})
    small = complex_from_dims({0: 1, 1: 1}, {0: [[1]]}, top=2)
    f = ChainMap(big, small, 0, {})
    f.validate()
    cone = mapping_cone(ConePair(big, small, f))
    assert cone.euler_characteristic() == \
        small.euler_characteristic() - big.euler_characteristic()


def test_quasi_iso_identity_and_zero():
    c = complex_from_dims({0: 1, 1: 2}, {})
    ident = ChainMap(c, c, 0, {n: SparseMatrix.identity(c.dim(n))
                               for n in (0, 1)})
    assert is_quasi_iso(ident, 1).is_quasi_iso
    zero = ChainMap(c, c, 0, {})
    assert not is_quasi_iso(zero, 1).is_quasi_iso


def _inclusion_of_closed_span(big_view, keys):
    """Subcomplex spanned by closed basis keys of a Cartan complex view."""
    by_deg = {}
    for k in keys:
        by_deg.setdefault(k[1], []).append(k[0])
    dims = {n: [f"s{n}_{i}" for i in range(len(ks))]
            for n, ks in by_deg.items()}
    sub = CochainComplex(GradedSpace(dims), {}, big_view.top_degree)
    comps = {}
    for n, ks in by_deg.items():
        tgt_labels = big_view.spaces.labels(n)
        entries = []
        for j, lab in enumerate(ks):
            entries.append((tgt_labels.index(lab), j, QQ(1)))
        comps[n] = SparseMatrix.from_entries(big_view.dim(n), len(ks), entries)
    return ChainMap(sub, big_view, 0, comps)


def quasi_iso_corpus_maps():
    """Three maps whose quasi-isomorphism status is known by elimination."""
    maps = []
    # identity on the 2-torus view
    t2 = corpus.load_complex("t2_trivial").to_cochain_complex()
    maps.append((ChainMap(t2, t2, 0, {n: SparseMatrix.identity(t2.dim(n))
                                      for n in t2.spaces.degrees()}), True))
    # unit span inside the free circle complex (deformation retract)
    s1 = corpus.load_complex("s1_free", 4)
    view = s1.to_cochain_complex()
    maps.append((_inclusion_of_closed_span(
        view, [(s1.label(k), n) for n in (0,)
               for k in s1.by_degree(0)]), True))
    # closed theta2, theta3 span inside the rotating 3-torus
    t3 = corpus.load_complex("t3_rot", 3)
    view3 = t3.to_cochain_complex()
    closed = []
    for n in range(0, 3):
        for k in t3.by_degree(n):
            mono, q = k
            expts = t3.model.monomials[mono]
            if expts[0] == 0 and not any(q):
                closed.append((t3.label(k), n))
    maps.append((_inclusion_of_closed_span(view3, closed), True))
    return maps


def test_retract_inclusions_are_quasi_isos():
    for f, expected in quasi_iso_corpus_maps():
        f.validate()
        window = min(f.source.top_degree, 3)
        assert is_quasi_iso(f, window).is_quasi_iso == expected


def test_cone_of_quasi_iso_acyclic():
    for f, expected in quasi_iso_corpus_maps():
        if not expected:
            continue
        # cone over (sub -> big): big is the cone's N side
        cone = mapping_cone(ConePair(f.source, f.target, f))
        h = cohomology(cone)
        window = min(f.source.top_degree, 3) - 1
        assert all(g.dim == 0 for n, g in h.items() if n <= window)


def test_complex_json_round_trip():
    c = complex_from_dims({0: 1, 1: 1}, {0: [[1]]})
    back = CochainComplex.from_json(c.to_json())
    assert back.spaces.dims == c.spaces.dims
    assert back.differentials[0] == c.differentials[0]
