import pytest

from twistcart.errors import InputError
from twistcart.linalg import QQ
from twistcart.cartan import (Twisting, build_cartan, twisted_cohomology,
                              zero_twisting)
from twistcart.spectral import (cofinality_check, collapse_page,
                                convergence_check, formality_test,
                                make_filtration, pages, pages_report_json)
from twistcart import corpus


def test_filtration_pieces():
    t3 = corpus.load_complex("t3_trivial")
    eta = corpus.load_twisting(t3, "t3_volume")
    f = make_filtration(t3, eta, "F")
    assert len(f.piece_keys(0)) == len(f.view.keys)
    c = build_cartan(corpus.torus_model(2, [{}]), 1, 3)
    fl = make_filtration(c, zero_twisting(c), "L")
    assert all(fl.view.poly_of(k) >= 1 for k in fl.piece_keys(1))
    with pytest.raises(InputError):
        make_filtration(c, zero_twisting(c), "Q")


def test_t3_volume_page_cascade():
    """Form-degree filtration with a volume twisting on the 3-torus.

    Pages through the associated-graded stay (1,3,3,1); the twist-induced
    differential (degree jump three) fires between pages 3 and 4, leaving
    total dimension 6.
    """
    t3 = corpus.load_complex("t3_trivial")
    eta = corpus.load_twisting(t3, "t3_volume")
    f = make_filtration(t3, eta, "F")
    pl = pages(f, 6)
    by_r = {p.r: p for p in pl}
    for r in (1, 2, 3):
        assert by_r[r].entries == {0: 1, 1: 3, 2: 3, 3: 1}
        first_nonzero = any(not m.is_zero()
                            for m in by_r[r].differentials.values())
        assert first_nonzero == (r == 3)
    assert by_r[4].entries == {0: 0, 1: 3, 2: 3, 3: 0}
    assert by_r["inf"].entries == {0: 0, 1: 3, 2: 3, 3: 0}
    assert sum(by_r["inf"].entries.values()) == 6
    assert collapse_page(pl) == 4
    report = pages_report_json(f, pl)
    assert report["collapse_page"] == 4
    assert report["kind"] == "F"


def test_pointwise_monotone_dims():
    cx, eta = corpus.counterexample_2_3(3)
    for kind in ("F", "L"):
        pl = pages(make_filtration(cx, eta, kind), 5)
        numeric = [p for p in pl if p.r != "inf"]
        for a, b in zip(numeric, numeric[1:]):
            for piece in a.entries:
                assert b.entries[piece] <= a.entries[piece]


def test_counterexample_l_pages():
    cap = 4
    cx, eta = corpus.counterexample_2_3(cap)
    fl = make_filtration(cx, eta, "L")
    pl = pages(fl, 4)
    by_r = {p.r: p for p in pl}
    # first page carries the full fiber cohomology on each trusted piece
    assert by_r[1].entries == {p: 2 for p in range(cap)}
    # the first-page differential wipes every piece except the bottom class
    assert by_r[2].entries == {0: 1, **{p: 0 for p in range(1, cap)}}
    assert by_r["inf"].entries == by_r[2].entries


def test_collapse_iff_twisting_nullhomologous():
    # zero twisting: collapse at the untwisted page
    t3 = corpus.load_complex("t3_trivial")
    f0 = make_filtration(t3, zero_twisting(t3), "F")
    assert collapse_page(pages(f0, 4)) <= 2
    # exact nonzero twisting on the rotating torus: also collapses
    t3r = corpus.load_complex("t3_rot", 3)
    b = {(t3r.model.mono_index[(1, 1, 0)], (0,)): QQ(1)}
    eta_exact = Twisting(t3r, t3r.d_of(b))
    fe = make_filtration(t3r, eta_exact, "F")
    assert collapse_page(pages(fe, 4)) <= 2
    # non-nullhomologous twisting: no collapse at the untwisted page
    eta = corpus.load_twisting(t3, "t3_volume")
    fv = make_filtration(t3, eta, "F")
    assert collapse_page(pages(fv, 4)) > 2
    cx, ceta = corpus.counterexample_2_3(3)
    fcx = make_filtration(cx, ceta, "F")
    assert collapse_page(pages(fcx, 5)) > 2


def test_convergence_on_ground_set():
    for name, c, eta in corpus.spectral_ground_set(3):
        for kind in ("F", "L"):
            conv = convergence_check(make_filtration(c, eta, kind))
            assert conv.matches, (name, kind, conv)
            if kind == "F":
                assert sum(conv.einf.values()) == sum(conv.twisted_dims)


def test_cofinality_inclusions():
    for name, c, eta in corpus.spectral_ground_set(3):
        rep = cofinality_check(c, eta)
        assert rep["holds"], name
        for p, flags in rep["per_piece"].items():
            assert flags["F_{2p+n}_in_L_p"] and flags["L_p_in_F_{2p-n}"]


def test_formality_cases():
    # trivial action with a pure form twisting: formal
    c = build_cartan(corpus.torus_model(3, [{}]), 1, 3)
    vol = {(c.model.mono_index[(1, 1, 1)], (0,)): QQ(1)}
    rep = formality_test(c, Twisting(c, vol))
    assert rep.formal
    # formality forces full fiber cohomology on every complete piece
    tc = twisted_cohomology(c, Twisting(c, vol), check_stability=False)
    fiber_total = sum(rep.fiber_dims)
    for p in range(0, c.poly_cap):
        assert tc.per_poly.get(p, 0) == fiber_total
    # the closed nonexact degree-3 twisting on the trivial circle: not formal
    cx, ceta = corpus.counterexample_2_3(3)
    assert not formality_test(cx, ceta).formal
    # free circle on itself, zero twisting: not formal
    s1 = corpus.load_complex("s1_free", 3)
    rep = formality_test(s1, zero_twisting(s1))
    assert not rep.formal
    assert rep.fiber_dims == (1, 1)
