"""Shipped validated models and sample data exercising every other module.

Every model is validated at load time; the corpus directory can be
overridden with the TWISTCART_CORPUS environment variable.  Only exact
rational data ships as files; transcendental grid samples are generated
by code in :mod:`twistcart.elliptic`.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import InputError, InvalidContraction, InvalidModel, ZeroWeight
from .linalg import QQ, SparseMatrix
from . import serialize
from .cartan import (CDGAModel, CartanComplex, CartanPair, ModelMap,
                     Twisting, build_cartan)
from . import gc as gclib

_DATA_DIR = Path(__file__).parent / "corpus_data"


def corpus_dir() -> Path:
    override = os.environ.get("TWISTCART_CORPUS")
    return Path(override) if override else _DATA_DIR


def manifest() -> dict:
    with open(corpus_dir() / "manifest.json", "r", encoding="utf-8") as fh:
        return json.load(fh)


def _entry(section, name):
    for e in manifest()[section]:
        if e["name"] == name:
            return e
    raise InputError(f"no corpus entry {name!r} in {section}")


def load_model_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_model(name: str):
    """(model, rank, default polyCap) for a named corpus model."""
    obj = load_model_file(corpus_dir() / _entry("models", name)["file"])
    model = CDGAModel.from_json(obj)
    return model, int(obj.get("rank", 0)), int(obj.get("polyCap", 0))


def load_complex(name: str, poly_cap=None) -> CartanComplex:
    model, rank, default_cap = load_model(name)
    cap = default_cap if poly_cap is None else poly_cap
    return build_cartan(model, rank, cap)


def load_twisting(c: CartanComplex, name: str) -> Twisting:
    obj = load_model_file(corpus_dir() / _entry("twistings", name)["file"])
    return Twisting(c, c.element_from_json(obj["element"]))


# ---------------------------------------------------------------------------
# Programmatic builders
# ---------------------------------------------------------------------------

def torus_model(n: int, contraction_spec=None) -> CDGAModel:
    """Exterior algebra on n circle directions with prescribed contractions.

    ``contraction_spec`` is a list (one entry per torus direction) of
    dicts mapping generator names to rational contraction values.
    """
    if n < 1:
        raise InputError("torus dimension must be >= 1")
    gens = [(f"theta{i + 1}", 1) for i in range(n)]
    proto = CDGAModel(gens)
    name_to_idx = {name: i for i, (name, _) in enumerate(proto.generators)}
    contractions = []
    for spec in (contraction_spec or []):
        op = {}
        for gname, value in spec.items():
            if gname not in name_to_idx:
                raise InvalidContraction(f"unknown generator {gname!r}")
            v = QQ(value)
            if v:
                op[name_to_idx[gname]] = {proto.mono_index[(0,) * n]: v}
        contractions.append(op)
    model = CDGAModel(gens, contractions=contractions)
    try:
        model.validate()
    except InvalidModel as exc:
        raise InvalidContraction(str(exc)) from exc
    return model


def counterexample_2_3(poly_cap: int = 4):
    """Trivial circle action on a circle with the closed nonexact twisting.

    Returns (complex, twisting).  The twisting theta (x) x is closed with
    nonzero class; the first filtration piece by polynomial degree kills
    everything except the bottom class, so the windowed dimensions are
    (even 0, odd 1); reports compare this against the vanishing that a
    full first-page collapse would predict.
    """
    model = torus_model(1, [{}])
    c = build_cartan(model, 1, poly_cap)
    theta_idx = model.mono_index[(1,)]
    eta = Twisting(c, {(theta_idx, (1,)): QQ(1)})
    return c, eta


def weight_rep_pair(k: int, poly_cap: int = 4) -> CartanPair:
    """Pair computing the relative groups of a weight-k complex line.

    Big side: the one-point model (total space is equivariantly
    contractible).  Small side: the unit circle with the weight-k
    rotation, iota(theta) = k.  The restriction is the unit map.
    """
    if k == 0:
        raise ZeroWeight("weight must be a nonzero integer")
    pt_model = CDGAModel([], contractions=({},))
    s1_model = CDGAModel([("theta", 1)],
                         contractions=({0: {0: QQ(k)}},))
    # mono index 0 is the unit in both models
    big = build_cartan(pt_model, 1, poly_cap)
    small = build_cartan(s1_model, 1, poly_cap)
    restriction = ModelMap(pt_model, s1_model, {})
    return CartanPair(big, small, restriction)


def pair_t3_t2(poly_cap: int = 4) -> CartanPair:
    """(3-torus, embedded 2-torus) with one common free rotation direction."""
    big_model = torus_model(3, [{"theta1": 1}])
    small_model = torus_model(2, [{"theta1": 1}])
    images = {
        0: {small_model.mono_index[(1, 0)]: QQ(1)},
        1: {small_model.mono_index[(0, 1)]: QQ(1)},
        2: {},
    }
    restriction = ModelMap(big_model, small_model, images)
    return CartanPair(build_cartan(big_model, 1, poly_cap),
                      build_cartan(small_model, 1, poly_cap), restriction)


# ---------------------------------------------------------------------------
# GC structures
# ---------------------------------------------------------------------------

def _mat(rows):
    return SparseMatrix.from_dense([[QQ(v) for v in row] for row in rows])


def omega_standard(n: int) -> SparseMatrix:
    """Standard symplectic matrix on R^n (n even): block [[0, 1], [-1, 0]]."""
    if n % 2:
        raise InputError("symplectic form needs even dimension")
    half = n // 2
    entries = []
    for i in range(half):
        entries.append((i, half + i, QQ(1)))
        entries.append((half + i, i, QQ(-1)))
    return SparseMatrix.from_entries(n, n, entries)


def complex_standard(n: int) -> SparseMatrix:
    """Standard complex structure on R^n (n even)."""
    return omega_standard(n)


def j_symplectic(n: int) -> gclib.GCStructure:
    """[[0, -omega^{-1}], [omega, 0]] for the standard symplectic form."""
    omega = omega_standard(n)
    # omega^2 = -1 for the standard block form, so -omega^{-1} = omega
    top = omega
    entries = []
    for (r, c), v in top.entries.items():
        entries.append((r, n + c, v))
    for (r, c), v in omega.entries.items():
        entries.append((n + r, c, v))
    return gclib.gc_structure(gclib.SplitSpace(n),
                              SparseMatrix.from_entries(2 * n, 2 * n, entries))


def j_complex(n: int) -> gclib.GCStructure:
    """[[I, 0], [0, -I*]] for the standard complex structure."""
    i_std = complex_standard(n)
    entries = []
    for (r, c), v in i_std.entries.items():
        entries.append((r, c, v))
    for (r, c), v in (-i_std.transpose()).entries.items():
        entries.append((n + r, n + c, v))
    return gclib.gc_structure(gclib.SplitSpace(n),
                              SparseMatrix.from_entries(2 * n, 2 * n, entries))


def direct_sum(a: gclib.GCStructure, b: gclib.GCStructure) -> gclib.GCStructure:
    """Block sum on (V_a + V_b) + (V_a* + V_b*)."""
    na, nb = a.space.n, b.space.n
    n = na + nb

    def map_a(i):
        return i if i < na else n + (i - na)

    def map_b(i):
        return na + i if i < nb else n + na + (i - nb)

    entries = []
    for (r, c), v in a.matrix.entries.items():
        entries.append((map_a(r), map_a(c), v))
    for (r, c), v in b.matrix.entries.items():
        entries.append((map_b(r), map_b(c), v))
    return gclib.gc_structure(gclib.SplitSpace(n),
                              SparseMatrix.from_entries(2 * n, 2 * n, entries))


def euclidean_triple() -> gclib.GKTriple:
    i_std = complex_standard(2)
    t = gclib.GKTriple(SparseMatrix.identity(2), i_std, i_std,
                       SparseMatrix.zero(2, 2))
    t.validate()
    return t


def symplectic_hamiltonian_point() -> gclib.HamiltonianPointData:
    """Standard symplectic structure with dmu = omega(xi), alpha = 0."""
    j = j_symplectic(2)
    omega = omega_standard(2)
    xi = (QQ(1), QQ(0))
    dmu = omega.apply(xi)
    return gclib.HamiltonianPointData(
        j, [{"dmu": dmu, "xi": xi, "alpha": (QQ(0), QQ(0))}], [])


def gc_point_examples() -> dict:
    """Named validated structures for the round-trip and pair tests."""
    jw2 = j_symplectic(2)
    jc2 = j_complex(2)
    b = _mat([["0", "1"], ["-1", "0"]])
    examples = {
        "symplectic_dim2": jw2,
        "complex_dim2": jc2,
        "symplectic_dim4": j_symplectic(4),
        "b_transformed_symplectic": gclib.b_transform(jw2, b),
        "mixed_dim4": direct_sum(jc2, jw2),
        "mixed_dim6": direct_sum(direct_sum(jw2, jc2), jw2),
    }
    j1, j2 = gclib.gk_from_triple(euclidean_triple())
    examples["pair_first"] = j1
    examples["pair_second"] = j2
    return examples


# ---------------------------------------------------------------------------
# GC data files
# ---------------------------------------------------------------------------

def load_gc_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    kind = obj.get("kind")
    out = {"kind": kind, "raw": obj}
    if kind == "point-data":
        n = int(obj["n"])
        space = gclib.SplitSpace(n)
        j = gclib.gc_structure(
            space, SparseMatrix.from_dense(serialize.matrix_from_json(obj["J"])))
        directions = []
        for p in obj.get("points", []):
            directions.append({
                "dmu": tuple(serialize.rational_from_str(v) for v in p["dmu"]),
                "xi": tuple(serialize.rational_from_str(v) for v in p["xi"]),
                "alpha": tuple(serialize.rational_from_str(v) for v in p["alpha"]),
            })
        isotropy = [tuple(serialize.rational_from_str(v) for v in row)
                    for row in obj.get("isotropy", [])]
        out["data"] = gclib.HamiltonianPointData(j, directions, isotropy)
    elif kind == "triple":
        t = gclib.GKTriple(
            SparseMatrix.from_dense(serialize.matrix_from_json(obj["g"])),
            SparseMatrix.from_dense(serialize.matrix_from_json(obj["Iplus"])),
            SparseMatrix.from_dense(serialize.matrix_from_json(obj["Iminus"])),
            SparseMatrix.from_dense(serialize.matrix_from_json(obj["b"])))
        t.validate()
        out["data"] = t
    elif kind == "bracket":
        out["data"] = {
            "n": int(obj["n"]),
            "H": {tuple(int(i) for i in key): serialize.rational_from_str(v)
                  for key, v in obj["H"]},
            "X": tuple(serialize.rational_from_str(v) for v in obj["X"]),
            "xi": tuple(serialize.rational_from_str(v) for v in obj["xi"]),
            "Y": tuple(serialize.rational_from_str(v) for v in obj["Y"]),
            "zeta": tuple(serialize.rational_from_str(v) for v in obj["zeta"]),
        }
    else:
        raise InputError(f"unknown gc data kind {kind!r}")
    return out


# ---------------------------------------------------------------------------
# Acceptance ground set
# ---------------------------------------------------------------------------

def spectral_ground_set(poly_cap: int = 3):
    """(name, complex, twisting) pairs for the convergence criteria."""
    out = []
    t3 = load_complex("t3_trivial")
    out.append(("t3_trivial+volume", t3, load_twisting(t3, "t3_volume")))
    t2 = load_complex("t2_trivial")
    out.append(("t2_trivial+zero", t2, Twisting(t2, {})))
    out.append(("t3_trivial+zero", t3, Twisting(t3, {})))
    s1 = load_complex("s1_free", poly_cap)
    out.append(("s1_free+zero", s1, Twisting(s1, {})))
    cx, ceta = counterexample_2_3(poly_cap)
    out.append(("circle_trivial+degree3", cx, ceta))
    t2r = load_complex("t2_rot", poly_cap)
    out.append(("t2_rot+zero", t2r, Twisting(t2r, {})))
    t3r = load_complex("t3_rot", poly_cap)
    out.append(("t3_rot+zero", t3r, Twisting(t3r, {})))
    out.append(("t3_rot+exact3form", t3r, Twisting(t3r, _exact_eta(t3r))))
    return out


def _exact_eta(c: CartanComplex) -> dict:
    """A nonzero exact degree-3 element, when the complex has one."""
    for key in c.by_degree(2):
        img = c.d_of({key: QQ(1)})
        if img:
            return img
    return {}


def validate_all() -> dict:
    """Load-time validation of every shipped model; returns a summary."""
    report = {}
    for entry in manifest()["models"]:
        model, rank, cap = load_model(entry["name"])
        model.validate()
        report[entry["name"]] = {
            "dim": model.dim, "rank": rank, "polyCap": cap, "ok": True}
    for entry in manifest()["gc"]:
        load_gc_file(corpus_dir() / entry["file"])
        report[entry["name"]] = {"ok": True}
    return report
