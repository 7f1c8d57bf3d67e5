"""Finite-difference checks for pseudo-holomorphic pairs on chart grids.

Float (binary64) module: central differences of order h^2 throughout.
Index convention: the almost complex structure is stored as the matrix
M with M[p, k] the coefficient of the p-th coordinate direction in the
image of the k-th one, i.e. column k is the image of d/dx_k.  The
first-order system for a pair (f, g) reads

    df/dx_k = M[p, k] dg/dx_p        dg/dx_k = -M[p, k] df/dx_p

and the second-order operator has coefficients

    a[p, q] = delta_pq + sum_k M[p, k] M[q, k]
    b[q]    = sum_{k, p} (M[p, k] dM[q, k]/dx_p - dM[p, k]/dx_k M[q, p]).

With the standard constant structure, a = 2*I everywhere and b = 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (BallOutOfRange, GridTooSmall, InputError,
                     NotPositiveAtCenter)

ALGEBRAIC_TOL = 1e-9


@dataclass(frozen=True)
class ChartGrid:
    """Uniform grid on a coordinate chart of dimension dim."""

    dim: int
    h: float
    shape: tuple
    origin: tuple

    def __post_init__(self):
        if self.h <= 0:
            raise InputError("grid spacing must be positive")
        if len(self.shape) != self.dim or len(self.origin) != self.dim:
            raise InputError("shape/origin do not match the dimension")
        if any(s < 5 for s in self.shape):
            raise GridTooSmall("need at least 5 points per axis")

    def coordinates(self):
        axes = [self.origin[i] + self.h * np.arange(self.shape[i])
                for i in range(self.dim)]
        return np.meshgrid(*axes, indexing="ij")


@dataclass(frozen=True)
class AlmostComplexField:
    """Per-point matrix field J with J(x)^2 = -1 up to tolerance."""

    grid: ChartGrid
    j: np.ndarray  # shape (*grid.shape, dim, dim)

    def __post_init__(self):
        d = self.grid.dim
        if self.j.shape != (*self.grid.shape, d, d):
            raise InputError("J field shape mismatch")
        sq = np.einsum("...pk,...kq->...pq", self.j, self.j)
        eye = np.eye(d)
        if np.max(np.abs(sq + eye)) > ALGEBRAIC_TOL:
            raise InputError("J^2 + 1 exceeds tolerance somewhere on the grid")


@dataclass(frozen=True)
class ScalarPairField:
    grid: ChartGrid
    f: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        if self.f.shape != self.grid.shape or self.g.shape != self.grid.shape:
            raise InputError("scalar field shape mismatch")


def _interior(shape):
    return tuple(slice(1, s - 1) for s in shape)


def _central_gradient(arr, h):
    """All first partials on the interior; result shape (*interior, dim)."""
    dim = arr.ndim
    inner = _interior(arr.shape)
    outs = []
    for k in range(dim):
        plus = list(inner)
        minus = list(inner)
        plus[k] = slice(2, arr.shape[k])
        minus[k] = slice(0, arr.shape[k] - 2)
        outs.append((arr[tuple(plus)] - arr[tuple(minus)]) / (2.0 * h))
    return np.stack(outs, axis=-1)


def rc_residual(jf: AlmostComplexField, fg: ScalarPairField) -> dict:
    """Max interior residual of the coupled first-order system."""
    if jf.grid != fg.grid:
        raise InputError("fields live on different grids")
    g = jf.grid
    if any(s < 3 for s in g.shape):
        raise GridTooSmall("central differences need interior points")
    df = _central_gradient(fg.f, g.h)           # (*int, k)
    dgrad = _central_gradient(fg.g, g.h)
    jin = jf.j[_interior(g.shape)]              # (*int, p, k)
    jd_g = np.einsum("...pk,...p->...k", jin, dgrad)
    jd_f = np.einsum("...pk,...p->...k", jin, df)
    res1 = df - jd_g
    res2 = dgrad + jd_f
    r1 = float(np.max(np.abs(res1))) if res1.size else 0.0
    r2 = float(np.max(np.abs(res2))) if res2.size else 0.0
    return {"max_residual": max(r1, r2), "system1_max": r1, "system2_max": r2}


def elliptic_coefficients(jf: AlmostComplexField) -> dict:
    """Second-order coefficients a (full grid) and b (interior).

    a is algebraic in J and symmetric by construction; b needs central
    derivatives of J and is therefore only defined one point in.
    """
    g = jf.grid
    d = g.dim
    a = np.einsum("...pk,...qk->...pq", jf.j, jf.j) + np.eye(d)
    inner = _interior(g.shape)
    jin = jf.j[inner]
    # dj[..., p, k, s] = d M[p, k] / dx_s on the interior
    dj = np.empty((*jin.shape[:-2], d, d, d))
    for p in range(d):
        for k in range(d):
            dj[..., p, k, :] = _central_gradient(jf.j[..., p, k], g.h)
    term1 = np.einsum("...pk,...qkp->...q", jin, dj)
    term2 = np.einsum("...pkk,...qp->...q", dj, jin)
    b = term1 - term2
    return {"a": a, "b": b, "b_offset": 1}


def _leading_minors_positive(mat, tol=ALGEBRAIC_TOL):
    d = mat.shape[0]
    for k in range(1, d + 1):
        if np.linalg.det(mat[:k, :k]) <= tol:
            return False
    return True


def _ball_indices(grid: ChartGrid, center):
    center = tuple(int(c) for c in center)
    if len(center) != grid.dim:
        raise InputError("center has wrong dimension")
    idx = np.indices(grid.shape)
    dist2 = np.zeros(grid.shape)
    for i in range(grid.dim):
        dist2 += (idx[i] - center[i]) ** 2
    return dist2


def positive_definite_region(a_field: np.ndarray, grid: ChartGrid,
                             center) -> dict:
    """Largest grid-unit ball around center with a(x) positive definite."""
    center = tuple(int(c) for c in center)
    if not _leading_minors_positive(a_field[center]):
        raise NotPositiveAtCenter("a is not positive definite at the center")
    dist2 = _ball_indices(grid, center)
    # largest radius whose ball stays inside the grid
    max_inside = min(min(c, s - 1 - c) for c, s in zip(center, grid.shape))
    radius = 0
    for r in range(1, max_inside + 1):
        mask = dist2 <= r * r
        pts = np.argwhere(mask)
        ok = all(_leading_minors_positive(a_field[tuple(p)]) for p in pts)
        if not ok:
            return {"radius": radius, "limited_by": "definiteness"}
        radius = r
    return {"radius": radius, "limited_by": "grid"}


def max_principle_check(f_field: np.ndarray, grid: ChartGrid, center,
                        radius: int, tol=ALGEBRAIC_TOL) -> dict:
    """Compare interior and boundary-shell extrema over a grid ball."""
    center = tuple(int(c) for c in center)
    if any(c - radius < 0 or c + radius >= s
           for c, s in zip(center, grid.shape)):
        raise BallOutOfRange("ball leaves the grid")
    dist2 = _ball_indices(grid, center)
    ball = dist2 <= radius * radius
    shell = ball & (dist2 > (radius - 1) ** 2)
    interior = ball & ~shell
    if not interior.any() or not shell.any():
        raise BallOutOfRange("ball too small to have interior and boundary")
    sup_i = float(f_field[interior].max())
    sup_b = float(f_field[shell].max())
    inf_i = float(f_field[interior].min())
    inf_b = float(f_field[shell].min())
    ok = (sup_i <= sup_b + tol) and (inf_i >= inf_b - tol)
    return {"supInterior": sup_i, "supBoundary": sup_b,
            "infInterior": inf_i, "infBoundary": inf_b, "pass": ok}


def operator_residual(jf: AlmostComplexField, fg: ScalarPairField,
                      center, radius: int) -> float:
    """Max |L f| over a grid ball, L the displayed second-order operator."""
    g = jf.grid
    d = g.dim
    center = tuple(int(c) for c in center)
    if any(c - radius < 1 or c + radius >= s - 1
           for c, s in zip(center, g.shape)):
        raise BallOutOfRange("ball (plus stencil margin) leaves the grid")
    coeffs = elliptic_coefficients(jf)
    a = coeffs["a"][_interior(g.shape)]
    b = coeffs["b"]
    f = fg.f
    inner = _interior(g.shape)
    grad = _central_gradient(f, g.h)
    hess = np.empty((*a.shape[:-2], d, d))
    h2 = g.h * g.h
    for p in range(d):
        for q in range(d):
            if p == q:
                plus = list(inner)
                minus = list(inner)
                plus[p] = slice(2, f.shape[p])
                minus[p] = slice(0, f.shape[p] - 2)
                hess[..., p, p] = (f[tuple(plus)] - 2.0 * f[inner]
                                   + f[tuple(minus)]) / h2
            elif p < q:
                pp = list(inner)
                pm = list(inner)
                mp = list(inner)
                mm = list(inner)
                pp[p] = slice(2, f.shape[p]); pp[q] = slice(2, f.shape[q])
                pm[p] = slice(2, f.shape[p]); pm[q] = slice(0, f.shape[q] - 2)
                mp[p] = slice(0, f.shape[p] - 2); mp[q] = slice(2, f.shape[q])
                mm[p] = slice(0, f.shape[p] - 2); mm[q] = slice(0, f.shape[q] - 2)
                mixed = (f[tuple(pp)] - f[tuple(pm)] - f[tuple(mp)]
                         + f[tuple(mm)]) / (4.0 * h2)
                hess[..., p, q] = mixed
                hess[..., q, p] = mixed
    lf = np.einsum("...pq,...pq->...", a, hess) + \
        np.einsum("...q,...q->...", b, grad)
    dist2 = _ball_indices(g, center)[inner]
    mask = dist2 <= radius * radius
    return float(np.max(np.abs(lf[mask])))


# ---------------------------------------------------------------------------
# Built-in sample fields (transcendental samples ship as code, not data)
# ---------------------------------------------------------------------------

def standard_j(n: int) -> np.ndarray:
    """Block matrix sending d/dx_k to d/dy_k and d/dy_k to -d/dx_k.

    Classical holomorphic pairs (Re F, Im F) solve the first-order system
    for this structure.
    """
    m = np.zeros((2 * n, 2 * n))
    m[n:, :n] = np.eye(n)
    m[:n, n:] = -np.eye(n)
    return m


def constant_j_field(grid: ChartGrid, matrix=None) -> AlmostComplexField:
    d = grid.dim
    if matrix is None:
        if d % 2:
            raise InputError("standard structure needs even dimension")
        matrix = standard_j(d // 2)
    j = np.broadcast_to(np.asarray(matrix, dtype=float),
                        (*grid.shape, d, d)).copy()
    return AlmostComplexField(grid, j)


def square_grid(h: float, extent: float, center=0.0) -> ChartGrid:
    """Plane grid covering [center-extent, center+extent]^2 at spacing h."""
    half = int(round(extent / h))
    n = 2 * half + 1
    origin = (center - half * h, center - half * h)
    return ChartGrid(2, h, (n, n), origin)


SAMPLES = {
    "z2": (lambda x, y: x * x - y * y, lambda x, y: 2.0 * x * y),
    "z3": (lambda x, y: x ** 3 - 3.0 * x * y * y,
           lambda x, y: 3.0 * x * x * y - y ** 3),
    "expz": (lambda x, y: np.exp(x) * np.cos(y),
             lambda x, y: np.exp(x) * np.sin(y)),
    "linear-x": (lambda x, y: x + 0.0 * y, lambda x, y: 0.0 * x),
    "bump": (lambda x, y: 1.0 - x * x - y * y, lambda x, y: 0.0 * x),
}


def sample_pair(name: str, grid: ChartGrid) -> ScalarPairField:
    if name not in SAMPLES:
        raise InputError(f"unknown sample {name!r}; choose from "
                         + ", ".join(sorted(SAMPLES)))
    fx, gx = SAMPLES[name]
    xs, ys = grid.coordinates()
    return ScalarPairField(grid, np.asarray(fx(xs, ys), dtype=float),
                           np.asarray(gx(xs, ys), dtype=float))


# ---------------------------------------------------------------------------
# Grid file format: one JSON header line, then row-major CSV of floats
# ---------------------------------------------------------------------------

def write_grid_file(path, grid: ChartGrid, fields: dict):
    """fields maps name -> array; scalars and (d, d) matrix fields."""
    d = grid.dim
    spec = []
    order = []
    for name, arr in fields.items():
        if arr.shape == grid.shape:
            spec.append({"name": name, "kind": "scalar"})
        elif arr.shape == (*grid.shape, d, d):
            spec.append({"name": name, "kind": "matrix"})
        else:
            raise InputError(f"field {name} has unsupported shape")
        order.append(name)
    header = {"dim": d, "h": grid.h, "shape": list(grid.shape),
              "origin": list(grid.origin), "fields": spec}
    npoints = int(np.prod(grid.shape))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        flats = []
        for name in order:
            arr = fields[name]
            if arr.shape == grid.shape:
                flats.append(arr.reshape(npoints, 1))
            else:
                flats.append(arr.reshape(npoints, d * d))
        rows = np.concatenate(flats, axis=1)
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_grid_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        grid = ChartGrid(int(header["dim"]), float(header["h"]),
                         tuple(header["shape"]), tuple(header["origin"]))
        d = grid.dim
        npoints = int(np.prod(grid.shape))
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[0] != npoints:
        raise InputError("grid file row count does not match the shape")
    fields = {}
    col = 0
    for fs in header["fields"]:
        if fs["kind"] == "scalar":
            fields[fs["name"]] = data[:, col].reshape(grid.shape)
            col += 1
        elif fs["kind"] == "matrix":
            fields[fs["name"]] = data[:, col:col + d * d].reshape(
                (*grid.shape, d, d))
            col += d * d
        else:
            raise InputError(f"unknown field kind {fs['kind']!r}")
    if col != data.shape[1]:
        raise InputError("grid file column count does not match the header")
    return grid, fields
