"""Weighted transfer operators, pressure, and its positive zero.

L_s f(theta) = sum over preimages y of f(y) g(y)^(-s) / |S'(y)|.
The pressure psi(s) = log of the spectral radius of L_s.  Under negative
drift of log g it is convex, vanishes at s = 0, starts with negative
slope, and crosses zero again at the tail exponent s*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import coo_matrix, csr_matrix

from .errors import (InvalidParameter, ModeUnsupported, NoConvergence,
                     NoPositiveZero)
from .maps import DrivenSystem

_EDGE_MERGE = 1e-12


@dataclass(frozen=True)
class TransferMatrix:
    """Finite section of L_s on a cell partition.

    Stored in triplet form; entry [j, i] carries mass from source cell j
    to destination cell i, so densities evolve by v <- v @ entries.
    """

    s: float
    mode: str                   # "ulam" or "exact"
    edges: np.ndarray           # N+1 cell boundaries
    row: np.ndarray = field(repr=False)
    col: np.ndarray = field(repr=False)
    mass: np.ndarray = field(repr=False)
    log_weights: np.ndarray = field(repr=False)   # log g at cell centers

    @property
    def n_cells(self) -> int:
        return self.edges.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def entries(self) -> np.ndarray:
        dense = np.zeros((self.n_cells, self.n_cells))
        np.add.at(dense, (self.row, self.col), self.mass)
        return dense

    def transposed_csr(self):
        n = self.n_cells
        return csr_matrix((self.mass, (self.col, self.row)), shape=(n, n))


def _ulam_edges(base, resolution):
    uniform = np.linspace(0.0, 1.0, resolution + 1)
    cell = np.asarray(base.cell_edges)
    keep = uniform[np.min(np.abs(uniform[:, None] - cell[None, :]), axis=1)
                   > _EDGE_MERGE]
    return np.sort(np.concatenate([cell, keep]))


def build_transfer_matrix(sys: DrivenSystem, s: float, resolution: int = 4096,
                          mode: str = "auto") -> TransferMatrix:
    """Assemble the operator matrix for weight g^(-s).

    "exact" uses the branch cells themselves and is available only for
    affine branches with a cellwise multiplier; "ulam" bins mass on a
    refinement of the uniform grid by the branch partition, which is
    exact in the same piecewise-linear setting once the grid refines the
    cells, and a discretization otherwise.
    """
    base, mult = sys.base, sys.mult
    affine = all(b.affine for b in base.branches)
    cellwise = mult.kind == "cells" and np.allclose(mult.edges, base.edges,
                                                   atol=1e-12)
    if mode == "auto":
        mode = "exact" if (affine and cellwise) else "ulam"
    if mode == "exact":
        if not (affine and cellwise):
            raise ModeUnsupported(
                "exact mode needs affine branches and a cellwise multiplier")
        edges = np.asarray(base.cell_edges)
        rows, cols, mass = [], [], []
        for j, b in enumerate(base.branches):
            w = float(mult.values[j]) ** (-s) / abs(b.slope)
            for i in np.flatnonzero(base.transitions[j]):
                rows.append(j)
                cols.append(int(i))
                mass.append(w)
        logs = np.log(np.asarray(mult.values, dtype=float))
        return TransferMatrix(s=float(s), mode="exact", edges=edges,
                              row=np.asarray(rows, dtype=np.int64),
                              col=np.asarray(cols, dtype=np.int64),
                              mass=np.asarray(mass, dtype=float),
                              log_weights=logs)
    if mode != "ulam":
        raise ModeUnsupported(f"unknown transfer matrix mode: {mode!r}")
    if resolution < 2:
        raise InvalidParameter("resolution must be at least 2")

    edges = _ulam_edges(base, resolution)
    widths = np.diff(edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    log_w = mult.log(centers)
    weights = np.exp(-s * log_w)
    rows, cols, masses = [], [], []
    for b in base.branches:
        inner = edges[(edges > b.img_lo + _EDGE_MERGE)
                      & (edges < b.img_hi - _EDGE_MERGE)]
        dom = edges[(edges >= b.lo - _EDGE_MERGE) & (edges <= b.hi + _EDGE_MERGE)]
        anchors = np.concatenate([dom, b.inverse(inner)]) if inner.size else dom
        anchors = np.unique(anchors)
        anchors = anchors[(anchors >= b.lo - _EDGE_MERGE)
                          & (anchors <= b.hi + _EDGE_MERGE)]
        mids = 0.5 * (anchors[:-1] + anchors[1:])
        lens = np.diff(anchors)
        ok = lens > _EDGE_MERGE
        mids, lens = mids[ok], lens[ok]
        src = np.searchsorted(edges, mids) - 1
        dst = np.searchsorted(edges, b.fn(mids)) - 1
        dst = np.clip(dst, 0, widths.size - 1)
        rows.append(src)
        cols.append(dst)
        masses.append(lens / widths[src] * weights[src])
    return TransferMatrix(s=float(s), mode="ulam", edges=edges,
                          row=np.concatenate(rows),
                          col=np.concatenate(cols),
                          mass=np.concatenate(masses),
                          log_weights=log_w)


def spectral_radius(matrix: TransferMatrix, tol: float = 1e-13,
                    max_iter: int = 20000):
    """Perron root and left eigenvector by power iteration.

    Returns (rho, v) with v >= 0 and sum(v) = 1; v @ entries = rho v.
    When the iteration stalls (a complex pair hugging the Perron root,
    which happens once the weight concentrates on a near-cyclic orbit at
    large s) the root is recomputed by a direct eigensolver and certified
    by its residual.
    """
    op = matrix.transposed_csr()
    n = matrix.n_cells
    v = np.full(n, 1.0 / n)
    rho = 0.0
    for it in range(max_iter):
        w = op.dot(v)
        rho_new = float(w.sum())
        if rho_new <= 0.0:
            raise NoConvergence("transfer matrix lost all mass")
        v = w / rho_new
        change = abs(rho_new - rho)
        rho = rho_new
        if it >= 5 and change <= tol * max(1.0, rho):
            return rho, v
    return _direct_radius(op, n)


def _direct_radius(op, n):
    """Leading eigenpair by dense or Arnoldi solve, residual-certified.

    The matrix is first balanced by an exact power-of-two similarity;
    transfer weights at large s span hundreds of orders of magnitude and
    no eigensolver survives that raw.
    """
    bal, shift = _balance_radix2(op, n)
    if n <= 512:
        vals, vecs = np.linalg.eig(bal.toarray())
    else:
        from scipy.sparse.linalg import eigs
        try:
            vals, vecs = eigs(bal, k=min(3, n - 2), which="LM",
                              tol=1e-13, maxiter=10000)
        except Exception as exc:
            raise NoConvergence(f"Arnoldi eigensolver failed: {exc}") from None
    # the top cluster may be a rotation multiplet; the Perron root is its
    # real positive member, not necessarily the largest in modulus
    real_ok = np.abs(vals.imag) <= 1e-9 * np.maximum(np.abs(vals), 1e-300)
    ok = real_ok & (vals.real > 0)
    if not np.any(ok):
        raise NoConvergence(
            "no real positive eigenvalue certified in the leading cluster")
    i = int(np.argmax(np.where(ok, vals.real, -np.inf)))
    val, vec = vals[i], vecs[:, i]
    rho = float(val.real)
    v = vec.real
    if v.sum() < 0:
        v = -v
    if rho <= 0.0 or v.sum() <= 0.0:
        raise NoConvergence("direct eigensolve produced a non-Perron pair")
    resid = float(np.abs(bal.dot(v) - rho * v).sum() / (rho * np.abs(v).sum()))
    if resid > 1e-8:
        raise NoConvergence(
            f"eigenpair residual {resid:.3e} too large for rho = {rho:.6g}")
    v = np.clip(v, 0.0, None) * np.exp2(-shift.astype(float))
    total = v.sum()
    if total <= 0.0:
        raise NoConvergence("Perron vector underflowed after descaling")
    return rho, v / total


def _balance_radix2(op, n, sweeps: int = 100):
    """Osborne-style max-balancing with power-of-two scales.

    Returns (balanced csr, log2 shifts).  The similarity D op D^{-1} with
    D = diag(2^shift) is exact in floating point, so the spectrum is
    preserved bit for bit; only the conditioning improves.
    """
    coo = op.tocoo()
    ldata = np.log2(coo.data)
    shift = np.zeros(n, dtype=np.int64)
    for _ in range(sweeps):
        cur = ldata + shift[coo.row] - shift[coo.col]
        lrow = np.full(n, -np.inf)
        lcol = np.full(n, -np.inf)
        np.maximum.at(lrow, coo.row, cur)
        np.maximum.at(lcol, coo.col, cur)
        upd = np.rint((lcol - lrow) / 2.0)
        upd[~np.isfinite(upd)] = 0.0
        upd = upd.astype(np.int64)
        if not upd.any():
            break
        shift += upd
    cur = ldata + shift[coo.row] - shift[coo.col]
    bal = coo_matrix((np.exp2(cur), (coo.row, coo.col)),
                     shape=op.shape).tocsr()
    return bal, shift


def stationary_masses(matrix: TransferMatrix):
    """Cell masses of the stationary density of L_s, with cell centers."""
    _, v = spectral_radius(matrix)
    if matrix.mode == "exact":
        m = v * matrix.widths
        m /= m.sum()
    else:
        m = v / v.sum()
    return m, matrix.centers


def pressure(sys: DrivenSystem, s: float, resolution: int = 4096,
             mode: str = "auto") -> float:
    """psi(s) = log spectral radius of the weighted transfer operator."""
    rho, _ = spectral_radius(build_transfer_matrix(sys, s, resolution, mode))
    return math.log(rho)


@dataclass
class PressureCurve:
    """Sampled pressure function with its positive zero."""

    s_values: np.ndarray
    psi_values: np.ndarray
    s_star: float
    psi_prime_at_zero: float
    rho_at_zero: float
    mode: str
    resolution: int
    tol: float
    bracket: tuple
    evaluations: int


def find_sstar(sys: DrivenSystem, resolution: int = 4096, mode: str = "auto",
               tol: float = 1e-9, s_max: float = 64.0,
               curve_points: int = 25) -> PressureCurve:
    """Locate the positive zero of the pressure and sample the curve.

    Brackets the root starting from s = 0.5 (doubling upward while psi
    stays nonpositive, shrinking the lower end until psi is negative),
    then solves by Brent's method and verifies the residual.
    """
    count = [0]

    def psi(s):
        count[0] += 1
        return pressure(sys, s, resolution, mode)

    m0 = build_transfer_matrix(sys, 0.0, resolution, mode)
    rho0, _ = spectral_radius(m0)
    masses, centers = stationary_masses(m0)
    psi_prime0 = -float(np.dot(masses, m0.log_weights))

    s_hi = 0.5
    while psi(s_hi) <= 0.0:
        s_hi *= 2.0
        if s_hi > s_max:
            raise NoPositiveZero(
                f"pressure stays nonpositive up to s = {s_max}")
    s_lo = 0.025
    while psi(s_lo) >= 0.0:
        s_lo *= 0.25
        if s_lo < 1e-12:
            raise NoPositiveZero(
                "pressure is nonnegative arbitrarily close to 0; "
                "log g has no negative drift")
    while s_lo >= s_hi:
        s_lo *= 0.25

    root = float(brentq(psi, s_lo, s_hi, xtol=1e-14, rtol=8.9e-16,
                        maxiter=200))
    resid = psi(root)
    if abs(resid) > tol:
        raise NoConvergence(
            f"pressure at computed root is {resid:.3e}, above tol {tol:.1e}")

    s_grid = np.linspace(0.0, 1.25 * root, curve_points)
    s_grid = np.unique(np.concatenate([s_grid, [root]]))
    psi_grid = np.array([math.log(rho0) if s == 0.0 else psi(s)
                         for s in s_grid])
    return PressureCurve(s_values=s_grid, psi_values=psi_grid, s_star=root,
                         psi_prime_at_zero=psi_prime0,
                         rho_at_zero=rho0, mode=m0.mode, resolution=resolution,
                         tol=tol, bracket=(s_lo, s_hi),
                         evaluations=count[0])
