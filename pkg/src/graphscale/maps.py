"""Base circle maps, multipliers, fibre maps and driven-system assembly.

The base dynamics is a piecewise expanding Markov map S of [0,1) with
finitely many monotone branches whose images align with the branch
partition.  A driven system couples S with a positive multiplier g and a
concave fibre map h through the update x -> g(theta) * h(x).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidParameter, NoConvergence

_EDGE_TOL = 1e-9


def _mod1(x):
    y = x - np.floor(x)
    # floats that round up to exactly 1.0 wrap to 0.0
    return np.where(y >= 1.0, 0.0, y)


@dataclass(frozen=True)
class Branch:
    """One monotone branch of the base map on the half-open domain [lo, hi)."""

    lo: float
    hi: float
    fn: object                 # vectorised map on the domain
    deriv: object              # vectorised |S'| on the domain
    img_lo: float
    img_hi: float
    slope: float | None = None      # set when the branch is affine
    intercept: float | None = None

    @property
    def affine(self) -> bool:
        return self.slope is not None

    def inverse(self, y):
        """Preimage of y under this branch; y may be an array in [img_lo, img_hi]."""
        if self.affine:
            return (np.asarray(y, dtype=float) - self.intercept) / self.slope
        y = np.asarray(y, dtype=float)
        lo = np.full(y.shape, self.lo)
        hi = np.full(y.shape, self.hi)
        increasing = self.img_hi >= self.img_lo
        for _ in range(80):  # bisection to ~1e-13 on a unit interval
            mid = 0.5 * (lo + hi)
            val = self.fn(mid)
            go_right = (val < y) if increasing else (val > y)
            lo = np.where(go_right, mid, lo)
            hi = np.where(go_right, hi, mid)
        return 0.5 * (lo + hi)


def _primitive(T: np.ndarray) -> bool:
    n = T.shape[0]
    P = (T > 0).astype(np.int64)
    A = P.copy()
    for _ in range(2 * n):
        if np.all(A > 0):
            return True
        A = np.minimum(A @ P, 1)
    return bool(np.all(A > 0))


@dataclass(frozen=True)
class MarkovIntervalMap:
    """Piecewise expanding Markov map of the circle [0,1)."""

    branches: tuple
    lambda_min: float
    edges: np.ndarray = field(repr=False, default=None)
    transitions: np.ndarray = field(repr=False, default=None)

    @staticmethod
    def build(branches, lambda_min=None) -> "MarkovIntervalMap":
        branches = tuple(branches)
        edges = np.array([b.lo for b in branches] + [branches[-1].hi])
        if abs(edges[0]) > _EDGE_TOL or abs(edges[-1] - 1.0) > _EDGE_TOL:
            raise InvalidParameter("branch domains must partition [0,1)")
        for i, b in enumerate(branches):
            if not (b.hi - b.lo > _EDGE_TOL):
                raise InvalidParameter("empty branch domain")
            if i + 1 < len(branches) and abs(b.hi - branches[i + 1].lo) > _EDGE_TOL:
                raise InvalidParameter("branch domains must be contiguous")
        # Markov alignment: every branch image must start and end on cell edges
        interior = edges[:-1]
        for b in branches:
            for y in (b.img_lo, b.img_hi):
                ref = np.concatenate([interior, [1.0]])
                if np.min(np.abs(ref - y)) > _EDGE_TOL:
                    raise InvalidParameter(
                        f"branch image endpoint {y} does not align with the cell partition")
        # expansion estimate
        lam = np.inf
        for b in branches:
            xs = np.linspace(b.lo, b.hi, 257, endpoint=False) + (b.hi - b.lo) / 514
            lam = min(lam, float(np.min(np.abs(b.deriv(xs)))))
        if lambda_min is None:
            lambda_min = lam
        if lam < 1.0 + 1e-12 or lambda_min > lam + 1e-9:
            raise InvalidParameter(f"map is not uniformly expanding (min |S'| ~ {lam})")
        n = len(branches)
        T = np.zeros((n, n))
        for j, b in enumerate(branches):
            for i in range(n):
                c0, c1 = edges[i], edges[i + 1]
                if b.img_lo - _EDGE_TOL <= c0 and c1 <= b.img_hi + _EDGE_TOL:
                    T[j, i] = 1.0
        if not _primitive(T):
            raise InvalidParameter("transition matrix is not primitive (map not mixing)")
        return MarkovIntervalMap(branches=branches, lambda_min=float(lambda_min),
                                 edges=edges, transitions=T)

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    @property
    def cell_edges(self) -> np.ndarray:
        return self.edges

    def branch_index(self, theta):
        """Cell index of theta; a cell boundary belongs to the branch on its right."""
        th = np.asarray(theta, dtype=float)
        idx = np.searchsorted(self.edges, th, side="right") - 1
        return np.clip(idx, 0, self.n_branches - 1)

    def branch_index_scalar(self, theta: float) -> int:
        i = bisect.bisect_right(self.edges, theta) - 1
        return min(max(i, 0), self.n_branches - 1)

    def apply(self, theta):
        """Return (S(theta) mod 1, |S'(theta)|, branch index), vectorised."""
        th = np.asarray(theta, dtype=float)
        idx = self.branch_index(th)
        val = np.empty_like(th)
        der = np.empty_like(th)
        for j, b in enumerate(self.branches):
            m = idx == j
            if np.any(m):
                val[m] = b.fn(th[m])
                der[m] = np.abs(b.deriv(th[m]))
        return _mod1(val), der, idx

    def step(self, theta):
        return self.apply(theta)[0]

    def orbit(self, theta, n: int) -> np.ndarray:
        """Forward orbit [theta, S theta, ..., S^n theta] along axis 0."""
        th = np.asarray(theta, dtype=float)
        out = np.empty((n + 1,) + th.shape, dtype=float)
        out[0] = th
        for k in range(1, n + 1):
            out[k] = self.step(out[k - 1])
        return out

    def deriv_abs(self, theta):
        return self.apply(theta)[1]

    def cylinder(self, theta: float, n: int) -> tuple[float, float]:
        """Interval around theta on which S^n follows theta's branch itinerary."""
        word = []
        t = float(theta)
        for _ in range(n):
            j = self.branch_index_scalar(t)
            word.append(j)
            t = float(self.apply(t)[0])
        lo, hi = 0.0, 1.0
        for j in reversed(word):
            b = self.branches[j]
            lo_b = max(lo, b.img_lo)
            hi_b = min(hi, b.img_hi)
            lo = float(b.inverse(lo_b))
            hi = float(b.inverse(hi_b))
            if hi < lo:
                lo, hi = hi, lo
            lo = max(lo, b.lo)
            hi = min(hi, b.hi)
        return lo, hi


def affine_branch(lo, hi, slope, intercept) -> Branch:
    img0 = slope * lo + intercept
    img1 = slope * hi + intercept
    img_lo, img_hi = (img0, img1) if img1 >= img0 else (img1, img0)
    return Branch(lo=float(lo), hi=float(hi),
                  fn=(lambda t, m=slope, c=intercept: m * np.asarray(t, dtype=float) + c),
                  deriv=(lambda t, m=slope: np.full(np.shape(t), abs(m), dtype=float)
                         if np.shape(t) else abs(float(m))),
                  img_lo=float(img_lo), img_hi=float(img_hi),
                  slope=float(slope), intercept=float(intercept))


def full_branch_linear_map(breaks) -> MarkovIntervalMap:
    """Piecewise-linear map whose branches each cover [0,1); breaks include 0 and 1."""
    breaks = [float(b) for b in breaks]
    if breaks[0] != 0.0 or breaks[-1] != 1.0 or len(breaks) < 3:
        raise InvalidParameter("breaks must run from 0.0 to 1.0 with interior points")
    branches = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        m = 1.0 / (hi - lo)
        branches.append(affine_branch(lo, hi, m, -m * lo))
    return MarkovIntervalMap.build(branches)


def doubling_map() -> MarkovIntervalMap:
    return full_branch_linear_map([0.0, 0.5, 1.0])


def tripling_map() -> MarkovIntervalMap:
    return full_branch_linear_map([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])


def baker_factor_map(split: float) -> MarkovIntervalMap:
    if not 0.0 < split < 1.0:
        raise InvalidParameter("split must lie in (0,1)")
    return full_branch_linear_map([0.0, split, 1.0])


@dataclass(frozen=True)
class Multiplier:
    """Positive weight g on [0,1); either constant per cell or a closed form."""

    kind: str                       # "cells" | "function"
    edges: np.ndarray = None        # cell boundaries, "cells" kind
    values: np.ndarray = None       # per-cell values, "cells" kind
    fn: object = None               # vectorised g, "function" kind
    holder: tuple | None = None     # (exponent, constant) per branch, optional
    label: str = ""

    @staticmethod
    def piecewise(base: MarkovIntervalMap, values) -> "Multiplier":
        values = np.asarray(values, dtype=float)
        if values.size != base.n_branches:
            raise InvalidParameter("need one multiplier value per branch cell")
        if np.any(values <= 0):
            raise InvalidParameter("multiplier values must be positive")
        return Multiplier(kind="cells", edges=base.cell_edges.copy(), values=values,
                          holder=(1.0, 0.0),
                          label="cells[" + ",".join(f"{v:g}" for v in values) + "]")

    @staticmethod
    def from_function(fn, holder=None, label="g") -> "Multiplier":
        return Multiplier(kind="function", fn=fn, holder=holder, label=label)

    def __call__(self, theta):
        th = np.asarray(theta, dtype=float)
        if self.kind == "cells":
            idx = np.clip(np.searchsorted(self.edges, th, side="right") - 1,
                          0, self.values.size - 1)
            return self.values[idx]
        return np.asarray(self.fn(th), dtype=float)

    def scalar(self, theta: float) -> float:
        if self.kind == "cells":
            i = bisect.bisect_right(self.edges, theta) - 1
            return float(self.values[min(max(i, 0), self.values.size - 1)])
        return float(self.fn(theta))

    def log(self, theta):
        return np.log(self(theta))

    def sup(self) -> float:
        if self.kind == "cells":
            return float(np.max(self.values))
        grid = np.linspace(0.0, 1.0, 1 << 17, endpoint=False)
        return float(np.max(self(grid)))

    def inf(self) -> float:
        if self.kind == "cells":
            return float(np.min(self.values))
        grid = np.linspace(0.0, 1.0, 1 << 17, endpoint=False)
        return float(np.min(self(grid)))

    @property
    def cellwise(self) -> bool:
        return self.kind == "cells"

    def scaled(self, factor: float) -> "Multiplier":
        if factor <= 0:
            raise InvalidParameter("scale factor must be positive")
        if self.kind == "cells":
            return replace(self, values=self.values * factor)
        fn = self.fn
        return replace(self, fn=(lambda th, c=factor, f=fn: c * np.asarray(f(th))),
                       label=f"{factor:g}*{self.label}")


def shifted_cosine_multiplier(r: float, eps: float = 0.01) -> Multiplier:
    """g(theta) = r * (1 + eps + cos(2 pi theta))."""
    if r <= 0 or eps <= 0:
        raise InvalidParameter("need r > 0 and eps > 0")
    fn = lambda th: r * (1.0 + eps + np.cos(2.0 * np.pi * np.asarray(th, dtype=float)))
    # Lipschitz constant of log g: sup 2 pi sin / (1+eps+cos) = 2 pi / sqrt(eps(2+eps))
    lip = 2.0 * np.pi / math.sqrt(eps * (2.0 + eps))
    return Multiplier(kind="function", fn=fn, holder=(1.0, lip),
                      label=f"{r:g}*(1+{eps:g}+cos2pi)")


@dataclass(frozen=True)
class FiberMap:
    """Concave increasing fibre map h on [0, a] with h(0)=0, h'(0)=1."""

    h: object
    h_deriv: object
    a: float
    a_h: float          # smallest c with h'(x) >= exp(-c x) on (0, a]
    c_h: float          # min(a, h'(a))
    name: str = "h"
    h_scalar: object = None
    h_deriv_scalar: object = None

    @staticmethod
    def build(h, h_deriv, a, name="h", h_scalar=None, h_deriv_scalar=None) -> "FiberMap":
        a = float(a)
        if a <= 0:
            raise InvalidParameter("fibre ceiling a must be positive")
        xs = np.concatenate([np.geomspace(1e-12, a, 4000), np.linspace(a / 10000, a, 10000)])
        xs = np.unique(xs)
        hx = np.asarray(h(xs), dtype=float)
        dx = np.asarray(h_deriv(xs), dtype=float)
        if abs(float(h(0.0))) > 1e-12:
            raise InvalidParameter("h(0) must be 0")
        if abs(float(h_deriv(0.0)) - 1.0) > 1e-9:
            raise InvalidParameter("h'(0) must be 1")
        if np.any(dx <= 0):
            raise InvalidParameter("h must be strictly increasing on [0, a]")
        if np.any(np.diff(dx) > 1e-10):
            raise InvalidParameter("h' must be nonincreasing (h concave)")
        if np.any(hx > xs * (1 + 1e-12) + 1e-15):
            raise InvalidParameter("concavity with h'(0)=1 forces h(x) <= x")
        # smallest a_h with h'(x) >= exp(-a_h x): maximise q(x) = -log h'(x) / x,
        # grid scan plus one Newton polish on q'
        q = -np.log(dx) / xs
        i = int(np.argmax(q))
        x0 = xs[i]
        dq = lambda x: (-(math.log(float(h_deriv(x + 1e-7))) - math.log(float(h_deriv(x - 1e-7))))
                        / (2e-7) * x + math.log(float(h_deriv(x)))) / (x * x)
        if 0 < i < xs.size - 1:
            d1 = dq(x0)
            d2 = (dq(x0 + 1e-6) - dq(x0 - 1e-6)) / 2e-6
            if d2 != 0 and abs(d1 / d2) < (xs[i + 1] - xs[i - 1]):
                xn = x0 - d1 / d2
                if xs[i - 1] < xn < xs[i + 1]:
                    qn = -math.log(float(h_deriv(xn))) / xn
                    if qn > q[i]:
                        x0 = xn
        a_h = max(float(q[i]), -math.log(float(h_deriv(x0))) / x0) * (1 + 1e-12) + 1e-15
        if np.any(np.log(dx) < -a_h * xs - 1e-12):
            raise InvalidParameter("failed to certify h'(x) >= exp(-a_h x)")
        c_h = min(a, float(h_deriv(a)))
        return FiberMap(h=h, h_deriv=h_deriv, a=a, a_h=a_h, c_h=c_h, name=name,
                        h_scalar=h_scalar or (lambda x: float(h(x))),
                        h_deriv_scalar=h_deriv_scalar or (lambda x: float(h_deriv(x))))


def arctan_fiber(a: float) -> FiberMap:
    return FiberMap.build(np.arctan, lambda x: 1.0 / (1.0 + np.asarray(x) ** 2), a,
                          name="arctan", h_scalar=math.atan,
                          h_deriv_scalar=lambda x: 1.0 / (1.0 + x * x))


def rational_fiber(a: float) -> FiberMap:
    return FiberMap.build(lambda x: np.asarray(x) / (1.0 + np.asarray(x)),
                          lambda x: 1.0 / (1.0 + np.asarray(x)) ** 2, a,
                          name="x/(1+x)", h_scalar=lambda x: x / (1.0 + x),
                          h_deriv_scalar=lambda x: 1.0 / (1.0 + x) ** 2)


def table_fiber(xs, ys, a: float) -> FiberMap:
    """Monotone concave interpolant through sample points (monotone cubic)."""
    from scipy.interpolate import PchipInterpolator

    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs[0] != 0.0 or ys[0] != 0.0:
        raise InvalidParameter("table must start at (0, 0)")
    interp = PchipInterpolator(xs, ys, extrapolate=False)
    dinterp = interp.derivative()
    return FiberMap.build(lambda x: np.asarray(interp(np.clip(x, 0, xs[-1]))),
                          lambda x: np.asarray(dinterp(np.clip(x, 0, xs[-1]))),
                          a, name="table")


def make_fiber(kind: str, a: float, table=None) -> FiberMap:
    if kind == "arctan":
        return arctan_fiber(a)
    if kind in ("rational", "x/(1+x)"):
        return rational_fiber(a)
    if kind in ("table", "custom-table"):
        if table is None:
            raise InvalidParameter("table fibre requires sample points")
        return table_fiber(table["x"], table["y"], a)
    raise InvalidParameter(f"unknown fibre kind {kind!r}")


@dataclass(frozen=True)
class PeriodicOrbit:
    points: tuple
    period: int
    mean_log_g: float

    @property
    def geometric_mean_multiplier(self) -> float:
        return math.exp(self.mean_log_g)


@dataclass
class HypothesisReport:
    acim_log_g_mean: float
    worst_orbit_mean: float | None
    witness_orbit: PeriodicOrbit | None
    status: str                      # "satisfied" | "violated" | "undetermined"
    max_period: int = 0
    acim_resolution: int = 0
    min_log_g: float = 0.0


@dataclass
class DrivenSystem:
    """Base map + multiplier + fibre map, with the invariant ceiling sup g * h(a) <= a."""

    base: MarkovIntervalMap
    mult: Multiplier
    fiber: FiberMap
    label: str = ""
    validation: HypothesisReport | None = None

    def __post_init__(self):
        lift = self.mult.sup() * float(self.fiber.h_scalar(self.fiber.a))
        if lift > self.fiber.a * (1 + 1e-12):
            raise InvalidParameter(
                f"sup g * h(a) = {lift:g} exceeds a = {self.fiber.a:g}; "
                "the fibre interval is not forward invariant")

    def log_g(self, theta):
        return self.mult.log(theta)


def pc42_system(a: float = 8.0) -> DrivenSystem:
    base = doubling_map()
    return DrivenSystem(base, Multiplier.piecewise(base, [4.0, 0.5]),
                        arctan_fiber(a), label="pc42")


def t3_system(a: float = 15.0) -> DrivenSystem:
    base = tripling_map()
    return DrivenSystem(base, Multiplier.piecewise(base, [9.0, 1.0 / 9.0, 3.0]),
                        arctan_fiber(a), label="t3")


def baker_system(r: float, split: float = 0.45, eps: float = 0.01,
                 a: float = 15.0, fiber_kind: str = "arctan") -> DrivenSystem:
    base = baker_factor_map(split)
    return DrivenSystem(base, shifted_cosine_multiplier(r, eps),
                        make_fiber(fiber_kind, a), label=f"baker-r{r:g}")


# ---------------------------------------------------------------------------
# operations


def apply_map(base: MarkovIntervalMap, theta):
    """One step of the base map: (S(theta), |S'(theta)|, branch index)."""
    val, der, idx = base.apply(theta)
    if np.ndim(theta) == 0:
        return float(val), float(der), int(idx)
    return val, der, idx


def orbit_exponents(sys: DrivenSystem, theta: float, n: int) -> tuple[float, float]:
    """Finite-time multiplier and expansion exponents at theta.

    Returns (Gamma_n, Lambda_n) with Gamma_n the average of log g over
    S theta .. S^n theta and Lambda_n the average of log |S'| over
    theta .. S^{n-1} theta.
    """
    if n < 1:
        raise InvalidParameter("need n >= 1")
    t = float(theta)
    sum_lam = 0.0
    sum_gam = 0.0
    for _ in range(n):
        val, der, _ = apply_map(sys.base, t)
        sum_lam += math.log(der)
        t = val
        sum_gam += math.log(sys.mult.scalar(t))
    return sum_gam / n, sum_lam / n


def _canonical_necklaces(transitions: np.ndarray, max_period: int):
    """Aperiodic admissible cycles up to rotation, as symbol tuples."""
    n = transitions.shape[0]
    adm = transitions > 0
    out = []

    def extend(word):
        p = len(word)
        if p >= 1 and p <= max_period and adm[word[-1]][word[0]]:
            rots = [tuple(word[i:] + word[:i]) for i in range(p)]
            w = tuple(word)
            if min(rots) == w and all(w != r for r in rots[1:]):
                out.append(w)
        if p == max_period:
            return
        last = word[-1]
        for s in range(n):
            if adm[last][s] and s >= word[0]:
                # canonical rotations never start above their smallest symbol
                extend(word + [s])

    for s0 in range(n):
        extend([s0])
    return out


def find_periodic_orbits(base: MarkovIntervalMap, mult: Multiplier,
                         max_period: int) -> list[PeriodicOrbit]:
    """All periodic orbits of period <= max_period, sorted by mean log g.

    Cycles are enumerated symbolically over the transition graph and each
    one is solved on its cylinder (closed form for affine branches,
    bisection otherwise).  Orbits whose solved point does not reproduce
    the symbolic itinerary (boundary artefacts) are discarded.
    """
    if not 1 <= max_period <= 12:
        raise InvalidParameter("max_period must be between 1 and 12")
    orbits = []
    for word in _canonical_necklaces(base.transitions, max_period):
        p = len(word)
        # cylinder of the word, pulled back through the branch inverses
        lo, hi = 0.0, 1.0
        affine = all(base.branches[s].affine for s in word)
        for s in reversed(word):
            b = base.branches[s]
            lo = float(b.inverse(max(min(lo, b.img_hi), b.img_lo)))
            hi = float(b.inverse(max(min(hi, b.img_hi), b.img_lo)))
            if hi < lo:
                lo, hi = hi, lo
            lo, hi = max(lo, b.lo), min(hi, b.hi)

        def compose(x):
            t = x
            for s in word:
                t = float(base.branches[s].fn(t))
            return t

        if affine:
            A = 1.0
            for s in word:
                A *= base.branches[s].slope
            x = (compose(lo) - A * lo) / (1.0 - A)
        else:
            f_lo = compose(lo) - lo
            f_hi = compose(hi) - hi
            if f_lo > 1e-9 or f_hi < -1e-9:
                raise NoConvergence(
                    f"cycle {word}: no bracket for the fixed point (non-Markov input?)")
            if f_lo > 0.0:
                # root pinned to a bisection-inexact cylinder endpoint
                xa = xb = lo
            elif f_hi < 0.0:
                xa = xb = hi
            else:
                xa, xb = lo, hi
            for _ in range(100):
                xm = 0.5 * (xa + xb)
                if compose(xm) - xm < 0:
                    xa = xm
                else:
                    xb = xm
            x = 0.5 * (xa + xb)
            for _ in range(3):  # Newton polish with the chain-rule derivative
                d = 1.0
                t = x
                for s in word:
                    d *= float(base.branches[s].deriv(t))
                    t = float(base.branches[s].fn(t))
                if d != 1.0:
                    x = x - (t - x) / (d - 1.0)
        x = min(max(x, 0.0), 1.0)
        x = x - math.floor(x)
        pts = []
        t = x
        ok = True
        for s in word:
            if base.branch_index_scalar(t) != s:
                ok = False
                break
            pts.append(t)
            t = float(base.apply(t)[0])
        if not ok or abs(t - x) > 1e-10:
            continue
        mean = sum(math.log(mult.scalar(q)) for q in pts) / p
        orbits.append(PeriodicOrbit(points=tuple(pts), period=p, mean_log_g=mean))
    orbits.sort(key=lambda o: (o.mean_log_g, o.period, o.points))
    return orbits


def validate_hypotheses(sys: DrivenSystem, max_period: int = 8,
                        acim_resolution: int = 4096) -> HypothesisReport:
    """Check the sign conditions on log g: some invariant measure strictly
    negative, the absolutely continuous one strictly positive.

    The a.c. average comes from the stationary density of the unweighted
    transfer matrix; the negative side searches periodic orbits.  When no
    negative orbit is found the status is only "undetermined" unless
    min log g >= 0 rules every measure out.
    """
    from .pressure import build_transfer_matrix, stationary_masses

    M = build_transfer_matrix(sys, s=0.0, resolution=acim_resolution, mode="auto")
    masses, centers = stationary_masses(M)
    acim_mean = float(np.sum(np.log(sys.mult(centers)) * masses))

    orbits = find_periodic_orbits(sys.base, sys.mult, max_period)
    witness = orbits[0] if orbits else None
    worst = witness.mean_log_g if witness else None

    min_log_g = math.log(sys.mult.inf())
    if acim_mean <= 0.0:
        status = "violated"
    elif worst is not None and worst < 0.0:
        status = "satisfied"
    elif min_log_g >= 0.0:
        status = "violated"
    else:
        status = "undetermined"
    report = HypothesisReport(acim_log_g_mean=acim_mean, worst_orbit_mean=worst,
                              witness_orbit=witness, status=status,
                              max_period=max_period, acim_resolution=acim_resolution,
                              min_log_g=min_log_g)
    sys.validation = report
    return report


# ---------------------------------------------------------------------------
# hyperbolic drivers (invertible extensions with contracting fibres)


@dataclass(frozen=True)
class HyperbolicDriver:
    """Invertible driver whose inverse contracts the u-fibres over the factor S.

    States are pairs (u, theta); `inverse` is the backward step, `project`
    extracts the factor coordinate and `section` embeds the factor into
    the state space.  d(inverse^n(state), inverse^n(section(project(state))))
    <= contraction_const * contraction_rate^n in the fibre metric.
    """

    name: str
    inverse: object
    project: object
    section: object
    contraction_rate: float
    contraction_const: float
    factor: MarkovIntervalMap
    g_hat_holder: tuple | None = None

    def backward_orbit(self, state, n: int):
        """[state, inverse(state), ..., inverse^n(state)] as (u, theta) arrays."""
        u, th = (np.asarray(state[0], dtype=float), np.asarray(state[1], dtype=float))
        us = np.empty((n + 1,) + u.shape)
        ths = np.empty((n + 1,) + th.shape)
        us[0], ths[0] = u, th
        for k in range(1, n + 1):
            us[k], ths[k] = self.inverse((us[k - 1], ths[k - 1]))
        return us, ths


def baker_driver(split: float) -> HyperbolicDriver:
    """Baker transformation on the unit square, driving through its inverse."""
    s = float(split)
    if not 0.0 < s < 1.0:
        raise InvalidParameter("split must lie in (0,1)")
    factor = baker_factor_map(s)

    def inverse(state):
        # theta moves by the factor map itself so that backward driver
        # orbits and forward factor orbits agree to the last bit
        u, th = np.asarray(state[0], dtype=float), np.asarray(state[1], dtype=float)
        val, _, idx = factor.apply(th)
        u2 = np.where(idx == 0, s * u, s + (1.0 - s) * u)
        return u2, val

    def project(state):
        return np.asarray(state[1], dtype=float)

    def section(theta):
        th = np.asarray(theta, dtype=float)
        return np.zeros_like(th), th

    return HyperbolicDriver(name=f"baker(split={s:g})", inverse=inverse,
                            project=project, section=section,
                            contraction_rate=max(s, 1.0 - s), contraction_const=1.0,
                            factor=factor)
