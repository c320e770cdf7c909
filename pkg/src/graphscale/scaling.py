"""Scaling laws of the invariant graph near its zero set.

Three measurements: the tail exponent of m{phi < eps}, the integrated
observable Xi_eps = (1/eps) * integral of min(phi, eps), and local
versions of Xi on shrinking dynamically-adapted windows.  Their eps -> 0
slopes are governed by the pressure zero s* and, locally, by the Birkhoff
exponents of the centre point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateExponent, GraphscaleError, InsufficientMass,
                     InvalidParameter, NotConverged)
from .graph import GraphSample, compute_graph, pullback_values_fixed
from .maps import DrivenSystem
from .pressure import find_sstar

_MACH = float(np.finfo(float).eps)
_trapz = getattr(np, "trapezoid", None) or np.trapz


def _fit_line(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def default_window(graph: GraphSample) -> tuple:
    """Epsilon range for tail and Xi fits.

    Two decades ending 1.5 decades below the ceiling: large enough to
    escape the saturated regime near a, small enough that depth-limited
    undercounting of tiny values has not set in yet.
    """
    hi = graph.a * 10.0 ** (-1.5)
    lo = max(hi / 100.0, 10.0 * graph.zero_floor)
    if lo >= hi:
        raise InsufficientMass("zero_floor too large for a usable window")
    return lo, hi


def _eps_grid(window, points_per_decade):
    lo, hi = window
    if not (0 < lo < hi):
        raise InvalidParameter("window must satisfy 0 < lo < hi")
    n = max(int(round(math.log10(hi / lo) * points_per_decade)), 2) + 1
    return np.geomspace(lo, hi, n)


@dataclass
class TailReport:
    """Log-log fit of the small-value mass m{phi < eps}."""

    eps: np.ndarray
    mass: np.ndarray
    window: tuple
    slope: float
    intercept: float
    r2: float
    predicted: float | None = None

    @property
    def residual(self):
        return None if self.predicted is None else self.slope - self.predicted


def tail_exponent(graph: GraphSample, window=None, predicted=None,
                  points_per_decade: int = 24) -> TailReport:
    """Fit log m{phi < eps} against log eps over the window."""
    if graph.values.size < 10_000:
        raise InvalidParameter("tail fit needs a graph with >= 1e4 points")
    if window is None:
        window = default_window(graph)
    eps = _eps_grid(window, points_per_decade)
    sorted_vals = np.sort(graph.values)
    mass = np.searchsorted(sorted_vals, eps, side="left") / sorted_vals.size
    pos = mass > 0
    if np.count_nonzero(pos) < 3:
        raise InsufficientMass(
            f"only {np.count_nonzero(pos)} eps points carry mass in {window}")
    slope, intercept, r2 = _fit_line(np.log(eps[pos]), np.log(mass[pos]))
    return TailReport(eps=eps, mass=mass, window=tuple(window), slope=slope,
                      intercept=intercept, r2=r2, predicted=predicted)


def _integral_mean(grid, f):
    # uniform grids on the circle: trapezoid with wraparound equals the mean
    d = np.diff(grid)
    if d.size == 0:
        return float(f[0])
    if np.allclose(d, d[0], rtol=1e-9, atol=1e-15):
        return float(np.mean(f))
    return float(_trapz(f, grid) / (grid[-1] - grid[0]))


@dataclass
class XiReport:
    """Scaling of the integrated observable and of its defect 1 - Xi."""

    eps: np.ndarray
    xi: np.ndarray
    one_minus_xi: np.ndarray
    window: tuple
    slope_xi: float
    slope_one_minus: float
    r2_one_minus: float
    predicted: float | None = None

    @property
    def residual(self):
        return None if self.predicted is None else (self.slope_one_minus
                                                    - self.predicted)


def global_xi(graph: GraphSample, window=None, predicted=None,
              points_per_decade: int = 24) -> XiReport:
    """Xi_eps and 1 - Xi_eps with their log-log slopes over the window.

    1 - Xi is accumulated directly from (eps - phi)+ so the defect keeps
    full relative precision where Xi is close to 1.
    """
    if window is None:
        window = default_window(graph)
    eps = _eps_grid(window, points_per_decade)
    v = graph.values
    xi = np.empty(eps.size)
    om = np.empty(eps.size)
    for i, e in enumerate(eps):
        xi[i] = _integral_mean(graph.grid, np.minimum(v, e)) / e
        om[i] = _integral_mean(graph.grid, np.clip(e - v, 0.0, None)) / e
    pos = om > 0
    if np.count_nonzero(pos) < 3:
        raise InsufficientMass("1 - Xi vanishes over the chosen window")
    slope_om, _, r2 = _fit_line(np.log(eps[pos]), np.log(om[pos]))
    slope_xi, _, _ = _fit_line(np.log(eps), np.log(np.maximum(xi, 1e-300)))
    return XiReport(eps=eps, xi=xi, one_minus_xi=om, window=tuple(window),
                    slope_xi=slope_xi, slope_one_minus=slope_om,
                    r2_one_minus=r2, predicted=predicted)


# ---------------------------------------------------------------------------
# local index


@dataclass(frozen=True)
class IndexPrediction:
    """Closed-form local exponents from Birkhoff data and s*."""

    regime: str                 # "plus" or "minus"
    sigma_plus: float
    sigma_minus: float


def predict_sigma(gamma: float, lam: float, s_star: float) -> IndexPrediction:
    """sigma_+ = s* (gamma+lam)/lam when gamma+lam > 0, else
    sigma_- = -(gamma+lam)/lam; exactly one is nonzero."""
    if lam <= 0:
        raise InvalidParameter("expansion exponent lam must be positive")
    if s_star <= 0:
        raise InvalidParameter("s_star must be positive")
    drift = gamma + lam
    if abs(drift) <= 1e-6 * (abs(gamma) + abs(lam)):
        raise DegenerateExponent(
            f"gamma + lam = {drift:.3e} is degenerate at this point")
    if drift > 0:
        return IndexPrediction("plus", s_star * drift / lam, 0.0)
    return IndexPrediction("minus", 0.0, -drift / lam)


def birkhoff_exponents(sys: DrivenSystem, theta: float, rel_tol: float = 1e-3,
                       n0: int = 64, n_max: int = 1 << 20):
    """Birkhoff averages (Gamma of log g, Lam of log |S'|) at theta.

    Doubles the horizon until both averages move by less than rel_tol
    relative to their common scale; periodic points settle immediately.
    """
    t = float(theta)
    sum_g = 0.0
    sum_l = 0.0
    n = 0
    target = n0
    prev = None
    while n < n_max:
        val, der, _ = sys.base.apply(t)
        sum_l += math.log(der)
        t = float(val)
        sum_g += sys.mult.log(t)
        n += 1
        if n == target:
            cur = (sum_g / n, sum_l / n)
            if prev is not None:
                scale = max(abs(cur[0]), abs(cur[1]), 1e-12)
                if (abs(cur[0] - prev[0]) <= rel_tol * scale
                        and abs(cur[1] - prev[1]) <= rel_tol * scale):
                    return cur[0], cur[1], n
            prev = cur
            target *= 2
    raise NotConverged(
        f"Birkhoff averages did not settle within {n_max} iterations")


@dataclass
class IndexRung:
    """One ladder level of the local index measurement."""

    k: int
    eps: float
    depth: int
    window: tuple
    sigma: float
    one_minus_sigma: float
    hits: int
    samples: int
    used: bool = False


@dataclass
class IndexReport:
    """Local stability index at one point: ladder, fit, and prediction."""

    theta: float
    gamma: float
    lam: float
    birkhoff_n: int
    s_star: float
    regime: str
    sigma_plus_pred: float
    sigma_minus_pred: float
    empirical: float
    intercept: float
    r2: float
    rungs: list = field(default_factory=list)

    @property
    def predicted(self) -> float:
        return self.sigma_plus_pred if self.regime == "plus" else self.sigma_minus_pred

    @property
    def residual(self) -> float:
        return self.empirical - self.predicted


def local_sigma_empirical(sys: DrivenSystem, theta: float, s_star=None,
                          exponents=None, k_min: int = 1, k_max: int = 14,
                          local_grid: int = 600_000, base_depth: int = 80,
                          depth_per_rung: int = 4, saturation: float = 0.25,
                          min_hits: int = 25, delta_min: float = 0.05,
                          threads: int = 1) -> IndexReport:
    """Measure the local index of the graph at theta on a shrinking ladder.

    Rung k uses eps_k = 1/(2 |(S^k)'(theta)|) and the window
    (theta - eps_k, theta + eps_k) clipped to the depth-k monotonicity
    interval of theta, so the expanded window always stays inside one
    branch composition.  Sigma is the window mean of min(phi, eps)/eps;
    the defect 1 - sigma is accumulated directly.  The fitted slope is
    taken over rungs that are out of saturation, above float resolution,
    and carry enough sub-eps hits.
    """
    for b in sys.base.branches:
        if not (b.img_lo <= 1e-9 and b.img_hi >= 1 - 1e-9):
            raise InvalidParameter(
                "local index ladder requires a full-branch base map")
    if exponents is None:
        gamma, lam, n_bir = birkhoff_exponents(sys, theta)
    else:
        gamma, lam = float(exponents[0]), float(exponents[1])
        n_bir = 0
    if s_star is None:
        s_star = find_sstar(sys).s_star
    pred = predict_sigma(gamma, lam, s_star)

    a = sys.fiber.a
    rungs = []
    deriv = 1.0
    t = float(theta)
    for k in range(1, k_max + 1):
        _, der, _ = sys.base.apply(t)
        deriv *= float(der)
        t = float(sys.base.apply(t)[0])
        if k < k_min:
            continue
        eps = 0.5 / deriv
        c_lo, c_hi = sys.base.cylinder(theta, k)
        w_lo = max(theta - eps, c_lo)
        w_hi = min(theta + eps, c_hi)
        width = w_hi - w_lo
        if width <= 0 or width * deriv < delta_min:
            continue
        depth = base_depth + depth_per_rung * k
        pts = w_lo + (np.arange(local_grid) + 0.5) * (width / local_grid)
        phi = pullback_values_fixed(sys, pts, depth, threads=threads)
        sigma = float(np.mean(np.minimum(phi, eps)) / eps)
        om = float(np.mean(np.clip(eps - phi, 0.0, None)) / eps)
        hits = int(np.count_nonzero(phi < eps))
        # the defect integrand (eps - phi)+/eps never exceeds the
        # indicator of {phi < eps}, so its mean is capped by the hit rate
        if om > hits / local_grid + 1e-12:
            raise GraphscaleError(
                f"rung {k}: defect {om:.3e} exceeds hit fraction "
                f"{hits / local_grid:.3e}")
        rungs.append(IndexRung(k=k, eps=eps, depth=depth,
                               window=(w_lo, w_hi), sigma=sigma,
                               one_minus_sigma=om, hits=hits,
                               samples=local_grid))
    if not rungs:
        raise NotConverged("no usable ladder rungs at this point")

    xs, ys = [], []
    for r in rungs:
        if pred.regime == "plus":
            val = r.one_minus_sigma
            floor = 50.0 * _MACH * a / r.eps
            ok = (val < saturation and val > floor and r.hits >= min_hits)
        else:
            val = r.sigma
            ok = (0.0 < val < saturation)
        if ok:
            r.used = True
            xs.append(math.log(r.eps))
            ys.append(math.log(val))
    if len(xs) < 3:
        raise NotConverged(
            f"only {len(xs)} of {len(rungs)} rungs usable for the index fit")
    slope, intercept, r2 = _fit_line(np.asarray(xs), np.asarray(ys))
    return IndexReport(theta=float(theta), gamma=gamma, lam=lam,
                       birkhoff_n=n_bir, s_star=float(s_star),
                       regime=pred.regime, sigma_plus_pred=pred.sigma_plus,
                       sigma_minus_pred=pred.sigma_minus, empirical=slope,
                       intercept=intercept, r2=r2, rungs=rungs)
