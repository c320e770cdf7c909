"""Pullback computation of the maximal invariant graph.

phi_n(theta) is the depth-n pullback of the fibre ceiling a:
fold y <- g(S^k theta) * h(y) from the deep end k = n down to k = 1.
The sequence decreases pointwise in n; its limit is the upper bound of
all invariant graphs below the ceiling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import GraphscaleError, InvalidParameter, NonHolder
from .maps import DrivenSystem, FiberMap, HyperbolicDriver, Multiplier


@dataclass
class GraphSample:
    """Pullback values of the invariant graph on an ordered grid."""

    grid: np.ndarray
    values: np.ndarray
    depths: np.ndarray          # per-point depth at which the value was frozen
    converged: np.ndarray       # per-point heuristic convergence flag
    depth: int                  # maximum depth used
    tol: float
    zero_floor: float
    a: float

    def __post_init__(self):
        if np.any(self.values < 0) or np.any(self.values > self.a * (1 + 1e-12)):
            raise InvalidParameter("graph values must lie in [0, a]")

    @property
    def fraction_zero(self) -> float:
        return float(np.mean(self.values == 0.0))

    @property
    def fraction_below_floor(self) -> float:
        """Mass of the grid at or below the zero floor, zeros included."""
        return float(np.mean(self.values <= self.zero_floor))


def pullback_value(sys: DrivenSystem, theta: float, n: int) -> float:
    """Depth-n pullback at a single point, computed by the definition."""
    if n < 0:
        raise InvalidParameter("depth must be nonnegative")
    orbit = [float(theta)]
    t = float(theta)
    for _ in range(n):
        t = float(sys.base.apply(t)[0])
        orbit.append(t)
    y = sys.fiber.a
    h = sys.fiber.h_scalar
    g = sys.mult.scalar
    for k in range(n, 0, -1):
        y = g(orbit[k]) * h(y)
    return y


def _eval_chunk_fixed(sys, thetas, n):
    """phi_n on an array of points, one fixed depth, no early stopping."""
    orb = sys.base.orbit(thetas, n)
    y = np.full(thetas.shape, sys.fiber.a)
    h = sys.fiber.h
    for k in range(n, 0, -1):
        y = sys.mult(orb[k]) * h(y)
    return y


def pullback_values_fixed(sys: DrivenSystem, thetas, n: int,
                          chunk: int = 65536, threads: int = 1) -> np.ndarray:
    """Vectorised phi_n over an array of points."""
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty(thetas.shape)
    spans = [(i, min(i + chunk, thetas.size)) for i in range(0, thetas.size, chunk)]

    def work(span):
        i, j = span
        out[i:j] = _eval_chunk_fixed(sys, thetas[i:j], n)

    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(work, spans))
    else:
        for span in spans:
            work(span)
    return out


def _eval_chunk_adaptive(sys, thetas, n_max, tol, zero_floor, gap):
    m = thetas.size
    a = sys.fiber.a
    h = sys.fiber.h
    orb = sys.base.orbit(thetas, n_max)
    logg = np.empty((n_max + 1, m))
    logg[0] = 0.0
    for k in range(1, n_max + 1):
        logg[k] = np.log(sys.mult(orb[k]))
    pref = np.cumsum(logg, axis=0)          # pref[k] = log of the k-step product
    runmin = np.minimum.accumulate(pref, axis=0)

    values = np.empty(m)
    depths = np.zeros(m, dtype=np.int64)
    conv = np.zeros(m, dtype=bool)
    log_floor = math.log(zero_floor) - math.log(a) if zero_floor > 0 else -np.inf

    # phi_n <= a * min_{k<=n} g_k, so the product bound certifies zeros early
    zero_at = np.argmax(runmin < log_floor, axis=0)
    is_zero = runmin[n_max] < log_floor
    zero_at = np.where(is_zero, zero_at, n_max + 1)
    values[is_zero] = 0.0
    depths[is_zero] = zero_at[is_zero]
    conv[is_zero] = True
    del pref, runmin

    active = np.flatnonzero(~is_zero)
    checkpoints = list(range(gap, n_max + 1, gap))
    if not checkpoints or checkpoints[-1] != n_max:
        checkpoints.append(n_max)
    prev = None
    prev_cp = None
    for cp in checkpoints:
        if active.size == 0:
            break
        y = np.full(active.size, a)
        for k in range(cp, 0, -1):
            y = np.exp(logg[k][active]) * h(y)
        if prev is not None:
            if np.any(y > prev * (1 + 1e-9) + 1e-300):
                raise GraphscaleError(
                    "pullback increased between depths "
                    f"{prev_cp} and {cp}; system violates monotonicity")
            done = np.abs(y - prev) <= tol * np.maximum(np.abs(y), 1e-300)
            below = y < zero_floor
            freeze = done | below
            idx = active[freeze]
            values[idx] = np.where(below[freeze], 0.0, y[freeze])
            depths[idx] = cp
            conv[idx] = True
            active = active[~freeze]
            y = y[~freeze]
        prev = y
        prev_cp = cp
    if active.size:
        values[active] = prev
        depths[active] = n_max
        conv[active] = False
    return values, depths, conv


def compute_graph(sys: DrivenSystem, grid_size: int, n_max: int = 60,
                  tol: float = 1e-10, zero_floor: float = 1e-14,
                  grid=None, chunk: int = 65536, threads: int = 1,
                  checkpoint_gap: int = 5) -> GraphSample:
    """Evaluate the invariant graph on a uniform grid of [0,1).

    Each point is deepened in checkpoints of `checkpoint_gap` until the
    value either stabilises to relative tolerance `tol`, drops below
    `zero_floor` (recorded as exactly 0), or reaches `n_max`.
    """
    if grid is None:
        if grid_size < 1:
            raise InvalidParameter("grid_size must be positive")
        grid = np.arange(grid_size, dtype=np.float64) / grid_size
    else:
        grid = np.asarray(grid, dtype=float)
    values = np.empty(grid.shape)
    depths = np.empty(grid.shape, dtype=np.int64)
    conv = np.empty(grid.shape, dtype=bool)
    spans = [(i, min(i + chunk, grid.size)) for i in range(0, grid.size, chunk)]

    def work(span):
        i, j = span
        v, d, c = _eval_chunk_adaptive(sys, grid[i:j], n_max, tol, zero_floor,
                                       checkpoint_gap)
        values[i:j], depths[i:j], conv[i:j] = v, d, c

    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(work, spans))
    else:
        for span in spans:
            work(span)
    return GraphSample(grid=grid, values=values, depths=depths, converged=conv,
                       depth=n_max, tol=tol, zero_floor=zero_floor, a=sys.fiber.a)


# ---------------------------------------------------------------------------
# two-sided pullback over a hyperbolic driver


def twosided_pullback(driver: HyperbolicDriver, g_hat, fiber: FiberMap,
                      state, n: int) -> float:
    """Depth-n pullback along the backward orbit of an invertible driver state."""
    us, ths = driver.backward_orbit((float(state[0]), float(state[1])), n)
    y = fiber.a
    for k in range(n, 0, -1):
        y = float(g_hat(us[k], ths[k])) * fiber.h_scalar(y)
    return y


def twosided_pullback_batch(driver, g_hat, fiber, states, n: int) -> np.ndarray:
    us, ths = driver.backward_orbit(states, n)
    y = np.full(np.shape(states[0]), float(fiber.a))
    for k in range(n, 0, -1):
        y = np.asarray(g_hat(us[k], ths[k])) * fiber.h(y)
    return y


@dataclass(frozen=True)
class ReducedMultiplier:
    """Factor multiplier equivalent to a driven one up to a coboundary.

    g is the reduced weight on the factor circle, b_hat the (truncated)
    transfer function on driver states, with sup bound and the geometric
    tail estimate for the truncation at `depth` terms.
    """

    g: Multiplier
    b_hat: object
    b_hat_sup: float
    depth: int
    truncation_bound: float


def reduce_multiplier(driver: HyperbolicDriver, g_hat, depth: int,
                      holder=None) -> ReducedMultiplier:
    """Collapse a fibre-dependent multiplier onto the factor circle.

    The reduced weight at v accumulates the differences of log g_hat along
    the backward orbits of section(v) and section(S v); `holder` is the
    (exponent, constant) modulus of log g_hat along stable fibres.
    """
    holder = holder or driver.g_hat_holder
    if holder is None:
        raise NonHolder("need Hoelder data (exponent, constant) for log g_hat")
    alpha, lip = float(holder[0]), float(holder[1])
    if not (0 < alpha <= 1) or lip < 0:
        raise NonHolder("Hoelder exponent must lie in (0,1], constant be >= 0")
    r = driver.contraction_rate
    C = driver.contraction_const
    ra = r ** alpha
    trunc = lip * C ** alpha * ra ** depth / (1.0 - ra)
    sup_bound = lip * C ** alpha / (1.0 - ra)

    def log_g(v):
        v = np.asarray(v, dtype=float)
        usA, thsA = driver.backward_orbit(driver.section(v), depth)
        sv = driver.factor.step(v)
        usB, thsB = driver.backward_orbit(driver.section(sv), max(depth - 1, 0))
        total = np.log(np.asarray(g_hat(usA[0], thsA[0])))
        for k in range(1, depth + 1):
            total = total + (np.log(np.asarray(g_hat(usA[k], thsA[k])))
                             - np.log(np.asarray(g_hat(usB[k - 1], thsB[k - 1]))))
        return total

    def b_hat(state):
        u, th = np.asarray(state[0], dtype=float), np.asarray(state[1], dtype=float)
        usA, thsA = driver.backward_orbit((u, th), depth)
        usB, thsB = driver.backward_orbit(driver.section(driver.project((u, th))), depth)
        total = np.zeros(np.shape(u))
        for k in range(depth + 1):
            total = total + (np.log(np.asarray(g_hat(usA[k], thsA[k])))
                             - np.log(np.asarray(g_hat(usB[k], thsB[k]))))
        return total

    g = Multiplier.from_function(lambda v: np.exp(log_g(v)), label="reduced")
    return ReducedMultiplier(g=g, b_hat=b_hat, b_hat_sup=sup_bound,
                             depth=depth, truncation_bound=trunc)
