"""Certified checks of the bounds behind the graph construction.

Three families: two-sided distortion control of fibre derivatives along
backward orbits, the resulting pointwise lower bound on the pullback,
and the conjugacy between one-sided and two-sided pullbacks when the
drive is the factor of an invertible hyperbolic map.  All margins are
reported so that nonnegative means the bound held.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter
from .graph import (ReducedMultiplier, pullback_value, pullback_values_fixed,
                    twosided_pullback_batch)
from .maps import DrivenSystem, FiberMap, HyperbolicDriver

_TINY = 1e-300


@dataclass(frozen=True)
class AlphaSchedule:
    """Geometric slack sequence alpha_i = exp(-i delta) with its sums.

    A(n) = sum of the first n alphas; C(n) = exp(a_h A(n)) / c_h is the
    distortion constant the fibre data admits at that slack.
    """

    delta: float
    a_h: float
    c_h: float

    @staticmethod
    def for_fiber(delta: float, fiber: FiberMap) -> "AlphaSchedule":
        if delta <= 0:
            raise InvalidParameter("delta must be positive")
        return AlphaSchedule(delta=float(delta), a_h=fiber.a_h, c_h=fiber.c_h)

    def alpha(self, i):
        return np.exp(-self.delta * np.asarray(i, dtype=float))

    def A(self, n: int) -> float:
        e = math.exp(-self.delta)
        return e * (1.0 - e ** n) / (1.0 - e)

    @property
    def A_inf(self) -> float:
        return 1.0 / math.expm1(self.delta)

    def C(self, n: int) -> float:
        return math.exp(self.a_h * self.A(n)) / self.c_h

    @property
    def C_inf(self) -> float:
        return math.exp(self.a_h * self.A_inf) / self.c_h


@dataclass
class DistortionReport:
    """Outcome of one margin check; nonnegative margins mean success."""

    kind: str
    theta: float
    depth: int
    x0: float
    margins: dict
    passed: bool
    precondition: bool | None = None
    witness: int | None = None


_MARGIN_TOL = -1e-12


def check_branch_distortion(sys: DrivenSystem, theta: float, n: int,
                            schedule: AlphaSchedule, x=None) -> DistortionReport:
    """Two-sided control of the fibre derivative along a depth-n branch.

    With backward values x_{-i} seeded at x, the product of h'(x_{-i})
    lies in [exp(-a_h sum x_{-i}), 1].  When x_0 clears the alpha_i
    threshold for every i, the sum itself is bounded through the inverse
    multiplier products by A(n).
    """
    if n < 1:
        raise InvalidParameter("depth must be at least 1")
    x = sys.fiber.a if x is None else float(x)
    if not 0 < x <= sys.fiber.a * (1 + 1e-12):
        raise InvalidParameter("seed x must lie in (0, a]")
    orb = sys.base.orbit(np.array([theta]), n)[:, 0]
    xv = np.empty(n + 1)
    xv[n] = x
    for i in range(n - 1, -1, -1):
        xv[i] = sys.mult.scalar(orb[i + 1]) * sys.fiber.h_scalar(xv[i + 1])
    lg = np.concatenate([[0.0], np.cumsum(sys.mult.log(orb[1:]))])

    sum_x = float(np.sum(xv[1:]))
    log_ratio = float(np.sum(np.log(sys.fiber.h_deriv(xv[1:]))))
    m_upper = -log_ratio
    m_lower = log_ratio + schedule.a_h * sum_x

    c_n = schedule.C(n)
    idx = np.arange(1, n + 1)
    thresh = -math.log(c_n) - schedule.delta * idx + lg[1:]
    m_pre = float(np.min(thresh)) - math.log(max(xv[0], _TINY))
    pre_ok = m_pre >= 0
    margins = {"upper": m_upper, "lower": m_lower, "precondition": m_pre}
    passed = m_upper >= _MARGIN_TOL and m_lower >= _MARGIN_TOL
    if pre_ok:
        s_inv = float(np.sum(np.exp(-lg[1:])))
        bound_mid = c_n * xv[0] * s_inv
        margins["summability_sum"] = bound_mid - sum_x
        margins["summability_A"] = schedule.A(n) - bound_mid
        passed = (passed and margins["summability_sum"] >= _MARGIN_TOL
                  and margins["summability_A"] >= _MARGIN_TOL)
    return DistortionReport(kind="branch-distortion", theta=float(theta),
                            depth=n, x0=float(xv[0]), margins=margins,
                            passed=passed, precondition=pre_ok)


def check_graph_lower_bound(sys: DrivenSystem, theta: float, n: int,
                            schedule: AlphaSchedule) -> DistortionReport:
    """phi_n must exceed alpha_i g_i / C_inf for at least one i <= n."""
    if n < 1:
        raise InvalidParameter("depth must be at least 1")
    phi = pullback_value(sys, theta, n)
    orb = sys.base.orbit(np.array([theta]), n)[:, 0]
    lg = np.cumsum(sys.mult.log(orb[1:]))
    idx = np.arange(1, n + 1)
    bounds = -math.log(schedule.C_inf) - schedule.delta * idx + lg
    i_star = int(np.argmin(bounds))
    margin = math.log(max(phi, _TINY)) - float(bounds[i_star])
    return DistortionReport(kind="graph-lower-bound", theta=float(theta),
                            depth=n, x0=phi,
                            margins={"lower": margin},
                            passed=margin >= _MARGIN_TOL,
                            witness=i_star + 1)


@dataclass
class SuiteReport:
    """Aggregated distortion margins over random points and depths."""

    n_points: int
    depths: tuple
    delta: float
    n_checks: int
    failures: int
    worst_margins: dict
    failed: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0


def distortion_suite(sys: DrivenSystem, n_points: int = 1000,
                     depths=(10, 30, 60), delta: float = 0.1,
                     seed: int = 0, include_lower: bool = True,
                     xs=(None,)) -> SuiteReport:
    """Run both distortion checks over random base points.

    xs gives the seed values for the branch check; None means the fibre
    ceiling a.  The lower-bound check does not depend on the seed and
    runs once per (theta, depth).
    """
    rng = np.random.default_rng(seed)
    thetas = rng.random(n_points)
    schedule = AlphaSchedule.for_fiber(delta, sys.fiber)
    worst: dict = {}
    failed = []
    n_checks = 0
    failures = 0
    for n in depths:
        for theta in thetas:
            reports = [check_branch_distortion(sys, theta, n, schedule, x=x)
                       for x in xs]
            if include_lower:
                reports.append(check_graph_lower_bound(sys, theta, n, schedule))
            for rep in reports:
                n_checks += 1
                for key, val in rep.margins.items():
                    tag = f"{rep.kind}:{key}"
                    if tag not in worst or val < worst[tag]:
                        worst[tag] = val
                if not rep.passed:
                    failures += 1
                    if len(failed) < 20:
                        failed.append(rep)
    return SuiteReport(n_points=n_points, depths=tuple(depths), delta=delta,
                       n_checks=n_checks, failures=failures,
                       worst_margins=worst, failed=failed)


@dataclass
class ConjugacyReport:
    """Gap between one-sided and two-sided pullbacks over a driver."""

    n_samples: int
    depth: int
    floor: float
    bound: float
    max_gap: float
    violations: int
    positive_pairs: int
    positivity_mismatches: int
    residual_max: float
    residual_bound: float
    b_hat_sup: float
    truncation_bound: float

    @property
    def passed(self) -> bool:
        return (self.violations == 0 and self.positivity_mismatches == 0
                and self.residual_max <= self.residual_bound)


def check_conjugacy_bound(driver: HyperbolicDriver, g_hat, fiber: FiberMap,
                          reduced: ReducedMultiplier, n_samples: int = 1000,
                          depth: int = 40, floor: float = 1e-14,
                          seed: int = 0) -> ConjugacyReport:
    """Compare pullbacks under g_hat and under its reduced factor weight.

    On the log scale the two depth-n pullbacks differ by at most
    log(a / h(a)) + 2 sup|b_hat|; sample states uniformly, check the gap
    wherever both values clear the floor, check that positivity itself
    corresponds up to the same factor, and check the coboundary identity
    log g_hat = log g . project + b_hat - b_hat . inverse within the
    truncation tail (three truncated series, hence 3x the tail bound).
    """
    rng = np.random.default_rng(seed)
    us = rng.random(n_samples)
    ths = rng.random(n_samples)

    phi_hat = twosided_pullback_batch(driver, g_hat, fiber, (us, ths), depth)
    sys_red = DrivenSystem(base=driver.factor, mult=reduced.g, fiber=fiber,
                           label="reduced")
    phi = pullback_values_fixed(sys_red, ths, depth)

    bound = math.log(fiber.a / fiber.h_scalar(fiber.a)) + 2.0 * reduced.b_hat_sup
    slack = 2.0 * reduced.truncation_bound * depth + 1e-9
    both = (phi_hat > floor) & (phi > floor)
    gaps = np.abs(np.log(phi_hat[both]) - np.log(phi[both]))
    max_gap = float(gaps.max()) if gaps.size else 0.0
    violations = int(np.count_nonzero(gaps > bound + slack))
    lift = math.exp(bound + slack)
    mismatches = int(np.count_nonzero((phi_hat <= floor) & (phi > floor * lift))
                     + np.count_nonzero((phi <= floor) & (phi_hat > floor * lift)))

    b_here = reduced.b_hat((us, ths))
    inv_states = driver.inverse((us, ths))
    b_back = reduced.b_hat(inv_states)
    resid = np.abs(np.log(np.asarray(g_hat(us, ths)))
                   - reduced.g.log(ths) - b_here + b_back)
    residual_bound = 3.0 * reduced.truncation_bound + 1e-12
    return ConjugacyReport(n_samples=n_samples, depth=depth, floor=floor,
                           bound=bound, max_gap=max_gap, violations=violations,
                           positive_pairs=int(np.count_nonzero(both)),
                           positivity_mismatches=mismatches,
                           residual_max=float(resid.max()),
                           residual_bound=residual_bound,
                           b_hat_sup=reduced.b_hat_sup,
                           truncation_bound=reduced.truncation_bound)
