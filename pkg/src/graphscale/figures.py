"""Static PNG renderings of the pipeline reports."""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def graph_figure(sample, path, max_points: int = 20000):
    fig, ax = plt.subplots(figsize=(7.2, 3.6))
    step = max(sample.grid.size // max_points, 1)
    ax.plot(sample.grid[::step], sample.values[::step], ",", color="#1f4e79",
            markersize=1)
    ax.set_xlabel("theta")
    ax.set_ylabel("phi(theta)")
    ax.set_title(f"invariant graph, depth <= {sample.depth}")
    _finish(fig, path)


def pressure_figure(curve, path):
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    ax.axhline(0.0, color="0.75", lw=0.8)
    ax.plot(curve.s_values, curve.psi_values, "-o", ms=3, color="#1f4e79")
    ax.plot([curve.s_star], [0.0], "x", ms=9, color="#c0392b")
    ax.annotate(f"s* = {curve.s_star:.6f}", (curve.s_star, 0.0),
                textcoords="offset points", xytext=(6, 8))
    ax.set_xlabel("s")
    ax.set_ylabel("psi(s)")
    ax.set_title("pressure")
    _finish(fig, path)


def _fit_overlay(ax, eps, slope, intercept, label):
    xs = np.array([eps.min(), eps.max()])
    ax.plot(xs, np.exp(intercept) * xs ** slope, "--", color="#c0392b",
            label=label)


def tail_figure(report, path):
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    pos = report.mass > 0
    ax.loglog(report.eps[pos], report.mass[pos], "o", ms=3, color="#1f4e79")
    _fit_overlay(ax, report.eps[pos], report.slope, report.intercept,
                 f"slope {report.slope:.4f}")
    if report.predicted is not None:
        ax.loglog([], [], " ", label=f"predicted {report.predicted:.4f}")
    ax.set_xlabel("eps")
    ax.set_ylabel("m{phi < eps}")
    ax.legend(frameon=False, fontsize=8)
    ax.set_title("tail mass")
    _finish(fig, path)


def xi_figure(report, path):
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    ax.loglog(report.eps, report.xi, "o", ms=3, color="#1f4e79", label="Xi")
    pos = report.one_minus_xi > 0
    ax.loglog(report.eps[pos], report.one_minus_xi[pos], "s", ms=3,
              color="#7a9a3f",
              label=f"1 - Xi (slope {report.slope_one_minus:.4f})")
    if report.predicted is not None:
        ax.loglog([], [], " ", label=f"predicted {report.predicted:.4f}")
    ax.set_xlabel("eps")
    ax.set_ylabel("value")
    ax.legend(frameon=False, fontsize=8)
    ax.set_title("integrated observable")
    _finish(fig, path)


def index_figure(report, path):
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    key = "one_minus_sigma" if report.regime == "plus" else "sigma"
    eps = np.array([r.eps for r in report.rungs])
    ys = np.array([getattr(r, key) for r in report.rungs])
    used = np.array([r.used for r in report.rungs])
    pos = ys > 0
    ax.loglog(eps[pos & ~used], ys[pos & ~used], "o", ms=4, mfc="none",
              color="0.6", label="excluded")
    ax.loglog(eps[used], ys[used], "o", ms=4, color="#1f4e79", label="fit")
    if np.any(used):
        _fit_overlay(ax, eps[used], report.empirical, report.intercept,
                     f"slope {report.empirical:.4f}")
    ax.loglog([], [], " ", label=f"predicted {report.predicted:.4f}")
    ax.set_xlabel("eps_k")
    ax.set_ylabel("1 - sigma" if report.regime == "plus" else "sigma")
    ax.legend(frameon=False, fontsize=8)
    ax.set_title(f"local index at theta = {report.theta:g} ({report.regime})")
    _finish(fig, path)


def check_figure(suite, path):
    fig, ax = plt.subplots(figsize=(7.2, 3.6))
    tags = sorted(suite.worst_margins)
    vals = [suite.worst_margins[t] for t in tags]
    ax.bar(range(len(tags)), vals, color="#1f4e79")
    ax.axhline(0.0, color="#c0392b", lw=0.8)
    ax.set_xticks(range(len(tags)))
    ax.set_xticklabels(tags, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel("worst margin")
    ax.set_title(f"distortion margins ({suite.n_checks} checks, "
                 f"{suite.failures} failures)")
    _finish(fig, path)
