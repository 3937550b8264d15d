"""Independent slow reference implementations used as test oracles.

These stay deliberately separate from the package code paths: dense direct
quadrature for the singular operator, exhaustive pair enumeration for clean
intervals, and a plain double-midpoint sum for the Gagliardo forms.
"""

from __future__ import annotations

import math
from typing import Callable, List, Sequence, Tuple

import numpy as np


def dense_nonlocal(f: Callable[[np.ndarray], np.ndarray], x0: float,
                   s: float, c: float, left_limit: float, right_limit: float,
                   dt: float, T_fine: float = 50.0, T_mid: float = 5e4) -> float:
    """P.V. integral (f(x0) - f(y)) K(x0 - y) dy by paired dense quadrature.

    Pairs t and -t to kill the odd singularity, integrates [0, T_fine] with a
    fine midpoint rule at step dt, [T_fine, T_mid] with log-spaced midpoint
    cells, and closes the tails with the analytic kernel moment against the
    function limits.
    """
    f0 = float(f(np.array([x0]))[0])
    t = np.arange(dt / 2, T_fine, dt)
    g = 2 * f0 - f(x0 + t) - f(x0 - t)
    val = float(np.sum(g * c * t ** (-1 - 2 * s)) * dt)
    edges = np.geomspace(T_fine, T_mid, 4001)
    mids = 0.5 * (edges[1:] + edges[:-1])
    widths = np.diff(edges)
    g2 = 2 * f0 - f(x0 + mids) - f(x0 - mids)
    val += float(np.sum(g2 * c * mids ** (-1 - 2 * s) * widths))
    tail_mass = c * T_mid ** (-2 * s) / (2 * s)
    val += (2 * f0 - left_limit - right_limit) * tail_mass
    return val


def dense_seminorm_sq(f: Callable[[np.ndarray], np.ndarray],
                      X: Tuple[float, float], Y: Tuple[float, float],
                      s: float, c: float, h: float) -> float:
    """Direct double midpoint sum of |f(x)-f(y)|^2 K(x-y) over X x Y."""
    xm = np.arange(X[0] + h / 2, X[1], h)
    ym = np.arange(Y[0] + h / 2, Y[1], h)
    fx = f(xm)[:, None]
    fy = f(ym)[None, :]
    d = xm[:, None] - ym[None, :]
    with np.errstate(divide="ignore"):
        K = c * np.abs(d) ** (-1 - 2 * s)
    K[np.abs(d) < h / 2] = 0.0  # skip the singular diagonal band
    return float(np.sum((fx - fy) ** 2 * K) * h * h)


def brute_clean_intervals(x: np.ndarray, values: np.ndarray, rho: float,
                          wells: Sequence[float]) -> List[Tuple[float, float, float]]:
    """Exhaustive clean-interval search: every index pair is tested and
    non-maximal intervals are filtered.  Returns (lo, hi, well), sorted."""
    need = abs(math.log(rho)) - 1e-12
    n = x.size
    cand = []
    for z in wells:
        dev = np.abs(values - z)
        for i in range(n):
            run = np.maximum.accumulate(dev[i:])
            ok = np.where(run <= rho)[0]
            if ok.size == 0:
                continue
            jmax = i + ok[-1]
            # all ends i..jmax are clean for this well; only the longest can
            # be maximal among intervals starting at i
            if x[jmax] - x[i] >= need:
                cand.append((float(x[i]), float(x[jmax]), float(z),
                             float(dev[i:jmax + 1].max())))
    # maximality filter across all wells
    out = []
    for lo, hi, z, sd in cand:
        contained = any(l2 <= lo and hi <= h2 and (l2, h2) != (lo, hi)
                        for l2, h2, _, _ in cand)
        if not contained:
            out.append((lo, hi, z, sd))
    # dedupe identical spans, keep closer well
    best = {}
    for lo, hi, z, sd in out:
        key = (lo, hi)
        if key not in best or sd < best[key][3]:
            best[key] = (lo, hi, z, sd)
    return sorted(best.values())


def trapz(y: np.ndarray, h: float) -> float:
    return float(np.trapezoid(y, dx=h)) if hasattr(np, "trapezoid") \
        else float(np.trapz(y, dx=h))
