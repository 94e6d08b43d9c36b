"""Batched adaptive Gauss-Legendre quadrature on [0, 1].

Integrands map a node array (M,) to values (M, ...) so a whole batch of
line integrals shares one set of nodes.  Accuracy is certified by doubling
the panel count until successive composite values agree to tolerance.
"""
from __future__ import annotations

import numpy as np

from .errors import QuadratureFailure

_NODE_CACHE = {}


def _panel_rule(order, panels):
    key = (order, panels)
    if key not in _NODE_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        width = 1.0 / panels
        starts = np.arange(panels) * width
        nodes = (starts[:, None] + 0.5 * width * (x[None, :] + 1.0)).ravel()
        weights = np.tile(0.5 * width * w, panels)
        _NODE_CACHE[key] = (nodes, weights)
    return _NODE_CACHE[key]


def composite_gl(f, order=16, panels=2):
    nodes, weights = _panel_rule(order, panels)
    vals = f(nodes)
    return np.tensordot(weights, vals, axes=(0, 0))


def adaptive_segments(f, count, tol=1e-7, order=16, max_depth=30, max_panels=1 << 20):
    """Locally adaptive GL over [0, 1] for `count` independent integrands.

    f(ss, idx) evaluates integrand idx[k] at parameter ss[k] (flat arrays of
    equal length) and returns the flat value array.  Each panel is accepted
    when the whole-panel rule agrees with its two halves to tol * width, so
    the per-integrand error sums to at most tol; otherwise it is bisected.
    Returns (values, error_estimates), both of shape (count,).
    """
    x, w = np.polynomial.legendre.leggauss(order)
    u = 0.5 * (x + 1.0)
    uw = 0.5 * w
    total = np.zeros(count)
    err_tot = np.zeros(count)
    idx = np.arange(count)
    a = np.zeros(count)
    b = np.ones(count)
    for _ in range(max_depth + 1):
        if len(idx) == 0:
            return total, err_tot
        width = b - a
        mid = a + 0.5 * width
        ii = np.repeat(idx, order)
        fw = f((a[:, None] + width[:, None] * u).ravel(), ii).reshape(-1, order)
        fl = f((a[:, None] + 0.5 * width[:, None] * u).ravel(), ii).reshape(-1, order)
        fr = f((mid[:, None] + 0.5 * width[:, None] * u).ravel(), ii).reshape(-1, order)
        whole = width * (fw @ uw)
        halves = 0.5 * width * ((fl + fr) @ uw)
        err = np.abs(whole - halves)
        # the two-rule defect can understate the true error in stiff spots,
        # so accept panels only well inside the budget
        ok = err <= 0.1 * tol * width
        np.add.at(total, idx[ok], halves[ok])
        np.add.at(err_tot, idx[ok], err[ok])
        bad = ~ok
        if 2 * int(bad.sum()) > max_panels:
            raise QuadratureFailure(
                f"panel budget {max_panels} exhausted at tol={tol}"
            )
        idx = np.concatenate([idx[bad], idx[bad]])
        a = np.concatenate([a[bad], mid[bad]])
        b = np.concatenate([mid[bad], b[bad]])
    raise QuadratureFailure(
        f"bisection depth {max_depth} exhausted at tol={tol} "
        f"({len(idx)} panels left, worst defect {float(np.max(err)):.3e})"
    )


def adaptive_gl(f, tol=1e-7, order=16, max_doublings=8):
    """Integrate f over [0, 1], doubling panels until convergence.

    Returns (value, error_estimate).  The error estimate is the difference
    between the last two panel levels (per batch entry, maximum taken for
    the convergence decision).
    """
    prev = composite_gl(f, order=order, panels=1)
    panels = 2
    for _ in range(max_doublings):
        cur = composite_gl(f, order=order, panels=panels)
        err = np.max(np.abs(cur - prev))
        if err < tol:
            return cur, err
        prev = cur
        panels *= 2
    raise QuadratureFailure(
        f"quadrature did not reach tol={tol} (last defect {err:.3e})"
    )
