"""Winding numbers of point pairs along an isotopy, and tangent extensions.

Angles are tracked with a two-argument arctangent and branch continuation
against the previous sample.  Every computation carries a no-aliasing
certificate: consecutive unwrapped samples must differ by less than pi/2,
enforced by doubling the time grid (up to a refinement cap).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoints, RefinementExhausted, SingularJacobian
from .geometry import TWOPI, as_xy, wrap_to_pi

ALIAS_BOUND = 0.5 * math.pi
MERGE_EPS = 1e-9
INIT_STEPS = 64
MAX_REFINEMENTS = 24
_TINY = 1e-13


@dataclass(frozen=True)
class AngleLedger:
    """Unwrapped-angle trajectory theta(t) with its certification record."""

    times: np.ndarray
    angles: np.ndarray
    refinements: int

    def __post_init__(self):
        if self.times[0] != 0.0 or self.times[-1] != 1.0:
            raise ValueError("ledger must span [0, 1]")
        if np.any(np.abs(np.diff(self.angles)) >= ALIAS_BOUND):
            raise ValueError("no-aliasing certificate violated")

    @property
    def winding(self):
        return (self.angles[-1] - self.angles[0]) / TWOPI


@dataclass(frozen=True)
class TangentPair:
    """A base point together with a unit tangent direction."""

    base: object
    direction: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if abs(np.hypot(d[0], d[1]) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")


def _track(vec_at, steps, t0=0.0, t1=1.0):
    """Unwrap the angle of vec_at(t) over a uniform grid.

    vec_at(t) -> (..., 2).  Returns (times, angles (steps+1, ...), ok) where
    ok flags the entries whose every step satisfied the aliasing bound.
    """
    times = np.linspace(t0, t1, steps + 1)
    v0 = vec_at(times[0])
    ang = np.empty((steps + 1,) + v0.shape[:-1])
    nrm = np.hypot(v0[..., 0], v0[..., 1])
    if np.any(nrm < _TINY):
        raise CoincidentPoints("zero separation vector at t=%g" % times[0])
    ang[0] = np.arctan2(v0[..., 1], v0[..., 0])
    ok = np.ones(v0.shape[:-1], dtype=bool)
    for k in range(1, steps + 1):
        v = vec_at(times[k])
        nrm = np.hypot(v[..., 0], v[..., 1])
        if np.any(nrm < _TINY):
            raise CoincidentPoints("zero separation vector at t=%g" % times[k])
        raw = np.arctan2(v[..., 1], v[..., 0])
        delta = wrap_to_pi(raw - ang[k - 1])
        ok &= np.abs(delta) < ALIAS_BOUND
        ang[k] = ang[k - 1] + delta
    return times, ang, ok


def _certified_track(vec_at, init_steps=INIT_STEPS, max_refinements=MAX_REFINEMENTS):
    steps = init_steps
    for refinement in range(max_refinements + 1):
        times, ang, ok = _track(vec_at, steps)
        if np.all(ok):
            return times, ang, refinement
        steps *= 2
    raise RefinementExhausted(
        f"no-aliasing bound not certified after {max_refinements} doublings"
    )


def _sep_angle(iso, t, X, Y):
    """Angle of the separation vector f_t(Y) - f_t(X); t scalar or (N,)."""
    n = len(X)
    q = iso.eval(np.concatenate([t, t]) if np.ndim(t) else t, np.concatenate([X, Y]))
    v = q[n:] - q[:n]
    if np.hypot(v[:, 0], v[:, 1]).min() < _TINY:
        raise CoincidentPoints("zero separation vector along the track")
    return np.arctan2(v[:, 1], v[:, 0])

def pair_windings(
    iso,
    X,
    Y,
    merge_eps=MERGE_EPS,
    init_steps=INIT_STEPS,
    max_refinements=MAX_REFINEMENTS,
):
    """Windings of paired point arrays X[i] with Y[i] under the isotopy.

    Steps of the uniform time grid that fail the aliasing certificate are
    bisected per pair until every sub-step passes, so a few fast-swinging
    pairs do not force the whole batch onto a finer grid.
    """
    X = as_xy(X)
    Y = as_xy(Y)
    shape = np.broadcast_shapes(X.shape, Y.shape)
    X = np.ascontiguousarray(np.broadcast_to(X, shape), dtype=float).reshape(-1, 2)
    Y = np.ascontiguousarray(np.broadcast_to(Y, shape), dtype=float).reshape(-1, 2)
    if np.hypot(*(Y - X).T).min() <= merge_eps:
        raise CoincidentPoints(f"pair separation <= merge_eps={merge_eps}")

    n = len(X)
    times = np.linspace(0.0, 1.0, init_steps + 1)
    total = np.zeros(n)
    prev = _sep_angle(iso, 0.0, X, Y)
    pend = []
    for t0_, t1_ in zip(times[:-1], times[1:]):
        raw = _sep_angle(iso, t1_, X, Y)
        d = wrap_to_pi(raw - prev)
        bad = np.abs(d) >= ALIAS_BOUND
        total += np.where(bad, 0.0, d)
        if bad.any():
            ii = np.nonzero(bad)[0]
            pend.append((ii, np.full(len(ii), t0_), np.full(len(ii), t1_),
                         prev[ii], raw[ii]))
        prev = raw

    if pend:
        idx = np.concatenate([p[0] for p in pend])
        t0 = np.concatenate([p[1] for p in pend])
        t1 = np.concatenate([p[2] for p in pend])
        a0 = np.concatenate([p[3] for p in pend])
        a1 = np.concatenate([p[4] for p in pend])
        for _ in range(max_refinements):
            tm = 0.5 * (t0 + t1)
            am = _sep_angle(iso, tm, X[idx], Y[idx])
            d1 = wrap_to_pi(am - a0)
            d2 = wrap_to_pi(a1 - am)
            ok1 = np.abs(d1) < ALIAS_BOUND
            ok2 = np.abs(d2) < ALIAS_BOUND
            np.add.at(total, idx[ok1], d1[ok1])
            np.add.at(total, idx[ok2], d2[ok2])
            b1, b2 = ~ok1, ~ok2
            idx = np.concatenate([idx[b1], idx[b2]])
            if len(idx) == 0:
                break
            t0 = np.concatenate([t0[b1], tm[b2]])
            t1 = np.concatenate([tm[b1], t1[b2]])
            a0 = np.concatenate([a0[b1], am[b2]])
            a1 = np.concatenate([am[b1], a1[b2]])
        else:
            raise RefinementExhausted(
                f"no-aliasing bound not certified after {max_refinements} bisections"
            )
    return total.reshape(shape[:-1]) / TWOPI


def winding(iso, x, y, merge_eps=MERGE_EPS, with_ledger=False):
    """Winding number of the vector from f_t(x) to f_t(y), in turns.

    Symmetric in its arguments exactly: the connecting vector and its
    negation wind identically, and the value is computed once.
    """
    X = as_xy(x)
    Y = as_xy(y)
    if np.hypot(*(Y - X)) <= merge_eps:
        raise CoincidentPoints(f"|x - y| <= merge_eps={merge_eps}")

    def vec_at(t):
        return iso.eval(t, Y) - iso.eval(t, X)

    times, ang, refinements = _certified_track(vec_at)
    ledger = AngleLedger(times=times, angles=ang, refinements=refinements)
    return (ledger, ledger.winding) if with_ledger else ledger.winding


def winding_tangent(iso, base, direction=None):
    """Winding of t -> jac(t, base) . xi, the blow-up value on the diagonal."""
    if isinstance(base, TangentPair):
        direction = base.direction
        base = base.base
    b = as_xy(base)
    xi = np.asarray(direction, dtype=float)

    def vec_at(t):
        J = iso.jac(t, b)
        v = J @ xi
        if np.hypot(v[..., 0], v[..., 1]).min() < 1e-14:
            raise SingularJacobian("jacobian image too small to normalize")
        return v

    _, ang, _ = _certified_track(vec_at)
    return (ang[-1] - ang[0]) / TWOPI


def winding_iterate(iso, x, y, n, merge_eps=MERGE_EPS):
    """Winding of the pair under the n-fold concatenated isotopy.

    The unwrapped angle is continued across iterate boundaries, so the
    value telescopes exactly over the per-iterate windings.
    """
    X = as_xy(x)
    Y = as_xy(y)
    total = 0.0
    for _ in range(n):
        total += pair_windings(iso, X, Y, merge_eps=merge_eps)
        X = iso.map(X)
        Y = iso.map(Y)
    return total


def pair_windings_iterated(iso, X, Y, n, merge_eps=MERGE_EPS):
    """Vectorized winding_iterate over paired arrays; returns (N,) turns."""
    X = as_xy(X).copy()
    Y = as_xy(Y).copy()
    total = np.zeros(X.shape[:-1])
    for _ in range(n):
        total += pair_windings(iso, X, Y, merge_eps=merge_eps)
        X = iso.map(X)
        Y = iso.map(Y)
    return total


def winding_matrix(
    iso,
    xs,
    ys,
    merge_eps=MERGE_EPS,
    init_steps=INIT_STEPS,
    max_refinements=MAX_REFINEMENTS,
):
    """All cross windings W[i, j] = winding(xs[i], ys[j]) in one sweep.

    Trajectories of the two point sets are evaluated once per time sample;
    the (n, m) relative angles are accumulated with global grid doubling on
    aliasing violations.
    """
    xs = as_xy(xs)
    ys = as_xy(ys)
    zx = xs[:, 0] + 1j * xs[:, 1]
    zy = ys[:, 0] + 1j * ys[:, 1]
    sep = np.abs(zy[None, :] - zx[:, None])
    if sep.min() <= merge_eps:
        i, j = np.unravel_index(np.argmin(sep), sep.shape)
        raise CoincidentPoints(f"points xs[{i}] and ys[{j}] within merge_eps")

    times = np.linspace(0.0, 1.0, init_steps + 1)
    fx = iso.eval(0.0, xs)
    fy = iso.eval(0.0, ys)
    d = (fy[:, 0] + 1j * fy[:, 1])[None, :] - (fx[:, 0] + 1j * fx[:, 1])[:, None]
    prev = np.angle(d)
    total = np.zeros_like(prev)
    certified = np.ones(prev.shape, dtype=bool)
    for t in times[1:]:
        fx = iso.eval(t, xs)
        fy = iso.eval(t, ys)
        d = (fy[:, 0] + 1j * fy[:, 1])[None, :] - (fx[:, 0] + 1j * fx[:, 1])[:, None]
        raw = np.angle(d)
        delta = wrap_to_pi(raw - prev)
        certified &= np.abs(delta) < ALIAS_BOUND
        total += delta
        prev = raw
    total /= TWOPI
    if not certified.all():
        # redo only the entries whose track failed the certificate
        i, j = np.nonzero(~certified)
        total[i, j] = pair_windings(
            iso, xs[i], ys[j],
            merge_eps=merge_eps,
            init_steps=2 * init_steps,
            max_refinements=max_refinements,
        )
    return total


def position_angle_tracks(iso, pts, steps=INIT_STEPS, theta0=None):
    """Certified tracks of f_t(z): positions, radii, and unwrapped angles.

    Returns (times, pos (T+1, N, 2), theta (T+1, N)).  theta0, when given,
    fixes the branch of the initial angle (per-point deck shifts).
    """
    pts = as_xy(pts)

    def vec_at(t):
        return iso.eval(t, pts)

    times, ang, _ = _certified_track(vec_at, init_steps=steps)
    if theta0 is not None:
        shift = np.round((np.asarray(theta0) - ang[0]) / TWOPI) * TWOPI
        ang = ang + shift
    pos = np.stack([iso.eval(t, pts) for t in times])
    return times, pos, ang


def orbit_angle_tracks(iso, pts, n, steps=INIT_STEPS, theta0=None):
    """Concatenated tracks over n iterates of the isotopy.

    Returns (times (n*T+1,), pos, theta) with times in [0, n]; the angle is
    continued across iterate boundaries so integer-time values are the
    lifted angles of f^k(z).
    """
    pts = as_xy(pts)
    all_times, all_pos, all_ang = [], [], []
    cur = pts
    prev_end = None
    for k in range(n):
        times, pos, ang = position_angle_tracks(
            iso, cur, steps=steps, theta0=theta0 if k == 0 else None
        )
        if prev_end is not None:
            # continue the branch across the iterate boundary
            ang = ang + (prev_end - ang[0])
        prev_end = ang[-1]
        sl = slice(None) if k == 0 else slice(1, None)
        all_times.append(times[sl] + k)
        all_pos.append(pos[sl])
        all_ang.append(ang[sl])
        cur = pos[-1]
    return (
        np.concatenate(all_times),
        np.concatenate(all_pos, axis=0),
        np.concatenate(all_ang, axis=0),
    )
