"""Exactly area-preserving disk maps and isotopies.

All families are built from maps whose Jacobians are available in closed
form: rigid rotations, localized twists (exact flows of annular-bump
Hamiltonians), and radial-profile rotations.  Compositions of these are
exactly area-preserving up to roundoff, so every invariant-measure
hypothesis used elsewhere in the package holds by construction.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BadInterval, NearRationalWarning, SchemaError
from .geometry import (
    GOLDEN,
    TWOPI,
    as_xy,
    radii_of,
    rot90,
    rotate,
    rotation_matrices,
)


def check_irrational(value, name, max_den=64, tol=1e-12):
    """Warn (never fail) when value is within tol of p/q with q <= max_den."""
    for q in range(1, max_den + 1):
        p = round(value * q)
        if abs(value - p / q) < tol:
            warnings.warn(
                f"{name}={value} is within {tol} of {p}/{q}; "
                "convergence diagnostics may degrade",
                NearRationalWarning,
                stacklevel=3,
            )
            return


def _bump(xi):
    """Smooth bump on (-1, 1): exp(1 - 1/(1 - xi^2)), zero outside."""
    xi = np.asarray(xi, dtype=float)
    out = np.zeros_like(xi)
    inside = np.abs(xi) < 1.0
    u = xi[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u * u))
    return out


def _dbump(xi):
    xi = np.asarray(xi, dtype=float)
    out = np.zeros_like(xi)
    inside = np.abs(xi) < 1.0
    u = xi[inside]
    den = 1.0 - u * u
    out[inside] = np.exp(1.0 - 1.0 / den) * (-2.0 * u / (den * den))
    return out


_POTENTIAL_CACHE = {}


@dataclass(frozen=True)
class TwistStep:
    """Exact time-one flow of an annular-bump Hamiltonian about a center.

    Rotates each point about `center` by amp * bump profile of its distance
    to the center; identity outside the annulus inner <= rho <= outer and
    inside rho <= inner, so the origin and the boundary are untouched when
    the annulus is placed accordingly.
    """

    center: tuple
    amp: float
    inner: float
    outer: float

    def _xi(self, rho):
        mid = 0.5 * (self.inner + self.outer)
        half = 0.5 * (self.outer - self.inner)
        return (rho - mid) / half

    def angle(self, rho):
        return self.amp * _bump(self._xi(rho))

    def dangle(self, rho):
        half = 0.5 * (self.outer - self.inner)
        return self.amp * _dbump(self._xi(rho)) / half

    def apply(self, pts, scale=1.0):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None]
        c = np.asarray(self.center)
        w = pts - c
        rho = radii_of(w)
        psi = scale * self.angle(rho)
        out = pts.copy()
        m = psi != 0.0
        if m.any():
            out[m] = c + rotate(w[m], psi[m])
        return out[0] if single else out

    def jac(self, pts, scale=1.0):
        # D = R(psi) + (psi'/rho) * (i R(psi) w) outer w, det = 1 exactly;
        # identity wherever the bump (and with it the shear) vanishes
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None]
        c = np.asarray(self.center)
        w = pts - c
        rho = radii_of(w)
        psi = scale * self.angle(rho)
        J = np.broadcast_to(np.eye(2), rho.shape + (2, 2)).copy()
        m = psi != 0.0
        if m.any():
            wm = w[m]
            pm = psi[m]
            Jm = rotation_matrices(pm, shape=pm.shape)
            k = scale * self.dangle(rho[m]) / rho[m]
            rw = rot90(rotate(wm, pm))
            Jm += rw[..., :, None] * (k[..., None, None] * wm[..., None, :])
            J[m] = Jm
        return J[0] if single else J

    def _bump_cumulative(self):
        # cumulative integral of bump(xi(r)) r dr over [inner, outer] on a
        # dense grid, each cell integrated by 4-node GL before the cumsum
        key = (self.center, self.inner, self.outer)
        if key not in _POTENTIAL_CACHE:
            grid = np.linspace(self.inner, self.outer, 32769)
            x4, w4 = np.polynomial.legendre.leggauss(4)
            a, b = grid[:-1], grid[1:]
            mid = 0.5 * (a + b)
            half = 0.5 * (b - a)
            r = mid[:, None] + half[:, None] * x4[None, :]
            cells = half * ((_bump(self._xi(r)) * r) @ w4)
            cum = np.concatenate([[0.0], np.cumsum(cells)])
            _POTENTIAL_CACHE[key] = (grid, cum)
        return _POTENTIAL_CACHE[key]

    def potential(self, rho, scale=1.0):
        """Hamiltonian H(rho) = integral of the angular speed against r dr."""
        grid, cum = self._bump_cumulative()
        return scale * self.amp * np.interp(rho, grid, cum)

    def generating(self, pts, scale=1.0):
        """Primitive S of apply*beta - beta for the time-one flow, from the
        flow-line integral of beta(X) - H/pi (S = 0 inside the annulus)."""
        c = np.asarray(self.center)
        w = pts - c
        rho = radii_of(w)
        psi = scale * self.angle(rho)
        # averaged rotation of w over the flow: (sin psi/psi) w + ((1-cos
        # psi)/psi) i w, in forms safe at psi = 0
        s1 = np.sinc(psi / np.pi)
        s2 = 0.5 * psi * np.sinc(0.5 * psi / np.pi) ** 2
        mw = s1[..., None] * w + s2[..., None] * rot90(w)
        circ = rho * rho + mw @ c
        return psi * circ / TWOPI - self.potential(rho, scale) / np.pi


# Named Hamiltonians: geometry given for support_radius = 1, scaled at build
# time.  Each step needs |center| < inner (origin fixed) and
# |center| + outer <= 1 (compact support).
HAMILTONIANS = {
    "twist-a": (
        dict(center=(0.25, 0.10), amp=1.2, inner=0.30, outer=0.58),
        dict(center=(-0.20, 0.30), amp=-0.9, inner=0.40, outer=0.62),
    ),
    "twist-b": (
        dict(center=(0.05, -0.30), amp=0.8, inner=0.35, outer=0.60),
        dict(center=(0.32, 0.18), amp=-1.1, inner=0.40, outer=0.63),
        dict(center=(-0.28, -0.05), amp=0.7, inner=0.32, outer=0.55),
    ),
    "twist-c": (
        dict(center=(-0.10, 0.22), amp=-1.4, inner=0.28, outer=0.60),
        dict(center=(0.24, -0.24), amp=0.95, inner=0.38, outer=0.64),
    ),
    "identity": (),
}


@dataclass(frozen=True)
class ConjugacyMap:
    """Area-preserving conjugacy built from localized twist steps.

    The forward map applies each step `repeats` times at amplitude
    amp/repeats (a splitting-integrator composition of exact sub-flows), so
    det(jacobian) = 1 exactly and the inverse is exact.
    """

    steps: tuple
    repeats: int = 2
    h_tag: str = "custom"
    support_radius: float = 0.85

    @classmethod
    def from_named(cls, name, repeats=2, support_radius=0.85):
        if name not in HAMILTONIANS:
            raise SchemaError("/g/hamiltonian", f"unknown hamiltonian {name!r}")
        s = support_radius
        steps = tuple(
            TwistStep(
                center=(d["center"][0] * s, d["center"][1] * s),
                amp=d["amp"],
                inner=d["inner"] * s,
                outer=d["outer"] * s,
            )
            for d in HAMILTONIANS[name]
        )
        return cls(steps=steps, repeats=repeats, h_tag=name, support_radius=s)

    def _sequence(self, inverse=False):
        seq = []
        for _ in range(self.repeats):
            seq.extend(self.steps)
        if inverse:
            seq.reverse()
        return seq

    def forward(self, pts, scale=1.0):
        pts = np.asarray(pts, dtype=float)
        s = scale / self.repeats
        for st in self._sequence():
            pts = st.apply(pts, s)
        return pts

    def inverse(self, pts, scale=1.0):
        pts = np.asarray(pts, dtype=float)
        s = -scale / self.repeats
        for st in self._sequence(inverse=True):
            pts = st.apply(pts, s)
        return pts

    def jac_forward(self, pts, scale=1.0):
        pts = np.asarray(pts, dtype=float)
        s = scale / self.repeats
        J = np.broadcast_to(np.eye(2), pts.shape[:-1] + (2, 2)).copy()
        for st in self._sequence():
            J = st.jac(pts, s) @ J
            pts = st.apply(pts, s)
        return J

    def jac_inverse(self, pts, scale=1.0):
        pts = np.asarray(pts, dtype=float)
        s = -scale / self.repeats
        J = np.broadcast_to(np.eye(2), pts.shape[:-1] + (2, 2)).copy()
        for st in self._sequence(inverse=True):
            J = st.jac(pts, s) @ J
            pts = st.apply(pts, s)
        return J

    def generating(self, pts, scale=1.0):
        """Primitive S with forward*beta - beta = dS, accumulated over the
        step sequence (S of a composition telescopes along partial images)."""
        pts = np.asarray(pts, dtype=float)
        s = scale / self.repeats
        S = np.zeros(pts.shape[:-1])
        for st in self._sequence():
            S = S + st.generating(pts, s)
            pts = st.apply(pts, s)
        return S

    @property
    def is_identity(self):
        return len(self.steps) == 0


class Isotopy:
    """A time-parametrized family of area-preserving disk maps.

    Subclasses provide eval/jac (and velocity where the action module needs
    it).  Instances are immutable after construction and all evaluators are
    pure, so they are freely shareable.
    """

    boundary_rot = 0.0
    family_tag = "abstract"
    domain_radius = 1.0

    def eval(self, t, pts):
        raise NotImplementedError

    def jac(self, t, pts):
        raise NotImplementedError

    def velocity(self, t, pts):
        raise NotImplementedError(f"{self.family_tag} has no analytic velocity")

    def map(self, pts):
        return self.eval(1.0, pts)

    def iterate(self, pts, n):
        pts = as_xy(pts)
        for _ in range(n):
            pts = self.map(pts)
        return pts

    def orbit(self, pts, n):
        """Stack [z, f(z), ..., f^(n-1)(z)] along a new leading axis."""
        pts = as_xy(pts)
        out = np.empty((n,) + pts.shape)
        out[0] = pts
        for i in range(1, n):
            out[i] = self.map(out[i - 1])
        return out

    def config(self):
        return {"family": self.family_tag}


class RigidRotation(Isotopy):
    """f_t = rotation by 2*pi*t*alpha."""

    family_tag = "rigid"

    def __init__(self, alpha):
        check_irrational(alpha, "alpha")
        self.alpha = float(alpha)
        self.boundary_rot = self.alpha

    def eval(self, t, pts):
        return rotate(as_xy(pts), TWOPI * t * self.alpha)

    def jac(self, t, pts):
        pts = as_xy(pts)
        return rotation_matrices(TWOPI * t * self.alpha, shape=pts.shape[:-1])

    def velocity(self, t, pts):
        return TWOPI * self.alpha * rot90(self.eval(t, pts))

    def angle_displacement_exact(self, pts, n=1):
        pts = as_xy(pts)
        return np.full(pts.shape[:-1], TWOPI * n * self.alpha)

    def action_closed_form(self, pts, n=1):
        pts = as_xy(pts)
        return np.full(pts.shape[:-1], n * self.alpha)

    def config(self):
        return {"family": "rigid", "alpha": self.alpha}


class ConjugatedRotation(Isotopy):
    """f_t = g o R_{2 pi t alpha} o g^{-1} for a compactly supported g.

    With deform=True the conjugacy amplitude is also ramped with t
    (g_t R g_t^{-1}), giving a second isotopy of the same map with the same
    boundary rotation number, used for winding cross-checks.
    """

    def __init__(self, alpha, g, deform=False):
        check_irrational(alpha, "alpha")
        self.alpha = float(alpha)
        self.g = g
        self.deform = bool(deform)
        self.boundary_rot = self.alpha
        self.family_tag = "conjugated-deformed" if deform else "conjugated"

    def _scale(self, t):
        return t if self.deform else 1.0

    def eval(self, t, pts):
        s = self._scale(t)
        w = self.g.inverse(as_xy(pts), s)
        w = rotate(w, TWOPI * t * self.alpha)
        return self.g.forward(w, s)

    def jac(self, t, pts):
        pts = as_xy(pts)
        s = self._scale(t)
        Ji = self.g.jac_inverse(pts, s)
        w = self.g.inverse(pts, s)
        R = rotation_matrices(TWOPI * t * self.alpha, shape=pts.shape[:-1])
        w = rotate(w, TWOPI * t * self.alpha)
        Jf = self.g.jac_forward(w, s)
        return Jf @ R @ Ji

    def velocity(self, t, pts):
        if self.deform:
            raise NotImplementedError("deformed variant has no analytic velocity")
        pts = as_xy(pts)
        w = self.g.inverse(pts)
        w = rotate(w, TWOPI * t * self.alpha)
        v = TWOPI * self.alpha * rot90(w)
        Jf = self.g.jac_forward(w)
        return (Jf @ v[..., None])[..., 0]

    def action_closed_form(self, pts, n=1):
        """Action of the n-th iterate from the conjugacy's primitive:
        a(z) = n alpha + S_g(R^n w) - S_g(w) with w = g^{-1}(z); the
        boundary constant is n alpha because g is the identity there."""
        w = self.g.inverse(as_xy(pts))
        rw = rotate(w, TWOPI * n * self.alpha)
        return n * self.alpha + self.g.generating(rw) - self.g.generating(w)

    def config(self):
        return {
            "family": "conjugated",
            "alpha": self.alpha,
            "g": {
                "hamiltonian": self.g.h_tag,
                "steps": self.g.repeats,
                "support_radius": self.g.support_radius,
            },
            "deform": self.deform,
        }


class PlaneExtension(Isotopy):
    """Radial-profile extension of a pseudo-rotation to a larger disk.

    The angular profile is alpha for r <= 1, alpha + r - 1 on the linear
    band 1 <= r <= 1 + beta - alpha, and beta beyond.  With a core isotopy
    the unit disk evolves under the core instead (the core must coincide
    with R_alpha on the boundary circle).
    """

    family_tag = "plane-extension"

    def __init__(self, alpha, beta, core=None):
        if beta <= alpha:
            raise BadInterval(f"need beta > alpha, got alpha={alpha}, beta={beta}")
        check_irrational(alpha, "alpha")
        check_irrational(beta, "beta")
        if math.floor(beta) > math.floor(alpha):
            warnings.warn(
                f"(alpha, beta)=({alpha}, {beta}) straddles an integer",
                NearRationalWarning,
                stacklevel=2,
            )
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.core = core
        self.boundary_rot = self.alpha
        self.domain_radius = 1.0 + self.beta - self.alpha

    def profile(self, r):
        return self.alpha + np.clip(r - 1.0, 0.0, self.beta - self.alpha)

    def dprofile(self, r):
        r = np.asarray(r, dtype=float)
        return ((r > 1.0) & (r < 1.0 + self.beta - self.alpha)).astype(float)

    def eval(self, t, pts):
        pts = as_xy(pts)
        r = radii_of(pts)
        out = rotate(pts, TWOPI * t * self.profile(r))
        if self.core is not None:
            inside = r <= 1.0
            if np.any(inside):
                out = np.where(
                    inside[..., None], self.core.eval(t, pts), out
                )
        return out

    def jac(self, t, pts):
        pts = as_xy(pts)
        r = radii_of(pts)
        psi = TWOPI * t * self.profile(r)
        J = rotation_matrices(psi, shape=r.shape)
        k = np.zeros_like(r)
        np.divide(TWOPI * t * self.dprofile(r), r, out=k, where=r > 0)
        rw = rot90(rotate(pts, psi))
        J = J + rw[..., :, None] * (k[..., None, None] * pts[..., None, :])
        if self.core is not None:
            inside = r <= 1.0
            if np.any(inside):
                J = np.where(inside[..., None, None], self.core.jac(t, pts), J)
        return J

    def velocity(self, t, pts):
        pts = as_xy(pts)
        r = radii_of(pts)
        v = TWOPI * self.profile(r)[..., None] * rot90(self.eval(t, pts))
        if self.core is not None:
            inside = r <= 1.0
            if np.any(inside):
                v = np.where(inside[..., None], self.core.velocity(t, pts), v)
        return v

    def angle_displacement_exact(self, pts, n=1):
        """Exact lifted-angle displacement of n iterates (profile zone only)."""
        if self.core is not None:
            raise NotImplementedError("exact displacement needs a radial profile")
        pts = as_xy(pts)
        return TWOPI * n * self.profile(radii_of(pts))

    def config(self):
        cfg = {"family": "plane-extension", "alpha": self.alpha, "beta": self.beta}
        if self.core is not None:
            cfg["core"] = self.core.config()
        return cfg


class IteratedIsotopy(Isotopy):
    """Concatenation of n copies of a base isotopy, parametrized over [0, 1]."""

    family_tag = "iterated"

    def __init__(self, base, n):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.base = base
        self.n = int(n)
        self.boundary_rot = n * base.boundary_rot
        self.domain_radius = base.domain_radius

    def _split(self, t):
        s = t * self.n
        k = min(int(math.floor(s)), self.n - 1)
        return k, s - k

    def eval(self, t, pts):
        if np.ndim(t):
            # per-entry times: group by iterate index, evaluate each group
            s = np.asarray(t, dtype=float) * self.n
            k = np.minimum(np.floor(s).astype(int), self.n - 1)
            sigma = s - k
            pts = as_xy(pts)
            out = np.empty_like(pts, dtype=float)
            for kv in np.unique(k):
                m = k == kv
                out[m] = self.base.eval(sigma[m], self.base.iterate(pts[m], int(kv)))
            return out
        k, sigma = self._split(t)
        pts = self.base.iterate(as_xy(pts), k)
        return self.base.eval(sigma, pts)

    def jac(self, t, pts):
        k, sigma = self._split(t)
        pts = as_xy(pts)
        J = np.broadcast_to(np.eye(2), pts.shape[:-1] + (2, 2)).copy()
        for _ in range(k):
            J = self.base.jac(1.0, pts) @ J
            pts = self.base.map(pts)
        return self.base.jac(sigma, pts) @ J

    def velocity(self, t, pts):
        k, sigma = self._split(t)
        pts = self.base.iterate(as_xy(pts), k)
        return self.n * self.base.velocity(sigma, pts)

    def action_closed_form(self, pts, n=1):
        return self.base.action_closed_form(pts, n * self.n)

    def config(self):
        return {"family": "iterated", "n": self.n, "base": self.base.config()}


def make_conjugated_rotation(alpha, g, deform=False):
    """Isotopy t -> g o R_{2 pi t alpha} o g^{-1}; see ConjugatedRotation."""
    return ConjugatedRotation(alpha, g, deform=deform)


def make_plane_extension(alpha, beta, core=None):
    return PlaneExtension(alpha, beta, core=core)


def _resolve_alpha(value, pointer):
    if value == "golden":
        return GOLDEN
    if isinstance(value, (int, float)):
        return float(value)
    raise SchemaError(pointer, f"expected a number or 'golden', got {value!r}")


def from_config(cfg):
    """Build an isotopy from a JSON-style config document.

    Schema:
      {"family": "rigid", "alpha": <real | "golden">}
      {"family": "conjugated", "alpha": ..., "deform": <bool, optional>,
       "g": {"hamiltonian": <name>, "steps": <int>, "support_radius": <real>}}
      {"family": "plane-extension", "alpha": ..., "beta": <real>,
       "core": <optional nested config>}
    """
    if not isinstance(cfg, dict):
        raise SchemaError("", f"config must be an object, got {type(cfg).__name__}")
    family = cfg.get("family")
    if family is None:
        raise SchemaError("/family", "missing required field")
    if family == "rigid":
        return RigidRotation(_resolve_alpha(cfg.get("alpha", "golden"), "/alpha"))
    if family == "conjugated":
        alpha = _resolve_alpha(cfg.get("alpha", "golden"), "/alpha")
        gcfg = cfg.get("g", {})
        if not isinstance(gcfg, dict):
            raise SchemaError("/g", "must be an object")
        name = gcfg.get("hamiltonian", "twist-a")
        steps = gcfg.get("steps", 2)
        if not isinstance(steps, int) or steps < 1:
            raise SchemaError("/g/steps", f"must be a positive integer, got {steps!r}")
        sr = gcfg.get("support_radius", 0.85)
        if not isinstance(sr, (int, float)) or not 0.1 < sr < 1.0:
            raise SchemaError("/g/support_radius", f"must lie in (0.1, 1), got {sr!r}")
        g = ConjugacyMap.from_named(name, repeats=steps, support_radius=float(sr))
        return ConjugatedRotation(alpha, g, deform=bool(cfg.get("deform", False)))
    if family == "plane-extension":
        alpha = _resolve_alpha(cfg.get("alpha", "golden"), "/alpha")
        beta = cfg.get("beta")
        if not isinstance(beta, (int, float)):
            raise SchemaError("/beta", f"must be a number, got {beta!r}")
        core = from_config(cfg["core"]) if "core" in cfg else None
        return PlaneExtension(alpha, float(beta), core=core)
    raise SchemaError("/family", f"unknown family {family!r}")
