"""Points of the closed unit disk and their lifts to the universal cover.

The punctured disk has universal cover parametrized by an unbounded angle
theta_lift and a radius r > 0; the deck transformation shifts theta_lift
by 2*pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroPoint

TWOPI = 2.0 * math.pi
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DiskPoint:
    """A point of the closed disk in Cartesian coordinates."""

    x: float
    y: float

    @property
    def r(self):
        return math.hypot(self.x, self.y)

    @property
    def theta(self):
        return math.atan2(self.y, self.x) % TWOPI

    @classmethod
    def from_polar(cls, r, theta):
        return cls(r * math.cos(theta), r * math.sin(theta))

    def as_array(self):
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class CoverPoint:
    """A lift (theta_lift, r) of a punctured-disk point, theta_lift unbounded."""

    theta_lift: float
    r: float

    def project(self):
        return DiskPoint.from_polar(self.r, self.theta_lift % TWOPI)

    def deck(self, k=1):
        return CoverPoint(self.theta_lift + k * TWOPI, self.r)


def lift(z, hint=None):
    """Lift a punctured-disk point to the universal cover.

    With a hint, returns the lift whose theta_lift lies within pi of the
    hint's; otherwise the principal representative in [0, 2*pi).
    """
    z = as_diskpoint(z)
    if z.r == 0.0:
        raise ZeroPoint("the origin has no lift")
    theta = z.theta
    if hint is None:
        return CoverPoint(theta, z.r)
    # nearest-branch rule: shift by the deck multiple closest to the hint
    k = round((hint.theta_lift - theta) / TWOPI)
    return CoverPoint(theta + k * TWOPI, z.r)


def as_diskpoint(obj):
    if isinstance(obj, DiskPoint):
        return obj
    if isinstance(obj, CoverPoint):
        return obj.project()
    x, y = obj
    return DiskPoint(float(x), float(y))


def as_xy(obj):
    """Coerce a DiskPoint, pair, or (..., 2) array to a float ndarray."""
    if isinstance(obj, DiskPoint):
        return obj.as_array()
    if isinstance(obj, CoverPoint):
        return obj.project().as_array()
    a = np.asarray(obj, dtype=float)
    if a.shape[-1] != 2:
        raise ValueError(f"expected trailing dimension 2, got shape {a.shape}")
    return a


def angles_of(pts):
    pts = np.asarray(pts)
    return np.arctan2(pts[..., 1], pts[..., 0])


def radii_of(pts):
    pts = np.asarray(pts)
    return np.hypot(pts[..., 0], pts[..., 1])


def rotate(pts, angle):
    """Rotate points about the origin; angle may broadcast against pts[..., 0]."""
    pts = np.asarray(pts)
    c, s = np.cos(angle), np.sin(angle)
    out = np.empty_like(pts, dtype=float)
    out[..., 0] = c * pts[..., 0] - s * pts[..., 1]
    out[..., 1] = s * pts[..., 0] + c * pts[..., 1]
    return out


def rot90(pts):
    """Rotate points by +90 degrees (multiplication by i)."""
    pts = np.asarray(pts)
    out = np.empty_like(pts, dtype=float)
    out[..., 0] = -pts[..., 1]
    out[..., 1] = pts[..., 0]
    return out


def rotation_matrices(angle, shape=None):
    """Stack of 2x2 rotation matrices for a (broadcastable) angle array."""
    angle = np.asarray(angle, dtype=float)
    if shape is not None:
        angle = np.broadcast_to(angle, shape)
    c, s = np.cos(angle), np.sin(angle)
    out = np.empty(angle.shape + (2, 2))
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def wrap_to_pi(a):
    """Wrap angles to the principal interval (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a), TWOPI)


def uniform_disk(rng, n, radius=1.0):
    """n points distributed by normalized area on the disk of given radius."""
    u = rng.random(n)
    theta = rng.random(n) * TWOPI
    r = radius * np.sqrt(u)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])
