"""Coordinate helpers, cover lifts, and disk sampling."""

from __future__ import annotations

import math

import numpy as np
import pytest

from diskrot.errors import ZeroPoint
from diskrot.geometry import (
    GOLDEN,
    TWOPI,
    CoverPoint,
    DiskPoint,
    as_xy,
    angles_of,
    lift,
    radii_of,
    rot90,
    rotate,
    rotation_matrices,
    uniform_disk,
    wrap_to_pi,
)


def test_golden_mean_value():
    assert abs(GOLDEN - (math.sqrt(5.0) - 1.0) / 2.0) == 0.0
    assert abs(GOLDEN * (GOLDEN + 1.0) - 1.0) < 1e-15


def test_diskpoint_polar_roundtrip():
    p = DiskPoint.from_polar(0.7, 2.3)
    assert abs(p.r - 0.7) < 1e-15
    assert abs(p.theta - 2.3) < 1e-15


def test_lift_principal_branch_and_hint():
    z = DiskPoint.from_polar(0.5, 5.9)
    assert abs(lift(z).theta_lift - 5.9) < 1e-12
    hint = CoverPoint(5.9 + 3 * TWOPI, 0.5)
    assert abs(lift(z, hint).theta_lift - (5.9 + 3 * TWOPI)) < 1e-12
    # hint on the far side of the branch cut still picks the nearest lift
    near = CoverPoint(5.9 + TWOPI - 0.3, 0.5)
    assert abs(lift(z, near).theta_lift - (5.9 + TWOPI)) < 1e-12


def test_lift_origin_raises():
    with pytest.raises(ZeroPoint):
        lift((0.0, 0.0))


def test_deck_shifts_angle_only():
    c = CoverPoint(1.0, 0.4)
    d = c.deck(-2)
    assert d.r == c.r
    assert abs(d.theta_lift - (1.0 - 2 * TWOPI)) < 1e-15


def test_as_xy_coercions():
    assert np.allclose(as_xy(DiskPoint(0.3, -0.2)), [0.3, -0.2])
    assert np.allclose(as_xy((1.0, 2.0)), [1.0, 2.0])
    a = np.zeros((4, 3, 2))
    assert as_xy(a).shape == (4, 3, 2)
    with pytest.raises(ValueError):
        as_xy(np.zeros((5, 3)))


def test_rotate_matches_matrices():
    rng = np.random.default_rng(1)
    pts = rng.standard_normal((50, 2))
    ang = rng.standard_normal(50)
    R = rotation_matrices(ang, shape=(50,))
    via_mat = (R @ pts[..., None])[..., 0]
    assert np.max(np.abs(rotate(pts, ang) - via_mat)) < 1e-14
    assert np.max(np.abs(np.linalg.det(R) - 1.0)) < 1e-14


def test_rot90_is_quarter_rotation():
    pts = np.random.default_rng(2).standard_normal((20, 2))
    assert np.max(np.abs(rot90(pts) - rotate(pts, 0.5 * math.pi))) < 1e-15


def test_wrap_to_pi_range_and_identity():
    a = np.linspace(-20.0, 20.0, 2001)
    w = wrap_to_pi(a)
    assert np.all(w > -math.pi) and np.all(w <= math.pi)
    assert np.max(np.abs(np.sin(w) - np.sin(a))) < 1e-12
    assert np.max(np.abs(np.cos(w) - np.cos(a))) < 1e-12


def test_uniform_disk_statistics():
    rng = np.random.default_rng(3)
    pts = uniform_disk(rng, 200_000, radius=0.8)
    r = radii_of(pts)
    assert r.max() <= 0.8
    # area measure: E[r^2] = radius^2 / 2
    assert abs(np.mean(r * r) - 0.32) < 0.002
    assert abs(np.mean(angles_of(pts))) < 0.02
