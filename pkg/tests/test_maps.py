"""Map families: exact area preservation, inverses, Jacobians, configs."""

from __future__ import annotations

import numpy as np
import pytest

from diskrot.errors import BadInterval, NearRationalWarning, SchemaError
from diskrot.geometry import GOLDEN, TWOPI, rotate, uniform_disk
from diskrot.maps import (
    HAMILTONIANS,
    ConjugacyMap,
    ConjugatedRotation,
    IteratedIsotopy,
    PlaneExtension,
    RigidRotation,
    TwistStep,
    from_config,
)

STEP = TwistStep(center=(0.2, 0.1), amp=1.1, inner=0.3, outer=0.6)


def _g(name="twist-a"):
    return ConjugacyMap.from_named(name)


def test_twist_step_identity_outside_annulus():
    pts = np.array([[0.2, 0.1], [0.25, 0.1], [0.2 + 0.7, 0.1], [0.95, 0.0]])
    assert np.max(np.abs(STEP.apply(pts) - pts)) == 0.0
    J = STEP.jac(pts)
    assert np.max(np.abs(J - np.eye(2))) == 0.0


def test_twist_step_unit_jacobian_determinant():
    rng = np.random.default_rng(0)
    pts = uniform_disk(rng, 500, 0.95)
    det = np.linalg.det(STEP.jac(pts, scale=0.7))
    assert np.max(np.abs(det - 1.0)) < 1e-12


def test_twist_step_jacobian_matches_finite_differences():
    rng = np.random.default_rng(1)
    pts = np.array([0.2, 0.1]) + 0.42 * _unit(rng, 30)
    J = STEP.jac(pts)
    h = 1e-6
    for axis, e in enumerate(np.eye(2)):
        fd = (STEP.apply(pts + h * e) - STEP.apply(pts - h * e)) / (2 * h)
        assert np.max(np.abs(J[:, :, axis] - fd)) < 1e-7


def _unit(rng, n):
    t = TWOPI * rng.random(n)
    return np.column_stack([np.cos(t), np.sin(t)])


def test_twist_step_generating_differential():
    # dS = apply*beta - beta, checked against central differences of S
    rng = np.random.default_rng(2)
    pts = np.array([0.2, 0.1]) + (0.35 + 0.2 * rng.random(40))[:, None] * _unit(
        rng, 40
    )
    dirs = _unit(rng, 40)
    h = 1e-5
    fd = (STEP.generating(pts + h * dirs) - STEP.generating(pts - h * dirs)) / (2 * h)
    f = STEP.apply(pts)
    Jv = (STEP.jac(pts) @ dirs[..., None])[..., 0]

    def beta(z, v):
        return (z[:, 0] * v[:, 1] - z[:, 1] * v[:, 0]) / TWOPI

    defect = beta(f, Jv) - beta(pts, dirs)
    # central differences carry O(h^2) truncation against the steep bump
    assert np.max(np.abs(fd - defect)) < 5e-6


def test_conjugacy_inverse_is_exact():
    g = _g()
    rng = np.random.default_rng(3)
    pts = uniform_disk(rng, 2000, 0.99)
    assert np.max(np.abs(g.inverse(g.forward(pts)) - pts)) < 1e-12
    assert np.max(np.abs(g.forward(g.inverse(pts)) - pts)) < 1e-12


def test_conjugacy_jacobians_unit_determinant_and_inverse():
    g = _g("twist-b")
    rng = np.random.default_rng(4)
    pts = uniform_disk(rng, 300, 0.95)
    Jf = g.jac_forward(pts)
    assert np.max(np.abs(np.linalg.det(Jf) - 1.0)) < 1e-11
    Ji = g.jac_inverse(g.forward(pts))
    assert np.max(np.abs(Ji @ Jf - np.eye(2))) < 1e-10


def test_conjugacy_generating_accumulates_the_composition():
    # S of the composition, checked against the one-step differential rule
    g = _g()
    rng = np.random.default_rng(5)
    pts = uniform_disk(rng, 60, 0.8)
    dirs = _unit(rng, 60)
    h = 1e-5
    fd = (g.generating(pts + h * dirs) - g.generating(pts - h * dirs)) / (2 * h)
    f = g.forward(pts)
    Jv = (g.jac_forward(pts) @ dirs[..., None])[..., 0]
    defect = (f[:, 0] * Jv[:, 1] - f[:, 1] * Jv[:, 0]) / TWOPI - (
        pts[:, 0] * dirs[:, 1] - pts[:, 1] * dirs[:, 0]
    ) / TWOPI
    assert np.max(np.abs(fd - defect)) < 5e-6


def test_conjugacy_fixes_origin_and_boundary():
    g = _g("twist-c")
    assert np.max(np.abs(g.forward(np.zeros((1, 2))))) == 0.0
    t = np.linspace(0.0, TWOPI, 50)
    circle = np.column_stack([np.cos(t), np.sin(t)])
    assert np.max(np.abs(g.forward(circle) - circle)) == 0.0


def test_conjugated_rotation_is_conjugate_to_rigid():
    g = _g()
    iso = ConjugatedRotation(GOLDEN, g)
    rng = np.random.default_rng(6)
    pts = uniform_disk(rng, 200, 0.95)
    direct = g.forward(rotate(g.inverse(pts), TWOPI * GOLDEN))
    assert np.max(np.abs(iso.map(pts) - direct)) < 1e-12
    det = np.linalg.det(iso.jac(1.0, pts))
    assert np.max(np.abs(det - 1.0)) < 1e-10


def test_conjugated_rotation_boundary_restriction_is_rigid():
    iso = ConjugatedRotation(GOLDEN, _g("twist-b"))
    t = np.linspace(0.0, TWOPI, 40)
    circle = np.column_stack([np.cos(t), np.sin(t)])
    for s in (0.25, 0.6, 1.0):
        assert np.max(
            np.abs(iso.eval(s, circle) - rotate(circle, TWOPI * s * GOLDEN))
        ) < 1e-12


def test_conjugated_velocity_matches_finite_time_differences():
    iso = ConjugatedRotation(GOLDEN, _g())
    rng = np.random.default_rng(7)
    pts = uniform_disk(rng, 50, 0.9)
    h = 1e-6
    for t in (0.2, 0.8):
        fd = (iso.eval(t + h, pts) - iso.eval(t - h, pts)) / (2 * h)
        assert np.max(np.abs(iso.velocity(t, pts) - fd)) < 1e-6


def test_deformed_isotopy_shares_the_time_one_map():
    g = _g()
    iso = ConjugatedRotation(GOLDEN, g)
    alt = ConjugatedRotation(GOLDEN, g, deform=True)
    rng = np.random.default_rng(8)
    pts = uniform_disk(rng, 100, 0.95)
    assert np.max(np.abs(iso.map(pts) - alt.map(pts))) < 1e-12
    assert np.max(np.abs(alt.eval(0.0, pts) - pts)) == 0.0


def test_plane_extension_profile_bands():
    with pytest.warns(NearRationalWarning):
        iso = PlaneExtension(GOLDEN, 0.75)
    r = np.array([0.2, 1.0, 1.05, 1.0 + 0.75 - GOLDEN, 1.2])
    prof = iso.profile(r)
    assert prof[0] == GOLDEN and prof[1] == GOLDEN
    assert abs(prof[2] - (GOLDEN + 0.05)) < 1e-15
    assert prof[3] == 0.75 and prof[4] == 0.75
    disp = iso.angle_displacement_exact(np.column_stack([r, np.zeros(5)]), n=3)
    assert np.max(np.abs(disp - TWOPI * 3 * prof)) < 1e-12


def test_plane_extension_needs_wider_interval():
    with pytest.raises(BadInterval):
        PlaneExtension(GOLDEN, 0.5)


def test_iterated_isotopy_concatenates():
    iso = ConjugatedRotation(GOLDEN, _g())
    it = IteratedIsotopy(iso, 3)
    rng = np.random.default_rng(9)
    pts = uniform_disk(rng, 50, 0.9)
    assert np.max(np.abs(it.map(pts) - iso.iterate(pts, 3))) < 1e-12
    # integer times land on the iterates of the base map
    assert np.max(np.abs(it.eval(2.0 / 3.0, pts) - iso.iterate(pts, 2))) < 1e-12
    assert abs(it.boundary_rot - 3 * GOLDEN) < 1e-15


def test_closed_form_action_is_constant_for_rigid():
    iso = RigidRotation(GOLDEN)
    pts = uniform_disk(np.random.default_rng(10), 20)
    assert np.max(np.abs(iso.action_closed_form(pts, n=4) - 4 * GOLDEN)) == 0.0


def test_named_hamiltonians_fit_in_the_disk():
    for name, steps in HAMILTONIANS.items():
        for d in steps:
            c = np.hypot(*d["center"])
            assert c < d["inner"], name
            assert c + d["outer"] <= 1.0, name


def test_from_config_roundtrip():
    iso = from_config(
        {
            "family": "conjugated",
            "alpha": "golden",
            "g": {"hamiltonian": "twist-b", "steps": 3, "support_radius": 0.8},
        }
    )
    again = from_config(iso.config())
    pts = uniform_disk(np.random.default_rng(11), 50, 0.9)
    assert np.max(np.abs(iso.map(pts) - again.map(pts))) == 0.0


def test_from_config_schema_pointers():
    cases = [
        ([], ""),
        ({}, "/family"),
        ({"family": "nope"}, "/family"),
        ({"family": "rigid", "alpha": "thirds"}, "/alpha"),
        ({"family": "conjugated", "g": {"steps": 0}}, "/g/steps"),
        ({"family": "conjugated", "g": {"support_radius": 2.0}}, "/g/support_radius"),
        ({"family": "conjugated", "g": {"hamiltonian": "nope"}}, "/g/hamiltonian"),
        ({"family": "plane-extension"}, "/beta"),
    ]
    for cfg, pointer in cases:
        with pytest.raises(SchemaError) as err:
            from_config(cfg)
        assert err.value.pointer == pointer


def test_near_rational_alpha_warns_but_builds():
    with pytest.warns(NearRationalWarning):
        iso = RigidRotation(0.5)
    assert iso.alpha == 0.5
