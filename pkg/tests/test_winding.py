"""Winding numbers of pairs: exact cases, oracles, and certificates."""

from __future__ import annotations

import numpy as np
import pytest

from diskrot.errors import CoincidentPoints
from diskrot.geometry import GOLDEN, TWOPI, uniform_disk, wrap_to_pi
from diskrot.maps import ConjugacyMap, ConjugatedRotation, IteratedIsotopy, RigidRotation
from diskrot.winding import (
    AngleLedger,
    pair_windings,
    pair_windings_iterated,
    winding,
    winding_iterate,
    winding_matrix,
    winding_tangent,
)

RIGID = RigidRotation(GOLDEN)
CONJ = ConjugatedRotation(GOLDEN, ConjugacyMap.from_named("twist-a"))


def _pairs(rng, count, radius=0.95, min_sep=1e-3):
    X = uniform_disk(rng, count, radius)
    Y = uniform_disk(rng, count, radius)
    while True:
        bad = np.hypot(*(Y - X).T) < min_sep
        if not bad.any():
            return X, Y
        Y[bad] = uniform_disk(rng, int(bad.sum()), radius)


def _dense_windings(iso, X, Y, steps=4096):
    """Oracle: fixed fine uniform grid with plain branch continuation."""
    times = np.linspace(0.0, 1.0, steps + 1)
    v = iso.eval(0.0, Y) - iso.eval(0.0, X)
    prev = np.arctan2(v[:, 1], v[:, 0])
    total = np.zeros(len(X))
    for t in times[1:]:
        v = iso.eval(t, Y) - iso.eval(t, X)
        raw = np.arctan2(v[:, 1], v[:, 0])
        total += wrap_to_pi(raw - prev)
        prev = raw
    return total / TWOPI


def test_rigid_windings_equal_alpha_exactly():
    X, Y = _pairs(np.random.default_rng(0), 500)
    w = pair_windings(RIGID, X, Y)
    assert np.max(np.abs(w - GOLDEN)) < 1e-12


def test_adaptive_windings_match_dense_grid():
    X, Y = _pairs(np.random.default_rng(1), 300)
    w = pair_windings(CONJ, X, Y)
    assert np.max(np.abs(w - _dense_windings(CONJ, X, Y))) < 1e-9


def test_scalar_winding_agrees_with_batch():
    X, Y = _pairs(np.random.default_rng(2), 20)
    w = pair_windings(CONJ, X, Y)
    for i in range(len(X)):
        assert abs(winding(CONJ, X[i], Y[i]) - w[i]) < 1e-10


def test_winding_is_symmetric():
    X, Y = _pairs(np.random.default_rng(3), 30)
    assert np.max(np.abs(pair_windings(CONJ, X, Y) - pair_windings(CONJ, Y, X))) < 1e-12
    w, wr = winding(CONJ, X[0], Y[0]), winding(CONJ, Y[0], X[0])
    assert abs(w - wr) < 1e-12


def test_winding_ledger_certificate():
    ledger, w = winding(CONJ, (0.5, 0.1), (-0.2, 0.4), with_ledger=True)
    assert ledger.times[0] == 0.0 and ledger.times[-1] == 1.0
    assert abs(ledger.winding - w) == 0.0
    with pytest.raises(ValueError):
        AngleLedger(
            times=np.array([0.0, 0.5, 1.0]),
            angles=np.array([0.0, 3.0, 0.0]),
            refinements=0,
        )


def test_coincident_pair_rejected():
    with pytest.raises(CoincidentPoints):
        winding(CONJ, (0.3, 0.2), (0.3, 0.2))
    with pytest.raises(CoincidentPoints):
        pair_windings(CONJ, np.array([[0.3, 0.2]]), np.array([[0.3, 0.2]]))


def test_iterated_winding_telescopes():
    X, Y = _pairs(np.random.default_rng(4), 10, radius=0.9)
    n = 5
    per_iter = pair_windings_iterated(CONJ, X, Y, n)
    concat = pair_windings(IteratedIsotopy(CONJ, n), X, Y)
    assert np.max(np.abs(per_iter - concat)) < 1e-8
    assert abs(winding_iterate(CONJ, X[0], Y[0], n) - per_iter[0]) < 1e-10


def test_winding_matrix_matches_pairwise_values():
    rng = np.random.default_rng(5)
    xs = uniform_disk(rng, 12, 0.9)
    ys = uniform_disk(rng, 15, 0.9)
    W = winding_matrix(CONJ, xs, ys)
    assert W.shape == (12, 15)
    i, j = np.meshgrid(np.arange(12), np.arange(15), indexing="ij")
    direct = pair_windings(CONJ, xs[i.ravel()], ys[j.ravel()]).reshape(12, 15)
    assert np.max(np.abs(W - direct)) < 1e-10


def test_tangent_winding_at_the_fixed_origin():
    assert abs(winding_tangent(RIGID, np.zeros(2), np.array([1.0, 0.0])) - GOLDEN) < 1e-12
    assert abs(winding_tangent(CONJ, np.zeros(2), np.array([0.0, 1.0])) - GOLDEN) < 1e-8


def test_two_isotopies_of_one_map_wind_identically():
    alt = ConjugatedRotation(GOLDEN, CONJ.g, deform=True)
    X, Y = _pairs(np.random.default_rng(6), 50, radius=0.9)
    dev = np.abs(pair_windings(CONJ, X, Y) - pair_windings(alt, X, Y))
    assert np.max(dev) < 1e-8
