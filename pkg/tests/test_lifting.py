# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

import random

import numpy as np
import pytest

from kinstils.exceptions import InvalidArgumentError
from kinstils.expr import parse
from kinstils.geometry import SpaceDomain, build_grid
from kinstils.lifting import BOUNDARY, INITIAL, backtrack, backtrack_many, lift, linf_bound_check

UNIT = SpaceDomain((0.0,), (1.0,))
SQUARE = SpaceDomain((0.0, 0.0), (1.0, 1.0))


def test_backtrack_to_boundary():
    hit = backtrack(0.5, [0.2], [1.0], UNIT)
    assert hit.kind == BOUNDARY
    assert hit.hit_time == pytest.approx(0.3, abs=1e-15)
    assert hit.hit_point == (0.0,)


def test_backtrack_zero_velocity():
    hit = backtrack(0.7, [0.4], [0.0], UNIT)
    assert hit == hit.__class__(INITIAL, 0.0, (0.4,))


def test_backtrack_to_initial_time():
    hit = backtrack(0.5, [0.8], [1.0], UNIT)
    assert hit.kind == INITIAL
    assert hit.hit_time == 0.0
    assert hit.hit_point[0] == pytest.approx(0.3, abs=1e-15)


def test_backtrack_negative_velocity_and_corner():
    hit = backtrack(0.5, [0.8], [-1.0], UNIT)
    assert hit.kind == BOUNDARY
    assert hit.hit_point == (1.0,)
    assert hit.hit_time == pytest.approx(0.3, abs=1e-15)
    corner = backtrack(0.5, [0.5], [1.0], UNIT)
    assert corner.kind == INITIAL
    assert corner.hit_point == (0.0,)


def test_backtrack_2d_takes_latest_exit():
    hit = backtrack(1.0, [0.5, 0.2], [0.25, 0.5], SQUARE)
    assert hit.kind == BOUNDARY
    assert hit.hit_time == pytest.approx(0.6, abs=1e-15)
    assert hit.hit_point[1] == 0.0
    assert hit.hit_point[0] == pytest.approx(0.4, abs=1e-15)


def test_backtrack_outside_domain():
    with pytest.raises(InvalidArgumentError):
        backtrack(0.5, [1.5], [1.0], UNIT)
    with pytest.raises(InvalidArgumentError):
        backtrack(-0.1, [0.5], [1.0], UNIT)


def test_transport_invariance_along_characteristics():
    rng = np.random.default_rng(11)
    for _ in range(200):
        v = rng.choice([-1.0, 1.0], size=2) * rng.uniform(0.1, 2.0, size=2)
        t = rng.uniform(0.0, 1.0)
        x = rng.uniform(0.0, 1.0, size=2)
        first = backtrack(t, x, v, SQUARE)
        s = rng.uniform(first.hit_time, t)
        second = backtrack(s, x - v * (t - s), v, SQUARE)
        assert second.kind == first.kind
        assert np.max(np.abs(np.subtract(second.hit_point, first.hit_point))) <= 1e-12
        assert abs(second.hit_time - first.hit_time) <= 1e-12


def test_lift_gives_distance_to_diagonal():
    grid = build_grid(1.0, UNIT, 8, [8])
    g = lift(parse("x"), parse("t"), [1.0], grid)
    coords = grid.node_coordinates()
    assert np.max(np.abs(g.coefficients - np.abs(coords[:, 1] - coords[:, 0]))) <= 1e-12


def test_lift_constants_and_frozen_data():
    grid = build_grid(1.0, UNIT, 4, [6])
    g = lift(parse("2.5"), parse("2.5"), [-0.7], grid)
    assert np.all(g.coefficients == 2.5)
    frozen = lift(parse("sin(pi*x)"), parse("0"), [0.0], grid)
    coords = grid.node_coordinates()
    assert np.array_equal(frozen.coefficients, np.sin(np.pi * coords[:, 1]))
    assert not frozen.on_boundary.any()


def test_lift_data_consistency():
    grid = build_grid(1.0, SQUARE, 4, [4, 4])
    u0, ub = parse("1 + x*y"), parse("2 + t + x - y")
    g = lift(u0, ub, [0.5, -1.0], grid)
    coords = grid.node_coordinates()
    initial = coords[:, 0] == 0.0
    assert np.array_equal(g.coefficients[initial], 1.0 + coords[initial, 1] * coords[initial, 2])
    inflow = (coords[:, 0] > 0) & ((coords[:, 1] == 0.0) | (coords[:, 2] == 1.0))
    expected = 2.0 + coords[inflow, 0] + coords[inflow, 1] - coords[inflow, 2]
    assert np.max(np.abs(g.coefficients[inflow] - expected)) <= 1e-12


def test_linf_bound_examples():
    grid = build_grid(1.0, UNIT, 8, [8])
    report = linf_bound_check(lift(parse("x"), parse("t"), [1.0], grid), parse("x"), parse("t"), grid)
    assert report.max_abs == 1.0
    assert report.bound == 2.0
    assert report.passed
    zero = linf_bound_check(lift(parse("0"), parse("0"), [1.0], grid), parse("0"), parse("0"), grid)
    assert zero.max_abs == 0.0 and zero.passed
    five = linf_bound_check(lift(parse("5"), parse("5"), [1.0], grid), parse("5"), parse("5"), grid)
    assert five.max_abs == 5.0 and five.bound == 10.0 and five.passed


SAFE_CATALOG = ["x", "t", "sin(pi*x)", "cos(3*x) - t", "exp(-x)*t", "x^2 - 0.5", "abs(x - t)", "max(x, t)",
                "min(1 - x, 0.3)", "2*t - 1", "sqrt(x + 1)", "-3.5", "t*x*(1-x)"]


def test_linf_bound_random_pairs():
    rng = random.Random(5)
    grid = build_grid(1.0, UNIT, 6, [7])
    for _ in range(100):
        u0 = parse(rng.choice(SAFE_CATALOG))
        ub = parse(rng.choice(SAFE_CATALOG))
        v = [rng.uniform(-3.0, 3.0)]
        report = linf_bound_check(lift(u0, ub, v, grid), u0, ub, grid)
        assert report.passed


def test_backtrack_many_vectorized_matches_single():
    grid = build_grid(1.0, UNIT, 3, [3])
    coords = grid.node_coordinates()
    on_boundary, hit_time, hit_points = backtrack_many(coords[:, 0], coords[:, 1:], [0.6], UNIT)
    for k in range(grid.ndof):
        hit = backtrack(coords[k, 0], coords[k, 1:], [0.6], UNIT)
        assert hit.kind == (BOUNDARY if on_boundary[k] else INITIAL)
        assert hit.hit_time == hit_time[k]
        assert hit.hit_point == tuple(hit_points[k])
