# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

"""
Lifting of the initial and inflow data along the straight characteristics X(s) = x - v (t - s).
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .exceptions import InvalidArgumentError
from .expr import evaluate_array
from .geometry import INFLOW, as_velocity, classify_faces, face_nodes
from .transport import velocity_bindings

logger = logging.getLogger(__name__)

INITIAL = "initial"
BOUNDARY = "boundary"

BOUND_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CharacteristicHit:
    kind: str
    hit_time: float
    hit_point: Tuple[float, ...]


@dataclass(frozen=True, eq=False)
class LiftedField:
    coefficients: np.ndarray = field(repr=False)
    velocity: Tuple[float, ...]
    on_boundary: np.ndarray = field(repr=False)
    hit_time: np.ndarray = field(repr=False)
    hit_points: np.ndarray = field(repr=False)
    u0_sup: float
    ub_sup: float

    @property
    def data_sup(self):
        return self.u0_sup + self.ub_sup


@dataclass(frozen=True)
class LinfReport:
    max_abs: float
    bound: float
    passed: bool


def backtrack_many(t, x, v, domain, tol=BOUND_TOLERANCE):
    """
    Follows the characteristics through the points (t[k], x[k]) backwards until they leave the space-time box.
    The exit time of each axis is solved in closed form; the characteristic leaves at the latest of them.
    :return: (on_boundary mask, hit times, hit points)
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.atleast_2d(np.asarray(x, dtype=float))
    v = as_velocity(v, domain.dim)
    lower = np.asarray(domain.lower)
    upper = np.asarray(domain.upper)
    if x.shape != (len(t), domain.dim):
        raise InvalidArgumentError("Expected points of shape ({}, {}), got {}".format(len(t), domain.dim, x.shape))
    if np.any(t < 0):
        raise InvalidArgumentError("Backtracking needs t >= 0, got min {}".format(t.min()))
    if np.any(x < lower - tol) or np.any(x > upper + tol):
        raise InvalidArgumentError("Point outside the closed domain [{}, {}]".format(list(lower), list(upper)))
    x = np.clip(x, lower, upper)

    exit_times = np.full(x.shape, -np.inf)
    bound_hit = np.zeros(x.shape)
    for axis, component in enumerate(v):
        if component > 0:
            exit_times[:, axis] = t - (x[:, axis] - lower[axis]) / component
            bound_hit[:, axis] = lower[axis]
        elif component < 0:
            exit_times[:, axis] = t - (upper[axis] - x[:, axis]) / (-component)
            bound_hit[:, axis] = upper[axis]

    exit_axis = np.argmax(exit_times, axis=1)
    exit_time = exit_times[np.arange(len(t)), exit_axis]
    on_boundary = exit_time > 0

    hit_time = np.where(on_boundary, exit_time, 0.0)
    hit_points = x - np.outer(t - hit_time, v)
    hit_points = np.clip(hit_points, lower, upper)
    rows = np.flatnonzero(on_boundary)
    hit_points[rows, exit_axis[rows]] = bound_hit[rows, exit_axis[rows]]
    return on_boundary, hit_time, hit_points


def backtrack(t, x, v, domain):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    on_boundary, hit_time, hit_points = backtrack_many([t], x[None, :], v, domain)
    kind = BOUNDARY if on_boundary[0] else INITIAL
    return CharacteristicHit(kind, float(hit_time[0]), tuple(float(c) for c in hit_points[0]))


def _data_context(domain, times, points, v):
    ctx = {"t": times}
    for i, name in enumerate(domain.names):
        ctx[name] = points[:, i]
    ctx.update(velocity_bindings(v))
    return ctx


def _sup(values):
    return float(np.max(np.abs(values))) if len(values) else 0.0


def lift(u0, ub, v, grid):
    """
    Nodal values of the solution g of a.grad g = 0 carrying u0 at t=0 and ub on the inflow boundary.
    A node whose characteristic reaches t=0 exactly on the inflow boundary takes its value from u0.
    """
    v = as_velocity(v, grid.dim)
    coords = grid.node_coordinates()
    on_boundary, hit_time, hit_points = backtrack_many(coords[:, 0], coords[:, 1:], v, grid.domain)

    initial = ~on_boundary
    u0_values = evaluate_array(u0, _data_context(grid.domain, np.zeros(initial.sum()), hit_points[initial], v),
                               (int(initial.sum()),))
    ub_values = evaluate_array(ub, _data_context(grid.domain, hit_time[on_boundary], hit_points[on_boundary], v),
                               (int(on_boundary.sum()),))
    g = np.empty(grid.ndof)
    g[initial] = u0_values
    g[on_boundary] = ub_values
    if not np.all(np.isfinite(g)):
        logger.warning("Lifted field has %d non-finite nodal values", int(np.sum(~np.isfinite(g))))
    logger.info("Lifted data for v=%s: %d nodes from u0, %d from ub", list(v), int(initial.sum()),
                int(on_boundary.sum()))
    return LiftedField(g, tuple(float(c) for c in v), on_boundary, hit_time, hit_points, _sup(u0_values),
                       _sup(ub_values))


def linf_bound_check(g, u0, ub, grid, faces=None):
    """
    Checks max|g| <= sup|u0| + sup|ub| over the nodal samples and the hit points the lifting used.
    """
    v = np.asarray(g.velocity)
    coords = grid.node_coordinates()
    initial_nodes = face_nodes(grid, 0, 0)
    u0_nodal = evaluate_array(u0, _data_context(grid.domain, np.zeros(initial_nodes.sum()),
                                                coords[initial_nodes, 1:], v), (int(initial_nodes.sum()),))

    faces = faces if faces is not None else classify_faces(grid, v)
    inflow = np.zeros(grid.ndof, dtype=bool)
    for face in faces.of_kind(INFLOW):
        if face.axis > 0:
            inflow |= face_nodes(grid, face.axis, face.side)
    ub_nodal = evaluate_array(ub, _data_context(grid.domain, coords[inflow, 0], coords[inflow, 1:], v),
                              (int(inflow.sum()),))

    max_abs = _sup(g.coefficients)
    bound = max(_sup(u0_nodal), g.u0_sup) + max(_sup(ub_nodal), g.ub_sup)
    passed = bool(max_abs <= bound + 1e-12)
    if not passed:
        logger.warning("Lifting bound violated: max|g| = %g > %g", max_abs, bound)
    return LinfReport(max_abs, bound, passed)
