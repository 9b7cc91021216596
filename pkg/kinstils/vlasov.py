# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

"""
Phase-space transport under the Lorentz force: the field a = (1, v, E + v x B), its characteristics and a
quadrature check of ||f|| <= 2T ||a.grad f|| for compactly supported test functions.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .exceptions import IntegrationError, InvalidArgumentError
from .expr import evaluate_array, free_vars, parse
from .sweep import run_sweep
from .transport import VELOCITY_NAMES, face_gauss, tensor_gauss

logger = logging.getLogger(__name__)

FIELD_VARIABLES = frozenset(("t", "x", "y"))
POSITION_NAMES = ("x", "y")

FD_STEP = 1e-5
RATIO_SLACK = 1e-4
SUPPORT_TOLERANCE = 1e-10
IDENTITY_TOLERANCE = 1e-8
DEFAULT_CELLS = 2

RATIO_HEADER = ["case", "lhs", "rhs", "ratio", "bound", "pass"]
TRAJECTORY_HEADER = ["step", "t", "x1", "x2", "x3", "v1", "v2", "v3"]


class EMFields(object):
    """
    Electric and magnetic fields, three expressions each in (t, x, y).
    """

    def __init__(self, E, B):
        if len(E) != 3 or len(B) != 3:
            raise InvalidArgumentError("E and B need 3 components each, got {} and {}".format(len(E), len(B)))
        for component in list(E) + list(B):
            unknown = free_vars(component) - FIELD_VARIABLES
            if unknown:
                raise InvalidArgumentError("Field depends on {}, only t, x, y are allowed".format(sorted(unknown)))
        self.E = tuple(E)
        self.B = tuple(B)

    @classmethod
    def from_strings(cls, E=("0", "0", "0"), B=("0", "0", "0")):
        return cls([parse(e, FIELD_VARIABLES) for e in E], [parse(b, FIELD_VARIABLES) for b in B])

    def evaluate(self, t, x):
        """
        E and B at the points (t[k], x[k]), each returned with shape (n, 3).
        """
        n = len(t)
        ctx = {"t": t, "x": x[:, 0], "y": x[:, 1]}
        E = np.stack([evaluate_array(c, ctx, (n,)) for c in self.E], axis=1)
        B = np.stack([evaluate_array(c, ctx, (n,)) for c in self.B], axis=1)
        return E, B

    def force(self, t, x, v):
        E, B = self.evaluate(t, x)
        return E + np.cross(v, B)


@dataclass(frozen=True, eq=False)
class PhaseState:
    t: float
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _vector3(self.x, "position"))
        object.__setattr__(self, "v", _vector3(self.v, "velocity"))
        if not np.isfinite(self.t):
            raise InvalidArgumentError("Phase state time must be finite, got {}".format(self.t))

    def as_array(self):
        return np.concatenate([[self.t], self.x, self.v])

    @classmethod
    def from_array(cls, z):
        return cls(float(z[0]), z[1:4], z[4:7])


def _vector3(values, label):
    values = np.zeros(3) + np.asarray(values, dtype=float)
    if values.shape != (3,) or not np.all(np.isfinite(values)):
        raise InvalidArgumentError("Phase state {} must be a finite 3-vector, got {}".format(label, values))
    return values


@dataclass(frozen=True, eq=False)
class VlasovTestFunction:
    """
    A test function with declared compact support: one interval per spatial dimension, and intervals for the
    velocity components it varies in. Undeclared velocity components are frozen at 0.
    """
    f: object
    support_x: Tuple[Tuple[float, float], ...]
    support_v: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        for lo, hi in list(self.support_x) + list(self.support_v.values()):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise InvalidArgumentError("Support interval ({}, {}) must be bounded and non-empty".format(lo, hi))
        unknown = set(self.support_v) - set(VELOCITY_NAMES)
        if unknown:
            raise InvalidArgumentError("Unknown velocity components {}".format(sorted(unknown)))

    @classmethod
    def from_string(cls, text, support_x, support_v=None, name=""):
        support_v = support_v or {}
        ordered = {k: tuple(support_v[k]) for k in VELOCITY_NAMES if k in support_v}
        return cls(parse(text), tuple(tuple(b) for b in support_x), ordered, name or text)

    @property
    def velocity_names(self):
        return tuple(self.support_v)


@dataclass(frozen=True)
class VlasovRatioReport:
    lhs: float
    rhs: float
    ratio: Optional[float]
    bound: float
    passed: bool
    admissible: bool
    support_max: float


@dataclass(frozen=True)
class VlasovIdentityReport:
    interior: float
    boundary: float
    residual: float
    sign_pass: bool


def field_a(state, fields):
    """(1, v, E + v x B) at one phase-space point."""
    force = fields.force(np.array([state.t]), state.x[None, :], state.v[None, :])[0]
    return np.concatenate([[1.0], state.v, force])


def divergence_a(state, fields, h=FD_STEP):
    """
    Central-difference estimate of the divergence of a over (t, x, v), step h relative per coordinate.
    """
    if not h > 0:
        raise InvalidArgumentError("Finite-difference step must be > 0, got {}".format(h))
    z = state.as_array()
    total = 0.0
    for k in range(7):
        step = h * max(1.0, abs(z[k]))
        e = np.zeros(7)
        e[k] = step
        plus = field_a(PhaseState.from_array(z + e), fields)[k]
        minus = field_a(PhaseState.from_array(z - e), fields)[k]
        total += (plus - minus) / (2.0 * step)
    return float(total)


def _rhs(t, y, fields):
    x, v = y[:3], y[3:]
    force = fields.force(np.array([t]), x[None, :], v[None, :])[0]
    return np.concatenate([v, force])


def flow_rk4(state0, fields, dt, nsteps):
    """
    Classical Runge-Kutta for x' = v, v' = E + v x B.
    :return: trajectory of nsteps + 1 phase states, starting at state0
    """
    if not dt > 0 or nsteps < 1:
        raise InvalidArgumentError("Integration needs dt > 0 and nsteps >= 1, got {} and {}".format(dt, nsteps))
    y = np.concatenate([state0.x, state0.v])
    t = state0.t
    trajectory = [state0]
    for step in range(1, nsteps + 1):
        k1 = _rhs(t, y, fields)
        k2 = _rhs(t + 0.5 * dt, y + 0.5 * dt * k1, fields)
        k3 = _rhs(t + 0.5 * dt, y + 0.5 * dt * k2, fields)
        k4 = _rhs(t + dt, y + dt * k3, fields)
        y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = state0.t + step * dt
        if not np.all(np.isfinite(y)):
            raise IntegrationError("Non-finite phase state", step)
        trajectory.append(PhaseState(t, y[:3], y[3:]))
    return trajectory


def speed_drift(trajectory):
    speeds = np.array([np.linalg.norm(state.v) for state in trajectory])
    return float(np.max(np.abs(speeds - speeds[0])))


def trajectory_rows(trajectory):
    rows = [[step, state.t] + list(state.x) + list(state.v) for step, state in enumerate(trajectory)]
    return TRAJECTORY_HEADER, rows


class _PhaseBox(object):
    """
    The integration box (0,T) x support_x x support_v of a test function and the map from its active
    coordinates to full phase-space points.
    """

    def __init__(self, testfn, T, domain):
        if len(testfn.support_x) != domain.dim:
            raise InvalidArgumentError("Test function declares {} spatial intervals, domain has {} dimensions"
                                       .format(len(testfn.support_x), domain.dim))
        for (lo, hi), d_lo, d_hi in zip(testfn.support_x, domain.lower, domain.upper):
            if lo < d_lo or hi > d_hi:
                raise InvalidArgumentError("Spatial support ({}, {}) escapes the domain ({}, {})"
                                           .format(lo, hi, d_lo, d_hi))
        allowed = {"t"} | set(domain.names) | set(VELOCITY_NAMES)
        unknown = free_vars(testfn.f) - allowed
        if unknown:
            raise InvalidArgumentError("Test function depends on {} outside the phase space".format(sorted(unknown)))

        self.dim = domain.dim
        self.names = domain.names
        self.velocity_axes = [VELOCITY_NAMES.index(name) for name in testfn.velocity_names]
        self.bounds = [(0.0, float(T))] + [tuple(b) for b in testfn.support_x] + list(testfn.support_v.values())
        self.ndim = len(self.bounds)

    def phase(self, points):
        """(t, x, v) arrays, (n,), (n, 3), (n, 3), for points in the active coordinates."""
        n = len(points)
        x = np.zeros((n, 3))
        v = np.zeros((n, 3))
        x[:, :self.dim] = points[:, 1:1 + self.dim]
        v[:, self.velocity_axes] = points[:, 1 + self.dim:]
        return points[:, 0], x, v

    def context(self, points):
        t, x, v = self.phase(points)
        ctx = {"t": t}
        for i, name in enumerate(POSITION_NAMES):
            ctx[name] = x[:, i]
        for i, name in enumerate(VELOCITY_NAMES):
            ctx[name] = v[:, i]
        return ctx

    def field(self, points, fields):
        """Components of a along the active coordinates."""
        t, x, v = self.phase(points)
        force = fields.force(t, x, v)
        return np.column_stack([np.ones(len(points)), v[:, :self.dim],
                                force[:, self.velocity_axes]])


def _advective_derivative(values_at, box, points, fields, fd_step):
    """a.grad F by central differences per active coordinate, step fd_step relative to the coordinate."""
    a = box.field(points, fields)
    total = np.zeros(len(points))
    for k in range(box.ndim):
        step = fd_step * np.maximum(1.0, np.abs(points[:, k]))
        shifted = points.copy()
        shifted[:, k] += step
        plus = values_at(shifted)
        shifted[:, k] -= 2.0 * step
        minus = values_at(shifted)
        total += a[:, k] * (plus - minus) / (2.0 * step)
    return total


def _support_max(testfn, box, quad_order, cells):
    """max|f| sampled on t = 0 and on every face of the declared support."""
    worst = 0.0
    faces = [(0, 0)] + [(axis, side) for axis in range(1, box.ndim) for side in (0, 1)]
    for axis, side in faces:
        points, _ = face_gauss(box.bounds, axis, side, quad_order, cells)
        values = evaluate_array(testfn.f, box.context(points), (len(points),))
        worst = max(worst, float(np.max(np.abs(values))))
    return worst


def vlasov_ratio(testfn, fields, T, domain, quad_order=6, cells=DEFAULT_CELLS, fd_step=FD_STEP):
    """
    ||f|| and ||a.grad f|| by composite tensor Gauss quadrature over (0,T) x support_x x support_v.
    Passes iff lhs <= 2T rhs (1 + 1e-4); a vanishing f passes vacuously.
    """
    if not T > 0:
        raise InvalidArgumentError("Final time must be > 0, got {}".format(T))
    box = _PhaseBox(testfn, T, domain)
    points, weights = tensor_gauss(box.bounds, quad_order, cells)

    def values_at(p):
        return evaluate_array(testfn.f, box.context(p), (len(p),))

    values = values_at(points)
    derivative = _advective_derivative(values_at, box, points, fields, fd_step)
    lhs = float(np.sqrt(np.dot(weights, values * values)))
    rhs = float(np.sqrt(np.dot(weights, derivative * derivative)))
    bound = 2.0 * T
    ratio = lhs / rhs if rhs > 0 else None
    passed = bool(lhs <= bound * rhs * (1 + RATIO_SLACK))

    support_max = _support_max(testfn, box, quad_order, cells)
    admissible = support_max <= SUPPORT_TOLERANCE
    if not admissible:
        logger.warning("Test function %s does not vanish on its support boundary: max|f| = %g",
                       testfn.name, support_max)
    if not passed:
        logger.warning("Vlasov bound violated for %s: ||f|| = %.17g > 2T ||a.grad f|| = %.17g",
                       testfn.name, lhs, bound * rhs)
    logger.info("Test function %s: ||f|| %.6e, ||a.grad f|| %.6e, ratio %s (2T = %g)", testfn.name, lhs, rhs,
                ratio, bound)
    return VlasovRatioReport(lhs, rhs, ratio, bound, passed, admissible, support_max)


def vlasov_identity_check(testfn, fields, T, domain, quad_order=6, cells=DEFAULT_CELLS, fd_step=FD_STEP):
    """
    With w = t - T, the volume integral of a.grad(w f^2) against the boundary flux of w f^2 (a.n) over the
    support box. Equality needs a divergence-free a; the sign needs f = 0 at t = 0.
    """
    box = _PhaseBox(testfn, T, domain)
    points, weights = tensor_gauss(box.bounds, quad_order, cells)

    def weighted_square(p):
        values = evaluate_array(testfn.f, box.context(p), (len(p),))
        return (p[:, 0] - T) * values * values

    interior = float(np.dot(weights, _advective_derivative(weighted_square, box, points, fields, fd_step)))

    boundary = 0.0
    for axis in range(box.ndim):
        for side in (0, 1):
            face_points, face_weights = face_gauss(box.bounds, axis, side, quad_order, cells)
            normal = 1.0 if side == 1 else -1.0
            flux = normal * box.field(face_points, fields)[:, axis]
            boundary += float(np.dot(face_weights, weighted_square(face_points) * flux))
    residual = abs(interior - boundary)
    return VlasovIdentityReport(interior, boundary, residual, bool(interior <= IDENTITY_TOLERANCE))


def ratio_rows(reports):
    """
    :param reports: list of (case name, VlasovRatioReport)
    """
    rows = [[name, r.lhs, r.rhs, r.ratio, r.bound, r.passed] for name, r in reports]
    return RATIO_HEADER, rows


@dataclass(frozen=True, eq=False)
class VlasovCase:
    name: str
    testfn: VlasovTestFunction
    fields: EMFields
    T: float
    domain: object
    quad_order: int = 6
    cells: int = DEFAULT_CELLS


def _ratio_task(case):
    return case.name, vlasov_ratio(case.testfn, case.fields, case.T, case.domain, case.quad_order, case.cells)


def ratio_catalog(cases, enable_parallel=False):
    """(name, VlasovRatioReport) for every case, in the order of `cases`."""
    return run_sweep(_ratio_task, cases, enable_parallel)


def max_divergence(fields, T, domain, samples=100, seed=42, speed=1.0):
    """Largest |divergence_a| over seeded random states in (0,T) x domain x [-speed, speed]^3."""
    rng = np.random.default_rng(seed)
    lower = np.concatenate([[0.0], domain.lower, np.full(3, -speed)])
    upper = np.concatenate([[T], domain.upper, np.full(3, speed)])
    worst = 0.0
    for z in rng.uniform(lower, upper, size=(samples, len(lower))):
        x = np.zeros(3)
        x[:domain.dim] = z[1:1 + domain.dim]
        state = PhaseState(float(z[0]), x, z[1 + domain.dim:])
        worst = max(worst, abs(divergence_a(state, fields)))
    return worst
