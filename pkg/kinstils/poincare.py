# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

"""
Numerical certification of the kinetic Poincare inequality ||f|| <= 2T ||d/dt f + v.grad_x f|| on the
constrained Q1 space, plus a quadrature replay of the weight-function identity behind it.
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, cg, eigsh, splu

from .exceptions import InvalidArgumentError, NoConvergenceError
from .expr import evaluate_array
from .geometry import (INFLOW, OUTFLOW, SpaceDomain, as_velocity, build_grid, classify_faces, constrained_dofs,
                       face_nodes)
from .sweep import run_sweep
from .transport import (assemble_advection, assemble_basis, face_gauss, gauss_rule, mass_matrix, tensor_gauss,
                        velocity_bindings, weighted_gram, DEFAULT_ORDER)

logger = logging.getLogger(__name__)

INVERSE_POWER = "inverse-power"
SHIFT_INVERT = "shift-invert"
METHODS = (INVERSE_POWER, SHIFT_INVERT)

BOUND_SLACK = 1e-10
DENSE_LIMIT = 64
IDENTITY_TOLERANCE = 1e-8
INFLOW_TOLERANCE = 1e-10

SWEEP_HEADER = ["v", "T", "nt", "nx", "lambda_min", "C_h", "bound_2T", "pass"]


@dataclass(frozen=True)
class EigenConfig:
    tol: float = 1e-8
    maxit: int = 200
    seed: int = 42
    method: str = SHIFT_INVERT
    inner_tol: float = 1e-12

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidArgumentError("Unknown eigen method '{}', expected one of {}".format(self.method, METHODS))
        if not self.tol > 0 or self.maxit < 1:
            raise InvalidArgumentError("Eigen tolerance must be > 0 and maxit >= 1, got {} and {}"
                                       .format(self.tol, self.maxit))


@dataclass(frozen=True, eq=False)
class RayleighResult:
    lambda_min: float
    C_h: float
    iterations: int
    residual: float
    bound: float
    method: str
    eigenvector: np.ndarray = field(repr=False, default=None)

    @property
    def passed(self):
        return bool(self.C_h <= self.bound * (1 + BOUND_SLACK))


@dataclass(frozen=True)
class WeightCheckReport:
    interior: float
    boundary: float
    residual: float
    sign_pass: bool
    admissible: bool
    inflow_max: float
    w_sup: float

    @property
    def passed(self):
        return self.admissible and self.sign_pass and self.residual <= IDENTITY_TOLERANCE


class ConstrainedPencil(object):
    """
    The reduced pair (K, M) of the generalized eigenproblem K f = lambda M f on the inflow-constrained space.
    """

    def __init__(self, grid, v, quad_order=DEFAULT_ORDER):
        self.grid = grid
        faces = classify_faces(grid, v)
        self.constraints = constrained_dofs(grid, faces)
        self.free = self.constraints.free()
        rule = gauss_rule(quad_order, grid.dim + 1)
        basis = assemble_basis(grid, rule)
        advection = assemble_advection(grid, v, rule)
        self.K = weighted_gram(advection.D, basis.W)[self.free][:, self.free].tocsc()
        self.M = mass_matrix(basis)[self.free][:, self.free].tocsc()

    @property
    def size(self):
        return len(self.free)

    def start_vector(self, seed):
        rng = np.random.default_rng(seed)
        return rng.standard_normal(self.grid.ndof)[self.free]

    def residual(self, lam, f):
        Mf = self.M @ f
        return float(np.linalg.norm(self.K @ f - lam * Mf) / np.linalg.norm(Mf))

    def rayleigh(self, f):
        return float(f @ (self.K @ f)) / float(f @ (self.M @ f))


def _dense(pencil):
    values, vectors = scipy.linalg.eigh(pencil.K.toarray(), pencil.M.toarray())
    return float(values[0]), vectors[:, 0], 1


def _shift_invert(pencil, cfg):
    """
    Lanczos on the inverse operator K^-1 M: inverse iteration accelerated in a Krylov subspace.
    """
    factor = splu(pencil.K)
    counter = {"solves": 0}

    def solve(x):
        counter["solves"] += 1
        return factor.solve(np.asarray(x, dtype=float).ravel())

    inverse = LinearOperator(pencil.K.shape, matvec=solve, dtype=float)
    try:
        values, vectors = eigsh(pencil.K, k=1, M=pencil.M, sigma=0.0, which="LM", OPinv=inverse,
                                v0=pencil.start_vector(cfg.seed), tol=0.0, maxiter=cfg.maxit)
    except ArpackNoConvergence as e:
        best = float(np.min(e.eigenvalues)) if len(e.eigenvalues) else None
        raise NoConvergenceError("Lanczos did not converge after {} inverse solves".format(counter["solves"]),
                                 best=best, iterations=counter["solves"])
    return float(values[0]), vectors[:, 0], counter["solves"]


def _inverse_power(pencil, cfg):
    """
    Inverse power iteration with Jacobi-preconditioned CG inner solves, stopped on the eigen-residual.
    """
    preconditioner = sp.diags(1.0 / pencil.K.diagonal())
    f = pencil.start_vector(cfg.seed)
    f = f / np.sqrt(f @ (pencil.M @ f))
    lam = pencil.rayleigh(f)
    residual = pencil.residual(lam, f)
    for iteration in range(1, cfg.maxit + 1):
        y, info = cg(pencil.K, pencil.M @ f, x0=f / lam, rtol=cfg.inner_tol, atol=0.0,
                     maxiter=10 * pencil.size, M=preconditioner)
        if info != 0:
            raise NoConvergenceError("Inner CG failed at outer iteration {} (info {})".format(iteration, info),
                                     best=lam, residual=residual, iterations=iteration)
        f = y / np.sqrt(y @ (pencil.M @ y))
        lam = pencil.rayleigh(f)
        residual = pencil.residual(lam, f)
        logger.debug("Inverse iteration %d: lambda %.12g, residual %.3e", iteration, lam, residual)
        if residual <= cfg.tol:
            return lam, f, iteration
    raise NoConvergenceError("Inverse iteration stopped at residual {} after {} iterations".format(residual, cfg.maxit),
                             best=lam, residual=residual, iterations=cfg.maxit)


def discrete_constant(grid, v, cfg=None, quad_order=DEFAULT_ORDER):
    """
    Discrete Poincare constant C_h = 1/sqrt(lambda_min) of K f = lambda M f, K = D^T W D, M = S^T W S,
    both restricted to the dofs off the inflow boundary.
    """
    cfg = cfg if cfg is not None else EigenConfig()
    pencil = ConstrainedPencil(grid, v, quad_order)
    if pencil.size == 0:
        raise InvalidArgumentError("Every dof is constrained, the eigenproblem is empty")
    if cfg.method == INVERSE_POWER:
        lam, f, iterations = _inverse_power(pencil, cfg)
    elif pencil.size <= DENSE_LIMIT:
        lam, f, iterations = _dense(pencil)
    else:
        lam, f, iterations = _shift_invert(pencil, cfg)

    residual = pencil.residual(lam, f)
    if not residual <= cfg.tol:
        raise NoConvergenceError("Eigen-residual {} above tolerance {}".format(residual, cfg.tol),
                                 best=lam, residual=residual, iterations=iterations)
    if not lam > 0:
        raise NoConvergenceError("Non-positive smallest eigenvalue {}".format(lam), best=lam, residual=residual,
                                 iterations=iterations)
    result = RayleighResult(lam, 1.0 / np.sqrt(lam), iterations, residual, 2.0 * grid.T, cfg.method, f)
    logger.info("v=%s T=%g grid %s: lambda_min %.12g, C_h %.12g (2T = %g)", list(np.atleast_1d(v)), grid.T,
                grid.cells, lam, result.C_h, result.bound)
    return result


def reference_constant_1d(T, nt):
    """
    Dense oracle: the Poincare constant of the time-only Q1 problem with f(0) = 0, which is the v = 0 constant
    of every space-time grid with the same time cells.
    """
    ht = T / nt
    n = nt + 1
    K = np.zeros((n, n))
    M = np.zeros((n, n))
    for cell in range(nt):
        idx = np.ix_([cell, cell + 1], [cell, cell + 1])
        K[idx] += np.array([[1.0, -1.0], [-1.0, 1.0]]) / ht
        M[idx] += np.array([[2.0, 1.0], [1.0, 2.0]]) * ht / 6.0
    values = scipy.linalg.eigh(K[1:, 1:], M[1:, 1:], eigvals_only=True)
    return 1.0 / np.sqrt(values[0])


@dataclass(frozen=True)
class PoincareCase:
    v: Tuple[float, ...]
    T: float
    nt: int
    nx: Tuple[int, ...]
    lower: Tuple[float, ...] = (0.0,)
    upper: Tuple[float, ...] = (1.0,)


def _poincare_task(params):
    case, cfg = params
    grid = build_grid(case.T, SpaceDomain(case.lower, case.upper), case.nt, case.nx)
    return case, discrete_constant(grid, case.v, cfg)


def sweep(cases, cfg=None, enable_parallel=False):
    """
    Discrete constants for every case, returned in the order of `cases`.
    """
    cfg = cfg if cfg is not None else EigenConfig()
    return run_sweep(_poincare_task, [(case, cfg) for case in cases], enable_parallel)


def sweep_rows(results):
    rows = []
    for case, result in results:
        rows.append([list(case.v), case.T, case.nt, list(case.nx), result.lambda_min, result.C_h, result.bound,
                     result.passed])
    return SWEEP_HEADER, rows


def _face_points(grid, axis, side, order):
    """Gauss points and weights on one face of the space-time box, composite over the grid cells."""
    bounds = [(0.0, grid.T)] + list(zip(grid.domain.lower, grid.domain.upper))
    return face_gauss(bounds, axis, side, order, grid.cells)


def _context(grid, points, v):
    ctx = {"t": points[:, 0]}
    for i, name in enumerate(grid.domain.names):
        ctx[name] = points[:, i + 1]
    ctx.update(velocity_bindings(v))
    return ctx


def proof_identity_check(f, v, grid, order=6, fd_step=1e-5):
    """
    Replays the weight-function argument with w = t - T: the interior integral of (d/dt + v.grad_x)(w f^2) must
    equal the outflow flux integral of w f^2 (a.n), and both are <= 0 when f vanishes on the inflow boundary.
    """
    v = as_velocity(v, grid.dim)
    faces = classify_faces(grid, v)
    direction = np.concatenate([[1.0], v])

    def weighted_square(points):
        values = evaluate_array(f, _context(grid, points, v), (len(points),))
        return (points[:, 0] - grid.T) * values * values

    inflow_max = 0.0
    for face in faces.of_kind(INFLOW):
        points, _ = _face_points(grid, face.axis, face.side, order)
        nodes = grid.node_coordinates()[face_nodes(grid, face.axis, face.side)]
        samples = np.concatenate([points, nodes])
        values = evaluate_array(f, _context(grid, samples, v), (len(samples),))
        inflow_max = max(inflow_max, float(np.max(np.abs(values))))
    admissible = inflow_max <= INFLOW_TOLERANCE
    if not admissible:
        logger.warning("Test function does not vanish on the inflow boundary: max|f| = %g", inflow_max)

    bounds = [(0.0, grid.T)] + list(zip(grid.domain.lower, grid.domain.upper))
    points, weights = tensor_gauss(bounds, order, grid.cells)
    h = fd_step * max(1.0, float(np.max(np.abs(np.asarray(bounds)))))
    derivative = (weighted_square(points + h * direction) - weighted_square(points - h * direction)) / (2.0 * h)
    interior = float(np.dot(weights, derivative))

    boundary = 0.0
    for face in faces.of_kind(OUTFLOW):
        face_points, face_weights = _face_points(grid, face.axis, face.side, order)
        boundary += face.flux * float(np.dot(face_weights, weighted_square(face_points)))

    w_sup = float(np.max(np.abs(grid.axis_coordinates(0) - grid.T)))
    return WeightCheckReport(interior, boundary, abs(interior - boundary), bool(interior <= IDENTITY_TOLERANCE),
                             admissible, inflow_max, w_sup)
