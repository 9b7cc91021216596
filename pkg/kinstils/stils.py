# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

"""
Space-time least-squares (STILS) solver: minimise ||a.grad f - G|| over Q1 functions vanishing on the inflow
boundary. The normal equations K f = b, K = D^T W D, b = D^T W G, are solved by preconditioned CG.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from .exceptions import InconsistencyError, InvalidArgumentError, NoConvergenceError
from .geometry import DEFAULT_EPS, build_grid, classify_faces, constrained_dofs
from .lifting import lift
from .transport import (assemble_advection, assemble_basis, gauss_rule, l2_error, l2_norm, sample,
                        weighted_gram, DEFAULT_ORDER)

logger = logging.getLogger(__name__)

STABILITY_SLACK = 1e-8
CG_RESTARTS = 3


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    maxit: Optional[int] = None
    jacobi: bool = True

    def __post_init__(self):
        if not 0 < self.tol < 1:
            raise InvalidArgumentError("Solver tolerance must be in (0, 1), got {}".format(self.tol))
        if self.maxit is not None and self.maxit < 1:
            raise InvalidArgumentError("Solver max iterations must be >= 1, got {}".format(self.maxit))


@dataclass(frozen=True, eq=False)
class NormalSystem:
    K: sp.csr_matrix = field(repr=False)
    b: np.ndarray = field(repr=False)
    free: np.ndarray = field(repr=False)
    ndof: int
    advection: object = field(repr=False)
    basis: object = field(repr=False)
    g_samples: np.ndarray = field(repr=False)

    @property
    def size(self):
        return len(self.free)

    def expand(self, reduced):
        full = np.zeros(self.ndof)
        full[self.free] = reduced
        return full

    def reduce(self, full):
        return np.asarray(full)[self.free]


@dataclass(frozen=True, eq=False)
class Solution:
    coefficients: np.ndarray = field(repr=False)
    iterations: int
    residual: float
    l2_f: float
    l2_residual: float


@dataclass(frozen=True)
class StabilityReport:
    ratio: Optional[float]
    bound: float
    passed: bool


@dataclass(frozen=True)
class CoercivityReport:
    energy: float
    lower: float
    passed: bool


@dataclass(frozen=True, eq=False)
class TransportCase:
    G: object
    u0: object
    ub: object
    v: tuple
    grid: object
    cfg: SolverConfig = SolverConfig()
    quad_order: int = DEFAULT_ORDER
    eps: float = DEFAULT_EPS


@dataclass(frozen=True, eq=False)
class TransportResult:
    u: np.ndarray = field(repr=False)
    f: Solution = None
    g: object = None
    system: NormalSystem = field(default=None, repr=False)
    g_norm: float = 0.0


def assemble_system(advection, basis, g_samples, constraints):
    g_samples = np.asarray(g_samples, dtype=float)
    if g_samples.shape != (basis.nquad,):
        raise InvalidArgumentError("Expected {} right-hand side samples, got shape {}"
                                   .format(basis.nquad, g_samples.shape))
    if not np.all(np.isfinite(g_samples)):
        raise InvalidArgumentError("Right-hand side has {} non-finite samples"
                                   .format(int(np.sum(~np.isfinite(g_samples)))))
    if advection.D.shape != basis.S.shape:
        raise InvalidArgumentError("Advection samples {} do not match basis samples {}"
                                   .format(advection.D.shape, basis.S.shape))
    free = constraints.free()
    K_full = weighted_gram(advection.D, basis.W)
    K = K_full[free][:, free].tocsr()
    b = (advection.D.T @ (basis.W * g_samples))[free]
    logger.info("Assembled normal system with %d unknowns (%d constrained)", len(free), len(constraints))
    return NormalSystem(K, b, free, basis.ndof, advection, basis, g_samples)


def _solution(system, reduced, iterations, residual):
    f = system.expand(reduced)
    l2_f = l2_norm(f, system.basis, "nodal")
    l2_residual = l2_norm(system.advection.D @ f - system.g_samples, system.basis, "samples")
    return Solution(f, iterations, residual, l2_f, l2_residual)


def cg_solve(system, cfg=None):
    cfg = cfg if cfg is not None else SolverConfig()
    b = system.b
    b_norm = np.linalg.norm(b)
    if b_norm == 0:
        return _solution(system, np.zeros(system.size), 0, 0.0)

    maxit = cfg.maxit if cfg.maxit is not None else 10 * system.size
    preconditioner = None
    if cfg.jacobi:
        diagonal = system.K.diagonal()
        if np.any(diagonal <= 0):
            raise InvalidArgumentError("Normal matrix has a non-positive diagonal entry, it is not SPD")
        preconditioner = sp.diags(1.0 / diagonal)

    counter = {"iterations": 0}

    def count(_):
        counter["iterations"] += 1

    x = np.zeros(system.size)
    residual = 1.0
    for attempt in range(CG_RESTARTS):
        remaining = maxit - counter["iterations"]
        if remaining < 1:
            break
        x, info = cg(system.K, b, x0=x, rtol=cfg.tol, atol=0.0, maxiter=remaining, M=preconditioner,
                     callback=count)
        residual = float(np.linalg.norm(b - system.K @ x) / b_norm)
        if residual <= cfg.tol:
            break
        if info < 0:
            break
        logger.debug("CG attempt %d stopped at relative residual %g", attempt, residual)

    if not residual <= cfg.tol:
        raise NoConvergenceError("CG did not reach tolerance {} in {} iterations (residual {})"
                                 .format(cfg.tol, counter["iterations"], residual),
                                 best=system.expand(x), residual=residual, iterations=counter["iterations"])
    logger.info("CG converged in %d iterations, relative residual %.3e", counter["iterations"], residual)
    return _solution(system, x, counter["iterations"], residual)


def solve_transport(case):
    """
    Solves (d/dt + v.grad_x) u = G with u = u0 at t=0 and u = ub on the inflow boundary: u = f + g where g
    is the characteristic lifting and f solves the homogeneous STILS problem.
    """
    grid = case.grid
    faces = classify_faces(grid, case.v, case.eps)
    constraints = constrained_dofs(grid, faces)
    rule = gauss_rule(case.quad_order, grid.dim + 1)
    basis = assemble_basis(grid, rule)
    advection = assemble_advection(grid, case.v, rule)

    g_samples = sample(case.G, basis, case.v)
    system = assemble_system(advection, basis, g_samples, constraints)
    solution = cg_solve(system, case.cfg)
    lifted = lift(case.u0, case.ub, case.v, grid)
    u = solution.coefficients + lifted.coefficients
    return TransportResult(u, solution, lifted, system, l2_norm(g_samples, basis, "samples"))


def stability_check(f, g_norm, T, tol=1e-10):
    """
    Checks ||f|| <= 2T ||G||.
    """
    bound = 2.0 * T
    if g_norm == 0:
        if f.l2_f > tol:
            raise InconsistencyError("Zero right-hand side but ||f|| = {}".format(f.l2_f))
        return StabilityReport(None, bound, True)
    ratio = f.l2_f / g_norm
    passed = bool(ratio <= bound * (1 + STABILITY_SLACK))
    if not passed:
        logger.warning("Stability bound violated: ||f||/||G|| = %.17g > 2T = %g", ratio, bound)
    return StabilityReport(float(ratio), bound, passed)


def galerkin_residual(system, solution):
    """max_e |e^T (K f - b)| / ||b|| over the reduced unit vectors e."""
    b_norm = np.linalg.norm(system.b)
    if b_norm == 0:
        return 0.0
    r = system.K @ system.reduce(solution.coefficients) - system.b
    return float(np.max(np.abs(r)) / b_norm)


def coercivity_check(system, solution, T):
    """B(f,f) = ||a.grad f||^2 >= ||f||^2 / (4 T^2)."""
    energy = l2_norm(system.advection.D @ solution.coefficients, system.basis, "samples") ** 2
    lower = solution.l2_f ** 2 / (4.0 * T * T)
    return CoercivityReport(energy, lower, bool(energy >= lower * (1 - STABILITY_SLACK)))


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    h: float
    error: float
    order: Optional[float]
    ratio: Optional[float]
    stable: bool


@dataclass(frozen=True)
class ConvergenceStudy:
    rows: List[ConvergenceRow]

    @property
    def observed_order(self):
        """Least-squares slope of log(error) against log(h)."""
        if len(self.rows) < 2:
            return None
        h = np.log([row.h for row in self.rows])
        e = np.log([row.error for row in self.rows])
        return float(np.polyfit(h, e, 1)[0])

    @property
    def decreasing(self):
        errors = [row.error for row in self.rows]
        return all(b < a for a, b in zip(errors, errors[1:]))


def convergence_study(G, u0, ub, v, exact, T, domain, ladder, cfg=None, quad_order=DEFAULT_ORDER):
    """
    Solves the same case on nt = nx = n for every n of the ladder and measures the L2 error against `exact`.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    rows = []
    previous = None
    for n in ladder:
        grid = build_grid(T, domain, n, [n] * domain.dim)
        result = solve_transport(TransportCase(G, u0, ub, v, grid, cfg, quad_order))
        error = l2_error(result.u, exact, result.system.basis, v)
        h = max(grid.widths)
        order = None
        if previous is not None and error > 0 and previous[1] > 0:
            order = float(np.log(previous[1] / error) / np.log(previous[0] / h))
        stability = stability_check(result.f, result.g_norm, T)
        logger.info("Refinement n=%d: L2 error %.6e, order %s", n, error, order)
        rows.append(ConvergenceRow(int(n), float(h), float(error), order, stability.ratio, stability.passed))
        previous = (h, error)
    return ConvergenceStudy(rows)


def solution_rows(grid, result):
    """Header and one row per node, row-major in (t, x, y)."""
    coords = grid.node_coordinates()
    header = ["t"] + list(grid.domain.names) + ["u", "f", "g"]
    rows = np.column_stack([coords, result.u, result.f.coefficients, result.g.coefficients])
    return header, rows
