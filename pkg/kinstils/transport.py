# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

"""
Continuous multilinear (Q1) elements on the space-time tensor grid, sampled at Gauss points.
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from .exceptions import InvalidArgumentError
from .expr import evaluate_array
from .geometry import as_velocity

logger = logging.getLogger(__name__)

VELOCITY_NAMES = ("vx", "vy", "vz")

DEFAULT_ORDER = 2


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Tensor Gauss-Legendre rule on the reference cell [0,1]^ndim with `order` points per axis.
    """
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    order: int
    ndim: int


def gauss_points_1d(order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def gauss_rule(order=DEFAULT_ORDER, ndim=2):
    if order < 2:
        raise InvalidArgumentError("Quadrature order must be >= 2, got {}".format(order))
    nodes, weights = gauss_points_1d(order)
    mesh = np.meshgrid(*([nodes] * ndim), indexing="ij")
    wmesh = np.meshgrid(*([weights] * ndim), indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    w = np.prod(np.stack([m.ravel() for m in wmesh], axis=1), axis=1)
    return QuadratureRule(points, w, order, ndim)


def tensor_gauss(bounds, order, cells=1):
    """
    Composite tensor Gauss-Legendre points and weights on a box.
    :param bounds: list of (lower, upper) per axis
    :param order: points per axis and sub-interval
    :param cells: sub-intervals, one count for every axis or a list with one per axis
    :return: (npoints, ndim) points and (npoints,) weights
    """
    nodes, weights = gauss_points_1d(order)
    counts = [int(cells)] * len(bounds) if np.isscalar(cells) else [int(c) for c in cells]
    axis_points = []
    axis_weights = []
    for (lo, hi), n in zip(bounds, counts):
        h = (hi - lo) / n
        starts = lo + np.arange(n) * h
        axis_points.append((starts[:, None] + h * nodes[None, :]).ravel())
        axis_weights.append(np.tile(h * weights, n))
    mesh = np.meshgrid(*axis_points, indexing="ij")
    wmesh = np.meshgrid(*axis_weights, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    w = np.prod(np.stack([m.ravel() for m in wmesh], axis=1), axis=1)
    return points, w


def face_gauss(bounds, axis, side, order, cells=1):
    """
    Composite Gauss points and weights on the face {z[axis] = bounds[axis][side]} of a box.
    """
    counts = [int(cells)] * len(bounds) if np.isscalar(cells) else [int(c) for c in cells]
    others = [b for i, b in enumerate(bounds) if i != axis]
    other_counts = [c for i, c in enumerate(counts) if i != axis]
    if others:
        points, weights = tensor_gauss(others, order, other_counts)
    else:
        points, weights = np.zeros((1, 0)), np.ones(1)
    return np.insert(points, axis, bounds[axis][side], axis=1), weights


@dataclass(frozen=True, eq=False)
class BasisEval:
    grid: object
    rule: QuadratureRule
    S: sp.csr_matrix = field(repr=False)
    W: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)

    @property
    def nquad(self):
        return self.S.shape[0]

    @property
    def ndof(self):
        return self.S.shape[1]

    def context(self, v=None):
        """Variable bindings at the quadrature points."""
        ctx = {"t": self.points[:, 0]}
        for i, name in enumerate(self.grid.domain.names):
            ctx[name] = self.points[:, i + 1]
        if v is not None:
            ctx.update(velocity_bindings(v))
        return ctx


@dataclass(frozen=True, eq=False)
class AdvectionSamples:
    D: sp.csr_matrix = field(repr=False)
    velocity: Tuple[float, ...]


class _CellLayout(object):
    """
    Local-to-global numbering of the Q1 element and its shape functions at the rule's points.
    """

    def __init__(self, grid, rule):
        ndim = grid.dim + 1
        if rule.ndim != ndim:
            raise InvalidArgumentError("Quadrature rule is {}-dimensional, grid needs {}".format(rule.ndim, ndim))
        self.ndim = ndim
        self.corners = np.indices((2,) * ndim).reshape(ndim, -1).T
        self.cell_index = np.indices(grid.cells).reshape(ndim, -1).T
        nodes = self.cell_index[:, None, :] + self.corners[None, :, :]
        self.cell_nodes = np.ravel_multi_index(tuple(np.moveaxis(nodes, -1, 0)), grid.shape)

        xi = rule.points
        # 1D hat values and reference derivatives, indexed [q, local node, axis]
        hat = np.where(self.corners[None, :, :] == 1, xi[:, None, :], 1.0 - xi[:, None, :])
        dhat = np.where(self.corners[None, :, :] == 1, 1.0, -1.0) * np.ones_like(hat)
        self.values = np.prod(hat, axis=2)
        widths = np.asarray(grid.widths)
        self.gradients = []
        for axis in range(ndim):
            others = np.prod(np.delete(hat, axis, axis=2), axis=2)
            self.gradients.append(dhat[:, :, axis] * others / widths[axis])

        self.nloc = self.corners.shape[0]
        self.nq = xi.shape[0]
        self.ncells = self.cell_index.shape[0]
        self.rows = np.broadcast_to((np.arange(self.ncells)[:, None] * self.nq + np.arange(self.nq)[None, :])[:, :, None],
                                    (self.ncells, self.nq, self.nloc))
        self.cols = np.broadcast_to(self.cell_nodes[:, None, :], (self.ncells, self.nq, self.nloc))

    def matrix(self, local, shape):
        data = np.broadcast_to(local[None, :, :], (self.ncells, self.nq, self.nloc))
        return sp.csr_matrix((data.ravel(), (self.rows.ravel(), self.cols.ravel())), shape=shape)


def velocity_bindings(v):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    return {VELOCITY_NAMES[i]: float(v[i]) for i in range(len(v))}


def assemble_basis(grid, rule=None):
    rule = rule if rule is not None else gauss_rule(DEFAULT_ORDER, grid.dim + 1)
    layout = _CellLayout(grid, rule)
    nquad = layout.ncells * layout.nq
    S = layout.matrix(layout.values, (nquad, grid.ndof))

    widths = np.asarray(grid.widths)
    W = np.tile(rule.weights * np.prod(widths), layout.ncells)

    origins = np.stack([grid.axis_coordinates(axis)[layout.cell_index[:, axis]] for axis in range(layout.ndim)],
                       axis=1)
    points = (origins[:, None, :] + rule.points[None, :, :] * widths[None, None, :]).reshape(nquad, layout.ndim)
    logger.debug("Assembled basis samples at %d quadrature points", nquad)
    return BasisEval(grid, rule, S, W, points)


def assemble_advection(grid, v, rule=None):
    """
    Samples of (d/dt + v.grad_x) phi_j at the quadrature points, same sparsity as the basis samples.
    """
    rule = rule if rule is not None else gauss_rule(DEFAULT_ORDER, grid.dim + 1)
    v = as_velocity(v, grid.dim)
    layout = _CellLayout(grid, rule)
    local = layout.gradients[0].copy()
    for i, component in enumerate(v):
        local = local + component * layout.gradients[i + 1]
    D = layout.matrix(local, (layout.ncells * layout.nq, grid.ndof))
    return AdvectionSamples(D, tuple(float(c) for c in v))


def interpolate(field, grid, v_binding=()):
    ctx = grid.node_context()
    ctx.update(velocity_bindings(v_binding))
    return evaluate_array(field, ctx, (grid.ndof,))


def sample(field, basis, v=()):
    return evaluate_array(field, basis.context(v), (basis.nquad,))


NODAL = "nodal"
SAMPLES = "samples"
VALUE_KINDS = (NODAL, SAMPLES)


def quadrature_values(values, basis, kind):
    """
    Quadrature-point samples of `values`, read as nodal coefficients (`kind="nodal"`) or as samples already at
    the quadrature points (`kind="samples"`).
    """
    if kind not in VALUE_KINDS:
        raise InvalidArgumentError("Invalid value kind: {}, expected one of {}".format(kind, ", ".join(VALUE_KINDS)))
    values = np.asarray(values, dtype=float)
    if kind == NODAL:
        if values.shape != (basis.ndof,):
            raise InvalidArgumentError("Expected {} coefficients, got shape {}".format(basis.ndof, values.shape))
        return basis.S @ values
    if values.shape != (basis.nquad,):
        raise InvalidArgumentError("Expected {} samples, got shape {}".format(basis.nquad, values.shape))
    return values


def l2_norm(values, basis, kind):
    q = quadrature_values(values, basis, kind)
    return float(np.sqrt(np.dot(basis.W, q * q)))


def l2_error(coeffs, exact, basis, v=()):
    return l2_norm(quadrature_values(coeffs, basis, NODAL) - sample(exact, basis, v), basis, SAMPLES)


def graph_norm(coeffs, basis, advection):
    """Norm of H(a,R): ||f|| + ||a.grad f||."""
    return l2_norm(coeffs, basis, NODAL) + l2_norm(advection.D @ coeffs, basis, SAMPLES)


def weighted_gram(A, W):
    """
    A^T diag(W) A, assembled from one side so the result is symmetric.
    """
    root = sp.diags(np.sqrt(W)) @ A
    gram = (root.T @ root).tocsr()
    return ((gram + gram.T) * 0.5).tocsr()


def mass_matrix(basis):
    return weighted_gram(basis.S, basis.W)
