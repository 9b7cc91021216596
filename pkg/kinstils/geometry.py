# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

INFLOW = "inflow"
OUTFLOW = "outflow"
CHARACTERISTIC = "characteristic"

DEFAULT_EPS = 1e-12

SPACE_NAMES = ("x", "y")


@dataclass(frozen=True)
class SpaceDomain:
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or len(self.lower) not in (1, 2):
            raise InvalidArgumentError("Domain bounds must have matching lengths 1 or 2, got {} and {}"
                                       .format(len(self.lower), len(self.upper)))
        for axis, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if not np.isfinite(lo) or not np.isfinite(hi) or not lo < hi:
                raise InvalidArgumentError("Inverted or non-finite bounds on axis {}: [{}, {}]".format(axis, lo, hi))

    @classmethod
    def box(cls, bounds):
        """
        :param bounds: list of [lower, upper] pairs, one per spatial axis
        """
        return cls(tuple(float(b[0]) for b in bounds), tuple(float(b[1]) for b in bounds))

    @property
    def dim(self):
        return len(self.lower)

    @property
    def measure(self):
        return float(np.prod(np.subtract(self.upper, self.lower)))

    @property
    def names(self):
        return SPACE_NAMES[:self.dim]

    def contains(self, point, tol=1e-12):
        point = np.asarray(point, dtype=float)
        return bool(np.all(point >= np.asarray(self.lower) - tol) and np.all(point <= np.asarray(self.upper) + tol))


@dataclass(frozen=True)
class SpaceTimeGrid:
    T: float
    domain: SpaceDomain
    nt: int
    nx: Tuple[int, ...]

    @property
    def dim(self):
        return self.domain.dim

    @property
    def ht(self):
        return self.T / self.nt

    @property
    def hx(self):
        return tuple((hi - lo) / n for lo, hi, n in zip(self.domain.lower, self.domain.upper, self.nx))

    @property
    def shape(self):
        """Nodes per axis, time first."""
        return (self.nt + 1,) + tuple(n + 1 for n in self.nx)

    @property
    def cells(self):
        return (self.nt,) + tuple(self.nx)

    @property
    def ndof(self):
        return int(np.prod(self.shape))

    @property
    def ncells(self):
        return int(np.prod(self.cells))

    @property
    def volume(self):
        return self.T * self.domain.measure

    @property
    def widths(self):
        return (self.ht,) + self.hx

    def axis_coordinates(self, axis):
        """
        Node coordinates along one axis (0 = time); each value is lower + i*h, one multiplication per node.
        """
        if axis == 0:
            coords = np.arange(self.nt + 1) * self.ht
            coords[-1] = self.T
            return coords
        lo = self.domain.lower[axis - 1]
        hi = self.domain.upper[axis - 1]
        n = self.nx[axis - 1]
        coords = lo + np.arange(n + 1) * ((hi - lo) / n)
        coords[-1] = hi
        return coords

    def node_coordinates(self):
        """
        (ndof, 1 + dim) array of node coordinates in row-major (t, x, y) order.
        """
        axes = [self.axis_coordinates(axis) for axis in range(self.dim + 1)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def node_index(self, *multi_index):
        return int(np.ravel_multi_index(multi_index, self.shape))

    def node_context(self):
        """Variable bindings for expression evaluation at every node."""
        coords = self.node_coordinates()
        ctx = {"t": coords[:, 0]}
        for i, name in enumerate(self.domain.names):
            ctx[name] = coords[:, i + 1]
        return ctx


def build_grid(T, domain, nt, nx):
    if isinstance(nx, (int, np.integer)):
        nx = [nx]
    nx = tuple(int(n) for n in nx)
    if not isinstance(domain, SpaceDomain):
        raise InvalidArgumentError("Expected a SpaceDomain, got {}".format(type(domain).__name__))
    if not (np.isfinite(T) and T > 0):
        raise InvalidArgumentError("Final time T must be positive, got {}".format(T))
    if int(nt) < 1:
        raise InvalidArgumentError("Number of time cells must be >= 1, got {}".format(nt))
    if len(nx) != domain.dim:
        raise InvalidArgumentError("Expected {} spatial cell counts, got {}".format(domain.dim, len(nx)))
    if any(n < 1 for n in nx):
        raise InvalidArgumentError("Number of spatial cells must be >= 1 on every axis, got {}".format(list(nx)))
    grid = SpaceTimeGrid(float(T), domain, int(nt), nx)
    logger.debug("Built space-time grid with %d nodes and %d cells", grid.ndof, grid.ncells)
    return grid


@dataclass(frozen=True)
class Face:
    """
    One face of the boundary of (0,T) x Omega. axis 0 is time, side 0 is the lower bound.
    """
    axis: int
    side: int
    normal: Tuple[float, ...]
    flux: float
    kind: str


@dataclass(frozen=True)
class FaceClassification:
    grid: SpaceTimeGrid
    velocity: Tuple[float, ...]
    faces: Tuple[Face, ...]
    eps: float = DEFAULT_EPS

    def of_kind(self, kind):
        return [face for face in self.faces if face.kind == kind]

    def face(self, axis, side):
        for face in self.faces:
            if face.axis == axis and face.side == side:
                return face
        raise InvalidArgumentError("No face on axis {} side {}".format(axis, side))


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    indices: np.ndarray = field(repr=False)
    ndof: int

    def __len__(self):
        return len(self.indices)

    def __contains__(self, index):
        pos = np.searchsorted(self.indices, index)
        return bool(pos < len(self.indices) and self.indices[pos] == index)

    def free(self):
        """Indices of the unconstrained dofs, ascending."""
        mask = np.ones(self.ndof, dtype=bool)
        mask[self.indices] = False
        return np.flatnonzero(mask)


def as_velocity(v, dim):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1 or len(v) != dim:
        raise InvalidArgumentError("Velocity must have {} component(s), got {}".format(dim, v.tolist()))
    if not np.all(np.isfinite(v)):
        raise InvalidArgumentError("Velocity must be finite, got {}".format(v.tolist()))
    return v


def classify_faces(grid, v, eps=DEFAULT_EPS):
    """
    Classifies every boundary face of the space-time box by the sign of a.n = n_t + v.n_x.
    """
    v = as_velocity(v, grid.dim)
    if eps < 0:
        raise InvalidArgumentError("eps must be >= 0, got {}".format(eps))
    faces = []
    for axis in range(grid.dim + 1):
        for side in (0, 1):
            normal = np.zeros(grid.dim + 1)
            normal[axis] = -1.0 if side == 0 else 1.0
            flux = float(normal[0] + np.dot(v, normal[1:]))
            if flux < -eps:
                kind = INFLOW
            elif flux > eps:
                kind = OUTFLOW
            else:
                kind = CHARACTERISTIC
            faces.append(Face(axis, side, tuple(normal), flux, kind))
    return FaceClassification(grid, tuple(float(c) for c in v), tuple(faces), eps)


def face_nodes(grid, axis, side):
    """Mask of the nodes lying on the closure of one face."""
    index = np.indices(grid.shape).reshape(grid.dim + 1, -1)
    target = 0 if side == 0 else grid.shape[axis] - 1
    return index[axis] == target


def constrained_dofs(grid, faces):
    """
    Nodes on the closure of at least one inflow face, i.e. the initial-time nodes together with the nodes
    of the spatial inflow boundary.
    """
    if faces.grid != grid:
        raise InvalidArgumentError("Face classification was built for a different grid")
    mask = np.zeros(grid.ndof, dtype=bool)
    for face in faces.of_kind(INFLOW):
        mask |= face_nodes(grid, face.axis, face.side)
    return ConstraintSet(np.flatnonzero(mask), grid.ndof)
