# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

import copy
import json
import logging
import os
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import yaml
from deepmerge import Merger

from .exceptions import ConfigError, KinstilsError
from .expr import parse
from .geometry import SpaceDomain, as_velocity, build_grid
from .interpolation import resolve_interpolations
from .poincare import EigenConfig, PoincareCase
from .stils import SolverConfig, TransportCase
from .sweep import expand_grid
from .vlasov import EMFields, VlasovCase, VlasovTestFunction

logger = logging.getLogger(__name__)

EXPRESSION_KEYS = ("G", "u0", "ub")

DEFAULTS = {
    "T": 1.0,
    "domain": [[0.0, 1.0]],
    "nt": 16,
    "nx": 16,
    "v": None,
    "G": "0",
    "u0": "0",
    "ub": "0",
    "exact": None,
    "ladder": [8, 16, 32],
    "quad_order": 2,
    "eps": 1e-12,
    "output": None,
    "solver": {"tol": 1e-10, "maxit": None, "jacobi": True},
    "eigen": {"tol": 1e-8, "maxit": 200, "seed": 42, "method": "shift-invert"},
    "poincare": {"sweep": None},
    "vlasov": {
        "T": "{{T}}",
        "quad_order": 6,
        "cells": 2,
        "fields": [{"name": "free", "E": ["0", "0", "0"], "B": ["0", "0", "0"]}],
        "functions": [],
        "trajectory": None,
    },
}


@dataclass(frozen=True, eq=False)
class TrajectorySettings:
    x0: Tuple[float, ...]
    v0: Tuple[float, ...]
    dt: float
    nsteps: int
    fields: str


@dataclass(frozen=True, eq=False)
class VlasovSettings:
    T: float
    quad_order: int
    cells: int
    fields: Tuple[Tuple[str, EMFields], ...]
    functions: Tuple[VlasovTestFunction, ...]
    trajectory: Optional[TrajectorySettings] = None

    def field_named(self, name):
        for candidate, fields in self.fields:
            if candidate == name:
                return fields
        raise ConfigError("Unknown vlasov field set '{}'".format(name))

    def cases(self, domain):
        return [VlasovCase("{}/{}".format(name, testfn.name), testfn, fields, self.T, domain, self.quad_order,
                           self.cells)
                for name, fields in self.fields for testfn in self.functions]


@dataclass(frozen=True, eq=False)
class CaseConfig:
    """
    A validated case: every expression parsed and every numeric field checked.
    """
    T: float
    domain: SpaceDomain
    nt: int
    nx: Tuple[int, ...]
    v: Tuple[float, ...]
    G: object
    u0: object
    ub: object
    exact: Optional[object]
    sources: Dict[str, str]
    ladder: Tuple[int, ...]
    quad_order: int
    eps: float
    solver: SolverConfig
    eigen: EigenConfig
    sweep: Tuple[PoincareCase, ...]
    vlasov: VlasovSettings
    output: Optional[str]
    data: dict = field(repr=False, default_factory=dict)

    def grid(self):
        return build_grid(self.T, self.domain, self.nt, self.nx)

    def transport_case(self):
        return TransportCase(self.G, self.u0, self.ub, self.v, self.grid(), self.solver, self.quad_order, self.eps)


def _kind(value):
    if isinstance(value, dict):
        return "mapping"
    if isinstance(value, list):
        return "list"
    return "scalar"


class CaseConfigLoader(object):
    """
    Loads a case file together with the files it `extends`, deep merges them over the built-in defaults
    (less specific first) and resolves `{{key.path}}` references.
    """

    def __init__(self, list_strategy="override"):
        self.type_strategies = [(list, [list_strategy]), (dict, ["merge"])]
        self.fallback_strategies = ["override"]
        self.type_conflict_strategies = ["override"]

    @staticmethod
    def read_file(path):
        try:
            with open(path, "r", encoding="utf-8") as f:
                if path.endswith((".yaml", ".yml")):
                    content = yaml.load(f, Loader=yaml.SafeLoader)
                else:
                    content = json.load(f, object_pairs_hook=OrderedDict)
        except (OSError, ValueError, yaml.YAMLError) as e:
            raise ConfigError("Failed to read config {}: {}".format(path, e))
        if content is None:
            return {}
        if not isinstance(content, dict):
            raise ConfigError("Config {} must hold a mapping at the top level, got {}"
                              .format(path, type(content).__name__))
        return dict(content)

    def merge_values(self, values, content):
        merger = Merger(self.type_strategies, self.fallback_strategies, self.type_conflict_strategies)
        for key, value in content.items():
            if key in values and values[key] is not None and value is not None \
                    and (_kind(values[key]) == "mapping") != (_kind(value) == "mapping"):
                raise ConfigError("Failed to merge key '{}', because of mismatch in type: {} vs {}"
                                  .format(key, type(values[key]).__name__, type(value).__name__))
            if key in values and _kind(value) != "scalar" and _kind(values[key]) == _kind(value):
                values[key] = merger.merge(values[key], copy.deepcopy(value))
            else:
                values[key] = copy.deepcopy(value)
        return values

    def load_hierarchy(self, path, seen=()):
        """
        The merged content of `path` and, beneath it, of the files it extends.
        """
        path = os.path.abspath(path)
        if path in seen:
            raise ConfigError("Config {} extends itself".format(path))
        content = self.read_file(path)
        parents = content.pop("extends", None) or []
        if isinstance(parents, str):
            parents = [parents]
        merged = {}
        for parent in parents:
            parent_path = os.path.join(os.path.dirname(path), parent)
            logger.info("Config %s extends %s", path, parent_path)
            self.merge_values(merged, self.load_hierarchy(parent_path, seen + (path,)))
        return self.merge_values(merged, content)

    def generate(self, path=None, overrides=None):
        values = copy.deepcopy(DEFAULTS)
        if path:
            self.merge_values(values, self.load_hierarchy(path))
        if overrides:
            self.merge_values(values, overrides)
        return resolve_interpolations(values)

    def load(self, path=None, overrides=None):
        return build_case(self.generate(path, overrides), path or "<defaults>")


class _Validator(object):

    def __init__(self, data, source):
        self.data = data
        self.source = source

    def get(self, key, convert):
        node = self.data
        for part in key.split("."):
            node = node.get(part) if isinstance(node, dict) else None
        try:
            return convert(node)
        except ConfigError:
            raise
        except (KinstilsError, AttributeError, TypeError, ValueError, KeyError) as e:
            raise ConfigError("Invalid '{}' in {}: {}".format(key, self.source, e))


def _number(value):
    if isinstance(value, str):
        value = float(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError("expected a number, got {!r}".format(value))
    return float(value)


def _integer(value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError("expected an integer, got {!r}".format(value))
    return value


def _counts(value):
    return (_integer(value),) if not isinstance(value, list) else tuple(_integer(n) for n in value)


def _vector(value):
    if isinstance(value, list):
        return tuple(_number(c) for c in value)
    return (_number(value),)


def _expression(value):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = repr(float(value))
    if not isinstance(value, str):
        raise ValueError("expected an expression string, got {!r}".format(value))
    return parse(value)


def _velocity(value, dim):
    if value is None:
        return tuple([0.0] * dim)
    return tuple(float(c) for c in as_velocity(_vector(value), dim))


def _sweep(entry, domain):
    if entry is None:
        return ()
    if not isinstance(entry, dict):
        raise ValueError("expected a mapping of sweep axes, got {!r}".format(entry))
    axes = OrderedDict([("v", entry.get("v", [None])), ("T", entry.get("T", [1.0]))])
    if "n" in entry:
        axes["n"] = entry["n"]
    else:
        axes["nt"] = entry.get("nt", [16])
        axes["nx"] = entry.get("nx", axes["nt"])
    for name, values in axes.items():
        if not isinstance(values, list) or not values:
            raise ValueError("sweep axis '{}' must be a non-empty list".format(name))
    cases = []
    for params in expand_grid(axes):
        nt = _integer(params.get("n", params.get("nt")))
        nx = _counts(params.get("n", params.get("nx")))
        if len(nx) == 1:
            nx = nx * domain.dim
        case = PoincareCase(_velocity(params["v"], domain.dim), _number(params["T"]), nt, nx, domain.lower,
                            domain.upper)
        build_grid(case.T, domain, case.nt, case.nx)
        cases.append(case)
    return tuple(cases)


def _fields(entries):
    result = []
    for i, entry in enumerate(entries or []):
        name = entry.get("name", "fields{}".format(i))
        result.append((name, EMFields.from_strings(tuple(entry.get("E", ("0", "0", "0"))),
                                                   tuple(entry.get("B", ("0", "0", "0"))))))
    if not result:
        raise ValueError("at least one field set is needed")
    return tuple(result)


def _functions(entries):
    result = []
    for i, entry in enumerate(entries or []):
        result.append(VlasovTestFunction.from_string(entry["f"], entry["support_x"], entry.get("support_v"),
                                                     entry.get("name", "f{}".format(i))))
    return tuple(result)


def _trajectory(entry, fields):
    if entry is None:
        return None
    settings = TrajectorySettings(tuple(_number(c) for c in entry["x0"]), tuple(_number(c) for c in entry["v0"]),
                                  _number(entry["dt"]), _integer(entry["nsteps"]),
                                  entry.get("fields", fields[0][0]))
    if len(settings.x0) != 3 or len(settings.v0) != 3:
        raise ValueError("x0 and v0 must have 3 components")
    if not settings.dt > 0 or settings.nsteps < 1:
        raise ValueError("trajectory needs dt > 0 and nsteps >= 1")
    return settings


def build_case(data, source="<defaults>"):
    """
    Validates merged config data into a CaseConfig. Every problem is reported as a ConfigError naming the key.
    """
    check = _Validator(data, source)
    T = check.get("T", _number)
    domain = check.get("domain", SpaceDomain.box)
    nt = check.get("nt", _integer)
    nx = check.get("nx", _counts)
    if len(nx) == 1:
        nx = nx * domain.dim
    try:
        build_grid(T, domain, nt, nx)
    except KinstilsError as e:
        raise ConfigError("Invalid grid in {}: {}".format(source, e))
    v = check.get("v", lambda value: _velocity(value, domain.dim))

    expressions = {key: check.get(key, _expression) for key in EXPRESSION_KEYS}
    exact = check.get("exact", lambda value: None if value is None else _expression(value))
    sources = {key: str(data[key]) for key in EXPRESSION_KEYS}
    if data.get("exact") is not None:
        sources["exact"] = str(data["exact"])

    ladder = check.get("ladder", lambda value: tuple(_integer(n) for n in value))
    if not ladder or any(n < 1 for n in ladder):
        raise ConfigError("Invalid 'ladder' in {}: expected positive cell counts, got {}".format(source, ladder))
    quad_order = check.get("quad_order", _integer)
    if quad_order < 2:
        raise ConfigError("Invalid 'quad_order' in {}: must be >= 2, got {}".format(source, quad_order))
    eps = check.get("eps", _number)
    if eps < 0:
        raise ConfigError("Invalid 'eps' in {}: must be >= 0, got {}".format(source, eps))

    solver = check.get("solver", lambda value: SolverConfig(
        _number(value["tol"]), None if value["maxit"] is None else _integer(value["maxit"]), bool(value["jacobi"])))
    eigen = check.get("eigen", lambda value: EigenConfig(
        _number(value["tol"]), _integer(value["maxit"]), _integer(value["seed"]), str(value["method"])))
    sweep = check.get("poincare.sweep", lambda value: _sweep(value, domain))

    fields = check.get("vlasov.fields", _fields)
    vlasov_T = check.get("vlasov.T", _number)
    if not vlasov_T > 0:
        raise ConfigError("Invalid 'vlasov.T' in {}: must be > 0, got {}".format(source, vlasov_T))
    vlasov_order = check.get("vlasov.quad_order", _integer)
    if vlasov_order < 1:
        raise ConfigError("Invalid 'vlasov.quad_order' in {}: must be >= 1, got {}".format(source, vlasov_order))
    vlasov_cells = check.get("vlasov.cells", _integer)
    if vlasov_cells < 1:
        raise ConfigError("Invalid 'vlasov.cells' in {}: must be >= 1, got {}".format(source, vlasov_cells))
    vlasov = VlasovSettings(vlasov_T, vlasov_order, vlasov_cells, fields,
                            check.get("vlasov.functions", _functions),
                            check.get("vlasov.trajectory", lambda value: _trajectory(value, fields)))
    if vlasov.trajectory is not None:
        check.get("vlasov.trajectory.fields", lambda _: vlasov.field_named(vlasov.trajectory.fields))

    output = data.get("output")
    logger.info("Loaded case from %s: T=%g, domain %s, grid %d x %s, v=%s", source, T, list(domain.lower), nt,
                list(nx), list(v))
    return CaseConfig(T, domain, nt, nx, v, expressions["G"], expressions["u0"], expressions["ub"], exact, sources,
                      ladder, quad_order, eps, solver, eigen, sweep, vlasov, output, data)


def load_case(path=None, overrides=None, list_strategy="override"):
    return CaseConfigLoader(list_strategy).load(path, overrides)
