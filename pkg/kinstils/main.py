# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

import argparse
import logging
import sys
from enum import Enum

import numpy as np

from . import __version__
from .case_config import CaseConfigLoader
from .exceptions import (ConfigError, EvalError, InconsistencyError, IntegrationError, InvalidArgumentError,
                         NoConvergenceError, ParseError)
from .lifting import BOUNDARY, INITIAL, lift, linf_bound_check
from .poincare import PoincareCase, sweep, sweep_rows
from .reports import format_summary, write_csv, write_summary
from .stils import convergence_study, solution_rows, solve_transport, stability_check
from .vlasov import (PhaseState, flow_rk4, max_divergence, ratio_catalog, ratio_rows, speed_drift,
                     trajectory_rows)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BOUND_VIOLATION = 3
EXIT_NO_CONVERGENCE = 4

COMMANDS = ("solve", "lift", "poincare", "vlasov-check", "convergence")


class ListMergeStrategy(Enum):
    append = 'append'
    override = 'override'
    prepend = 'prepend'

    def __str__(self):
        return self.value


class CaseRunner(object):

    def run(self, args):
        parser = self.get_parser()
        opts = parser.parse_args(args)
        logging.basicConfig(level=logging.WARNING if opts.quiet else logging.INFO, stream=sys.stderr,
                            format="%(levelname)s %(name)s: %(message)s")
        try:
            return self.do_run(opts)
        except (ConfigError, InvalidArgumentError, ParseError, EvalError, OSError) as e:
            logger.error("%s", e)
            return EXIT_USAGE
        except InconsistencyError as e:
            logger.error("%s", e)
            return EXIT_BOUND_VIOLATION
        except (NoConvergenceError, IntegrationError) as e:
            logger.error("%s", e)
            return EXIT_NO_CONVERGENCE

    def do_run(self, opts):
        loader = CaseConfigLoader(opts.merge_list_strategy.value)
        handler = getattr(self, "cmd_" + opts.command.replace("-", "_"))
        if opts.command != "poincare" and not opts.config:
            raise ConfigError("Command '{}' needs --config".format(opts.command))
        return handler(opts, loader)

    @staticmethod
    def output_path(opts, case):
        if opts.out:
            return opts.out
        if case.output:
            return case.output
        return "{}.csv".format(opts.command)

    @staticmethod
    def report(opts, out, summary):
        path = write_summary(out, summary)
        logger.info("Summary written to %s", path)
        if not opts.quiet:
            print(format_summary(summary))

    def cmd_solve(self, opts, loader):
        case = loader.load(opts.config)
        transport = case.transport_case()
        result = solve_transport(transport)
        stability = stability_check(result.f, result.g_norm, case.T)
        out = self.output_path(opts, case)
        header, rows = solution_rows(transport.grid, result)
        write_csv(out, header, rows)
        self.report(opts, out, {
            "l2_f": result.f.l2_f,
            "l2_G": result.g_norm,
            "ratio": stability.ratio,
            "bound": stability.bound,
            "iterations": result.f.iterations,
            "residual": result.f.residual,
            "pass": stability.passed,
        })
        return EXIT_OK if stability.passed else EXIT_BOUND_VIOLATION

    def cmd_lift(self, opts, loader):
        case = loader.load(opts.config)
        grid = case.grid()
        lifted = lift(case.u0, case.ub, case.v, grid)
        bound = linf_bound_check(lifted, case.u0, case.ub, grid)
        out = self.output_path(opts, case)
        coords = grid.node_coordinates()
        header = ["t"] + list(grid.domain.names) + ["g", "source", "hit_time"]
        rows = [list(coords[k]) + [lifted.coefficients[k], BOUNDARY if lifted.on_boundary[k] else INITIAL,
                                   lifted.hit_time[k]]
                for k in range(grid.ndof)]
        write_csv(out, header, rows)
        self.report(opts, out, {
            "max_abs": bound.max_abs,
            "bound": bound.bound,
            "initial_nodes": int(np.sum(~lifted.on_boundary)),
            "boundary_nodes": int(np.sum(lifted.on_boundary)),
            "pass": bound.passed,
        })
        return EXIT_OK if bound.passed else EXIT_BOUND_VIOLATION

    @staticmethod
    def poincare_overrides(opts, loader):
        overrides = {}
        for key in ("T", "v", "nt", "nx"):
            value = getattr(opts, key)
            if value is not None:
                overrides[key] = value
        if opts.lower is not None or opts.upper is not None:
            if opts.lower is None or opts.upper is None or len(opts.lower) != len(opts.upper):
                raise ConfigError("--lower and --upper must be given together with one value per dimension")
            overrides["domain"] = [[lo, hi] for lo, hi in zip(opts.lower, opts.upper)]
        if opts.method is not None:
            overrides["eigen"] = {"method": opts.method}
        if opts.seed is not None:
            overrides.setdefault("eigen", {})["seed"] = opts.seed
        if opts.sweep is not None:
            overrides["poincare"] = {"sweep": loader.load_hierarchy(opts.sweep)}
        return overrides

    def cmd_poincare(self, opts, loader):
        case = loader.load(opts.config, self.poincare_overrides(opts, loader))
        cases = list(case.sweep) or [PoincareCase(case.v, case.T, case.nt, case.nx, case.domain.lower,
                                                  case.domain.upper)]
        results = sweep(cases, case.eigen, opts.parallel)
        header, rows = sweep_rows(results)
        out = self.output_path(opts, case)
        write_csv(out, header, rows)
        passed = all(result.passed for _, result in results)
        for entry, result in results:
            logger.info("v=%s T=%g: C_h = %.12g, 2T = %g, %s", list(entry.v), entry.T, result.C_h, result.bound,
                        "pass" if result.passed else "FAIL")
        self.report(opts, out, {
            "cases": len(results),
            "max_C_h_over_2T": max(result.C_h / result.bound for _, result in results),
            "C_h": results[0][1].C_h if len(results) == 1 else None,
            "bound": results[0][1].bound if len(results) == 1 else None,
            "method": case.eigen.method,
            "pass": passed,
        })
        return EXIT_OK if passed else EXIT_BOUND_VIOLATION

    def cmd_vlasov_check(self, opts, loader):
        case = loader.load(opts.config)
        settings = case.vlasov
        if not settings.functions:
            raise ConfigError("No vlasov test functions in {}".format(opts.config))
        reports = ratio_catalog(settings.cases(case.domain), opts.parallel)
        out = self.output_path(opts, case)
        header, rows = ratio_rows(reports)
        write_csv(out, header, rows)
        divergence = {name: max_divergence(fields, settings.T, case.domain, seed=case.eigen.seed)
                      for name, fields in settings.fields}
        summary = {
            "cases": len(reports),
            "failed": [name for name, r in reports if not (r.passed and r.admissible)],
            "max_divergence": divergence,
        }
        if settings.trajectory is not None:
            summary["speed_drift"] = self.write_trajectory(out, settings)
        summary["pass"] = not summary["failed"]
        self.report(opts, out, summary)
        return EXIT_OK if summary["pass"] else EXIT_BOUND_VIOLATION

    @staticmethod
    def write_trajectory(out, settings):
        traj = settings.trajectory
        trajectory = flow_rk4(PhaseState(0.0, traj.x0, traj.v0), settings.field_named(traj.fields), traj.dt,
                              traj.nsteps)
        header, rows = trajectory_rows(trajectory)
        write_csv("{}.trajectory.csv".format(out), header, rows)
        return speed_drift(trajectory)

    def cmd_convergence(self, opts, loader):
        case = loader.load(opts.config)
        if case.exact is None:
            raise ConfigError("Convergence needs an 'exact' solution in {}".format(opts.config))
        study = convergence_study(case.G, case.u0, case.ub, case.v, case.exact, case.T, case.domain, case.ladder,
                                  case.solver, case.quad_order)
        out = self.output_path(opts, case)
        header = ["n", "h", "error", "order", "ratio", "stable"]
        write_csv(out, header, [[r.n, r.h, r.error, r.order, r.ratio, r.stable] for r in study.rows])
        stable = all(r.stable for r in study.rows)
        self.report(opts, out, {
            "observed_order": study.observed_order,
            "decreasing": study.decreasing,
            "errors": [r.error for r in study.rows],
            "pass": stable,
        })
        return EXIT_OK if stable else EXIT_BOUND_VIOLATION

    @staticmethod
    def add_common_arguments(parser):
        parser.add_argument('--config', dest='config', type=str,
                            help='case file (.json, .yaml or .yml)')
        parser.add_argument('--out', dest='out', type=str,
                            help='output CSV; the JSON summary goes next to it')
        parser.add_argument('--quiet', action='store_true',
                            help='only log warnings and do not print the summary')
        parser.add_argument('--parallel', action='store_true',
                            help='run sweep entries in a process pool')
        parser.add_argument('--list-merge-strategy', dest='merge_list_strategy', type=ListMergeStrategy,
                            choices=list(ListMergeStrategy), default='override',
                            help='merge strategy for lists of extended configs')

    @staticmethod
    def get_parser(parser=None):
        if not parser:
            parser = argparse.ArgumentParser(prog='kinstils')
        parser.add_argument('--version', action='version', version='%(prog)s v{version}'.format(version=__version__),
                            help='print kinstils version')
        commands = parser.add_subparsers(dest='command', metavar='command')
        commands.required = True
        for name in COMMANDS:
            sub = commands.add_parser(name)
            CaseRunner.add_common_arguments(sub)
            if name == "poincare":
                sub.add_argument('--T', dest='T', type=float, help='final time')
                sub.add_argument('--v', dest='v', type=float, nargs='+', help='velocity, one value per dimension')
                sub.add_argument('--nt', dest='nt', type=int, help='time cells')
                sub.add_argument('--nx', dest='nx', type=int, nargs='+', help='space cells per dimension')
                sub.add_argument('--lower', dest='lower', type=float, nargs='+', help='domain lower corner')
                sub.add_argument('--upper', dest='upper', type=float, nargs='+', help='domain upper corner')
                sub.add_argument('--sweep', dest='sweep', type=str, help='file with sweep axes v, T, n')
                sub.add_argument('--method', dest='method', choices=["shift-invert", "inverse-power"],
                                 help='eigen solver')
                sub.add_argument('--seed', dest='seed', type=int, help='seed of the start vector')
        return parser


def run(args=None):
    code = CaseRunner().run(args)
    if args is None:
        sys.exit(code)
    return code
