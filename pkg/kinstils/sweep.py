# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

import itertools
import logging
from multiprocessing import Pool, cpu_count

logger = logging.getLogger(__name__)


def run_sweep(task, params, enable_parallel=False):
    """
    Method for running one task per parameter set, serially or in a process pool
    :param task: module level function taking one parameter set
    :param params: list of parameter sets
    :param enable_parallel: to enable parallel execution
    :return: the task results, in the order of `params`
    """
    params = list(params)
    if enable_parallel and len(params) > 1:
        logger.info("Running %d sweep entries in parallel", len(params))
        with Pool(min(cpu_count(), len(params))) as p:
            return p.map(task, params)
    logger.info("Running %d sweep entries", len(params))
    return [task(param) for param in params]


def expand_grid(axes):
    """
    Cartesian product of named value lists, first key varying slowest.
    :param axes: ordered dict {name: [values]}
    :return: list of dicts
    """
    names = list(axes)
    return [dict(zip(names, values)) for values in itertools.product(*(axes[name] for name in names))]
