# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

import csv
import json
import logging

import numpy as np

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"
VECTOR_SEPARATOR = ";"


def format_value(value):
    """
    CSV cell text: 17 significant digits for reals, lowercase booleans, vectors joined with ';', empty for None.
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    if isinstance(value, (list, tuple, np.ndarray)):
        return VECTOR_SEPARATOR.join(format_value(item) for item in value)
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
    logger.info("Wrote %d rows to %s", len(rows), path)


def to_builtin(value):
    """numpy scalars and arrays to plain Python values, recursively."""
    if isinstance(value, dict):
        return {key: to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def format_summary(summary):
    return json.dumps(to_builtin(summary), indent=4)


def summary_path(out):
    return "{}.summary.json".format(out)


def write_summary(out, summary):
    path = summary_path(out)
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_summary(summary))
        f.write("\n")
    return path
