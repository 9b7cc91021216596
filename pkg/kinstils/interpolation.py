# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

"""
`{{a.b.c}}` references between the values of a merged case config.

A string that is exactly one reference is replaced by the referenced value with its type (so `v: "{{speed}}"`
may become a list); references inside longer strings are substituted as text (`G: "sin({{k}}*x)"`).
List items are addressed by index: `{{domain.0.1}}`.
"""

import copy
import logging
import re

from .exceptions import ConfigError

logger = logging.getLogger(__name__)

REFERENCE_RE = re.compile(r"{{\s*([A-Za-z0-9_\-]+(?:\.[A-Za-z0-9_\-]+)*)\s*}}")
MAX_ROUNDS = 10

leaf_types = (str, int, float, bool)


def has_reference(value):
    return isinstance(value, str) and REFERENCE_RE.search(value) is not None


def whole_reference(value):
    """The key path when `value` is exactly one reference, else None."""
    if not isinstance(value, str):
        return None
    match = REFERENCE_RE.fullmatch(value.strip())
    return match.group(1) if match else None


class DictIterator(object):

    def loop_all_items(self, data, process_func):
        if isinstance(data, str):
            return process_func(data)
        if isinstance(data, list):
            return [self.loop_all_items(item, process_func) for item in data]
        if isinstance(data, dict):
            for key in data:
                data[key] = self.loop_all_items(data[key], process_func)
        return data


def lookup(data, path):
    node = data
    for key in path.split("."):
        if isinstance(node, dict) and key in node:
            node = node[key]
        elif isinstance(node, list) and key.isdigit() and int(key) < len(node):
            node = node[int(key)]
        else:
            return None
    return node


def leaf_index(data, prefix="", index=None):
    """Flat {"a.b.0": value} map of every scalar leaf."""
    index = {} if index is None else index
    if isinstance(data, leaf_types):
        index[prefix] = data
    elif isinstance(data, (dict, list)):
        items = data.items() if isinstance(data, dict) else enumerate(data)
        for key, value in items:
            leaf_index(value, "{}.{}".format(prefix, key) if prefix else str(key), index)
    return index


class ReferenceResolver(DictIterator):
    """
    One substitution pass over a config against a snapshot of itself.
    """

    def __init__(self, data):
        self.snapshot = copy.deepcopy(data)
        self.leaves = leaf_index(self.snapshot)

    def resolve(self, data):
        return self.loop_all_items(data, self.resolve_value)

    def resolve_value(self, value):
        if not has_reference(value):
            return value
        path = whole_reference(value)
        if path is not None:
            target = lookup(self.snapshot, path)
            if target is None or has_reference(target):
                return value
            return copy.deepcopy(target)
        return REFERENCE_RE.sub(self.substitute, value)

    def substitute(self, match):
        target = self.leaves.get(match.group(1))
        if target is None or has_reference(target):
            return match.group(0)
        return str(target)


class ReferenceValidator(DictIterator):

    def check(self, data):
        return self.loop_all_items(data, self.validate_value)

    @staticmethod
    def validate_value(value):
        if has_reference(value):
            raise ConfigError("Interpolation could not be resolved: {}".format(value))
        return value


def resolve_interpolations(data):
    """
    Resolves references against `data` itself, one pass per round until nothing changes, so references to
    references resolve too. Anything left unresolved raises ConfigError.
    """
    for rounds in range(1, MAX_ROUNDS + 1):
        before = copy.deepcopy(data)
        data = ReferenceResolver(data).resolve(data)
        if data == before:
            logger.debug("Config references settled after %d round(s)", rounds)
            break
    ReferenceValidator().check(data)
    return data
