# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.


class KinstilsError(Exception):
    pass


class InvalidArgumentError(KinstilsError, ValueError):
    pass


class ConfigError(KinstilsError):
    pass


class ParseError(KinstilsError):

    def __init__(self, message, text, offset):
        super(ParseError, self).__init__("{} at offset {} in '{}'".format(message, offset, text))
        self.text = text
        self.offset = offset


class EvalError(KinstilsError):

    def __init__(self, name):
        super(EvalError, self).__init__("Variable '{}' is not bound".format(name))
        self.name = name


class NoConvergenceError(KinstilsError):
    """
    Raised when an iterative method stops before reaching its tolerance.
    `best` holds the best iterate (or eigen estimate) found so far.
    """

    def __init__(self, message, best=None, residual=None, iterations=None):
        super(NoConvergenceError, self).__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


class IntegrationError(KinstilsError):

    def __init__(self, message, step):
        super(IntegrationError, self).__init__("{} (step {})".format(message, step))
        self.step = step


class InconsistencyError(KinstilsError):
    pass
