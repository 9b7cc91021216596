# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

"""
Arithmetic mini-language used for every analytic field of a case (G, u0, ub, E, B, test functions).

Grammar:
    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := unary ("^" factor)?
    unary  := "-" unary | atom
    atom   := number | name | name "(" expr ("," expr)* ")" | "(" expr ")"
"""

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from .exceptions import EvalError, ParseError

VARIABLES = frozenset(("t", "x", "y", "vx", "vy", "vz"))
CONSTANTS = {"pi": math.pi}
FUNCTIONS = {
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "exp": (1, np.exp),
    "abs": (1, np.abs),
    "sqrt": (1, np.sqrt),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
}
OPERATORS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}

MAX_DEPTH = 100

_TOKEN_RE = re.compile(r"\s*(?:(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
                       r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))")


class Expression(object):

    def evaluate(self, ctx):
        raise NotImplementedError

    def free_vars(self):
        return frozenset()

    def unparse(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Number(Expression):
    value: float

    def evaluate(self, ctx):
        return np.float64(self.value)

    def unparse(self):
        text = repr(float(self.value))
        return "({})".format(text) if text.startswith("-") else text


@dataclass(frozen=True)
class Constant(Expression):
    name: str

    def evaluate(self, ctx):
        return np.float64(CONSTANTS[self.name])

    def unparse(self):
        return self.name


@dataclass(frozen=True)
class Variable(Expression):
    name: str

    def evaluate(self, ctx):
        if self.name not in ctx:
            raise EvalError(self.name)
        return np.asarray(ctx[self.name], dtype=float)[()]

    def free_vars(self):
        return frozenset((self.name,))

    def unparse(self):
        return self.name


@dataclass(frozen=True)
class Negate(Expression):
    operand: Expression

    def evaluate(self, ctx):
        return np.negative(self.operand.evaluate(ctx))

    def free_vars(self):
        return self.operand.free_vars()

    def unparse(self):
        return "(-{})".format(self.operand.unparse())


@dataclass(frozen=True)
class BinaryOp(Expression):
    op: str
    left: Expression
    right: Expression

    def evaluate(self, ctx):
        return OPERATORS[self.op](self.left.evaluate(ctx), self.right.evaluate(ctx))

    def free_vars(self):
        return self.left.free_vars() | self.right.free_vars()

    def unparse(self):
        return "({} {} {})".format(self.left.unparse(), self.op, self.right.unparse())


@dataclass(frozen=True)
class Call(Expression):
    func: str
    args: Tuple[Expression, ...]

    def evaluate(self, ctx):
        _, fn = FUNCTIONS[self.func]
        return fn(*[arg.evaluate(ctx) for arg in self.args])

    def free_vars(self):
        names = frozenset()
        for arg in self.args:
            names = names | arg.free_vars()
        return names

    def unparse(self):
        return "{}({})".format(self.func, ", ".join(arg.unparse() for arg in self.args))


class _Token(object):
    __slots__ = ("kind", "value", "offset")

    def __init__(self, kind, value, offset):
        self.kind = kind
        self.value = value
        self.offset = offset


def _byte_offset(text, index):
    return len(text[:index].encode("utf-8"))


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            pos = len(text)
            break
        match = _TOKEN_RE.match(text, pos)
        if not match:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError("Unexpected character '{}'".format(text[bad]), text, _byte_offset(text, bad))
        kind = match.lastgroup
        tokens.append(_Token(kind, match.group(kind), _byte_offset(text, match.start(kind))))
        pos = match.end()
    tokens.append(_Token("end", None, _byte_offset(text, len(text))))
    return tokens


class ExpressionParser(object):
    """
    Recursive descent parser over the token stream of one expression.
    """

    def __init__(self, text, variables=VARIABLES):
        self.text = text
        self.variables = variables
        self.tokens = tokenize(text)
        self.index = 0
        self.depth = 0

    def error(self, message, token=None):
        token = token if token is not None else self.peek()
        return ParseError(message, self.text, token.offset)

    def peek(self):
        return self.tokens[self.index]

    def advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token

    def at_op(self, *ops):
        token = self.peek()
        return token.kind == "op" and token.value in ops

    def expect(self, op):
        if not self.at_op(op):
            raise self.error("Expected '{}'".format(op))
        return self.advance()

    def parse(self):
        if self.peek().kind == "end":
            raise self.error("Empty expression")
        tree = self.expr()
        if self.peek().kind != "end":
            raise self.error("Unexpected trailing token '{}'".format(self.peek().value))
        return tree

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.error("Expression nested too deeply")

    def expr(self):
        self.enter()
        node = self.term()
        while self.at_op("+", "-"):
            op = self.advance().value
            node = BinaryOp(op, node, self.term())
        self.depth -= 1
        return node

    def term(self):
        node = self.factor()
        while self.at_op("*", "/"):
            op = self.advance().value
            node = BinaryOp(op, node, self.factor())
        return node

    def factor(self):
        self.enter()
        base = self.unary()
        if self.at_op("^"):
            self.advance()
            base = BinaryOp("^", base, self.factor())
        self.depth -= 1
        return base

    def unary(self):
        if self.at_op("-"):
            self.enter()
            self.advance()
            node = Negate(self.unary())
            self.depth -= 1
            return node
        return self.atom()

    def atom(self):
        token = self.peek()
        if token.kind == "number":
            self.advance()
            value = float(token.value)
            if not math.isfinite(value):
                raise self.error("Number literal out of range", token)
            return Number(value)
        if token.kind == "name":
            self.advance()
            if self.at_op("("):
                return self.call(token)
            if token.value in CONSTANTS:
                return Constant(token.value)
            if token.value in self.variables:
                return Variable(token.value)
            if token.value in FUNCTIONS:
                raise self.error("Function '{}' requires arguments".format(token.value), token)
            raise self.error("Unknown identifier '{}'".format(token.value), token)
        if self.at_op("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if token.kind == "end":
            raise self.error("Unexpected end of input")
        raise self.error("Unexpected token '{}'".format(token.value))

    def call(self, name_token):
        if name_token.value not in FUNCTIONS:
            raise self.error("Unknown function '{}'".format(name_token.value), name_token)
        self.expect("(")
        args = [self.expr()]
        while self.at_op(","):
            self.advance()
            args.append(self.expr())
        self.expect(")")
        arity, _ = FUNCTIONS[name_token.value]
        if len(args) != arity:
            raise self.error("Function '{}' takes {} argument(s), got {}".format(name_token.value, arity, len(args)),
                             name_token)
        return Call(name_token.value, tuple(args))


@lru_cache(maxsize=1024)
def _parse_cached(text, variables):
    return ExpressionParser(text, variables).parse()


def parse(text, variables=VARIABLES):
    if not isinstance(text, str):
        raise ParseError("Expression must be a string, got {}".format(type(text).__name__), str(text), 0)
    return _parse_cached(text, frozenset(variables))


def evaluate(expr, ctx):
    """
    Evaluates `expr` with IEEE double semantics. Context values may be floats or numpy arrays;
    non-finite results (division by zero, domain faults) are returned as inf/nan for the caller to flag.
    """
    with np.errstate(all="ignore"):
        result = expr.evaluate(ctx)
    if np.ndim(result) == 0:
        return float(result)
    return result


def evaluate_array(expr, ctx, shape):
    """
    Evaluates `expr` on array-valued context and broadcasts the result to `shape`.
    """
    return np.array(np.broadcast_to(evaluate(expr, ctx), shape), dtype=float)


def free_vars(expr):
    return expr.free_vars()


def unparse(expr):
    return expr.unparse()


def is_finite(values):
    return bool(np.all(np.isfinite(values)))
