"""Tiny arithmetic grammar for user-supplied warp functions.

Supports +, -, *, /, ^, parentheses, numeric literals, the variable
``rho`` and the functions sinh, cosh, sin, cos, exp, log.  Expressions
are parsed to an AST that can be evaluated on numpy arrays and
differentiated symbolically, so custom warps come with exact first and
second derivatives rather than finite-difference ones.
"""

import numpy as np

from .errors import WarpflowError

_FUNCS = {
    "sinh": (np.sinh, "cosh"),
    "cosh": (np.cosh, "sinh"),
    "sin": (np.sin, "cos_"),
    "cos": (np.cos, "neg_sin"),
    "exp": (np.exp, "exp"),
    "log": (np.log, "inv"),
}


class ExprError(WarpflowError):
    """Malformed warp expression."""


class Node:
    def __call__(self, rho):
        raise NotImplementedError

    def diff(self):
        raise NotImplementedError


class Const(Node):
    def __init__(self, value):
        self.value = float(value)

    def __call__(self, rho):
        return np.full_like(np.asarray(rho, dtype=float), self.value)

    def diff(self):
        return Const(0.0)

    def __repr__(self):
        return repr(self.value)


class Var(Node):
    def __call__(self, rho):
        return np.asarray(rho, dtype=float)

    def diff(self):
        return Const(1.0)

    def __repr__(self):
        return "rho"


class BinOp(Node):
    def __init__(self, op, left, right):
        self.op, self.left, self.right = op, left, right

    def __call__(self, rho):
        a, b = self.left(rho), self.right(rho)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        if self.op == "^":
            return a ** b
        raise ExprError(f"unknown operator {self.op!r}")

    def diff(self):
        u, v = self.left, self.right
        du, dv = u.diff(), v.diff()
        if self.op in "+-":
            return BinOp(self.op, du, dv)
        if self.op == "*":
            return BinOp("+", BinOp("*", du, v), BinOp("*", u, dv))
        if self.op == "/":
            num = BinOp("-", BinOp("*", du, v), BinOp("*", u, dv))
            return BinOp("/", num, BinOp("*", v, v))
        if self.op == "^":
            # Only constant exponents are accepted, which keeps the
            # derivative inside the grammar.
            if not isinstance(v, Const):
                raise ExprError("exponent must be a numeric constant")
            c = v.value
            return BinOp("*", BinOp("*", Const(c), BinOp("^", u, Const(c - 1.0))), du)
        raise ExprError(f"unknown operator {self.op!r}")

    def __repr__(self):
        return f"({self.left!r} {self.op} {self.right!r})"


class Call(Node):
    def __init__(self, name, arg):
        self.name, self.arg = name, arg

    def __call__(self, rho):
        return _FUNCS[self.name][0](self.arg(rho))

    def diff(self):
        outer = {
            "sinh": lambda a: Call("cosh", a),
            "cosh": lambda a: Call("sinh", a),
            "sin": lambda a: Call("cos", a),
            "cos": lambda a: BinOp("*", Const(-1.0), Call("sin", a)),
            "exp": lambda a: Call("exp", a),
            "log": lambda a: BinOp("/", Const(1.0), a),
        }[self.name](self.arg)
        return BinOp("*", outer, self.arg.diff())

    def __repr__(self):
        return f"{self.name}({self.arg!r})"


class _Parser:
    """Recursive descent over the token stream; ^ binds tightest and is
    right-associative, unary minus is allowed."""

    def __init__(self, text):
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text):
        tokens = []
        i, n = 0, len(text)
        while i < n:
            c = text[i]
            if c.isspace():
                i += 1
            elif c in "+-*/^()":
                tokens.append(c)
                i += 1
            elif c.isdigit() or c == ".":
                j = i
                while j < n and (text[j].isdigit() or text[j] in ".eE" or
                                 (text[j] in "+-" and text[j - 1] in "eE")):
                    j += 1
                tokens.append(("num", text[i:j]))
                i = j
            elif c.isalpha() or c == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                tokens.append(("name", text[i:j]))
                i = j
            else:
                raise ExprError(f"unexpected character {c!r} in expression")
        return tokens

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self):
        tok = self._peek()
        if tok is None:
            raise ExprError("unexpected end of expression")
        self.pos += 1
        return tok

    def parse(self):
        node = self._expr()
        if self._peek() is not None:
            raise ExprError(f"trailing input near token {self._peek()!r}")
        return node

    def _expr(self):
        node = self._term()
        while self._peek() in ("+", "-"):
            op = self._next()
            node = BinOp(op, node, self._term())
        return node

    def _term(self):
        node = self._factor()
        while self._peek() in ("*", "/"):
            op = self._next()
            node = BinOp(op, node, self._factor())
        return node

    def _factor(self):
        if self._peek() == "-":
            self._next()
            return BinOp("*", Const(-1.0), self._factor())
        if self._peek() == "+":
            self._next()
            return self._factor()
        node = self._atom()
        if self._peek() == "^":
            self._next()
            return BinOp("^", node, self._factor())
        return node

    def _atom(self):
        tok = self._next()
        if tok == "(":
            node = self._expr()
            if self._next() != ")":
                raise ExprError("missing closing parenthesis")
            return node
        if isinstance(tok, tuple):
            kind, text = tok
            if kind == "num":
                try:
                    return Const(float(text))
                except ValueError as exc:
                    raise ExprError(f"bad number {text!r}") from exc
            if text in ("rho", "r"):
                return Var()
            if text in _FUNCS:
                if self._next() != "(":
                    raise ExprError(f"{text} must be followed by '('")
                arg = self._expr()
                if self._next() != ")":
                    raise ExprError("missing closing parenthesis")
                return Call(text, arg)
            raise ExprError(f"unknown name {text!r}")
        raise ExprError(f"unexpected token {tok!r}")


def parse_expression(text):
    """Parse ``text`` and return (f, df, d2f) as numpy-vectorized callables."""
    ast = _Parser(text).parse()
    d1 = ast.diff()
    d2 = d1.diff()
    return ast, d1, d2
