"""Tiny arithmetic expression language for defining-function factors.

Grammar: numeric constants, coordinates ``x1..xn``, ``+``, ``-``, ``*``,
parentheses, and unary minus on any term. When the ambient dimension is
one, ``x`` is accepted as an alias for ``x1``.

Parsing goes through :mod:`ast`; every node outside the grammar is
rejected. Expressions evaluate on arrays of shape ``(..., n)`` and carry
an exact symbolic gradient (product rule on the tree).
"""

from __future__ import annotations

import ast
import re

import numpy as np

_COORD = re.compile(r"^x([1-9][0-9]*)$")


class Expression:
    """Parsed expression in the coordinates of ``R^n``."""

    def __init__(self, text: str, ambient_dim: int):
        self.text = text
        self.ambient_dim = ambient_dim
        try:
            tree = ast.parse(text.strip(), mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"cannot parse expression {text!r}: {exc.msg}") from None
        self._tree = self._check(tree.body)

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ValueError(f"unsupported constant {node.value!r} in {self.text!r}")
            return ("const", float(node.value))
        if isinstance(node, ast.Name):
            name = node.id
            if name == "x" and self.ambient_dim == 1:
                return ("var", 0)
            m = _COORD.match(name)
            if not m or int(m.group(1)) > self.ambient_dim:
                raise ValueError(
                    f"unknown variable {name!r} in {self.text!r} "
                    f"(ambient dimension {self.ambient_dim})"
                )
            return ("var", int(m.group(1)) - 1)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return ("neg", self._check(node.operand))
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add):
            return ("add", self._check(node.left), self._check(node.right))
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Sub):
            return ("add", self._check(node.left), ("neg", self._check(node.right)))
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
            return ("mul", self._check(node.left), self._check(node.right))
        raise ValueError(f"unsupported syntax {ast.dump(node)!s} in {self.text!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(_eval(self._tree, x), x.shape[:-1]).astype(float)

    def gradient(self, x):
        """Gradient, shape ``(..., n)``."""
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape, dtype=float)
        for k in range(self.ambient_dim):
            out[..., k] = np.broadcast_to(_eval(_diff(self._tree, k), x), x.shape[:-1])
        return out

    def __repr__(self):
        return f"Expression({self.text!r})"

    def __eq__(self, other):
        return (
            isinstance(other, Expression)
            and self.text == other.text
            and self.ambient_dim == other.ambient_dim
        )

    def __hash__(self):
        return hash((self.text, self.ambient_dim))


def _eval(node, x):
    tag = node[0]
    if tag == "const":
        return node[1]
    if tag == "var":
        return x[..., node[1]]
    if tag == "neg":
        return -_eval(node[1], x)
    if tag == "add":
        return _eval(node[1], x) + _eval(node[2], x)
    return _eval(node[1], x) * _eval(node[2], x)


def _diff(node, k):
    tag = node[0]
    if tag == "const":
        return ("const", 0.0)
    if tag == "var":
        return ("const", 1.0 if node[1] == k else 0.0)
    if tag == "neg":
        return ("neg", _diff(node[1], k))
    if tag == "add":
        return ("add", _diff(node[1], k), _diff(node[2], k))
    left, right = node[1], node[2]
    return ("add", ("mul", _diff(left, k), right), ("mul", left, _diff(right, k)))
