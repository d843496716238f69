"""A small arithmetic expression language for kernel blocks in JSON specs.

Expressions use Python syntax restricted to numbers (including imaginary
literals such as ``0.5j``), the variables ``x`` and ``y``, the constants
``pi`` and ``e``, the operators ``+ - * / **`` and the functions
``exp, sin, cos, pow, sqrt, conj``.
"""

from __future__ import annotations

import ast
import operator

import numpy as np

_FUNCS = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "pow": np.power,
    "sqrt": np.sqrt,
    "conj": np.conj,
}
_CONSTS = {"pi": np.pi, "e": np.e}
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


class ExpressionError(ValueError):
    pass


def _check(node: ast.AST, source: str):
    if isinstance(node, ast.Expression):
        _check(node.body, source)
    elif isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float, complex)):
            raise ExpressionError(f"unsupported literal {node.value!r} in {source!r}")
    elif isinstance(node, ast.Name):
        if node.id not in ("x", "y") and node.id not in _CONSTS:
            raise ExpressionError(f"unknown name {node.id!r} in {source!r}")
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            raise ExpressionError(f"unsupported operator in {source!r}")
        _check(node.left, source)
        _check(node.right, source)
    elif isinstance(node, ast.UnaryOp):
        if type(node.op) not in _UNOPS:
            raise ExpressionError(f"unsupported operator in {source!r}")
        _check(node.operand, source)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords:
            raise ExpressionError(f"unsupported call in {source!r}")
        for a in node.args:
            _check(a, source)
    else:
        raise ExpressionError(f"unsupported syntax {type(node).__name__} in {source!r}")


def _eval(node, env):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.Constant):
        return node.value
    if isinstance(node, ast.Name):
        return env[node.id]
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        return _UNOPS[type(node.op)](_eval(node.operand, env))
    return _FUNCS[node.func.id](*(_eval(a, env) for a in node.args))


def compile_expression(source: str):
    """Vectorized callable ``f(x, y)`` for an expression string."""
    try:
        tree = ast.parse(str(source).strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {source!r}: {exc.msg}") from None
    _check(tree, source)

    def fn(x, y):
        with np.errstate(all="ignore"):
            return _eval(tree, {"x": x, "y": y, **_CONSTS})

    fn.source = source
    return fn
