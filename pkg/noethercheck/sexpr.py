"""
Plain-text s-expression format for jet-space expressions.

Grammar::

    expr   := number | name | "(" op expr* ")"
    number := ["-"] digits ["/" digits]
    op     := "+" | "*" | "^" | "exp" | "log" | "F" | "f" | "D"

`(F u)` and `(f u)` are the opaque potential and interaction term,
`(D e v ...)` is the derivative of `e` by the variables `v ...`. Exact
rationals are written as "p/q"; floating point numbers are rejected.
"""

import re

import sympy as sp

from noethercheck import jetcalc

_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_NUMBER = re.compile(r"^-?\d+(/\d+)?$")
_OPERATORS = ("+", "*", "^", "exp", "log", "F", "f", "D")


def to_sexpr(expr):
    """
    Writes `expr` as an s-expression with arguments in sympy's default
    sort order.
    """
    expr = sp.sympify(expr)
    if expr.is_Rational:
        return str(expr)
    if expr.is_Symbol:
        return expr.name
    if expr.is_Add:
        return _node("+", sorted(expr.args, key=sp.default_sort_key))
    if expr.is_Mul:
        return _node("*", sorted(expr.args, key=sp.default_sort_key))
    if isinstance(expr, sp.exp):
        return _node("exp", expr.args)
    if expr.is_Pow:
        return _node("^", (expr.base, expr.exp))
    if isinstance(expr, sp.log):
        return _node("log", expr.args)
    if isinstance(expr, jetcalc.Potential):
        return _node("F", expr.args)
    if isinstance(expr, jetcalc.Force):
        return _node("f", expr.args)
    if isinstance(expr, sp.Derivative):
        variables = []
        for variable, count in expr.variable_count:
            variables.extend([variable] * count)
        return _node("D", (expr.expr,) + tuple(variables))
    raise ValueError(
        f"The expression {expr} of type {type(expr).__name__} has no "
        f"s-expression form."
    )


def _node(operator, args):
    return "(" + " ".join([operator] + [to_sexpr(a) for a in args]) + ")"


def from_sexpr(text):
    """Reads an s-expression written by :py:func:`to_sexpr`."""
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise ValueError("The s-expression is empty.")
    try:
        expr, position = _parse(tokens, 0)
    except IndexError:
        raise ValueError("Unbalanced '(' in s-expression.")
    if position != len(tokens):
        raise ValueError(
            f"Unexpected trailing tokens {tokens[position:]} in s-expression."
        )
    return expr


def _symbol(name):
    if name == "t":
        return jetcalc.t
    if name == "u":
        return jetcalc.u
    if jetcalc.is_space_symbol(sp.Symbol(name)):
        return sp.Symbol(name, real=True)
    return jetcalc.parameter(name)


def _parse(tokens, position):
    token = tokens[position]
    if token == ")":
        raise ValueError("Unbalanced ')' in s-expression.")
    if token != "(":
        if _NUMBER.match(token):
            return sp.Rational(token), position + 1
        if re.match(r"^-?[\d.]+([eE][-+]?\d+)?$", token):
            raise ValueError(
                f"The number {token} is not exact. Please write rationals as p/q."
            )
        return _symbol(token), position + 1
    operator = tokens[position + 1]
    if operator not in _OPERATORS:
        raise ValueError(
            f"Unknown operator {operator}. Please use one of {_OPERATORS}."
        )
    position += 2
    args = []
    while tokens[position] != ")":
        arg, position = _parse(tokens, position)
        args.append(arg)
    position += 1
    if operator == "+":
        return sp.Add(*args), position
    if operator == "*":
        return sp.Mul(*args), position
    if operator == "^":
        return sp.Pow(*args), position
    if operator == "exp":
        return sp.exp(*args), position
    if operator == "log":
        return sp.log(*args), position
    if operator == "F":
        return jetcalc.Potential(*args), position
    if operator == "f":
        return jetcalc.Force(*args), position
    return sp.Derivative(args[0], *args[1:]), position
