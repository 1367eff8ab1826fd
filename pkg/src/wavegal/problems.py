"""Built-in interface problems and construction from expression specs.

Three ready-made problems are provided:

- ``ex1``: huge constant jump (a+ = 1e5) at gamma = pi/6, smooth exact
  solution (x e^x on the left, a quintic on the right), no Dirac load.
- ``ex2``: constant jump a+ = 2e4 at gamma = sqrt(2)/2 with a nonzero
  Dirac weight at the interface.
- ``ex3``: variable coefficient a+ = 1000 e^x, f = 1, exact solution
  unknown (errors are measured against a fine reference solve).

Whenever an exact solution is given and no source term is, f is
manufactured symbolically as -(a u')' on each subdomain.
"""

from __future__ import annotations

import sympy as sp

from .expressions import Expression, ExpressionError, parse_expression
from .galerkin import ExactSolution, InterfaceProblem

__all__ = ["BUILTIN_PROBLEMS", "builtin_problem", "problem_from_spec"]

_X = sp.Symbol("x")

# quintic coefficients of ex1's right-hand solution, in the constants
# G (interface point) and A (right coefficient value)
_EX1_C2 = (
    "((-3*G^4 + 20*G^3*A + (-5*A+6)*G^2 - 16*A*G + 9*A - 3) * exp(G))"
    " / (G * (G-1)^3 * A * (G-3))"
)
_EX1_C3 = (
    "((3*G^5 + (-20*A+7)*G^4 + (-40*A-10)*G^3 + (50*A-10)*G^2 + (-8*A+7)*G - 6*A + 3)"
    " * exp(G)) / ((G-1)^3 * A * (G-3) * G^2)"
)
_EX1_C4 = (
    "((-7*G^4 + 45*G^3*A + (-10*A+14)*G^2 - 25*A*G + 14*A - 7) * exp(G))"
    " / ((G-1)^3 * A * (G-3) * G^2)"
)
_EX1_C5 = (
    "((4*G^3 + (-24*A-4)*G^2 + (24*A-4)*G - 8*A + 4) * exp(G))"
    " / ((G-1)^3 * A * (G-3) * G^2)"
)

BUILTIN_PROBLEMS = {
    "ex1": {
        "gamma": "pi/6",
        "a_minus": "1",
        "a_plus": "A",
        "u_minus": "x*exp(x)",
        "u_plus": f"({_EX1_C2})*x^2 + ({_EX1_C3})*x^3 + ({_EX1_C4})*x^4 + ({_EX1_C5})*x^5",
        "g_gamma": "0",
        "constants": {"A": 100000, "G": sp.pi / 6},
    },
    "ex2": {
        "gamma": "sqrt(2)/2",
        "a_minus": "1",
        "a_plus": "A",
        "u_minus": "exp(x) - (sin(1-G) + exp(G) - 1)*x - 1",
        "u_plus": "-sin(G - x) + exp(G) - (sin(1-G) + exp(G) - 1)*x - 1",
        "g_gamma": "(1-A)*sin(1-G) - A*exp(G) + 2*A - 1",
        "constants": {"A": 20000, "G": sp.sqrt(2) / 2},
    },
    "ex3": {
        "gamma": "pi/6",
        "a_minus": "1",
        "a_plus": "1000*exp(x)",
        "f_minus": "1",
        "f_plus": "1",
        "g_gamma": "0",
        "constants": {},
    },
}


def _const_value(text, constants) -> float:
    expr = parse_expression(str(text), constants)
    if not expr.is_constant():
        raise ExpressionError(f"{text!r} must not depend on x")
    return expr(0.0)


def _manufactured_source(a: Expression, u: Expression) -> Expression:
    """f := -(a u')' computed symbolically on one subdomain."""
    return Expression(sp.expand(-sp.diff(a.tree * sp.diff(u.tree, _X), _X)))


def problem_from_spec(spec: dict, name: str = "") -> InterfaceProblem:
    """Build an InterfaceProblem from an expression-level description.

    Required keys: gamma, a_minus, a_plus, g_gamma.  Either both sources
    (f_minus, f_plus) or both exact solutions (u_minus, u_plus) must be
    present; missing sources are manufactured from the exact solution.
    """
    constants = dict(spec.get("constants", {}))
    gamma = _const_value(spec["gamma"], constants)
    g_gamma = _const_value(spec["g_gamma"], constants)
    a_minus = parse_expression(str(spec["a_minus"]), constants)
    a_plus = parse_expression(str(spec["a_plus"]), constants)

    exact = None
    if spec.get("u_minus") is not None or spec.get("u_plus") is not None:
        if spec.get("u_minus") is None or spec.get("u_plus") is None:
            raise ExpressionError("exact solution requires both u_minus and u_plus")
        u_minus = parse_expression(str(spec["u_minus"]), constants)
        u_plus = parse_expression(str(spec["u_plus"]), constants)
        exact = ExactSolution(u_minus, u_plus, u_minus.diff(), u_plus.diff())

    if spec.get("f_minus") is not None and spec.get("f_plus") is not None:
        f_minus = parse_expression(str(spec["f_minus"]), constants)
        f_plus = parse_expression(str(spec["f_plus"]), constants)
    elif exact is not None:
        f_minus = _manufactured_source(a_minus, exact.u_minus)
        f_plus = _manufactured_source(a_plus, exact.u_plus)
    else:
        raise ExpressionError("spec needs sources f_minus/f_plus or an exact solution")

    return InterfaceProblem(
        gamma=gamma,
        a_minus=a_minus,
        a_plus=a_plus,
        f_minus=f_minus,
        f_plus=f_plus,
        g_gamma=g_gamma,
        exact=exact,
        name=name,
    )


def builtin_problem(pid: str, **overrides) -> InterfaceProblem:
    """One of the built-in problems, with optional field overrides."""
    if pid not in BUILTIN_PROBLEMS:
        raise KeyError(f"unknown problem id {pid!r}; choose from {sorted(BUILTIN_PROBLEMS)}")
    spec = dict(BUILTIN_PROBLEMS[pid])
    constants = dict(spec.get("constants", {}))
    if "constants" in overrides:
        constants.update(overrides.pop("constants"))
    spec.update(overrides)
    spec["constants"] = constants
    return problem_from_spec(spec, name=pid)
