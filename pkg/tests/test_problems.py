"""Unit tests for the expression language and the built-in problems."""

import math

import numpy as np
import pytest

from wavegal.expressions import (
    Expression,
    ExpressionError,
    expression_eval,
    parse_expression,
)
from wavegal.problems import BUILTIN_PROBLEMS, builtin_problem, problem_from_spec


class TestExpressions:
    def test_basic_values(self):
        assert expression_eval("x*exp(x)", 1.0) == pytest.approx(math.e, rel=1e-14)
        assert expression_eval("sin(1-x)", 1.0) == pytest.approx(0.0, abs=1e-15)
        assert expression_eval("pi/6", 0.0) == pytest.approx(math.pi / 6, rel=1e-14)

    def test_caret_is_power(self):
        assert expression_eval("x^3 + 2", 2.0) == pytest.approx(10.0)

    def test_constants_substituted(self):
        assert expression_eval("A*x + G", 2.0, {"A": 3, "G": 0.5}) == pytest.approx(6.5)

    def test_array_evaluation(self):
        f = parse_expression("x^2")
        out = f(np.array([1.0, 2.0, 3.0]))
        assert out == pytest.approx([1.0, 4.0, 9.0])

    def test_constant_broadcasts_over_arrays(self):
        f = parse_expression("2")
        out = f(np.linspace(0, 1, 5))
        assert out.shape == (5,) and np.all(out == 2.0)

    def test_derivative(self):
        df = parse_expression("x*exp(x)").diff()
        assert df(1.0) == pytest.approx(2 * math.e, rel=1e-14)

    def test_syntax_error_reports_position(self):
        with pytest.raises(ExpressionError, match="position"):
            parse_expression("x + * 2")

    def test_unbalanced_parens_rejected(self):
        with pytest.raises(ExpressionError):
            parse_expression("x*(1 + 2")

    def test_unknown_symbol(self):
        with pytest.raises(ExpressionError, match="unknown symbol"):
            parse_expression("x + qq")

    def test_empty_expression(self):
        with pytest.raises(ExpressionError, match="empty"):
            parse_expression("   ")

    def test_non_finite_value(self):
        with pytest.raises(ExpressionError, match="not finite"):
            parse_expression("1/x")(0.0)

    def test_is_constant(self):
        assert parse_expression("sqrt(2)/2").is_constant()
        assert not parse_expression("x/2").is_constant()


@pytest.fixture(scope="module")
def ex1():
    return builtin_problem("ex1")


@pytest.fixture(scope="module")
def ex2():
    return builtin_problem("ex2")


class TestBuiltinProblems:
    def test_ids(self):
        assert set(BUILTIN_PROBLEMS) == {"ex1", "ex2", "ex3"}
        with pytest.raises(KeyError):
            builtin_problem("nope")

    def test_ex1_data(self, ex1):
        assert ex1.gamma == pytest.approx(math.pi / 6, rel=1e-15)
        assert ex1.a(np.array([0.9]))[0] == pytest.approx(1e5)
        assert ex1.g_gamma == 0.0

    def test_ex2_dirac_weight(self, ex2):
        s = math.sqrt(2) / 2
        want = (1 - 20000) * math.sin(1 - s) - 20000 * math.exp(s) + 2 * 20000 - 1
        assert ex2.gamma == pytest.approx(s, rel=1e-15)
        assert ex2.g_gamma == pytest.approx(want, rel=1e-12)

    def test_boundary_values_vanish(self, ex1, ex2):
        for p in (ex1, ex2):
            assert p.u(np.array([0.0]))[0] == pytest.approx(0.0, abs=1e-9)
            assert p.u(np.array([1.0]))[0] == pytest.approx(0.0, abs=1e-9)

    def test_solution_continuous_at_interface(self, ex1, ex2):
        for p in (ex1, ex2):
            g = p.gamma
            left = p.exact.u_minus(g)
            right = p.exact.u_plus(g)
            assert left == pytest.approx(right, rel=1e-10, abs=1e-12)

    def test_flux_jump_matches_dirac_weight(self, ex1, ex2):
        # a+ u+'(gamma) - a- u-'(gamma) must equal the Dirac weight
        for p in (ex1, ex2):
            g = p.gamma
            jump = p.a_plus(g) * p.exact.du_plus(g) - p.a_minus(g) * p.exact.du_minus(g)
            scale = max(1.0, abs(p.a_plus(g) * p.exact.du_plus(g)))
            assert jump == pytest.approx(p.g_gamma, abs=1e-8 * scale)

    def test_manufactured_source_matches_difference_quotient(self, ex2):
        # f == -(a u')' checked against central differences of a u'
        g, h = ex2.gamma, 1e-6
        for x in (0.3, 0.9):
            a = ex2.a_minus if x < g else ex2.a_plus
            du = ex2.exact.du_minus if x < g else ex2.exact.du_plus
            flux = lambda t: a(t) * du(t)
            fd = -(flux(x + h) - flux(x - h)) / (2 * h)
            f = ex2.f(np.array([x]))[0]
            assert f == pytest.approx(fd, rel=1e-6, abs=1e-4 * max(1.0, abs(fd)))

    def test_ex3_has_no_exact_solution(self):
        p = builtin_problem("ex3")
        assert p.exact is None
        assert p.f(np.array([0.2, 0.8])) == pytest.approx([1.0, 1.0])
        assert p.a(np.array([0.9]))[0] == pytest.approx(1000 * math.exp(0.9))

    def test_constant_override(self):
        p = builtin_problem("ex2", constants={"A": 7.0})
        assert p.a(np.array([0.9]))[0] == pytest.approx(7.0)


class TestProblemFromSpec:
    def test_sources_or_exact_required(self):
        with pytest.raises(ExpressionError, match="sources"):
            problem_from_spec({"gamma": "0.5", "a_minus": "1", "a_plus": "2", "g_gamma": "0"})

    def test_partial_exact_rejected(self):
        with pytest.raises(ExpressionError, match="both"):
            problem_from_spec(
                {
                    "gamma": "0.5",
                    "a_minus": "1",
                    "a_plus": "2",
                    "g_gamma": "0",
                    "u_minus": "x",
                }
            )

    def test_gamma_must_be_constant(self):
        with pytest.raises(ExpressionError, match="must not depend on x"):
            problem_from_spec(
                {
                    "gamma": "x/2",
                    "a_minus": "1",
                    "a_plus": "2",
                    "g_gamma": "0",
                    "f_minus": "1",
                    "f_plus": "1",
                }
            )

    def test_inline_manufactured_problem(self):
        p = problem_from_spec(
            {
                "gamma": "0.5",
                "a_minus": "1",
                "a_plus": "1",
                "g_gamma": "0",
                "u_minus": "x*(1-x)",
                "u_plus": "x*(1-x)",
            },
            name="smooth",
        )
        # -(u')' = 2 for u = x(1-x)
        assert p.f(np.array([0.2, 0.8])) == pytest.approx([2.0, 2.0])
        assert p.name == "smooth"
