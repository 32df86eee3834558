import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from limcycles import expr as ex
from limcycles.expr import ParseError, UnknownIdentifierError, differentiate, parse

SYSTEM8_P = "y*(x^2+y^2-(x^2+y^2)^2)+x*(1-3*(x^2+y^2)+(x^2+y^2)^2)"


class TestParse:
    def test_polynomial_matches_product_form(self):
        e = parse("x^2 - 1")
        for x in (-2.0, 0.3, 2.0):
            assert e.eval(x, 0.0) == pytest.approx(x * x - 1)
        assert e.eval(2, 0) == 3

    def test_system8_component(self):
        e = parse(SYSTEM8_P)
        assert e.eval(1, 0) == pytest.approx(-1.0)
        x, y = 0.3, -0.7
        r2 = x * x + y * y
        assert e.eval(x, y) == pytest.approx(y * (r2 - r2**2) + x * (1 - 3 * r2 + r2**2), rel=1e-14)

    def test_truncated_input_reports_offset(self):
        with pytest.raises(ParseError) as info:
            parse("x +")
        assert info.value.offset == 3

    @pytest.mark.parametrize("text", ["", "  ", "(x", "x)", "x ^ y", "x^-1", "2 x", "sin x", "x $ 1"])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            parse(text)

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError) as info:
            parse("x + z")
        assert info.value.offset == 4

    def test_power_is_left_associative(self):
        assert parse("x^2^3").eval(2, 0) == 2.0**6

    def test_unary_minus_binds_looser_than_power(self):
        assert parse("-x^2").eval(3, 0) == -9.0

    def test_exponent_notation(self):
        assert parse("1.5e-3*x").eval(2, 0) == pytest.approx(3e-3)

    def test_functions(self):
        assert parse("sin(x)").eval(0, 5) == 0.0
        assert parse("cos(y)").eval(0, 0) == 1.0
        assert parse("exp(x+y)").eval(1, 1) == pytest.approx(math.e**2)


class TestEval:
    def test_basic(self):
        assert parse("x^2-1").eval(0, 0) == -1

    def test_division_by_zero_is_not_an_exception(self):
        v = parse("1/x").eval(0.0, 0.0)
        assert math.isinf(v)
        assert math.isnan(parse("0/x").eval(0.0, 0.0))

    def test_constant_division_by_zero(self):
        assert parse("1/0").eval(0.0, 0.0) == math.inf
        assert math.isnan(parse("x + 0/0").eval(1.0, 0.0))

    def test_overflow_gives_inf(self):
        assert parse("exp(x)").eval(1000.0, 0.0) == math.inf

    def test_array_matches_scalar(self):
        e = parse("sin(x)*y^3 - x/(1+y^2)")
        xs = np.linspace(-2, 2, 7)
        ys = np.linspace(-1, 3, 7)
        want = [e.eval(a, b) for a, b in zip(xs, ys)]
        np.testing.assert_allclose(e.eval_array(xs, ys), want, rtol=1e-14)

    def test_array_broadcasts_constants(self):
        out = parse("2").eval_array(np.zeros((3, 4)), np.zeros((3, 4)))
        assert out.shape == (3, 4)
        assert np.all(out == 2)


class TestDifferentiate:
    def test_square(self):
        d = differentiate(parse("x^2 - 1"), "x")
        assert d.eval(2, 0) == pytest.approx(4.0)

    def test_product(self):
        d = differentiate(parse("x*y"), "y")
        for x in (-1.5, 0.0, 2.0):
            assert d.eval(x, 0.7) == pytest.approx(x)

    def test_system11_partial(self):
        q = parse("(5*x^2-1)*y^3 - x^3 - x*y^2")
        assert differentiate(q, "x").eval(1, 1) == pytest.approx(6.0)

    def test_chain_rule(self):
        d = differentiate(parse("sin(x*y)"), "x")
        assert d.eval(0.5, 2.0) == pytest.approx(2.0 * math.cos(1.0))

    def test_quotient(self):
        d = differentiate(parse("x/(1+x^2)"), "x")
        x = 0.7
        assert d.eval(x, 0) == pytest.approx((1 - x * x) / (1 + x * x) ** 2)

    def test_constant_is_zero(self):
        assert differentiate(parse("3*y"), "x").is_constant


class TestPolyCoeffs:
    def test_polynomial(self):
        np.testing.assert_allclose(ex.poly_coeffs(parse("(x-1)*(x+2)"), "x"), [-2, 1, 1])

    def test_non_polynomial(self):
        assert ex.poly_coeffs(parse("sin(x)"), "x") is None
        assert ex.poly_coeffs(parse("1/(1+x^2)"), "x") is None
        assert ex.poly_coeffs(parse("x*y"), "x") is None

    def test_division_by_constant_is_polynomial(self):
        np.testing.assert_allclose(ex.poly_coeffs(parse("x^3/3 - x"), "x"), [0, -1, 0, 1 / 3])

    def test_roundtrip(self):
        c = np.array([1.0, -2.0, 0.0, 0.5])
        np.testing.assert_allclose(ex.poly_coeffs(ex.from_coeffs(c, "x"), "x"), c)


# ---------------------------------------------------------------------------
# random expressions

_leaf = st.one_of(
    st.sampled_from([ex.Var("x"), ex.Var("y")]),
    st.integers(-5, 5).map(lambda v: ex.Num(float(v))),
    st.floats(-3, 3, allow_nan=False).map(lambda v: ex.Num(round(v, 3))),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*"), children, children).map(lambda t: ex.BinOp(*t)),
        st.tuples(children, st.integers(0, 4)).map(lambda t: ex.Pow(*t)),
        children.map(ex.Neg),
    )


polynomials = st.recursive(_leaf, _extend, max_leaves=12)


def _with_calls(children):
    return st.one_of(
        _extend(children),
        st.tuples(st.sampled_from(ex.FUNCTIONS), children).map(lambda t: ex.Call(*t)),
        st.tuples(children, children).map(lambda t: ex.BinOp("/", t[0], ex.BinOp("+", ex.Num(2.0), ex.Pow(t[1], 2)))),
    )


general = st.recursive(_leaf, _with_calls, max_leaves=10)
points = st.tuples(st.floats(-3, 3), st.floats(-3, 3))


class TestProperties:
    @settings(max_examples=1000, deadline=None)
    @given(polynomials, points, st.sampled_from(["x", "y"]))
    def test_derivative_matches_central_difference(self, e, p, var):
        x, y = p
        h = 1e-5
        d = differentiate(e, var).eval(x, y)
        if var == "x":
            fd = (e.eval(x + h, y) - e.eval(x - h, y)) / (2 * h)
        else:
            fd = (e.eval(x, y + h) - e.eval(x, y - h)) / (2 * h)
        # roundoff in the difference quotient scales with the size of e
        scale = 1 + abs(d) + abs(e.eval(x, y)) * 1e-5 / h
        assert abs(d - fd) < 1e-5 * scale

    @settings(max_examples=300, deadline=None)
    @given(general, points)
    def test_print_parse_roundtrip(self, e, p):
        again = parse(str(e))
        a, b = e.eval(*p), again.eval(*p)
        if math.isnan(a):
            assert math.isnan(b)
        else:
            assert b == pytest.approx(a, rel=1e-12, abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(polynomials)
    def test_poly_coeffs_evaluate_consistently(self, e):
        c = ex.poly_coeffs(e, "x")
        if e.depends_on("y"):
            assert c is None
            return
        assert c is not None
        for x in (-1.3, 0.0, 0.4, 2.1):
            assert np.polynomial.polynomial.polyval(x, c) == pytest.approx(e.eval(x, 0.0), rel=1e-9, abs=1e-9)


class TestConstructors:
    def test_folding(self):
        assert ex.add(ex.Num(2.0), ex.Num(3.0)) == ex.Num(5.0)
        assert ex.mul(ex.Num(0.0), ex.Var("x")) == ex.Num(0.0)
        assert ex.mul(ex.Num(1.0), ex.Var("x")) == ex.Var("x")
        assert ex.neg(ex.neg(ex.Var("y"))) == ex.Var("y")
