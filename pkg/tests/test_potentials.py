import numpy as np
import pytest
import sympy as sp

from spikelab.errors import (
    AssumptionError,
    ExpressionDomainError,
    ExpressionSyntaxError,
    PreconditionError,
    UndefinedExpressionError,
)
from spikelab.potentials import (
    example_spike_potential,
    parse_expression,
    validate_assumptions,
)


def test_value_gradient_hessian():
    field = parse_expression("1+x1^2", 3)
    assert field.eval([2.0, 0.0, 0.0]) == pytest.approx(5.0)
    assert np.allclose(field.grad([2.0, 0.5, 0.0]), [4.0, 0.0, 0.0])
    assert np.allclose(field.hessian([0.3, 0.0, 0.0]), np.diag([2.0, 0.0, 0.0]))


def test_literals_are_exact():
    assert parse_expression("0.1", 1).expr == sp.Rational(1, 10)
    assert parse_expression("1e-2*x1", 1).expr == sp.Rational(1, 100) * sp.Symbol("x1")


def test_precedence_and_unary_minus():
    field = parse_expression("-x1^2 + 2*x2/4", 2)
    assert field.eval([3.0, 2.0]) == pytest.approx(-8.0)
    # right associative power
    assert parse_expression("2^3^2", 1).eval([0.0]) == pytest.approx(512.0)


@pytest.mark.parametrize(
    "src,position",
    [
        ("1 + * x1", 4),
        ("x4 + 1", 0),
        ("foo(x1)", 0),
        ("exp(x1", 6),
        ("1 $ 2", 2),
        ("(x1 + 1))", 8),
    ],
)
def test_syntax_errors_carry_offset(src, position):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression(src, 3)
    assert info.value.position == position
    assert info.value.source == src


def test_undefined_constant_expression():
    with pytest.raises(UndefinedExpressionError) as info:
        parse_expression("1/0", 2)
    assert isinstance(info.value, PreconditionError)


def test_field_undefined_on_domain_is_an_input_error(unit_ball):
    with pytest.raises(UndefinedExpressionError, match="not finite on the domain") as info:
        validate_assumptions(parse_expression("sqrt(x1) + 1", 3), unit_ball, 2000, name="V")
    assert info.value.point is not None and info.value.point[0] < 0.0
    assert isinstance(info.value.__cause__, ExpressionDomainError)


def test_pointwise_domain_errors():
    with pytest.raises(ExpressionDomainError) as info:
        parse_expression("1/x1", 1).eval([0.0])
    assert info.value.point == [0.0]
    with pytest.raises(ExpressionDomainError):
        parse_expression("sqrt(x1)", 1).eval([[1.0], [-1.0]])


def test_broadcasting_over_leading_axes():
    field = parse_expression("x1*x2 + x3", 3)
    points = np.random.default_rng(0).normal(size=(5, 4, 3))
    values = field.eval(points)
    assert values.shape == (5, 4)
    assert np.allclose(values, points[..., 0] * points[..., 1] + points[..., 2])
    assert field.grad(points).shape == (5, 4, 3)
    assert field.hessian(points).shape == (5, 4, 3, 3)


def test_constant_field_broadcasts():
    field = parse_expression("2", 2)
    assert field.is_constant
    assert np.allclose(field.eval(np.zeros((3, 2))), 2.0)
    assert np.allclose(field.grad(np.zeros((3, 2))), 0.0)


def test_wrong_trailing_dimension():
    with pytest.raises(PreconditionError):
        parse_expression("x1", 2).eval([1.0, 2.0, 3.0])


def test_pretty_reparses_to_same_tree():
    field = parse_expression("exp(1)*x1^2/3 - sin(x2)", 2)
    again = parse_expression(field.pretty(), 2)
    assert sp.simplify(again.expr - field.expr) == 0


@pytest.mark.parametrize(
    "src",
    ["exp(1)*x1^2/3 - sin(x2)", "sqrt(2 + x1^2)*cos(x2/3) - exp(x3/2)", "(1 + x1*x2)^3/7 + exp(-x3^2)"],
)
def test_pretty_round_trip_evaluates_identically(src):
    field = parse_expression(src, 3)
    again = parse_expression(field.pretty(), 3)
    points = np.random.default_rng(4).uniform(-1.0, 1.0, size=(100, 3))
    assert np.allclose(again.eval(points), field.eval(points), rtol=1e-15, atol=1e-15)


def random_polynomial(rng, dimension, terms=6):
    monomials = []
    for _ in range(terms):
        coefficient = int(rng.integers(-5, 6)) or 1
        powers = rng.integers(0, 4, size=dimension)
        factors = [f"x{i + 1}^{int(k)}" for i, k in enumerate(powers) if k]
        monomials.append("*".join([f"({coefficient})"] + factors))
    return " + ".join(monomials)


@pytest.mark.parametrize("seed", range(5))
def test_derivatives_match_finite_differences_of_random_polynomials(seed):
    rng = np.random.default_rng(seed)
    field = parse_expression(random_polynomial(rng, 3), 3)
    x = rng.uniform(-1.0, 1.0, size=3)
    h = 1e-5
    eye = np.eye(3)
    fd_grad = np.array([(field.eval(x + h * e) - field.eval(x - h * e)) / (2 * h) for e in eye])
    fd_hess = np.array([(field.grad(x + h * e) - field.grad(x - h * e)) / (2 * h) for e in eye])
    assert np.allclose(field.grad(x), fd_grad, rtol=1e-5, atol=1e-5)
    assert np.allclose(field.hessian(x), fd_hess, rtol=1e-5, atol=1e-5)
    assert np.allclose(field.hessian(x), field.hessian(x).T)


def test_assumptions_accept_positive_field(unit_ball):
    cert = validate_assumptions(parse_expression("1+x1^2", 3), unit_ball, 2000, name="V")
    assert cert.min_value >= 1.0
    assert cert.max_hessian == pytest.approx(2.0)
    assert cert.n_points > 400


def test_assumptions_reject_sign_change(unit_ball):
    with pytest.raises(AssumptionError, match="V="):
        validate_assumptions(parse_expression("x1", 3), unit_ball, 2000, name="V")


def test_example_spike_potential():
    q0 = [0.0, 0.0, 1.0]
    field = parse_expression(example_spike_potential(4.0, q0), 3)
    sphere = np.array([[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [0.0, 0.0, -1.0]])
    assert np.allclose(field.eval(sphere), 1.0)
    assert np.allclose(field.grad(q0), [0.0, 0.0, -4.0])
    assert field.eval([0.0, 0.0, 0.0]) > 1.0
