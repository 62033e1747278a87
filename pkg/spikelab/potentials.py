"""
Coefficient fields J and V given as expressions over x1..xN.

Grammar (see docs/expressions.md):

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | "+" unary | power
    power   := atom ("^" unary)?
    atom    := number | variable | func "(" expr ")" | "(" expr ")"
    func    := "exp" | "sin" | "cos" | "sqrt"

Expressions are built as sympy trees with exact rational literals, so
gradients and Hessians are symbolic derivatives, evaluated through numpy.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Callable, List, Sequence, Tuple, Union

import numpy as np
import sympy as sp
from numpy.typing import ArrayLike, NDArray
from sympy.printing.str import StrPrinter

from spikelab.errors import (
    AssumptionError,
    ExpressionDomainError,
    ExpressionSyntaxError,
    PreconditionError,
    UndefinedExpressionError,
)
from spikelab.logging_config import get_logger

if TYPE_CHECKING:
    from spikelab.geometry import DomainSpec


FUNCTIONS = {
    "exp": sp.exp,
    "sin": sp.sin,
    "cos": sp.cos,
    "sqrt": sp.sqrt,
}

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)
_VARIABLE = re.compile(r"x([1-9][0-9]*)$")


def _tokenize(src: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos].isspace():
            pos += 1
            continue
        match = _TOKEN.match(src, pos)
        if match is None or match.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {src[pos]!r}", pos, src)
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append((kind, match.group(kind), start))
        pos = match.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    """Recursive-descent parser producing a sympy expression."""

    def __init__(self, src: str, dimension: int) -> None:
        self.src = src
        self.dimension = dimension
        self.tokens = _tokenize(src)
        self.index = 0
        self.symbols = variables(dimension)

    @property
    def current(self) -> Tuple[str, str, int]:
        return self.tokens[self.index]

    def _error(self, message: str) -> ExpressionSyntaxError:
        return ExpressionSyntaxError(message, self.current[2], self.src)

    def _accept(self, *ops: str) -> str:
        kind, text, _ = self.current
        if kind == "op" and text in ops:
            self.index += 1
            return text
        return ""

    def _expect(self, op: str) -> None:
        if not self._accept(op):
            found = self.current[1] or "end of input"
            raise self._error(f"expected {op!r}, found {found!r}")

    def parse(self) -> sp.Expr:
        expr = self.expr()
        if self.current[0] != "end":
            raise self._error(f"unexpected {self.current[1]!r}")
        return expr

    def expr(self) -> sp.Expr:
        value = self.term()
        while True:
            op = self._accept("+", "-")
            if not op:
                return value
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs

    def term(self) -> sp.Expr:
        value = self.unary()
        while True:
            op = self._accept("*", "/")
            if not op:
                return value
            rhs = self.unary()
            value = value * rhs if op == "*" else value / rhs

    def unary(self) -> sp.Expr:
        if self._accept("-"):
            return -self.unary()
        if self._accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> sp.Expr:
        base = self.atom()
        if self._accept("^"):
            return sp.Pow(base, self.unary())
        return base

    def atom(self) -> sp.Expr:
        kind, text, pos = self.current
        if kind == "number":
            self.index += 1
            return sp.Rational(text)
        if kind == "name":
            self.index += 1
            if text in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return FUNCTIONS[text](arg)
            match = _VARIABLE.match(text)
            if match is None:
                raise ExpressionSyntaxError(f"unknown identifier {text!r}", pos, self.src)
            index = int(match.group(1))
            if index > self.dimension:
                raise ExpressionSyntaxError(
                    f"variable {text} exceeds dimension N={self.dimension}", pos, self.src
                )
            return self.symbols[index - 1]
        if self._accept("("):
            inner = self.expr()
            self._expect(")")
            return inner
        found = text or "end of input"
        raise self._error(f"unexpected {found!r}")


def variables(dimension: int) -> Tuple[sp.Symbol, ...]:
    return tuple(sp.Symbol(f"x{i}") for i in range(1, dimension + 1))


class _ExpressionPrinter(StrPrinter):
    def _print_Exp1(self, expr) -> str:
        return "exp(1)"


def pretty(expr: sp.Expr) -> str:
    """Render a tree back into the input grammar."""
    return _ExpressionPrinter().doprint(expr).replace("**", "^")


def _vectorized(func: Callable, expressions: Sequence[sp.Expr]) -> Callable:
    def evaluate(points: NDArray) -> NDArray:
        coords = np.moveaxis(points, -1, 0)
        with np.errstate(all="ignore"):
            raw = func(*coords)
        shape = points.shape[:-1]
        columns = [np.broadcast_to(np.asarray(v, dtype=float), shape) for v in raw]
        return np.stack(columns, axis=-1)

    return evaluate


@dataclass(frozen=True)
class PotentialField:
    """Immutable expression for J or V with symbolic first and second derivatives."""

    source: str
    dimension: int
    expr: sp.Expr

    @cached_property
    def symbols(self) -> Tuple[sp.Symbol, ...]:
        return variables(self.dimension)

    @cached_property
    def gradient_exprs(self) -> List[sp.Expr]:
        return [sp.diff(self.expr, s) for s in self.symbols]

    @cached_property
    def hessian_exprs(self) -> List[List[sp.Expr]]:
        return [[sp.diff(g, s) for s in self.symbols] for g in self.gradient_exprs]

    @cached_property
    def is_constant(self) -> bool:
        return not self.expr.free_symbols

    @cached_property
    def _value_fn(self) -> Callable:
        return _vectorized(sp.lambdify(self.symbols, [self.expr], "numpy"), [self.expr])

    @cached_property
    def _gradient_fn(self) -> Callable:
        exprs = self.gradient_exprs
        return _vectorized(sp.lambdify(self.symbols, exprs, "numpy"), exprs)

    @cached_property
    def _hessian_fn(self) -> Callable:
        exprs = [h for row in self.hessian_exprs for h in row]
        return _vectorized(sp.lambdify(self.symbols, exprs, "numpy"), exprs)

    def _points(self, x: ArrayLike) -> NDArray:
        points = np.asarray(x, dtype=float)
        if points.shape[-1:] != (self.dimension,):
            raise PreconditionError(
                f"points must have trailing dimension {self.dimension}, got shape {points.shape}"
            )
        return points

    def _checked(self, values: NDArray, points: NDArray, what: str) -> NDArray:
        finite = np.isfinite(values)
        if not finite.all():
            bad = np.argwhere(~finite)[0]
            where = points[tuple(bad[: points.ndim - 1])]
            raise ExpressionDomainError(f"{what} of {self.source!r} is not finite", where)
        return values

    def eval(self, x: ArrayLike) -> Union[float, NDArray]:
        points = self._points(x)
        values = self._checked(self._value_fn(points)[..., 0], points, "value")
        return float(values) if values.ndim == 0 else values

    def grad(self, x: ArrayLike) -> NDArray:
        points = self._points(x)
        return self._checked(self._gradient_fn(points), points, "gradient")

    def hessian(self, x: ArrayLike) -> NDArray:
        points = self._points(x)
        flat = self._checked(self._hessian_fn(points), points, "hessian")
        return flat.reshape(points.shape[:-1] + (self.dimension, self.dimension))

    def pretty(self) -> str:
        return pretty(self.expr)


def parse_expression(src: str, dimension: int) -> PotentialField:
    if not isinstance(dimension, (int, np.integer)) or dimension < 1:
        raise PreconditionError(f"N must be an integer >= 1, got {dimension!r}")
    expr = _Parser(src, int(dimension)).parse()
    if expr.has(sp.zoo, sp.nan, sp.oo, -sp.oo, sp.I):
        raise UndefinedExpressionError(f"expression {src!r} is undefined or complex")
    return PotentialField(source=src, dimension=int(dimension), expr=expr)


@dataclass(frozen=True)
class AssumptionCertificate:
    field: str
    min_value: float
    max_hessian: float
    n_points: int

    def as_dict(self) -> dict:
        return {
            "field": self.field,
            "min_value": self.min_value,
            "max_hessian": self.max_hessian,
            "n_points": self.n_points,
        }


def validate_assumptions(
    field: PotentialField,
    domain: "DomainSpec",
    n_samples: int = 100_000,
    *,
    name: str = "field",
    seed: int = 0,
    boundary_samples: int = 400,
) -> AssumptionCertificate:
    """Sampled check that the field is positive with bounded Hessian on the closed domain."""
    from spikelab.geometry import sample_boundary

    log = get_logger("potentials")
    if n_samples < 1:
        raise PreconditionError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    box = rng.uniform(domain.lower, domain.upper, size=(n_samples, domain.dimension))
    inside = box[domain.phi.eval(box) <= 0.0]
    boundary = np.array(
        [q.point for q in sample_boundary(domain, boundary_samples, seed=seed)]
    )
    points = np.vstack([inside, boundary])
    try:
        values = np.atleast_1d(field.eval(points))
        hessians = field.hessian(points)
    except ExpressionDomainError as exc:
        raise UndefinedExpressionError(
            f"{name}={field.source!r} is not finite on the domain", exc.point
        ) from exc
    certificate = AssumptionCertificate(
        field=name,
        min_value=float(values.min()),
        max_hessian=float(np.abs(hessians).max()),
        n_points=int(points.shape[0]),
    )
    log.info("assumptions_checked", **certificate.as_dict())
    if certificate.min_value <= 0.0:
        worst = points[int(np.argmin(values))]
        raise AssumptionError(
            f"{name}={field.source!r} is not positive on the domain: sampled "
            f"minimum {certificate.min_value:.6g} at x={worst.tolist()}"
        )
    return certificate


def example_spike_potential(k: float, q0: Sequence[float], width: float = 0.5) -> str:
    """V_k = 1 + k(1-|x|^2)/2 * exp(-|x-q0|^2/width^2) on the unit ball.

    V_k equals 1 on the unit sphere and its gradient at q0 is -k times the
    outward normal there.
    """
    if width <= 0.0:
        raise PreconditionError("width must be positive")
    n = len(q0)
    radius = " + ".join(f"x{i}^2" for i in range(1, n + 1))
    shift = " + ".join(
        f"(x{i} - ({float(c)!r}))^2" for i, c in enumerate(q0, start=1)
    )
    return (
        f"1 + ({float(k)!r})*(1 - ({radius}))/2"
        f"*exp(-({shift})/({float(width)!r})^2)"
    )
