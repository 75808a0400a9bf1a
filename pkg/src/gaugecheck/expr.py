# Standard Python packages
import cmath
from functools import lru_cache
import logging
import math
import re
# Non-standard Python packages
import numpy as np
import sympy as sp
from sympy.printing.precedence import PRECEDENCE
from sympy.printing.str import StrPrinter

logger = logging.getLogger(__name__)

#: Chart coordinates x0, x1, x2, x3 (real-valued)
COORDINATES = sp.symbols("x0:4", real=True)

#: Every field component is a sympy expression in the chart coordinates
ScalarExpr = sp.Expr

_CONSTANTS = {"i": sp.I, "pi": sp.pi}
_FUNCTIONS = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp, "log": sp.log,
              "conj": sp.conjugate}
_VARIABLES = {str(x): x for x in COORDINATES}

_TOKEN = re.compile(r"""
    (?P<space>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)

###############################################################################
# Errors
###############################################################################
class ExpressionSyntaxError(ValueError):
    """Expression source text does not conform to the grammar"""

    def __init__(self, message: str, text: str, position: int) -> None:
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position} in {text!r}")

class DomainError(ValueError):
    """Expression is not defined at the requested point"""

    def __init__(self, message: str, subterm, point=None) -> None:
        self.message = message
        self.subterm = subterm
        self.point = point
        where = "" if point is None else f" at {tuple(point)}"
        super().__init__(f"{message} in subterm {format_expr(subterm)}{where}")

###############################################################################
# ChartPoint
###############################################################################
class ChartPoint(tuple):
    """Point of the chart given by four finite real coordinates"""

    def __new__(cls, x0: float, x1: float, x2: float, x3: float) -> 'ChartPoint':
        coords = tuple(float(x) for x in (x0, x1, x2, x3))
        if not all(math.isfinite(x) for x in coords):
            raise ValueError(f"Chart point coordinates must be finite: {coords}")
        return super().__new__(cls, coords)

    @classmethod
    def from_array(cls, values) -> 'ChartPoint':
        """Create a chart point from any length four sequence"""
        values = np.ravel(values)
        if len(values) != 4:
            raise ValueError("A chart point needs exactly four coordinates!")
        return cls(*values)

###############################################################################
# Parsing
###############################################################################
class _Parser:
    """Recursive descent parser producing sympy expressions

    Grammar::

        sum     := product (("+" | "-") product)*
        product := unary (("*" | "/") unary)*
        unary   := ("+" | "-") unary | power
        power   := atom ("^" unary)?
        atom    := number | variable | constant | function "(" sum ")"
                 | "(" sum ")"
    """

    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = self._tokenize(text)
        self.index = 0

    def _tokenize(self, text: str) -> list:
        tokens = []
        position = 0
        while position < len(text):
            match = _TOKEN.match(text, position)
            if match is None:
                raise ExpressionSyntaxError(
                    f"unexpected character {text[position]!r}", text, position)
            if match.lastgroup != "space":
                tokens.append((match.lastgroup, match.group(), position))
            position = match.end()
        tokens.append(("end", "", len(text)))
        return tokens

    def _peek(self) -> tuple:
        return self.tokens[self.index]

    def _next(self) -> tuple:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _expect(self, value: str) -> None:
        kind, text, position = self._next()
        if text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}",
                                        self.text, position)

    def parse(self) -> ScalarExpr:
        expr = self._sum()
        kind, text, position = self._peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {text!r}", self.text,
                                        position)
        return expr

    def _sum(self) -> ScalarExpr:
        expr = self._product()
        while self._peek()[1] in ("+", "-"):
            op = self._next()[1]
            rhs = self._product()
            expr = expr + rhs if op == "+" else expr - rhs
        return expr

    def _product(self) -> ScalarExpr:
        expr = self._unary()
        while self._peek()[1] in ("*", "/"):
            op = self._next()[1]
            rhs = self._unary()
            expr = expr * rhs if op == "*" else _quotient(expr, rhs)
        return expr

    def _unary(self) -> ScalarExpr:
        if self._peek()[1] in ("+", "-"):
            op = self._next()[1]
            operand = self._unary()
            return operand if op == "+" else -operand
        return self._power()

    def _power(self) -> ScalarExpr:
        base = self._atom()
        if self._peek()[1] != "^":
            return base
        position = self._next()[2]
        exponent = self._unary()
        if not (exponent.is_Number and exponent.is_real
                and exponent == int(exponent)):
            raise ExpressionSyntaxError("exponent must be an integer constant",
                                        self.text, position + 1)
        return base ** sp.Integer(int(exponent))

    def _atom(self) -> ScalarExpr:
        kind, text, position = self._next()
        if kind == "number":
            return sp.Rational(text)
        if kind == "name":
            if text in _VARIABLES:
                return _VARIABLES[text]
            if text in _CONSTANTS:
                return _CONSTANTS[text]
            if text in _FUNCTIONS:
                self._expect("(")
                argument = self._sum()
                self._expect(")")
                if text == "log" and argument.is_number:
                    # Constant arguments stay unevaluated for the domain check
                    return sp.log(argument, evaluate=False)
                return _FUNCTIONS[text](argument)
            raise ExpressionSyntaxError(f"unknown identifier {text!r}",
                                        self.text, position)
        if text == "(":
            expr = self._sum()
            self._expect(")")
            return expr
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"unexpected {found}", self.text, position)

def _quotient(lhs: ScalarExpr, rhs: ScalarExpr) -> ScalarExpr:
    if rhs.is_zero:
        return sp.Mul(lhs, sp.Pow(rhs, -1, evaluate=False), evaluate=False)
    return lhs / rhs

def parse_expr(text: str) -> ScalarExpr:
    """Parse expression source text

    Identifiers are the coordinates ``x0`` to ``x3``, the imaginary unit
    ``i`` and ``pi``. Operators are ``+ - * /`` and ``^`` with an integer
    exponent; functions are ``sin``, ``cos``, ``exp``, ``log`` and ``conj``.
    Numeric literals are read as exact rationals.

    Parameters
    ----------
    text : str
        Expression source

    Returns
    -------
    : ScalarExpr
        Parsed expression

    Raises
    ------
    ExpressionSyntaxError
        If the text is malformed or uses an unknown identifier
    """
    return _Parser(text).parse()

###############################################################################
# Printing
###############################################################################
class _GrammarPrinter(StrPrinter):
    """String printer whose output is accepted by parse_expr"""

    def _print_ImaginaryUnit(self, expr):
        return "i"

    def _print_Exp1(self, expr):
        return "exp(1)"

    def _print_Pi(self, expr):
        return "pi"

    def _print_conjugate(self, expr):
        return f"conj({self._print(expr.args[0])})"

    def _print_Pow(self, expr, rational=False):
        base, exponent = expr.as_base_exp()
        if exponent == -1:
            return f"1/{self.parenthesize(base, PRECEDENCE['Pow'])}"
        if exponent.is_Rational and not exponent.is_Integer:
            # Only reachable through direct sympy construction
            return f"exp({self._print(exponent)}*log({self._print(base)}))"
        text = self.parenthesize(base, PRECEDENCE["Pow"], strict=True)
        if exponent.is_Integer and exponent >= 0:
            return f"{text}^{exponent}"
        return f"{text}^({self._print(exponent)})"

_PRINTER = _GrammarPrinter()

def format_expr(e: ScalarExpr) -> str:
    """Print an expression in the grammar read by parse_expr"""
    return _PRINTER.doprint(sp.sympify(e))

###############################################################################
# Construction helpers
###############################################################################
def as_expr(value) -> ScalarExpr:
    """Coerce source text, numbers, or sympy objects to a ScalarExpr"""
    if isinstance(value, str):
        return parse_expr(value)
    return sp.sympify(value)

def as_expr_array(values, shape: tuple | None = None) -> np.ndarray:
    """Coerce nested values into an object array of ScalarExpr

    Parameters
    ----------
    values : array_like
        Nested lists or arrays of source text, numbers or sympy objects
    shape : tuple | None
        Required shape of the result, not checked if None

    Returns
    -------
    array : np.ndarray
        Object array of sympy expressions
    """
    if isinstance(values, sp.MatrixBase):
        values = values.tolist()
    raw = np.asarray(values, dtype=object)
    if shape is not None and raw.shape != tuple(shape):
        raise ValueError(f"Expected component array of shape {tuple(shape)}, "
                         f"got {raw.shape}!")
    array = np.empty(raw.shape, dtype=object)
    for index in np.ndindex(raw.shape):
        array[index] = as_expr(raw[index])
    return array

def conj_expr(e: ScalarExpr) -> ScalarExpr:
    """Complex conjugate of an expression"""
    return sp.conjugate(e)

#: Elementwise complex conjugation of ScalarExpr arrays
conj_array = np.frompyfunc(conj_expr, 1, 1)

###############################################################################
# Differentiation
###############################################################################
def diff_expr(e: ScalarExpr, axis: int) -> ScalarExpr:
    """Exact partial derivative with respect to a chart coordinate

    Parameters
    ----------
    e : ScalarExpr
        Expression to differentiate
    axis : int
        Coordinate index 0 to 3

    Returns
    -------
    : ScalarExpr
        Partial derivative of e with respect to x^axis
    """
    if axis not in range(4):
        raise ValueError(f"Coordinate index must be 0 to 3, got {axis}!")
    return sp.diff(e, COORDINATES[axis])

###############################################################################
# Evaluation
###############################################################################
def _evaluate(e: sp.Basic, values: dict) -> complex:
    """Evaluate an expression tree, checking every singular subterm"""
    if e.is_Symbol:
        if e not in values:
            raise ValueError(f"Unknown variable {e}!")
        return complex(values[e])
    # Numbers holding a log or a power are checked term by term
    if (e.is_number and not e.has(sp.zoo, sp.nan, sp.oo)
            and not e.atoms(sp.log, sp.Pow)):
        return complex(e.evalf())
    if e.has(sp.zoo, sp.nan, sp.oo) and not e.args:
        raise DomainError("division by zero", e)

    args = [_evaluate(arg, values) for arg in e.args]
    if isinstance(e, sp.Add):
        return sum(args, 0j)
    if isinstance(e, sp.Mul):
        return math.prod(args, start=1 + 0j)
    if isinstance(e, sp.Pow):
        base, exponent = args
        if base == 0 and exponent.real < 0:
            raise DomainError("division by zero", e)
        if exponent.imag == 0 and exponent.real == int(exponent.real):
            return base ** int(exponent.real)
        return base ** exponent
    if isinstance(e, sp.log):
        (arg,) = args
        if arg.imag == 0 and arg.real <= 0:
            raise DomainError("log of nonpositive real", e)
        return cmath.log(arg)
    if isinstance(e, sp.exp):
        return cmath.exp(args[0])
    if isinstance(e, sp.sin):
        return cmath.sin(args[0])
    if isinstance(e, sp.cos):
        return cmath.cos(args[0])
    if isinstance(e, sp.conjugate):
        return args[0].conjugate()
    if isinstance(e, sp.re):
        return complex(args[0].real)
    if isinstance(e, sp.im):
        return complex(args[0].imag)
    if isinstance(e, sp.Abs):
        return complex(abs(args[0]))
    return complex(e.subs(values).evalf())

def eval_expr(e: ScalarExpr, p: ChartPoint) -> complex:
    """Evaluate an expression at a chart point

    Parameters
    ----------
    e : ScalarExpr
        Expression to evaluate
    p : ChartPoint
        Point of evaluation

    Returns
    -------
    value : complex
        Finite value of e at p

    Raises
    ------
    DomainError
        If a subterm divides by zero, takes the log of a nonpositive real or
        is otherwise not finite
    """
    if not isinstance(p, ChartPoint):
        p = ChartPoint.from_array(p)
    values = dict(zip(COORDINATES, p))
    try:
        value = _evaluate(sp.sympify(e), values)
    except DomainError as error:
        raise DomainError(error.message, error.subterm, p) from None
    except (ZeroDivisionError, OverflowError, TypeError):
        raise DomainError("non-finite value", e, p) from None
    if not cmath.isfinite(value):
        raise DomainError("non-finite value", e, p)
    return value

@lru_cache(maxsize=512)
def _compile(exprs: tuple):
    """Compile a tuple of expressions into one numpy function"""
    logger.debug(f"Compiling {len(exprs)} expressions for evaluation")
    return sp.lambdify(COORDINATES, list(exprs), modules="numpy", cse=True)

def eval_array(exprs, points) -> np.ndarray:
    """Evaluate an array of expressions at a set of points

    Parameters
    ----------
    exprs : array_like
        Array of ScalarExpr (any shape)
    points : array_like
        Sample points with shape (N, 4)

    Returns
    -------
    values : np.ndarray
        Complex values with shape (N, *exprs.shape)

    Raises
    ------
    DomainError
        If any component is not finite at any point
    """
    exprs = np.asarray(exprs, dtype=object)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != 4:
        raise ValueError("Sample points must have shape (N, 4)!")
    flat = tuple(sp.sympify(e) for e in exprs.ravel())
    values = np.empty((len(points), len(flat)), dtype=complex)
    if flat:
        try:
            with np.errstate(all="ignore"):
                columns = _compile(flat)(*points.T)
        except (ZeroDivisionError, TypeError, NameError):
            # Constant singularities fail at every point
            point = ChartPoint.from_array(points[0])
            for e in flat:
                eval_expr(e, point)
            raise
        for idx, column in enumerate(columns):
            values[:, idx] = np.broadcast_to(np.asarray(column, dtype=complex),
                                             len(points))
    bad = ~np.isfinite(values)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        point = ChartPoint.from_array(points[row])
        eval_expr(flat[col], point)
        raise DomainError("non-finite value", flat[col], point)
    return values.reshape((len(points),) + exprs.shape)
