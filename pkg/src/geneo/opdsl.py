"""Text expression language for operator trees.

Grammar:
    expr     := ['unchecked'] node
    node     := 'id'
              | 'rot' '(' angle ')' | 'refl' '(' angle ')'
              | 'Mp' '(' number ';' expr {',' expr} ')'
              | 'L' '(' lipspec ';' expr {',' expr} ')'
              | 'series' '(' 'geom' '(' number ',' number ')' ','
                         famspec ';' 'eps' '=' number ')'
              | 'compose' '(' expr ',' expr ')'
    lipspec  := 'max' | 'min' | 'proj' ':' integer
              | 'convex' ':' number {',' number}
    famspec  := 'rot-family' '(' angle ')' | 'const' '(' expr ')'
    angle    := '0' | [number] 'pi' ['/' number]

Angles are symbolic multiples of pi and are resolved against the grid while
parsing; an angle that is not a multiple of 2*pi/n is rejected.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .circle import FunctionSpace, GridCircle, Group, GroupElement
from .operators import (
    ConvexCombination,
    GeometricCoefficients,
    LipschitzMap,
    MaxMap,
    MinMap,
    Operator,
    ConstantFamily,
    Projection,
    RotationFamily,
    TruncationPolicy,
    compose,
    identity,
    lipschitz_combine,
    power_mean,
    precompose,
    series,
)

__all__ = ["parse", "elaborate", "print_expr", "ParseError", "ElaborationError",
           "OpExpr"]


class ParseError(ValueError):
    def __init__(self, message: str, position: int, expected: Sequence[str] = ()):
        self.position = position
        self.expected = tuple(expected)
        detail = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"at offset {position}: {message}{detail}")


class ElaborationError(ValueError):
    pass


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class ExprId:
    pass


@dataclass(frozen=True)
class ExprRot:
    turns: Fraction          # fraction of a full revolution
    shift: int               # resolved grid shift


@dataclass(frozen=True)
class ExprRefl:
    turns: Fraction
    shift: int


@dataclass(frozen=True)
class ExprMp:
    p: float
    children: tuple["OpExpr", ...]


@dataclass(frozen=True)
class ExprL:
    spec: str                          # "max" | "min" | "proj" | "convex"
    params: tuple[float, ...]          # proj coordinate or convex weights
    children: tuple["OpExpr", ...]


@dataclass(frozen=True)
class ExprSeries:
    c: float
    r: float
    family: Union["ExprRotFamily", "ExprConstFamily"]
    epsilon: float


@dataclass(frozen=True)
class ExprRotFamily:
    turns: Fraction
    shift: int


@dataclass(frozen=True)
class ExprConstFamily:
    child: "OpExpr"


@dataclass(frozen=True)
class ExprCompose:
    outer: "OpExpr"
    inner: "OpExpr"


@dataclass(frozen=True)
class ExprUnchecked:
    child: "OpExpr"


OpExpr = Union[ExprId, ExprRot, ExprRefl, ExprMp, ExprL, ExprSeries,
               ExprCompose, ExprUnchecked]


# --- Tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
  | (?P<punct>[();,:=/])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Token:
    kind: str          # "number" | "ident" | "punct" | "eof"
    text: str
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, grid: GridCircle):
        self.tokens = _tokenize(text)
        self.i = 0
        self.grid = grid

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else f"<{kind}>"
            raise ParseError(f"unexpected {tok.text or 'end of input'!r}",
                             tok.position, [want])
        return self.next()

    def number(self) -> float:
        tok = self.expect("number")
        return float(tok.text)

    # angle := '0' | [number] 'pi' ['/' number]; value in turns (of 2*pi)
    def angle(self) -> Fraction:
        tok = self.peek()
        coef = Fraction(1)
        if tok.kind == "number":
            self.next()
            if "." in tok.text or "e" in tok.text or "E" in tok.text:
                raise ParseError("angle coefficients must be integers", tok.position)
            coef = Fraction(int(tok.text))
            if self.peek().text != "pi":
                if coef == 0:
                    return Fraction(0)
                raise ParseError("expected 'pi' in angle", self.peek().position, ["pi"])
        elif tok.text != "pi":
            raise ParseError(f"unexpected {tok.text!r} in angle", tok.position,
                             ["pi", "0"])
        self.expect("ident", "pi")
        denom = Fraction(1)
        if self.peek().text == "/":
            self.next()
            d = self.expect("number")
            if "." in d.text or "e" in d.text or "E" in d.text:
                raise ParseError("angle denominators must be integers", d.position)
            denom = Fraction(int(d.text))
            if denom == 0:
                raise ParseError("angle denominator must be nonzero", d.position)
        return coef / (2 * denom)

    def resolved_angle(self) -> tuple[Fraction, int]:
        tok = self.peek()
        turns = self.angle() % 1
        steps = turns * self.grid.n
        if steps.denominator != 1:
            raise ParseError(
                f"angle is not a multiple of 2pi/{self.grid.n}", tok.position)
        return turns, int(steps)

    def expr(self) -> OpExpr:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "unchecked":
            self.next()
            return ExprUnchecked(self.expr())
        return self.node()

    def node(self) -> OpExpr:
        tok = self.peek()
        if tok.kind != "ident":
            raise ParseError(f"unexpected {tok.text or 'end of input'!r}",
                             tok.position,
                             ["id", "rot", "refl", "Mp", "L", "series",
                              "compose", "unchecked"])
        name = tok.text
        if name == "id":
            self.next()
            return ExprId()
        if name in ("rot", "refl"):
            self.next()
            self.expect("punct", "(")
            turns, shift = self.resolved_angle()
            self.expect("punct", ")")
            return ExprRot(turns, shift) if name == "rot" else ExprRefl(turns, shift)
        if name == "Mp":
            self.next()
            self.expect("punct", "(")
            p = self.number()
            self.expect("punct", ";")
            children = self.expr_list()
            self.expect("punct", ")")
            return ExprMp(p, children)
        if name == "L":
            self.next()
            self.expect("punct", "(")
            spec, params = self.lipspec()
            self.expect("punct", ";")
            children = self.expr_list()
            self.expect("punct", ")")
            return ExprL(spec, params, children)
        if name == "series":
            self.next()
            self.expect("punct", "(")
            self.expect("ident", "geom")
            self.expect("punct", "(")
            c = self.number()
            self.expect("punct", ",")
            r = self.number()
            self.expect("punct", ")")
            self.expect("punct", ",")
            family = self.famspec()
            self.expect("punct", ";")
            self.expect("ident", "eps")
            self.expect("punct", "=")
            eps = self.number()
            self.expect("punct", ")")
            return ExprSeries(c, r, family, eps)
        if name == "compose":
            self.next()
            self.expect("punct", "(")
            outer = self.expr()
            self.expect("punct", ",")
            inner = self.expr()
            self.expect("punct", ")")
            return ExprCompose(outer, inner)
        raise ParseError(f"unknown operator {name!r}", tok.position,
                         ["id", "rot", "refl", "Mp", "L", "series", "compose"])

    def expr_list(self) -> tuple[OpExpr, ...]:
        out = [self.expr()]
        while self.peek().text == ",":
            self.next()
            out.append(self.expr())
        return tuple(out)

    def lipspec(self) -> tuple[str, tuple[float, ...]]:
        tok = self.expect("ident")
        if tok.text in ("max", "min"):
            return tok.text, ()
        if tok.text == "proj":
            self.expect("punct", ":")
            k = self.number()
            if k != int(k) or k < 1:
                raise ParseError("projection coordinate must be a positive integer",
                                 tok.position)
            return "proj", (k,)
        if tok.text == "convex":
            self.expect("punct", ":")
            weights = [self.number()]
            while self.peek().text == ",":
                self.next()
                weights.append(self.number())
            return "convex", tuple(weights)
        raise ParseError(f"unknown lipschitz map {tok.text!r}", tok.position,
                         ["max", "min", "proj", "convex"])

    def famspec(self):
        tok = self.expect("ident")
        if tok.text == "rot-family":
            self.expect("punct", "(")
            turns, shift = self.resolved_angle()
            self.expect("punct", ")")
            return ExprRotFamily(turns, shift)
        if tok.text == "const":
            self.expect("punct", "(")
            child = self.expr()
            self.expect("punct", ")")
            return ExprConstFamily(child)
        raise ParseError(f"unknown family {tok.text!r}", tok.position,
                         ["rot-family", "const"])


def parse(text: str, grid: GridCircle) -> OpExpr:
    """Parse a DSL expression, resolving angles against the grid."""
    parser = _Parser(text, grid)
    expr = parser.expr()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.position, ["end of input"])
    return expr


# --- Printing --------------------------------------------------------------

def _fmt_angle(turns: Fraction) -> str:
    if turns == 0:
        return "0"
    half = turns * 2  # multiples of pi
    if half.denominator == 1:
        return f"{half.numerator}pi" if half.numerator != 1 else "pi"
    num = f"{half.numerator}pi" if half.numerator != 1 else "pi"
    return f"{num}/{half.denominator}"


def print_expr(expr: OpExpr) -> str:
    """Canonical text form; parses back to an equal AST."""
    if isinstance(expr, ExprId):
        return "id"
    if isinstance(expr, ExprRot):
        return f"rot({_fmt_angle(expr.turns)})"
    if isinstance(expr, ExprRefl):
        return f"refl({_fmt_angle(expr.turns)})"
    if isinstance(expr, ExprMp):
        args = ", ".join(print_expr(c) for c in expr.children)
        return f"Mp({expr.p:g}; {args})"
    if isinstance(expr, ExprL):
        if expr.spec == "proj":
            spec = f"proj:{int(expr.params[0])}"
        elif expr.spec == "convex":
            spec = "convex:" + ",".join(f"{w:g}" for w in expr.params)
        else:
            spec = expr.spec
        args = ", ".join(print_expr(c) for c in expr.children)
        return f"L({spec}; {args})"
    if isinstance(expr, ExprSeries):
        if isinstance(expr.family, ExprRotFamily):
            fam = f"rot-family({_fmt_angle(expr.family.turns)})"
        else:
            fam = f"const({print_expr(expr.family.child)})"
        return f"series(geom({expr.c:g},{expr.r:g}), {fam}; eps={expr.epsilon:g})"
    if isinstance(expr, ExprCompose):
        return f"compose({print_expr(expr.outer)}, {print_expr(expr.inner)})"
    if isinstance(expr, ExprUnchecked):
        return f"unchecked {print_expr(expr.child)}"
    raise TypeError(f"not an expression: {expr!r}")


# --- Elaboration -----------------------------------------------------------

def elaborate(expr: OpExpr, group: Group, space: FunctionSpace,
              _unchecked: bool = False) -> Operator:
    """Build the operator, running the construction-time guarantees.

    Checks that precompositions commute with the group, that power-mean
    exponents are >= 1 and series coefficients sum to at most 1; an
    'unchecked' prefix in the expression disables the guarantee for the
    subtree it marks.
    """
    grid = group.grid
    try:
        if isinstance(expr, ExprUnchecked):
            return elaborate(expr.child, group, space, _unchecked=True)
        if isinstance(expr, ExprId):
            return identity(grid)
        if isinstance(expr, (ExprRot, ExprRefl)):
            elem = GroupElement(expr.shift, isinstance(expr, ExprRefl))
            return precompose(grid, elem, group=group, unchecked=_unchecked)
        if isinstance(expr, ExprMp):
            children = [elaborate(c, group, space, _unchecked) for c in expr.children]
            return power_mean(expr.p, children, unchecked=_unchecked)
        if isinstance(expr, ExprL):
            children = [elaborate(c, group, space, _unchecked) for c in expr.children]
            k = len(children)
            lmap: LipschitzMap
            if expr.spec == "max":
                lmap = MaxMap(k)
            elif expr.spec == "min":
                lmap = MinMap(k)
            elif expr.spec == "proj":
                lmap = Projection(k, int(expr.params[0]) - 1)
            else:
                lmap = ConvexCombination(expr.params)
            return lipschitz_combine(lmap, children)
        if isinstance(expr, ExprSeries):
            coeffs = GeometricCoefficients(expr.c, expr.r)
            if isinstance(expr.family, ExprRotFamily):
                family = RotationFamily(grid, expr.family.shift)
            else:
                family = ConstantFamily(
                    elaborate(expr.family.child, group, space, _unchecked))
            bound = space.sup_bound
            if not (bound > 0 and bound != float("inf")):
                raise ElaborationError("series needs a finite positive space bound")
            return series(coeffs, family, TruncationPolicy(expr.epsilon), bound)
        if isinstance(expr, ExprCompose):
            return compose(elaborate(expr.outer, group, space, _unchecked),
                           elaborate(expr.inner, group, space, _unchecked))
    except (ElaborationError, ParseError):
        raise
    except ValueError as exc:
        raise ElaborationError(str(exc)) from exc
    raise TypeError(f"not an expression: {expr!r}")


def parse_operator(text: str, group: Group, space: FunctionSpace) -> Operator:
    """Convenience: parse and elaborate in one step."""
    return elaborate(parse(text, group.grid), group, space)
