# bandkit/fields.py
"""Control fields u(p) and d(p): expressions, image fields, gradients."""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, List, Tuple, Union

import numpy as np

from .data import GRADIENT_FLOOR, GRADIENT_STEP_FRACTION
from .errors import BandError, ExpressionError
from .noise import value_noise
from .schemas import FieldKind, FieldSpec, ViewRect

logger = logging.getLogger(__name__)

VARIABLES = ("x", "y", "t")
CONSTANTS = {"pi": math.pi}

FUNCTIONS = {
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "sqrt": (1, np.sqrt),
    "abs": (1, np.abs),
    "exp": (1, np.exp),
    "log": (1, np.log),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
    "atan2": (2, np.arctan2),
    "hypot": (2, np.hypot),
    "vnoise": (3, value_noise),
}

BINARY = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


# --- AST ---

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Node", ...]


Node = Union[Num, Var, Neg, BinOp, Call]


# --- tokenizer ---

@dataclass(frozen=True)
class Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    pos: int


def tokenize(source: str) -> List[Token]:
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            start = i
            while i < n and (source[i].isdigit() or source[i] == "."):
                i += 1
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j < n and source[j].isdigit():
                    i = j
                    while i < n and source[i].isdigit():
                        i += 1
            text = source[start:i]
            try:
                value = float(text)
            except ValueError:
                raise ExpressionError(start, f"malformed number {text!r}")
            if not math.isfinite(value):
                raise ExpressionError(start, f"number {text!r} is out of range")
            tokens.append(Token("num", text, start))
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            tokens.append(Token("name", source[start:i], start))
            continue
        if c in "+-*/^(),":
            tokens.append(Token("op", c, i))
            i += 1
            continue
        raise ExpressionError(i, f"unexpected character {c!r}")
    tokens.append(Token("end", "", n))
    return tokens


# --- parser ---
#   expr  := term (("+"|"-") term)*
#   term  := unary (("*"|"/") unary)*
#   unary := "-" unary | power
#   power := atom ("^" unary)?        right associative
#   atom  := number | name | name "(" args ")" | "(" expr ")"

class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ExpressionError(tok.pos, f"expected {text!r}, found {found}")
        return self.advance()

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in ops

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionError(tok.pos, f"unexpected trailing {tok.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.at_op("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.at_op("-"):
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.at_op("^"):
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.advance()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "name":
            if self.at_op("("):
                return self.call(tok)
            if tok.text in VARIABLES:
                return Var(tok.text)
            if tok.text in CONSTANTS:
                return Num(CONSTANTS[tok.text])
            raise ExpressionError(tok.pos, f"unknown identifier {tok.text!r}")
        if tok.kind == "end":
            raise ExpressionError(tok.pos, "unexpected end of input")
        raise ExpressionError(tok.pos, f"unexpected {tok.text!r}")

    def call(self, name: Token) -> Node:
        if name.text not in FUNCTIONS:
            raise ExpressionError(name.pos, f"unknown function {name.text!r}")
        self.expect("(")
        args = []
        if not self.at_op(")"):
            args.append(self.expr())
            while self.at_op(","):
                self.advance()
                args.append(self.expr())
        self.expect(")")
        arity = FUNCTIONS[name.text][0]
        if len(args) != arity:
            raise ExpressionError(
                name.pos, f"{name.text} takes {arity} argument(s), got {len(args)}"
            )
        return Call(name.text, tuple(args))


@dataclass(frozen=True)
class FieldProgram:
    source: str
    ast: Node

    def __call__(self, x, y, t):
        return evaluate_array(self, x, y, t)


@lru_cache(maxsize=256)
def parse_expression(text: str) -> FieldProgram:
    try:
        return FieldProgram(text, _Parser(text).parse())
    except ExpressionError as exc:
        # tokens carry character indices; errors report UTF-8 byte offsets
        offset = len(text[: exc.position].encode("utf-8"))
        if offset == exc.position:
            raise
        raise ExpressionError(offset, exc.message) from None


def to_text(node: Node) -> str:
    """Fully parenthesized form; parses back to the same AST."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    return f"{node.name}({', '.join(to_text(a) for a in node.args)})"


# --- evaluation ---

def _eval(node: Node, env: dict) -> np.ndarray:
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return np.negative(_eval(node.operand, env))
    if isinstance(node, BinOp):
        return BINARY[node.op](_eval(node.left, env), _eval(node.right, env))
    fn = FUNCTIONS[node.name][1]
    return fn(*(_eval(a, env) for a in node.args))


def evaluate_array(prog: FieldProgram, x, y, t) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    x, y, t = np.broadcast_arrays(x, y, t)
    with np.errstate(all="ignore"):
        out = _eval(prog.ast, {"x": x, "y": y, "t": t})
        return np.broadcast_to(np.asarray(out, dtype=np.float64), x.shape)


def evaluate(prog: FieldProgram, x: float, y: float, t: float = 0.0) -> float:
    return float(evaluate_array(prog, np.array([x]), np.array([y]), np.array([t]))[0])


Sampler = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def gradient_of(f: Sampler, x, y, t, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Central differences of any field sampler."""
    if h <= 0:
        raise BandError("gradient step must be positive")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(all="ignore"):
        gx = (f(x + h, y, t) - f(x - h, y, t)) / (2 * h)
        gy = (f(x, y + h, t) - f(x, y - h, t)) / (2 * h)
    return gx, gy


def gradient(prog: FieldProgram, x: float, y: float, t: float, h: float) -> Tuple[float, float]:
    gx, gy = gradient_of(prog, np.array([x]), np.array([y]), np.array([t]), h)
    return float(gx[0]), float(gy[0])


def compensated_density_of(u: Sampler, x, y, t, spacing: float, h: float,
                           floor: float = GRADIENT_FLOOR) -> np.ndarray:
    if spacing <= 0:
        raise BandError("world spacing must be positive")
    gx, gy = gradient_of(u, x, y, t, h)
    with np.errstate(all="ignore"):
        return 1.0 / (spacing * np.maximum(np.hypot(gx, gy), floor))


def compensated_density(u_prog: FieldProgram, x: float, y: float, t: float, spacing: float,
                        floor: float = GRADIENT_FLOOR, h: float = 1e-4) -> float:
    d = compensated_density_of(u_prog, np.array([x]), np.array([y]), np.array([t]),
                               spacing, h, floor)
    return float(d[0])


# --- image fields ---

@dataclass(frozen=True)
class ImageField:
    values: np.ndarray  # (height, width), in [0, 1]; row 0 at y0
    rect: ViewRect
    lo: float = 0.0
    hi: float = 1.0

    def __call__(self, x, y, t=None):
        return sample_image_field(self, x, y)


def sample_image_field(f: ImageField, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    rows, cols = f.values.shape
    # texel (i, j) is centered at x0 + (i + 0.5) * texel width
    fx = np.clip((x - f.rect.x0) / f.rect.width * cols - 0.5, 0.0, cols - 1)
    fy = np.clip((y - f.rect.y0) / f.rect.height * rows - 0.5, 0.0, rows - 1)
    with np.errstate(invalid="ignore"):
        i0 = np.floor(np.nan_to_num(fx)).astype(np.intp)
        j0 = np.floor(np.nan_to_num(fy)).astype(np.intp)
    i1 = np.minimum(i0 + 1, cols - 1)
    j1 = np.minimum(j0 + 1, rows - 1)
    tx = fx - i0
    ty = fy - j0
    v = f.values
    top = v[j0, i0] + (v[j0, i1] - v[j0, i0]) * tx
    bottom = v[j1, i0] + (v[j1, i1] - v[j1, i0]) * tx
    s = top + (bottom - top) * ty
    return f.lo + (f.hi - f.lo) * s


def _pgm_tokens(data: bytes, count: int) -> Tuple[List[bytes], int]:
    tokens = []
    i = 0
    while len(tokens) < count:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if data[i:i + 1] == b"#":
            while i < len(data) and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < len(data) and not data[i:i + 1].isspace():
            i += 1
        tokens.append(data[start:i])
    return tokens, i + 1  # one whitespace byte ends the header


def read_pgm(path: Union[str, Path]) -> np.ndarray:
    data = Path(path).read_bytes()
    (magic, w, h, maxval), offset = _pgm_tokens(data, 4)
    if magic != b"P5":
        raise BandError(f"{path}: not a binary PGM (P5) file")
    try:
        width, height, maxval = int(w), int(h), int(maxval)
        dtype = np.dtype(">u2") if maxval > 255 else np.uint8
        pixels = np.frombuffer(data, dtype=dtype, count=width * height, offset=offset)
    except ValueError as exc:
        raise BandError(f"{path}: malformed PGM ({exc})") from None
    return pixels.reshape(height, width).astype(np.float64) / maxval


def load_image_field(path: Union[str, Path], rect: ViewRect, lo: float, hi: float) -> ImageField:
    values = read_pgm(path)
    logger.debug("loaded %s (%dx%d)", path, values.shape[1], values.shape[0])
    return ImageField(values=values, rect=rect, lo=lo, hi=hi)


# --- field specs from a scene ---

def field_sampler(spec: FieldSpec, view: ViewRect, u: Sampler = None,
                  base_dir: Path = None) -> Sampler:
    """Turn a scene field into f(x, y, t) -> ndarray.

    stretch fields need the band set's u sampler to differentiate.
    """
    if spec.kind == FieldKind.expr:
        return parse_expression(spec.expr)
    if spec.kind == FieldKind.const:
        value = spec.value
        return lambda x, y, t: np.full(np.broadcast(x, y).shape, value)
    if spec.kind == FieldKind.image:
        path = Path(spec.path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_image_field(path, view, spec.lo, spec.hi)
    if u is None:
        raise BandError("stretch density needs a u field")
    spacing = spec.value
    h = GRADIENT_STEP_FRACTION * view.width
    return lambda x, y, t: compensated_density_of(u, x, y, t, spacing, h)
