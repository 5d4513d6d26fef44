"""Straight-line programs over an additive group with power-of-two scaling.

A program is a single-assignment sequence of linear combinations (signed
sums of variables, each optionally scaled by a power of two, the whole sum
optionally divided or multiplied by a power of two) plus, in the product
stage, elementwise products of two variables.  The same interpreter runs on
scalars (floats, Dyadic) and on matrices, which is what lets the recursive
multiplication execute these programs with sub-matrix blocks as values.

Text syntax: statements "name=expr;", whitespace-insensitive, identifiers
matching [A-Za-z][A-Za-z0-9]*.  Lines starting with '#' are comments; the
optional directives "#! inputs: ..." and "#! outputs: ..." pin the input
and output order of a program file.
"""

from __future__ import annotations

import numbers
import operator
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dyadic import ONE, ZERO, Dyadic

__all__ = [
    "Term",
    "LinCombine",
    "Product",
    "SlpProgram",
    "OpCount",
    "SlpParseError",
    "parse_slp",
    "render_slp",
    "load_slp",
    "save_slp",
    "eval_slp",
    "linear_map_of",
    "count_ops",
    "naive_slp",
    "verify_slp",
]

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*")
_TOKEN_RE = re.compile(r"\s*(?:(?P<ident>[A-Za-z][A-Za-z0-9]*)|(?P<int>\d+)|(?P<op>[-+*/()=;]))")


class SlpParseError(ValueError):
    def __init__(self, message, pos=None):
        if pos is not None:
            message = f"at offset {pos}: {message}"
        super().__init__(message)
        self.pos = pos


@dataclass(frozen=True)
class Term:
    sign: int  # +1 or -1
    var: str
    scale: int = 0  # power-of-two exponent applied to the variable


@dataclass(frozen=True)
class LinCombine:
    target: str
    terms: tuple
    post_scale: int = 0  # power-of-two exponent applied to the whole sum


@dataclass(frozen=True)
class Product:
    target: str
    left: str
    right: str


@dataclass(frozen=True)
class OpCount:
    additions: int = 0
    shifts: int = 0
    products: int = 0

    @property
    def total(self):
        return self.additions + self.shifts + self.products

    def __add__(self, other):
        return OpCount(
            self.additions + other.additions,
            self.shifts + other.shifts,
            self.products + other.products,
        )


@dataclass(frozen=True)
class SlpProgram:
    inputs: tuple
    outputs: tuple
    instructions: tuple

    def __post_init__(self):
        defined = set(self.inputs)
        if len(defined) != len(self.inputs):
            raise SlpParseError("duplicate input name")
        for ins in self.instructions:
            operands = (
                [t.var for t in ins.terms]
                if isinstance(ins, LinCombine)
                else [ins.left, ins.right]
            )
            for name in operands:
                if name not in defined:
                    raise SlpParseError(f"use of undefined variable {name!r}")
            if ins.target in defined:
                raise SlpParseError(f"double assignment to {ins.target!r}")
            defined.add(ins.target)
        for name in self.outputs:
            if name not in defined:
                raise SlpParseError(f"output {name!r} is never defined")

    @property
    def is_linear(self):
        return not any(isinstance(ins, Product) for ins in self.instructions)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise SlpParseError(f"unexpected character {stripped[0]!r}", pos)
        if match.lastgroup == "ident":
            tokens.append(("ident", match.group("ident"), match.start("ident")))
        elif match.lastgroup == "int":
            tokens.append(("int", match.group("int"), match.start("int")))
        else:
            tokens.append(("op", match.group("op"), match.start("op")))
        pos = match.end()
    return tokens


def _log2_constant(text, pos):
    value = int(text)
    if value <= 0 or value & (value - 1):
        raise SlpParseError(f"constant {value} is not a power of two", pos)
    return value.bit_length() - 1


class _StatementParser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.idx = 0

    def peek(self):
        return self.tokens[self.idx] if self.idx < len(self.tokens) else (None, None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None:
            raise SlpParseError("unexpected end of statement")
        if kind is not None and tok[0] != kind:
            raise SlpParseError(f"expected {kind}, got {tok[1]!r}", tok[2])
        if value is not None and tok[1] != value:
            raise SlpParseError(f"expected {value!r}, got {tok[1]!r}", tok[2])
        self.idx += 1
        return tok

    def done(self):
        return self.idx >= len(self.tokens)

    def parse_statement(self):
        target = self.take("ident")[1]
        self.take("op", "=")
        instruction = self._parse_expr(target)
        if not self.done():
            tok = self.peek()
            raise SlpParseError(f"unparsed residue {tok[1]!r}", tok[2])
        return instruction

    def _parse_expr(self, target):
        # Product form: exactly "ident * ident".
        if (
            len(self.tokens) - self.idx == 3
            and self.tokens[self.idx][0] == "ident"
            and self.tokens[self.idx + 1][1] == "*"
            and self.tokens[self.idx + 2][0] == "ident"
        ):
            left = self.take("ident")[1]
            self.take("op", "*")
            right = self.take("ident")[1]
            return Product(target, left, right)
        if self.peek()[1] == "(":
            self.take("op", "(")
            terms = self._parse_sum()
            self.take("op", ")")
            kind, value, pos = self.peek()
            post_scale = 0
            if value in ("*", "/"):
                self.take()
                const = self.take("int")
                exp = _log2_constant(const[1], const[2])
                post_scale = exp if value == "*" else -exp
            return LinCombine(target, terms, post_scale)
        terms = self._parse_sum()
        return LinCombine(target, terms, 0)

    def _parse_sum(self):
        terms = []
        sign = 1
        kind, value, pos = self.peek()
        if value in ("+", "-"):
            self.take()
            sign = 1 if value == "+" else -1
        terms.append(self._parse_term(sign))
        while True:
            kind, value, pos = self.peek()
            if value not in ("+", "-"):
                break
            self.take()
            terms.append(self._parse_term(1 if value == "+" else -1))
        return tuple(terms)

    def _parse_term(self, sign):
        name_tok = self.take("ident")
        scale = 0
        kind, value, pos = self.peek()
        if value in ("*", "/"):
            # Lookahead: "*ident" here would be a misplaced product.
            nxt = self.tokens[self.idx + 1] if self.idx + 1 < len(self.tokens) else (None,) * 3
            if value == "*" and nxt[0] == "ident":
                raise SlpParseError("product must be the whole right-hand side", pos)
            self.take()
            const = self.take("int")
            exp = _log2_constant(const[1], const[2])
            scale = exp if value == "*" else -exp
        return Term(sign, name_tok[1], scale)


def _strip_comments(text):
    directives = {"inputs": [], "outputs": []}
    body_lines = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#!"):
            key, _, rest = stripped[2:].partition(":")
            key = key.strip()
            if key in directives:
                directives[key].extend(rest.split())
            else:
                raise SlpParseError(f"unknown directive {key!r}")
        elif stripped.startswith("#"):
            continue
        else:
            body_lines.append(line)
    return "\n".join(body_lines), directives


def parse_slp(text, inputs=None, outputs=None):
    """Parse .slp statement text into an SlpProgram.

    Input/output order may be given explicitly, or via "#!" directives in
    the text; otherwise inputs are inferred in first-use order and outputs
    are the targets never consumed by a later instruction.
    """
    body, directives = _strip_comments(text)
    if inputs is None and directives["inputs"]:
        inputs = directives["inputs"]
    if outputs is None and directives["outputs"]:
        outputs = directives["outputs"]

    tokens = _tokenize(body)
    statements = []
    current = []
    for tok in tokens:
        if tok[0] == "op" and tok[1] == ";":
            if not current:
                raise SlpParseError("empty statement", tok[2])
            statements.append(current)
            current = []
        else:
            current.append(tok)
    if current:
        raise SlpParseError("missing ';' after final statement", current[0][2])

    instructions = []
    defined = set(inputs) if inputs is not None else set()
    inferred_inputs = []
    targets = set()
    for stmt_tokens in statements:
        parser = _StatementParser(stmt_tokens)
        ins = parser.parse_statement()
        operands = (
            [t.var for t in ins.terms]
            if isinstance(ins, LinCombine)
            else [ins.left, ins.right]
        )
        for name in operands:
            if name not in defined:
                if inputs is not None:
                    raise SlpParseError(f"use of undefined variable {name!r}")
                defined.add(name)
                inferred_inputs.append(name)
        if ins.target in defined or ins.target in targets:
            raise SlpParseError(f"double assignment to {ins.target!r}")
        defined.add(ins.target)
        targets.add(ins.target)
        instructions.append(ins)

    if inputs is None:
        inputs = inferred_inputs
    if outputs is None:
        used = set()
        for ins in instructions:
            if isinstance(ins, LinCombine):
                used.update(t.var for t in ins.terms)
            else:
                used.update((ins.left, ins.right))
        outputs = [ins.target for ins in instructions if ins.target not in used]
    return SlpProgram(tuple(inputs), tuple(outputs), tuple(instructions))


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _render_term(term, first):
    if term.scale > 0:
        body = f"{term.var}*{1 << term.scale}"
    elif term.scale < 0:
        body = f"{term.var}/{1 << -term.scale}"
    else:
        body = term.var
    if first:
        return body if term.sign > 0 else f"-{body}"
    return f"+{body}" if term.sign > 0 else f"-{body}"


def render_slp(program, per_line=8):
    """Render back to .slp statement syntax (inverse of parse_slp)."""
    chunks = []
    for ins in program.instructions:
        if isinstance(ins, Product):
            chunks.append(f"{ins.target}={ins.left}*{ins.right};")
            continue
        body = "".join(
            _render_term(t, i == 0) for i, t in enumerate(ins.terms)
        )
        if ins.post_scale > 0:
            body = f"({body})*{1 << ins.post_scale}"
        elif ins.post_scale < 0:
            body = f"({body})/{1 << -ins.post_scale}"
        chunks.append(f"{ins.target}={body};")
    lines = [
        " ".join(chunks[i : i + per_line]) for i in range(0, len(chunks), per_line)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def save_slp(program, target):
    text = (
        "#! inputs: " + " ".join(program.inputs) + "\n"
        "#! outputs: " + " ".join(program.outputs) + "\n"
        + render_slp(program)
    )
    if isinstance(target, (str, Path)):
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)


def load_slp(source, inputs=None, outputs=None):
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    return parse_slp(text, inputs=inputs, outputs=outputs)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _scale_value(value, exp):
    if isinstance(value, Dyadic):
        return value.shift(exp)
    if isinstance(value, np.ndarray) and value.dtype == object:
        return value * ONE.shift(exp)
    if isinstance(value, numbers.Integral):
        return int(value) << exp if exp >= 0 else Dyadic(int(value), exp)
    return value * (2.0 ** exp)


def eval_slp(program, bindings, product=operator.mul):
    """Run the program; returns {output name: value} in output order.

    Values may be anything supporting +, unary -, and scaling by powers of
    two (floats, Dyadic, numpy arrays of either, whole matrices).  Product
    instructions call `product`, which recursive multiplication overrides
    with a recursion step.
    """
    env = {}
    for name in program.inputs:
        try:
            env[name] = bindings[name]
        except KeyError:
            raise KeyError(f"missing binding for input {name!r}") from None
    for ins in program.instructions:
        if isinstance(ins, Product):
            env[ins.target] = product(env[ins.left], env[ins.right])
            continue
        acc = None
        for term in ins.terms:
            value = env[term.var]
            if term.scale:
                value = _scale_value(value, term.scale)
            if acc is None:
                acc = -value if term.sign < 0 else value
            elif term.sign < 0:
                acc = acc - value
            else:
                acc = acc + value
        if ins.post_scale:
            acc = _scale_value(acc, ins.post_scale)
        env[ins.target] = acc
    return {name: env[name] for name in program.outputs}


def linear_map_of(program):
    """Matrix M with M @ inputs == outputs, by exact basis evaluation."""
    if not program.is_linear:
        raise ValueError("program contains products; not a linear map")
    n_in = len(program.inputs)
    n_out = len(program.outputs)
    matrix = np.full((n_out, n_in), ZERO, dtype=object)
    for col, name in enumerate(program.inputs):
        bindings = {other: ZERO for other in program.inputs}
        bindings[name] = ONE
        outputs = eval_slp(program, bindings)
        for row, out_name in enumerate(program.outputs):
            matrix[row, col] = outputs[out_name]
    return matrix


def count_ops(program):
    """Count additions, power-of-two shifts and products.

    Each binary +/- between terms is one addition (a lone negated term
    costs one, being a subtraction from nothing); any single scaling by a
    power of two is one shift regardless of the exponent, so a division by
    8 counts once.
    """
    additions = shifts = products = 0
    for ins in program.instructions:
        if isinstance(ins, Product):
            products += 1
            continue
        additions += len(ins.terms) - 1
        if len(ins.terms) == 1 and ins.terms[0].sign < 0:
            additions += 1
        shifts += sum(1 for t in ins.terms if t.scale)
        if ins.post_scale:
            shifts += 1
    return OpCount(additions, shifts, products)


def naive_slp(matrix, input_names, output_names):
    """One LinCombine per output row accumulating its nonzero entries.

    Coefficients that are not signed powers of two are expanded along the
    binary representation of the mantissa (several terms on the same
    variable); a zero row cannot be expressed and raises ValueError.
    """
    matrix = np.asarray(matrix, dtype=object)
    rows, cols = matrix.shape
    if len(input_names) != cols:
        raise ValueError(f"need {cols} input names, got {len(input_names)}")
    if len(output_names) != rows:
        raise ValueError(f"need {rows} output names, got {len(output_names)}")
    instructions = []
    for i in range(rows):
        terms = []
        for j in range(cols):
            coeff = matrix[i, j]
            if not isinstance(coeff, Dyadic):
                coeff = Dyadic(coeff)
            if coeff.m == 0:
                continue
            sign = 1 if coeff.m > 0 else -1
            mag = abs(coeff.m)
            bit = 0
            while mag:
                if mag & 1:
                    terms.append(Term(sign, input_names[j], coeff.e + bit))
                mag >>= 1
                bit += 1
        if not terms:
            raise ValueError(f"row {i} is zero; not expressible as a LinCombine")
        instructions.append(LinCombine(output_names[i], tuple(terms), 0))
    return SlpProgram(tuple(input_names), tuple(output_names), tuple(instructions))


def verify_slp(program, matrix):
    """True iff the program's linear map equals `matrix` entrywise."""
    matrix = np.asarray(matrix, dtype=object)
    computed = linear_map_of(program)
    if computed.shape != matrix.shape:
        return False
    return all(
        computed[i, j] == matrix[i, j]
        for i in range(matrix.shape[0])
        for j in range(matrix.shape[1])
    )
