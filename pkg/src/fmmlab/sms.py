"""Sparse matrix text I/O (SMS triplet format).

Layout: a header line "rows cols M", one line "i j v" per nonzero with
1-based indices, and a "0 0 0" terminator.  Values are integers or dyadic
"p/q" tokens with q a power of two.  The format round-trips losslessly.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .dyadic import ZERO, Dyadic, parse_dyadic

__all__ = ["SmsParseError", "load_sms", "loads_sms", "save_sms", "dumps_sms"]


class SmsParseError(ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


def loads_sms(text):
    """Parse SMS text into a dense matrix of Dyadic entries."""
    lines = text.splitlines()
    pos = 0

    def next_fields():
        nonlocal pos
        while pos < len(lines):
            pos += 1
            stripped = lines[pos - 1].strip()
            if stripped:
                return stripped.split(), pos
        return None, pos

    fields, lineno = next_fields()
    if fields is None:
        raise SmsParseError("missing header", 1)
    if len(fields) != 3 or fields[2] != "M":
        raise SmsParseError(f"malformed header {' '.join(fields)!r}", lineno)
    try:
        rows, cols = int(fields[0]), int(fields[1])
    except ValueError:
        raise SmsParseError("non-integer dimensions in header", lineno) from None
    if rows <= 0 or cols <= 0:
        raise SmsParseError("dimensions must be positive", lineno)

    matrix = np.full((rows, cols), ZERO, dtype=object)
    seen = set()
    terminated = False
    while True:
        fields, lineno = next_fields()
        if fields is None:
            break
        if len(fields) != 3:
            raise SmsParseError(f"expected 'i j v', got {' '.join(fields)!r}", lineno)
        if fields == ["0", "0", "0"]:
            terminated = True
            break
        try:
            i, j = int(fields[0]), int(fields[1])
        except ValueError:
            raise SmsParseError("non-integer index", lineno) from None
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise SmsParseError(
                f"index ({i}, {j}) outside {rows}x{cols} matrix", lineno
            )
        if (i, j) in seen:
            raise SmsParseError(f"duplicate entry for ({i}, {j})", lineno)
        seen.add((i, j))
        try:
            matrix[i - 1, j - 1] = parse_dyadic(fields[2])
        except ValueError as exc:
            raise SmsParseError(str(exc), lineno) from None
    if not terminated:
        raise SmsParseError("missing '0 0 0' terminator", pos)
    fields, lineno = next_fields()
    if fields is not None:
        raise SmsParseError("content after terminator", lineno)
    return matrix


def load_sms(source):
    """Load an SMS file from a path or readable text stream."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    return loads_sms(text)


def dumps_sms(matrix):
    matrix = np.asarray(matrix, dtype=object)
    if matrix.ndim != 2:
        raise ValueError("SMS serialization needs a 2-D matrix")
    rows, cols = matrix.shape
    out = io.StringIO()
    out.write(f"{rows} {cols} M\n")
    for i in range(rows):
        for j in range(cols):
            value = matrix[i, j]
            if not isinstance(value, Dyadic):
                value = Dyadic(value)
            if value.m != 0:
                out.write(f"{i + 1} {j + 1} {value}\n")
    out.write("0 0 0\n")
    return out.getvalue()


def save_sms(matrix, target):
    text = dumps_sms(matrix)
    if isinstance(target, (str, Path)):
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)
