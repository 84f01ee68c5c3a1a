"""Minimal Matrix Market reader for dense real matrices.

Handles the ``coordinate`` and ``array`` formats with ``real`` or
``integer`` fields and ``general`` or ``symmetric`` symmetry.  Every parse
error carries the 1-based line number of the offending line.
"""

import numpy as np

from .errors import SpectralBoundsError


class MatrixMarketError(SpectralBoundsError, ValueError):
    """Parse failure; ``line`` is the 1-based line number when known."""

    def __init__(self, message, line=None, path=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.path = path

    def __str__(self):
        where = "" if self.path is None else f"{self.path}:"
        if self.line is not None:
            where += f"{self.line}:"
        return f"{where} {self.message}" if where else self.message


_FORMATS = ("coordinate", "array")
_FIELDS = ("real", "integer", "double")
_SYMMETRIES = ("general", "symmetric")


def _parse_header(line, lineno):
    tokens = line.strip().lower().split()
    if len(tokens) != 5 or tokens[0] != "%%matrixmarket" or tokens[1] != "matrix":
        raise MatrixMarketError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'",
                                lineno)
    fmt, fld, sym = tokens[2:]
    if fmt not in _FORMATS:
        raise MatrixMarketError(f"unsupported format '{fmt}'", lineno)
    if fld not in _FIELDS:
        raise MatrixMarketError(f"unsupported field '{fld}'", lineno)
    if sym not in _SYMMETRIES:
        raise MatrixMarketError(f"unsupported symmetry '{sym}'", lineno)
    return fmt, sym


def _numbers(tokens, kinds, lineno):
    out = []
    for tok, kind in zip(tokens, kinds):
        try:
            out.append(kind(tok))
        except ValueError:
            raise MatrixMarketError(f"cannot parse '{tok}' as {kind.__name__}", lineno) from None
    return out


def parse_matrix_market(text, path=None):
    """Parse Matrix Market text into a dense float array."""
    lines = text.splitlines()
    if not lines:
        raise MatrixMarketError("empty file", path=path)
    try:
        fmt, sym = _parse_header(lines[0], 1)
    except MatrixMarketError as exc:
        exc.path = path
        raise

    body = [(i + 1, ln.strip()) for i, ln in enumerate(lines[1:], start=1)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixMarketError("missing size line", len(lines), path)
    size_no, size_line = body[0]
    entries = body[1:]
    try:
        if fmt == "coordinate":
            toks = size_line.split()
            if len(toks) != 3:
                raise MatrixMarketError("size line must be 'rows cols nnz'", size_no)
            rows, cols, nnz = _numbers(toks, (int, int, int), size_no)
        else:
            toks = size_line.split()
            if len(toks) != 2:
                raise MatrixMarketError("size line must be 'rows cols'", size_no)
            rows, cols = _numbers(toks, (int, int), size_no)
        if rows <= 0 or cols <= 0:
            raise MatrixMarketError("matrix dimensions must be positive", size_no)
        if sym == "symmetric" and rows != cols:
            raise MatrixMarketError("symmetric matrix must be square", size_no)

        A = np.zeros((rows, cols))
        if fmt == "coordinate":
            if len(entries) != nnz:
                lineno = entries[-1][0] if entries else size_no
                raise MatrixMarketError(f"expected {nnz} entries, found {len(entries)}", lineno)
            for lineno, ln in entries:
                toks = ln.split()
                if len(toks) != 3:
                    raise MatrixMarketError("entry must be 'row col value'", lineno)
                i, j, v = _numbers(toks, (int, int, float), lineno)
                if not (1 <= i <= rows and 1 <= j <= cols):
                    raise MatrixMarketError(f"index ({i}, {j}) out of range", lineno)
                if sym == "symmetric" and j > i:
                    raise MatrixMarketError("symmetric storage expects the lower triangle", lineno)
                A[i - 1, j - 1] = v
                if sym == "symmetric":
                    A[j - 1, i - 1] = v
        else:
            if sym == "symmetric":
                slots = [(i, j) for j in range(cols) for i in range(j, rows)]
            else:
                slots = [(i, j) for j in range(cols) for i in range(rows)]
            if len(entries) != len(slots):
                lineno = entries[-1][0] if entries else size_no
                raise MatrixMarketError(f"expected {len(slots)} values, found {len(entries)}",
                                        lineno)
            for (i, j), (lineno, ln) in zip(slots, entries):
                toks = ln.split()
                if len(toks) != 1:
                    raise MatrixMarketError("array entry must be a single value", lineno)
                (v,) = _numbers(toks, (float,), lineno)
                A[i, j] = v
                if sym == "symmetric":
                    A[j, i] = v
    except MatrixMarketError as exc:
        exc.path = path
        raise
    return A


def read_matrix_market(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MatrixMarketError(f"cannot read file: {exc.strerror}", path=path) from None
    return parse_matrix_market(text, path=str(path))
