"""Plain CSV input and output ('.' decimal, comma separated, no header)."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from .errors import ParseError, PersistenceError


def parse_csv(text: str, has_labels: bool = False, source: str = "<string>"):
    """Parse CSV text into ``(points, labels)``.

    Blank lines are skipped.  Row and column numbers in errors are 1-based
    and count physical lines.
    """
    rows, labels = [], []
    width = None
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        cells = row
        if has_labels:
            if len(row) < 2:
                raise ParseError(f"{source}: expected values and a label", lineno, len(row))
            cells, label = row[:-1], row[-1].strip()
            labels.append(label)
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(f"{source}: expected {width} values, found {len(cells)}",
                             lineno, len(cells))
        vals = []
        for j, c in enumerate(cells, start=1):
            try:
                v = float(c)
            except ValueError:
                raise ParseError(f"{source}: not a number: {c.strip()!r}", lineno, j) from None
            if not math.isfinite(v):
                raise ParseError(f"{source}: non-finite value {c.strip()!r}", lineno, j)
            vals.append(v)
        rows.append(vals)
    if not rows:
        raise ParseError(f"{source}: no data rows")
    return np.array(rows, dtype=float), (labels if has_labels else None)


def read_csv(path, has_labels: bool = False):
    """Read a numeric CSV file, optionally with a trailing label column.

    Returns ``(points, labels)``; ``labels`` is ``None`` without ``has_labels``.
    Normalization is a separate step (see :mod:`asx.geometry`).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise PersistenceError(f"cannot read data file ({exc.strerror or exc})", str(path)) from exc
    return parse_csv(text, has_labels, str(path))


def format_csv(points, labels=None, header=None) -> str:
    """Rows as CSV text; numbers use 17 significant digits."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    P = np.atleast_2d(np.asarray(points, dtype=float))
    for i, row in enumerate(P):
        cells = ["%.17g" % v for v in row]
        if labels is not None:
            cells.append(str(labels[i]))
        w.writerow(cells)
    return out.getvalue()


def format_table(header, rows) -> str:
    """Mixed-type rows (numbers and strings) as CSV text."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["%.17g" % v if isinstance(v, float) else v for v in row])
    return out.getvalue()


def write_text(text: str, path=None, stream=None) -> None:
    """Write ``text`` to ``path``, or to ``stream`` when no path is given."""
    if path is None:
        stream.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise PersistenceError(f"cannot write output ({exc.strerror or exc})", str(path)) from exc
