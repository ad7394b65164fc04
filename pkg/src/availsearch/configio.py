"""Plain-text config grammar and CSV output.

Grammar (one or more ``key = value`` pairs per line, ``#`` starts a comment)::

    N = 3
    v = 1.0  c = 0.05
    theta = 0, 0, 0.9, 0.1
    lambda = 0.3            # optional: share of buyers who see every price
    delta:                  # optional: noisy-search technology, one row per line
      1, 0, 0
      0, 1, 0
      0, 0, 1

Vectors are comma separated.  Matrix rows may use commas or whitespace and
run until a blank line, a ``key = value`` line or the end of the text.
"""

from __future__ import annotations

import csv
import io
import os
import re
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError
from .extensions.hetero import HeterogeneityConfig
from .extensions.noisy import NoisyTech
from .market import MarketConfig

KEYS = ("N", "v", "c", "theta", "lambda")
_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_PAIR = re.compile(r"\s*([A-Za-z_]\w*)\s*=\s*(" + _NUMBER + r"(?:\s*,\s*" + _NUMBER + r")*)\s*")
_HEADER = re.compile(r"\s*delta\s*:\s*$")
_ROW_SPLIT = re.compile(r"[,\s]+")


@dataclass(frozen=True)
class ParsedConfig:
    market: MarketConfig
    tech: NoisyTech | None = None
    lam: float | None = None

    @property
    def hetero(self) -> HeterogeneityConfig | None:
        return None if self.lam is None else HeterogeneityConfig(self.market, self.lam)


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def _parse_pairs(text: str, lineno: int) -> list:
    pos, out = 0, []
    while pos < len(text):
        if not text[pos:].strip():
            break
        m = _PAIR.match(text, pos)
        if m is None:
            raise ParseError(lineno, pos + 1, f"expected 'key = value' at {text[pos:].strip()!r}")
        out.append((m.group(1), m.group(2), m.start(1) + 1))
        pos = m.end()
    return out


def _float(s: str, lineno: int, col: int) -> float:
    try:
        return float(s)
    except ValueError:
        raise ParseError(lineno, col, f"not a number: {s!r}") from None


def parse_config(text: str) -> ParsedConfig:
    """Parse config text; raises ParseError for syntax and ValidationError for invariants."""
    values: dict = {}
    where: dict = {}
    delta = None
    in_block = False
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = _strip_comment(raw)
        if not line.strip():
            in_block = False
            continue
        if _HEADER.match(line):
            if delta is not None:
                raise ParseError(lineno, 1, "duplicate delta block")
            delta, in_block = [], True
            continue
        if in_block and "=" not in line:
            cells = [s for s in _ROW_SPLIT.split(line.strip()) if s]
            delta.append([_float(s, lineno, raw.find(s) + 1) for s in cells])
            continue
        in_block = False
        for key, value, col in _parse_pairs(line, lineno):
            if key not in KEYS:
                raise ParseError(lineno, col, f"unknown key {key!r}")
            if key in values:
                raise ParseError(lineno, col, f"duplicate key {key!r}")
            values[key] = value
            where[key] = (lineno, col)
    for key in ("N", "v", "c", "theta"):
        if key not in values:
            raise ParseError(len(lines) + 1, 1, f"missing key {key!r}")

    lineno, col = where["N"]
    n_text = values["N"]
    if not re.fullmatch(r"[+]?\d+", n_text):
        raise ParseError(lineno, col, f"N must be an integer, got {n_text!r}")
    theta = [_float(s.strip(), *where["theta"]) for s in values["theta"].split(",")]
    market = MarketConfig(int(n_text), _float(values["v"], *where["v"]),
                          _float(values["c"], *where["c"]), theta)
    lam = None
    if "lambda" in values:
        lam = _float(values["lambda"], *where["lambda"])
        HeterogeneityConfig(market, lam)
    tech = None
    if delta is not None:
        if len(delta) != market.N or any(len(r) != market.N for r in delta):
            raise ValidationError("delta-shape", f"delta must be {market.N}x{market.N}")
        tech = NoisyTech(delta)
    return ParsedConfig(market, tech, lam)


def render_config(cfg: ParsedConfig) -> str:
    """Inverse of :func:`parse_config` (floats written with repr, so exact)."""
    m = cfg.market
    lines = [f"N = {m.N}", f"v = {m.v!r}", f"c = {m.c!r}",
             "theta = " + ", ".join(repr(t) for t in m.theta)]
    if cfg.lam is not None:
        lines.append(f"lambda = {cfg.lam!r}")
    if cfg.tech is not None:
        lines.append("delta:")
        lines.extend("  " + ", ".join(repr(x) for x in row) for row in cfg.tech.delta)
    return "\n".join(lines) + "\n"


def read_config(path: str) -> ParsedConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def fmt(x) -> str:
    """CSV cell: 12 significant digits for floats, plain text otherwise."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    try:
        f = float(x)
    except (TypeError, ValueError):
        return str(x)
    if f == 0:
        return "0"
    return format(f, ".12g")


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_csv(path: str | None, header, rows) -> str:
    """Write CSV atomically (temp file + rename); stdout when path is None or '-'."""
    text = csv_text(header, rows)
    if path in (None, "-"):
        sys.stdout.write(text)
        return text
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return text
