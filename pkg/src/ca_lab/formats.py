"""Text formats for rules and tile sets.

Rule file::

    ca 2D alphabet=2 radius=1 neighborhood=moore
    table 0110...

or ``builtin <name>`` in place of the table.  Table entries are listed in
lexicographic neighbourhood order, one base-36 digit each while the
alphabet allows it and comma-separated decimals otherwise.  Blank lines and
``#`` comments are ignored.

Tile file: one ``tile <id> N=<c> S=<c> E=<c> W=<c> [dir=<N|S|E|W>]`` per line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .core import (
    RuleTable1D,
    RuleTable2D,
    and_min,
    identity_1d,
    identity_2d,
    moore_offsets,
    shift_2d,
    von_neumann_offsets,
    xor_1d,
    xor_corners,
)
from .wang import Tile, TileSet

DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"
BUILTINS = ("identity", "xor-corners", "and-min", "shift:<dx,dy>", "xor1d")


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


def _content_lines(text: str):
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line


# ---------------------------------------------------------------------------
# rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RuleFile:
    dim: str  # "1D" | "2D"
    alphabet: int
    radius: int
    neighborhood: str  # "moore" | "vonneumann:ex,ey" | "line"
    body_kind: str  # "table" | "builtin"
    body: str

    def emit(self) -> str:
        return (
            f"ca {self.dim} alphabet={self.alphabet} radius={self.radius} neighborhood={self.neighborhood}\n"
            f"{self.body_kind} {self.body}\n"
        )

    def offsets(self):
        if self.neighborhood == "moore":
            return moore_offsets(self.radius)
        ex, ey = _vn_extent(self.neighborhood)
        return von_neumann_offsets(ex, ey)

    def rule(self):
        if self.body_kind == "builtin":
            return _builtin(self)
        values = _decode_table(self.body, self.alphabet)
        if self.dim == "1D":
            return RuleTable1D(self.alphabet, self.radius, values)
        kind = "moore" if self.neighborhood == "moore" else "von_neumann"
        return RuleTable2D(self.alphabet, self.radius, self.offsets(), values, kind)


def _vn_extent(neighborhood: str) -> tuple[int, int]:
    m = re.fullmatch(r"vonneumann:(\d+),(\d+)", neighborhood)
    if not m:
        raise FormatError(f"unknown neighborhood {neighborhood!r}")
    return int(m.group(1)), int(m.group(2))


def _encode_table(table: np.ndarray, alphabet: int) -> str:
    values = np.asarray(table).reshape(-1).tolist()
    if alphabet <= len(DIGITS):
        return "".join(DIGITS[v] for v in values)
    return ",".join(str(v) for v in values)


def _decode_table(body: str, alphabet: int) -> np.ndarray:
    try:
        if alphabet <= len(DIGITS):
            values = [DIGITS.index(ch) for ch in body]
        else:
            values = [int(tok) for tok in body.split(",")]
    except ValueError:
        raise FormatError("bad table digit") from None
    if any(v >= alphabet for v in values):
        raise FormatError("table entry outside the alphabet")
    return np.array(values, dtype=np.int64)


def _builtin(rf: RuleFile):
    name = rf.body
    if rf.dim == "1D":
        if name == "xor1d":
            return xor_1d()
        if name == "identity":
            return identity_1d(rf.alphabet, rf.radius)
        raise FormatError(f"unknown 1D builtin {name!r}")
    if name == "identity":
        return identity_2d(rf.alphabet, rf.radius)
    if name == "xor-corners":
        return xor_corners(rf.radius)
    if name == "and-min":
        return and_min(rf.alphabet, rf.radius)
    m = re.fullmatch(r"shift:(-?\d+),(-?\d+)", name)
    if m:
        return shift_2d(int(m.group(1)), int(m.group(2)), rf.alphabet)
    raise FormatError(f"unknown 2D builtin {name!r}")


def builtin_file(name: str) -> RuleFile:
    """The rule file a bare builtin name stands for on the command line."""
    if name == "xor1d":
        return RuleFile("1D", 2, 1, "line", "builtin", name)
    m = re.fullmatch(r"shift:(-?\d+),(-?\d+)", name)
    if m:
        r = max(abs(int(m.group(1))), abs(int(m.group(2))), 1)
        return RuleFile("2D", 2, r, "moore", "builtin", name)
    if name in ("identity", "xor-corners", "and-min"):
        return RuleFile("2D", 2, 1, "moore", "builtin", name)
    raise FormatError(f"unknown builtin {name!r}")


_HEADER = re.compile(r"ca (1D|2D) alphabet=(\d+) radius=(\d+)(?: neighborhood=(\S+))?")


def parse_rule_file(text: str) -> RuleFile:
    lines = list(_content_lines(text))
    if len(lines) != 2:
        raise FormatError(f"expected a header and a body line, got {len(lines)} lines")
    (hn, header), (bn, body) = lines
    m = _HEADER.fullmatch(header)
    if not m:
        raise FormatError("bad header", hn)
    dim, alphabet, radius = m.group(1), int(m.group(2)), int(m.group(3))
    neighborhood = m.group(4) or ("line" if dim == "1D" else "moore")
    if alphabet < 1:
        raise FormatError("alphabet must be positive", hn)
    if dim == "1D" and neighborhood != "line":
        raise FormatError("1D rules take neighborhood=line", hn)
    if dim == "2D" and neighborhood != "moore":
        try:
            ex, ey = _vn_extent(neighborhood)
        except FormatError as e:
            raise FormatError(str(e), hn) from None
        if max(ex, ey) != radius:
            raise FormatError("radius must equal the larger Von Neumann extent", hn)
    parts = body.split(None, 1)
    if len(parts) != 2 or parts[0] not in ("table", "builtin"):
        raise FormatError("body must be 'table <digits>' or 'builtin <name>'", bn)
    rf = RuleFile(dim, alphabet, radius, neighborhood, parts[0], parts[1].strip())
    if rf.body_kind == "table":
        n = len(rf.offsets()) if dim == "2D" else 2 * radius + 1
        try:
            values = _decode_table(rf.body, alphabet)
        except FormatError as e:
            raise FormatError(str(e), bn) from None
        if values.size != alphabet ** n:
            raise FormatError(f"table has {values.size} entries, expected {alphabet ** n}", bn)
    else:
        try:
            _builtin(rf)
        except FormatError as e:
            raise FormatError(str(e), bn) from None
    return rf


def rule_to_file(rule) -> RuleFile:
    """Table form of a materialised rule."""
    if isinstance(rule, RuleTable1D):
        return RuleFile("1D", rule.n_symbols, rule.radius, "line", "table", _encode_table(rule.table, rule.n_symbols))
    if not isinstance(rule, RuleTable2D):
        raise TypeError("only materialised rule tables can be written")
    if rule.kind == "moore":
        neighborhood = "moore"
    else:
        ex, ey = rule.extent
        if rule.offsets != von_neumann_offsets(ex, ey) or max(ex, ey) != rule.radius:
            raise FormatError("only Moore and Von Neumann cross neighbourhoods can be written")
        neighborhood = f"vonneumann:{ex},{ey}"
    return RuleFile("2D", rule.n_symbols, rule.radius, neighborhood, "table", _encode_table(rule.table, rule.n_symbols))


def emit_rule(rule) -> str:
    return rule_to_file(rule).emit()


def load_rule_file(arg: str) -> RuleFile:
    """``arg`` is a path to a rule file or a builtin name."""
    try:
        return builtin_file(arg)
    except FormatError:
        pass
    with open(arg, encoding="utf-8") as fh:
        return parse_rule_file(fh.read())


# ---------------------------------------------------------------------------
# tiles
# ---------------------------------------------------------------------------

_TILE = re.compile(r"tile (-?\d+) N=(-?\d+) S=(-?\d+) E=(-?\d+) W=(-?\d+)(?: dir=([NSEW]))?")


def parse_tile_file(text: str) -> TileSet:
    tiles = []
    seen = set()
    for n, line in _content_lines(text):
        m = _TILE.fullmatch(" ".join(line.split()))
        if not m:
            raise FormatError("expected 'tile <id> N=<c> S=<c> E=<c> W=<c> [dir=<N|S|E|W>]'", n)
        tid, cn, cs, ce, cw = (int(g) for g in m.groups()[:5])
        if tid in seen:
            raise FormatError(f"duplicate tile id {tid}", n)
        seen.add(tid)
        tiles.append(Tile(tid, cn, cs, ce, cw, m.group(6)))
    if not tiles:
        raise FormatError("no tiles")
    return TileSet(tuple(tiles))


def emit_tile_file(ts: TileSet) -> str:
    out = []
    for t in ts.tiles:
        line = f"tile {t.id} N={t.n} S={t.s} E={t.e} W={t.w}"
        if t.direction is not None:
            line += f" dir={t.direction}"
        out.append(line + "\n")
    return "".join(out)


def load_tile_file(path: str) -> TileSet:
    with open(path, encoding="utf-8") as fh:
        return parse_tile_file(fh.read())


# ---------------------------------------------------------------------------
# renderers
# ---------------------------------------------------------------------------


def grid_text(ids: np.ndarray) -> str:
    """``ids[x, y]`` as rows of space-separated values, north row first."""
    ids = np.asarray(ids)
    width = max(len(str(v)) for v in ids.reshape(-1).tolist())
    rows = []
    for y in range(ids.shape[1] - 1, -1, -1):
        rows.append(" ".join(str(int(ids[x, y])).rjust(width) for x in range(ids.shape[0])))
    return "\n".join(rows) + "\n"
