"""Wang tiles, bounded tiling search, directed paths and the hierarchical cross pattern."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import limits
from .core import Cell

SIDES = ("N", "S", "E", "W")
STEP: dict[str, Cell] = {"N": (0, 1), "S": (0, -1), "E": (1, 0), "W": (-1, 0)}
OPPOSITE = {"N": "S", "S": "N", "E": "W", "W": "E"}


class BudgetExhausted(RuntimeError):
    """A bounded search gave up before reaching an answer."""


@dataclass(frozen=True)
class Tile:
    id: int
    n: int
    s: int
    e: int
    w: int
    direction: str | None = None

    def __post_init__(self):
        if self.direction is not None and self.direction not in STEP:
            raise ValueError(f"bad direction {self.direction!r}")

    def color(self, side: str) -> int:
        return {"N": self.n, "S": self.s, "E": self.e, "W": self.w}[side]


@dataclass(frozen=True)
class TileSet:
    tiles: tuple[Tile, ...]

    def __post_init__(self):
        tiles = tuple(self.tiles)
        ids = [t.id for t in tiles]
        if len(set(ids)) != len(ids):
            raise ValueError("tile ids must be unique")
        if not tiles:
            raise ValueError("empty tile set")
        object.__setattr__(self, "tiles", tiles)

    @property
    def palette(self) -> frozenset[int]:
        return frozenset(c for t in self.tiles for c in (t.n, t.s, t.e, t.w))

    def by_id(self) -> dict[int, Tile]:
        return {t.id: t for t in self.tiles}

    def __len__(self) -> int:
        return len(self.tiles)


@dataclass(frozen=True, eq=False)
class Tiling:
    """Tile ids on a ``width x height`` rectangle (``ids[x, y]``), optionally a torus."""

    ids: np.ndarray
    torus: bool = False

    def __post_init__(self):
        ids = np.array(self.ids, dtype=np.int64)
        if ids.ndim != 2 or 0 in ids.shape:
            raise ValueError("tiling must be a non-empty 2D array")
        ids.setflags(write=False)
        object.__setattr__(self, "ids", ids)

    @property
    def shape(self) -> tuple[int, int]:
        return self.ids.shape  # type: ignore[return-value]

    def unroll(self, p: int, q: int) -> "Tiling":
        """A torus tiling repeated to a ``p x q`` rectangle."""
        if not self.torus:
            raise ValueError("only torus tilings unroll")
        a, b = self.shape
        reps = (-(-p // a), -(-q // b))
        return Tiling(np.tile(self.ids, reps)[:p, :q], torus=False)


@dataclass(frozen=True)
class Violation:
    cell: Cell
    side: str
    neighbour: Cell


def check_tiling(ts: TileSet, t: Tiling) -> tuple[bool, Violation | None]:
    """Every adjacency matches; returns the first violation in row-major order."""
    tiles = ts.by_id()
    unknown = set(np.unique(t.ids).tolist()) - set(tiles)
    if unknown:
        raise KeyError(f"unknown tile id {min(unknown)}")
    p, q = t.shape
    for y in range(q):
        for x in range(p):
            here = tiles[int(t.ids[x, y])]
            for side in ("E", "N"):
                dx, dy = STEP[side]
                nx, ny = x + dx, y + dy
                if t.torus:
                    nx, ny = nx % p, ny % q
                elif nx >= p or ny >= q:
                    continue
                there = tiles[int(t.ids[nx, ny])]
                if here.color(side) != there.color(OPPOSITE[side]):
                    return False, Violation((x, y), side, (nx, ny))
    return True, None


def _search(ts: TileSet, p: int, q: int, torus: bool, budget: int) -> Tiling | None:
    tiles = ts.tiles
    n = p * q
    limits.check("tiling search cells", n)
    ids = np.zeros((p, q), dtype=np.int64)
    choice = [0] * n
    nodes = 0

    def fits(i: int, tile: Tile) -> bool:
        x, y = i % p, i // p
        if x > 0 and tiles_at[i - 1].e != tile.w:
            return False
        if y > 0 and tiles_at[i - p].n != tile.s:
            return False
        if torus:
            # the wrapped neighbour may be the candidate itself on a width-1 torus
            if x == p - 1 and (tile if x == 0 else tiles_at[i - x]).w != tile.e:
                return False
            if y == q - 1 and (tile if y == 0 else tiles_at[x]).s != tile.n:
                return False
        return True

    tiles_at: list[Tile] = [tiles[0]] * n
    i = 0
    while 0 <= i < n:
        placed = False
        while choice[i] < len(tiles):
            tile = tiles[choice[i]]
            choice[i] += 1
            nodes += 1
            if nodes > budget:
                raise BudgetExhausted(f"tiling search exceeded {budget} nodes")
            if fits(i, tile):
                tiles_at[i] = tile
                placed = True
                break
        if placed:
            i += 1
            if i < n:
                choice[i] = 0
        else:
            choice[i] = 0
            i -= 1
    if i < 0:
        return None
    for j, tile in enumerate(tiles_at):
        ids[j % p, j // p] = tile.id
    return Tiling(ids, torus)


def tiles_square(ts: TileSet, n: int, budget: int = 1_000_000) -> Tiling | None:
    """Valid ``n x n`` tiling with free boundary, or ``None`` if none exists.

    ``None`` proves the set does not tile the plane; a tiling is only evidence.
    Raises ``BudgetExhausted`` when the search gives up.
    """
    if n < 1:
        raise ValueError("n must be positive")
    return _search(ts, n, n, False, budget)


def tiles_torus(ts: TileSet, p: int, q: int, budget: int = 1_000_000) -> Tiling | None:
    """Valid ``p x q`` torus tiling (a periodic plane tiling), or ``None``."""
    if p < 1 or q < 1:
        raise ValueError("torus sides must be positive")
    return _search(ts, p, q, True, budget)


# ---------------------------------------------------------------------------
# directed paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathTrace:
    cells: tuple[Cell, ...]
    stop: str  # "boundary", "max_steps" or "cycle"
    cycle_at: int | None = None


def follow_path(ts: TileSet, t: Tiling, start: Cell, max_steps: int) -> PathTrace:
    """Follow tile directions from ``start``; ``cycle_at`` is the step that revisits a cell."""
    tiles = ts.by_id()
    p, q = t.shape
    cur = (start[0] % p, start[1] % q) if t.torus else tuple(start)
    cells = [cur]
    seen = {cur: 0}
    for step in range(1, max_steps + 1):
        d = tiles[int(t.ids[cur])].direction
        if d is None:
            raise ValueError(f"tile at {cur} has no direction")
        nx, ny = cur[0] + STEP[d][0], cur[1] + STEP[d][1]
        if t.torus:
            nx, ny = nx % p, ny % q
        elif not (0 <= nx < p and 0 <= ny < q):
            return PathTrace(tuple(cells), "boundary")
        cur = (nx, ny)
        if cur in seen:
            return PathTrace(tuple(cells), "cycle", step)
        seen[cur] = step
        cells.append(cur)
    return PathTrace(tuple(cells), "max_steps")


# ---------------------------------------------------------------------------
# hierarchical cross pattern
# ---------------------------------------------------------------------------

BLANK, ARM_H, ARM_V, CENTER = 0, 1, 2, 3
ANCHORS = ("sw", "south", "east", "center")


def hierarchy_side(step: int) -> int:
    """3, 7, 15, ...: side(n) = 2 side(n-1) + 1."""
    if step < 0:
        raise ValueError("step must be non-negative")
    return 2 ** (step + 1) - 1


def _labels(step: int) -> np.ndarray:
    if step == 0:
        return np.zeros((1, 1), dtype=np.int64)
    sub = _labels(step - 1)
    m = sub.shape[0]
    side = 2 * m + 1
    out = np.empty((side, side), dtype=np.int64)
    out[m, :] = ARM_V
    out[:, m] = ARM_H
    out[m, m] = CENTER
    for ox in (0, m + 1):
        for oy in (0, m + 1):
            out[ox:ox + m, oy:oy + m] = sub
    return out


@dataclass(frozen=True, eq=False)
class HierarchicalPattern:
    """Step-``n`` cross pattern; ``labels[x, y]`` in local coordinates.

    ``origin`` is the local cell placed at the plane origin by the anchor.
    """

    step: int
    labels: np.ndarray
    anchor: str
    origin: Cell

    @property
    def side(self) -> int:
        return int(self.labels.shape[0])

    def to_plane(self, cell: Cell) -> Cell:
        return (cell[0] - self.origin[0], cell[1] - self.origin[1])

    def to_local(self, cell: Cell) -> Cell:
        return (cell[0] + self.origin[0], cell[1] + self.origin[1])

    def label_at(self, plane_cell: Cell) -> int | None:
        x, y = self.to_local(plane_cell)
        if 0 <= x < self.side and 0 <= y < self.side:
            return int(self.labels[x, y])
        return None


def generate_hierarchy(step: int, anchor: str = "sw") -> HierarchicalPattern:
    if step < 1:
        raise ValueError("step must be at least 1")
    if anchor not in ANCHORS:
        raise ValueError(f"anchor must be one of {ANCHORS}")
    side = hierarchy_side(step)
    limits.check("hierarchy cells", side * side)
    h = side // 2
    origin = {"sw": (0, 0), "south": (h, 0), "east": (side - 1, h), "center": (h, h)}[anchor]
    return HierarchicalPattern(step, _labels(step), anchor, origin)


def _gilbert(x: int, y: int, ax: int, ay: int, bx: int, by: int, out: list[Cell]) -> None:
    """Generalised Hilbert curve filling the rectangle spanned by ``a`` and ``b`` from ``(x, y)``."""
    w, h = abs(ax + ay), abs(bx + by)
    dax, day = (ax > 0) - (ax < 0), (ay > 0) - (ay < 0)
    dbx, dby = (bx > 0) - (bx < 0), (by > 0) - (by < 0)
    if h == 1:
        for _ in range(w):
            out.append((x, y))
            x, y = x + dax, y + day
        return
    if w == 1:
        for _ in range(h):
            out.append((x, y))
            x, y = x + dbx, y + dby
        return
    ax2, ay2 = ax // 2, ay // 2
    bx2, by2 = bx // 2, by // 2
    w2, h2 = abs(ax2 + ay2), abs(bx2 + by2)
    if 2 * w > 3 * h:
        if w2 % 2 and w > 2:
            ax2, ay2 = ax2 + dax, ay2 + day
        _gilbert(x, y, ax2, ay2, bx, by, out)
        _gilbert(x + ax2, y + ay2, ax - ax2, ay - ay2, bx, by, out)
    else:
        if h2 % 2 and h > 2:
            bx2, by2 = bx2 + dbx, by2 + dby
        _gilbert(x, y, bx2, by2, ax2, ay2, out)
        _gilbert(x + bx2, y + by2, ax, ay, bx - bx2, by - by2, out)
        _gilbert(
            x + (ax - dax) + (bx2 - dbx),
            y + (ay - day) + (by2 - dby),
            -bx2, -by2, -(ax - ax2), -(ay - ay2), out,
        )


def _boustrophedon(start: Cell, a: Cell, b: Cell, la: int, lb: int) -> list[Cell]:
    out = []
    for i in range(la):
        js = range(lb) if i % 2 == 0 else range(lb - 1, -1, -1)
        for j in js:
            out.append((start[0] + i * a[0] + j * b[0], start[1] + i * a[1] + j * b[1]))
    return out


def rectangle_path(start: Cell, a: Cell, b: Cell, la: int, lb: int) -> list[Cell]:
    """Hamiltonian unit-step path of a rectangle from a corner, ending on its far ``a`` side.

    ``a`` and ``b`` are unit axis vectors.  The generalised Hilbert order is
    used when it only makes unit steps, else a serpentine sweep.
    """
    if la < 1 or lb < 1:
        return []
    out: list[Cell] = []
    _gilbert(start[0], start[1], la * a[0], la * a[1], lb * b[0], lb * b[1], out)
    far = lambda c: (c[0] - start[0]) * a[0] + (c[1] - start[1]) * a[1] == la - 1  # noqa: E731
    unit = all(abs(p[0] - q[0]) + abs(p[1] - q[1]) == 1 for p, q in zip(out, out[1:]))
    if unit and len(set(out)) == la * lb and far(out[-1]):
        return out
    return _boustrophedon(start, a, b, la, lb)


def _direction(p: Cell, q: Cell) -> str:
    d = (q[0] - p[0], q[1] - p[1])
    for k, v in STEP.items():
        if v == d:
            return k
    raise ValueError(f"cells {p} and {q} are not adjacent")


@dataclass(frozen=True)
class Region:
    """Rectangle in plane coordinates: cells ``corner + i*a + j*b``."""

    name: str
    corner: Cell
    a: Cell
    b: Cell
    la: int
    lb: int
    prefix: tuple[Cell, ...] = ()


def _regions(anchor: str, side: int) -> list[Region]:
    h = side // 2
    if anchor == "sw":
        return [Region("all", (0, 0), (1, 0), (0, 1), side, side)]
    if anchor == "south":
        return [
            Region("west", (-1, 0), (-1, 0), (0, 1), h, side),
            Region("east", (0, 0), (1, 0), (0, 1), h + 1, side),
        ]
    if anchor == "east":
        return [
            Region("north", (0, 0), (0, 1), (-1, 0), h + 1, side),
            Region("south", (0, -1), (0, -1), (-1, 0), h, side),
        ]
    # pinwheel: each arm goes to the quadrant clockwise from it
    return [
        Region("ne", (0, 1), (1, 0), (0, 1), h + 1, h),
        Region("se", (1, 0), (0, -1), (1, 0), h + 1, h, prefix=((0, 0),)),
        Region("sw", (0, -1), (-1, 0), (0, -1), h + 1, h),
        Region("nw", (-1, 0), (0, 1), (-1, 0), h + 1, h),
    ]


@dataclass(frozen=True, eq=False)
class PathAttachment:
    """Direction per cell (local coordinates) and the paths they form."""

    pattern: HierarchicalPattern
    directions: np.ndarray  # dtype "<U1"
    paths: tuple[tuple[Cell, ...], ...]  # local coordinates
    regions: tuple[str, ...]


def attach_space_filling_path(h: HierarchicalPattern) -> PathAttachment:
    """Hilbert-style paths: 1, 2 or 4 of them depending on the anchor.

    Each path starts at the corner of its region nearest the origin and its
    last cell points off the pattern.
    """
    side = h.side
    dirs = np.full((side, side), "", dtype="<U1")
    paths = []
    names = []
    for reg in _regions(h.anchor, side):
        cells = list(reg.prefix) + rectangle_path(reg.corner, reg.a, reg.b, reg.la, reg.lb)
        local = [h.to_local(c) for c in cells]
        for p, q in zip(local, local[1:]):
            dirs[p] = _direction(p, q)
        last = local[-1]
        dirs[last] = _outward(last, side, reg.a)
        paths.append(tuple(local))
        names.append(reg.name)
    if np.any(dirs == ""):
        raise AssertionError("path regions do not cover the pattern")
    return PathAttachment(h, dirs, tuple(paths), tuple(names))


def _outward(cell: Cell, side: int, prefer: Cell) -> str:
    x, y = cell
    options = []
    if x == side - 1:
        options.append("E")
    if x == 0:
        options.append("W")
    if y == side - 1:
        options.append("N")
    if y == 0:
        options.append("S")
    for o in options:
        if STEP[o] == prefer:
            return o
    if not options:
        raise AssertionError(f"path ends inside the pattern at {cell}")
    return options[0]


def trace_paths(directions: np.ndarray) -> list[list[Cell]]:
    """Maximal paths of a direction field, recomputed from scratch.

    Starts are cells no other cell points to; every path is followed until it
    leaves the array.  Raises on cycles or merging paths.
    """
    w, h = directions.shape
    pointed: set[Cell] = set()
    for x in range(w):
        for y in range(h):
            dx, dy = STEP[str(directions[x, y])]
            pointed.add((x + dx, y + dy))
    starts = [(x, y) for x in range(w) for y in range(h) if (x, y) not in pointed]
    seen: set[Cell] = set()
    out = []
    for s in starts:
        path = []
        cur = s
        while 0 <= cur[0] < w and 0 <= cur[1] < h:
            if cur in seen:
                raise ValueError(f"paths merge or cycle at {cur}")
            seen.add(cur)
            path.append(cur)
            dx, dy = STEP[str(directions[cur])]
            cur = (cur[0] + dx, cur[1] + dy)
        out.append(path)
    if len(seen) != w * h:
        raise ValueError("some cells lie on cycles")
    return out


# ---------------------------------------------------------------------------
# Wang-ification of label patterns
# ---------------------------------------------------------------------------

OUTSIDE = -1


@dataclass(frozen=True, eq=False)
class WangifiedPattern:
    tileset: TileSet
    tilings: tuple[Tiling, ...]
    colors: dict  # (label_low, label_high, axis) -> color id

    @property
    def tiling(self) -> Tiling:
        return self.tilings[0]


def wangify_many(patterns: Sequence[tuple[np.ndarray, np.ndarray | None]]) -> WangifiedPattern:
    """One tile set for several label patterns; colours are the label pairs across each edge.

    Cells outside an array count as label ``OUTSIDE``.  With directions the
    label of a cell includes its direction, and tiles carry it.
    """
    colors: dict = {}
    tiles: dict = {}

    def color(low, high, axis):
        return colors.setdefault((low, high, axis), len(colors))

    tilings = []
    for labels, directions in patterns:
        labels = np.asarray(labels)
        w, h = labels.shape

        def lab(x, y):
            if 0 <= x < w and 0 <= y < h:
                base = int(labels[x, y])
                return (base, str(directions[x, y])) if directions is not None else (base,)
            return (OUTSIDE,)

        ids = np.empty((w, h), dtype=np.int64)
        for x in range(w):
            for y in range(h):
                me = lab(x, y)
                key = (
                    color(me, lab(x, y + 1), "v"),
                    color(lab(x, y - 1), me, "v"),
                    color(me, lab(x + 1, y), "h"),
                    color(lab(x - 1, y), me, "h"),
                    None if directions is None else str(directions[x, y]),
                )
                if key not in tiles:
                    tiles[key] = Tile(len(tiles), *key)
                ids[x, y] = tiles[key].id
        tilings.append(Tiling(ids))
    return WangifiedPattern(TileSet(tuple(tiles.values())), tuple(tilings), colors)


def wangify(labels: np.ndarray, directions: np.ndarray | None = None) -> WangifiedPattern:
    return wangify_many([(labels, directions)])


def render_pbm(labels: np.ndarray) -> str:
    """Plain PBM (P1): cross cells black, north row first."""
    labels = np.asarray(labels)
    w, h = labels.shape
    rows = [" ".join("1" if labels[x, y] != BLANK else "0" for x in range(w)) for y in range(h - 1, -1, -1)]
    return f"P1\n{w} {h}\n" + "\n".join(rows) + "\n"


def checkerboard_tileset() -> TileSet:
    """Two tiles whose colours encode coordinate parity; they tile exactly the checkerboards."""
    return TileSet((Tile(0, n=0, s=1, e=2, w=3), Tile(1, n=1, s=0, e=3, w=2)))


def uniform_tileset(color: int = 0) -> TileSet:
    return TileSet((Tile(0, color, color, color, color),))


__all__ = [
    "ANCHORS",
    "BudgetExhausted",
    "HierarchicalPattern",
    "PathAttachment",
    "PathTrace",
    "Tile",
    "TileSet",
    "Tiling",
    "Violation",
    "attach_space_filling_path",
    "check_tiling",
    "checkerboard_tileset",
    "follow_path",
    "generate_hierarchy",
    "hierarchy_side",
    "rectangle_path",
    "render_pbm",
    "tiles_square",
    "tiles_torus",
    "trace_paths",
    "uniform_tileset",
    "wangify",
    "wangify_many",
]
