"""Macro-tiles: integer approximations of parallelograms and stretched tile sets.

Cells are the unit squares centred on the integer points.  The macro shape
``N`` for the lattice spanned by ``nu`` and ``mu`` is the set of cells whose
centre lies in the half-open parallelogram ``{s nu + t mu : 0 <= s, t < 1}``
(possibly shifted), which makes the translates of ``N`` an exact partition
of the plane.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from . import limits
from .core import Cell
from .wang import STEP, Tile, TileSet, Tiling

# ---------------------------------------------------------------------------
# rasterisation of a segment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rasterization:
    segment: Cell
    d_cells: frozenset[Cell]
    upper: tuple[Cell, ...]
    lower: tuple[Cell, ...]


def _crossings(a: int, b: int) -> list[Fraction]:
    """Parameters in (0, 1) where the segment crosses a half-integer grid line."""
    out = set()
    for comp in (a, b):
        if comp == 0:
            continue
        lo, hi = sorted((0, comp))
        for m in range(lo, hi):
            out.add(Fraction(2 * m + 1, 2 * comp))
    return sorted(out)


def _round_half(f: Fraction) -> int:
    # only called on points strictly inside a cell, so ties never happen
    return int((f + Fraction(1, 2)) // 1)


def rasterize(v: Cell) -> Rasterization:
    """Cells met by the closed segment from the centre of ``(0,0)`` to the centre of ``v``.

    Where the segment passes exactly through a grid corner all four cells at
    that corner touch it; the upper bound goes through the one on the left of
    the direction of travel, the lower bound through the one on the right.
    """
    a, b = int(v[0]), int(v[1])
    if a == 0 and b == 0:
        raise ValueError("cannot rasterise the zero vector")
    cuts = [Fraction(0)] + _crossings(a, b) + [Fraction(1)]
    chain: list[Cell] = []
    for s0, s1 in zip(cuts, cuts[1:]):
        mid = (s0 + s1) / 2
        c = (_round_half(mid * a), _round_half(mid * b))
        if not chain or chain[-1] != c:
            chain.append(c)
    d_cells = set(chain)
    upper, lower = [chain[0]], [chain[0]]
    for p, q in zip(chain, chain[1:]):
        if p[0] != q[0] and p[1] != q[1]:
            c1, c2 = (q[0], p[1]), (p[0], q[1])
            d_cells |= {c1, c2}
            # left of travel has positive cross product with (a, b)
            side = lambda c: a * (c[1] - p[1]) - b * (c[0] - p[0])  # noqa: E731
            left, right = (c1, c2) if side(c1) > side(c2) else (c2, c1)
            upper.append(left)
            lower.append(right)
        upper.append(q)
        lower.append(q)
    return Rasterization((a, b), frozenset(d_cells), tuple(upper), tuple(lower))


# ---------------------------------------------------------------------------
# macro shape
# ---------------------------------------------------------------------------


def _det(u: Cell, v: Cell) -> int:
    return u[0] * v[1] - u[1] * v[0]


def vertex_scale(nu: Cell, mu: Cell, min_distance: int = 3) -> int:
    """Smallest ``i`` such that all vertices of the parallelogram of ``i nu, i mu`` are ``min_distance`` apart.

    Distance is measured along the axes: two vertices are far enough apart
    when they differ by at least ``min_distance`` horizontally or vertically.
    """
    if _det(nu, mu) == 0:
        raise ValueError(f"{nu} and {mu} are parallel")
    i = 1
    while True:
        verts = [(0, 0), (i * nu[0], i * nu[1]), (i * mu[0], i * mu[1]), (i * (nu[0] + mu[0]), i * (nu[1] + mu[1]))]
        if all(
            max(abs(p[0] - q[0]), abs(p[1] - q[1])) >= min_distance
            for j, p in enumerate(verts)
            for q in verts[j + 1:]
        ):
            return i
        i += 1


def _connected(cells: set[Cell]) -> bool:
    if not cells:
        return False
    start = next(iter(cells))
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for dx, dy in STEP.values():
            c = (x + dx, y + dy)
            if c in cells and c not in seen:
                seen.add(c)
                queue.append(c)
    return len(seen) == len(cells)


NEIGHBOUR_NAMES = ("N", "S", "E", "W", "R1", "R2")


@dataclass(frozen=True)
class MacroShape:
    """Fundamental domain of the lattice ``Z nu' + Z mu'`` (``nu' = scale*nu``).

    ``neighbours`` maps a side name to the lattice vector of the adjacent
    translate; ``borders`` maps it to the cell edges ``(cell, direction)``
    shared with that translate.  ``S`` edges are listed in the order of their
    ``N`` partners (and ``W`` after ``E``, ``R2`` after ``R1``) so that equal
    positions meet.
    """

    nu: Cell
    mu: Cell
    scale: int
    offset: tuple[Fraction, Fraction]
    cells: tuple[Cell, ...]
    neighbours: dict
    borders: dict

    @property
    def nu_s(self) -> Cell:
        return (self.scale * self.nu[0], self.scale * self.nu[1])

    @property
    def mu_s(self) -> Cell:
        return (self.scale * self.mu[0], self.scale * self.mu[1])

    @property
    def neighbor_count(self) -> int:
        return len(self.neighbours)

    @property
    def overlap_suppressed(self) -> bool:
        return self.neighbor_count == 6

    def __len__(self) -> int:
        return len(self.cells)

    def locate(self, z: Cell) -> tuple[int, int, Cell]:
        """``(a, b, c)`` with ``z = c + a nu' + b mu'`` and ``c`` in the shape."""
        nu, mu = self.nu_s, self.mu_s
        D = _det(nu, mu)
        px = Fraction(z[0]) - self.offset[0]
        py = Fraction(z[1]) - self.offset[1]
        s = (px * mu[1] - py * mu[0]) / D
        t = (nu[0] * py - nu[1] * px) / D
        a, b = s.__floor__(), t.__floor__()
        c = (z[0] - a * nu[0] - b * mu[0], z[1] - a * nu[1] - b * mu[1])
        return a, b, c

    def index(self) -> dict[Cell, int]:
        return {c: i for i, c in enumerate(self.cells)}


def _shape_cells(nu: Cell, mu: Cell, offset) -> set[Cell]:
    D = _det(nu, mu)
    xs = [0, nu[0], mu[0], nu[0] + mu[0]]
    ys = [0, nu[1], mu[1], nu[1] + mu[1]]
    cells = set()
    for x in range(min(xs) - 1, max(xs) + 2):
        for y in range(min(ys) - 1, max(ys) + 2):
            px, py = x - offset[0], y - offset[1]
            s = (px * mu[1] - py * mu[0]) / D
            t = (nu[0] * py - nu[1] * px) / D
            if 0 <= s < 1 and 0 <= t < 1:
                cells.add((x, y))
    return cells


def build_shape(nu: Cell, mu: Cell, min_distance: int = 3) -> MacroShape:
    """Macro shape for the directions ``nu`` (north) and ``mu`` (east)."""
    nu = (int(nu[0]), int(nu[1]))
    mu = (int(mu[0]), int(mu[1]))
    i = vertex_scale(nu, mu, min_distance)
    nu_s, mu_s = (i * nu[0], i * nu[1]), (i * mu[0], i * mu[1])
    limits.check("macro shape cells", abs(_det(nu_s, mu_s)))
    cells = None
    half = Fraction(1, 2)
    for off in ((Fraction(0), Fraction(0)), (-half, -half), (-half, Fraction(0)), (Fraction(0), -half)):
        cand = _shape_cells(nu_s, mu_s, off)
        if _connected(cand):
            cells, offset = cand, off
            break
    if cells is None:
        raise ValueError(f"no connected fundamental domain found for {nu}, {mu}")
    ordered = tuple(sorted(cells, key=lambda c: (c[1], c[0])))
    # lattice translates touching N along an edge
    touching = {}
    for a, b in product((-1, 0, 1), repeat=2):
        if (a, b) == (0, 0):
            continue
        L = (a * nu_s[0] + b * mu_s[0], a * nu_s[1] + b * mu_s[1])
        edges = []
        for c in ordered:
            for d, (dx, dy) in STEP.items():
                z = (c[0] + dx - L[0], c[1] + dy - L[1])
                if z in cells:
                    edges.append((c, d))
        if edges:
            touching[(a, b)] = (L, edges)
    names = {(1, 0): "N", (-1, 0): "S", (0, 1): "E", (0, -1): "W"}
    missing = [n for ab, n in names.items() if ab not in touching]
    if missing:
        raise ValueError(f"shape lacks the {missing} neighbours")
    extra = sorted(ab for ab in touching if ab not in names)
    if extra:
        r1 = max(extra)  # the representative with a positive nu coefficient
        names[r1] = "R1"
        names[(-r1[0], -r1[1])] = "R2"
    neighbours, borders = {}, {}
    for ab, name in names.items():
        L, edges = touching[ab]
        neighbours[name] = L
        borders[name] = edges
    # order the reverse sides by their partners
    for fwd, back in (("N", "S"), ("E", "W"), ("R1", "R2")):
        if fwd not in borders:
            continue
        L = neighbours[fwd]
        partner = []
        for c, d in borders[fwd]:
            dx, dy = STEP[d]
            partner.append(((c[0] + dx - L[0], c[1] + dy - L[1]), _opposite(d)))
        if sorted(partner) != sorted(borders[back]):
            raise AssertionError(f"{fwd}/{back} borders do not match")
        borders[back] = partner
    return MacroShape(nu, mu, i, offset, ordered, neighbours, borders)


def _opposite(d: str) -> str:
    return {"N": "S", "S": "N", "E": "W", "W": "E"}[d]


def partition_check(shape: MacroShape, p: int, q: int) -> bool:
    """Translates by ``a nu' + b mu'`` (``a < p``, ``b < q``) tile the quotient torus exactly once.

    Every cell of a box around the translates is located, and the counts per
    lattice class must match the shape size.
    """
    index = shape.index()
    seen: dict[tuple[int, int, Cell], int] = {}
    for a in range(p):
        for b in range(q):
            for c in shape.cells:
                z = (c[0] + a * shape.nu_s[0] + b * shape.mu_s[0], c[1] + a * shape.nu_s[1] + b * shape.mu_s[1])
                la, lb, cc = shape.locate(z)
                if cc not in index or (la, lb) != (a, b):
                    return False
                key = (la % p, lb % q, cc)
                seen[key] = seen.get(key, 0) + 1
    return len(seen) == p * q * len(shape) and all(v == 1 for v in seen.values())


# ---------------------------------------------------------------------------
# stretched tile sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StretchedTileSet:
    base: TileSet
    shape: MacroShape
    tileset: TileSet
    macro_map: dict  # base tile id -> tuple of stretched tile ids, in shape cell order
    neutral_color: int

    @property
    def tiles(self) -> tuple[Tile, ...]:
        return self.tileset.tiles

    def cell_of(self, tile_id: int) -> tuple[int, int]:
        """``(base tile id, shape cell index)`` of a stretched tile."""
        return self._origin[tile_id]

    @property
    def _origin(self) -> dict:
        out = {}
        for bid, ids in self.macro_map.items():
            for j, tid in enumerate(ids):
                out[tid] = (bid, j)
        return out


def stretch_tileset(ts: TileSet, shape: MacroShape) -> StretchedTileSet:
    """``k * n`` tiles whose macro-tiles behave like the base tiles.

    Interior edges get a colour private to (base tile, edge), border edges on
    the N/S/E/W sides encode (side pair, position, base colour), and R edges
    are neutral.
    """
    k = len(shape)
    limits.check("stretched tile set", k * len(ts))
    index = shape.index()
    colors: dict = {}

    def color(key) -> int:
        return colors.setdefault(key, len(colors))

    neutral = color(("neutral",))
    border_key = {}
    for side, edges in shape.borders.items():
        for pos, (c, d) in enumerate(edges):
            border_key[(c, d)] = (side, pos)
    pair_of = {"N": "NS", "S": "NS", "E": "EW", "W": "EW"}
    tiles = []
    macro_map = {}
    for t_idx, t in enumerate(ts.tiles):
        ids = []
        for j, c in enumerate(shape.cells):
            cols = {}
            for d, (dx, dy) in STEP.items():
                z = (c[0] + dx, c[1] + dy)
                if z in index:
                    lo, hi = min(c, z), max(c, z)
                    cols[d] = color(("inner", t.id, lo, hi))
                else:
                    side, pos = border_key[(c, d)]
                    if side in ("R1", "R2"):
                        cols[d] = neutral
                    else:
                        # a position on N meets the same position on S, so the base colours must agree
                        cols[d] = color((pair_of[side], pos, t.color(side)))
            tid = t_idx * k + j
            tiles.append(Tile(tid, cols["N"], cols["S"], cols["E"], cols["W"], t.direction))
            ids.append(tid)
        macro_map[t.id] = tuple(ids)
    return StretchedTileSet(ts, shape, TileSet(tuple(tiles)), macro_map, neutral)


def assemblies(sts: StretchedTileSet, base_id: int, limit: int = 2) -> int:
    """Ways (capped at ``limit``) to fill the shape from the whole stretched set
    once its first cell holds that base tile's first tile, interior edges matching.

    One way means the macro-tile is forced by any of its tiles; a cyclically
    shifted filling by the tile's own pieces is a translated macro grid and is
    excluded by pinning the first cell.
    """
    shape = sts.shape
    index = shape.index()
    cells = shape.cells
    by_color: dict = {}
    for t in sts.tiles:
        for d in STEP:
            by_color.setdefault((d, t.color(d)), []).append(t)
    first = sts.tileset.by_id()[sts.macro_map[base_id][0]]
    placed: dict[Cell, Tile] = {}
    count = 0

    def candidates(c: Cell):
        if c == cells[0]:
            return [first]
        for d, (dx, dy) in STEP.items():
            z = (c[0] + dx, c[1] + dy)
            if z in placed:
                return by_color.get((d, placed[z].color(_opposite(d))), [])
        return sts.tiles

    def rec(i: int) -> None:
        nonlocal count
        if count >= limit:
            return
        if i == len(cells):
            count += 1
            return
        c = cells[i]
        for t in candidates(c):
            ok = True
            for d, (dx, dy) in STEP.items():
                z = (c[0] + dx, c[1] + dy)
                if z in index and z in placed and placed[z].color(_opposite(d)) != t.color(d):
                    ok = False
                    break
            if ok:
                placed[c] = t
                rec(i + 1)
                del placed[c]

    rec(0)
    return count


def unique_assembly(sts: StretchedTileSet) -> bool:
    return all(assemblies(sts, t.id) == 1 for t in sts.base.tiles)


# ---------------------------------------------------------------------------
# counting torus tilings on both sides
# ---------------------------------------------------------------------------


def _count_tilings(cells: Sequence, candidates, neighbours, budget: int) -> list[dict]:
    """All assignments cell -> tile respecting ``neighbours`` (list of (cell, dir, other))."""
    order = list(cells)
    pos = {c: i for i, c in enumerate(order)}
    constraints: list[list[tuple[str, object]]] = [[] for _ in order]
    for c, d, other in neighbours:
        # check each edge once, when its later endpoint is placed
        if pos[other] <= pos[c]:
            constraints[pos[c]].append((d, other))
        else:
            constraints[pos[other]].append((_opposite(d), c))
    out: list[dict] = []
    assign: dict = {}
    nodes = 0

    def rec(i: int) -> None:
        nonlocal nodes
        if i == len(order):
            out.append(dict(assign))
            return
        c = order[i]
        for t in candidates(c):
            nodes += 1
            if nodes > budget:
                raise limits.CapExceeded("tiling enumeration nodes", nodes, budget)
            # on tiny tori a cell can be its own neighbour
            if all(t.color(d) == (t if o == c else assign[o]).color(_opposite(d)) for d, o in constraints[i]):
                assign[c] = t
                rec(i + 1)
                del assign[c]

    rec(0)
    return out


def base_torus_tilings(ts: TileSet, p: int, q: int, budget: int = 1_000_000) -> list[dict]:
    """All tilings of the ``p x q`` torus with cells ``(i, j)``: east is ``i+1``, north ``j+1``."""
    cells = [(i, j) for j in range(q) for i in range(p)]
    nb = [((i, j), "E", ((i + 1) % p, j)) for i, j in cells] + [((i, j), "N", (i, (j + 1) % q)) for i, j in cells]
    return _count_tilings(cells, lambda c: ts.tiles, nb, budget)


def macro_torus_tilings(sts: StretchedTileSet, p: int, q: int, budget: int = 1_000_000) -> list[dict]:
    """Macro-aligned tilings of the plane modulo ``p mu'`` and ``q nu'``.

    A cell's tile must sit at the same position of the shape as the cell
    itself; this fixes the macro grid and leaves one tiling per base tiling.
    """
    shape = sts.shape
    index = shape.index()
    k = len(shape)
    by_pos: list[list[Tile]] = [[] for _ in range(k)]
    for t in sts.tiles:
        by_pos[t.id % k].append(t)
    # cells of the quotient: (a mod q, b mod p, shape cell), a counts nu', b counts mu'

    def canon(z: Cell):
        a, b, c = shape.locate(z)
        return (a % q, b % p, c)

    cells = [(a, b, c) for a in range(q) for b in range(p) for c in shape.cells]
    nb = []
    for a, b, c in cells:
        z = (c[0] + a * shape.nu_s[0] + b * shape.mu_s[0], c[1] + a * shape.nu_s[1] + b * shape.mu_s[1])
        for d in ("E", "N"):
            dx, dy = STEP[d]
            nb.append(((a, b, c), d, canon((z[0] + dx, z[1] + dy))))
    return _count_tilings(cells, lambda cell: by_pos[index[cell[2]]], nb, budget)


@dataclass(frozen=True)
class IsomorphismReport:
    base_count: int
    macro_count: int
    images_valid: bool

    @property
    def ok(self) -> bool:
        return self.base_count == self.macro_count and self.images_valid


def verify_isomorphism(ts: TileSet, sts: StretchedTileSet, p: int, q: int) -> IsomorphismReport:
    """Compare base tilings of the ``p x q`` torus with macro tilings of the scaled torus.

    Base cell ``(i, j)`` becomes the macro-tile at ``j nu' + i mu'``; the
    substitution must send every base tiling to a distinct valid macro tiling,
    and the two counts must agree.
    """
    base = base_torus_tilings(ts, p, q)
    macro = macro_torus_tilings(sts, p, q)
    tiles = sts.tileset.by_id()
    macro_keys = {tuple(sorted((cell, t.id) for cell, t in m.items())) for m in macro}
    images = set()
    for tiling in base:
        img = []
        for (i, j), t in tiling.items():
            for pos, c in enumerate(sts.shape.cells):
                img.append(((j, i, c), tiles[sts.macro_map[t.id][pos]].id))
        images.add(tuple(sorted(img)))
    valid = images <= macro_keys and len(images) == len(base)
    return IsomorphismReport(len(base), len(macro), valid)


# ---------------------------------------------------------------------------
# macro-level paths
# ---------------------------------------------------------------------------


def serpentine_order(shape: MacroShape) -> tuple[Cell, ...]:
    """Cells of the shape row by row, alternating direction."""
    rows: dict[int, list[Cell]] = {}
    for c in shape.cells:
        rows.setdefault(c[1], []).append(c)
    out = []
    for n, y in enumerate(sorted(rows)):
        row = sorted(rows[y])
        out.extend(row if n % 2 == 0 else reversed(row))
    return tuple(out)


def macro_successor(shape: MacroShape, macro: tuple[int, int], direction: str) -> tuple[int, int]:
    """Lattice coordinates ``(a, b)`` (``a`` along nu', ``b`` along mu') of the pointed macro-tile."""
    a, b = macro
    return {"N": (a + 1, b), "S": (a - 1, b), "E": (a, b + 1), "W": (a, b - 1)}[direction]


def stretched_tiling(sts: StretchedTileSet, base: Tiling) -> dict[Cell, int]:
    """Plane cells -> stretched tile ids for a finite base tiling (base ``(i, j)`` at ``j nu' + i mu'``)."""
    shape = sts.shape
    out = {}
    p, q = base.shape
    for i in range(p):
        for j in range(q):
            bid = int(base.ids[i, j])
            for pos, c in enumerate(shape.cells):
                z = (c[0] + j * shape.nu_s[0] + i * shape.mu_s[0], c[1] + j * shape.nu_s[1] + i * shape.mu_s[1])
                out[z] = sts.macro_map[bid][pos]
    return out


__all__ = [
    "IsomorphismReport",
    "MacroShape",
    "Rasterization",
    "StretchedTileSet",
    "assemblies",
    "base_torus_tilings",
    "build_shape",
    "macro_successor",
    "macro_torus_tilings",
    "partition_check",
    "rasterize",
    "serpentine_order",
    "stretch_tileset",
    "stretched_tiling",
    "unique_assembly",
    "verify_isomorphism",
    "vertex_scale",
]
