"""Exact 1D/2D cellular automata: rule tables, periodic configurations, evolution.

Conventions used everywhere in the package:

* symbols are the integers ``0 .. n_symbols-1``;
* a 1D neighbourhood word ``(x_{-r}, ..., x_r)`` is looked up in a table at the
  base-``n_symbols`` number it spells, most significant digit first;
* 2D configurations are numpy arrays indexed ``cells[x, y]`` with ``y`` pointing
  north; a 2D rule carries an explicit offset list and its table is indexed the
  same way as in 1D, reading the neighbourhood values in offset order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import limits

Cell = tuple[int, int]


def _check_alphabet(n_symbols: int) -> None:
    if not 1 <= n_symbols <= limits.MAX_ALPHABET:
        raise ValueError(f"alphabet size must be in 1..{limits.MAX_ALPHABET}, got {n_symbols}")


def word_index(word: Sequence[int], n_symbols: int) -> int:
    idx = 0
    for a in word:
        idx = idx * n_symbols + int(a)
    return idx


def index_word(idx: int, n_symbols: int, length: int) -> tuple[int, ...]:
    out = []
    for _ in range(length):
        idx, a = divmod(idx, n_symbols)
        out.append(a)
    return tuple(reversed(out))


def all_words(n_symbols: int, length: int) -> np.ndarray:
    """All words of ``length`` in lexicographic order, one per row."""
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(n_symbols ** length, dtype=np.int64)
    powers = n_symbols ** np.arange(length - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % n_symbols


# ---------------------------------------------------------------------------
# 1D
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RuleTable1D:
    n_symbols: int
    radius: int
    table: np.ndarray

    def __post_init__(self):
        if self.n_symbols < 1:
            raise ValueError("alphabet size must be positive")
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        table = np.asarray(self.table, dtype=np.int64).reshape(-1)
        if table.size != self.n_symbols ** (2 * self.radius + 1):
            raise ValueError(
                f"table has {table.size} entries, expected {self.n_symbols ** (2 * self.radius + 1)}"
            )
        if table.size and (table.min() < 0 or table.max() >= self.n_symbols):
            raise ValueError("table value out of alphabet range")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def width(self) -> int:
        return 2 * self.radius + 1

    @classmethod
    def from_function(cls, n_symbols: int, radius: int, fn: Callable[[tuple[int, ...]], int]) -> "RuleTable1D":
        words = all_words(n_symbols, 2 * radius + 1)
        return cls(n_symbols, radius, np.array([fn(tuple(int(a) for a in w)) for w in words]))

    @classmethod
    def elementary(cls, number: int) -> "RuleTable1D":
        """Wolfram-numbered radius-1 binary rule."""
        if not 0 <= number < 256:
            raise ValueError("elementary rule number must be in 0..255")
        return cls(2, 1, np.array([(number >> i) & 1 for i in range(8)]))

    def __call__(self, word: Sequence[int]) -> int:
        return int(self.table[word_index(word, self.n_symbols)])

    def __eq__(self, other):
        if not isinstance(other, RuleTable1D):
            return NotImplemented
        return (self.n_symbols, self.radius) == (other.n_symbols, other.radius) and np.array_equal(
            self.table, other.table
        )

    def __hash__(self):
        return hash((self.n_symbols, self.radius, self.table.tobytes()))

    def mirrored(self) -> "RuleTable1D":
        """The rule read right-to-left: g(x_{-r..r}) = f(x_r, ..., x_{-r})."""
        shaped = self.table.reshape((self.n_symbols,) * self.width)
        return RuleTable1D(self.n_symbols, self.radius, shaped.transpose(tuple(reversed(range(self.width)))).reshape(-1))

    def with_radius(self, radius: int) -> "RuleTable1D":
        """Same local map seen through a larger window."""
        if radius < self.radius:
            raise ValueError("can only enlarge the radius")
        pad = radius - self.radius
        return RuleTable1D.from_function(self.n_symbols, radius, lambda w: self(w[pad:len(w) - pad]))

    def apply_words(self, rows: np.ndarray) -> np.ndarray:
        """Image of a batch of finite words (shape ``(..., L)``) -> ``(..., L-2r)``."""
        rows = np.asarray(rows, dtype=np.int64)
        out_len = rows.shape[-1] - 2 * self.radius
        if out_len < 0:
            raise ValueError("word shorter than the neighbourhood")
        idx = np.zeros(rows.shape[:-1] + (out_len,), dtype=np.int64)
        for j in range(self.width):
            idx = idx * self.n_symbols + rows[..., j:j + out_len]
        return self.table[idx]


@dataclass(frozen=True, eq=False)
class PeriodicConfig1D:
    n_symbols: int
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int64).reshape(-1)
        if cells.size == 0:
            raise ValueError("period must be positive")
        if cells.min() < 0 or cells.max() >= self.n_symbols:
            raise ValueError("cell value out of alphabet range")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def period(self) -> int:
        return int(self.cells.size)

    def __getitem__(self, i: int) -> int:
        return int(self.cells[i % self.period])

    def __eq__(self, other):
        """Equality of the represented bi-infinite configurations."""
        if not isinstance(other, PeriodicConfig1D):
            return NotImplemented
        if self.n_symbols != other.n_symbols:
            return False
        n = np.lcm(self.period, other.period)
        return np.array_equal(np.resize(self.cells, n), np.resize(other.cells, n))

    def __hash__(self):
        return hash((self.n_symbols, self.minimal().cells.tobytes()))

    def minimal(self) -> "PeriodicConfig1D":
        p = self.period
        for d in range(1, p + 1):
            if p % d == 0 and np.array_equal(self.cells, np.resize(self.cells[:d], p)):
                return PeriodicConfig1D(self.n_symbols, self.cells[:d])
        return self


def apply_1d(rule: RuleTable1D, c: PeriodicConfig1D) -> PeriodicConfig1D:
    if rule.n_symbols != c.n_symbols:
        raise ValueError(f"alphabet mismatch: rule over {rule.n_symbols}, config over {c.n_symbols}")
    r = rule.radius
    idx = np.zeros(c.period, dtype=np.int64)
    for j in range(-r, r + 1):
        idx = idx * rule.n_symbols + np.roll(c.cells, -j)
    return PeriodicConfig1D(c.n_symbols, rule.table[idx])


# ---------------------------------------------------------------------------
# 2D
# ---------------------------------------------------------------------------


def moore_offsets(radius: int) -> tuple[Cell, ...]:
    return tuple((dx, dy) for dx in range(-radius, radius + 1) for dy in range(-radius, radius + 1))


def von_neumann_offsets(ex: int, ey: int) -> tuple[Cell, ...]:
    """Cross of half-lengths ``ex`` (horizontal) and ``ey`` (vertical)."""
    cells = {(dx, 0) for dx in range(-ex, ex + 1)} | {(0, dy) for dy in range(-ey, ey + 1)}
    return tuple(sorted(cells))


@dataclass(frozen=True, eq=False)
class RuleTable2D:
    """Local rule over an explicit offset list, fully materialised.

    ``kind`` is ``"moore"`` when the offsets are exactly the radius-``radius``
    Moore square in canonical order; anything else is ``"von_neumann"``
    (a cross or any other finite offset list).
    """

    n_symbols: int
    radius: int
    offsets: tuple[Cell, ...]
    table: np.ndarray
    kind: str = "moore"

    def __post_init__(self):
        _check_alphabet(self.n_symbols)
        offsets = tuple((int(a), int(b)) for a, b in self.offsets)
        if len(set(offsets)) != len(offsets):
            raise ValueError("duplicate offsets")
        object.__setattr__(self, "offsets", offsets)
        if self.kind == "moore" and offsets != moore_offsets(self.radius):
            raise ValueError("moore rule must use the canonical Moore offsets")
        if any(max(abs(a), abs(b)) > self.radius for a, b in offsets):
            raise ValueError("offset outside the declared radius")
        table = np.asarray(self.table, dtype=np.int64).reshape(-1)
        expected = self.n_symbols ** len(offsets)
        if table.size != expected:
            raise ValueError(f"table has {table.size} entries, expected {expected}")
        if table.min() < 0 or table.max() >= self.n_symbols:
            raise ValueError("table value out of alphabet range")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def extent(self) -> tuple[int, int]:
        return (max(abs(a) for a, _ in self.offsets), max(abs(b) for _, b in self.offsets))

    @classmethod
    def from_function(
        cls,
        n_symbols: int,
        radius: int,
        fn: Callable[[Mapping[Cell, int]], int],
        offsets: Sequence[Cell] | None = None,
    ) -> "RuleTable2D":
        """Materialise ``fn`` (called with an offset -> symbol mapping)."""
        kind = "moore" if offsets is None else "von_neumann"
        offsets = moore_offsets(radius) if offsets is None else tuple(offsets)
        limits.check("2D rule table", n_symbols ** len(offsets))
        table = [fn(dict(zip(offsets, w))) for w in itertools.product(range(n_symbols), repeat=len(offsets))]
        return cls(n_symbols, radius, offsets, np.array(table), kind)

    def local(self, values: Sequence[int]) -> int:
        return int(self.table[word_index(values, self.n_symbols)])

    def __eq__(self, other):
        if not isinstance(other, RuleTable2D):
            return NotImplemented
        return (self.n_symbols, self.offsets) == (other.n_symbols, other.offsets) and np.array_equal(
            self.table, other.table
        )

    def __hash__(self):
        return hash((self.n_symbols, self.offsets, self.table.tobytes()))


@dataclass(frozen=True, eq=False)
class TorusConfig2D:
    n_symbols: int
    cells: np.ndarray

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.int64)
        if cells.ndim != 2 or 0 in cells.shape:
            raise ValueError("torus cells must be a non-empty 2D array")
        if cells.min() < 0 or cells.max() >= self.n_symbols:
            raise ValueError("cell value out of alphabet range")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def widths(self) -> tuple[int, int]:
        return self.cells.shape  # type: ignore[return-value]

    def __getitem__(self, x: Cell) -> int:
        p, q = self.widths
        return int(self.cells[x[0] % p, x[1] % q])

    def tiled(self, p: int, q: int) -> "TorusConfig2D":
        """The same infinite configuration on a ``p x q`` torus (multiples only)."""
        a, b = self.widths
        if p % a or q % b:
            raise ValueError(f"{p}x{q} is not a multiple of {a}x{b}")
        return TorusConfig2D(self.n_symbols, np.tile(self.cells, (p // a, q // b)))

    def __eq__(self, other):
        """Equality of the represented (doubly periodic) plane configurations."""
        if not isinstance(other, TorusConfig2D):
            return NotImplemented
        if self.n_symbols != other.n_symbols:
            return False
        p = int(np.lcm(self.widths[0], other.widths[0]))
        q = int(np.lcm(self.widths[1], other.widths[1]))
        return np.array_equal(self.tiled(p, q).cells, other.tiled(p, q).cells)

    def __hash__(self):
        return hash((self.n_symbols, self.widths, self.cells.tobytes()))

    @classmethod
    def constant(cls, n_symbols: int, symbol: int, p: int = 1, q: int = 1) -> "TorusConfig2D":
        return cls(n_symbols, np.full((p, q), symbol))


def shift(c: TorusConfig2D, v: Cell) -> TorusConfig2D:
    """sigma^v: result(x) = c(x + v)."""
    return TorusConfig2D(c.n_symbols, np.roll(c.cells, (-v[0], -v[1]), axis=(0, 1)))


def apply_torus_array(rule, cells: np.ndarray) -> np.ndarray:
    """One step on a batch of tori, ``cells`` shaped ``(..., p, q)``."""
    cells = np.asarray(cells, dtype=np.int64)
    table = getattr(rule, "table", None)
    if table is not None:
        idx = np.zeros_like(cells)
        for dx, dy in rule.offsets:
            idx = idx * rule.n_symbols + np.roll(cells, (-dx, -dy), axis=(-2, -1))
        return table[idx]
    # procedural rule: gather neighbourhoods cell by cell
    stack = np.stack([np.roll(cells, (-dx, -dy), axis=(-2, -1)) for dx, dy in rule.offsets], axis=-1)
    flat = stack.reshape(-1, len(rule.offsets))
    out = np.fromiter((rule.local(tuple(row)) for row in flat.tolist()), dtype=np.int64, count=flat.shape[0])
    return out.reshape(cells.shape)


def apply_2d(rule, c: TorusConfig2D) -> TorusConfig2D:
    if rule.n_symbols != c.n_symbols:
        raise ValueError(f"alphabet mismatch: rule over {rule.n_symbols}, config over {c.n_symbols}")
    return TorusConfig2D(c.n_symbols, apply_torus_array(rule, c.cells))


def _step_region(rule, arr: np.ndarray) -> np.ndarray:
    """Apply the rule where the whole neighbourhood lies inside ``arr``."""
    ex, ey = rule.extent
    w, h = arr.shape[0] - 2 * ex, arr.shape[1] - 2 * ey
    if w <= 0 or h <= 0:
        raise ValueError("region too small for the neighbourhood")
    table = getattr(rule, "table", None)
    if table is not None:
        idx = np.zeros((w, h), dtype=np.int64)
        for dx, dy in rule.offsets:
            idx = idx * rule.n_symbols + arr[ex + dx:ex + dx + w, ey + dy:ey + dy + h]
        return table[idx]
    out = np.empty((w, h), dtype=np.int64)
    views = [arr[ex + dx:ex + dx + w, ey + dy:ey + dy + h] for dx, dy in rule.offsets]
    stack = np.stack(views, axis=-1)
    for i in range(w):
        for j in range(h):
            out[i, j] = rule.local(tuple(stack[i, j].tolist()))
    return out


def evaluate_region(
    rule,
    value: Callable[[int, int], int],
    window: tuple[int, int, int, int],
    steps: int,
    max_cells: int | None = None,
) -> list[np.ndarray]:
    """Exact space-time trace of ``window = (x0, y0, w, h)`` for ``steps`` steps.

    ``value`` gives the initial configuration at any plane cell.  Only the
    dependency cone of the window is ever read, so the result is exact for
    every configuration that agrees with ``value`` on that cone.
    """
    x0, y0, w, h = window
    if w <= 0 or h <= 0 or steps < 0:
        raise ValueError("bad window or step count")
    ex, ey = rule.extent
    W, H = w + 2 * steps * ex, h + 2 * steps * ey
    limits.check("dependency cone", W * H, max_cells)
    arr = np.empty((W, H), dtype=np.int64)
    bx, by = x0 - steps * ex, y0 - steps * ey
    for i in range(W):
        for j in range(H):
            arr[i, j] = value(bx + i, by + j)
    traces = []
    for n in range(steps + 1):
        m = steps - n
        traces.append(arr[m * ex:m * ex + w, m * ey:m * ey + h].copy())
        if n < steps:
            arr = _step_region(rule, arr)
    return traces


@dataclass(frozen=True, eq=False)
class AsymptoticPair2D:
    """Two plane configurations: a periodic background with two finite overlays.

    Overlay coordinates are plane coordinates (not reduced modulo the torus),
    so the overlays occur once, not periodically.  ``halfplane = (u, q)``
    records that every difference cell ``x`` has ``u . x < q``; the two
    configurations therefore agree wherever ``u . x >= q``.
    """

    background: TorusConfig2D
    diff_a: Mapping[Cell, int]
    diff_b: Mapping[Cell, int]
    halfplane: tuple[Cell, int] | None = None
    difference: frozenset = field(init=False)

    def __post_init__(self):
        a = {tuple(k): int(v) for k, v in self.diff_a.items()}
        b = {tuple(k): int(v) for k, v in self.diff_b.items()}
        if set(a) != set(b):
            raise ValueError("overlays must share their domain")
        k = self.background.n_symbols
        if any(not 0 <= s < k for s in itertools.chain(a.values(), b.values())):
            raise ValueError("overlay symbol out of range")
        diff = frozenset(x for x in a if a[x] != b[x])
        if not diff:
            raise ValueError("degenerate pair: the overlays coincide")
        if self.halfplane is not None:
            (ux, uy), q = self.halfplane
            bad = [x for x in diff if ux * x[0] + uy * x[1] >= q]
            if bad:
                raise ValueError(f"difference cell {bad[0]} violates the half-plane bound")
        object.__setattr__(self, "diff_a", a)
        object.__setattr__(self, "diff_b", b)
        object.__setattr__(self, "difference", diff)

    def value_a(self, x: int, y: int) -> int:
        v = self.diff_a.get((x, y))
        return self.background[(x, y)] if v is None else v

    def value_b(self, x: int, y: int) -> int:
        v = self.diff_b.get((x, y))
        return self.background[(x, y)] if v is None else v


def evolve_pair(
    rule,
    pair: AsymptoticPair2D,
    steps: int,
    window: tuple[int, int, int, int],
    max_cells: int | None = None,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Space-time traces of both configurations of ``pair`` over ``window``.

    Values are computed on the exact dependency cone of the window, which is
    the same as evolving on a torus enlarged until no periodic copy of the
    overlays reaches the cone.  Raises ``CapExceeded`` if the cone is larger
    than ``max_cells``.
    """
    if rule.n_symbols != pair.background.n_symbols:
        raise ValueError("alphabet mismatch")
    ta = evaluate_region(rule, pair.value_a, window, steps, max_cells)
    tb = evaluate_region(rule, pair.value_b, window, steps, max_cells)
    return ta, tb


def temporal_period(rule, c: TorusConfig2D, bound: int) -> tuple[int, int] | None:
    """First ``(n, p)`` with ``F^{n+p}(c) = F^n(c)``, by Brent's cycle search.

    Returns ``None`` when no cycle closes within ``bound`` applications.
    """
    def step(a):
        return apply_torus_array(rule, a)

    x0 = np.asarray(c.cells)
    power = lam = 1
    tortoise, hare = x0, step(x0)
    used = 1
    while not np.array_equal(tortoise, hare):
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        hare = step(hare)
        lam += 1
        used += 1
        if used > bound:
            return None
    tortoise = hare = x0
    for _ in range(lam):
        hare = step(hare)
    mu = 0
    while not np.array_equal(tortoise, hare):
        tortoise, hare = step(tortoise), step(hare)
        mu += 1
    return mu, lam


# ---------------------------------------------------------------------------
# builtin rules
# ---------------------------------------------------------------------------


def identity_2d(n_symbols: int = 2, radius: int = 1) -> RuleTable2D:
    return RuleTable2D.from_function(n_symbols, radius, lambda m: m[(0, 0)])


def xor_corners(radius: int = 1) -> RuleTable2D:
    """Binary rule c(x + r(1,1)) xor c(x - r(1,1))."""
    return RuleTable2D.from_function(2, radius, lambda m: m[(radius, radius)] ^ m[(-radius, -radius)])


def and_min(n_symbols: int = 2, radius: int = 1) -> RuleTable2D:
    """Minimum over the Moore neighbourhood (logical AND when binary)."""
    return RuleTable2D.from_function(n_symbols, radius, lambda m: min(m.values()))


def shift_2d(dx: int, dy: int, n_symbols: int = 2) -> RuleTable2D:
    """The shift sigma^(dx,dy) as a Moore rule."""
    radius = max(abs(dx), abs(dy), 1)
    return RuleTable2D.from_function(n_symbols, radius, lambda m: m[(dx, dy)])


def constant_2d(symbol: int = 0, n_symbols: int = 2, radius: int = 1) -> RuleTable2D:
    return RuleTable2D.from_function(n_symbols, radius, lambda m: symbol)


def identity_1d(n_symbols: int = 2, radius: int = 1) -> RuleTable1D:
    return RuleTable1D.from_function(n_symbols, radius, lambda w: w[radius])


def xor_1d() -> RuleTable1D:
    """f(x_-1, x_0, x_1) = x_-1 xor x_1 (elementary rule 90)."""
    return RuleTable1D.from_function(2, 1, lambda w: w[0] ^ w[2])


def random_rule_2d(rng: np.random.Generator, n_symbols: int = 2, radius: int = 1) -> RuleTable2D:
    offsets = moore_offsets(radius)
    limits.check("2D rule table", n_symbols ** len(offsets))
    return RuleTable2D(n_symbols, radius, offsets, rng.integers(0, n_symbols, n_symbols ** len(offsets)))


def random_torus(rng: np.random.Generator, n_symbols: int, p: int, q: int) -> TorusConfig2D:
    return TorusConfig2D(n_symbols, rng.integers(0, n_symbols, (p, q)))


def dot(u: Cell, x: Cell) -> int:
    return u[0] * x[0] + u[1] * x[1]


def cells_of(rect: tuple[int, int, int, int]) -> Iterable[Cell]:
    x0, y0, w, h = rect
    for x in range(x0, x0 + w):
        for y in range(y0, y0 + h):
            yield (x, y)


def apply_1d_batch(rule: RuleTable1D, rows: np.ndarray) -> np.ndarray:
    """One step on a batch of periodic configurations shaped ``(..., period)``."""
    rows = np.asarray(rows, dtype=np.int64)
    idx = np.zeros_like(rows)
    for j in range(-rule.radius, rule.radius + 1):
        idx = idx * rule.n_symbols + np.roll(rows, -j, axis=-1)
    return rule.table[idx]
