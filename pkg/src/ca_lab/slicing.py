"""Slicing a 2D CA along a direction into a 1D CA over slice words.

The plane is cut into the parallel lines ``L_i`` orthogonal to ``nu``; on the
set of configurations invariant under the shift by ``v = k*d`` (``d`` the
primitive direction of the lines) every slice is a ``k``-periodic word, so the
2D dynamics becomes a 1D CA over the finite alphabet ``B = A^k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from . import limits
from .core import Cell, PeriodicConfig1D, RuleTable1D, TorusConfig2D, all_words, dot


@dataclass(frozen=True)
class LineFamily:
    nu: Cell
    normal: Cell  # nu / gcd, oriented so that the index grows along the chosen axis
    d: Cell
    y1: Cell
    axis: str  # "x" or "y"

    def line_index(self, x: Cell) -> int:
        return dot(self.normal, x)

    def decompose(self, x: Cell) -> tuple[int, int]:
        i = self.line_index(x)
        rx, ry = x[0] - i * self.y1[0], x[1] - i * self.y1[1]
        t, rem = divmod(rx * self.d[0] + ry * self.d[1], dot(self.d, self.d))
        assert rem == 0
        return i, t

    def compose(self, i: int, t: int) -> Cell:
        return (i * self.y1[0] + t * self.d[0], i * self.y1[1] + t * self.d[1])


def build_family(nu: Cell) -> LineFamily:
    nx, ny = int(nu[0]), int(nu[1])
    if nx == 0 and ny == 0:
        raise ValueError("slicing vector must be non-zero")
    g = gcd(abs(nx), abs(ny))
    n = (nx // g, ny // g)
    d = max((n[1], -n[0]), (-n[1], n[0]))  # lexicographically positive perpendicular
    axis = "y" if d[1] == 0 else "x"
    a = n[1] if axis == "y" else n[0]
    normal = n if a > 0 else (-n[0], -n[1])
    y1 = None
    radius = 1
    while y1 is None:
        best = [
            (x * x + y * y, (x, y))
            for x in range(-radius, radius + 1)
            for y in range(-radius, radius + 1)
            if dot(normal, (x, y)) == 1
        ]
        if best:
            y1 = min(best)[1]
        radius += 1
    return LineFamily((nx, ny), normal, d, y1, axis)


def compute_rstar(family: LineFamily, r: int) -> int:
    if r < 0:
        raise ValueError("radius must be non-negative")
    return max(abs(family.line_index((r, r))), abs(family.line_index((r, -r))))


def _offsets_rstar(family: LineFamily, offsets) -> int:
    return max(abs(family.line_index(o)) for o in offsets)


@dataclass(frozen=True)
class SlicedCA:
    base_rule: object
    family: LineFamily
    v: Cell
    k: int
    rstar: int
    rule: RuleTable1D

    @property
    def n_symbols(self) -> int:
        return self.rule.n_symbols

    def encode(self, digits) -> int:
        a = self.base_rule.n_symbols
        s = 0
        for x in digits:
            s = s * a + int(x)
        return s

    def digit(self, symbol: int, t: int) -> int:
        a = self.base_rule.n_symbols
        return (symbol // a ** (self.k - 1 - t % self.k)) % a


def slice_period(family: LineFamily, v: Cell) -> int:
    if dot(family.nu, v) != 0:
        raise ValueError(f"v={v} is not perpendicular to nu={family.nu}")
    d = family.d
    k = v[0] // d[0] if d[0] else v[1] // d[1]
    if (k * d[0], k * d[1]) != tuple(v) or k == 0:
        raise ValueError(f"v={v} is not a non-zero integer multiple of d={d}")
    return abs(k)


def build_sliced_rule(rule, nu: Cell, v: Cell, cap: int | None = None) -> SlicedCA:
    """The 1D rule over ``B = A^k`` conjugate to ``rule`` restricted to ``S_v``."""
    family = build_family(nu)
    k = slice_period(family, v)
    a = rule.n_symbols
    nb = a ** k
    rstar = _offsets_rstar(family, rule.offsets)
    width = 2 * rstar + 1
    limits.check("sliced rule table", nb ** width, cap)
    idx = np.arange(nb ** width, dtype=np.int64)
    words = [(idx // nb ** (width - 1 - j)) % nb for j in range(width)]
    out = np.zeros_like(idx)
    for t in range(k):
        nidx = np.zeros_like(idx)
        for o in rule.offsets:
            z = (t * family.d[0] + o[0], t * family.d[1] + o[1])
            j, tt = family.decompose(z)
            digit = (words[j + rstar] // a ** (k - 1 - tt % k)) % a
            nidx = nidx * a + digit
        out = out * a + rule.table[nidx]
    return SlicedCA(rule, family, (int(v[0]), int(v[1])), k, rstar, RuleTable1D(nb, rstar, out))


def _lattice_member(x: Cell, p: int, q: int, v: Cell) -> bool:
    """Is ``x`` in Z(p,0) + Z(0,q) + Z v?"""
    order = int(np.lcm(p // gcd(p, v[0] % p or p), q // gcd(q, v[1] % q or q)))
    return any((x[0] - m * v[0]) % p == 0 and (x[1] - m * v[1]) % q == 0 for m in range(order))


def is_v_periodic(c: TorusConfig2D, v: Cell) -> bool:
    return bool(np.array_equal(np.roll(c.cells, (-v[0], -v[1]), axis=(0, 1)), c.cells))


def psi(c: TorusConfig2D, sliced: SlicedCA) -> PeriodicConfig1D:
    """Slice word sequence of a ``v``-periodic torus configuration."""
    if c.n_symbols != sliced.base_rule.n_symbols:
        raise ValueError("alphabet mismatch")
    if not is_v_periodic(c, sliced.v):
        raise ValueError(f"configuration is not invariant under the shift by {sliced.v}")
    fam = sliced.family
    p, q = c.widths
    step = gcd(abs(fam.normal[0] * p), abs(fam.normal[1] * q))
    period = step
    while not _lattice_member((period * fam.y1[0], period * fam.y1[1]), p, q, sliced.v):
        period += step
    cells = [
        sliced.encode(c[fam.compose(i, t)] for t in range(sliced.k))
        for i in range(period)
    ]
    return PeriodicConfig1D(sliced.n_symbols, cells)


def _member_slice_lattice(x: Cell, fam: LineFamily, period: int, k: int) -> bool:
    i, t = fam.decompose(x)
    return i % period == 0 and t % k == 0


def psi_inverse(a: PeriodicConfig1D, sliced: SlicedCA, widths: tuple[int, int] | None = None) -> TorusConfig2D:
    """The unique ``v``-periodic plane configuration with slice sequence ``a``.

    The torus is the smallest axis-aligned one carrying the configuration
    unless ``widths`` asks for a compatible larger one.
    """
    if a.n_symbols != sliced.n_symbols:
        raise ValueError(f"alphabet mismatch: expected |B|={sliced.n_symbols}, got {a.n_symbols}")
    fam, k, P = sliced.family, sliced.k, a.period
    if widths is None:
        bound = P * k
        p = next(n for n in range(1, bound + 1) if _member_slice_lattice((n, 0), fam, P, k))
        q = next(n for n in range(1, bound + 1) if _member_slice_lattice((0, n), fam, P, k))
    else:
        p, q = widths
        if not (_member_slice_lattice((p, 0), fam, P, k) and _member_slice_lattice((0, q), fam, P, k)):
            raise ValueError(f"torus {p}x{q} cannot carry this configuration")
    cells = np.empty((p, q), dtype=np.int64)
    for x in range(p):
        for y in range(q):
            i, t = fam.decompose((x, y))
            cells[x, y] = sliced.digit(a[i], t)
    return TorusConfig2D(sliced.base_rule.n_symbols, cells)


def sv_torus_configs(n_symbols: int, p: int, q: int, v: Cell) -> np.ndarray:
    """All ``v``-periodic configurations of a ``p x q`` torus, as a batch array."""
    rep = {}
    orbit_of = np.empty((p, q), dtype=np.int64)
    for x in range(p):
        for y in range(q):
            if (x, y) in rep:
                continue
            n = len(set(rep.values()))
            cx, cy = x, y
            while (cx, cy) not in rep:
                rep[(cx, cy)] = n
                cx, cy = (cx + v[0]) % p, (cy + v[1]) % q
    for (x, y), n in rep.items():
        orbit_of[x, y] = n
    n_orbits = int(orbit_of.max()) + 1
    limits.check("S_v torus enumeration", n_symbols ** n_orbits * p * q)
    free = all_words(n_symbols, n_orbits)
    return free[:, orbit_of]


def psi_batch(cells: np.ndarray, sliced: SlicedCA) -> np.ndarray:
    """``psi`` over a batch of ``v``-periodic tori shaped ``(N, p, q)``; no checks."""
    cells = np.asarray(cells, dtype=np.int64)
    p, q = cells.shape[-2:]
    probe = TorusConfig2D(sliced.base_rule.n_symbols, np.zeros((p, q), dtype=np.int64))
    period = psi(probe, sliced).period
    fam, a = sliced.family, sliced.base_rule.n_symbols
    out = np.zeros(cells.shape[:-2] + (period,), dtype=np.int64)
    for t in range(sliced.k):
        xs, ys = zip(*(fam.compose(i, t) for i in range(period)))
        out = out * a + cells[..., np.mod(xs, p), np.mod(ys, q)]
    return out
