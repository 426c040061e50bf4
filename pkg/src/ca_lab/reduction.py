"""The CA ``F_tau`` built from a tile set, its witness pairs and a bounded probe.

A state is a triple (K tile, tau tile, bit) packed as ``(k * |tau| + t) * 2 + bit``.
``K`` is the stretched directed hierarchy tile set; the rule never touches
the two tile layers and flips a bit by the bit of the macro-tile its own
macro-tile points to, provided the five macro-tiles around the cell carry
valid tilings and uniform bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import limits
from .core import AsymptoticPair2D, Cell, TorusConfig2D, evaluate_region, evolve_pair
from .stretch import MacroShape, StretchedTileSet, build_shape, stretch_tileset
from .wang import (
    ANCHORS,
    OPPOSITE,
    STEP,
    PathAttachment,
    TileSet,
    Tiling,
    attach_space_filling_path,
    generate_hierarchy,
    tiles_torus,
    wangify_many,
)

MU, NUMU = "MuAsymptotic", "NuMuAsymptotic"
KIND_ALIASES = {"mu": MU, "numu": NUMU, MU: MU, NUMU: NUMU}
MACRO_STEPS = {"N": (1, 0), "S": (-1, 0), "E": (0, 1), "W": (0, -1)}  # (a, b): a along nu', b along mu'


@dataclass(frozen=True, eq=False)
class GuardedRule:
    """Procedural 2D rule over the product state set, memoised per neighbourhood."""

    n_symbols: int
    offsets: tuple[Cell, ...]
    red: "ReductionCA"
    table: None = None
    _memo: dict = field(default_factory=dict, repr=False)

    @property
    def extent(self) -> tuple[int, int]:
        return (max(abs(a) for a, _ in self.offsets), max(abs(b) for _, b in self.offsets))

    def local(self, values: Sequence[int]) -> int:
        key = tuple(values)
        out = self._memo.get(key)
        if out is None:
            out = self.red._local(key)
            self._memo[key] = out
        return out


@dataclass(frozen=True, eq=False)
class _Window:
    """Per shape position: where the five macro-tiles sit among the offsets."""

    macro_idx: dict  # (a, b) -> list of offset indices
    edges: tuple[tuple[int, str, int], ...]  # adjacent offset indices inside the union


@dataclass(frozen=True, eq=False)
class ReductionCA:
    tau: TileSet
    K: StretchedTileSet
    attachments: dict  # anchor -> PathAttachment
    k_tilings: dict  # anchor -> Tiling of base K tile ids over the hierarchy pattern
    m: int
    rule: GuardedRule = field(init=False)
    windows: tuple = field(init=False, repr=False)

    @property
    def shape(self) -> MacroShape:
        return self.K.shape

    @property
    def n_states(self) -> int:
        return len(self.K.tiles) * len(self.tau) * 2

    @property
    def extent(self) -> tuple[int, int]:
        return self.rule.extent

    def encode(self, k: int, t: int, bit: int) -> int:
        return (k * len(self.tau) + t) * 2 + bit

    def layers(self, states: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """K-tile index, tau-tile index and bit of every state in ``states``."""
        states = np.asarray(states, dtype=np.int64)
        k, t = np.divmod(states >> 1, len(self.tau))
        return k, t, states & 1

    def decode(self, state: int) -> tuple[int, int, int]:
        rest, bit = divmod(int(state), 2)
        k, t = divmod(rest, len(self.tau))
        return k, t, bit

    def __post_init__(self):
        shape = self.shape
        nu, mu = shape.nu_s, shape.mu_s
        lattice = {ab: (ab[0] * nu[0] + ab[1] * mu[0], ab[0] * nu[1] + ab[1] * mu[1]) for ab in
                   [(0, 0)] + list(MACRO_STEPS.values())}
        offsets = set()
        for c in shape.cells:
            for L in lattice.values():
                for u in shape.cells:
                    offsets.add((u[0] + L[0] - c[0], u[1] + L[1] - c[1]))
        offsets = tuple(sorted(offsets))
        pos = {o: i for i, o in enumerate(offsets)}
        windows = []
        for c in shape.cells:
            macro_idx = {}
            union = {}
            for ab, L in lattice.items():
                idxs = []
                for u in shape.cells:
                    o = (u[0] + L[0] - c[0], u[1] + L[1] - c[1])
                    idxs.append(pos[o])
                    union[o] = pos[o]
                macro_idx[ab] = idxs
            edges = []
            for o, i in union.items():
                for d in ("E", "N"):
                    z = (o[0] + STEP[d][0], o[1] + STEP[d][1])
                    if z in union:
                        edges.append((i, d, union[z]))
            windows.append(_Window(macro_idx, tuple(edges)))
        object.__setattr__(self, "windows", tuple(windows))
        limits.check("reduction states", self.n_states, 1 << 40)
        object.__setattr__(self, "rule", GuardedRule(self.n_states, offsets, self))
        # colour lookups
        kt = self.K.tiles
        tt = self.tau.tiles
        object.__setattr__(self, "_kcol", {d: [t.color(d) for t in kt] for d in STEP})
        object.__setattr__(self, "_tcol", {d: [t.color(d) for t in tt] for d in STEP})
        object.__setattr__(self, "_kdir", [t.direction for t in kt])
        object.__setattr__(self, "_self_idx", offsets.index((0, 0)))

    def guard(self, values: Sequence[int]) -> tuple[bool, str]:
        """Validity and uniformity of the five macro-tiles around the centre cell."""
        k0, _, _ = self.decode(values[self._self_idx])
        win = self.windows[k0 % len(self.shape)]
        nt = len(self.tau)
        for idxs in win.macro_idx.values():
            bits = {values[i] & 1 for i in idxs}
            if len(bits) != 1:
                return False, "mixed bits"
        kcol, tcol = self._kcol, self._tcol
        for i, d, j in win.edges:
            ki, ti = divmod(values[i] >> 1, nt)
            kj, tj = divmod(values[j] >> 1, nt)
            if kcol[d][ki] != kcol[OPPOSITE[d]][kj]:
                return False, "K tiling error"
            if tcol[d][ti] != tcol[OPPOSITE[d]][tj]:
                return False, "tau tiling error"
        return True, ""

    def _local(self, values: tuple[int, ...]) -> int:
        me = values[self._self_idx]
        ok, _ = self.guard(values)
        if not ok:
            return me
        k0 = (me >> 1) // len(self.tau)
        d = self._kdir[k0]
        if d is None:
            return me
        pointed = self.windows[k0 % len(self.shape)].macro_idx[MACRO_STEPS[d]]
        return me ^ (values[pointed[0]] & 1)


def hierarchy_K(step: int, shape: MacroShape, anchors: Sequence[str] = ANCHORS):
    """Directed hierarchy tiles for the given anchors, stretched along the shape."""
    atts = {a: attach_space_filling_path(generate_hierarchy(step, a)) for a in anchors}
    w = wangify_many([(att.pattern.labels, att.directions) for att in atts.values()])
    K = stretch_tileset(w.tileset, shape)
    return K, atts, dict(zip(atts, w.tilings))


def build_reduction(
    tau: TileSet,
    nu: Cell,
    mu: Cell,
    step: int = 3,
    directed: TileSet | None = None,
    min_distance: int = 3,
) -> ReductionCA:
    """``F_tau`` for the directions ``nu`` (north) and ``mu`` (east).

    ``directed`` replaces the hierarchy tiles by another directed tile set
    (no witnesses can then be built).
    """
    shape = build_shape(nu, mu, min_distance)
    if directed is None:
        K, atts, tilings = hierarchy_K(step, shape)
    else:
        if any(t.direction is None for t in directed.tiles):
            raise ValueError("every tile of the directed set needs a direction")
        K, atts, tilings = stretch_tileset(directed, shape), {}, {}
    xs = [c[0] for c in shape.cells]
    ys = [c[1] for c in shape.cells]
    m = max(max(xs) - min(xs) + 1, max(ys) - min(ys) + 1)
    return ReductionCA(tau, K, atts, tilings, m)


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WitnessPair:
    """``pair.diff_a`` carries bits 0, ``pair.diff_b`` bits 1 on the differing macro-tiles.

    ``split_lines`` are ``(u, q)`` bounds: every differing cell ``x`` has ``u . x < q``.
    """

    pair: AsymptoticPair2D
    kind: str
    split_lines: tuple[tuple[Cell, int], ...]
    macros: dict  # (a, b) -> hierarchy cell in plane coordinates
    differing_macros: frozenset
    tau_period: tuple[int, int]


def find_tau_torus(tau: TileSet, max_side: int = 4, budget: int = 200_000) -> Tiling | None:
    for p in range(1, max_side + 1):
        for q in range(1, max_side + 1):
            t = tiles_torus(tau, p, q, budget)
            if t is not None:
                return t
    return None


def _perp_toward(nu: Cell, target: Cell) -> Cell:
    n = (-nu[1], nu[0])
    return n if n[0] * target[0] + n[1] * target[1] > 0 else (-n[0], -n[1])


def build_witness(red: ReductionCA, kind: str, tau_tiling: Tiling | None = None) -> WitnessPair:
    """The theorem's pair at finite scale, centred at the plane origin.

    ``mu``: two paths split by the vertical arm; bits differ on the east
    half.  ``numu``: four paths around the centre; bits differ on the NE
    quadrant.  Outside the hierarchy pattern the K layer is junk (tile 0).
    """
    if kind not in KIND_ALIASES:
        raise ValueError(f"kind must be {MU!r} or {NUMU!r}")
    kind = KIND_ALIASES[kind]
    if not red.attachments:
        raise ValueError("witnesses need the hierarchy tile set")
    if tau_tiling is None:
        tau_tiling = find_tau_torus(red.tau)
        if tau_tiling is None:
            raise ValueError("no valid tau tiling found: tau does not tile the tested tori")
    anchor = "south" if kind == MU else "center"
    att: PathAttachment = red.attachments[anchor]
    ids = red.k_tilings[anchor].ids
    pat = att.pattern
    side, h = pat.side, pat.side // 2
    focus = (0, h) if kind == MU else (0, 0)
    shape = red.shape
    nu, mu = shape.nu_s, shape.mu_s
    tau_index = {t.id: i for i, t in enumerate(red.tau.tiles)}
    tp, tq = tau_tiling.shape

    def tau_at(z: Cell) -> int:
        return tau_index[int(tau_tiling.ids[z[0] % tp, z[1] % tq])]

    k = len(shape)
    diff_a, diff_b = {}, {}
    macros = {}
    differing = set()
    for lx in range(side):
        for ly in range(side):
            x, y = pat.to_plane((lx, ly))
            a, b = y - focus[1], x - focus[0]
            macros[(a, b)] = (x, y)
            if kind == MU:
                flip = x >= 0
            else:
                flip = 0 <= x <= h and 1 <= y <= h
            if flip:
                differing.add((a, b))
            base = int(ids[lx, ly])
            for j, c in enumerate(shape.cells):
                z = (c[0] + a * nu[0] + b * mu[0], c[1] + a * nu[1] + b * mu[1])
                kt = base * k + j
                diff_a[z] = red.encode(kt, tau_at(z), 0)
                diff_b[z] = red.encode(kt, tau_at(z), 1 if flip else 0)
    bg = np.empty((tp, tq), dtype=np.int64)
    for x in range(tp):
        for y in range(tq):
            bg[x, y] = red.encode(0, tau_at((x, y)), 0)
    diff_cells = [z for z in diff_a if diff_a[z] != diff_b[z]]
    lines = []
    directions = [shape.mu] if kind == MU else [shape.mu, shape.nu]
    others = [shape.nu] if kind == MU else [shape.nu, shape.mu]
    for toward, along in zip(directions, others):
        # the split line runs along `along`; differences lie on the `toward` side
        n = _perp_toward(along, toward)
        u = (-n[0], -n[1])
        q = max(u[0] * z[0] + u[1] * z[1] for z in diff_cells) + 1
        lines.append((u, q))
    pair = AsymptoticPair2D(TorusConfig2D(red.n_states, bg), diff_a, diff_b, halfplane=lines[0])
    return WitnessPair(pair, kind, tuple(lines), macros, frozenset(differing), (tp, tq))


def check_equal_image(red: ReductionCA, pair: AsymptoticPair2D, window: tuple[int, int, int, int], steps: int = 1) -> bool:
    """Do the images of the two configurations agree on ``window`` after ``steps`` steps?"""
    ta, tb = evolve_pair(red.rule, pair, steps, window)
    return bool(np.array_equal(ta[steps], tb[steps]))


def windows_around(radius: int, max_side: int) -> list[tuple[int, int, int, int]]:
    """Every ``w x h`` window (``w, h <= max_side``) containing the origin and inside ``[-radius, radius]^2``."""
    out = []
    for w in range(1, max_side + 1):
        for h in range(1, max_side + 1):
            for x0 in range(-w + 1, 1):
                for y0 in range(-h + 1, 1):
                    if x0 >= -radius and y0 >= -radius and x0 + w - 1 <= radius and y0 + h - 1 <= radius:
                        out.append((x0, y0, w, h))
    return out


def check_all_windows(red: ReductionCA, pair: AsymptoticPair2D, max_side: int = 8) -> bool:
    """Equal images on every window up to ``max_side`` that contains the origin.

    All such windows lie in ``[-(max_side-1), max_side-1]^2``; the images are
    computed once on that square, so the per-window checks are exact.
    """
    r = max_side - 1
    region = (-r, -r, 2 * r + 1, 2 * r + 1)
    ta, tb = evolve_pair(red.rule, pair, 1, region)
    same = ta[1] == tb[1]
    return all(bool(same[x0 + r:x0 + r + w, y0 + r:y0 + r + h].all()) for x0, y0, w, h in windows_around(r, max_side))


# ---------------------------------------------------------------------------
# bounded probe of the converse direction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeFinding:
    tau_block: tuple[int, ...]
    region: str
    tilings_valid_at_differences: bool
    valid_3x3_at_difference: bool


@dataclass(frozen=True)
class ProbeReport:
    """Probe-scale evidence; says nothing about infinite tilings by itself."""

    pairs_tested: int
    equal_image_pairs: tuple[ProbeFinding, ...]
    window: tuple[int, int, int, int]

    @property
    def witnesses_with_valid_3x3(self) -> int:
        return sum(f.valid_3x3_at_difference for f in self.equal_image_pairs)

    @property
    def structural_consequence_holds(self) -> bool:
        return all(f.tilings_valid_at_differences for f in self.equal_image_pairs)


def _tau_valid_block(red: ReductionCA, tau_at, z: Cell, n: int = 3) -> bool:
    """Is there a valid ``n x n`` tau block containing ``z``?"""
    tiles = red.tau.tiles
    for ox in range(n):
        for oy in range(n):
            x0, y0 = z[0] - ox, z[1] - oy
            ok = True
            for x in range(x0, x0 + n):
                for y in range(y0, y0 + n):
                    t = tiles[tau_at((x, y))]
                    if x + 1 < x0 + n and t.e != tiles[tau_at((x + 1, y))].w:
                        ok = False
                    if y + 1 < y0 + n and t.n != tiles[tau_at((x, y + 1))].s:
                        ok = False
            if ok:
                return True
    return False


def bounded_closing_probe(
    red: ReductionCA,
    tau_period: tuple[int, int] = (2, 2),
    radius: int = 7,
    regions: Sequence[str] = ("macro", "quadrant", "half"),
    corrupt_k: bool = False,
) -> ProbeReport:
    """Search pairs (c, c') with equal images on ``[-radius, radius]^2``.

    The K layer is the centred hierarchy pattern; the tau layer runs over
    every ``tau_period``-periodic assignment (valid or not); c has bits 0 and
    c' has bits 1 on one region of macro-tiles from a fixed family.  For each
    equal-image pair the report records whether the tilings are valid around
    every differing cell of the window, and whether a valid 3x3 tau block
    touches the difference.  ``corrupt_k`` replaces the K layer by tile 0
    everywhere, which no valid K tiling contains around a cross.
    """
    anchor = "center"
    att = red.attachments[anchor]
    ids = red.k_tilings[anchor].ids
    pat = att.pattern
    side, h = pat.side, pat.side // 2
    shape = red.shape
    nu, mu = shape.nu_s, shape.mu_s
    k = len(shape)
    nt = len(red.tau)
    tp, tq = tau_period
    limits.check("probe tau assignments", nt ** (tp * tq), 1 << 16)
    region_of = {
        "macro": lambda x, y: (x, y) == (1, 1),
        "quadrant": lambda x, y: 0 <= x <= h and 1 <= y <= h,
        "half": lambda x, y: x >= 0,
    }
    window = (-radius, -radius, 2 * radius + 1, 2 * radius + 1)
    k_layer = {}
    flips = {name: set() for name in regions}
    for lx in range(side):
        for ly in range(side):
            x, y = pat.to_plane((lx, ly))
            base = int(ids[lx, ly])
            for j, c in enumerate(shape.cells):
                z = (c[0] + y * nu[0] + x * mu[0], c[1] + y * nu[1] + x * mu[1])
                k_layer[z] = 0 if corrupt_k else base * k + j
                for name in regions:
                    if region_of[name](x, y):
                        flips[name].add(z)
    findings = []
    tested = 0
    for block_idx in range(nt ** (tp * tq)):
        block = [(block_idx // nt ** i) % nt for i in range(tp * tq)]

        def tau_at(z, block=block):
            return block[(z[0] % tp) * tq + z[1] % tq]

        for name in regions:
            tested += 1

            def val(x, y, bit_region):
                kt = k_layer.get((x, y), 0)
                bit = 1 if bit_region is not None and (x, y) in bit_region else 0
                return red.encode(kt, tau_at((x, y)), bit)

            ta = evaluate_region(red.rule, lambda x, y: val(x, y, None), window, 1)
            tb = evaluate_region(red.rule, lambda x, y, n=name: val(x, y, flips[n]), window, 1)
            diff_in_window = [z for z in flips[name]
                              if -radius <= z[0] <= radius and -radius <= z[1] <= radius]
            if not diff_in_window or not np.array_equal(ta[1], tb[1]):
                continue
            valid_all = True
            for z in diff_in_window:
                vals = [val(z[0] + o[0], z[1] + o[1], None) for o in red.rule.offsets]
                ok, why = red.guard(vals)
                if not ok and why != "mixed bits":
                    valid_all = False
                    break
            has3 = any(_tau_valid_block(red, tau_at, z) for z in diff_in_window)
            findings.append(ProbeFinding(tuple(block), name, valid_all, has3))
    return ProbeReport(tested, tuple(findings), window)


__all__ = [
    "GuardedRule",
    "KIND_ALIASES",
    "MU",
    "NUMU",
    "ProbeFinding",
    "ProbeReport",
    "ReductionCA",
    "WitnessPair",
    "bounded_closing_probe",
    "build_reduction",
    "build_witness",
    "check_all_windows",
    "check_equal_image",
    "find_tau_torus",
    "hierarchy_K",
    "windows_around",
]
