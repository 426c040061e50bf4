"""2D analyses assembled from slicing and the 1D procedures.

Every negative answer comes with a witness that is re-checked by direct
evaluation of the 2D rule on the cells it depends on.  Positive answers are
either certificates (bipermutivity) or evidence gathered on sliced 1D CA.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import lcm
from typing import Sequence

import numpy as np

from . import dyn1d, limits
from .core import AsymptoticPair2D, Cell, RuleTable1D, RuleTable2D, TorusConfig2D, all_words, dot, evaluate_region, evolve_pair
from .dyn1d import EventuallyPeriodic
from .slicing import LineFamily, SlicedCA, build_family, build_sliced_rule

CORNERS: tuple[Cell, ...] = ((1, 1), (-1, 1), (-1, -1), (1, -1))


def _check_gamma(gamma: Cell) -> Cell:
    gamma = (int(gamma[0]), int(gamma[1]))
    if gamma not in CORNERS:
        raise ValueError(f"gamma must be one of {CORNERS}, got {gamma}")
    return gamma


# ---------------------------------------------------------------------------
# permutivity and quasi-expansivity
# ---------------------------------------------------------------------------


def is_gamma_permutive(rule: RuleTable2D, gamma: Cell) -> bool:
    """Does the corner ``r*gamma`` act as a permutation for every context?"""
    gamma = _check_gamma(gamma)
    r = rule.radius
    corner = (r * gamma[0], r * gamma[1])
    if corner not in rule.offsets:
        return False
    k = rule.n_symbols
    limits.check("permutivity contexts", rule.table.size)
    pos = rule.offsets.index(corner)
    shaped = rule.table.reshape((k,) * len(rule.offsets))
    rows = np.moveaxis(shaped, pos, -1).reshape(-1, k)
    return bool(np.all(np.sort(rows, axis=1) == np.arange(k)[None, :]))


@dataclass(frozen=True)
class QuasiExpansivityCertificate:
    gamma: Cell
    nus_covered: str
    sliced_nu: Cell
    sliced_v: Cell
    sliced_bipermutive: bool


def quasi_expansivity_certificate(rule: RuleTable2D) -> QuasiExpansivityCertificate | None:
    """Certificate from gamma- and opposite-gamma permutivity.

    The consistency check slices along ``nu = gamma`` with ``v = 2d`` and asks
    the 1D procedures for bipermutivity of the sliced rule.
    """
    for gamma in ((1, 1), (-1, 1)):
        opposite = (-gamma[0], -gamma[1])
        if not (is_gamma_permutive(rule, gamma) and is_gamma_permutive(rule, opposite)):
            continue
        fam = build_family(gamma)
        v = (2 * fam.d[0], 2 * fam.d[1])
        sliced = build_sliced_rule(rule, gamma, v)
        ok = dyn1d.expansivity_certificate(sliced.rule) is not None
        if not ok:
            raise AssertionError(f"sliced rule at nu={gamma}, v={v} is not bipermutive")
        covered = f"every nu in the quadrant of {gamma} or of {opposite}"
        return QuasiExpansivityCertificate(gamma, covered, gamma, v, ok)
    return None


# ---------------------------------------------------------------------------
# plane witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LineWitness:
    """Two ``v``-periodic plane configurations lifted from 1D slice sequences.

    Line ``i`` of the family carries the slice word ``a[i]`` (resp. ``b[i]``).
    """

    sliced: SlicedCA
    a: EventuallyPeriodic
    b: EventuallyPeriodic

    def _value(self, seq: EventuallyPeriodic, x: int, y: int) -> int:
        i, t = self.sliced.family.decompose((x, y))
        return self.sliced.digit(seq[i], t)

    def value_a(self, x: int, y: int) -> int:
        return self._value(self.a, x, y)

    def value_b(self, x: int, y: int) -> int:
        return self._value(self.b, x, y)

    def difference_lines(self) -> tuple[int | None, int | None]:
        """Bounds ``(lo, hi)`` of the lines where the pair may differ; ``None`` is unbounded."""
        lo = min(self.a.start, self.b.start) if self.a.left_asymptotic(self.b) else None
        hi = max(self.a.end, self.b.end) if self.a.right_asymptotic(self.b) else None
        return lo, hi

    def agrees_beyond(self, u: Cell) -> bool:
        """Do the configurations agree on some half-plane ``{u . x <= m}``?"""
        fam = self.sliced.family
        # u must be a multiple of the line normal for a half-plane to contain whole lines
        if dot(u, fam.d) != 0:
            return False
        lo, hi = self.difference_lines()
        positive = dot(u, fam.normal) > 0
        return lo is not None if positive else hi is not None


@dataclass(frozen=True)
class PlaneWitness:
    """A refuting pair together with the checks it passed."""

    kind: str  # "line" or "finite"
    pair: object  # LineWitness or AsymptoticPair2D
    verified: bool


def _line_check_cells(w: LineWitness, margin: int) -> list[Cell]:
    a, b = w.a, w.b
    lo = min(a.start, b.start) - margin - lcm(len(a.left), len(b.left))
    hi = max(a.end, b.end) + margin + lcm(len(a.right), len(b.right))
    fam, k = w.sliced.family, w.sliced.k
    return [fam.compose(i, t) for i in range(lo, hi) for t in range(k)]


def _bounding(cells: Sequence[Cell]) -> tuple[int, int, int, int]:
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    return min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1


def verify_line_witness(rule, w: LineWitness) -> bool:
    """Distinct configurations with equal images, checked in the plane.

    Both configurations are ``v``-periodic and eventually periodic across
    lines, so their images are determined by the lines in a finite band; the
    band is evaluated cell by cell with the 2D rule.
    """
    if w.a.same_as(w.b):
        return False
    cells = _line_check_cells(w, w.sliced.rstar + 1)
    x0, y0, W, H = _bounding(cells)
    ta = evaluate_region(rule, w.value_a, (x0, y0, W, H), 1)
    tb = evaluate_region(rule, w.value_b, (x0, y0, W, H), 1)
    differ = any(ta[0][x - x0, y - y0] != tb[0][x - x0, y - y0] for x, y in cells)
    equal = all(ta[1][x - x0, y - y0] == tb[1][x - x0, y - y0] for x, y in cells)
    return differ and equal


def verify_finite_witness(rule, pair: AsymptoticPair2D) -> bool:
    """Equal images for a finitely supported difference over a periodic background."""
    ex, ey = rule.extent
    x0, y0, W, H = _bounding(sorted(pair.difference))
    window = (x0 - ex, y0 - ey, W + 2 * ex, H + 2 * ey)
    ta, tb = evolve_pair(rule, pair, 1, window)
    return bool(np.array_equal(ta[1], tb[1]))


def _lift(sliced: SlicedCA, pair) -> LineWitness:
    return LineWitness(sliced, pair[0], pair[1])


# ---------------------------------------------------------------------------
# nu-closingness
# ---------------------------------------------------------------------------

SUPPORTING, REFUTED, INCONCLUSIVE = "supporting", "refuted", "inconclusive"


@dataclass(frozen=True)
class SlicedClosing:
    v: Cell
    k: int
    right: str
    left: str


@dataclass(frozen=True)
class NuClosingReport:
    """Per-``v`` sliced verdicts.

    ``refuted`` is conclusive and carries a verified plane witness;
    ``supporting`` only says that every tested sliced CA is closing, which is
    necessary for nu-closingness but not known to be sufficient.
    """

    nu: Cell
    entries: tuple[SlicedClosing, ...]
    status: str
    witness: PlaneWitness | None = None
    note: str = ""


def _asymptotic_side(family: LineFamily, nu: Cell) -> str:
    """1D side whose counterexamples lift to nu-bar-asymptotic pairs."""
    # nu-bar-asymptotic = agreement on {nu . x <= m}; lines grow along family.normal
    return dyn1d.RIGHT if dot(nu, family.normal) > 0 else dyn1d.LEFT


def nu_closing_evidence(rule: RuleTable2D, nu: Cell, v_list: Sequence[Cell]) -> NuClosingReport:
    entries = []
    witness = None
    unknown = False
    for v in v_list:
        sliced = build_sliced_rule(rule, nu, v)
        right = dyn1d.check_closing(sliced.rule, dyn1d.RIGHT)
        left = dyn1d.check_closing(sliced.rule, dyn1d.LEFT)
        entries.append(SlicedClosing(sliced.v, sliced.k, right.answer, left.answer))
        unknown |= dyn1d.UNKNOWN in (right.answer, left.answer)
        side = _asymptotic_side(sliced.family, nu)
        verdict = right if side == dyn1d.RIGHT else left
        if witness is None and verdict.answer == dyn1d.NOT_CLOSING:
            lw = _lift(sliced, verdict.witness)
            ok = verify_line_witness(rule, lw) and lw.agrees_beyond(nu)
            if not ok:
                raise AssertionError(f"lifted witness for v={v} failed plane verification")
            witness = PlaneWitness("line", lw, ok)
    if witness is not None:
        status, note = REFUTED, "distinct nu-bar-asymptotic configurations share their image"
    elif unknown:
        status, note = INCONCLUSIVE, "some sliced closing check hit the size cap"
    else:
        status, note = SUPPORTING, "every tested sliced CA is closing on the relevant side"
    return NuClosingReport((int(nu[0]), int(nu[1])), tuple(entries), status, witness, note)


# ---------------------------------------------------------------------------
# nu-mu-closingness
# ---------------------------------------------------------------------------


def _parallel(nu: Cell, mu: Cell) -> bool:
    return nu[0] * mu[1] - nu[1] * mu[0] == 0


def _finite_support_search(rule: RuleTable2D, boxes: Sequence[tuple[int, int]]) -> AsymptoticPair2D | None:
    """Two overlays on a small box over a constant background with equal images."""
    k = rule.n_symbols
    ex, ey = rule.extent
    for symbol in range(k):
        for bw, bh in boxes:
            limits.check("finite support overlays", k ** (bw * bh) * (bw + 4 * ex) * (bh + 4 * ey))
            W, H = bw + 4 * ex, bh + 4 * ey
            arr = np.full((k ** (bw * bh), W, H), symbol, dtype=np.int64)
            arr[:, 2 * ex:2 * ex + bw, 2 * ey:2 * ey + bh] = all_words(k, bw * bh).reshape(-1, bw, bh)
            img = _step_batch(rule, arr).reshape(arr.shape[0], -1)
            _, first, inverse = np.unique(img, axis=0, return_index=True, return_inverse=True)
            inverse = inverse.reshape(-1)
            for j in range(arr.shape[0]):
                i = int(first[inverse[j]])
                if i != j:
                    cells = [(x, y) for x in range(bw) for y in range(bh)]
                    a = {c: int(arr[i, 2 * ex + c[0], 2 * ey + c[1]]) for c in cells}
                    b = {c: int(arr[j, 2 * ex + c[0], 2 * ey + c[1]]) for c in cells}
                    return AsymptoticPair2D(TorusConfig2D.constant(k, symbol), a, b)
    return None


def nu_mu_closing_refuter(
    rule: RuleTable2D,
    nu: Cell,
    mu: Cell,
    boxes: Sequence[tuple[int, int]] = ((1, 1), (1, 2), (2, 1), (2, 2), (3, 3)),
    slice_multiples: Sequence[int] = (1, 2),
) -> PlaneWitness | None:
    """Bounded search for distinct nu-bar-mu-bar-asymptotic pairs with equal images.

    Finitely supported differences are asymptotic in every direction.  When
    ``nu`` and ``mu`` are parallel the difference may also fill a band of
    lines orthogonal to them; those pairs come from finite-difference
    counterexamples of the sliced CA.
    """
    found = _finite_support_search(rule, boxes)
    if found is not None:
        ok = verify_finite_witness(rule, found)
        if not ok:
            raise AssertionError("finite witness failed verification")
        return PlaneWitness("finite", found, ok)
    if not _parallel(nu, mu):
        return None
    fam = build_family(nu)
    for m in slice_multiples:
        v = (m * fam.d[0], m * fam.d[1])
        try:
            sliced = build_sliced_rule(rule, nu, v)
        except limits.CapExceeded:
            continue
        verdict = dyn1d.check_closing(sliced.rule, dyn1d.RIGHT)
        if verdict.answer == dyn1d.NOT_CLOSING and verdict.finite_difference:
            lw = _lift(sliced, verdict.witness)
            ok = verify_line_witness(rule, lw) and lw.agrees_beyond(nu) and lw.agrees_beyond(mu)
            if not ok:
                raise AssertionError("band witness failed verification")
            return PlaneWitness("line", lw, ok)
    return None


# ---------------------------------------------------------------------------
# quasi-sensitivity
# ---------------------------------------------------------------------------

SENSITIVE, NOT_SENSITIVE = "sensitive_evidence", "not_sensitive_evidence"


@dataclass(frozen=True)
class QuasiSensitivityReport:
    nu: Cell
    v: Cell
    rstar: int
    status: str
    blocking: dyn1d.BlockingReport | None
    words_checked: int
    undecided: int


def quasi_sensitivity_check(
    rule: RuleTable2D, nu: Cell, v: Cell, max_len: int | None = None, horizon: int = 4
) -> QuasiSensitivityReport:
    """Blocking-word search on the sliced CA with ``s = r*``."""
    sliced = build_sliced_rule(rule, nu, v)
    s = sliced.rstar
    if s == 0:
        # every line evolves on its own: any word is trivially blocking
        rep = dyn1d.BlockingReport((0,), 0, 0, dyn1d.BLOCKING, horizon)
        return QuasiSensitivityReport(nu, sliced.v, s, NOT_SENSITIVE, rep, 1, 0)
    max_len = s + 2 if max_len is None else max_len
    hit = dyn1d.find_blocking_word(sliced.rule, s, max_len, horizon)
    if hit is not None:
        return QuasiSensitivityReport(nu, sliced.v, s, NOT_SENSITIVE, hit, 0, 0)
    reports = dyn1d.blocking_search(sliced.rule, s, max_len, horizon)
    undecided = sum(r.status != dyn1d.NOT_BLOCKING for r in reports)
    status = SENSITIVE if undecided == 0 else dyn1d.UNKNOWN
    return QuasiSensitivityReport(nu, sliced.v, s, status, None, len(reports), undecided)


# ---------------------------------------------------------------------------
# rectangle counting
# ---------------------------------------------------------------------------


def _step_batch(rule, arr: np.ndarray) -> np.ndarray:
    """One step on a batch of finite regions shaped ``(N, W, H)``; the result shrinks by the extent."""
    ex, ey = rule.extent
    n, W, H = arr.shape
    w, h = W - 2 * ex, H - 2 * ey
    table = getattr(rule, "table", None)
    if table is None:
        raise TypeError("batch stepping needs a materialised rule table")
    idx = np.zeros((n, w, h), dtype=np.int64)
    for dx, dy in rule.offsets:
        idx = idx * rule.n_symbols + arr[:, ex + dx:ex + dx + w, ey + dy:ey + dy + h]
    return table[idx]



@dataclass(frozen=True)
class EntropyEntry:
    w: int
    t: int
    count: int
    exact: bool

    @property
    def ratio(self) -> float:
        return math.log2(self.count) / self.t


def _box_keys(layers: list[np.ndarray], n_symbols: int) -> np.ndarray:
    """Distinct boxes of a chunk; ``layers`` are ``(cells, N)`` arrays."""
    rows = np.concatenate(layers, axis=0)
    if rows.shape[0] * math.log2(max(n_symbols, 2)) < 63:
        keys = np.zeros(rows.shape[1], dtype=np.int64)
        for row in rows:
            keys = keys * n_symbols + row
        return np.unique(keys)
    rows = np.ascontiguousarray(rows.T)
    return np.unique(rows.view(np.dtype((np.void, rows.dtype.itemsize * rows.shape[1]))).reshape(-1))


def _count_boxes(initial_chunks, evolve, crop, t, n_symbols) -> int:
    seen = None
    for chunk in initial_chunks:
        layers = []
        cur = chunk
        for n in range(t):
            box = crop(cur, n)
            layers.append(box.reshape(-1, box.shape[-1]))
            if n < t - 1:
                cur = evolve(cur)
        keys = _box_keys(layers, n_symbols)
        seen = keys if seen is None else np.union1d(seen, keys)
    return 0 if seen is None else int(seen.shape[0])


def _chunks(n_symbols: int, n_cells: int, chunk: int):
    """All blocks in lexicographic order, batch index last: ``(n_cells, N)``."""
    total = n_symbols ** n_cells
    pow2 = n_symbols & (n_symbols - 1) == 0
    bits = n_symbols.bit_length() - 1
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        out = np.empty((n_cells, idx.size), dtype=np.int64)
        for j in range(n_cells - 1, -1, -1):
            if pow2:
                out[j] = idx & (n_symbols - 1)
                idx >>= bits
            else:
                idx, out[j] = np.divmod(idx, n_symbols)
        yield out


def _step_last(rule, arr: np.ndarray) -> np.ndarray:
    """One step on regions stored batch-last, ``(W, H, N)`` or ``(L, N)`` for 1D."""
    k = rule.n_symbols
    if isinstance(rule, RuleTable1D):
        r = rule.radius
        L = arr.shape[0] - 2 * r
        idx = np.zeros((L, arr.shape[1]), dtype=np.int64)
        for j in range(2 * r + 1):
            idx = idx * k + arr[j:j + L]
        return rule.table[idx]
    ex, ey = rule.extent
    w, h = arr.shape[0] - 2 * ex, arr.shape[1] - 2 * ey
    idx = np.zeros((w, h, arr.shape[2]), dtype=np.int64)
    for dx, dy in rule.offsets:
        idx = idx * k + arr[ex + dx:ex + dx + w, ey + dy:ey + dy + h]
    return rule.table[idx]


DEFAULT_EXACT_BLOCKS = 1 << 25


def count_rectangles(
    rule,
    w: int,
    t: int,
    sample: int | None = None,
    seed: int = 0,
    max_blocks: int | None = None,
    chunk: int = 1 << 20,
) -> EntropyEntry:
    """Number of distinct ``w``-wide, ``t``-tall space-time boxes.

    Works for 1D (``RuleTable1D``) and 2D rules.  Initial blocks have side
    ``w + 2r(t-1)``: exactly what determines ``t`` rows of the box.  With
    ``sample=n`` only ``n`` random blocks are used and the count is a lower
    bound.
    """
    if w < 1 or t < 1:
        raise ValueError("w and t must be positive")
    k = rule.n_symbols
    if isinstance(rule, RuleTable1D):
        r = rule.radius
        shape = (w + 2 * r * (t - 1),)

        def crop(cur, n):
            m = r * (t - 1 - n)
            return cur[m:m + w]
    else:
        if getattr(rule, "table", None) is None:
            raise TypeError("rectangle counting needs a materialised rule table")
        ex, ey = rule.extent
        shape = (w + 2 * ex * (t - 1), w + 2 * ey * (t - 1))

        def crop(cur, n):
            mx, my = ex * (t - 1 - n), ey * (t - 1 - n)
            return cur[mx:mx + w, my:my + w]
    n_cells = int(np.prod(shape))
    if sample is None:
        cap = limits.env_or(DEFAULT_EXACT_BLOCKS) if max_blocks is None else max_blocks
        limits.check("exact rectangle count blocks", k ** n_cells, cap)
        chunks = (c.reshape(shape + (-1,)) for c in _chunks(k, n_cells, chunk))
    else:
        rng = np.random.default_rng(seed)
        sizes = [min(chunk, sample - s) for s in range(0, sample, chunk)]
        chunks = (rng.integers(0, k, shape + (n,)) for n in sizes)
    count = _count_boxes(chunks, lambda cur: _step_last(rule, cur), crop, t, k)
    return EntropyEntry(w, t, count, sample is None)


@dataclass(frozen=True)
class EntropyTable:
    entries: tuple[EntropyEntry, ...]
    growth_in_w: dict = field(default_factory=dict)  # t -> strictly increasing in w?

    @property
    def params(self) -> list[tuple[int, int]]:
        return [(e.w, e.t) for e in self.entries]

    @property
    def counts(self) -> list[int]:
        return [e.count for e in self.entries]

    @property
    def ratios(self) -> list[float]:
        return [e.ratio for e in self.entries]

    def to_tsv(self) -> str:
        lines = ["w\tt\tN\tratio"]
        for e in self.entries:
            lines.append(f"{e.w}\t{e.t}\t{e.count}\t{round(e.ratio, 6)!r}")
        return "\n".join(lines) + "\n"


def entropy_growth_report(
    rule, w_list: Sequence[int], t_list: Sequence[int], sample: int | None = None, seed: int = 0
) -> EntropyTable:
    """Table of ``log2 N(w,t) / t``.

    For rules with a quasi-expansivity certificate the ratio at each fixed
    ``t`` is checked to grow strictly with ``w``.
    """
    entries = tuple(count_rectangles(rule, w, t, sample, seed) for t in t_list for w in w_list)
    growth = {}
    if isinstance(rule, RuleTable2D) and quasi_expansivity_certificate(rule) is not None:
        for t in t_list:
            ratios = [e.ratio for e in entries if e.t == t]
            growth[t] = all(a < b for a, b in zip(ratios, ratios[1:]))
            if sample is None and not growth[t]:
                raise AssertionError(f"ratio does not grow with w at t={t}")
    return EntropyTable(entries, growth)


__all__ = [
    "CORNERS",
    "EntropyEntry",
    "EntropyTable",
    "LineWitness",
    "NuClosingReport",
    "PlaneWitness",
    "QuasiExpansivityCertificate",
    "QuasiSensitivityReport",
    "count_rectangles",
    "entropy_growth_report",
    "is_gamma_permutive",
    "nu_closing_evidence",
    "nu_mu_closing_refuter",
    "quasi_expansivity_certificate",
    "quasi_sensitivity_check",
    "verify_finite_witness",
    "verify_line_witness",
]
