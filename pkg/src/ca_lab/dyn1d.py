"""Decision procedures and searches for 1D CA.

Closingness is decided on the pair graph of the rule; witnesses are pairs of
eventually periodic configurations so that every negative verdict can be
re-checked exactly.  Blocking words are confirmed by a sound subset iteration
and refuted by exhaustive bounded simulation.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import lcm
from typing import Sequence

import numpy as np

from . import limits
from .core import PeriodicConfig1D, RuleTable1D, all_words, apply_1d, index_word

RIGHT, LEFT = "right", "left"
CLOSING, NOT_CLOSING, UNKNOWN = "closing", "not_closing", "unknown"


# ---------------------------------------------------------------------------
# eventually periodic configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EventuallyPeriodic:
    """``... left left | middle | right right ...`` with ``middle[0]`` at ``start``."""

    left: tuple[int, ...]
    middle: tuple[int, ...]
    right: tuple[int, ...]
    start: int = 0

    def __post_init__(self):
        if not self.left or not self.right:
            raise ValueError("tails must be non-empty")

    @property
    def end(self) -> int:
        return self.start + len(self.middle)

    def __getitem__(self, i: int) -> int:
        if i < self.start:
            return self.left[(i - self.start) % len(self.left)]
        if i >= self.end:
            return self.right[(i - self.end) % len(self.right)]
        return self.middle[i - self.start]

    def segment(self, lo: int, hi: int) -> tuple[int, ...]:
        return tuple(self[i] for i in range(lo, hi))

    def image(self, rule: RuleTable1D) -> "EventuallyPeriodic":
        r = rule.radius
        pl, pr = len(self.left), len(self.right)

        def img(lo, hi):
            src = self.segment(lo - r, hi + r)
            return tuple(int(a) for a in rule.apply_words(np.array(src)))

        s2, e2 = self.start - r, self.end + r
        return EventuallyPeriodic(img(s2 - pl, s2), img(s2, e2), img(e2, e2 + pr), s2)

    def _span(self, other: "EventuallyPeriodic") -> tuple[int, int]:
        lo = min(self.start, other.start) - lcm(len(self.left), len(other.left))
        hi = max(self.end, other.end) + lcm(len(self.right), len(other.right))
        return lo, hi

    def same_as(self, other: "EventuallyPeriodic") -> bool:
        lo, hi = self._span(other)
        return self.segment(lo, hi) == other.segment(lo, hi)

    def left_asymptotic(self, other: "EventuallyPeriodic") -> bool:
        """Agree on some half-line ``(-inf, n]``."""
        m = min(self.start, other.start)
        lo = m - lcm(len(self.left), len(other.left))
        return self.segment(lo, m) == other.segment(lo, m)

    def right_asymptotic(self, other: "EventuallyPeriodic") -> bool:
        m = max(self.end, other.end)
        hi = m + lcm(len(self.right), len(other.right))
        return self.segment(m, hi) == other.segment(m, hi)

    def mirrored(self) -> "EventuallyPeriodic":
        return EventuallyPeriodic(
            tuple(reversed(self.right)), tuple(reversed(self.middle)), tuple(reversed(self.left)), 1 - self.end
        )


@dataclass(frozen=True)
class ClosingVerdict:
    side: str
    answer: str
    witness: tuple[EventuallyPeriodic, EventuallyPeriodic] | None = None
    finite_difference: bool = False
    note: str = ""


def verify_closing_witness(rule: RuleTable1D, side: str, a: EventuallyPeriodic, b: EventuallyPeriodic) -> bool:
    """Distinct, asymptotic on the side that matters, with equal images."""
    if a.same_as(b):
        return False
    asym = a.left_asymptotic(b) if side == RIGHT else a.right_asymptotic(b)
    return asym and a.image(rule).same_as(b.image(rule))


# ---------------------------------------------------------------------------
# permutivity
# ---------------------------------------------------------------------------


def _rows_are_permutations(rows: np.ndarray, n: int) -> bool:
    return bool(np.all(np.sort(rows, axis=1) == np.arange(n)[None, :]))


def is_rightmost_permutive(rule: RuleTable1D) -> bool:
    k = rule.n_symbols
    return _rows_are_permutations(rule.table.reshape(-1, k), k)


def is_leftmost_permutive(rule: RuleTable1D) -> bool:
    k = rule.n_symbols
    return _rows_are_permutations(rule.table.reshape(k, -1).T, k)


@dataclass(frozen=True)
class ExpansivityCertificate1D:
    leftmost: bool
    rightmost: bool
    epsilon_exponent: int


def expansivity_certificate(rule: RuleTable1D) -> ExpansivityCertificate1D | None:
    """Positive expansivity with constant 2^-r, certified by bipermutivity."""
    left, right = is_leftmost_permutive(rule), is_rightmost_permutive(rule)
    if left and right and rule.radius > 0:
        return ExpansivityCertificate1D(True, True, rule.radius)
    return None


# ---------------------------------------------------------------------------
# closingness on the pair graph
# ---------------------------------------------------------------------------


def _pair_graph(rule: RuleTable1D):
    """Successor lists of the pair graph for the right-closing question."""
    k, r = rule.n_symbols, rule.radius
    m = 2 * r
    K = k ** m
    limits.check("pair graph", K * K * k * k)
    words = all_words(k, m)
    # extension of word u by a: index of (u a) in the rule table, and the new suffix
    ext = np.arange(K)[:, None] * k + np.arange(k)[None, :]
    image = rule.table[ext]  # (K, k)
    suffix = ext % K  # drop the first symbol
    u, w, a, b = np.nonzero(image[:, None, :, None] == image[None, :, None, :])
    src = u * K + w
    dst = suffix[u, a] * K + suffix[w, b]
    bounds = np.searchsorted(src, np.arange(K * K + 1))
    triples = list(zip(dst.tolist(), a.tolist(), b.tolist()))
    succ = [triples[bounds[i]:bounds[i + 1]] for i in range(K * K)]
    return K, words, succ


def _tarjan_cyclic(n: int, succ) -> list[bool]:
    """Iterative Tarjan; marks vertices lying on some cycle."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    cyclic = [False] * n
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i][0]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    if len(comp) > 1 or any(e[0] == v for e in succ[v]):
                        for w in comp:
                            cyclic[w] = True
    return cyclic


def _bfs(starts: Sequence[int], succ, allowed=None):
    parent: dict[int, tuple[int, int, int] | None] = {s: None for s in starts}
    queue = deque(starts)
    while queue:
        v = queue.popleft()
        for w, a, b in succ[v]:
            if w not in parent and (allowed is None or allowed(w)):
                parent[w] = (v, a, b)
                queue.append(w)
    return parent


def _path_to(parent, target) -> list[tuple[int, int]]:
    steps = []
    v = target
    while parent[v] is not None:
        u, a, b = parent[v]
        steps.append((a, b))
        v = u
    steps.reverse()
    return steps


def _root_of(parent, target) -> int:
    v = target
    while parent[v] is not None:
        v = parent[v][0]
    return v


def check_closing(rule: RuleTable1D, side: str = RIGHT) -> ClosingVerdict:
    """Decide right (or left) closingness, with a re-checkable witness if not."""
    if side == LEFT:
        v = check_closing(rule.mirrored(), RIGHT)
        w = None if v.witness is None else (v.witness[0].mirrored(), v.witness[1].mirrored())
        return ClosingVerdict(LEFT, v.answer, w, v.finite_difference, v.note)
    if side != RIGHT:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if rule.radius == 0:
        rule = rule.with_radius(1)
    try:
        K, words, succ = _pair_graph(rule)
    except limits.CapExceeded as exc:
        return ClosingVerdict(RIGHT, UNKNOWN, note=str(exc))
    n = K * K
    diag = [u * K + u for u in range(K)]

    def nondiag(v):
        return v // K != v % K

    from_diag = _bfs(diag, succ)
    escaped = [v for v in from_diag if nondiag(v)]
    if not escaped:
        return ClosingVerdict(RIGHT, CLOSING)
    # vertices that can return to the diagonal: finite-difference witnesses
    pred: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for v in range(n):
        for w, a, b in succ[v]:
            pred[w].append((v, a, b))
    back = _bfs(diag, pred)
    returning = [v for v in escaped if v in back]
    if returning:
        depth = {}
        for v, par in from_diag.items():  # insertion order is BFS order
            depth[v] = 0 if par is None else depth[par[0]] + 1
        x = min(returning, key=lambda v: (depth[v], v))
        head = _path_to(from_diag, x)
        # walk the reverse-BFS tree forward from x to the diagonal
        tail = []
        v = x
        while back[v] is not None:
            w, a, b = back[v]
            tail.append((a, b))
            v = w
        start = _root_of(from_diag, x)
        u = tuple(int(s) for s in words[start // K])
        a_mid = u + tuple(s for s, _ in head + tail)
        b_mid = u + tuple(s for _, s in head + tail)
        wit = (EventuallyPeriodic((0,), a_mid, (0,)), EventuallyPeriodic((0,), b_mid, (0,)))
        return ClosingVerdict(RIGHT, NOT_CLOSING, wit, finite_difference=True)
    cyclic = _tarjan_cyclic(n, succ)
    after = _bfs(escaped, succ)
    targets = [v for v in after if cyclic[v]]
    if not targets:
        return ClosingVerdict(RIGHT, CLOSING)
    c = min(targets)
    # diagonal -> escaped vertex -> cycle vertex -> around the cycle
    via = _root_of(after, c)
    head = _path_to(from_diag, via) + _path_to(after, c)
    start = _root_of(from_diag, via)
    first = {}
    for w, a, b in succ[c]:
        first.setdefault(w, (a, b))
    # shortest cycle through c: first edge then a path back
    best = None
    for w, ab in first.items():
        tree = _bfs([w], succ)
        if c in tree:
            cyc = [ab] + _path_to(tree, c)
            if best is None or len(cyc) < len(best):
                best = cyc
    u = tuple(int(s) for s in words[start // K])
    a_mid = u + tuple(s for s, _ in head)
    b_mid = u + tuple(s for _, s in head)
    wit = (
        EventuallyPeriodic((0,), a_mid, tuple(s for s, _ in best)),
        EventuallyPeriodic((0,), b_mid, tuple(s for _, s in best)),
    )
    return ClosingVerdict(RIGHT, NOT_CLOSING, wit, finite_difference=False)


def closing_oracle(
    rule: RuleTable1D, side: str = RIGHT, head_len: int = 6, period: int = 4
) -> tuple[EventuallyPeriodic, EventuallyPeriodic] | None:
    """Brute-force search for a closingness counterexample.

    Enumerates every configuration ``T^inf H R^inf`` with ``|H| = head_len``
    and ``|T| = |R| = p <= period``, groups them by common tail ``T`` and by
    their exact image, and returns the first pair sharing both.
    """
    if side == LEFT:
        w = closing_oracle(rule.mirrored(), RIGHT, head_len, period)
        return None if w is None else (w[0].mirrored(), w[1].mirrored())
    k, r, h = rule.n_symbols, rule.radius, head_len
    for p in range(1, period + 1):
        n_free = 2 * p + h
        limits.check("closing oracle enumeration", k ** n_free * (n_free + 4 * r))
        free = all_words(k, n_free)
        T, H, R = free[:, :p], free[:, p:p + h], free[:, p + h:]
        lo, hi = -2 * r - p, h + p + 2 * r
        cols = []
        for i in range(lo, hi):
            if i < 0:
                cols.append(T[:, i % p])
            elif i < h:
                cols.append(H[:, i])
            else:
                cols.append(R[:, (i - h) % p])
        rows = np.stack(cols, axis=1)
        image = rule.apply_words(rows)
        key = np.concatenate([T, image], axis=1)
        _, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        hits = np.flatnonzero(counts[inverse] > 1)
        if hits.size:
            i = int(hits[0])
            j = int(next(x for x in hits[1:] if inverse[x] == inverse[i]))

            def ep(row):
                return EventuallyPeriodic(
                    tuple(int(a) for a in T[row]), tuple(int(a) for a in H[row]), tuple(int(a) for a in R[row])
                )

            return ep(i), ep(j)
    return None


# ---------------------------------------------------------------------------
# blocking words
# ---------------------------------------------------------------------------

BLOCKING, NOT_BLOCKING, UNKNOWN_AT = "blocking", "not_blocking_within", "unknown_at"


@dataclass(frozen=True)
class BlockingReport:
    word: tuple[int, ...]
    s: int
    offset: int
    status: str
    horizon: int

    def __post_init__(self):
        if not 0 <= self.offset <= len(self.word) - self.s:
            raise ValueError("offset out of range")


def _confirm_blocking(rule: RuleTable1D, word: tuple[int, ...], s: int, j: int) -> bool:
    """Sound check: the window stays determined whatever the environment."""
    k, r = rule.n_symbols, rule.radius
    known = np.array(word)
    lo = 0  # position of known[0]
    window = tuple(word[j:j + s])
    # exact phase: the window is inside the known segment
    while len(known) - 2 * r >= 0 and lo + r <= j and j + s <= lo + len(known) - r:
        known = rule.apply_words(known)
        lo += r
        window = tuple(int(a) for a in known[j - lo:j - lo + s])
    # subset phase over arbitrary flanks
    flanks = all_words(k, r)
    state = window
    seen = set()
    while state not in seen:
        seen.add(state)
        rows = np.array([tuple(fl) + state + tuple(fr) for fl in flanks for fr in flanks])
        images = {tuple(int(a) for a in row) for row in rule.apply_words(rows)}
        if len(images) != 1:
            return False
        state = images.pop()
    return True


def _refute_blocking(
    rule: RuleTable1D, word: tuple[int, ...], s: int, j: int, horizon: int, cap: int
) -> bool:
    """Exact: some extension of ``word`` changes the window within ``horizon`` steps."""
    k, r, L = rule.n_symbols, rule.radius, len(word)
    for n in range(1, horizon + 1):
        left = max(0, n * r - j)
        right = max(0, j + s + n * r - L)
        if left + right == 0:
            continue
        if k ** (left + right) > cap:
            return False
        ext = all_words(k, left + right)
        core = np.array(word[max(0, j - n * r):min(L, j + s + n * r)])
        rows = np.concatenate(
            [ext[:, :left], np.broadcast_to(core, (len(ext), len(core))), ext[:, left:]], axis=1
        )
        for _ in range(n):
            rows = rule.apply_words(rows)
        if len(np.unique(rows, axis=0)) > 1:
            return True
    return False


def blocking_status(rule: RuleTable1D, word: Sequence[int], s: int, offset: int, horizon: int, cap: int = 1 << 16) -> BlockingReport:
    word = tuple(int(a) for a in word)
    if _confirm_blocking(rule, word, s, offset):
        status = BLOCKING
    elif _refute_blocking(rule, word, s, offset, horizon, cap):
        status = NOT_BLOCKING
    else:
        status = UNKNOWN_AT
    return BlockingReport(word, s, offset, status, horizon)


def blocking_search(rule: RuleTable1D, s: int, max_len: int, horizon: int) -> list[BlockingReport]:
    """Status of every (word, offset) with ``s <= |word| <= max_len``."""
    if s < 1 or s > max_len:
        raise ValueError("need 1 <= s <= max_len")
    k = rule.n_symbols
    limits.check("blocking search words", sum(k ** L for L in range(s, max_len + 1)))
    reports = []
    for L in range(s, max_len + 1):
        for idx in range(k ** L):
            word = index_word(idx, k, L)
            for j in range(L - s + 1):
                reports.append(blocking_status(rule, word, s, j, horizon))
    return reports


def find_blocking_word(rule: RuleTable1D, s: int, max_len: int, horizon: int) -> BlockingReport | None:
    """Shortest, then lexicographically first, confirmed ``s``-blocking word."""
    if s < 1 or s > max_len:
        raise ValueError("need 1 <= s <= max_len")
    k = rule.n_symbols
    for L in range(s, max_len + 1):
        for idx in range(k ** L):
            word = index_word(idx, k, L)
            for j in range(L - s + 1):
                if _confirm_blocking(rule, word, s, j):
                    return BlockingReport(word, s, j, BLOCKING, horizon)
    return None


def simulate_window(rule: RuleTable1D, config: Sequence[int], steps: int) -> list[tuple[int, ...]]:
    """Orbit of a periodic configuration, one tuple per time step."""
    c = PeriodicConfig1D(rule.n_symbols, list(config))
    out = [tuple(int(a) for a in c.cells)]
    for _ in range(steps):
        c = apply_1d(rule, c)
        out.append(tuple(int(a) for a in c.cells))
    return out


__all__ = [
    "BlockingReport",
    "ClosingVerdict",
    "EventuallyPeriodic",
    "ExpansivityCertificate1D",
    "blocking_search",
    "blocking_status",
    "check_closing",
    "closing_oracle",
    "expansivity_certificate",
    "find_blocking_word",
    "is_leftmost_permutive",
    "is_rightmost_permutive",
    "verify_closing_witness",
]
