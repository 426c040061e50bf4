"""Deliberately naive reference implementations used to cross-check the package."""
from __future__ import annotations

import itertools


def step_torus(local, offsets, cells):
    """One CA step on a torus given as a list of columns, by direct lookup."""
    p, q = len(cells), len(cells[0])
    return [
        [local(tuple(cells[(x + dx) % p][(y + dy) % q] for dx, dy in offsets)) for y in range(q)]
        for x in range(p)
    ]


def moore_local(table, k, offsets):
    def local(values):
        idx = 0
        for v in values:
            idx = idx * k + v
        return int(table[idx])

    return local


def step_ring(table, k, r, row):
    n = len(row)
    out = []
    for i in range(n):
        idx = 0
        for j in range(-r, r + 1):
            idx = idx * k + row[(i + j) % n]
        out.append(int(table[idx]))
    return out


def wolfram(number, a, b, c):
    return (number >> (4 * a + 2 * b + c)) & 1


def boxes(local, offsets, ext, k, w, t):
    """Distinct w x w x t space-time boxes by brute force over every initial block."""
    ex, ey = ext
    W, H = w + 2 * ex * (t - 1), w + 2 * ey * (t - 1)
    seen = set()
    for flat in itertools.product(range(k), repeat=W * H):
        cur = [list(flat[i * H:(i + 1) * H]) for i in range(W)]
        rows = []
        for n in range(t):
            m = t - 1 - n
            rows.append(tuple(tuple(cur[ex * m + i][ey * m:ey * m + w]) for i in range(w)))
            if n < t - 1:
                cw, ch = len(cur) - 2 * ex, len(cur[0]) - 2 * ey
                cur = [
                    [local(tuple(cur[ex + i + dx][ey + j + dy] for dx, dy in offsets)) for j in range(ch)]
                    for i in range(cw)
                ]
        seen.add(tuple(rows))
    return len(seen)
