import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ca_lab.wang import (
    ANCHORS,
    ARM_H,
    ARM_V,
    BLANK,
    CENTER,
    OUTSIDE,
    BudgetExhausted,
    Tile,
    TileSet,
    Tiling,
    attach_space_filling_path,
    check_tiling,
    checkerboard_tileset,
    follow_path,
    generate_hierarchy,
    hierarchy_side,
    render_pbm,
    tiles_square,
    tiles_torus,
    trace_paths,
    uniform_tileset,
    wangify,
    wangify_many,
)

EW_MISMATCH = TileSet((Tile(0, 0, 0, 0, 1),))


def random_tileset(seed, n_tiles, n_colors):
    rng = np.random.default_rng(seed)
    return TileSet(tuple(Tile(i, *rng.integers(0, n_colors, 4).tolist()) for i in range(n_tiles)))


def test_check_tiling_examples():
    assert check_tiling(uniform_tileset(), Tiling([[0]], torus=True)) == (True, None)
    ts = TileSet((Tile(1, 0, 0, 1, 0), Tile(2, 0, 0, 0, 2)))
    ok, v = check_tiling(ts, Tiling([[1], [2]]))
    assert not ok and v.cell == (0, 0) and v.side == "E" and v.neighbour == (1, 0)
    assert check_tiling(checkerboard_tileset(), Tiling([[0, 1], [1, 0]], torus=True))[0]
    with pytest.raises(KeyError):
        check_tiling(uniform_tileset(), Tiling([[5]]))


def test_square_examples():
    for n in (1, 4, 6):
        assert tiles_square(uniform_tileset(), n) is not None
        assert tiles_square(checkerboard_tileset(), n) is not None
    assert tiles_square(EW_MISMATCH, 1) is not None
    assert tiles_square(EW_MISMATCH, 2) is None


def test_torus_examples():
    assert tiles_torus(uniform_tileset(), 1, 1) is not None
    t = tiles_torus(checkerboard_tileset(), 2, 2)
    assert t is not None and check_tiling(checkerboard_tileset(), t)[0]
    assert tiles_torus(checkerboard_tileset(), 1, 1) is None
    assert tiles_torus(checkerboard_tileset(), 3, 2) is None
    for p in (1, 2, 3):
        for q in (1, 2, 3):
            assert tiles_torus(EW_MISMATCH, p, q) is None


def test_budget():
    ts = random_tileset(3, 6, 3)
    with pytest.raises(BudgetExhausted):
        tiles_square(ts, 6, budget=5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 3), st.integers(1, 3))
def test_torus_solutions_unroll_validly(seed, n, p, q):
    ts = random_tileset(seed, n, 2)
    t = tiles_torus(ts, p, q)
    if t is not None:
        assert check_tiling(ts, t)[0]
        assert check_tiling(ts, t.unroll(2 * p, 2 * q))[0]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_square_failure_is_monotone(seed, n_tiles):
    ts = random_tileset(seed, n_tiles, 2)
    results = [tiles_square(ts, n) is not None for n in range(1, 5)]
    assert results == sorted(results, reverse=True)
    for n, ok in enumerate(results, 1):
        if ok:
            assert check_tiling(ts, tiles_square(ts, n))[0]


def test_follow_path():
    east = TileSet((Tile(0, 0, 0, 0, 0, "E"),))
    tr = follow_path(east, Tiling(np.zeros((5, 1), dtype=int)), (0, 0), 20)
    assert tr.cells == tuple((x, 0) for x in range(5)) and tr.stop == "boundary"
    ts = TileSet((Tile(0, 0, 0, 0, 0, "E"), Tile(1, 0, 0, 0, 0, "W")))
    tr = follow_path(ts, Tiling([[0], [1]]), (0, 0), 10)
    assert tr.stop == "cycle" and tr.cycle_at == 2
    # boustrophedon on 3x3: rows y=0 east, y=1 west, y=2 east
    dirs = TileSet((Tile(0, 0, 0, 0, 0, "E"), Tile(1, 0, 0, 0, 0, "W"), Tile(2, 0, 0, 0, 0, "N")))
    ids = np.array([[0, 2, 0], [0, 1, 0], [2, 1, 0]])
    tr = follow_path(dirs, Tiling(ids), (0, 0), 20)
    assert len(set(tr.cells)) == 9


def test_hierarchy_sides_and_cross():
    for n in range(1, 6):
        assert hierarchy_side(n) == (3 if n == 1 else 2 * hierarchy_side(n - 1) + 1)
        assert generate_hierarchy(n).side == hierarchy_side(n)
    lab = generate_hierarchy(1).labels
    assert lab.tolist() == [[BLANK, ARM_H, BLANK], [ARM_V, CENTER, ARM_V], [BLANK, ARM_H, BLANK]]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_hierarchy_recursion(n):
    big, small = generate_hierarchy(n).labels, generate_hierarchy(n - 1).labels
    m = small.shape[0]
    for ox in (0, m + 1):
        for oy in (0, m + 1):
            assert np.array_equal(big[ox:ox + m, oy:oy + m], small)
    assert set(big[m, :].tolist()) <= {ARM_V, CENTER} and set(big[:, m].tolist()) <= {ARM_H, CENTER}


def test_center_anchor_arms():
    pat = generate_hierarchy(3, "center")
    h = pat.side // 2
    assert pat.label_at((0, 0)) == CENTER
    assert all(pat.label_at((x, 0)) in (ARM_H, CENTER) for x in range(-h, h + 1))
    assert all(pat.label_at((0, y)) in (ARM_V, CENTER) for y in range(-h, h + 1))
    assert pat.label_at((h + 1, 0)) is None


@pytest.mark.parametrize("n", range(1, 6))
@pytest.mark.parametrize("anchor,count", [("sw", 1), ("south", 2), ("east", 2), ("center", 4)])
def test_paths(n, anchor, count):
    att = attach_space_filling_path(generate_hierarchy(n, anchor))
    side = att.pattern.side
    assert len(att.paths) == count
    cells = [c for p in att.paths for c in p]
    assert len(cells) == len(set(cells)) == side * side
    for p in att.paths:
        assert all(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1 for a, b in zip(p, p[1:]))
    assert sorted(map(tuple, trace_paths(att.directions))) == sorted(att.paths)


def test_single_path_small_case():
    att = attach_space_filling_path(generate_hierarchy(1, "sw"))
    assert len(att.paths) == 1 and len(att.paths[0]) == 9


def test_wangify_reproduces_pattern():
    att = attach_space_filling_path(generate_hierarchy(2, "center"))
    w = wangify(att.pattern.labels, att.directions)
    assert check_tiling(w.tileset, w.tiling)[0]
    tiles = w.tileset.by_id()
    ids = w.tiling.ids
    for x in range(ids.shape[0]):
        for y in range(ids.shape[1]):
            assert tiles[int(ids[x, y])].direction == att.directions[x, y]
    assert (OUTSIDE,) in {k[0] for k in w.colors} | {k[1] for k in w.colors}


def test_wangify_many_shares_tiles():
    pats = [attach_space_filling_path(generate_hierarchy(2, a)) for a in ANCHORS]
    w = wangify_many([(p.pattern.labels, p.directions) for p in pats])
    assert len(w.tilings) == 4
    assert all(check_tiling(w.tileset, t)[0] for t in w.tilings)
    assert len(w.tileset) < sum(len(np.unique(t.ids)) for t in w.tilings)


def test_render_pbm():
    out = render_pbm(generate_hierarchy(1).labels)
    assert out == "P1\n3 3\n0 1 0\n1 1 1\n0 1 0\n"
