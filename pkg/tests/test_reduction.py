import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ca_lab.core import AsymptoticPair2D, TorusConfig2D, apply_2d, evaluate_region
from ca_lab.reduction import (
    MU,
    NUMU,
    bounded_closing_probe,
    build_reduction,
    build_witness,
    check_all_windows,
    check_equal_image,
    windows_around,
)
from ca_lab.wang import Tile, TileSet, tiles_square, uniform_tileset

EAST = TileSet((Tile(0, 0, 0, 0, 0, "E"),))
TWO_DIRS = TileSet((Tile(0, 0, 0, 0, 0, "E"), Tile(1, 0, 0, 0, 0, "N")))
PAIR_TAU = TileSet((Tile(0, 0, 0, 1, 0), Tile(1, 0, 0, 0, 1)))  # alternates along rows
NARROW_TAU = TileSet((Tile(0, 0, 0, 1, 0), Tile(1, 0, 0, 2, 1)))  # tiles 2x2 squares, not 3x3


@pytest.fixture(scope="module")
def red():
    return build_reduction(uniform_tileset(0), (0, 1), (1, 0), step=3)


def test_state_count_and_layers(red):
    assert red.n_states == len(red.K.tiles) * len(red.tau) * 2
    s = red.encode(17, 0, 1)
    assert red.decode(s) == (17, 0, 1)
    k, t, b = red.layers(np.array([s, red.encode(3, 0, 0)]))
    assert k.tolist() == [17, 3] and t.tolist() == [0, 0] and b.tolist() == [1, 0]
    assert red.m == 3 and red.extent[0] >= red.m and red.extent[1] >= red.m


def test_trivial_shape_xors_pointed_bit():
    r = build_reduction(uniform_tileset(0), (0, 1), (1, 0), directed=EAST, min_distance=1)
    assert len(r.shape) == 1
    bits = np.random.default_rng(0).integers(0, 2, (4, 4))
    out = apply_2d(r.rule, TorusConfig2D(r.n_states, bits)).cells
    assert np.array_equal(out, bits ^ np.roll(bits, -1, axis=0))


def test_tiling_error_freezes_bits():
    r = build_reduction(PAIR_TAU, (0, 1), (1, 0), directed=EAST, min_distance=1)
    cells = np.array([[r.encode(0, 0, 1), r.encode(0, 0, 1)], [r.encode(0, 1, 0), r.encode(0, 1, 1)]])
    cells = np.tile(cells, (2, 2))
    cells[0, 0] = r.encode(0, 1, 1)  # breaks the tau tiling next to (0, 0)
    out = apply_2d(r.rule, TorusConfig2D(r.n_states, cells)).cells
    assert out[0, 0] == cells[0, 0] and out[1, 0] == cells[1, 0] and out[3, 0] == cells[3, 0]


def test_mixed_bits_freeze_the_macro():
    r = build_reduction(uniform_tileset(0), (0, 1), (1, 0), directed=EAST)
    assert len(r.shape) == 9
    k = len(r.shape)
    cells = np.empty((6, 6), dtype=np.int64)
    idx = r.shape.index()
    for x in range(6):
        for y in range(6):
            cells[x, y] = r.encode(idx[(x % 3, y % 3)], 0, 0)
    cells[0, 0] += 1  # one bit in the macro at the origin
    out = apply_2d(r.rule, TorusConfig2D(r.n_states, cells)).cells
    assert np.array_equal(out[:3, :3], cells[:3, :3])
    assert k == 9


def random_aligned_config(r, rng, macros_x=2, macros_y=2, uniform_bits=True):
    idx = r.shape.index()
    k = len(r.shape)
    p, q = 3 * macros_x, 3 * macros_y
    base = rng.integers(0, len(r.K.base), (macros_x, macros_y))
    tau = rng.integers(0, len(r.tau), (p, q))
    bits = rng.integers(0, 2, (macros_x, macros_y))
    cells = np.empty((p, q), dtype=np.int64)
    for x in range(p):
        for y in range(q):
            b = bits[x // 3, y // 3] if uniform_bits else rng.integers(0, 2)
            cells[x, y] = r.encode(int(base[x // 3, y // 3]) * k + idx[(x % 3, y % 3)], int(tau[x, y]), int(b))
    return cells


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_tile_layers_never_change(seed, uniform):
    r = build_reduction(PAIR_TAU, (0, 1), (1, 0), directed=TWO_DIRS)
    cells = random_aligned_config(r, np.random.default_rng(seed), uniform_bits=uniform)
    out = apply_2d(r.rule, TorusConfig2D(r.n_states, cells)).cells
    assert np.array_equal(out >> 1, cells >> 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_macro_bits_stay_uniform(seed):
    r = build_reduction(PAIR_TAU, (0, 1), (1, 0), directed=TWO_DIRS)
    rng = np.random.default_rng(seed)
    cells = random_aligned_config(r, rng, 2, 3)
    if seed % 2:
        # a valid tau layer (tiles alternate along x) lets the guard fire
        k, _, bit = r.layers(cells)
        tau = np.broadcast_to(np.arange(cells.shape[0])[:, None] % 2, cells.shape)
        cells = (k * len(r.tau) + tau) * 2 + bit
    out = apply_2d(r.rule, TorusConfig2D(r.n_states, cells)).cells & 1
    for mx in range(2):
        for my in range(3):
            assert len(set(out[3 * mx:3 * mx + 3, 3 * my:3 * my + 3].reshape(-1).tolist())) == 1


def test_guard_fires_on_valid_aligned_configs():
    r = build_reduction(PAIR_TAU, (0, 1), (1, 0), directed=TWO_DIRS)
    cells = random_aligned_config(r, np.random.default_rng(1), 2, 3)
    k, _, bit = r.layers(cells)
    tau = np.broadcast_to(np.arange(6)[:, None] % 2, cells.shape)
    cells = (k * 2 + tau) * 2 + bit
    assert (bit == 1).any() and (bit == 0).any()
    out = apply_2d(r.rule, TorusConfig2D(r.n_states, cells)).cells
    assert (out != cells).any()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 40))
def test_guard_locality(seed, far):

    r = build_reduction(PAIR_TAU, (0, 1), (1, 0), directed=TWO_DIRS)
    rng = np.random.default_rng(seed)
    ex, ey = r.extent
    base = rng.integers(0, r.n_states, (2 * ex + 9, 2 * ey + 9))
    changed = base.copy()
    # any cell outside the neighbourhood of the origin
    offsets = set(r.rule.offsets)
    outside = [(x, y) for x in range(-ex - 4, ex + 5) for y in range(-ey - 4, ey + 5) if (x, y) not in offsets]
    x, y = outside[far % len(outside)]
    changed[x + ex + 4, y + ey + 4] = rng.integers(0, r.n_states)

    def val(arr):
        return lambda a, b: int(arr[a + ex + 4, b + ey + 4])

    a = evaluate_region(r.rule, val(base), (0, 0, 1, 1), 1)[1]
    b = evaluate_region(r.rule, val(changed), (0, 0, 1, 1), 1)[1]
    assert a.tolist() == b.tolist()


def test_windows_around():
    ws = windows_around(7, 8)
    assert all(x0 <= 0 < x0 + w and y0 <= 0 < y0 + h for x0, y0, w, h in ws)
    assert len(ws) == sum(w * h for w in range(1, 9) for h in range(1, 9))


@pytest.mark.parametrize("kind", [MU, NUMU, "mu", "numu"])
def test_witnesses_have_equal_images(red, kind):
    w = build_witness(red, kind)
    pair = w.pair
    ka, ta, ba = red.layers(np.array([pair.diff_a[z] for z in sorted(pair.diff_a)]))
    kb, tb, bb = red.layers(np.array([pair.diff_b[z] for z in sorted(pair.diff_b)]))
    assert np.array_equal(ka, kb) and np.array_equal(ta, tb) and (ba != bb).any()
    for u, q in w.split_lines:
        assert all(u[0] * z[0] + u[1] * z[1] < q for z in pair.difference)
    shape = red.shape
    for a, b in w.differing_macros:
        cells = [(c[0] + a * shape.nu_s[0] + b * shape.mu_s[0], c[1] + a * shape.nu_s[1] + b * shape.mu_s[1])
                 for c in shape.cells]
        assert all(z in pair.difference for z in cells)
    assert check_all_windows(red, pair, 8)
    assert check_equal_image(red, pair, (-7, -7, 15, 15))


def test_tiling_error_next_to_difference_breaks_equality(red):
    w = build_witness(red, MU)
    a, b = dict(w.pair.diff_a), dict(w.pair.diff_b)
    # a cell just west of the differing half, in both configurations
    z = (-1, 1)
    assert z in a and z not in w.pair.difference and (0, 1) in w.pair.difference
    junk = red.encode(0, 0, 0)
    a[z] = b[z] = junk
    broken = AsymptoticPair2D(w.pair.background, a, b, w.pair.halfplane)
    assert not check_equal_image(red, broken, (-2, -2, 5, 5))


def test_identical_bits_are_not_a_pair(red):
    w = build_witness(red, MU)
    with pytest.raises(ValueError):
        AsymptoticPair2D(w.pair.background, w.pair.diff_a, dict(w.pair.diff_a))


def test_witness_needs_a_tau_tiling():
    no_tiling = TileSet((Tile(0, 0, 0, 0, 1),))
    r = build_reduction(no_tiling, (0, 1), (1, 0), step=2)
    with pytest.raises(ValueError):
        build_witness(r, MU)


def test_probe_plane_tiling_tau(red):
    rep = bounded_closing_probe(red)
    assert rep.equal_image_pairs and rep.structural_consequence_holds
    assert rep.witnesses_with_valid_3x3 == len(rep.equal_image_pairs)


def test_probe_narrow_tau():
    assert tiles_square(NARROW_TAU, 2) is not None and tiles_square(NARROW_TAU, 3) is None
    r = build_reduction(NARROW_TAU, (0, 1), (1, 0), step=3)
    rep = bounded_closing_probe(r)
    assert rep.pairs_tested == 48 and rep.witnesses_with_valid_3x3 == 0


def test_probe_corrupted_k_layer(red):
    rep = bounded_closing_probe(red, corrupt_k=True)
    assert rep.equal_image_pairs == ()
