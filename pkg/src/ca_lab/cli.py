"""Command-line front end.

Exit codes: 0 on success, 1 when an analysis refutes a property and prints
a witness, 2 on usage or input errors.  Negative vectors need the ``=``
form, e.g. ``--nu=-1,1``.
"""
from __future__ import annotations

import argparse
import sys

from . import dyn1d, dyn2d, limits, reduction, slicing, stretch, wang
from .core import RuleTable1D, RuleTable2D
from .formats import FormatError, emit_rule, grid_text, load_rule_file, load_tile_file

EXIT_OK, EXIT_REFUTED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _vec(text: str) -> tuple[int, int]:
    try:
        a, b = (int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a,b but got {text!r}") from None
    return a, b


def _ints(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None


def _load_rule(arg: str, dim: str):
    rf = load_rule_file(arg)
    rule = rf.rule()
    want = RuleTable2D if dim == "2D" else RuleTable1D
    if not isinstance(rule, want):
        raise UsageError(f"{arg}: expected a {dim} rule")
    return rule


def _fmt_ep(c: dyn1d.EventuallyPeriodic) -> str:
    def w(t):
        return "".join(str(s) for s in t)

    return f"({w(c.left)})^inf [{w(c.middle)}]@{c.start} ({w(c.right)})^inf"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_analyze2d(args, out) -> int:
    rule = _load_rule(args.rulefile, "2D")
    code = EXIT_OK
    ran = False
    if args.gamma_permutivity:
        ran = True
        for g in dyn2d.CORNERS:
            print(f"gamma-permutive {g[0]},{g[1]}\t{dyn2d.is_gamma_permutive(rule, g)}", file=out)
    if args.quasi_expansive:
        ran = True
        cert = dyn2d.quasi_expansivity_certificate(rule)
        if cert is None:
            print("quasi-expansive\tno certificate", file=out)
        else:
            print(f"quasi-expansive\tcertificate gamma={cert.gamma[0]},{cert.gamma[1]} covers {cert.nus_covered}", file=out)
    if args.closing_evidence or args.sensitivity:
        if args.nu is None:
            raise UsageError("--nu is required for --closing-evidence and --sensitivity")
        v_list = args.v or [slicing.build_family(args.nu).d]
    if args.closing_evidence:
        ran = True
        rep = dyn2d.nu_closing_evidence(rule, args.nu, v_list)
        for e in rep.entries:
            print(f"sliced v={e.v[0]},{e.v[1]} k={e.k}\tright={e.right}\tleft={e.left}", file=out)
        print(f"nu-closing {args.nu[0]},{args.nu[1]}\t{rep.status.upper()}", file=out)
        if rep.status == dyn2d.REFUTED:
            w = rep.witness.pair
            print(f"witness\tline pair over sliced v={w.sliced.v[0]},{w.sliced.v[1]} verified={rep.witness.verified}", file=out)
            print(f"  a = {_fmt_ep(w.a)}", file=out)
            print(f"  b = {_fmt_ep(w.b)}", file=out)
            code = EXIT_REFUTED
    if args.sensitivity:
        ran = True
        rep = dyn2d.quasi_sensitivity_check(rule, args.nu, v_list[0])
        line = f"sensitivity nu={args.nu[0]},{args.nu[1]}\t{rep.status.upper()}"
        if rep.blocking is not None:
            line += f"\tblocking word {''.join(map(str, rep.blocking.word))} offset {rep.blocking.offset}"
        print(line, file=out)
    if not ran:
        raise UsageError("analyze2d needs at least one analysis flag")
    return code


def cmd_slice(args, out) -> int:
    rule = _load_rule(args.rulefile, "2D")
    sl = slicing.build_sliced_rule(rule, args.nu, args.v)
    if args.emit_rulefile:
        out.write(emit_rule(sl.rule))
    else:
        f = sl.family
        print(f"normal={f.normal[0]},{f.normal[1]} d={f.d[0]},{f.d[1]} y1={f.y1[0]},{f.y1[1]}", file=out)
        print(f"k={sl.k} rstar={sl.rstar} alphabet={sl.rule.n_symbols}", file=out)
    return EXIT_OK


def cmd_entropy(args, out) -> int:
    rule = load_rule_file(args.rulefile).rule()
    entries = [dyn2d.count_rectangles(rule, w, t, args.sample, args.seed) for t in args.t for w in args.w]
    out.write(dyn2d.EntropyTable(tuple(entries)).to_tsv())
    return EXIT_OK


def cmd_closing1d(args, out) -> int:
    if args.oracle is not None and len(args.oracle) != 2:
        raise UsageError("--oracle takes head,period")
    rule = _load_rule(args.rulefile, "1D")
    verdict = dyn1d.check_closing(rule, args.side)
    print(verdict.answer.upper(), file=out)
    code = EXIT_OK
    if verdict.witness is not None:
        a, b = verdict.witness
        print(f"  a = {_fmt_ep(a)}", file=out)
        print(f"  b = {_fmt_ep(b)}", file=out)
        code = EXIT_REFUTED
    if args.oracle is not None:
        w = dyn1d.closing_oracle(rule, args.side, args.oracle[0], args.oracle[1])
        agrees = (w is None) == (verdict.answer != dyn1d.NOT_CLOSING) or verdict.answer == dyn1d.UNKNOWN
        print(f"oracle\t{'witness found' if w else 'no witness'}\t{'agrees' if agrees else 'DISAGREES'}", file=out)
    return code


def cmd_blocking(args, out) -> int:
    rule = _load_rule(args.rulefile, "1D")
    rep = dyn1d.find_blocking_word(rule, args.s, args.max_len, args.horizon)
    if rep is None:
        print(f"no blocking word up to length {args.max_len}", file=out)
    else:
        print(f"{''.join(map(str, rep.word))}\toffset={rep.offset}\t{rep.status}", file=out)
    return EXIT_OK


def cmd_tile(args, out) -> int:
    ts = load_tile_file(args.tilefile)
    try:
        if args.square is not None:
            t = wang.tiles_square(ts, args.square, args.budget)
        else:
            t = wang.tiles_torus(ts, args.torus[0], args.torus[1], args.budget)
    except wang.BudgetExhausted:
        print("UNKNOWN (budget exhausted)", file=out)
        return EXIT_OK
    if t is None:
        print("UNSAT", file=out)
    else:
        out.write(grid_text(t.ids))
    return EXIT_OK


def cmd_hierarchy(args, out) -> int:
    pat = wang.generate_hierarchy(args.step, args.anchor)
    if args.render == "pbm":
        out.write(wang.render_pbm(pat.labels))
        return EXIT_OK
    out.write(grid_text(pat.labels))
    if args.path:
        att = wang.attach_space_filling_path(pat)
        d = att.directions
        print(f"paths={len(att.paths)}", file=out)
        rows = ["".join(str(d[x, y]) for x in range(d.shape[0])) for y in range(d.shape[1] - 1, -1, -1)]
        out.write("\n".join(rows) + "\n")
    return EXIT_OK


def cmd_stretch(args, out) -> int:
    ts = load_tile_file(args.tilefile)
    shape = stretch.build_shape(args.nu, args.mu)
    sts = stretch.stretch_tileset(ts, shape)
    print(f"scale={shape.scale} cells={len(shape)} neighbours={shape.neighbor_count} "
          f"overlap_suppressed={shape.overlap_suppressed}", file=out)
    print(f"tiles={len(sts.tiles)} unique_assembly={stretch.unique_assembly(sts)}", file=out)
    if args.verify is not None:
        p, q = args.verify
        rep = stretch.verify_isomorphism(ts, sts, p, q)
        print(f"verify {p},{q}\tbase={rep.base_count}\tmacro={rep.macro_count}\t{'OK' if rep.ok else 'FAIL'}", file=out)
    return EXIT_OK


def cmd_reduce(args, out) -> int:
    tau = load_tile_file(args.tilefile)
    red = reduction.build_reduction(tau, args.nu, args.mu, step=args.step)
    print(f"states={red.n_states} extent={red.extent[0]},{red.extent[1]} m={red.m}", file=out)
    w = reduction.build_witness(red, args.witness)
    print(f"witness {w.kind}\tdifference cells={len(w.pair.difference)}\tmacros={len(w.differing_macros)}", file=out)
    if args.check:
        ok = reduction.check_all_windows(red, w.pair, args.window)
        print(f"equal image on all windows up to {args.window}x{args.window}\t{'EQUAL' if ok else 'DIFFER'}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ca-lab", description="Cellular automata dynamics workbench.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze2d", help="permutivity, expansivity, closingness and sensitivity of a 2D rule")
    a.add_argument("rulefile")
    a.add_argument("--gamma-permutivity", action="store_true")
    a.add_argument("--quasi-expansive", action="store_true")
    a.add_argument("--nu", type=_vec)
    a.add_argument("--closing-evidence", action="store_true")
    a.add_argument("--v", type=_vec, nargs="+", help="period vectors a,b of the sliced CA")
    a.add_argument("--sensitivity", action="store_true")
    a.set_defaults(fn=cmd_analyze2d)

    s = sub.add_parser("slice", help="1D rule conjugate to a 2D rule on v-periodic configurations")
    s.add_argument("rulefile")
    s.add_argument("--nu", type=_vec, required=True)
    s.add_argument("--v", type=_vec, required=True)
    s.add_argument("--emit-rulefile", action="store_true")
    s.set_defaults(fn=cmd_slice)

    e = sub.add_parser("entropy", help="space-time rectangle counts as TSV")
    e.add_argument("rulefile")
    e.add_argument("--w", type=_ints, required=True)
    e.add_argument("--t", type=_ints, required=True)
    g = e.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="enumerate every block (default)")
    g.add_argument("--sample", type=int, help="random blocks; counts are lower bounds")
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(fn=cmd_entropy)

    c = sub.add_parser("closing1d", help="decide left/right closingness of a 1D rule")
    c.add_argument("rulefile")
    c.add_argument("--side", choices=(dyn1d.LEFT, dyn1d.RIGHT), required=True)
    c.add_argument("--oracle", type=_ints, help="head,period for a brute-force cross-check")
    c.set_defaults(fn=cmd_closing1d)

    b = sub.add_parser("blocking", help="search a blocking word of a 1D rule")
    b.add_argument("rulefile")
    b.add_argument("--s", type=int, required=True)
    b.add_argument("--max-len", type=int, required=True)
    b.add_argument("--horizon", type=int, required=True)
    b.set_defaults(fn=cmd_blocking)

    t = sub.add_parser("tile", help="tile a square or a torus")
    t.add_argument("tilefile")
    g = t.add_mutually_exclusive_group(required=True)
    g.add_argument("--square", type=int)
    g.add_argument("--torus", type=_vec)
    t.add_argument("--budget", type=int, default=1_000_000)
    t.set_defaults(fn=cmd_tile)

    h = sub.add_parser("hierarchy", help="hierarchical cross pattern")
    h.add_argument("--step", type=int, required=True)
    h.add_argument("--anchor", choices=wang.ANCHORS, default="sw")
    h.add_argument("--path", action="store_true")
    h.add_argument("--render", choices=("ascii", "pbm"), default="ascii")
    h.set_defaults(fn=cmd_hierarchy)

    st = sub.add_parser("stretch", help="stretch a tile set along a parallelogram")
    st.add_argument("tilefile")
    st.add_argument("--nu", type=_vec, required=True)
    st.add_argument("--mu", type=_vec, required=True)
    st.add_argument("--verify", type=_vec)
    st.set_defaults(fn=cmd_stretch)

    r = sub.add_parser("reduce", help="build F_tau and check a witness pair")
    r.add_argument("tilefile")
    r.add_argument("--nu", type=_vec, required=True)
    r.add_argument("--mu", type=_vec, required=True)
    r.add_argument("--witness", choices=("mu", "numu"), required=True)
    r.add_argument("--window", type=int, default=8)
    r.add_argument("--check", action="store_true")
    r.add_argument("--step", type=int, default=3)
    r.set_defaults(fn=cmd_reduce)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args, out)
    except (UsageError, FormatError, limits.CapExceeded, ValueError, OSError) as exc:
        print(f"ca-lab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
