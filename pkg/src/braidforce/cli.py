"""Command-line front end."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import braid_core as bc
from . import colored_classes as cc
from . import conley_engine as ce
from . import dynamics as dy
from . import forcing as fo
from . import word_algebra as wa
from .errors import DomainError, InputError


def _window(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    try:
        lo, hi = (int(t) for t in text.split(','))
    except ValueError:
        raise InputError(f'--window expects lo,hi; got {text!r}') from None
    return lo, hi


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f'cannot read {path}: {exc.strerror}') from None


def _word_arg(text: str) -> wa.PositiveWord | wa.ColoredWord:
    if Path(text).is_file():
        text = _read(text).strip()
    return wa.parse_colored(text) if 'red' in text else wa.parse_word(text)


def _colored_input(args) -> cc.ColoredDiscretizedBraid:
    if args.input:
        return cc.parse_colored_braid(_read(args.input))
    if args.word:
        gw = _word_arg(args.word)
        if not isinstance(gw, wa.ColoredWord):
            raise InputError('a colored word needs red={...}')
        return cc.realize(gw, args.q)
    raise InputError('give --input <braid file> or --word "<colored word>"')


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    b, _ = bc.parse_braid(_read(args.input))
    v = bc.validate(b)
    if v:
        print('ok')
        return 0
    print(f'violation({v.clause}): {v.detail}')
    return 1


def cmd_word(args) -> int:
    b, colors = bc.parse_braid(_read(args.input))
    if 'red' in colors:
        gw = cc.ColoredDiscretizedBraid(b, tuple(colors)).colored_word()
        print(' '.join(map(str, gw.word.letters)) + f'; red={{{",".join(map(str, sorted(gw.red)))}}}')
    else:
        print(' '.join(map(str, bc.braid_word(b).letters)))
    return 0


def cmd_conjugacy(args) -> int:
    u = _word_arg(args.word)
    if args.other:
        v = _word_arg(args.other)
        if isinstance(u, wa.ColoredWord) != isinstance(v, wa.ColoredWord):
            raise InputError('compare two plain words or two colored words')
        same = wa.colored_conjugate(u, v) if isinstance(u, wa.ColoredWord) else wa.positively_conjugate(u, v)
        print(str(same).lower())
        return 0
    if isinstance(u, wa.ColoredWord):
        members = sorted(wa.colored_class(u), key=lambda x: (x[0], sorted(x[1])))
        print(f'members: {len(members)}')
        for w, a in members:
            print(wa.format_colored(wa.ColoredWord(wa.PositiveWord(u.word.m, w), a)))
    else:
        cls = wa.conjugacy_class(u)
        print(f'members: {len(cls.members)}')
        for w in cls.members:
            print(' '.join(map(str, w.letters)))
    return 0


def cmd_flags(args) -> int:
    ab = _colored_input(args)
    flags = cc.class_flags(ab, args.window)
    sys.stdout.write(flags.summary())
    if flags.witness:
        for k, v in sorted(flags.witness.items()):
            print(f'witness {k}: {v}')
    return 0


def cmd_index(args) -> int:
    ab = _colored_input(args)
    h = ce.braid_index(ab, args.window, args.coeff)
    sys.stdout.write(h.report())
    return 0


def cmd_simulate(args) -> int:
    spec = dy.load_system(_read(args.system))
    gw = _word_arg(args.cls)
    if not isinstance(gw, wa.ColoredWord):
        raise InputError('the class file must hold a colored word')
    if args.seeds not in (None, 'auto'):
        hints = [tuple(float(t) for t in ln.split()) for ln in _read(args.seeds).splitlines() if ln.strip()
                 and not ln.lstrip().startswith('#')]
        spec = dy.SystemSpec(spec.chain, spec.orbits, tuple(hints))
    X, perm = spec.skeleton()
    w = bc.braid_word(fo.braid_from_array(X, perm))
    lam = wa.conjugate_mod_full_twist(w, wa.project_color(gw, 'black'))
    if lam is None:
        raise DomainError('the system skeleton does not trace the black part of the class', 'inconsistent-query')
    query = fo.ForcingQuery(wa.project_color(gw, 'black'), gw, spec)
    case = fo.classify_case(query)
    found, notes = fo._realize_orbits(query, case, args.seed, args.max_seeds)
    rs = dy.recurrence_from(spec.chain)
    print(f'period: {spec.chain.d}')
    print(f'skeleton residual: {float(np.max(np.abs(rs.residual(X, perm)))):.3e}')
    print(f'stationary: {len(found)}')
    for i, o in enumerate(found):
        ok = o.residual < args.tol
        print(f'orbit {i} residual {o.residual:.3e} {"ok" if ok else "above tolerance"}')
        for x, y in o.plane:
            print(f'  {x:.15g} {y:.15g}')
    for n in notes:
        print(f'note: {n}')
    return 0


def cmd_force(args) -> int:
    beta = _word_arg(args.skeleton)
    gw = _word_arg(args.colored)
    if not isinstance(gw, wa.ColoredWord) or isinstance(beta, wa.ColoredWord):
        raise InputError('--skeleton takes a plain word and --colored a colored word')
    spec = dy.load_system(_read(args.realize)) if args.realize else None
    rep = fo.force(fo.ForcingQuery(beta, gw, spec), args.window, args.coeff, args.seed)
    text = rep.report()
    if args.report:
        Path(args.report).write_text(text)
    sys.stdout.write(text)
    return 1 if rep.refused else 0


def cmd_render(args) -> int:
    if args.input:
        b, colors = bc.parse_braid(_read(args.input))
    else:
        b, colors = None, []
    Path(args.out).write_text(render_svg(b, colors))
    print(f'wrote {args.out}')
    return 0


def cmd_normalize(args) -> int:
    if args.input:
        b, colors = bc.parse_braid(_read(args.input))
        sys.stdout.write(bc.format_braid(bc.normalize(b, args.window).braid, colors if 'red' in colors else None))
        return 0
    if not args.word:
        raise InputError('give --input <braid file> or --word <word>')
    u = _word_arg(args.word)
    w = u.word if isinstance(u, wa.ColoredWord) else u
    inf, factors = wa.left_normal_form(w)
    print(f'left normal form: Delta^{inf} ' + ' | '.join(' '.join(map(str, wa.perm_word(f))) for f in factors))
    nf = wa.symmetric_normal_form(0, w)
    print(f'full twists: {nf.power}')
    print(f'remainder: {" ".join(map(str, nf.base.letters))}')
    return 0


# ---------------------------------------------------------------------------
# SVG rendering


def render_svg(b: bc.DiscretizedBraid | None, colors: Sequence[str] = (), width: int = 480, height: int = 320) -> str:
    """PL braid diagram; at each crossing the strand with the larger slope is drawn on top."""
    pad = 30
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="#888"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="#888"/>']
    if b is None or b.d == 0:
        out.append('</svg>')
        return '\n'.join(out) + '\n'
    vals = [float(a) for s in b.strands for a in s.anchors]
    lo, hi = min(vals), max(vals)
    span = hi - lo or 1.0

    def px(j: float) -> float:
        return pad + (width - 2 * pad) * j / b.d

    def py(v: float) -> float:
        return height - pad - (height - 2 * pad) * (v - lo) / span

    for j in range(b.d + 1):
        out.append(f'<line x1="{px(j):.2f}" y1="{pad}" x2="{px(j):.2f}" y2="{height - pad}" '
                   f'stroke="#ccc" stroke-dasharray="4 3"/>')
    colors = list(colors) or ['black'] * b.m
    # segments sorted so that, at every crossing, the steeper segment is drawn last
    segs = []
    for mu, s in enumerate(b.strands):
        for j in range(b.d):
            a0, a1 = float(s.anchors[j]), float(s.anchors[j + 1])
            segs.append((j, a1 - a0, mu, a0, a1))
    segs.sort(key=lambda t: (t[0], t[1]))
    for j, _, mu, a0, a1 in segs:
        col = 'crimson' if colors[mu] == 'red' else 'black'
        coords = f'x1="{px(j):.2f}" y1="{py(a0):.2f}" x2="{px(j + 1):.2f}" y2="{py(a1):.2f}"'
        out.append(f'<line {coords} stroke="white" stroke-width="7"/>')
        out.append(f'<line {coords} stroke="{col}" stroke-width="2"/>')
    for mu, s in enumerate(b.strands):
        col = 'crimson' if colors[mu] == 'red' else 'black'
        for j, a in enumerate(s.anchors):
            out.append(f'<circle cx="{px(j):.2f}" cy="{py(float(a)):.2f}" r="3" fill="{col}"/>')
    out.append('</svg>')
    return '\n'.join(out) + '\n'


# ---------------------------------------------------------------------------
# driver


def _global_flags(p: argparse.ArgumentParser, window, tol, seed, coeff) -> None:
    p.add_argument('--window', default=window, help='anchor window lo,hi for class enumeration')
    p.add_argument('--tol', type=float, default=tol, help='residual tolerance for stationary braids')
    p.add_argument('--seed', type=int, default=seed, help='seed for sampled flow starts')
    p.add_argument('--coeff', choices=['z', 'z2'], default=coeff, help='homology coefficients')


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog='braidforce',
                                description='Discrete braid classes, their Conley index and forced periodic orbits.')
    _global_flags(p, None, 1e-9, 0, 'z')
    # the same flags after the subcommand; suppressed defaults keep values given before it
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, *[argparse.SUPPRESS] * 4)
    sub = p.add_subparsers(dest='command', required=True)

    s = sub.add_parser('validate', parents=[common], help='check the discretized braid conditions')
    s.add_argument('--input', required=True)
    s.set_defaults(fn=cmd_validate)

    s = sub.add_parser('word', parents=[common], help='print the braid word of a braid file')
    s.add_argument('--input', required=True)
    s.set_defaults(fn=cmd_word)

    s = sub.add_parser('conjugacy', parents=[common], help='list a positive conjugacy class or compare two words')
    s.add_argument('--word', required=True)
    s.add_argument('--other')
    s.set_defaults(fn=cmd_conjugacy)

    for name, fn, helptext in (('flags', cmd_flags, 'proper / bounded / free / acylindrical flags'),
                               ('index', cmd_index, 'braid Conley index by relative homology')):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument('--input', help='colored braid file')
        s.add_argument('--word', help='colored word, e.g. "m=5: 4 1 2 3; red={3}"')
        s.add_argument('--q', type=int, default=0, help='constant steps appended to a word representative')
        s.set_defaults(fn=fn)

    s = sub.add_parser('simulate', parents=[common], help='find stationary red strands of a realized class')
    s.add_argument('--system', required=True)
    s.add_argument('--class', dest='cls', required=True, help='file or text holding the colored word')
    s.add_argument('--seeds', default='auto', help='auto, or a file of red x-sequences')
    s.add_argument('--max-seeds', type=int, default=60)
    s.set_defaults(fn=cmd_simulate)

    s = sub.add_parser('force', parents=[common], help='forcing report for a skeleton and a colored class')
    s.add_argument('--skeleton', required=True)
    s.add_argument('--colored', required=True)
    s.add_argument('--realize', help='system file of a chained isotopy')
    s.add_argument('--report', help='also write the report to this path')
    s.set_defaults(fn=cmd_force)

    s = sub.add_parser('render', parents=[common], help='SVG braid diagram')
    s.add_argument('--input')
    s.add_argument('--out', required=True)
    s.set_defaults(fn=cmd_render)

    s = sub.add_parser('normalize', parents=[common], help='normal forms of a braid file or a word')
    s.add_argument('--input')
    s.add_argument('--word')
    s.set_defaults(fn=cmd_normalize)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.window = _window(args.window)
        return args.fn(args)
    except InputError as exc:
        print(f'error: {exc}', file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f'refused ({exc.reason}): {exc}', file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == '__main__':
    main()
