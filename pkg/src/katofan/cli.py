"""``katofan`` command line: load a ``.kf`` script and run one operation.

Exit status: 0 on success, 1 on a domain error, 2 on a parse or usage error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field

from . import serialize as ser
from .abelian import FGAbelianGroup, GroupHom, IntMatrix, cokernel, smith_normal_form
from .charts import (
    ChartDatum,
    construct_neat_chart,
    criterion_report,
    gp_rank,
    log_etale_condition,
    log_smooth_condition,
    neatness_check,
    rel_char,
)
from .dsl import COMMANDS, ChartDecl, HomDecl, MonoidDecl, ParseError, Script, TupleDecl, parse
from .fan import spec
from .groupoid import PMonoid, build_truncation, facelem_check, join, verify_groupoid
from .monoid import DEFAULT_BOUND, FineMonoid, MonoidHom, groupify, saturate, sharpen
from .oracles import coset_cokernel, determinantal_cokernel


class DomainError(Exception):
    def __init__(self, message: str, pos=None):
        where = f"{pos.line}:{pos.column}: " if pos is not None and pos.line else ""
        super().__init__(f"{where}{message}")


@dataclass
class ChartSet:
    base: FineMonoid
    members: tuple


@dataclass
class Workspace:
    """Named objects built from the declarations of a script."""

    objects: dict = field(default_factory=dict)
    kinds: dict = field(default_factory=dict)
    order: list = field(default_factory=list)

    @classmethod
    def from_script(cls, script: Script) -> Workspace:
        ws = cls()
        for s in script.declarations():
            try:
                ws._add(s)
            except (ValueError, ArithmeticError) as e:
                raise DomainError(str(e), s.pos) from e
        return ws

    def _add(self, s):
        obj = self.objects
        if isinstance(s, MonoidDecl):
            value, kind = FineMonoid(FGAbelianGroup(s.rank, s.torsion), s.gens), "monoid"
        elif isinstance(s, HomDecl):
            value = MonoidHom.from_assignment(obj[s.source], obj[s.target], s.pairs)
            kind = "hom"
        elif isinstance(s, TupleDecl):
            base = obj[s.base]
            members = []
            for m in s.members:
                x = obj[m]
                members.append(PMonoid(base, x.target, x) if isinstance(x, MonoidHom) else PMonoid(base, x))
            value, kind = ChartSet(base, tuple(members)), "tuple"
        elif isinstance(s, ChartDecl):
            u, cy, cx, phi = obj[s.u], obj[s.cy], obj[s.cx], obj[s.phi]
            expect = {"u": (s.base, s.chart, u), "cY": (s.base, s.my, cy), "cX": (s.chart, s.mx, cx),
                      "phi": (s.my, s.mx, phi)}
            for label, (a, b, h) in expect.items():
                if h.source != obj[a] or h.target != obj[b]:
                    raise ValueError(f"{label} must go from {a} to {b}")
            value, kind = ChartDatum(u, cy, cx, phi, s.char), "chart"
        self.objects[s.name] = value
        self.kinds[s.name] = kind
        self.order.append(s.name)

    def pick(self, name: str | None, kinds: tuple) -> tuple[str, object]:
        if name is not None:
            if name not in self.objects:
                raise DomainError(f"no object named {name!r}")
            if self.kinds[name] not in kinds:
                raise DomainError(f"{name!r} is a {self.kinds[name]}, expected {' or '.join(kinds)}")
            return name, self.objects[name]
        for n in reversed(self.order):
            if self.kinds[n] in kinds:
                return n, self.objects[n]
        raise DomainError(f"the script declares no {' or '.join(kinds)}")


# -- operations ---------------------------------------------------------------------------------

@dataclass
class Options:
    split: int | None = None
    char: int | None = None
    bound: int = DEFAULT_BOUND
    point: tuple | None = None
    regular: bool = False
    seed: int = 0
    exact: bool = False


@dataclass
class Outcome:
    """A command result: text lines, a structured tree and optionally a dot drawing."""

    text: list
    tree: dict
    dot: str | None = None
    ok: bool = True


TARGETS = {
    "faces": ("monoid",), "spec": ("monoid",), "sharpen": ("monoid",), "saturate": ("monoid",),
    "units": ("monoid",), "gp": ("monoid",), "snf": ("hom", "monoid"), "membership": ("monoid",),
    "join": ("tuple",), "facelem-check": ("tuple",), "groupoid-verify": ("tuple",),
    "rel-char": ("chart",), "neat-check": ("chart",), "neat-construct": ("chart",),
    "smooth-check": ("hom", "chart"), "etale-check": ("hom", "chart"), "criterion-report": ("chart",),
    "rank": ("monoid",),
}


def _flags_report(flags: dict, verdict: str, ok: bool, lines: list) -> Outcome:
    return Outcome(lines, ser.report_tree(flags, verdict), ok=ok)


def _monoid_lines(m: FineMonoid) -> list[str]:
    gens = " ".join(str(g) for g in m.generators) or "(none)"
    return [f"in {m.ambient}", f"gens {gens}"]


def _char(opts: Options, default: int = 0) -> int:
    return default if opts.char is None else opts.char


def execute(command: str, name: str, value, opts: Options) -> Outcome:
    if command == "faces":
        fs = list(value.faces)
        lines = [f"{len(fs)} faces"] + ["{" + ", ".join(str(g) for g in f.generators) + "}" for f in fs]
        return Outcome(lines, ser.faces_tree(value), ser.faces_dot(value, name))
    if command == "spec":
        x = spec(value)
        lines = [f"{len(x.points)} points, {len(x.covers())} covers"]
        lines += [f"{ser.point_name(p)}: stalk gp {groupify(x.stalks[p])}" for p in x.canonical_order()]
        return Outcome(lines, ser.fan_tree(x), ser.fan_dot(x, name))
    if command == "sharpen":
        bar = sharpen(value)[0]
        return Outcome(_monoid_lines(bar), ser.monoid_tree(bar))
    if command == "saturate":
        sat = saturate(value, opts.bound)
        return Outcome(_monoid_lines(sat), ser.monoid_tree(sat))
    if command == "units":
        u = value.units
        gens = " ".join(str(g) for g in u.generators) or "(none)"
        return Outcome([f"unit group {groupify(u.monoid)}", f"gens {gens}"], ser.monoid_tree(u.monoid))
    if command == "gp":
        g = groupify(value)
        return Outcome([str(g)], ser.group_tree(g))
    if command == "rank":
        r = gp_rank(value)
        return _flags_report({"rank": r}, str(r), True, [str(r)])
    if command == "snf":
        if isinstance(value, MonoidHom):
            a = value.gp_map.matrix
        else:
            a = IntMatrix.from_columns(value.generators, value.ambient.dim) if value.generators \
                else IntMatrix.zeros(value.ambient.dim, 0)
        u, d, v = smith_normal_form(a)
        lines = [f"D = {d.tolist()}", f"U = {u.tolist()}", f"V = {v.tolist()}"]
        return Outcome(lines, {"kind": "snf", "U": u.tolist(), "D": d.tolist(), "V": v.tolist()})
    if command == "membership":
        if opts.point is None:
            raise DomainError("membership needs a point")
        if len(opts.point) != value.ambient.dim:
            raise DomainError(f"point {opts.point} does not live in {value.ambient}")
        r = value.membership(opts.point, opts.bound)
        line = f"{r.status}" + (f" certificate {r.certificate}" if r.certificate else "")
        return Outcome([line], {"kind": "membership", "element": list(opts.point), "status": r.status,
                                "certificate": list(r.certificate) if r.certificate else None,
                                "bound": r.bound}, ok=r.status != "unknown")
    if command == "join":
        j = join(value.members)
        lines = [f"{len(j.joint_faces)} joint faces"] + [str(jf.faces) for jf in j.joint_faces]
        return Outcome(lines, ser.fan_tree(j.fan), ser.fan_dot(j.fan, name))
    if command == "facelem-check":
        n = len(value.members) - 1
        splits = [opts.split] if opts.split is not None else list(range(n + 1))
        results = {l: facelem_check(value.members, l) for l in splits}
        ok = all(r.passed for r in results.values())
        lines = [f"{'PASS' if r.passed else 'FAIL'} split {l}: witness on {r.points} points"
                 + ("" if r.canonical_iso else " (non-canonical)") for l, r in results.items()]
        flags = {f"split {l}": r.passed for l, r in results.items()}
        return _flags_report(flags, "PASS" if ok else "FAIL", ok, lines)
    if command == "groupoid-verify":
        rep = verify_groupoid(build_truncation(value.base, value.members))
        ax = rep.axioms()
        lines = [f"{'PASS' if v else 'FAIL'} {k}" for k, v in ax.items()]
        lines.append(f"scope: {rep.scope}")
        if rep.simplicial_failures:
            lines.append("failed identities: " + ", ".join(rep.simplicial_failures))
        return _flags_report(dict(ax), "PASS" if rep.passed else "FAIL", rep.passed, lines)
    if command in ("smooth-check", "etale-check"):
        if isinstance(value, ChartDatum):
            u, p = value.u, _char(opts, value.residue_char)
        else:
            u, p = value, _char(opts)
        if command == "etale-check":
            ok = log_etale_condition(u, p)
            c = cokernel(u.gp_map)
            text = f"{'PASS' if ok else 'FAIL'}: cokernel {c}, kernel {u.gp_map.kernel_presentation().group}, p={p}"
            return _flags_report({"etale": ok, "p": p}, text, ok, [text])
        r = log_smooth_condition(u, p)
        lines = [r.message, f"strict {r.strict}, torsion reading {r.kato}"]
        if r.discrepancy:
            lines.append("discrepancy: cokernel is infinite, the two readings differ in scope")
        flags = {"strict": r.strict, "kato": r.kato, "discrepancy": r.discrepancy, "p": p,
                 "cokernel": str(r.cokernel)}
        return _flags_report(flags, r.message, r.kato, lines)
    d = value if opts.char is None else value.with_char(opts.char)
    if command == "rel-char":
        rc = rel_char(d)
        lines = [f"gp {rc.gp}"] + _monoid_lines(rc.monoid) + [f"sharpened gens {len(rc.sharpened.generators)}"]
        return Outcome(lines, {"kind": "list", "items": [ser.monoid_tree(rc.monoid), ser.group_tree(rc.gp),
                                                         ser.monoid_tree(rc.sharpened)]})
    if command == "neat-check":
        r = neatness_check(d, opts.exact)
        text = "PASS: neat" if r.neat else "FAIL: " + "; ".join(r.diagnostics)
        flags = {"neat": r.neat, "injective": r.injective, "chart cokernel": str(r.chart_cokernel),
                 "relative cokernel": str(r.rel_cokernel)}
        return _flags_report(flags, text, r.neat, [text] + [f"note: {n}" for n in d.notes])
    if command == "neat-construct":
        nd = construct_neat_chart(d)
        r = neatness_check(nd)
        lines = ["new chart monoid"] + _monoid_lines(nd.Q) + [f"neat {r.neat}"]
        return Outcome(lines, {"kind": "list", "items": [ser.hom_tree(nd.u), ser.hom_tree(nd.cX)]}, ok=r.neat)
    if command == "criterion-report":
        r = criterion_report(d, opts.regular)
        flags = {"injective": r.injective, "torsion order": r.torsion_order,
                 "torsion invertible": r.torsion_invertible, "neat": r.neat,
                 "underlying regular": r.underlying_regular, "p": r.p}
        lines = [f"{k}: {v}" for k, v in flags.items()] + [r.verdict]
        return _flags_report(flags, r.verdict, r.combinatorial, lines)
    raise DomainError(f"unknown command {command!r}")


def check_snf(seed: int, count: int = 1000) -> Outcome:
    """Cross-check cokernels against the determinantal and coset oracles on random matrices."""
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        m, n = rng.randint(1, 3), rng.randint(1, 3)
        rows = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)]
        h = GroupHom.between(FGAbelianGroup.free(n), FGAbelianGroup.free(m), IntMatrix.from_rows(rows, n))
        c = cokernel(h)
        if c != determinantal_cokernel(rows) or c != coset_cokernel(rows):
            bad += 1
    text = f"{'PASS' if not bad else 'FAIL'}: {count - bad}/{count} cokernels agree (seed {seed})"
    return _flags_report({"agree": count - bad, "total": count, "seed": seed}, text, not bad, [text])


# -- driver -------------------------------------------------------------------------------------

def render(command: str, out: Outcome, fmt: str) -> str:
    if fmt == "structured":
        return json.dumps(ser.document(command, out.tree), indent=2, sort_keys=True) + "\n"
    if fmt == "dot":
        if out.dot is None:
            raise DomainError(f"{command} has no diagram output")
        return out.dot
    return "".join(line + "\n" for line in out.text)


def run(script: Script, command: str, opts: Options, name: str | None = None) -> list[tuple[str, Outcome]]:
    """Run ``command`` on the named object, or every matching script command.

    ``command == "run"`` executes all commands listed in the script.
    """
    ws = Workspace.from_script(script)
    jobs = []
    listed = [c for c in script.commands() if command in ("run", c.command)]
    if listed and name is None:
        jobs = [(c.command, c.target, c.arg, c.pos) for c in listed]
    elif command == "run":
        raise DomainError("the script lists no commands")
    else:
        jobs = [(command, name, None, None)]
    results = []
    for cmd, target, arg, pos in jobs:
        target, value = ws.pick(target, TARGETS[cmd])
        o = opts if arg is None else Options(**{**opts.__dict__, "point": arg})
        try:
            results.append((f"{cmd} {target}", execute(cmd, target, value, o)))
        except DomainError:
            raise
        except (ValueError, ArithmeticError) as e:
            raise DomainError(str(e), pos) from e
    return results


def _point(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.strip("()").split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer vector: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="katofan", description="Fine monoids, Kato fans and chart arithmetic.")
    ap.add_argument("command", choices=COMMANDS + ("run", "check-snf", "parse"))
    ap.add_argument("file", nargs="?", help=".kf script (not needed for check-snf)")
    ap.add_argument("--name", help="object to operate on (default: the last suitable declaration)")
    ap.add_argument("--split", type=int, help="split index for facelem-check (default: all)")
    ap.add_argument("--char", type=int, help="residue characteristic, 0 or a prime")
    ap.add_argument("--bound", type=int, default=DEFAULT_BOUND, help=f"search bound (default {DEFAULT_BOUND})")
    ap.add_argument("--point", type=_point, help="element for membership, e.g. 3,4")
    ap.add_argument("--regular", action="store_true", help="declare the underlying morphism regular")
    ap.add_argument("--exact", action="store_true", help="neat-check also requires the chart to be exact")
    ap.add_argument("--format", choices=("text", "structured", "dot"), default="text")
    ap.add_argument("--seed", type=int, default=0, help="seed for check-snf (default 0)")
    ap.add_argument("--count", type=int, default=1000, help="number of matrices for check-snf")
    ap.add_argument("--out", help="write output here instead of stdout")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    if args.char is not None and args.char != 0 and not (
            args.char > 1 and all(args.char % k for k in range(2, int(args.char ** 0.5) + 1))):
        print(f"katofan: --char must be 0 or a prime, got {args.char}", file=sys.stderr)
        return 2
    opts = Options(args.split, args.char, args.bound, args.point, args.regular, args.seed, args.exact)
    try:
        if args.command == "check-snf":
            results = [("check-snf", check_snf(args.seed, args.count))]
        else:
            if args.file is None:
                print("katofan: a script file is required", file=sys.stderr)
                return 2
            with open(args.file, encoding="utf-8") as fh:
                script = parse(fh.read())
            if args.command == "parse":
                from .dsl import unparse
                text = unparse(script)
                _write(args.out, text)
                return 0
            results = run(script, args.command, opts, args.name)
        text = "".join(render(cmd, o, args.format) for cmd, o in results)
    except ParseError as e:
        print(f"{args.file}:{e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"katofan: {e}", file=sys.stderr)
        return 2
    except DomainError as e:
        print(f"katofan: {e}", file=sys.stderr)
        return 1
    _write(args.out, text)
    return 0


def _write(path: str | None, text: str):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
