"""The ``.kf`` script language.

Grammar (EBNF)::

    script    = { statement } ;
    statement = monoid | hom | tuple | chart | command ;
    monoid    = "monoid" NAME "in" ambient "{" "gens" { vector } "}" ;
    ambient   = "0" | summand { "+" summand } ;
    summand   = "Z" [ "^" INT ] | "Z" "/" INT ;
    hom       = "hom" NAME ":" NAME "->" NAME "{" { "gen" vector "->" vector } "}" ;
    tuple     = "tuple" NAME "=" "(" NAME { "," NAME } ")" "over" NAME ;
    chart     = "chart" NAME "{" "base" NAME "chart" NAME "via" NAME
                "stalks" NAME NAME "via" NAME NAME "phi" NAME "char" INT "}" ;
    command   = COMMAND NAME [ vector ] ;
    vector    = "(" [ INT { "," INT } ] ")" ;

``#`` starts a comment running to the end of the line.  A tuple member is
either a monoid (over the trivial base) or a hom from the base.  The free
summands of an ambient group come before the torsion summands.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

COMMANDS = (
    "faces", "spec", "sharpen", "saturate", "units", "gp", "snf", "membership", "join",
    "facelem-check", "groupoid-verify", "rel-char", "neat-check", "neat-construct",
    "smooth-check", "etale-check", "criterion-report", "rank",
)
KEYWORDS = {"monoid", "in", "gens", "hom", "gen", "tuple", "over", "chart", "base", "via",
            "stalks", "phi", "char"}


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, column: int = 0, expected: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.expected = expected
        where = f"{line}:{column}: " if line else ""
        tail = f" (expected {expected})" if expected else ""
        super().__init__(f"{where}{message}{tail}")


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, INT, SYM, EOF
    text: str
    line: int
    column: int


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<arrow>->)
  | (?P<int>-?\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*(?:-[A-Za-z0-9_']+)*)
  | (?P<sym>[{}(),:=^/+])
""", re.VERBOSE)


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        elif kind != "ws":
            out.append(Token({"int": "INT", "name": "NAME"}.get(kind, "SYM"), s, line, col))
            col += len(s)
        else:
            col += len(s)
        pos = m.end()
    out.append(Token("EOF", "", line, col))
    return out


# -- syntax tree -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Pos:
    line: int
    column: int


def _pos(t: Token) -> Pos:
    return Pos(t.line, t.column)


@dataclass(frozen=True)
class MonoidDecl:
    name: str
    rank: int
    torsion: tuple
    gens: tuple
    pos: Pos = field(default=Pos(0, 0), compare=False)


@dataclass(frozen=True)
class HomDecl:
    name: str
    source: str
    target: str
    pairs: tuple
    pos: Pos = field(default=Pos(0, 0), compare=False)
    pair_pos: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class TupleDecl:
    name: str
    members: tuple
    base: str
    pos: Pos = field(default=Pos(0, 0), compare=False)


@dataclass(frozen=True)
class ChartDecl:
    name: str
    base: str
    chart: str
    u: str
    my: str
    mx: str
    cy: str
    cx: str
    phi: str
    char: int
    pos: Pos = field(default=Pos(0, 0), compare=False)


@dataclass(frozen=True)
class Command:
    command: str
    target: str
    arg: tuple | None = None
    pos: Pos = field(default=Pos(0, 0), compare=False)


@dataclass(frozen=True)
class Script:
    statements: tuple

    def declarations(self):
        return [s for s in self.statements if not isinstance(s, Command)]

    def commands(self):
        return [s for s in self.statements if isinstance(s, Command)]

    def find(self, name: str):
        return next((s for s in self.declarations() if s.name == name), None)


# -- parser ------------------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, message, expected=None, tok=None):
        t = tok or self.tok
        raise ParseError(message, t.line, t.column, expected)

    def take(self, text=None, kind=None) -> Token:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            shown = t.text or "end of input"
            self.fail(f"unexpected {shown!r}", repr(text) if text else kind)
        self.i += 1
        return t

    def name(self) -> Token:
        t = self.tok
        if t.kind != "NAME" or t.text in KEYWORDS:
            self.fail(f"unexpected {t.text or 'end of input'!r}", "a name")
        self.i += 1
        return t

    def integer(self) -> int:
        return int(self.take(kind="INT").text)

    def vector(self) -> tuple:
        start = self.take("(")
        vals = []
        if self.tok.text != ")":
            vals.append(self.integer())
            while self.tok.text == ",":
                self.take(",")
                vals.append(self.integer())
        self.take(")")
        return tuple(vals), start

    def ambient(self):
        if self.tok.kind == "INT" and self.tok.text == "0":
            self.take()
            return 0, ()
        rank, torsion = 0, []
        while True:
            z = self.take("Z")
            if self.tok.text == "/":
                self.take("/")
                d = self.integer()
                if d < 2:
                    self.fail(f"torsion order {d} must be at least 2", tok=z)
                if torsion and d % torsion[-1]:
                    self.fail(f"torsion orders must divide each other in turn: {torsion[-1]} does not divide {d}",
                              tok=z)
                torsion.append(d)
            else:
                if torsion:
                    self.fail("free summands must come before torsion summands", tok=z)
                if self.tok.text == "^":
                    self.take("^")
                    k = self.integer()
                    if k < 0:
                        self.fail("negative rank", tok=z)
                    rank += k
                else:
                    rank += 1
            if self.tok.text != "+":
                return rank, tuple(torsion)
            self.take("+")

    def statement(self):
        t = self.tok
        if t.text == "monoid":
            self.take()
            name = self.name().text
            self.take("in")
            rank, torsion = self.ambient()
            self.take("{")
            self.take("gens")
            gens = []
            while self.tok.text == "(":
                v, vt = self.vector()
                if len(v) != rank + len(torsion):
                    raise ParseError(f"arity mismatch: {v} has {len(v)} entries, ambient has "
                                     f"{rank + len(torsion)}", vt.line, vt.column)
                gens.append(v)
            self.take("}")
            return MonoidDecl(name, rank, torsion, tuple(gens), _pos(t))
        if t.text == "hom":
            self.take()
            name = self.name().text
            self.take(":")
            src = self.name().text
            self.take("->")
            dst = self.name().text
            self.take("{")
            pairs, where = [], []
            while self.tok.text == "gen":
                self.take("gen")
                a, at = self.vector()
                self.take("->")
                b, bt = self.vector()
                pairs.append((a, b))
                where.append((_pos(at), _pos(bt)))
            self.take("}")
            return HomDecl(name, src, dst, tuple(pairs), _pos(t), tuple(where))
        if t.text == "tuple":
            self.take()
            name = self.name().text
            self.take("=")
            self.take("(")
            members = [self.name().text]
            while self.tok.text == ",":
                self.take(",")
                members.append(self.name().text)
            self.take(")")
            self.take("over")
            base = self.name().text
            return TupleDecl(name, tuple(members), base, _pos(t))
        if t.text == "chart":
            self.take()
            name = self.name().text
            self.take("{")
            self.take("base")
            base = self.name().text
            self.take("chart")
            q = self.name().text
            self.take("via")
            u = self.name().text
            self.take("stalks")
            my, mx = self.name().text, self.name().text
            self.take("via")
            cy, cx = self.name().text, self.name().text
            self.take("phi")
            phi = self.name().text
            self.take("char")
            p = self.integer()
            self.take("}")
            return ChartDecl(name, base, q, u, my, mx, cy, cx, phi, p, _pos(t))
        if t.kind == "NAME" and t.text in COMMANDS:
            self.take()
            target = self.name().text
            arg = None
            if self.tok.text == "(":
                arg = self.vector()[0]
            return Command(t.text, target, arg, _pos(t))
        self.fail(f"unexpected {t.text or 'end of input'!r}", "a declaration or command")

    def script(self) -> Script:
        out = []
        while self.tok.kind != "EOF":
            out.append(self.statement())
        return Script(tuple(out))


_KINDS = {MonoidDecl: "monoid", HomDecl: "hom", TupleDecl: "tuple", ChartDecl: "chart"}


def _resolve(script: Script):
    """Names unique, references declared earlier with the right kind, vector arities."""
    env: dict[str, object] = {}

    def need(name, kinds, where: Pos):
        decl = env.get(name)
        if decl is None:
            raise ParseError(f"unresolved reference {name!r}", where.line, where.column)
        if _KINDS[type(decl)] not in kinds:
            raise ParseError(f"{name!r} is a {_KINDS[type(decl)]}, expected {' or '.join(kinds)}",
                             where.line, where.column)
        return decl

    def dim(m: MonoidDecl):
        return m.rank + len(m.torsion)

    for s in script.statements:
        if isinstance(s, Command):
            need(s.target, ("monoid", "hom", "tuple", "chart"), s.pos)
            continue
        if s.name in env:
            raise ParseError(f"duplicate name {s.name!r}", s.pos.line, s.pos.column)
        if isinstance(s, HomDecl):
            src = need(s.source, ("monoid",), s.pos)
            dst = need(s.target, ("monoid",), s.pos)
            where = s.pair_pos or [(s.pos, s.pos)] * len(s.pairs)
            for (a, b), (pa, pb) in zip(s.pairs, where):
                if len(a) != dim(src):
                    raise ParseError(f"arity mismatch: {a} does not live in the ambient of {s.source}",
                                     pa.line, pa.column)
                if len(b) != dim(dst):
                    raise ParseError(f"arity mismatch: {b} does not live in the ambient of {s.target}",
                                     pb.line, pb.column)
        elif isinstance(s, TupleDecl):
            base = need(s.base, ("monoid",), s.pos)
            for m in s.members:
                decl = need(m, ("monoid", "hom"), s.pos)
                if isinstance(decl, HomDecl) and decl.source != base.name:
                    raise ParseError(f"hom {m!r} does not start at the base {base.name!r}",
                                     s.pos.line, s.pos.column)
        elif isinstance(s, ChartDecl):
            for n in (s.base, s.chart, s.my, s.mx):
                need(n, ("monoid",), s.pos)
            for n in (s.u, s.cy, s.cx, s.phi):
                need(n, ("hom",), s.pos)
        env[s.name] = s


def parse(text: str) -> Script:
    script = _Parser(text).script()
    _resolve(script)
    return script


# -- unparser ---------------------------------------------------------------------------------

def _vec(v) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


def format_ambient(rank: int, torsion) -> str:
    parts = []
    if rank:
        parts.append("Z" if rank == 1 else f"Z^{rank}")
    parts += [f"Z/{d}" for d in torsion]
    return " + ".join(parts) or "0"


def unparse_statement(s) -> str:
    if isinstance(s, MonoidDecl):
        gens = " ".join(_vec(g) for g in s.gens)
        return f"monoid {s.name} in {format_ambient(s.rank, s.torsion)} {{ gens {gens} }}".replace("gens  }", "gens }")
    if isinstance(s, HomDecl):
        body = " ".join(f"gen {_vec(a)} -> {_vec(b)}" for a, b in s.pairs)
        return f"hom {s.name} : {s.source} -> {s.target} {{ {body} }}".replace("{  }", "{ }")
    if isinstance(s, TupleDecl):
        return f"tuple {s.name} = ({', '.join(s.members)}) over {s.base}"
    if isinstance(s, ChartDecl):
        return (f"chart {s.name} {{ base {s.base} chart {s.chart} via {s.u} stalks {s.my} {s.mx} "
                f"via {s.cy} {s.cx} phi {s.phi} char {s.char} }}")
    if isinstance(s, Command):
        return f"{s.command} {s.target}" + (f" {_vec(s.arg)}" if s.arg is not None else "")
    raise TypeError(f"not a statement: {s!r}")


def unparse(script: Script) -> str:
    return "".join(unparse_statement(s) + "\n" for s in script.statements)
