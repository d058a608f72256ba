"""Text formats: formulas, flow graphs, simulation maps and a small imperative language.

Program variables are integers at the surface.  Strict comparisons are
tightened once, here: after scaling to integer coefficients ``t > 0`` becomes
``t - 1 >= 0``, and ``a != b`` splits into ``a <= b - 1 | a >= b + 1``.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from math import lcm
from typing import List, Optional, Sequence, Union

from .flowgraph import FlowGraph
from .polyhedra import EQ, GEQ, Constraint, Polyhedron
from .ratlin import AffineTerm, Substitution, Var
from .transition import TransitionFormula, primes, tf_plus


class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + msg)
        self.line, self.col = line, col


# ---------------------------------------------------------------------------
# tokens

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|\#[^\n]*|//[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*'?)
  | (?P<op>:=|->|\+\+|--|\+=|-=|==|!=|<=|>=|&&|\|\||[-+*/()<>=;{}&|!:,])
""", re.VERBOSE)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Tok]:
    out, line, start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind != "ws":
            out.append(Tok(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(Tok("eof", "", line, pos - start + 1))
    return out


class Parser:
    def __init__(self, text: str, variables: Sequence[Var] = (), allow_primed: bool = True):
        self.toks = tokenize(text)
        self.i = 0
        self.vars = {v.name: v for v in variables}
        self.allow_primed = allow_primed

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def at(self, *texts) -> bool:
        return self.tok.text in texts and self.tok.kind in ("op", "id")

    def eat(self, text=None, kind=None) -> Tok:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = text if text is not None else kind
            raise self.error(f"expected {want!r}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def done(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")

    # -- affine expressions

    def variable(self, tok: Tok) -> Var:
        name = tok.text
        primed = name.endswith("'")
        base = name[:-1] if primed else name
        if base not in self.vars:
            raise self.error(f"undeclared variable {base!r}", tok)
        if primed and not self.allow_primed:
            raise self.error("primed variables are not allowed here", tok)
        v = self.vars[base]
        return v.prime() if primed else v

    def expr(self) -> AffineTerm:
        t = self.product()
        while self.at("+", "-"):
            op = self.eat().text
            u = self.product()
            t = t + u if op == "+" else t - u
        return t

    def product(self) -> AffineTerm:
        t = self.unary()
        while self.at("*", "/"):
            optok = self.eat()
            u = self.unary()
            if optok.text == "*":
                if not (t.is_constant() or u.is_constant()):
                    raise self.error("nonlinear product", optok)
                t = t * u
            else:
                if not u.is_constant() or u.constant == 0:
                    raise self.error("division only by nonzero constants", optok)
                t = t / u
        return t

    def unary(self) -> AffineTerm:
        if self.at("-"):
            self.eat()
            return -self.unary()
        if self.at("+"):
            self.eat()
            return self.unary()
        t = self.tok
        if t.kind == "num":
            self.eat()
            return AffineTerm.const(int(t.text))
        if t.kind == "id" and t.text not in KEYWORDS:
            self.eat()
            return AffineTerm.of_var(self.variable(t))
        if self.at("("):
            self.eat("(")
            e = self.expr()
            self.eat(")")
            return e
        raise self.error(f"expected an expression, found {t.text or 'end of input'!r}")

    # -- comparisons, returned in disjunctive normal form: list of lists of Constraint

    def comparison_chain(self) -> list:
        lhs = self.expr()
        if not self.at(*RELS):
            raise self.error("expected a comparison operator")
        dnf = [[]]
        while self.at(*RELS):
            rel = self.eat().text
            rhs = self.expr()
            dnf = [a + b for a in dnf for b in compare(lhs, rel, rhs)]
            lhs = rhs
        return dnf


KEYWORDS = {"true", "false", "vars", "while", "if", "else", "assume", "nondet", "skip", "graph", "root",
            "vmap", "sub"}
RELS = ("<=", ">=", "<", ">", "=", "==", "!=")


def _integral(t: AffineTerm) -> AffineTerm:
    den = 1
    for a in list(t.coeffs.values()) + [t.constant]:
        den = lcm(den, a.denominator)
    return t * den


def compare(lhs: AffineTerm, rel: str, rhs: AffineTerm) -> list:
    """A comparison as DNF over closed constraints, tightening strict ones over the integers."""
    d = rhs - lhs  # rel relates lhs to rhs; d >= 0 means lhs <= rhs
    if rel == "<=":
        return [[Constraint(d, GEQ)]]
    if rel == ">=":
        return [[Constraint(-d, GEQ)]]
    if rel in ("=", "=="):
        return [[Constraint(d, EQ)]]
    if rel == "<":
        return [[Constraint(_integral(d) - 1, GEQ)]]
    if rel == ">":
        return [[Constraint(_integral(-d) - 1, GEQ)]]
    if rel == "!=":
        return [[Constraint(_integral(d) - 1, GEQ)], [Constraint(_integral(-d) - 1, GEQ)]]
    raise ValueError(rel)


def negate_rel(rel: str) -> str:
    return {"<=": ">", ">=": "<", "<": ">=", ">": "<=", "=": "!=", "==": "!=", "!=": "="}[rel]


# ---------------------------------------------------------------------------
# formulas


def _formula_dnf(p: Parser) -> list:
    disjuncts = [_conjunct(p)]
    while p.at("|"):
        p.eat()
        disjuncts.append(_conjunct(p))
    return [d for part in disjuncts for d in part]


def _conjunct(p: Parser) -> list:
    dnf = _atom(p)
    while p.at("&"):
        p.eat()
        rhs = _atom(p)
        dnf = [a + b for a in dnf for b in rhs]
    return dnf


def _atom(p: Parser) -> list:
    if p.at("true"):
        p.eat()
        return [[]]
    if p.at("false"):
        p.eat()
        return []
    if p.at("("):
        # parenthesised sub-formula or parenthesised expression starting a comparison
        save = p.i
        p.eat("(")
        try:
            inner = _formula_dnf(p)
            p.eat(")")
            if not p.at(*RELS):
                return inner
        except ParseError:
            pass
        p.i = save
    return p.comparison_chain()


def parse_formula(text: str, variables: Sequence[Var]) -> TransitionFormula:
    X = tuple(Var(v) if isinstance(v, str) else v for v in variables)
    p = Parser(text, X)
    dnf = _formula_dnf(p)
    p.done()
    env = X + primes(X)
    return TransitionFormula(X, [Polyhedron(env, cs) for cs in dnf])


def parse_state_formula(text: str, variables: Sequence[Var]) -> list:
    """DNF (list of constraint lists) over unprimed variables."""
    X = tuple(Var(v) if isinstance(v, str) else v for v in variables)
    p = Parser(text, X, allow_primed=False)
    dnf = _formula_dnf(p)
    p.done()
    return dnf


def parse_term(text: str, variables: Sequence[Var]) -> AffineTerm:
    p = Parser(text, variables, allow_primed=False)
    t = p.expr()
    p.done()
    return t


# ---------------------------------------------------------------------------
# graphs and maps


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line


def parse_graph(text: str, name: Optional[str] = None) -> FlowGraph:
    gname, X, root = name, None, None
    vertices, edges = [], {}
    for n, line in _lines(text):
        words = line.split()
        if words[0] == "graph":
            if len(words) < 3 or (len(words) > 2 and words[2] != "vars"):
                raise ParseError("expected 'graph <name> vars <x> ...'", n, 1)
            gname = gname or words[1]
            X = tuple(Var(w) for w in words[3:])
            for w in words[3:]:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", w) or w in KEYWORDS:
                    raise ParseError(f"bad variable name {w!r}", n, line.find(w) + 1)
            continue
        if X is None:
            raise ParseError("missing 'graph <name> vars ...' header", n, 1)
        if words[0] == "root":
            if len(words) != 2:
                raise ParseError("expected 'root <vertex>'", n, 1)
            root = words[1]
            vertices.append(root)
            continue
        if words[0] == "vertex":
            vertices += words[1:]
            continue
        m = re.fullmatch(r"(\S+)\s*->\s*(\S+)\s*:(.*)", line)
        if not m:
            raise ParseError("expected an edge 'u -> v : formula'", n, 1)
        u, v, ftext = m.group(1), m.group(2), m.group(3)
        try:
            w = parse_formula(ftext, X)
        except ParseError as e:
            col = (e.col or 1) + m.start(3)
            raise ParseError(str(e).split(": ", 1)[-1], n, col) from None
        vertices += [u, v]
        edges[(u, v)] = tf_plus(edges[(u, v)], w) if (u, v) in edges else w
    if X is None:
        raise ParseError("empty graph file")
    if root is None:
        raise ParseError("missing 'root <vertex>' line")
    try:
        return FlowGraph(X, vertices, root, edges, gname or "g")
    except ValueError as e:
        raise ParseError(str(e)) from None


def parse_formula_file(text: str) -> TransitionFormula:
    """A ``vars x y`` line followed by a formula, which may span several lines."""
    X, body, start = None, [], 1
    for n, line in _lines(text):
        if X is None:
            words = line.split()
            if words[0] != "vars":
                raise ParseError("expected 'vars <x> ...' before the formula", n, 1)
            X = tuple(Var(w) for w in words[1:])
            start = n + 1
        else:
            body.append(line)
    if X is None:
        raise ParseError("empty formula file")
    if not body:
        raise ParseError("missing formula after the 'vars' line", start, 1)
    try:
        return parse_formula(" ".join(body), X)
    except ParseError as e:
        # columns refer to the joined text; report the first formula line
        raise ParseError(str(e).split(": ", 1)[-1], start, e.col) from None


def load_graph(text: str, name: Optional[str] = None) -> FlowGraph:
    """Graph text, or a program (first word ``vars``) translated to its flow graph."""
    first = next(_lines(text), (0, ""))[1].split()
    if first and first[0] == "vars":
        return program_to_flowgraph(parse_program(text), name or "program")
    return parse_graph(text, name)


def parse_map(text: str, G: FlowGraph, H: FlowGraph):
    from .simcheck import StutterMap
    h, subs = {}, {}
    for n, line in _lines(text):
        words = line.split()
        if words[0] == "vmap":
            m = re.fullmatch(r"vmap\s+(\S+)\s*->\s*(\S+)", line)
            if not m:
                raise ParseError("expected 'vmap <g-vertex> -> <h-vertex>'", n, 1)
            g, hv = m.group(1), m.group(2)
            if g not in G.vertices:
                raise ParseError(f"unknown source vertex {g!r}", n, line.find(g) + 1)
            if hv not in H.vertices:
                raise ParseError(f"unknown target vertex {hv!r}", n, line.rfind(hv) + 1)
            if g in h:
                raise ParseError(f"vertex {g!r} mapped twice", n, 1)
            h[g] = hv
        elif words[0] == "sub":
            m = re.fullmatch(r"sub\s+([A-Za-z_][A-Za-z0-9_]*)\s*:=(.*)", line)
            if not m:
                raise ParseError("expected 'sub <h-var> := <term>'", n, 1)
            y = Var(m.group(1))
            if y not in H.variables:
                raise ParseError(f"{y} is not a variable of {H.name}", n, 5)
            try:
                subs[y] = parse_term(m.group(2), G.variables)
            except ParseError as e:
                raise ParseError(str(e).split(": ", 1)[-1], n, (e.col or 1) + m.start(2)) from None
        else:
            raise ParseError(f"unknown directive {words[0]!r}", n, 1)
    missing = [v for v in G.vertices if v not in h]
    if missing:
        raise ParseError(f"vertex map is not total: no image for {missing}")
    missing_vars = [y for y in H.variables if y not in subs]
    if missing_vars:
        raise ParseError(f"substitution is not total: no term for {[str(y) for y in missing_vars]}")
    return StutterMap(h, Substitution(subs, G.variables, H.variables))


# ---------------------------------------------------------------------------
# programs


@dataclass
class Assign:
    var: Var
    expr: AffineTerm


@dataclass
class NondetAssign:
    var: Var


@dataclass
class Assume:
    cond: "Cond"


@dataclass
class If:
    cond: "Cond"
    then: list
    orelse: list = field(default_factory=list)


@dataclass
class While:
    cond: "Cond"
    body: list


@dataclass
class Cmp:
    lhs: AffineTerm
    rel: str
    rhs: AffineTerm


@dataclass
class BoolOp:
    op: str  # "and" | "or" | "not" | "true" | "false" | "nondet"
    args: tuple = ()


Cond = Union[Cmp, BoolOp]
Stmt = Union[Assign, NondetAssign, Assume, If, While]


@dataclass
class Program:
    variables: tuple
    body: list


def cond_dnf(c: Cond, positive: bool = True) -> list:
    """Disjunctive normal form of ``c`` (or of its negation) as lists of constraints."""
    if isinstance(c, Cmp):
        rel = c.rel if positive else negate_rel(c.rel)
        return compare(c.lhs, rel, c.rhs)
    if c.op == "nondet":
        return [[]]
    if c.op in ("true", "false"):
        return [[]] if (c.op == "true") == positive else []
    if c.op == "not":
        return cond_dnf(c.args[0], not positive)
    conj = (c.op == "and") == positive
    parts = [cond_dnf(a, positive) for a in c.args]
    if conj:
        out = [[]]
        for p in parts:
            out = [a + b for a in out for b in p]
        return out
    return [d for p in parts for d in p]


class _ProgramParser(Parser):
    def program(self) -> Program:
        self.eat("vars")
        names = []
        while self.tok.kind == "id" and not self.tok.text.endswith("'") and self.tok.text not in KEYWORDS:
            names.append(self.eat().text)
            if self.at(","):
                self.eat(",")
        if not names:
            raise self.error("expected at least one variable name")
        self.eat(";")
        X = tuple(Var(n) for n in names)
        self.vars = {v.name: v for v in X}
        body = []
        while self.tok.kind != "eof":
            body.append(self.stmt())
        return Program(X, body)

    def block(self) -> list:
        if self.at("{"):
            self.eat("{")
            out = []
            while not self.at("}"):
                if self.tok.kind == "eof":
                    raise self.error("unterminated block")
                out.append(self.stmt())
            self.eat("}")
            return out
        return [self.stmt()]

    def stmt(self):
        t = self.tok
        if self.at("while"):
            self.eat()
            self.eat("(")
            c = self.cond()
            self.eat(")")
            return While(c, self.block())
        if self.at("if"):
            self.eat()
            self.eat("(")
            c = self.cond()
            self.eat(")")
            then = self.block()
            orelse = []
            if self.at("else"):
                self.eat()
                orelse = self.block()
            return If(c, then, orelse)
        if self.at("assume"):
            self.eat()
            self.eat("(")
            c = self.cond()
            self.eat(")")
            self.eat(";")
            return Assume(c)
        if self.at("skip"):
            self.eat()
            self.eat(";")
            return Assume(BoolOp("true"))
        if t.kind == "id" and t.text not in KEYWORDS:
            if t.text.endswith("'"):
                raise self.error("primed variables are not allowed in programs")
            self.eat()
            v = self.variable(t)
            if self.at("++", "--"):
                op = self.eat().text
                self.eat(";")
                return Assign(v, AffineTerm.of_var(v) + (1 if op == "++" else -1))
            if self.at("+=", "-="):
                op = self.eat().text
                e = self.expr()
                self.eat(";")
                return Assign(v, AffineTerm.of_var(v) + e if op == "+=" else AffineTerm.of_var(v) - e)
            self.eat("=")
            if self.at("nondet"):
                self.eat()
                self.eat("(")
                self.eat(")")
                self.eat(";")
                return NondetAssign(v)
            e = self.expr()
            self.eat(";")
            return Assign(v, e)
        raise self.error(f"expected a statement, found {t.text or 'end of input'!r}")

    def cond(self) -> Cond:
        args = [self.cond_and()]
        while self.at("||"):
            self.eat()
            args.append(self.cond_and())
        return args[0] if len(args) == 1 else BoolOp("or", tuple(args))

    def cond_and(self) -> Cond:
        args = [self.cond_not()]
        while self.at("&&"):
            self.eat()
            args.append(self.cond_not())
        return args[0] if len(args) == 1 else BoolOp("and", tuple(args))

    def cond_not(self) -> Cond:
        if self.at("!"):
            self.eat()
            return BoolOp("not", (self.cond_not(),))
        if self.at("true", "false"):
            return BoolOp(self.eat().text)
        if self.at("nondet"):
            self.eat()
            self.eat("(")
            self.eat(")")
            return BoolOp("nondet")
        if self.at("("):
            save = self.i
            self.eat("(")
            try:
                c = self.cond()
                self.eat(")")
                if not self.at(*RELS):
                    return c
            except ParseError:
                pass
            self.i = save
        lhs = self.expr()
        if not self.at(*RELS):
            raise self.error("expected a comparison operator")
        rel = self.eat().text
        rhs = self.expr()
        c = Cmp(lhs, rel, rhs)
        while self.at(*RELS):
            rel2 = self.eat().text
            rhs2 = self.expr()
            c = BoolOp("and", (c, Cmp(rhs, rel2, rhs2)))
            rhs = rhs2
        return c


def parse_program(text: str) -> Program:
    p = _ProgramParser(text, allow_primed=False)
    return p.program()


def _frame(X, assigned) -> list:
    return [Constraint(AffineTerm.of_var(v.prime()) - AffineTerm.of_var(v), EQ) for v in X if v not in assigned]


def stmt_weight(X, s) -> TransitionFormula:
    env = X + primes(X)
    if isinstance(s, Assign):
        c = Constraint(AffineTerm.of_var(s.var.prime()) - s.expr, EQ)
        return TransitionFormula(X, [Polyhedron(env, [c] + _frame(X, {s.var}))])
    if isinstance(s, NondetAssign):
        return TransitionFormula(X, [Polyhedron(env, _frame(X, {s.var}))])
    raise TypeError(s)


def guard_weight(X, dnf) -> TransitionFormula:
    env = X + primes(X)
    return TransitionFormula(X, [Polyhedron(env, cs + _frame(X, set())) for cs in dnf])


class _Builder:
    """Vertices are numbered 1, 2, ... in creation order; each statement is one edge."""

    def __init__(self, X):
        self.X = X
        self.vertices = []
        self.edges = {}

    def new(self) -> str:
        v = str(len(self.vertices) + 1)
        self.vertices.append(v)
        return v

    def edge(self, u, v, w):
        self.edges[(u, v)] = tf_plus(self.edges[(u, v)], w) if (u, v) in self.edges else w

    def seq(self, stmts, src, dst=None):
        if not stmts:
            if dst is not None and dst != src:
                self.edge(src, dst, guard_weight(self.X, [[]]))
                return dst
            return src
        cur = src
        for k, s in enumerate(stmts):
            last = k == len(stmts) - 1
            cur = self.stmt(s, cur, dst if last else None)
        return cur

    def branch(self, dnf, body, src, dst):
        w = guard_weight(self.X, dnf)
        if not body:
            dst = dst if dst is not None else self.new()
            self.edge(src, dst, w)
            return dst
        v = self.new()
        self.edge(src, v, w)
        return self.seq(body, v, dst)

    def stmt(self, s, src, dst=None):
        if isinstance(s, (Assign, NondetAssign)):
            dst = dst if dst is not None else self.new()
            self.edge(src, dst, stmt_weight(self.X, s))
            return dst
        if isinstance(s, Assume):
            return self.branch(cond_dnf(s.cond), [], src, dst)
        if isinstance(s, If):
            end = self.branch(cond_dnf(s.cond, True), s.then, src, dst)
            self.branch(cond_dnf(s.cond, False), s.orelse, src, end)
            return end
        if isinstance(s, While):
            head = src
            if src == self.vertices[0]:
                # keep the root off every cycle
                head = self.new()
                self.edge(src, head, guard_weight(self.X, [[]]))
            self.branch(cond_dnf(s.cond, True), s.body, head, head)
            return self.branch(cond_dnf(s.cond, False), [], head, dst)
        raise TypeError(s)


def program_to_flowgraph(p: Program, name: str = "program", fuse: bool = False) -> FlowGraph:
    b = _Builder(p.variables)
    root = b.new()
    b.seq(p.body, root)
    # edges whose weight is false are never stored; keep only what the root reaches
    G = FlowGraph(p.variables, b.vertices, root, b.edges, name, check_reachable=False)
    keep = set(G.reachable())
    G = FlowGraph(p.variables, [v for v in b.vertices if v in keep], root,
                  {e: w for e, w in G.edges.items() if e[0] in keep and e[1] in keep}, name)
    return fuse_straight_lines(G) if fuse else G


def fuse_straight_lines(G: FlowGraph) -> FlowGraph:
    """Merge a vertex with exactly one predecessor and one successor (both different from it) into the edge."""
    from .transition import tf_compose
    edges = dict(G.edges)
    vertices = list(G.vertices)
    changed = True
    while changed:
        changed = False
        for v in vertices:
            if v == G.root:
                continue
            ins = [e for e in edges if e[1] == v]
            outs = [e for e in edges if e[0] == v]
            if len(ins) == 1 and len(outs) == 1 and ins[0][0] != v and outs[0][1] != v:
                (u, _), (_, w) = ins[0], outs[0]
                if u == w:
                    continue
                through = tf_compose(edges.pop(ins[0]), edges.pop(outs[0]))
                edges[(u, w)] = tf_plus(edges[(u, w)], through) if (u, w) in edges else through
                vertices.remove(v)
                changed = True
                break
    return FlowGraph(G.variables, vertices, G.root, edges, G.name)


# ---------------------------------------------------------------------------
# random formulas


@dataclass(frozen=True)
class RandomFormulaSpec:
    nvars: int = 2
    max_disjuncts: int = 2
    max_constraints: int = 4
    coeff: int = 3
    seed: int = 0
    eq_prob: float = 0.25
    fixed_constraints: Optional[int] = None

    def __post_init__(self):
        if not 1 <= self.nvars <= 3 or self.max_disjuncts > 2 or self.max_constraints > 4:
            raise ValueError("random formulas use at most 3 variables, 2 disjuncts and 4 constraints")


VAR_NAMES = ("x", "y", "z")


def random_constraint(rng: random.Random, env, coeff=3, eq_prob=0.25, density=0.6) -> Constraint:
    while True:
        cs = {v: rng.randint(-coeff, coeff) for v in env if rng.random() < density}
        if any(cs.values()):
            break
    t = AffineTerm(cs, rng.randint(-coeff, coeff))
    return Constraint(t, EQ if rng.random() < eq_prob else GEQ)


def gen_random_formula(spec: RandomFormulaSpec, rng: Optional[random.Random] = None) -> TransitionFormula:
    rng = rng or random.Random(spec.seed)
    X = tuple(Var(n) for n in VAR_NAMES[:spec.nvars])
    env = X + primes(X)
    ds = []
    for _ in range(rng.randint(1, spec.max_disjuncts)):
        m = spec.fixed_constraints if spec.fixed_constraints is not None else rng.randint(min(1, spec.max_constraints), spec.max_constraints)
        ds.append(Polyhedron(env, [random_constraint(rng, env, spec.coeff, spec.eq_prob) for _ in range(m)]))
    return TransitionFormula(X, ds)
