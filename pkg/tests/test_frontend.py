import random
from fractions import Fraction
from pathlib import Path

import pytest

from oracles import grid
from robustapa.frontend import (Assign, Assume, Cmp, If, NondetAssign, ParseError, RandomFormulaSpec,
                                While, compare, fuse_straight_lines, gen_random_formula, load_graph,
                                parse_formula, parse_formula_file, parse_graph, parse_map, parse_program,
                                parse_term, program_to_flowgraph, stmt_weight)
from robustapa.polyhedra import EQ
from robustapa.ratlin import AffineTerm, var
from robustapa.transition import primes, tf_compose, tf_entails, tf_equiv, tf_one, tf_zero

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
x, y, i = var("x"), var("y"), var("i")
XY = (x, y)


def src(name):
    return (CORPUS / name).read_text()


# -- reference interpreter


def holds(c, s):
    if isinstance(c, Cmp):
        a, b = c.lhs.evaluate(s), c.rhs.evaluate(s)
        return {"<": a < b, "<=": a <= b, "=": a == b, "==": a == b, ">=": a >= b, ">": a > b, "!=": a != b}[c.rel]
    if c.op == "and":
        return all(holds(a, s) for a in c.args)
    if c.op == "or":
        return any(holds(a, s) for a in c.args)
    if c.op == "not":
        return not holds(c.args[0], s)
    if c.op == "nondet":
        return None
    return c.op == "true"


def run(program, state, rng, limit):
    """Execute, recording one (before, after) pair per assignment or condition test."""
    trace = []
    first = program.body[0] if program.body else None

    def act(before, after):
        trace.append((dict(before), dict(after)))
        if len(trace) >= limit:
            raise StopIteration

    def test(c, s):
        v = holds(c, s)
        return rng.random() < 0.5 if v is None else v

    def block(stmts, s):
        for st_ in stmts:
            s = stmt(st_, s)
        return s

    def stmt(st_, s):
        if isinstance(st_, Assign):
            t = dict(s)
            t[st_.var] = st_.expr.evaluate(s)
            act(s, t)
            return t
        if isinstance(st_, NondetAssign):
            t = dict(s)
            t[st_.var] = Fraction(rng.randint(-5, 5))
            act(s, t)
            return t
        if isinstance(st_, Assume):
            if not test(st_.cond, s):
                raise StopIteration
            act(s, s)
            return s
        if isinstance(st_, If):
            take = test(st_.cond, s)
            act(s, s)
            return block(st_.then if take else st_.orelse, s)
        if isinstance(st_, While):
            if st_ is first:
                act(s, s)  # entry edge keeping the root off the loop
            while True:
                take = test(st_.cond, s)
                act(s, s)
                if not take:
                    return s
                s = block(st_.body, s)
        raise TypeError(st_)

    try:
        block(program.body, state)
    except StopIteration:
        pass
    return trace


def follow(G, trace):
    """Root paths whose edges admit the recorded steps, one per reachable vertex."""
    frontier = {G.root: []}
    for before, after in trace:
        nxt = {}
        for u, path in frontier.items():
            for v in G.succ(u):
                if G.edges[(u, v)].contains(before, after):
                    nxt.setdefault(v, path + [(u, v)])
        frontier = nxt
        assert frontier, (before, after)
    return frontier


PROGRAMS = {
    "p1": src("p1.imp"),
    "p2": src("p2.imp"),
    "nested": src("nested.imp"),
    "sequential": src("sequential.imp"),
    "features": """vars x y;
        assume (x >= -5 && x <= 5);
        if (x > 0 || y == 3) { y = y - x; } else { x = -x; }
        while (x != 2 && x < 8) {
          if (nondet()) { x++; } else { x += 2; y = nondet(); }
          if (!(y <= 0)) { y -= 1; }
        }
    """,
}


@pytest.mark.parametrize("name", sorted(PROGRAMS))
def test_interpreter_agrees_with_graph(name):
    p = parse_program(PROGRAMS[name])
    G = program_to_flowgraph(p, name)
    rng = random.Random(name)
    for _ in range(20):
        s0 = {v: Fraction(rng.randint(-10, 10)) for v in p.variables}
        trace = run(p, s0, rng, 12)
        if not trace:
            continue
        for v, path in follow(G, trace).items():
            W = tf_one(G.variables)
            for e in path:
                W = tf_compose(W, G.edges[e])
            assert W.contains(trace[0][0], trace[-1][1])


# -- programs


def test_parse_programs():
    p1 = parse_program(src("p1.imp"))
    assert p1.variables == (i,)
    assert sum(isinstance(s, While) for s in p1.body) == 1
    p2 = parse_program(src("p2.imp"))
    loop = [s for s in p2.body if isinstance(s, While)][0]
    assert len(loop.body) == 2 and all(isinstance(s, Assign) for s in loop.body)
    assert parse_program("vars x;").body == []
    assert parse_program("vars x; while (x < 3) { }").body[0].body == []


def test_parse_errors_are_positioned():
    with pytest.raises(ParseError) as e:
        parse_program("vars x;\nx = y + 1;")
    assert e.value.line == 2 and e.value.col == 5
    with pytest.raises(ParseError) as e:
        parse_program("vars x;\nx = x * x;")
    assert e.value.line == 2
    with pytest.raises(ParseError):
        parse_program("vars x;\nx = (x + 1;")
    with pytest.raises(ParseError):
        parse_formula("x' = x +", [x])


def test_p1_graph_shape():
    G = program_to_flowgraph(parse_program(src("p1.imp")))
    assert len(G.vertices) == 4
    want = {("1", "2"): "i' = 1", ("2", "3"): "i <= 4 & i' = i", ("3", "2"): "i' = i + 1",
            ("2", "4"): "i >= 5 & i' = i"}
    assert set(G.edges) == set(want)
    for e, t in want.items():
        assert tf_equiv(G.edges[e], parse_formula(t, [i]))


def test_p2_graph_shape():
    G = program_to_flowgraph(parse_program(src("p2.imp")))
    assert len(G.vertices) == 6
    want = {("1", "2"): "x' = 1 & y' = y", ("2", "3"): "x' = x & y' = 0",
            ("3", "4"): "x <= 4 & x' = x & y' = y", ("4", "5"): "x' = x + 1 & y' = y",
            ("5", "3"): "x' = x & y' = y + x", ("3", "6"): "x >= 5 & x' = x & y' = y"}
    assert set(G.edges) == set(want)
    for e, t in want.items():
        assert tf_equiv(G.edges[e], parse_formula(t, XY))


def test_single_assignment():
    G = program_to_flowgraph(parse_program("vars x; x = 3;"))
    assert len(G.vertices) == 2 and len(G.edges) == 1


def test_fusion():
    G = program_to_flowgraph(parse_program("vars x y; x = 1; y = 2; x = x + y;"))
    F = fuse_straight_lines(G)
    assert len(F.vertices) == 2
    (w,) = F.edges.values()
    assert tf_equiv(w, parse_formula("x' = 3 & y' = 2", XY))
    assert program_to_flowgraph(parse_program(src("p2.imp")), fuse=True).vertices != G.vertices


def test_frame_condition():
    p = parse_program(PROGRAMS["features"] + "")
    X = p.variables
    for s in [Assign(x, AffineTerm.of_var(y) + 1), NondetAssign(y), Assign(y, AffineTerm.const(4))]:
        w = stmt_weight(X, s)
        for v in X:
            if v != s.var:
                assert tf_entails(w, parse_formula(f"{v}' = {v}", X))


@pytest.mark.parametrize("rel", ["<", "<=", "=", ">=", ">"])
def test_strict_tightening(rel):
    rng = random.Random(rel)
    for _ in range(30):
        lhs = AffineTerm({x: rng.randint(-3, 3), y: rng.randint(-3, 3)}, rng.randint(-5, 5))
        rhs = AffineTerm({x: rng.randint(-3, 3)}, Fraction(rng.randint(-9, 9), rng.choice([1, 2, 3])))
        dnf = compare(lhs, rel, rhs)
        assert all(c.relation in (EQ, ">=") for d in dnf for c in d)
        for s in grid(XY, -10, 10):
            a, b = lhs.evaluate(s), rhs.evaluate(s)
            want = {"<": a < b, "<=": a <= b, "=": a == b, ">=": a >= b, ">": a > b}[rel]
            got = any(all(c.holds(s) for c in d) for d in dnf)
            assert got == want


# -- formulas, graphs, maps


def test_parse_formula_examples():
    g2 = parse_formula("x < 5 & x' = x + 1 & y' = y + x + 1", XY)
    assert tf_equiv(g2, parse_formula("x <= 4 & x' = x + 1 & y' - y = x + 1", XY))
    assert parse_formula("false", XY).is_false()
    assert tf_equiv(parse_formula("false", XY), tf_zero(XY))
    assert tf_equiv(parse_formula("true", XY), parse_formula("x = x", XY))


def test_formula_files():
    F = parse_formula_file(src("g2.tf"))
    assert F.variables == XY
    assert parse_formula_file(src("false.tf")).is_false()
    with pytest.raises(ParseError):
        parse_formula_file("x' = x")
    with pytest.raises(ParseError):
        parse_formula_file("vars x\n")


def test_round_trip():
    rng = random.Random(17)
    spec = RandomFormulaSpec(nvars=3)
    X = (x, y, var("z"))
    for _ in range(100):
        F = gen_random_formula(spec, rng)
        G = parse_formula(str(F), X)
        assert tf_equiv(F, G)


def test_graph_and_map_errors():
    with pytest.raises(ParseError):
        parse_graph("root 1\n1 -> 2 : x' = x\n")
    with pytest.raises(ParseError) as e:
        parse_graph("graph g vars x\nroot 1\n1 -> 2 : x' = q\n")
    assert e.value.line == 3
    G, H = load_graph(src("p2.imp")), load_graph(src("p1.imp"))
    with pytest.raises(ParseError):
        parse_map("vmap 1 -> 1\nsub i := x\n", G, H)
    with pytest.raises(ParseError):
        parse_map(src("p2_to_p1.map").replace("sub i := x", "sub i := w"), G, H)
    with pytest.raises(ParseError):
        parse_map(src("p2_to_p1.map") + "frob\n", G, H)


def test_parse_term():
    assert parse_term("2*x - y/2 + 1", XY) == AffineTerm({x: 2, y: Fraction(-1, 2)}, 1)


# -- random formulas


def test_generator_determinism():
    spec = RandomFormulaSpec(seed=42)
    assert str(gen_random_formula(spec)) == str(gen_random_formula(spec))


def test_generator_without_constraints():
    F = gen_random_formula(RandomFormulaSpec(fixed_constraints=0))
    assert len(F.disjuncts) == 1 and not F.disjuncts[0].constraints
    F = gen_random_formula(RandomFormulaSpec(max_constraints=0))
    assert len(F.disjuncts) == 1 and not F.disjuncts[0].constraints


def test_generator_invariants():
    rng = random.Random(0)
    sat = 0
    for _ in range(200):
        F = gen_random_formula(RandomFormulaSpec(nvars=rng.randint(1, 3)), rng)
        env = F.variables + primes(F.variables)
        assert len(F.disjuncts) <= 2
        for P in F.disjuncts:
            assert P.env == env and not P.is_empty()
        sat += not F.is_false()
    assert 0 < sat <= 200


def test_generator_spec_limits():
    with pytest.raises(ValueError):
        RandomFormulaSpec(nvars=4)
