"""Acceptance gate: eight end-to-end criteria, each with its own time budget.

Run under pytest (one PASS/FAIL line per criterion is written to the terminal) or directly:
``python3 tests/test_acceptance.py``.
"""

import io
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from oracles import (X1, X2, compose_contains, cover_samples, extends_by_one, grid,  # noqa: E402
                     raw_formula)
from robustapa import cli  # noqa: E402
from robustapa.flowgraph import all_admissible_orders, eliminate, local_cycles, summarize  # noqa: E402
from robustapa.frontend import (RandomFormulaSpec, gen_random_formula, load_graph, parse_formula,  # noqa: E402
                                parse_map)
from robustapa.iterate import STARS, alpha_lra, alpha_pga, lift, star_combined  # noqa: E402
from robustapa.laws import LawReport, check_robustness, check_star_laws, simulation_instance  # noqa: E402
from robustapa.polyhedra import Polyhedron, eq, geq, leq, poly_project, uncovered_point  # noqa: E402
from robustapa.ratlin import AffineTerm, Substitution, var  # noqa: E402
from robustapa.simcheck import check_stutter_sim, verify_robustness  # noqa: E402
from robustapa.transition import (delta_var, is_simulation, tf_compose, tf_delta, tf_entails, tf_equiv,  # noqa: E402
                                  tf_one, tf_plus, tf_project, tf_rename, tf_subst)

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
x, y, i, k = var("x"), var("y"), var("i"), var("k")


def corpus(name):
    return load_graph((CORPUS / name).read_text(), name.split(".")[0])


def loop_body(G, header):
    """Self-loop weight left at ``header`` once the rest of its loop is eliminated."""
    for v in sorted(local_cycles(G, header) - {header}):
        G = eliminate(G, v)
    return G.edges[(header, header)]


def counted(X, text):
    """Parse a formula over X and a counter k, then quantify k away (rationally)."""
    return tf_project(parse_formula(text, tuple(X) + (k,)), X)


# -- 1. loop summary table


TABLE = {
    "p1.imp": dict(
        header="2", X=(i,),
        body="i < 5 & i' = i + 1",
        hull=lambda d: [geq(d[i], 1), leq(d[i], 1)],
        recurrence="i' = i + 1",
        pre=[leq(i, 4)], post=[leq(i.prime(), 5)],
        rec_k="k >= 0 & i' = i + k", guards="i < 5 & i' <= 5",
    ),
    "p2.imp": dict(
        header="3", X=(x, y),
        body="x < 5 & x' = x + 1 & y' = y + x + 1",
        hull=lambda d: [geq(d[x], 1), leq(d[x], 1), leq(d[y], 5)],
        recurrence="x' = x + 1 & y' <= y + 5",
        pre=[leq(x, 4)], post=[leq(x.prime(), 5)],
        rec_k="k >= 0 & x' = x + k & y' <= y + 5*k", guards="x < 5 & x' <= 5",
    ),
}


def criterion_1():
    notes = []
    for name, row in TABLE.items():
        X = row["X"]
        G = loop_body(corpus(name), row["header"])
        assert tf_equiv(G, parse_formula(row["body"], X)), f"{name}: loop body"
        D = tuple(delta_var(v) for v in X)
        assert tf_delta(G).equivalent(Polyhedron(D, row["hull"](dict(zip(X, D))))), f"{name}: delta hull"
        A = alpha_lra(G)
        assert tf_equiv(lift(A, A.formula.formula()), parse_formula(row["recurrence"], X)), f"{name}: recurrences"
        guards = alpha_pga(G).formula
        assert guards.pre_guard.equivalent(Polyhedron(X, row["pre"])), f"{name}: precondition"
        assert guards.post_guard.equivalent(Polyhedron(tuple(v.prime() for v in X), row["post"])), \
            f"{name}: postcondition"
        # the summary row, with k >= 1 => guards read as the operator's case split
        # k = 0 & X' = X  |  k >= 1 & recurrences & guards
        split = tf_plus(tf_one(X), counted(X, f"{row['rec_k']} & k >= 1 & {row['guards']}"))
        S = star_combined(G)
        assert tf_equiv(S, split), f"{name}: loop summary"
        # the printed row without the identity frame at k = 0 is weaker: S entails it, and the
        # two differ at most on the k = 0 slice
        literal = tf_plus(counted(X, f"{row['rec_k']} & k = 0"), split)
        assert tf_entails(S, literal) and tf_entails(literal, tf_plus(S, counted(X, f"{row['rec_k']} & k = 0")))
        notes.append(f"{name.split('.')[0]} rows ok" + ("" if tf_entails(literal, S) else " (k=0 frame kept)"))
    return ", ".join(notes)


# -- 2. the summary inherits the program relation


def criterion_2():
    g1 = parse_formula("i < 5 & i' = i + 1", [i])
    g2 = parse_formula("x < 5 & x' = x + 1 & y' = y + x + 1", (x, y))
    s1, s2 = star_combined(g1), star_combined(g2)
    sigma = Substitution({i: AffineTerm.of_var(x)}, (x, y), (i,))
    assert is_simulation(sigma, g2, g1)
    assert is_simulation(sigma, s2, s1), "[i -> x] is not a simulation between the summaries"
    shadow = tf_rename(tf_project(s2, [x]), {x: i})
    assert tf_equiv(shadow, s1), "projected and renamed summary differs"
    return f"G1 summary: {s1}"


# -- 3. order independence


def criterion_3():
    counts = []
    for name in ["p1.imp", "nested.imp", "sequential.imp"]:
        G = corpus(name)
        orders = list(all_admissible_orders(G))
        base = summarize(G, order=orders[0])
        for o in orders[1:]:
            S = summarize(G, order=o)
            for v in G.vertices:
                assert tf_equiv(S[v], base[v]), (name, o, v)
        counts.append(f"{name.split('.')[0]}:{len(orders)}")
    return "orders " + " ".join(counts)


# -- 4. robustness end to end


PAIRS = [("p2.imp", "p1.imp", "p2_to_p1.map"), ("phase_split.g", "phase_orig.g", "phase.map"),
         ("unroll.g", "unroll_orig.g", "unroll.map")]


def criterion_4():
    for g, h, m in PAIRS:
        G, H = corpus(g), corpus(h)
        res = verify_robustness(G, H, parse_map((CORPUS / m).read_text(), G, H))
        assert res, f"{g} -> {h}: {res}"
    return f"{len(PAIRS)} pairs verified"


# -- 5. iteration laws


def criterion_5(samples=200, seed=2024):
    rng = random.Random(seed)
    report = LawReport()
    for n in range(samples):
        spec = RandomFormulaSpec(nvars=n % 3 + 1, max_disjuncts=2, coeff=3)
        F = gen_random_formula(spec, rng)
        for name in sorted(STARS):
            check_star_laws(F, STARS[name], report, n, random.Random(seed * 1000 + n))
    assert report.ok, "\n".join(f.render() for f in report.failures[:5])
    return f"{samples} formulas x {len(STARS)} operators, {sum(report.checked.values())} entailment checks"


# -- 6. robustness of the lifted operators


def criterion_6(samples=100, seed=7):
    rng = random.Random(seed)
    report = LawReport()
    satisfiable = 0
    for n in range(samples):
        G, sigma, F = simulation_instance(rng, n % 3 + 1)
        satisfiable += not F.is_false()
        for name in sorted(STARS):
            check_robustness(G, sigma, F, STARS[name], report, n)
    assert report.ok, "\n".join(f.render() for f in report.failures[:5])
    return f"{samples} instances ({satisfiable} with satisfiable F) x {len(STARS)} operators"


# -- 7. polyhedral operations against grid oracles


def rand_poly(rng, vs, m, box=None, eq_prob=0.15):
    cons = []
    for _ in range(m):
        t = AffineTerm({v: rng.randint(-3, 3) for v in vs}, rng.randint(-4, 4))
        cons.append(eq(t, 0) if rng.random() < eq_prob else geq(t, 0))
    if box is not None:
        for v in vs:
            cons += [geq(v, -box), leq(v, box)]
    return Polyhedron(vs, cons)


def criterion_7():
    rng = random.Random(7)
    z = var("z")
    checked = 0
    # projection: 3 -> 2 and 2 -> 1 dimensions, membership over [-5,5]^d
    for vs, keep, free in [((x, y, z), (x, y), z), ((x, y), (x,), y)]:
        for _ in range(30):
            P = rand_poly(rng, list(vs), rng.randint(1, 5))
            Q = poly_project(P, set(keep))
            for pt in grid(keep, -5, 5):
                assert Q.contains(pt) == extends_by_one(P, pt, keep, free), (P, pt)
                checked += 1
    # composition: 50 random pairs per dimension, every pre/post pair of [-4,4]^|X|
    for X in (X1, X2):
        for _ in range(50):
            df, F = raw_formula(rng, X)
            dg, G = raw_formula(rng, X)
            FG = tf_compose(F, G)
            pts = list(grid(X, -4, 4))
            for pre in pts:
                for post in pts:
                    assert FG.contains(pre, post) == compose_contains(df, dg, X, pre, post), (F, G, pre, post)
                    checked += 1
    # coverage: 30 instances in two dimensions, grid [-6,6]^2 plus midpoints
    for _ in range(30):
        Q = rand_poly(rng, [x, y], rng.randint(0, 2), box=5)
        Ps = [rand_poly(rng, [x, y], rng.randint(1, 3), eq_prob=0.05) for _ in range(rng.randint(1, 4))]
        w = uncovered_point(Ps, Q)
        gap = [p for p in cover_samples(Q, [x, y]) if not any(P.contains(p) for P in Ps)]
        if w is None:
            assert not gap, (Ps, Q, gap[0])
        else:
            assert Q.contains(w) and not any(P.contains(w) for P in Ps)
        checked += 1
    return f"{checked} oracle comparisons"


# -- 8. negative controls


def criterion_8():
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(["summarize", str(CORPUS / "irreducible.g")], out, err)
    assert code == cli.BAD_INPUT and "--force" in err.getvalue(), "irreducible graph accepted"
    G, H = corpus("p2.imp"), corpus("p1.imp")
    m = parse_map((CORPUS / "p2_to_p1_broken.map").read_text(), G, H)
    res = check_stutter_sim(G, H, m)
    assert not res, "broken map accepted"
    u, v = res.edge
    pre, post = res.point
    assert G.edges[(u, v)].contains(pre, post)
    targets = []
    if (m.h[u], m.h[v]) in H.edges:
        targets.append(tf_subst(H.edges[(m.h[u], m.h[v])], m.f, G.variables))
    if m.h[u] == m.h[v]:
        targets.append(tf_subst(tf_one(H.variables), m.f, G.variables))
    assert not any(t.contains(pre, post) for t in targets), "reported point is not a counterexample"
    code = cli.main(["check-sim", str(CORPUS / "p2.imp"), str(CORPUS / "p1.imp"),
                     str(CORPUS / "p2_to_p1_broken.map")], io.StringIO(), io.StringIO())
    assert code == cli.REFUTED
    return f"irreducible rejected, broken map refuted at {u} -> {v}"


CRITERIA = [
    (1, "loop summary table", 5, criterion_1),
    (2, "overview summaries related by [i -> x]", 5, criterion_2),
    (3, "all admissible orders agree", 60, criterion_3),
    (4, "robustness verified on corpus pairs", 30, criterion_4),
    (5, "iteration laws, 200 formulas", 600, criterion_5),
    (6, "robustness under simulation, 100 instances", 600, criterion_6),
    (7, "projection, composition, coverage vs grid", 600, criterion_7),
    (8, "negative controls", 5, criterion_8),
]


def run_criterion(n):
    _, title, budget, fn = CRITERIA[n - 1]
    t0 = time.perf_counter()
    try:
        detail, ok = fn(), True
    except AssertionError as e:
        detail, ok = f"assertion failed: {e}", False
    elapsed = time.perf_counter() - t0
    if ok and elapsed >= budget:
        ok, detail = False, f"over budget: {detail}"
    line = f"criterion {n} [{title}]: {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s / {budget}s) {detail}"
    return ok, line


@pytest.mark.parametrize("n", [c[0] for c in CRITERIA])
def test_criterion(n, capsys):
    ok, line = run_criterion(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(n) for n, *_ in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
