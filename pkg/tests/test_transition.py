import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import SPEC2, X1, X2, compose_contains, grid, raw_contains, raw_formula
from robustapa.frontend import gen_random_formula, parse_formula, random_constraint
from robustapa.polyhedra import Polyhedron
from robustapa.ratlin import AffineTerm, DomainError, Substitution, var
from robustapa.transition import (EnvironmentError_, TransitionFormula, delta_var, is_simulation, primes,
                                  tf_compose, tf_counterexample, tf_delta, tf_entails, tf_equiv,
                                  tf_meet, tf_one, tf_plus, tf_post, tf_pre, tf_power, tf_subst, tf_zero)

x, y, i = var("x"), var("y"), var("i")
XY = (x, y)


def G1():
    return parse_formula("i < 5 & i' = i + 1", [i])


def G2():
    return parse_formula("x < 5 & x' = x + 1 & y' = y + x + 1", XY)


def P(text, X=XY):
    return parse_formula(text, X)


def rf(seed, spec=SPEC2):
    return gen_random_formula(spec, random.Random(seed))


seeds = st.integers(0, 10**9)


# -- constants


def test_one_and_zero():
    assert str(tf_one([i])) == "i' = i"
    one = tf_one(XY)
    assert len(one.disjuncts) == 1 and len(one.disjuncts[0].eqs) == 2
    assert tf_entails(tf_zero(XY), P("x' = x + 1"))
    assert not tf_entails(tf_one(XY), tf_zero(XY))
    assert str(tf_zero(XY)) == "false"


# -- plus


def test_plus_examples():
    F = P("x' = x + 1 & y' = y")
    assert tf_equiv(tf_plus(F, tf_zero(XY)), F)
    assert tf_equiv(tf_plus(F, F), F)
    up, down = P("x' = x + 1", X1[:1]), P("x' = x - 1", X1[:1])
    s = tf_plus(up, down)
    assert len(s.disjuncts) == 2
    assert not tf_entails(s, up) and not tf_entails(s, down)
    for pre in grid(X1, -3, 3):
        for post in grid(X1, -3, 3):
            assert s.contains(pre, post) == (post[x] - pre[x] in (1, -1))


def test_plus_absorbs_covered_disjuncts():
    s = tf_plus(P("x' >= x", X1), P("x' >= x & x <= 0", X1))
    assert len(s.disjuncts) == 1
    # covered only by the union of the other two
    s = tf_plus(tf_plus(P("x' <= 0", X1), P("x' >= 0", X1)), P("x' = x", X1))
    assert len(s.disjuncts) == 2


def test_environment_mismatch():
    with pytest.raises(DomainError):
        tf_plus(tf_one([x]), tf_one(XY))
    with pytest.raises(DomainError):
        tf_compose(tf_one([x]), tf_one(XY))
    assert issubclass(EnvironmentError_, DomainError)


# -- compose


def test_compose_examples():
    inc = P("x' = x + 1", X1)
    assert tf_equiv(tf_compose(inc, tf_one(X1)), inc)
    assert tf_equiv(tf_compose(tf_one(X1), inc), inc)
    assert tf_equiv(tf_compose(inc, inc), P("x' = x + 2", X1))
    assert tf_equiv(tf_power(inc, 3), P("x' = x + 3", X1))
    assert tf_equiv(tf_power(inc, 0), tf_one(X1))
    assert tf_equiv(tf_power(inc, 1), inc)


def test_compose_g2_grid():
    g = G2()
    gg = tf_compose(g, g)
    pts = list(grid(XY, 0, 6))
    for pre in pts:
        for post in pts:
            direct = any(g.contains(pre, m) and g.contains(m, post) for m in pts)
            assert gg.contains(pre, post) == direct
    assert tf_equiv(gg, P("x <= 3 & x' = x + 2 & y' = y + 2*x + 3"))


@pytest.mark.parametrize("X", [X1, X2], ids=["1var", "2var"])
def test_compose_matches_oracle(X):
    rng = random.Random(11 if len(X) == 1 else 12)
    for _ in range(25):
        df, F = raw_formula(rng, X)
        dg, G = raw_formula(rng, X)
        FG = tf_compose(F, G)
        for pre in grid(X, -4, 4) if len(X) == 1 else grid(X, -2, 2):
            for post in grid(X, -4, 4) if len(X) == 1 else grid(X, -2, 2):
                assert FG.contains(pre, post) == compose_contains(df, dg, X, pre, post), (F, G, pre, post)


def test_raw_formula_agrees_with_built_formula():
    rng = random.Random(3)
    for _ in range(30):
        d, F = raw_formula(rng, X2)
        for pre in grid(X2, -2, 2):
            for post in grid(X2, -2, 2):
                assert F.contains(pre, post) == raw_contains(d, X2, pre, post)


# -- semiring laws


@settings(max_examples=200, deadline=None)
@given(seeds, seeds, seeds)
def test_semiring_laws(a, b, c):
    F, G, H = rf(a), rf(b), rf(c)
    zero, one = tf_zero(F.variables), tf_one(F.variables)
    assert tf_equiv(tf_plus(F, tf_plus(G, H)), tf_plus(tf_plus(F, G), H))
    assert tf_equiv(tf_plus(F, G), tf_plus(G, F))
    assert tf_equiv(tf_plus(F, F), F)
    assert tf_equiv(tf_plus(F, zero), F)
    assert tf_equiv(tf_compose(F, one), F) and tf_equiv(tf_compose(one, F), F)
    assert tf_compose(F, zero).is_false() and tf_compose(zero, F).is_false()
    assert tf_equiv(tf_compose(F, tf_compose(G, H)), tf_compose(tf_compose(F, G), H))
    assert tf_equiv(tf_compose(F, tf_plus(G, H)), tf_plus(tf_compose(F, G), tf_compose(F, H)))
    assert tf_equiv(tf_compose(tf_plus(F, G), H), tf_plus(tf_compose(F, H), tf_compose(G, H)))


# -- entailment and substitution


def test_entailment_examples():
    g1, g2 = G1(), G2()
    sigma = Substitution({i: AffineTerm.of_var(x)}, XY, [i])
    assert tf_equiv(tf_subst(g1, sigma, XY), P("x <= 4 & x' = x + 1"))
    assert is_simulation(sigma, g2, g1)
    assert tf_entails(g2, g2)
    bad = Substitution({i: AffineTerm.of_var(y)}, XY, [i])
    assert not is_simulation(bad, g2, g1)
    pre, post = tf_counterexample(g2, tf_subst(g1, bad, XY))
    assert g2.contains(pre, post)
    assert not (pre[y] <= 4 and post[y] == pre[y] + 1)


def test_identity_substitution():
    F = G2()
    assert tf_equiv(tf_subst(F, Substitution.identity(XY), XY), F)


def _rand_sub(rng, X, Y):
    return Substitution({v: AffineTerm({u: rng.randint(-2, 2) for u in X}, rng.randint(-2, 2)) for v in Y}, X, Y)


def test_substitution_composition():
    rng = random.Random(5)
    Z = (var("z"),)
    for _ in range(30):
        G = gen_random_formula(SPEC2, rng)
        sigma = _rand_sub(rng, Z, XY)        # XY -> terms over Z
        tau = _rand_sub(rng, XY, Z)          # Z -> terms over XY
        lhs = tf_subst(G, sigma.then(tau), XY)
        rhs = tf_subst(tf_subst(G, sigma, Z), tau, XY)
        assert tf_equiv(lhs, rhs)


def test_cartesian_property():
    rng = random.Random(9)
    for _ in range(30):
        G = gen_random_formula(SPEC2, rng)
        sigma = _rand_sub(rng, XY, XY)
        env = XY + primes(XY)
        H = tf_meet(tf_subst(G, sigma, XY), TransitionFormula(XY, [Polyhedron(env, [random_constraint(rng, env)])]))
        assert is_simulation(sigma, H, G)
        assert tf_entails(H, tf_subst(G, sigma, XY))


def test_subst_checks_domain():
    with pytest.raises(DomainError):
        tf_subst(G1(), Substitution({x: AffineTerm.of_var(x)}, XY, [x]), XY)


# -- pre, post, delta


def test_pre_post_delta_examples():
    g1, g2 = G1(), G2()
    assert str(tf_pre(g1)) == "i <= 4"
    assert str(tf_post(g1)) == "i' <= 5"
    assert tf_pre(tf_zero(XY)).is_false()
    d1 = tf_delta(g1)
    assert str(d1) == "δi = 1"
    d2 = tf_delta(g2)
    assert str(d2) == "δx = 1 & δy <= 5"
    d0 = tf_delta(tf_one(XY))
    assert len(d0.eqs) == 2 and not d0.ineqs
    assert d0.contains({delta_var(v): 0 for v in XY})


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_pre_post_soundness(seed):
    F = rf(seed)
    pre_f, post_f = tf_pre(F), tf_post(F)
    pts = list(grid(XY, -2, 2))
    for a in pts:
        for b in pts:
            if F.contains(a, b):
                assert pre_f.contains(a)
                assert post_f.contains({v.prime(): b[v] for v in XY})


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_delta_soundness(seed):
    F = rf(seed)
    D = tf_delta(F)
    pts = list(grid(XY, -2, 2))
    for a in pts:
        for b in pts:
            if F.contains(a, b):
                assert D.contains({delta_var(v): b[v] - a[v] for v in XY})


def test_rendering_round_trip():
    rng = random.Random(21)
    for _ in range(100):
        F = gen_random_formula(SPEC2, rng)
        assert tf_equiv(parse_formula(str(F), XY), F)
