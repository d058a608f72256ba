"""Iteration operators on transition formulas.

Each operator follows the same recipe: abstract ``F`` into a small domain
whose closure is exact, close it there, and pull the result back along the
translating substitution ``eta``.

* guard analysis: the abstraction is ``Pre(F) & Post(F)`` with ``eta`` the identity;
* recurrence analysis: the abstraction is ``y_i' <= y_i + b_i`` over fresh variables,
  one per facet ``t_i <= b_i`` of the hull of the deltas, with ``eta(y_i) = t_i``;
* the combined operator conjoins both closures while sharing the iteration counter.

The counter ``k`` ranges over the nonnegative rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .polyhedra import Polyhedron, eq, geq, leq, poly_project
from .ratlin import AffineTerm, Substitution, Var
from .transition import (TransitionFormula, delta_var, primes, tf_delta, tf_one,
                         tf_post, tf_pre, tf_subst)

COUNTER = Var("$k")


def fresh_var(i: int) -> Var:
    # '$' cannot start a parsed identifier, so these never clash with program variables
    return Var(f"$y{i}")


@dataclass(frozen=True)
class PolyCartFormula:
    """``pre_guard & post_guard``: a guard on the source and one on the target state."""

    variables: tuple
    pre_guard: Polyhedron
    post_guard: Polyhedron

    def __post_init__(self):
        if any(v.primed for v in self.pre_guard.env) or not all(v.primed for v in self.post_guard.env):
            raise ValueError("pre guard must be unprimed and post guard primed")

    def is_false(self) -> bool:
        return self.pre_guard.is_empty() or self.post_guard.is_empty()

    def formula(self) -> TransitionFormula:
        X = self.variables
        env = X + primes(X)
        if self.is_false():
            return TransitionFormula(X)
        return TransitionFormula(X, [self.pre_guard.embed(env).meet(self.post_guard.embed(env))])


@dataclass(frozen=True)
class LossyTranslation:
    """``y' <= y + b`` for each ``(y, b)`` in ``deltas``, or bottom (``deltas is None``)."""

    deltas: Optional[tuple]
    bottom_vars: tuple = ()

    @property
    def is_bottom(self) -> bool:
        return self.deltas is None

    @property
    def variables(self) -> tuple:
        if self.deltas is None:
            return self.bottom_vars
        return tuple(y for y, _ in self.deltas)

    def formula(self) -> TransitionFormula:
        X = self.variables
        if self.is_bottom:
            return TransitionFormula(X)
        env = X + primes(X)
        return TransitionFormula(X, [Polyhedron(env, [leq(y.prime(), y + b) for y, b in self.deltas])])


@dataclass(frozen=True)
class Abstraction:
    """An abstract formula with the substitution translating its variables to terms over ``concrete``."""

    formula: object
    eta: Substitution
    concrete: tuple

    @property
    def abstract_vars(self) -> tuple:
        return tuple(self.eta.targets)


class CountedFormula:
    """A union of polyhedra over ``X + X' + (k,)``: a transition formula with a pending counter."""

    __slots__ = ("variables", "counter", "disjuncts")

    def __init__(self, variables, counter: Var, disjuncts=()):
        self.variables = tuple(variables)
        self.counter = counter
        env = self.env
        self.disjuncts = tuple(p if p.env == env else p.embed(env) for p in disjuncts)

    @property
    def env(self):
        return self.variables + primes(self.variables) + (self.counter,)

    def meet(self, other: "CountedFormula") -> "CountedFormula":
        assert other.variables == self.variables and other.counter == self.counter
        return CountedFormula(self.variables, self.counter,
                              [P.meet(Q) for P in self.disjuncts for Q in other.disjuncts])

    def subst(self, eta: Substitution, X) -> "CountedFormula":
        X = tuple(X)
        images = {self.counter: AffineTerm.of_var(self.counter)}
        for y in self.variables:
            images[y] = eta[y]
            images[y.prime()] = eta[y].primed()
        env = X + primes(X) + (self.counter,)
        return CountedFormula(X, self.counter, [P.substitute(images, env) for P in self.disjuncts])

    def close(self) -> TransitionFormula:
        """Existentially quantify the counter."""
        keep = set(self.variables) | set(primes(self.variables))
        return TransitionFormula(self.variables, [poly_project(P, keep) for P in self.disjuncts])


# ---------------------------------------------------------------------------
# guard analysis


def alpha_pga(F: TransitionFormula) -> Abstraction:
    X = F.variables
    pre = tf_pre(F).polyhedron
    post = tf_post(F).polyhedron
    return Abstraction(PolyCartFormula(X, pre, post), Substitution.identity(X), X)


def star_pga_base(A: PolyCartFormula, X=None) -> TransitionFormula:
    X = A.variables if X is None else tuple(X)
    one = tf_one(X)
    if A.is_false():
        return one
    return TransitionFormula(X, one.disjuncts + A.formula().disjuncts)


# ---------------------------------------------------------------------------
# recurrence analysis


def delta_facets(F: TransitionFormula) -> list:
    """Facets ``(t, b)`` with ``t <= b`` of the hull of ``F``'s deltas, ``t`` over the delta variables.

    An equality ``a.d + c = 0`` contributes ``-a.d <= c`` and then ``a.d <= -c``.
    """
    D = tf_delta(F).minimize()
    env = D.env
    out = []

    def term(a):
        return AffineTerm({env[i]: a[i] for i in range(len(env)) if a[i]})

    for r in D.eqs:
        c0, a = r[0], r[1:]
        out.append((term([-x for x in a]), Fraction(c0)))
        out.append((term(a), Fraction(-c0)))
    for r in D.ineqs:
        c0, a = r[0], r[1:]
        out.append((term([-x for x in a]), Fraction(c0)))
    return out


def alpha_lra(F: TransitionFormula) -> Abstraction:
    X = F.variables
    if F.is_false():
        return Abstraction(LossyTranslation(None, X), Substitution.identity(X), X)
    deltas, images = [], {}
    for i, (t, b) in enumerate(delta_facets(F)):
        y = fresh_var(i)
        deltas.append((y, b))
        images[y] = _undelta(t, X)
    ys = tuple(y for y, _ in deltas)
    return Abstraction(LossyTranslation(tuple(deltas)), Substitution(images, X, ys), X)


def _undelta(t: AffineTerm, X) -> AffineTerm:
    return t.rename({delta_var(v): v for v in X})


def star_lra_base(A: LossyTranslation, counter: Var = COUNTER) -> CountedFormula:
    Y = A.variables
    env = Y + primes(Y) + (counter,)
    if A.is_bottom:
        return CountedFormula(Y, counter, [Polyhedron(env, [eq(counter, 0)] + [eq(y.prime(), y) for y in Y])])
    cons = [geq(counter, 0)] + [leq(y.prime(), y + b * AffineTerm.of_var(counter)) for y, b in A.deltas]
    return CountedFormula(Y, counter, [Polyhedron(env, cons)])


def lift(abstraction: Abstraction, base: TransitionFormula) -> TransitionFormula:
    if base.variables != abstraction.abstract_vars:
        raise ValueError("base result must range over the abstract variables")
    return tf_subst(base, abstraction.eta, abstraction.concrete)


def lifted(alpha: Callable, base_star: Callable) -> Callable:
    """The operator ``F -> eta^-1(base_star(alpha(F)))``."""

    def star(F: TransitionFormula) -> TransitionFormula:
        A = alpha(F)
        return lift(A, base_star(A.formula))

    return star


star_pga = lifted(alpha_pga, star_pga_base)
star_lra = lifted(alpha_lra, lambda A: star_lra_base(A).close())


# ---------------------------------------------------------------------------
# combined operator


def exp_lra(F: TransitionFormula, counter: Var = COUNTER) -> CountedFormula:
    A = alpha_lra(F)
    return star_lra_base(A.formula, counter).subst(A.eta, F.variables)


def exp_pga(F: TransitionFormula, counter: Var = COUNTER) -> CountedFormula:
    X = F.variables
    env = X + primes(X) + (counter,)
    zero = Polyhedron(env, [eq(counter, 0)] + [eq(v.prime(), v) for v in X])
    parts = [zero]
    G = alpha_pga(F).formula
    if not G.is_false():
        parts.append(Polyhedron(env, [geq(counter, 1)]).meet(G.pre_guard.embed(env)).meet(G.post_guard.embed(env)))
    return CountedFormula(X, counter, parts)


def star_combined(F: TransitionFormula) -> TransitionFormula:
    return exp_lra(F).meet(exp_pga(F)).close()


STARS = {"pga": star_pga, "lra": star_lra, "combined": star_combined}
