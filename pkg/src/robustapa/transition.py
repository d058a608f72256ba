"""Transition formulas: finite unions of polyhedra over ``X`` and its primed copy.

Formulas form an idempotent semiring under union (``tf_plus``) and relational
composition (``tf_compose``), with ``tf_zero`` the empty relation and
``tf_one`` the identity.  Existential quantifiers are eliminated eagerly by
projection, so every formula is quantifier free.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .polyhedra import (Polyhedron, eq, hull_union, poly_includes, poly_minimize,
                        poly_project, union_covers)
from .ratlin import DomainError, Substitution, Var


class EnvironmentError_(DomainError):
    """Operands live over different variable sets."""


def primes(vs: Iterable[Var]) -> tuple:
    return tuple(v.prime() for v in vs)


def delta_var(v: Var) -> Var:
    return Var("δ" + v.name)


def _mid(v: Var) -> Var:
    # reserved names: '$' never appears in parsed identifiers
    return Var("$mid." + v.name)


def _check_vars(vs):
    vs = tuple(vs)
    if any(v.primed for v in vs):
        raise DomainError("formula variables must be unprimed")
    if len(set(vs)) != len(vs):
        raise DomainError("duplicate formula variable")
    return vs


def _absorb(polys: list) -> list:
    out = []
    for p in polys:
        if any(p == q for q in out):
            continue
        out.append(p)
    # drop disjuncts included in a single other one, then those covered by the rest
    k = 0
    while k < len(out):
        p = out[k]
        rest = out[:k] + out[k + 1:]
        if any(poly_includes(q, p) for q in rest) or (len(rest) > 1 and union_covers(rest, p)):
            out.pop(k)
        else:
            k += 1
    return out


class StateFormula:
    """A union of polyhedra over a set of (possibly primed) variables."""

    __slots__ = ("variables", "disjuncts")

    def __init__(self, variables: Sequence[Var], disjuncts: Iterable[Polyhedron] = ()):
        self.variables = tuple(variables)
        ds = []
        for p in disjuncts:
            if p.env != self.variables:
                p = p.embed(self.variables)
            p = poly_minimize(p)
            if not p.is_empty():
                ds.append(p)
        self.disjuncts = tuple(sorted(_absorb(ds), key=str))

    @property
    def polyhedron(self) -> Polyhedron:
        """The convex hull of the disjuncts."""
        if not self.disjuncts:
            return Polyhedron.empty(self.variables)
        if len(self.disjuncts) == 1:
            return self.disjuncts[0]
        return hull_union(list(self.disjuncts))

    def is_false(self) -> bool:
        return not self.disjuncts

    def contains(self, point) -> bool:
        return any(p.contains(point) for p in self.disjuncts)

    def entails(self, other: "StateFormula") -> bool:
        if other.variables != self.variables:
            raise EnvironmentError_("state formulas over different variables")
        return all(union_covers(list(other.disjuncts), p) for p in self.disjuncts)

    def __eq__(self, other):
        if not isinstance(other, StateFormula):
            return NotImplemented
        return self.variables == other.variables and self.disjuncts == other.disjuncts

    def __hash__(self):
        return hash((self.variables, self.disjuncts))

    def __str__(self):
        return " | ".join(map(str, self.disjuncts)) if self.disjuncts else "false"

    def __repr__(self):
        return f"StateFormula({str(self)!r})"


class TransitionFormula:
    """A union of polyhedra over ``X`` followed by ``X'``."""

    __slots__ = ("variables", "disjuncts", "_env")

    def __init__(self, variables: Sequence[Var], disjuncts: Iterable[Polyhedron] = (),
                 absorb: bool = True):
        self.variables = _check_vars(variables)
        self._env = self.variables + primes(self.variables)
        ds = []
        for p in disjuncts:
            if p.env != self._env:
                p = p.embed(self._env)
            p = poly_minimize(p)
            if not p.is_empty():
                ds.append(p)
        if absorb:
            ds = _absorb(ds)
        self.disjuncts = tuple(sorted(ds, key=str))

    @property
    def env(self) -> tuple:
        return self._env

    def is_false(self) -> bool:
        return not self.disjuncts

    def contains(self, pre: Mapping[Var, object], post: Mapping[Var, object]) -> bool:
        point = dict(pre)
        point.update({v.prime(): post[v] for v in self.variables})
        return any(p.contains(point) for p in self.disjuncts)

    def __add__(self, other):
        return tf_plus(self, other)

    def __mul__(self, other):
        return tf_compose(self, other)

    def __le__(self, other):
        return tf_entails(self, other)

    def __eq__(self, other):
        if not isinstance(other, TransitionFormula):
            return NotImplemented
        return self.variables == other.variables and self.disjuncts == other.disjuncts

    def __hash__(self):
        return hash((self.variables, self.disjuncts))

    def __str__(self):
        return " | ".join(map(str, self.disjuncts)) if self.disjuncts else "false"

    def __repr__(self):
        return f"TransitionFormula({str(self)!r})"


def _same(F: TransitionFormula, G: TransitionFormula):
    if F.variables != G.variables:
        raise EnvironmentError_(f"variable sets differ: {F.variables} vs {G.variables}")


def tf_zero(X) -> TransitionFormula:
    return TransitionFormula(X)


def tf_one(X) -> TransitionFormula:
    X = _check_vars(X)
    env = X + primes(X)
    return TransitionFormula(X, [Polyhedron(env, [eq(v.prime(), v) for v in X])])


def tf_plus(F: TransitionFormula, G: TransitionFormula) -> TransitionFormula:
    _same(F, G)
    return TransitionFormula(F.variables, F.disjuncts + G.disjuncts)


def tf_sum(X, Fs: Iterable[TransitionFormula]) -> TransitionFormula:
    ds = []
    for F in Fs:
        if F.variables != tuple(X):
            raise EnvironmentError_("summands over different variables")
        ds += F.disjuncts
    return TransitionFormula(X, ds)


def _compose_poly(X, P: Polyhedron, Q: Polyhedron) -> Polyhedron:
    Xp = primes(X)
    M = tuple(_mid(v) for v in X)
    env3 = X + Xp + M
    a = P.rename(dict(zip(Xp, M))).embed(env3)
    b = Q.rename(dict(zip(X, M))).embed(env3)
    return poly_project(a.meet(b), set(X + Xp)).embed(X + Xp)


def tf_compose(F: TransitionFormula, G: TransitionFormula) -> TransitionFormula:
    _same(F, G)
    X = F.variables
    return TransitionFormula(X, [_compose_poly(X, P, Q) for P in F.disjuncts for Q in G.disjuncts])


def tf_entails(F: TransitionFormula, G: TransitionFormula) -> bool:
    _same(F, G)
    gs = list(G.disjuncts)
    return all(any(poly_includes(q, p) for q in gs) or union_covers(gs, p) for p in F.disjuncts)


def tf_counterexample(F: TransitionFormula, G: TransitionFormula):
    """A point of F outside G as ``(pre, post)`` maps, or None when F entails G."""
    from .polyhedra import uncovered_point
    _same(F, G)
    for p in F.disjuncts:
        w = uncovered_point(list(G.disjuncts), p)
        if w is not None:
            pre = {v: w[v] for v in F.variables}
            post = {v: w[v.prime()] for v in F.variables}
            return pre, post
    return None


def tf_equiv(F: TransitionFormula, G: TransitionFormula) -> bool:
    return tf_entails(F, G) and tf_entails(G, F)


def tf_subst(G: TransitionFormula, sigma: Substitution, X: Sequence[Var] | None = None) -> TransitionFormula:
    """``G[sigma, sigma']``: the weakest formula over X whose image under sigma lies in G."""
    X = _check_vars(X if X is not None else sigma.sources)
    if set(sigma.targets) != set(G.variables):
        raise DomainError("substitution targets must be exactly the formula variables")
    if not set(sigma.sources) <= set(X):
        raise DomainError("substitution mentions variables outside the new variable set")
    images = {}
    for y in G.variables:
        t = sigma[y]
        images[y] = t
        images[y.prime()] = t.primed()
    env = X + primes(X)
    return TransitionFormula(X, [P.substitute(images, env) for P in G.disjuncts])


def is_simulation(sigma: Substitution, F: TransitionFormula, G: TransitionFormula) -> bool:
    return tf_entails(F, tf_subst(G, sigma, F.variables))


def tf_pre(F: TransitionFormula) -> StateFormula:
    X = F.variables
    if F.is_false():
        return StateFormula(X)
    return StateFormula(X, [hull_union([poly_project(P, set(X)) for P in F.disjuncts])])


def tf_post(F: TransitionFormula) -> StateFormula:
    Xp = primes(F.variables)
    if F.is_false():
        return StateFormula(Xp)
    return StateFormula(Xp, [hull_union([poly_project(P, set(Xp)) for P in F.disjuncts])])


def tf_delta(F: TransitionFormula) -> Polyhedron:
    X = F.variables
    D = tuple(delta_var(v) for v in X)
    if F.is_false():
        return Polyhedron.empty(D)
    env = F.env + D
    parts = []
    for P in F.disjuncts:
        Q = P.embed(env).add([eq(d, v.prime() - v) for d, v in zip(D, X)])
        parts.append(poly_project(Q, set(D)).embed(D))
    return hull_union(parts)


def tf_hull(F: TransitionFormula) -> TransitionFormula:
    if len(F.disjuncts) <= 1:
        return F
    return TransitionFormula(F.variables, [hull_union(list(F.disjuncts))])


def tf_power(F: TransitionFormula, n: int) -> TransitionFormula:
    if n < 0:
        raise ValueError("power must be nonnegative")
    out = tf_one(F.variables)
    for _ in range(n):
        out = tf_compose(out, F)
    return out


def tf_meet(F: TransitionFormula, G: TransitionFormula) -> TransitionFormula:
    _same(F, G)
    return TransitionFormula(F.variables, [P.meet(Q) for P in F.disjuncts for Q in G.disjuncts])


def tf_guard(F: TransitionFormula, polys: Iterable[Polyhedron]) -> TransitionFormula:
    """Conjoin every disjunct with a polyhedron over a subset of ``X + X'``."""
    out = list(F.disjuncts)
    for G in polys:
        G = G.embed(F.env)
        out = [P.meet(G) for P in out]
    return TransitionFormula(F.variables, out)


def tf_rename(F: TransitionFormula, mapping: Mapping[Var, Var]) -> TransitionFormula:
    """Rename unprimed variables (primed copies follow)."""
    full = dict(mapping)
    for v, w in mapping.items():
        full[v.prime()] = w.prime()
    X = tuple(mapping.get(v, v) for v in F.variables)
    return TransitionFormula(X, [P.rename(full) for P in F.disjuncts])


def tf_project(F: TransitionFormula, keep: Iterable[Var]) -> TransitionFormula:
    """Existentially quantify both copies of every variable not in ``keep``."""
    keep = set(keep)
    X = tuple(v for v in F.variables if v in keep)
    env = X + primes(X)
    return TransitionFormula(X, [poly_project(P, set(env)).embed(env) for P in F.disjuncts])


def tf_from_polys(X, polys: Iterable[Polyhedron]) -> TransitionFormula:
    return TransitionFormula(X, polys)
