"""Closed convex polyhedra over the rationals.

A polyhedron keeps an ordered environment of variables and two lists of
integer rows ``(c0, a1, ..., an)``: equalities ``c0 + a.x = 0`` and
inequalities ``c0 + a.x >= 0``.  Rows are scaled to coprime integers.

Generators come from a double-description (Motzkin) conversion on the
homogenized cone ``{(t, x) : t >= 0, c0*t + a.x >= 0}``; the same routine run
on the polar cone turns generators back into constraints, which is also how
minimal canonical forms are produced.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

from .ratlin import (AffineTerm, DomainError, Infeasible, Optimum, Unbounded, Var,
                     format_linear, solve_lp)

GEQ = ">="
EQ = "="

PRUNE_LIMIT = 32


@dataclass(frozen=True)
class Constraint:
    """``term >= 0`` or ``term = 0``."""

    term: AffineTerm
    relation: str = GEQ

    def __post_init__(self):
        if self.relation not in (GEQ, EQ):
            raise ValueError(f"bad relation {self.relation!r}")

    def holds(self, point: Mapping[Var, object]) -> bool:
        v = self.term.evaluate(point)
        return v >= 0 if self.relation == GEQ else v == 0

    def __str__(self):
        env = tuple(sorted(self.term.variables))
        row = _term_row(self.term, {v: i for i, v in enumerate(env)}, len(env))
        return _render_row(env, _normalize(row, self.relation == EQ), self.relation == EQ)


def geq(lhs, rhs=0) -> Constraint:
    return Constraint(_term(lhs) - _term(rhs), GEQ)


def leq(lhs, rhs=0) -> Constraint:
    return Constraint(_term(rhs) - _term(lhs), GEQ)


def eq(lhs, rhs=0) -> Constraint:
    return Constraint(_term(lhs) - _term(rhs), EQ)


def _term(x) -> AffineTerm:
    if isinstance(x, AffineTerm):
        return x
    if isinstance(x, Var):
        return AffineTerm.of_var(x)
    return AffineTerm.const(x)


@dataclass(frozen=True)
class GeneratorSet:
    """Points, rays and lines; the empty set has no points."""

    points: tuple = ()
    rays: tuple = ()
    lines: tuple = ()

    @property
    def is_empty(self) -> bool:
        return not self.points


# ---------------------------------------------------------------------------
# row helpers


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _normalize(row, is_eq=False):
    """Scale a rational row to coprime integers (equalities: leading coefficient positive)."""
    den = 1
    for x in row:
        if isinstance(x, Fraction) and x.denominator != 1:
            den = lcm(den, x.denominator)
    r = [int(x * den) for x in row]
    g = reduce(gcd, r, 0)
    if g > 1:
        r = [x // g for x in r]
    if is_eq:
        lead = next((x for x in r[1:] if x), r[0])
        if lead < 0:
            r = [-x for x in r]
    return tuple(r)


def _term_row(t: AffineTerm, index, n):
    r = [Fraction(0)] * (n + 1)
    r[0] = t.constant
    for v, a in t.coeffs.items():
        if v not in index:
            raise DomainError(f"variable {v} not in environment")
        r[index[v] + 1] = a
    return r


def _trivial(row):
    return not any(row[1:])


def _render_row(env, row, is_eq):
    c0, a = row[0], row[1:]
    items = [(env[i], a[i]) for i in range(len(a)) if a[i]]
    if not items:
        return ("0 = " if is_eq else "0 <= ") + str(c0)
    if is_eq:
        # solve for the last variable with a unit coefficient when possible
        piv = next((k for k in range(len(items) - 1, -1, -1) if abs(items[k][1]) == 1), None)
        if piv is not None:
            v, p = items[piv]
            rest = [(w, Fraction(-b, p)) for k, (w, b) in enumerate(items) if k != piv]
            return f"{v} = {format_linear(rest, Fraction(-c0, p))}"
        return f"{format_linear(items)} = {-c0}"
    if len(items) > 1 and abs(items[-1][1]) == 1:
        v, p = items[-1]
        rest = format_linear([(w, Fraction(-b, p)) for w, b in items[:-1]], Fraction(-c0, p))
        return f"{v} {'>=' if p > 0 else '<='} {rest}"
    if items[0][1] < 0:
        return f"{format_linear([(v, -b) for v, b in items])} <= {c0}"
    return f"{format_linear(items)} >= {-c0}"


# ---------------------------------------------------------------------------
# double description


def _dd(dim, eqs, ineqs):
    """Extreme rays and lineality basis of ``{y : e.y = 0, a.y >= 0}`` in Z^dim."""
    lines = [tuple(1 if i == j else 0 for i in range(dim)) for j in range(dim)]
    rays: list = []  # [vector, saturation bitmask]
    rank_eq = 0

    def red(g, l, s, sl):
        # g - (s/sl) l, scaled positively to integers
        if s == 0:
            return g
        k = abs(sl)
        sg = 1 if sl > 0 else -1
        v = [k * x - sg * s * y for x, y in zip(g, l)]
        d = reduce(gcd, v, 0)
        return tuple(x // d for x in v) if d > 1 else tuple(v)

    def combine(p, sp, q, sq):
        # sp > 0 > sq
        v = [sp * y - sq * x for x, y in zip(p, q)]
        d = reduce(gcd, v, 0)
        return tuple(x // d for x in v) if d > 1 else tuple(v)

    def process(a, bit):
        # bit == 0 marks an equality; otherwise the saturation bit of an inequality
        nonlocal lines, rays
        prods = [_dot(a, l) for l in lines]
        k = next((i for i, s in enumerate(prods) if s), None)
        if k is not None:
            l, sl = lines[k], prods[k]
            lines = [red(g, l, s, sl) for i, (g, s) in enumerate(zip(lines, prods)) if i != k]
            rays = [[red(r, l, _dot(a, r), sl), m | bit] for r, m in rays]
            if bit:
                rays.append([l if sl > 0 else tuple(-x for x in l), bit - 1])
            return True
        pos, zero, neg = [], [], []
        for r in rays:
            s = _dot(a, r[0])
            (pos if s > 0 else neg if s < 0 else zero).append((r, s))
        if not bit and not pos and not neg:
            return False
        need = dim - rank_eq - len(lines) - 2
        out = [r for r, _ in pos] if bit else []
        out += [[r[0], r[1] | bit] for r, _ in zero]
        for p, sp in pos:
            for q, sq in neg:
                common = p[1] & q[1]
                if bin(common).count("1") < need:
                    continue
                if any(r is not p and r is not q and common & ~r[1] == 0 for r in rays):
                    continue
                out.append([combine(p[0], sp, q[0], sq), common | bit])
        rays = out
        return True

    for e in eqs:
        if process(e, 0):
            rank_eq += 1
    for i, a in enumerate(ineqs):
        process(a, 1 << i)
    return [r for r, _ in rays], lines


def _generators(n, eqs, ineqs):
    """Generators of the polyhedron given by rows over n variables."""
    cone_ineqs = [(1,) + (0,) * n] + list(ineqs)
    rays, lines = _dd(n + 1, list(eqs), cone_ineqs)
    points, rrays = [], []
    for r in rays:
        if r[0] > 0:
            points.append(tuple(Fraction(x, r[0]) for x in r[1:]))
        else:
            rrays.append(tuple(r[1:]))
    if not points:
        return GeneratorSet()
    return GeneratorSet(tuple(points), tuple(rrays), tuple(tuple(l[1:]) for l in lines))


def _constraints_of(n, gens: GeneratorSet):
    """Minimal (eqs, ineqs) describing a nonempty generator set."""
    cone_ineqs, cone_eqs = [], []
    for p in gens.points:
        d = reduce(lcm, (x.denominator for x in p), 1)
        cone_ineqs.append((d,) + tuple(int(x * d) for x in p))
    for r in gens.rays:
        cone_ineqs.append((0,) + tuple(r))
    for l in gens.lines:
        cone_eqs.append((0,) + tuple(l))
    rays, lines = _dd(n + 1, cone_eqs, cone_ineqs)
    ineqs = [r for r in rays if any(r[1:])]
    return lines, ineqs


# ---------------------------------------------------------------------------
# canonical form


def _canonical(n, eqs, ineqs):
    """Reduced equalities (pivots taken from the last variables) and inequalities with
    the pivot columns eliminated; assumes a nonempty, irredundant input."""
    rows = [list(map(Fraction, e)) for e in eqs]
    basis = []  # (pivot column, row)
    for col in range(n, 0, -1):
        k = next((i for i, r in enumerate(rows) if r[col] != 0), None)
        if k is None:
            continue
        r = rows.pop(k)
        r = [x / r[col] for x in r]
        for q in rows:
            if q[col]:
                c = q[col]
                for j in range(n + 1):
                    q[j] -= c * r[j]
        for _, q in basis:
            if q[col]:
                c = q[col]
                for j in range(n + 1):
                    q[j] -= c * r[j]
        basis.append((col, r))
    out_eqs = [_normalize(r, True) for _, r in basis]
    out_ineqs = []
    for a in ineqs:
        a = list(map(Fraction, a))
        for col, r in basis:
            if a[col]:
                c = a[col]
                for j in range(n + 1):
                    a[j] -= c * r[j]
        a = _normalize(a)
        if _trivial(a):
            continue
        out_ineqs.append(a)
    out_ineqs = sorted(set(out_ineqs), key=_ineq_key)
    return tuple(out_eqs), tuple(out_ineqs)


def _ineq_key(r):
    # group by the leading variable, lower bounds before upper bounds
    a = r[1:]
    lead = next((i for i, x in enumerate(a) if x), len(a))
    return (lead, tuple(-abs(x) if i == lead else x for i, x in enumerate(a)), -a[lead] if lead < len(a) else 0, r[0])


# ---------------------------------------------------------------------------
# Polyhedron


class Polyhedron:
    """Immutable closed convex polyhedron over an ordered environment."""

    __slots__ = ("env", "eqs", "ineqs", "_index", "_gens", "_empty", "_minimal")

    def __init__(self, env: Iterable[Var], constraints: Iterable[Constraint] = ()):
        env = tuple(env)
        index = {v: i for i, v in enumerate(env)}
        if len(index) != len(env):
            raise ValueError("duplicate variable in environment")
        eqs, ineqs = [], []
        for c in constraints:
            row = _term_row(c.term, index, len(env))
            (eqs if c.relation == EQ else ineqs).append(row)
        self._setup(env, eqs, ineqs)

    @classmethod
    def from_rows(cls, env, eqs=(), ineqs=()) -> "Polyhedron":
        p = cls.__new__(cls)
        p._setup(tuple(env), eqs, ineqs)
        return p

    def _setup(self, env, eqs, ineqs):
        self.env = env
        self._index = None
        self._gens = None
        self._empty = None
        self._minimal = False
        n = len(env)
        seen_e, seen_i = [], []
        bad = False
        for r in eqs:
            r = _normalize(r, True)
            if _trivial(r):
                bad = bad or r[0] != 0
            elif r not in seen_e:
                seen_e.append(r)
        for r in ineqs:
            r = _normalize(r)
            if _trivial(r):
                bad = bad or r[0] < 0
            elif r not in seen_i:
                seen_i.append(r)
        if bad:
            seen_e, seen_i = [], [(-1,) + (0,) * n]
            self._empty = True
        self.eqs = tuple(seen_e)
        self.ineqs = tuple(seen_i)

    @classmethod
    def universe(cls, env) -> "Polyhedron":
        return cls.from_rows(env)

    @classmethod
    def empty(cls, env) -> "Polyhedron":
        env = tuple(env)
        return cls.from_rows(env, (), [(-1,) + (0,) * len(env)])

    @property
    def dim(self) -> int:
        return len(self.env)

    @property
    def index(self):
        if self._index is None:
            self._index = {v: i for i, v in enumerate(self.env)}
        return self._index

    @property
    def constraints(self) -> list:
        def term(r):
            return AffineTerm({self.env[i]: r[i + 1] for i in range(self.dim) if r[i + 1]}, r[0])
        return [Constraint(term(r), EQ) for r in self.eqs] + [Constraint(term(r), GEQ) for r in self.ineqs]

    def __eq__(self, other):
        if not isinstance(other, Polyhedron):
            return NotImplemented
        return self.env == other.env and self.eqs == other.eqs and set(self.ineqs) == set(other.ineqs)

    def __hash__(self):
        return hash((self.env, self.eqs, frozenset(self.ineqs)))

    def __str__(self):
        if self.is_syntactically_empty():
            return "false"
        parts = [_render_row(self.env, r, True) for r in self.eqs]
        parts += [_render_row(self.env, r, False) for r in self.ineqs]
        return " & ".join(parts) if parts else "true"

    def __repr__(self):
        return f"Polyhedron({str(self)!r})"

    def is_syntactically_empty(self) -> bool:
        return not self.eqs and len(self.ineqs) == 1 and _trivial(self.ineqs[0]) and self.ineqs[0][0] < 0

    # -- queries

    def is_empty(self) -> bool:
        return poly_is_empty(self)

    def contains(self, point: Mapping[Var, object]) -> bool:
        x = [1] + [Fraction(point[v]) for v in self.env]
        return all(_dot(r, x) == 0 for r in self.eqs) and all(_dot(r, x) >= 0 for r in self.ineqs)

    def entails(self, c: Constraint) -> bool:
        return poly_entails(self, c)

    def includes(self, other: "Polyhedron") -> bool:
        return poly_includes(self, other)

    def equivalent(self, other: "Polyhedron") -> bool:
        return poly_includes(self, other) and poly_includes(other, self)

    def generators(self) -> GeneratorSet:
        return poly_generators(self)

    def minimize(self) -> "Polyhedron":
        return poly_minimize(self)

    def project(self, keep) -> "Polyhedron":
        return poly_project(self, keep)

    # -- constructions

    def meet(self, other: "Polyhedron") -> "Polyhedron":
        if other.env != self.env:
            other = other.embed(self.env)
        return Polyhedron.from_rows(self.env, self.eqs + other.eqs, self.ineqs + other.ineqs)

    def add(self, constraints: Iterable[Constraint]) -> "Polyhedron":
        return self.meet(Polyhedron(self.env, constraints))

    def embed(self, env: Sequence[Var]) -> "Polyhedron":
        """Re-express over ``env``, which must contain every variable that has a nonzero column."""
        env = tuple(env)
        if env == self.env:
            return self
        idx = {v: i for i, v in enumerate(env)}
        perm = []
        for i, v in enumerate(self.env):
            if v in idx:
                perm.append((i, idx[v]))
            elif any(r[i + 1] for r in self.eqs + self.ineqs):
                raise DomainError(f"variable {v} missing from target environment")

        def move(r):
            out = [0] * (len(env) + 1)
            out[0] = r[0]
            for i, j in perm:
                out[j + 1] = r[i + 1]
            return out
        p = Polyhedron.from_rows(env, [move(r) for r in self.eqs], [move(r) for r in self.ineqs])
        if self._empty is not None:
            p._empty = self._empty
        return p

    def rename(self, mapping: Mapping[Var, Var]) -> "Polyhedron":
        env = tuple(mapping.get(v, v) for v in self.env)
        p = Polyhedron.from_rows(env, self.eqs, self.ineqs)
        p._empty, p._minimal = self._empty, self._minimal
        return p

    def substitute(self, images: Mapping[Var, AffineTerm], env: Sequence[Var]) -> "Polyhedron":
        """Replace each variable ``v`` by ``images[v]`` (terms over ``env``)."""
        env = tuple(env)
        idx = {v: i for i, v in enumerate(env)}
        cols = []
        for v in self.env:
            t = images.get(v)
            if t is None:
                raise DomainError(f"no image for {v}")
            cols.append(_term_row(t, idx, len(env)))

        def tr(r):
            out = [Fraction(r[0])] + [Fraction(0)] * len(env)
            for i, a in enumerate(r[1:]):
                if a:
                    col = cols[i]
                    for j in range(len(env) + 1):
                        if col[j]:
                            out[j] += a * col[j]
            return out
        return Polyhedron.from_rows(env, [tr(r) for r in self.eqs], [tr(r) for r in self.ineqs])

    def witness(self):
        """Some point of the polyhedron, or None when empty."""
        res = solve_lp(self.dim, self.ineqs, self.eqs, (0,) * (self.dim + 1))
        if not isinstance(res, Optimum):
            return None
        return dict(zip(self.env, res.point))


# ---------------------------------------------------------------------------
# operations


def poly_is_empty(P: Polyhedron) -> bool:
    if P._empty is None:
        if P._gens is not None:
            P._empty = P._gens.is_empty
        else:
            res = solve_lp(P.dim, P.ineqs, P.eqs, (0,) * (P.dim + 1))
            P._empty = isinstance(res, Infeasible)
    return P._empty


def _min_row(P: Polyhedron, row):
    return solve_lp(P.dim, P.ineqs, P.eqs, row, maximize=False)


def poly_entails(P: Polyhedron, c: Constraint) -> bool:
    row = _term_row(c.term, P.index, P.dim)
    res = _min_row(P, row)
    if isinstance(res, Infeasible):
        return True
    if isinstance(res, Unbounded) or res.value < 0:
        return False
    if c.relation == GEQ:
        return True
    res = _min_row(P, [-x for x in row])
    return isinstance(res, Optimum) and res.value >= 0


def poly_generators(P: Polyhedron) -> GeneratorSet:
    if P._gens is None:
        if P._empty:
            P._gens = GeneratorSet()
        else:
            P._gens = _generators(P.dim, P.eqs, P.ineqs)
        P._empty = P._gens.is_empty
    return P._gens


def poly_from_generators(G: GeneratorSet, env) -> Polyhedron:
    env = tuple(env)
    if G.is_empty:
        return Polyhedron.empty(env)
    eqs, ineqs = _constraints_of(len(env), G)
    eqs, ineqs = _canonical(len(env), eqs, ineqs)
    p = Polyhedron.from_rows(env, eqs, ineqs)
    p._empty = False
    p._minimal = True
    return p


def poly_minimize(P: Polyhedron) -> Polyhedron:
    if P._minimal:
        return P
    G = poly_generators(P)
    if G.is_empty:
        out = Polyhedron.empty(P.env)
        out._empty = True
        out._minimal = True
        return out
    out = poly_from_generators(G, P.env)
    out._gens = G
    return out


def hull_union(Ps: Sequence[Polyhedron]) -> Polyhedron:
    if not Ps:
        raise ValueError("hull of an empty list")
    env = Ps[0].env
    pts, rays, lines = [], [], []
    for P in Ps:
        if P.env != env:
            raise DomainError("hull members must share an environment")
        G = poly_generators(P)
        if G.is_empty:
            continue
        pts += G.points
        rays += G.rays
        lines += G.lines
    return poly_from_generators(GeneratorSet(tuple(pts), tuple(rays), tuple(lines)), env)


def _gens_satisfy(G: GeneratorSet, eqs, ineqs) -> bool:
    for p in G.points:
        x = (1,) + p
        if any(_dot(r, x) != 0 for r in eqs) or any(_dot(r, x) < 0 for r in ineqs):
            return False
    for v in G.rays:
        x = (0,) + tuple(v)
        if any(_dot(r, x) != 0 for r in eqs) or any(_dot(r, x) < 0 for r in ineqs):
            return False
    for v in G.lines:
        x = (0,) + tuple(v)
        if any(_dot(r, x) != 0 for r in eqs) or any(_dot(r, x) != 0 for r in ineqs):
            return False
    return True


def poly_includes(P: Polyhedron, Q: Polyhedron) -> bool:
    """Q is a subset of P, decided on the generators of Q."""
    if Q.env != P.env:
        raise DomainError("inclusion requires a shared environment")
    return _gens_satisfy(poly_generators(Q), P.eqs, P.ineqs)


def poly_includes_lp(P: Polyhedron, Q: Polyhedron) -> bool:
    """Q is a subset of P, decided by one LP entailment per constraint of P."""
    return all(poly_entails(Q, c) for c in P.constraints)


# -- projection


def _prune(n, eqs, ineqs):
    """Drop trivial rows, merge parallel inequalities; returns None when a contradiction shows."""
    out_e = []
    for r in eqs:
        r = _normalize(r, True)
        if _trivial(r):
            if r[0] != 0:
                return None
            continue
        if r not in out_e:
            out_e.append(r)
    best = {}
    for r in ineqs:
        r = _normalize(r)
        if _trivial(r):
            if r[0] < 0:
                return None
            continue
        key = r[1:]
        if key not in best or r[0] < best[key]:
            best[key] = r[0]
    out_i = []
    for key, c0 in best.items():
        neg = tuple(-x for x in key)
        if neg in best:
            s = c0 + best[neg]
            if s < 0:
                return None
            if s == 0:
                e = _normalize((c0,) + key, True)
                if e not in out_e:
                    out_e.append(e)
                continue
        out_i.append((c0,) + key)
    return out_e, out_i


def _lp_prune(n, eqs, ineqs):
    """Remove inequalities entailed by the remaining ones."""
    keep = list(ineqs)
    i = 0
    while i < len(keep):
        others = keep[:i] + keep[i + 1:]
        res = solve_lp(n, others, eqs, keep[i])
        if isinstance(res, Infeasible) or (isinstance(res, Optimum) and res.value >= 0):
            keep.pop(i)
        else:
            i += 1
    return keep


def _fm_eliminate(n, eqs, ineqs, cols):
    """Eliminate columns ``cols`` (1-based); returns (eqs, ineqs) or None if empty."""
    cols = set(cols)
    eqs = [list(r) for r in eqs]
    ineqs = [list(r) for r in ineqs]
    while cols:
        # equality substitution first
        sub = None
        for j in sorted(cols):
            cand = [r for r in eqs if r[j]]
            if cand:
                sub = (j, min(cand, key=lambda r: (abs(r[j]), sum(1 for x in r if x))))
                break
        if sub is not None:
            j, e = sub
            eqs.remove(e)
            k, sg = abs(e[j]), (1 if e[j] > 0 else -1)

            def red(r):
                if not r[j]:
                    return r
                c = r[j]
                return [k * x - sg * c * y for x, y in zip(r, e)]
            eqs = [red(r) for r in eqs]
            ineqs = [red(r) for r in ineqs]
            cols.discard(j)
        else:
            def cost(j):
                p = sum(1 for r in ineqs if r[j] > 0)
                q = sum(1 for r in ineqs if r[j] < 0)
                return (p * q - p - q, j)
            j = min(cols, key=cost)
            pos = [r for r in ineqs if r[j] > 0]
            neg = [r for r in ineqs if r[j] < 0]
            rest = [r for r in ineqs if r[j] == 0]
            for p in pos:
                for q in neg:
                    a, b = p[j], -q[j]
                    rest.append([b * x + a * y for x, y in zip(p, q)])
            ineqs = rest
            cols.discard(j)
        pr = _prune(n, eqs, ineqs)
        if pr is None:
            return None
        eqs, ineqs = [list(r) for r in pr[0]], [list(r) for r in pr[1]]
        if len(ineqs) > PRUNE_LIMIT:
            ineqs = [list(r) for r in _lp_prune(n, eqs, ineqs)]
    return eqs, ineqs


def poly_project(P: Polyhedron, keep) -> Polyhedron:
    keep = set(keep)
    missing = keep - set(P.env)
    if missing:
        raise DomainError(f"cannot keep variables outside the environment: {sorted(missing)}")
    new_env = tuple(v for v in P.env if v in keep)
    if P._empty:
        return Polyhedron.empty(new_env)
    cols = [i + 1 for i, v in enumerate(P.env) if v not in keep]
    if not cols:
        return P
    res = _fm_eliminate(P.dim, P.eqs, P.ineqs, cols)
    if res is None:
        out = Polyhedron.empty(new_env)
        out._empty = True
        return out
    eqs, ineqs = res
    keep_cols = [0] + [i + 1 for i, v in enumerate(P.env) if v in keep]
    out = Polyhedron.from_rows(new_env, [[r[c] for c in keep_cols] for r in eqs],
                               [[r[c] for c in keep_cols] for r in ineqs])
    if P._empty is not None:
        out._empty = P._empty
    return out


# -- coverage


def _cell_point(n, eqs, ineqs, stricts):
    """A point with ``eqs = 0``, ``ineqs >= 0`` and every strict row ``> 0``, or None."""
    if not stricts:
        res = solve_lp(n, ineqs, eqs, (0,) * (n + 1))
        return list(res.point) if isinstance(res, Optimum) else None
    # extra variable eps (last column): s - eps >= 0, 1 - eps >= 0, maximize eps
    ext = lambda r: tuple(r) + (0,)
    rows = [ext(r) for r in ineqs]
    rows += [tuple(r) + (-1,) for r in stricts]
    rows.append((1,) + (0,) * n + (-1,))
    res = solve_lp(n + 1, rows, [ext(r) for r in eqs], (0,) * (n + 1) + (1,), maximize=True)
    if isinstance(res, Optimum) and res.value > 0:
        return list(res.point[:n])
    return None


def _uncovered(n, Ps, eqs, ineqs, stricts):
    pt = _cell_point(n, eqs, ineqs, stricts)
    if pt is None:
        return None
    # members that cannot meet the cell are irrelevant
    x = [1] + pt
    k = next((i for i, P in enumerate(Ps)
              if all(_dot(r, x) == 0 for r in P.eqs) and all(_dot(r, x) >= 0 for r in P.ineqs)), None)
    if k is None:
        # the sample point itself may still be covered by nobody: verify and return
        return pt
    P, rest = Ps[k], Ps[:k] + Ps[k + 1:]
    acc_e, acc_i = list(eqs), list(ineqs)
    for r in P.eqs:
        neg = tuple(-c for c in r)
        for s in (r, neg):
            w = _uncovered(n, rest, acc_e, acc_i, stricts + [s])
            if w is not None:
                return w
        acc_e.append(r)
    for r in P.ineqs:
        w = _uncovered(n, rest, acc_e, acc_i, stricts + [tuple(-c for c in r)])
        if w is not None:
            return w
        acc_i.append(r)
    return None


def uncovered_point(Ps: Sequence[Polyhedron], Q: Polyhedron):
    """A point of Q outside every member of Ps, or None when Q is covered."""
    for P in Ps:
        if P.env != Q.env:
            raise DomainError("coverage requires a shared environment")
    Ps = [P for P in Ps if not P._empty]
    pt = _uncovered(Q.dim, list(Ps), list(Q.eqs), list(Q.ineqs), [])
    return None if pt is None else dict(zip(Q.env, pt))


def union_covers(Ps: Sequence[Polyhedron], Q: Polyhedron) -> bool:
    return uncovered_point(Ps, Q) is None
