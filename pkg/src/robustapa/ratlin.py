"""Exact rational scalars, affine terms, linear substitutions and an exact LP.

Rationals are :class:`fractions.Fraction`; everything above this module is
built on exact arithmetic only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Rational = Fraction


class DomainError(ValueError):
    """A variable was used outside the domain of a point or substitution."""


def rat_arith(a, b, op: str) -> Fraction:
    a, b = Fraction(a), Fraction(b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise ZeroDivisionError("rational division by zero")
        return a / b
    raise ValueError(f"unknown operator {op!r}")


@dataclass(frozen=True, order=True)
class Var:
    name: str
    primed: bool = False

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable names must be nonempty")

    def prime(self) -> "Var":
        return Var(self.name, True)

    def unprime(self) -> "Var":
        return Var(self.name, False)

    def __str__(self):
        return self.name + ("'" if self.primed else "")

    # arithmetic promotes to AffineTerm
    def __add__(self, o):
        return AffineTerm.of_var(self) + o

    __radd__ = __add__

    def __sub__(self, o):
        return AffineTerm.of_var(self) - o

    def __rsub__(self, o):
        return _as_term(o) - AffineTerm.of_var(self)

    def __neg__(self):
        return AffineTerm.of_var(self, -1)

    def __mul__(self, k):
        return AffineTerm.of_var(self) * k

    __rmul__ = __mul__

    def __repr__(self):
        return f"Var({str(self)!r})"


def var(text: str) -> Var:
    """``var("x'")`` is the primed copy of ``x``."""
    if text.endswith("'"):
        return Var(text[:-1], True)
    return Var(text)


class AffineTerm:
    """An immutable affine form ``sum(c_v * v) + constant`` with rational coefficients."""

    __slots__ = ("_coeffs", "_constant", "_hash")

    def __init__(self, coeffs: Mapping[Var, object] | None = None, constant=0):
        cs = {}
        for v, a in (coeffs or {}).items():
            a = Fraction(a)
            if a:
                cs[v] = a
        self._coeffs = cs
        self._constant = Fraction(constant)
        self._hash = None

    @classmethod
    def of_var(cls, v: Var | str, coeff=1) -> "AffineTerm":
        if isinstance(v, str):
            v = var(v)
        return cls({v: coeff})

    @classmethod
    def const(cls, c) -> "AffineTerm":
        return cls({}, c)

    @property
    def coeffs(self) -> Mapping[Var, Fraction]:
        return dict(self._coeffs)

    @property
    def constant(self) -> Fraction:
        return self._constant

    def coeff(self, v: Var) -> Fraction:
        return self._coeffs.get(v, Fraction(0))

    @property
    def variables(self) -> frozenset:
        return frozenset(self._coeffs)

    def is_constant(self) -> bool:
        return not self._coeffs

    def __add__(self, other) -> "AffineTerm":
        other = _as_term(other)
        cs = dict(self._coeffs)
        for v, a in other._coeffs.items():
            cs[v] = cs.get(v, 0) + a
        return AffineTerm(cs, self._constant + other._constant)

    __radd__ = __add__

    def __neg__(self) -> "AffineTerm":
        return AffineTerm({v: -a for v, a in self._coeffs.items()}, -self._constant)

    def __sub__(self, other) -> "AffineTerm":
        return self + (-_as_term(other))

    def __rsub__(self, other) -> "AffineTerm":
        return _as_term(other) - self

    def __mul__(self, k) -> "AffineTerm":
        if isinstance(k, AffineTerm):
            if k.is_constant():
                k = k.constant
            elif self.is_constant():
                return k * self._constant
            else:
                raise ValueError("product of two non-constant terms is not affine")
        k = Fraction(k)
        return AffineTerm({v: a * k for v, a in self._coeffs.items()}, self._constant * k)

    __rmul__ = __mul__

    def __truediv__(self, k) -> "AffineTerm":
        if isinstance(k, AffineTerm):
            if not k.is_constant():
                raise ValueError("division by a non-constant term")
            k = k.constant
        k = Fraction(k)
        if k == 0:
            raise ZeroDivisionError("division of a term by zero")
        return self * (1 / k)

    def __eq__(self, other):
        if not isinstance(other, AffineTerm):
            return NotImplemented
        return self._constant == other._constant and self._coeffs == other._coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self._coeffs.items()), self._constant))
        return self._hash

    def evaluate(self, point: Mapping[Var, object]) -> Fraction:
        return term_eval(self, point)

    def rename(self, mapping: Mapping[Var, Var]) -> "AffineTerm":
        cs: dict = {}
        for v, a in self._coeffs.items():
            w = mapping.get(v, v)
            cs[w] = cs.get(w, 0) + a
        return AffineTerm(cs, self._constant)

    def primed(self) -> "AffineTerm":
        """Replace every unprimed variable by its primed copy."""
        return self.rename({v: v.prime() for v in self._coeffs if not v.primed})

    def __str__(self):
        return format_linear(sorted(self._coeffs.items()), self._constant)

    def __repr__(self):
        return f"AffineTerm({str(self)!r})"


def _as_term(x) -> AffineTerm:
    if isinstance(x, AffineTerm):
        return x
    if isinstance(x, Var):
        return AffineTerm({x: 1})
    return AffineTerm({}, x)


def _fmt_num(a: Fraction) -> str:
    return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"


def format_linear(items: Iterable, constant=0) -> str:
    """Render ``[(var, coeff), ...] + constant`` as ``2*x - y + 1``."""
    parts = []
    for v, a in items:
        if a == 0:
            continue
        mag = abs(a)
        body = str(v) if mag == 1 else f"{_fmt_num(mag)}*{v}"
        if not parts:
            parts.append(body if a > 0 else "-" + body)
        else:
            parts.append(("+ " if a > 0 else "- ") + body)
    constant = Fraction(constant)
    if constant or not parts:
        if not parts:
            parts.append(_fmt_num(constant))
        else:
            parts.append(("+ " if constant > 0 else "- ") + _fmt_num(abs(constant)))
    return " ".join(parts)


def term_eval(t: AffineTerm, point: Mapping[Var, object]) -> Fraction:
    total = t.constant
    for v, a in t._coeffs.items():
        if v not in point:
            raise DomainError(f"no value for variable {v}")
        total += a * Fraction(point[v])
    return total


class Substitution:
    """A linear map in transposed form: each target variable is sent to an
    affine term over the source variables.

    Applying it to a primed target ``y'`` uses the primed image ``sigma(y)[X -> X']``.
    """

    __slots__ = ("mapping", "sources", "targets")

    def __init__(self, mapping: Mapping, sources: Iterable | None = None,
                 targets: Iterable | None = None):
        m = {}
        for y, t in mapping.items():
            y = var(y) if isinstance(y, str) else y
            m[y] = _as_term(t) if not isinstance(t, str) else AffineTerm.of_var(t)
        targets = tuple(targets) if targets is not None else tuple(sorted(m))
        targets = tuple(var(y) if isinstance(y, str) else y for y in targets)
        if set(targets) != set(m):
            raise DomainError("substitution must be total on exactly its target variables")
        mentioned = set()
        for t in m.values():
            mentioned |= t.variables
        if sources is None:
            sources = tuple(sorted(mentioned))
        sources = tuple(var(x) if isinstance(x, str) else x for x in sources)
        if not mentioned <= set(sources):
            raise DomainError(f"terms mention non-source variables {sorted(mentioned - set(sources))}")
        if any(v.primed for v in targets) or any(v.primed for v in sources):
            raise DomainError("substitutions range over unprimed variables only")
        self.mapping = m
        self.sources = sources
        self.targets = targets

    @classmethod
    def identity(cls, variables: Iterable) -> "Substitution":
        vs = tuple(variables)
        return cls({v: AffineTerm.of_var(v) for v in vs}, vs, vs)

    def __getitem__(self, y: Var) -> AffineTerm:
        return self.mapping[y]

    def image(self, y: Var) -> AffineTerm:
        """Image of a (possibly primed) target variable."""
        if y.primed:
            base = self.mapping.get(y.unprime())
            if base is None:
                raise DomainError(f"{y} outside substitution domain")
            return base.primed()
        t = self.mapping.get(y)
        if t is None:
            raise DomainError(f"{y} outside substitution domain")
        return t

    def apply(self, t: AffineTerm) -> AffineTerm:
        return subst_apply(t, self)

    def then(self, tau: "Substitution") -> "Substitution":
        """The composite ``y -> sigma(y)[tau]`` (apply ``self`` first, then ``tau``)."""
        return Substitution({y: subst_apply(t, tau) for y, t in self.mapping.items()},
                            tau.sources, self.targets)

    def is_identity(self) -> bool:
        return all(t == AffineTerm.of_var(y) for y, t in self.mapping.items())

    def __eq__(self, other):
        if not isinstance(other, Substitution):
            return NotImplemented
        return self.mapping == other.mapping

    def __hash__(self):
        return hash(frozenset(self.mapping.items()))

    def __str__(self):
        return "[" + ", ".join(f"{y} -> {self.mapping[y]}" for y in self.targets) + "]"

    __repr__ = __str__


def subst_apply(t: AffineTerm, sigma: Substitution) -> AffineTerm:
    out = AffineTerm.const(t.constant)
    for v, a in t._coeffs.items():
        out = out + sigma.image(v) * a
    return out


# ---------------------------------------------------------------------------
# Exact linear programming


@dataclass(frozen=True)
class Infeasible:
    pass


@dataclass(frozen=True)
class Unbounded:
    pass


@dataclass(frozen=True)
class Optimum:
    value: Fraction
    point: tuple = ()


GEQ = ">="
EQ = "="


def lp_optimize(constraints: Sequence, objective: AffineTerm, sense: str = "max"):
    """Optimize an affine objective over ``[(term, ">=" | "="), ...]``.

    Returns :class:`Infeasible`, :class:`Unbounded` or :class:`Optimum`; an
    optimum carries a witness point as ``((var, value), ...)``.
    """
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    vs = set(objective.variables)
    for t, _ in constraints:
        vs |= t.variables
    order = sorted(vs)
    idx = {v: i for i, v in enumerate(order)}

    def row(t: AffineTerm):
        r = [Fraction(0)] * (len(order) + 1)
        r[0] = t.constant
        for v, a in t._coeffs.items():
            r[idx[v] + 1] = a
        return r

    ineqs = [row(t) for t, rel in constraints if rel == GEQ]
    eqs = [row(t) for t, rel in constraints if rel == EQ]
    if len(ineqs) + len(eqs) != len(constraints):
        raise ValueError("relations must be '>=' or '='")
    res = solve_lp(len(order), ineqs, eqs, row(objective), maximize=(sense == "max"))
    if isinstance(res, Optimum):
        return Optimum(res.value, tuple(zip(order, res.point)))
    return res


def solve_lp(n: int, ineqs, eqs, objective, maximize: bool = False):
    """Vector-level exact LP.

    Rows are ``(c0, a1..an)`` meaning ``c0 + a.x >= 0`` (``ineqs``) or ``= 0``
    (``eqs``); ``objective`` is ``(c0, c1..cn)``.  Variables are free.
    """
    obj = [Fraction(c) for c in objective]
    if maximize:
        obj = [-c for c in obj]
    res = _minimize(n, [list(map(Fraction, r)) for r in ineqs],
                    [list(map(Fraction, r)) for r in eqs], obj)
    if maximize and isinstance(res, Optimum):
        return Optimum(-res.value, res.point)
    return res




def _minimize(n, ineqs, eqs, obj):
    # Dictionary: basic variable -> (const, {nonbasic: coeff}).  Variables
    # 0..n-1 are the free originals, n.. are slacks, -1 is the phase-1 auxiliary.
    rows = {}
    for i, r in enumerate(ineqs):
        rows[n + i] = [r[0], {j - 1: r[j] for j in range(1, n + 1) if r[j]}]
    fixed = {}  # free variables that became basic; never leave

    def subst(target, e, expr):
        c = target[1].pop(e, None)
        if c is None:
            return
        target[0] += c * expr[0]
        coeffs = target[1]
        for k, a in expr[1].items():
            s = coeffs.get(k, 0) + c * a
            if s:
                coeffs[k] = s
            else:
                coeffs.pop(k, None)

    def pivot(b, e, objs):
        row = rows.pop(b)
        a = row[1].pop(e)
        expr = [-row[0] / a, {k: -c / a for k, c in row[1].items()}]
        expr[1][b] = 1 / a
        for r in rows.values():
            subst(r, e, expr)
        for r in fixed.values():
            subst(r, e, expr)
        for r in objs:
            subst(r, e, expr)
        return expr

    # Equalities: solve each for one free variable.
    for r in eqs:
        cur = [r[0], {j - 1: r[j] for j in range(1, n + 1) if r[j]}]
        for v, ex in fixed.items():
            subst(cur, v, ex)
        if not cur[1]:
            if cur[0]:
                return Infeasible()
            continue
        e = min(cur[1])
        a = cur[1].pop(e)
        expr = [-cur[0] / a, {k: -c / a for k, c in cur[1].items()}]
        for rr in rows.values():
            subst(rr, e, expr)
        for rr in fixed.values():
            subst(rr, e, expr)
        fixed[e] = expr
    # Pivot remaining free variables into the basis.
    for e in range(n):
        if e in fixed:
            continue
        b = next((b for b in sorted(rows) if e in rows[b][1]), None)
        if b is None:
            continue
        fixed[e] = pivot(b, e, [])

    if any(r[0] < 0 for r in rows.values()):
        for r in rows.values():
            r[1][-1] = Fraction(1)
        w = [Fraction(0), {-1: Fraction(1)}]
        b = min(rows, key=lambda b: (rows[b][0], b))
        rows[-1] = pivot(b, -1, [w])
        if _run(rows, w, pivot, set()) == "unbounded" or w[0] != 0:
            return Infeasible()
        if -1 in rows:
            row = rows[-1]
            e = min(row[1], default=None)
            if e is None:
                del rows[-1]
            else:
                rows[e] = pivot(-1, e, [])
        for r in rows.values():
            r[1].pop(-1, None)
        for r in fixed.values():
            r[1].pop(-1, None)

    z = [obj[0], {j - 1: obj[j] for j in range(1, n + 1) if obj[j]}]
    for b, ex in list(rows.items()) + list(fixed.items()):
        subst(z, b, ex)
    free_nonbasic = {e for e in range(n) if e not in fixed}
    if any(z[1].get(e) for e in free_nonbasic):
        return Unbounded()
    if _run(rows, z, pivot, free_nonbasic) == "unbounded":
        return Unbounded()
    x = [Fraction(0)] * n
    for e, ex in fixed.items():
        x[e] = ex[0]
    return Optimum(z[0], tuple(x))


def _run(rows, z, pivot, skip):
    """Bland-rule phase on the dictionary ``rows`` minimizing ``z``."""
    while True:
        cand = [e for e, c in z[1].items() if c < 0 and e not in skip]
        if not cand:
            return "optimal"
        e = min(cand)
        best = None
        for b, r in rows.items():
            a = r[1].get(e)
            if a is not None and a < 0:
                key = (r[0] / -a, b)
                if best is None or key < best:
                    best = key
        if best is None:
            return "unbounded"
        rows[e] = pivot(best[1], e, [z])
