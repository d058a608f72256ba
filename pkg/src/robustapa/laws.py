"""Randomized checks of the iteration laws and of robustness under linear simulations."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, List, Optional

from .frontend import VAR_NAMES, RandomFormulaSpec, gen_random_formula, random_constraint
from .iterate import STARS
from .polyhedra import Polyhedron
from .ratlin import AffineTerm, Substitution, Var
from .transition import (TransitionFormula, primes, tf_compose, tf_counterexample, tf_entails, tf_meet,
                         tf_one, tf_plus, tf_power, tf_subst)

LAWS = ("reflexivity", "extensivity", "transitivity", "monotonicity", "unrolling", "robustness")


@dataclass
class LawConfig:
    samples: int = 100
    seed: int = 0
    nvars: int = 2
    domain: str = "combined"
    max_disjuncts: int = 2
    max_constraints: int = 4
    coeff: int = 3
    unroll: tuple = (2, 3)

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("sample count must be at least 1")
        if self.domain not in STARS:
            raise ValueError(f"unknown domain {self.domain!r}")
        if not 1 <= self.nvars <= 3:
            raise ValueError("between 1 and 3 variables")


@dataclass
class LawFailure:
    law: str
    sample: int
    formula: str
    detail: str
    point: Optional[tuple] = None

    def render(self) -> str:
        s = f"[{self.law}] sample {self.sample}: {self.detail}\n  formula: {self.formula}"
        if self.point is not None:
            pre, post = self.point
            s += "\n  point: " + ", ".join(
                [f"{v}={x}" for v, x in pre.items()] + [f"{v}'={x}" for v, x in post.items()])
        return s


@dataclass
class LawReport:
    checked: dict = field(default_factory=lambda: {law: 0 for law in LAWS})
    failures: List[LawFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _entails(law, i, F, lhs, rhs, what, report):
    report.checked[law] += 1
    if tf_entails(lhs, rhs):
        return True
    report.failures.append(LawFailure(law, i, str(F), what, tf_counterexample(lhs, rhs)))
    return False


def check_star_laws(F: TransitionFormula, star: Callable, report: LawReport, i: int = 0,
                    rng: Optional[random.Random] = None, unroll=(2, 3), coeff: int = 3):
    """Reflexivity, extensivity, transitivity, monotonicity and unrolling for one formula."""
    rng = rng or random.Random(i)
    X = F.variables
    s = star(F)
    _entails("reflexivity", i, F, tf_one(X), s, "1 is not below the closure", report)
    _entails("extensivity", i, F, F, s, "F is not below its closure", report)
    ss = tf_compose(s, s)
    if _entails("transitivity", i, F, ss, s, "closure composed with itself grows", report):
        report.checked["transitivity"] -= 1
        _entails("transitivity", i, F, s, ss, "closure composed with itself shrinks", report)
    # monotonicity on both sides of F: a strengthening and a weakening
    env = X + primes(X)
    c = random_constraint(rng, env, coeff)
    R = TransitionFormula(X, [Polyhedron(env, [random_constraint(rng, env, coeff) for _ in range(rng.randint(1, 3))])])
    stronger = tf_meet(F, TransitionFormula(X, [Polyhedron(env, [c])]))
    _entails("monotonicity", i, F, star(stronger), s, f"strengthening by {c} gave a larger closure", report)
    _entails("monotonicity", i, F, s, star(tf_plus(F, R)), f"adding {R} gave a smaller closure", report)
    for n in unroll:
        _entails("unrolling", i, F, star(tf_power(F, n)), s, f"closure of the {n}-th power is larger", report)


def random_substitution(rng: random.Random, X, Y, coeff: int = 3) -> Substitution:
    images = {}
    for y in Y:
        cs = {x: rng.randint(-coeff, coeff) for x in X if rng.random() < 0.7}
        images[y] = AffineTerm(cs, rng.randint(-coeff, coeff) if rng.random() < 0.3 else 0)
    return Substitution(images, X, Y)


def simulation_instance(rng: random.Random, nvars: int, coeff: int = 3, max_disjuncts: int = 2):
    """``(G, sigma, F)`` with ``F = G[sigma, sigma'] & c`` for a random constraint ``c``."""
    ny = rng.randint(1, nvars)
    G = gen_random_formula(RandomFormulaSpec(nvars=ny, max_disjuncts=max_disjuncts, coeff=coeff), rng)
    X = tuple(Var(n) for n in VAR_NAMES[:nvars])
    sigma = random_substitution(rng, X, G.variables, coeff)
    env = X + primes(X)
    c = Polyhedron(env, [random_constraint(rng, env, coeff)])
    F = tf_meet(tf_subst(G, sigma, X), TransitionFormula(X, [c]))
    return G, sigma, F


def check_robustness(G, sigma, F, star: Callable, report: LawReport, i: int = 0):
    X = F.variables
    _entails("robustness", i, F, star(F), tf_subst(star(G), sigma, X),
             f"closure not simulated modulo [{sigma}] by the closure of {G}", report)


def run_laws(cfg: LawConfig, star: Optional[Callable] = None, progress: Optional[Callable] = None) -> LawReport:
    star = star or STARS[cfg.domain]
    rng = random.Random(cfg.seed)
    report = LawReport()
    spec = RandomFormulaSpec(nvars=cfg.nvars, max_disjuncts=cfg.max_disjuncts,
                             max_constraints=cfg.max_constraints, coeff=cfg.coeff)
    for i in range(cfg.samples):
        F = gen_random_formula(spec, rng)
        check_star_laws(F, star, report, i, rng, cfg.unroll, cfg.coeff)
        G, sigma, F2 = simulation_instance(rng, cfg.nvars, cfg.coeff, cfg.max_disjuncts)
        check_robustness(G, sigma, F2, star, report, i)
        if progress:
            progress(i, report)
    return report
