"""Stuttering simulations between flow graphs, loop preservation, and robustness of summaries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Tuple

from .flowgraph import FlowGraph, all_local_cycles, summarize
from .ratlin import DomainError, Substitution
from .transition import TransitionFormula, tf_counterexample, tf_entails, tf_one, tf_subst, tf_zero

MATCH, STUTTER, EITHER = "match", "stutter", "either"


@dataclass(frozen=True)
class StutterMap:
    """Vertex map ``h`` from G to H and substitution ``f`` sending H-variables to G-terms."""

    h: Mapping
    f: Substitution

    def validate(self, G: FlowGraph, H: FlowGraph):
        missing = [v for v in G.vertices if v not in self.h]
        if missing:
            raise DomainError(f"vertex map has no image for {missing}")
        bad = [w for w in self.h.values() if w not in H.vertices]
        if bad:
            raise DomainError(f"vertex map targets unknown vertices {bad}")
        if set(self.f.targets) != set(H.variables):
            raise DomainError("substitution must be total on the simulating graph's variables")
        if not set(self.f.sources) <= set(G.variables):
            raise DomainError("substitution terms must range over the simulated graph's variables")

    def then(self, other: "StutterMap") -> "StutterMap":
        """Compose ``self: G -> H`` with ``other: H -> K``."""
        return StutterMap({u: other.h[w] for u, w in self.h.items()}, other.f.then(self.f))


def identity_map(G: FlowGraph) -> StutterMap:
    return StutterMap({v: v for v in G.vertices}, Substitution.identity(G.variables))


# -- results


@dataclass
class SimYes:
    tags: Dict[Tuple, str]
    ok: bool = True

    def __bool__(self):
        return True


@dataclass
class SimNo:
    edge: Tuple
    reason: str
    point: Optional[tuple] = None  # (pre, post) maps over G's variables
    ok: bool = False

    def __bool__(self):
        return False


@dataclass
class LoopYes:
    witness: Dict[Tuple, str]
    unrolling: Dict[object, int] = field(default_factory=dict)
    ok: bool = True

    def __bool__(self):
        return True


@dataclass
class LoopNo:
    clause: str
    detail: str
    ok: bool = False

    def __bool__(self):
        return False


@dataclass
class Verified:
    ok: bool = True

    def __bool__(self):
        return True


@dataclass
class Refuted:
    vertex: object
    g_summary: TransitionFormula
    h_summary: TransitionFormula
    point: Optional[tuple] = None
    ok: bool = False

    def __bool__(self):
        return False


# -- stuttering simulation


def check_stutter_sim(G: FlowGraph, H: FlowGraph, m: StutterMap):
    m.validate(G, H)
    f, h = m.f, m.h
    X = G.variables
    one_h = tf_subst(tf_one(H.variables), f, X)
    if h[G.root] != H.root:
        return SimNo((G.root, G.root), f"root {G.root} is mapped to {h[G.root]}, not to the root {H.root}")
    tags = {}
    for (u, v), w in sorted(G.edges.items(), key=lambda e: (G.vertices.index(e[0][0]), G.vertices.index(e[0][1]))):
        hu, hv = h[u], h[v]
        target = None
        match = False
        if (hu, hv) in H.edges:
            target = tf_subst(H.edges[(hu, hv)], f, X)
            match = tf_entails(w, target)
        stutter = hu == hv and tf_entails(w, one_h)
        if match and stutter:
            tags[(u, v)] = EITHER
        elif match:
            tags[(u, v)] = MATCH
        elif stutter:
            tags[(u, v)] = STUTTER
        else:
            if target is None and hu != hv:
                reason = f"no edge {hu}->{hv} in {H.name} and the endpoints differ"
                point = tf_counterexample(w, tf_zero(X))
            elif target is None:
                reason = f"edge does not stutter and {H.name} has no self-loop on {hu}"
                point = tf_counterexample(w, one_h)
            else:
                reason = f"weight is not simulated by {hu}->{hv}" + (" nor by the identity" if hu == hv else "")
                point = tf_counterexample(w, target)
            return SimNo((u, v), reason, point)
    return SimYes(tags)


# -- loop preservation


class _Potentials:
    """Weighted union-find for constraints ``d(b) - d(a) = w``."""

    def __init__(self):
        self.parent = {}
        self.off = {}

    def find(self, x):
        if x not in self.parent:
            self.parent[x], self.off[x] = x, 0
            return x, 0
        path = []
        while self.parent[x] != x:
            path.append(x)
            x = self.parent[x]
        # compress
        total = 0
        for y in reversed(path):
            total += self.off[y]
        acc = total
        for y in path:
            o = self.off[y]
            self.parent[y], self.off[y] = x, acc
            acc -= o
        return x, total if path else 0

    def union(self, a, b, w) -> bool:
        ra, oa = self.find(a)
        rb, ob = self.find(b)
        if ra == rb:
            return ob - oa == w
        self.parent[rb] = ra
        self.off[rb] = oa + w - ob
        return True

    def diff(self, a, b):
        ra, oa = self.find(a)
        rb, ob = self.find(b)
        return ob - oa if ra == rb else None


_END = object()


def _labels(G, h, loops, header, choice) -> Optional[_Potentials]:
    L = loops[header]
    pot = _Potentials()
    pot.find(header)
    for (a, b) in G.edges:
        if a in L and b in L:
            tag = choice.get((a, b))
            if tag is None:
                continue
            inc = 1 if tag == MATCH and h[a] == h[header] else 0
            if not pot.union(a, _END if b == header else b, inc):
                return None
    return pot


def check_loop_preserving(G: FlowGraph, H: FlowGraph, m: StutterMap, sim=None):
    sim = sim if sim is not None else check_stutter_sim(G, H, m)
    if not sim:
        return LoopNo("stuttering", f"edge {sim.edge[0]}->{sim.edge[1]}: {sim.reason}")
    h = m.h
    lg = all_local_cycles(G)
    lh = all_local_cycles(H)
    for v, L in lg.items():
        for u in L:
            if h[u] not in lh[h[v]]:
                return LoopNo("membership", f"{u} is in the loop of {v} but {h[u]} is not in the loop of {h[v]}")
    for v, L in lg.items():
        for u in L:
            if u != v and h[u] == h[v] and lg[u]:
                return LoopNo("non-nesting", f"{u} heads a loop nested in {v} and both map to {h[v]}")
    found = find_unrolling_witness(G, h, sim.tags, lg)
    if found is None:
        headers = [v for v in G.vertices if lg[v]]
        return LoopNo("consistent unrolling",
                      "no witness gives every primitive local cycle the same positive length "
                      f"(headers {', '.join(map(str, headers))})")
    return LoopYes(*found)


def find_unrolling_witness(G: FlowGraph, h: Mapping, tags: Mapping, loops: Mapping):
    """Resolve the Either tags so every header has one positive unrolling count.

    Returns ``(tags, counts)`` or None.  Only Either edges inside some loop whose
    source maps to that loop's header image are branched on; the rest default to Match.
    """
    headers = [v for v in G.vertices if loops[v]]
    relevant = sorted({e for e, t in tags.items() if t == EITHER and any(
        e[0] in loops[v] and e[1] in loops[v] and h[e[0]] == h[v] for v in headers)}, key=str)
    choice = {e: (MATCH if t == EITHER else t) for e, t in tags.items() if e not in relevant}

    def consistent():
        return all(_labels(G, h, loops, v, choice) is not None for v in headers)

    def unroll_counts():
        out = {}
        for v in headers:
            n = _labels(G, h, loops, v, choice).diff(v, _END)
            if n is None or n < 1:
                return None
            out[v] = n
        return out

    def search(k):
        if not consistent():
            return None
        if k == len(relevant):
            return unroll_counts()
        for t in (MATCH, STUTTER):
            choice[relevant[k]] = t
            got = search(k + 1)
            if got is not None:
                return got
        del choice[relevant[k]]
        return None

    counts = search(0)
    return None if counts is None else (dict(choice), counts)


# -- robustness of summaries


def verify_robustness(G: FlowGraph, H: FlowGraph, m: StutterMap, star: Optional[Callable] = None):
    m.validate(G, H)
    sg = summarize(G, star=star)
    sh = summarize(H, star=star)
    for v in G.vertices:
        target = tf_subst(sh[m.h[v]], m.f, G.variables)
        if not tf_entails(sg[v], target):
            return Refuted(v, sg[v], sh[m.h[v]], tf_counterexample(sg[v], target))
    return Verified()
