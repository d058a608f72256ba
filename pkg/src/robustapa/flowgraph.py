"""Flow graphs weighted by transition formulas, and their summaries by vertex elimination."""

from __future__ import annotations

from typing import Callable, Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

from .transition import TransitionFormula, tf_compose, tf_one, tf_plus, tf_zero


class GraphError(ValueError):
    """Malformed flow graph."""


class ReducibilityError(GraphError):
    """The operation needs a reducible flow graph."""


def _default_star():
    from .iterate import star_combined
    return star_combined


class FlowGraph:
    """Vertices in a fixed order, a root, and non-false edge weights over shared variables."""

    __slots__ = ("name", "variables", "vertices", "root", "edges", "_succ", "_pred")

    def __init__(self, variables: Sequence, vertices: Iterable, root, edges: Mapping,
                 name: str = "g", check_reachable: bool = True):
        self.name = name
        self.variables = tuple(variables)
        self.vertices = tuple(dict.fromkeys(vertices))
        self.root = root
        if root not in self.vertices:
            raise GraphError(f"root {root!r} is not a vertex")
        vs = set(self.vertices)
        stored = {}
        for (u, v), w in edges.items():
            if u not in vs or v not in vs:
                raise GraphError(f"edge {u}->{v} mentions an unknown vertex")
            if not isinstance(w, TransitionFormula) or w.variables != self.variables:
                raise GraphError(f"edge {u}->{v} weight is not over {self.variables}")
            if not w.is_false():
                stored[(u, v)] = w
        self.edges: Dict[Tuple, TransitionFormula] = stored
        pos = {v: i for i, v in enumerate(self.vertices)}
        self._succ = {v: [] for v in self.vertices}
        self._pred = {v: [] for v in self.vertices}
        for u, v in sorted(stored, key=lambda e: (pos[e[0]], pos[e[1]])):
            self._succ[u].append(v)
            self._pred[v].append(u)
        if check_reachable:
            seen = set(self.reachable())
            missing = [v for v in self.vertices if v not in seen]
            if missing:
                raise GraphError(f"vertices unreachable from the root: {missing}")

    def succ(self, u) -> list:
        return list(self._succ[u])

    def pred(self, v) -> list:
        return list(self._pred[v])

    def weight(self, u, v) -> TransitionFormula:
        w = self.edges.get((u, v))
        return w if w is not None else tf_zero(self.variables)

    def reachable(self) -> list:
        seen, stack, out = {self.root}, [self.root], []
        while stack:
            u = stack.pop()
            out.append(u)
            for v in reversed(self._succ[u]):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return out

    def postorder(self) -> list:
        seen, out = set(), []

        def visit(u):
            seen.add(u)
            for v in self._succ[u]:
                if v not in seen:
                    visit(v)
            out.append(u)
        visit(self.root)
        return out

    def rpo(self) -> list:
        """Reverse postorder of the vertices reachable from the root."""
        return self.postorder()[::-1]

    def with_edges(self, edges: Mapping) -> "FlowGraph":
        return FlowGraph(self.variables, self.vertices, self.root, edges, self.name, check_reachable=False)

    def to_text(self) -> str:
        lines = [f"graph {self.name} vars {' '.join(v.name for v in self.variables)}", f"root {self.root}"]
        for u in self.vertices:
            for v in self._succ[u]:
                lines.append(f"{u} -> {v} : {self.edges[(u, v)]}")
        return "\n".join(lines) + "\n"

    def __str__(self):
        return self.to_text()


# ---------------------------------------------------------------------------
# dominance and loops


def dominators(G: FlowGraph) -> dict:
    order = G.rpo()
    allv = set(order)
    dom = {v: set(allv) for v in order}
    dom[G.root] = {G.root}
    changed = True
    while changed:
        changed = False
        for v in order:
            if v == G.root:
                continue
            preds = [p for p in G.pred(v) if p in allv]
            new = set.intersection(*(dom[p] for p in preds)) if preds else set()
            new = new | {v}
            if new != dom[v]:
                dom[v] = new
                changed = True
    return {v: frozenset(s) for v, s in dom.items()}


def back_edges(G: FlowGraph, dom=None) -> list:
    dom = dom or dominators(G)
    return [(u, v) for (u, v) in G.edges if u in dom and v in dom[u]]


def is_reducible(G: FlowGraph, dom=None) -> bool:
    dom = dom or dominators(G)
    back = set(back_edges(G, dom))
    indeg = {v: 0 for v in G.vertices}
    for (u, v) in G.edges:
        if (u, v) not in back:
            indeg[v] += 1
    ready = [v for v in G.vertices if indeg[v] == 0]
    done = 0
    while ready:
        u = ready.pop()
        done += 1
        for v in G.succ(u):
            if (u, v) not in back:
                indeg[v] -= 1
                if indeg[v] == 0:
                    ready.append(v)
    return done == len(G.vertices)


def local_cycles(G: FlowGraph, v, dom=None) -> frozenset:
    """Natural loop of header ``v``: empty when no back edge targets ``v``."""
    dom = dom or dominators(G)
    tails = [u for u in G.pred(v) if u in dom and v in dom[u]]
    if not tails:
        return frozenset()
    body = {v}
    stack = [u for u in tails if u != v]
    body |= set(stack)
    while stack:
        u = stack.pop()
        for p in G.pred(u):
            if p not in body and p in dom:
                body.add(p)
                stack.append(p)
    return frozenset(u for u in body if v in dom[u])


def all_local_cycles(G: FlowGraph, dom=None) -> dict:
    dom = dom or dominators(G)
    return {v: local_cycles(G, v, dom) for v in G.vertices}


def loop_depth(G: FlowGraph, loops=None) -> dict:
    loops = loops or all_local_cycles(G)
    return {x: sum(1 for h, L in loops.items() if h != x and x in L) for x in G.vertices}


def is_admissible(order: Sequence, loops: Mapping) -> bool:
    pos = {v: i for i, v in enumerate(order)}
    for i, v in enumerate(order):
        for u in loops.get(v, ()):
            if u != v and u in pos and pos[u] > i:
                return False
    return True


def admissible_order(G: FlowGraph) -> list:
    dom = dominators(G)
    if not is_reducible(G, dom):
        raise ReducibilityError(f"graph {G.name} is irreducible")
    loops = all_local_cycles(G, dom)
    depth = loop_depth(G, loops)
    rpo = {v: i for i, v in enumerate(G.rpo())}
    order = sorted((v for v in G.vertices if v != G.root), key=lambda v: (-depth[v], rpo.get(v, len(rpo))))
    if not is_admissible(order, loops):
        raise AssertionError("computed elimination order is not admissible")
    return order


def all_admissible_orders(G: FlowGraph) -> Iterator[list]:
    """Every admissible enumeration of the non-root vertices."""
    loops = all_local_cycles(G)
    rest = [v for v in G.vertices if v != G.root]
    need = {v: {u for u in loops[v] if u != v and u != G.root} for v in rest}

    def go(prefix, done, left):
        if not left:
            yield list(prefix)
            return
        for v in left:
            if need[v] <= done:
                prefix.append(v)
                yield from go(prefix, done | {v}, [u for u in left if u != v])
                prefix.pop()
    yield from go([], frozenset(), rest)


# ---------------------------------------------------------------------------
# elimination and summaries


def eliminate(G: FlowGraph, v, star: Optional[Callable] = None) -> FlowGraph:
    if v == G.root:
        raise GraphError("the root cannot be eliminated")
    star = star or _default_star()
    loop = G.edges.get((v, v))
    s = star(loop) if loop is not None else None
    edges = {e: w for e, w in G.edges.items() if e[0] != v}
    outs = [u2 for u2 in G.succ(v) if u2 != v]
    for u in G.pred(v):
        if u == v:
            continue
        w_uv = G.edges[(u, v)]
        into = tf_compose(w_uv, s) if s is not None else w_uv
        edges[(u, v)] = into
        for u2 in outs:
            through = tf_compose(into, G.edges[(v, u2)])
            old = edges.get((u, u2))
            edges[(u, u2)] = through if old is None else tf_plus(old, through)
    return G.with_edges(edges)


class SummaryAssignment:
    """A transition formula for every vertex, plus the order that produced it."""

    def __init__(self, graph: FlowGraph, summaries: Mapping, order: Sequence = ()):
        self.graph = graph
        self.summaries = dict(summaries)
        self.order = list(order)

    def __getitem__(self, v) -> TransitionFormula:
        return self.summaries[v]

    def __iter__(self):
        return iter(self.graph.vertices)

    def items(self):
        return [(v, self.summaries[v]) for v in self.graph.vertices]

    def render(self) -> str:
        return "\n".join(f"{v}: {self.summaries[v]}" for v in self.graph.vertices) + "\n"

    __str__ = render


def summarize(G: FlowGraph, order: Optional[Sequence] = None, star: Optional[Callable] = None,
              force: bool = False) -> SummaryAssignment:
    star = star or _default_star()
    reducible = is_reducible(G)
    if not reducible and not force:
        raise ReducibilityError(f"graph {G.name} is irreducible; summaries would depend on the elimination order")
    if order is None:
        order = admissible_order(G) if reducible else [v for v in G.rpo() if v != G.root]
    else:
        order = list(order)
        if sorted(map(str, order)) != sorted(str(v) for v in G.vertices if v != G.root):
            raise GraphError("elimination order must list every non-root vertex once")
        if reducible and not is_admissible(order, all_local_cycles(G)):
            raise GraphError("elimination order is not admissible")
    H = G
    for v in order:
        H = eliminate(H, v, star)
    X = G.variables
    r = G.root
    self_loop = H.edges.get((r, r))
    if self_loop is None:
        head = tf_one(X)
        sums = {r: head}
        for v in G.vertices:
            if v != r:
                sums[v] = H.weight(r, v)
    else:
        # root on a cycle: close its returning paths before leaving it
        head = star(self_loop)
        sums = {r: tf_plus(tf_one(X), head)}
        for v in G.vertices:
            if v != r:
                w = H.weight(r, v)
                sums[v] = tf_compose(head, w) if not w.is_false() else w
    return SummaryAssignment(G, sums, order)
