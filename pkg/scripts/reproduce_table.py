"""Print each step of the loop summary computation for the two overview loops."""

from pathlib import Path

from robustapa.flowgraph import eliminate, local_cycles
from robustapa.frontend import load_graph
from robustapa.iterate import alpha_lra, alpha_pga, lift, star_combined, star_lra, star_pga
from robustapa.transition import tf_delta

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def loop_body(G, header):
    for v in sorted(local_cycles(G, header) - {header}):
        G = eliminate(G, v)
    return G.edges[(header, header)]


def main():
    for name, header in [("p1.imp", "2"), ("p2.imp", "3")]:
        G = loop_body(load_graph((CORPUS / name).read_text(), name), header)
        A = alpha_lra(G)
        guards = alpha_pga(G).formula
        rows = [
            ("loop body", G),
            ("delta hull", tf_delta(G)),
            ("recurrences", lift(A, A.formula.formula())),
            ("precondition", guards.pre_guard),
            ("postcondition", guards.post_guard),
            ("guard closure", star_pga(G)),
            ("recurrence closure", star_lra(G)),
            ("loop summary", star_combined(G)),
        ]
        print(f"== {name} (header {header})")
        for label, value in rows:
            print(f"  {label:<19} {value}")


if __name__ == "__main__":
    main()
