"""Unrolling a condensed model into its deployed form.

Inference runs on the deployed form: one node per variable per master
time index.  A variable whose own sequence skips an index still gets a
node there — a deterministic copy of the most recent true node — so that
instantaneous arcs from other variables have something to attach to.
This script deploys the two-variable model, points out the copies and
the lag-resolved arc, then shows barren-node elimination and copy
collapse at work.
"""

import pathlib

from tdid.deploy import (
    collapse_copies,
    deploy,
    emit_dot,
    serialize_deployed,
    table_entry_count,
)
from tdid.model import parse

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "fixtures"


def main():
    model = parse((FIXTURES / "two_var_lagged.tdid").read_text())
    did = deploy(model)

    print("=== deployed form ===")
    print(serialize_deployed(did))

    # X lives at times 1 and 3 only, but Y needs an X parent in every
    # slice: X@2 and X@4 are identity copies of X@1 and X@3.  The lag arc
    # Y -> X resolves for X@3 to Y@2, the most recent earlier index of Y.
    copies = [n for n in did.nodes if n.kind == "copy"]
    print("copy nodes:", [f"{b}@{s}" for b, s in (n.id for n in copies)])
    print(
        "lag-resolved parents of X@3:",
        [f"{b}@{s}" for b, s in did.table_by_node[("X", 3)].parents],
    )

    # The copies carry identity tables; they add no free parameters.
    print("probability-table entries (parameters):", table_entry_count(did))

    # Copy collapse rewires children straight to the group representative
    # and drops the copies; the distribution is untouched.
    flat = collapse_copies(did)
    print("\n=== after copy collapse ===")
    print("nodes:", " ".join(f"{b}@{s}" for b, s in sorted(n.id for n in flat.nodes)))

    # Barren nodes (non-value nodes with no path to any value node) are
    # removed by default because they cannot affect expected utility.
    # Keeping them shows what the raw unrolling looks like.
    kept = deploy(model, barren=False)
    print("\nwith barren nodes kept:  ", len(kept.nodes), "nodes")
    print("with barren elimination: ", len(did.nodes), "nodes")

    # A graph text rendering for visualization tools.
    print("\n=== DOT rendering (excerpt) ===")
    print("\n".join(emit_dot(did).splitlines()[:8]), "\n...")


if __name__ == "__main__":
    main()
