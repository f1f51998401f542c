"""Simplifying a model in time and in space.

Abstraction trades fidelity for tractability along two axes: coarsening
a variable's time sequence (fewer probabilistic nodes, the gaps filled by
copies) and dropping variables outright (with everything that only
existed to support them).  An abstraction lattice enumerates the variant
models spanned by both axes.
"""

import pathlib

from tdid.abstraction import (
    DependencyError,
    abstract_space,
    enumerate_abstractions,
    parse_lattice,
    retime,
)
from tdid.deploy import deploy, table_entry_count
from tdid.model import parse

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "fixtures"


def main():
    model = parse((FIXTURES / "cardiac.tdid").read_text())
    print("full model variables:", [v.name for v in model.variables])

    # --- time abstraction --------------------------------------------------
    # Restrict every sequence to <1,3>.  Slice 2 keeps only deterministic
    # copies, and since nothing depends on them they vanish entirely after
    # barren elimination.
    coarse = retime(model, "all", (1, 3))
    print("\nafter retiming all variables to (1, 3):")
    for v in coarse.variables:
        print(f"  {v.name:8s} times={v.times}")
    lean = deploy(coarse)
    print("deployed slices with nodes:", sorted({i for _, i in (n.id for n in lean.nodes)}))
    print(
        "parameters: full =", table_entry_count(deploy(model)),
        " coarse =", table_entry_count(lean),
    )

    # --- space abstraction -------------------------------------------------
    # Dropping the cognitive-damage variable CD also removes its utility
    # U_dmg, and then the perfusion chain (poa, cbf) that only predicted
    # CD.  What survives is the rhythm/treatment/survival core.
    slim = abstract_space(model, ["CD"])
    print("\nafter dropping CD:", [v.name for v in slim.variables])

    # Dropping a variable that retained tables still condition on is
    # refused, listing exactly what would need re-specification.
    try:
        abstract_space(model, ["poa"])
    except DependencyError as err:
        print("\ndropping poa is rejected:")
        print(" ", err)

    # --- the abstraction lattice -------------------------------------------
    spec = parse_lattice((FIXTURES / "cardiac.lattice").read_text())
    print("\n=== lattice variants ===")
    for variant in enumerate_abstractions(model, spec):
        did = deploy(variant.model)
        print(
            f"  {', '.join(variant.tags):45s}"
            f" variables={len(variant.model.variables):2d}"
            f" parameters={table_entry_count(did):3d}"
        )


if __name__ == "__main__":
    main()
