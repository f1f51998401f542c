"""Solving a deployed model for an optimal policy.

The solver computes a maximum-expected-utility policy: one decision rule
per decision node, mapping that decision's observations to an option.
Decisions observe their informational parents plus all earlier decisions.
The exact solver handles signaling — an early decision whose only role is
to relay information to a later one — which stepwise backward induction
misses.  A brute-force enumerator serves as an independent oracle on
small models.
"""

import pathlib

from tdid.deploy import deploy
from tdid.model import parse
from tdid.solve import brute_force, evaluate_policy, policy_json, solve

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "fixtures"

SIGNALING = """
tdid 1
master 1
chance C : c0 c1
decision D1 : a b
decision D2 : a b
value U
arc inst C D1
arc inst D2 U
arc inst C U
cpt C @ 1 | : 0.5 0.5
util U @ 1 | C D2 : 1 0 0 1
"""


def main():
    # The cardiac-arrest model: three slices, a treatment decision per
    # slice observing the heart rhythm, utilities for survival and for
    # avoiding cognitive damage.
    model = parse((FIXTURES / "cardiac.tdid").read_text())
    did = deploy(model)
    policy = solve(did)
    print("=== cardiac model, optimal policy ===")
    print(policy_json(did, policy))
    print()

    # Policies are just data; evaluating one replays the model under the
    # fixed rules.  The solver's claimed value matches its own policy.
    print("claimed MEU:  ", policy.meu)
    print("evaluated MEU:", evaluate_policy(did, policy))

    # Signaling: D1 sees the coin C but influences nothing downstream
    # except what D2 can infer from watching D1.  D2 must match C.  The
    # optimum routes the coin through D1's choice; expected utility 1.0.
    sig = deploy(parse(SIGNALING))
    best = solve(sig)
    print("\n=== signaling model ===")
    for rule in best.rules:
        base, i = rule.node
        print(f"  {base}@{i}: observes {rule.observations}, choices {rule.choices}")
    print("MEU:", best.meu, "(naive slice-by-slice induction only reaches 0.75)")

    # Brute force enumerates every deterministic policy; on small models
    # it independently confirms the solver.
    reference = brute_force(sig)
    print("brute-force MEU:", reference.meu)


if __name__ == "__main__":
    main()
