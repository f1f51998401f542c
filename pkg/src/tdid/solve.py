"""Exact solving of deployed influence diagrams.

A policy assigns, for every decision node, one option per joint state of
what that decision observes.  The observation sets here (informational
parents plus earlier decisions, but not earlier chance observations) do
not give perfect recall, so classic backward induction is not exact: an
early decision can be worth changing purely to signal information to a
later one.  ``solve`` therefore optimizes over whole policies at once.

It treats every policy *entry* (one observation state of one decision) as
a free optimization variable: each decision's CPD is replaced by a
deterministic selector factor "the decision equals the entry chosen for
the observed state", chance nodes are summed out by variable elimination
per utility node, and the resulting per-utility tables over entry
variables are summed and jointly maximized.  That is exhaustive over
deterministic policies — and a deterministic policy is always optimal,
since expected utility is linear in each entry's randomization — so the
result is exact.

``brute_force`` is an independent oracle: it enumerates every
deterministic policy in lexicographic order and evaluates each against
the dense joint distribution.  Both break ties toward the lowest option
index, so they return identical policies up to floating-point ties.
"""

from __future__ import annotations

import functools
import itertools
import os
from dataclasses import dataclass

import numpy as np

from .deploy import DeployedDid, NodeId, node_name
from .model import DECISION, VALUE, ModelError

__all__ = [
    "SolveError",
    "OracleCapError",
    "DecisionRule",
    "Policy",
    "solve",
    "brute_force",
    "evaluate_policy",
    "policies_agree",
    "policy_json",
    "ORACLE_CAP_DEFAULT",
    "oracle_cap",
    "policy_space_size",
]

ORACLE_CAP_DEFAULT = 10**6


class SolveError(ModelError):
    """The diagram cannot be solved as posed."""


class OracleCapError(SolveError):
    """The brute-force policy space exceeds the configured cap."""


@dataclass(frozen=True)
class DecisionRule:
    """One decision's policy table.

    ``choices[k]`` is the chosen option index for the k-th joint state of
    ``observations`` (last observation varying fastest).
    """

    node: NodeId
    observations: tuple[NodeId, ...]
    choices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "node", tuple(self.node))
        object.__setattr__(
            self, "observations", tuple(tuple(o) for o in self.observations)
        )
        object.__setattr__(self, "choices", tuple(int(c) for c in self.choices))


@dataclass(frozen=True)
class Policy:
    rules: tuple[DecisionRule, ...]  # in decision order
    meu: float

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "meu", float(self.meu))

    def rule(self, node: NodeId) -> DecisionRule:
        for r in self.rules:
            if r.node == tuple(node):
                return r
        raise SolveError(f"policy has no rule for {node_name(node)}")


# ---------------------------------------------------------------------------
# Factors


class Factor:
    """Dense table over an ordered scope of variables."""

    __slots__ = ("scope", "table")

    def __init__(self, scope, table):
        self.scope = tuple(scope)
        self.table = np.asarray(table, dtype=float)
        assert self.table.ndim == len(self.scope)

    def align(self, scope) -> np.ndarray:
        """This factor's table broadcast against a superset scope."""
        order = [v for v in scope if v in self.scope]
        t = np.transpose(self.table, [self.scope.index(v) for v in order])
        idx = tuple(slice(None) if v in self.scope else None for v in scope)
        return t[idx]


def _multiply(a: Factor, b: Factor) -> Factor:
    scope = list(a.scope) + [v for v in b.scope if v not in a.scope]
    return Factor(scope, a.align(scope) * b.align(scope))


def _sum_out(f: Factor, var) -> Factor:
    ax = f.scope.index(var)
    return Factor(f.scope[:ax] + f.scope[ax + 1 :], f.table.sum(axis=ax))


def _eliminate(factors: list[Factor], elim: list, domains) -> Factor:
    """Sum the given variables out of the factor product; greedy order."""
    factors = list(factors)
    remaining = list(elim)
    while remaining:

        def cost(v):
            scope = set()
            for f in factors:
                if v in f.scope:
                    scope.update(f.scope)
            size = 1
            for u in scope:
                size *= domains[u]
            return size

        var = min(remaining, key=lambda v: (cost(v), v))
        remaining.remove(var)
        touching = [f for f in factors if var in f.scope]
        factors = [f for f in factors if var not in f.scope]
        if touching:
            factors.append(_sum_out(functools.reduce(_multiply, touching), var))
    if not factors:
        return Factor((), np.float64(1.0))
    return functools.reduce(_multiply, factors)


# ---------------------------------------------------------------------------
# Shared structure


def _check_solvable(did: DeployedDid) -> None:
    """Every observation must precede its decision in some total order."""
    preds: dict[NodeId, set[NodeId]] = {n.id: set() for n in did.nodes}
    for t in did.tables:
        preds[t.node].update(t.parents)
    for u in did.utilities:
        preds[u.node].update(u.parents)
    for d, obs in did.info:
        preds[d].update(obs)
    for d in did.decision_order:
        if d not in preds:
            raise SolveError(f"decision order names unknown node {node_name(d)}")
    seen: set[NodeId] = set()
    pending = dict(preds)
    while pending:
        ready = [n for n, ps in pending.items() if ps <= seen]
        if not ready:
            raise SolveError(
                "information structure is not solvable: no consistent "
                "ordering places every observation before its decision"
            )
        for n in ready:
            seen.add(n)
            del pending[n]


def _domains(did: DeployedDid) -> dict[NodeId, int]:
    return {n.id: len(n.states) for n in did.nodes if n.kind != VALUE}


def _entry_vars(did: DeployedDid, d: NodeId) -> list:
    obs = did.info_by_decision[d]
    n_states = 1
    for o in obs:
        n_states *= len(did.states(o))
    return [("entry", d[0], d[1], k) for k in range(n_states)]


def policy_space_size(did: DeployedDid) -> int:
    """Number of deterministic policies of the diagram."""
    total = 1
    for d in did.decision_order:
        total *= len(did.states(d)) ** len(_entry_vars(did, d))
    return total


def oracle_cap() -> int:
    raw = os.environ.get("TDID_ORACLE_CAP", "")
    return int(raw) if raw else ORACLE_CAP_DEFAULT


def _selector(did: DeployedDid, d: NodeId) -> Factor:
    """Deterministic factor: decision value = entry chosen for the observed
    state.  Scope: observations, the decision, then one entry variable per
    observation state."""
    obs = did.info_by_decision[d]
    entries = _entry_vars(did, d)
    k = len(did.states(d))
    obs_shape = tuple(len(did.states(o)) for o in obs)
    m = len(entries)
    table = np.zeros(obs_shape + (k,) + (k,) * m)
    for flat, widx in enumerate(np.ndindex(obs_shape)) if obs_shape else [(0, ())]:
        for a in range(k):
            sel = tuple(a if j == flat else slice(None) for j in range(m))
            table[widx + (a,) + sel] = 1.0
    return Factor(tuple(obs) + (d,) + tuple(entries), table)


def _requisite(did: DeployedDid, roots) -> set[NodeId]:
    """Nodes whose factors matter for the given parent set: ancestors under
    CPD arcs, with decisions pulling in everything they observe."""
    out: set[NodeId] = set()
    stack = list(roots)
    while stack:
        n = stack.pop()
        if n in out:
            continue
        out.add(n)
        node = did.node(n)
        if node.kind == DECISION:
            stack.extend(did.info_by_decision[n])
        elif node.kind != VALUE:
            stack.extend(did.table_by_node[n].parents)
    return out


# ---------------------------------------------------------------------------
# Exact solver


def solve(did: DeployedDid) -> Policy:
    """Maximum-expected-utility policy of the deployed diagram.

    Exact for the module's information structure; ties between options
    break toward the lowest option index for every entry.
    """
    _check_solvable(did)
    domains = _domains(did)
    entry_domain: dict = {}
    entry_order: list = []
    for d in did.decision_order:
        k = len(did.states(d))
        for e in _entry_vars(did, d):
            entry_domain[e] = k
            entry_order.append(e)
    all_domains = domains | entry_domain

    parts: list[Factor] = []
    for u in did.utilities:
        req = _requisite(did, u.parents)
        factors = [
            Factor(
                t.parents + (t.node,),
                np.asarray(t.rows).reshape(
                    tuple(domains[p] for p in t.parents) + (domains[t.node],)
                ),
            )
            for t in did.tables
            if t.node in req
        ]
        for d in did.decision_order:
            if d in req:
                factors.append(_selector(did, d))
        factors.append(
            Factor(
                u.parents,
                np.asarray(u.values).reshape(tuple(domains[p] for p in u.parents)),
            )
        )
        elim = sorted(req)
        parts.append(_eliminate(factors, elim, all_domains))

    scope = [e for e in entry_order if any(e in p.scope for p in parts)]
    shape = tuple(entry_domain[e] for e in scope)
    total = np.zeros(shape)
    for p in parts:
        total = total + p.align(scope)

    flat_best = int(np.argmax(total.reshape(-1)))  # first max = lexicographic min
    meu = float(total.reshape(-1)[flat_best])
    best = np.unravel_index(flat_best, shape) if shape else ()
    chosen = dict(zip(scope, best))

    rules = []
    for d in did.decision_order:
        entries = _entry_vars(did, d)
        rules.append(
            DecisionRule(
                d,
                did.info_by_decision[d],
                tuple(int(chosen.get(e, 0)) for e in entries),
            )
        )
    return Policy(tuple(rules), meu)


# ---------------------------------------------------------------------------
# Oracle and policy evaluation (dense joint)


class _Dense:
    """All non-value nodes as axes of one dense array."""

    def __init__(self, did: DeployedDid):
        _check_solvable(did)
        self.did = did
        self.nodes = [n.id for n in did.nodes if n.kind != VALUE]
        self.axis = {n: i for i, n in enumerate(self.nodes)}
        self.shape = tuple(len(did.states(n)) for n in self.nodes)
        chance = Factor((), np.float64(1.0))
        for t in did.tables:
            f = Factor(
                t.parents + (t.node,),
                np.asarray(t.rows).reshape(
                    tuple(len(did.states(p)) for p in t.parents)
                    + (len(did.states(t.node)),)
                ),
            )
            chance = _multiply(chance, f)
        self.chance = Factor(tuple(self.nodes), chance.align(tuple(self.nodes)) * np.ones(self.shape))

    def indicator(self, rule: DecisionRule) -> Factor:
        obs_shape = tuple(len(self.did.states(o)) for o in rule.observations)
        k = len(self.did.states(rule.node))
        table = np.zeros(obs_shape + (k,))
        for flat, widx in (
            enumerate(np.ndindex(obs_shape)) if obs_shape else [(0, ())]
        ):
            table[widx + (rule.choices[flat],)] = 1.0
        return Factor(rule.observations + (rule.node,), table)

    def joint(self, rules) -> np.ndarray:
        arr = self.chance.table
        for rule in rules:
            arr = arr * self.indicator(rule).align(self.nodes)
        return arr

    def expected_utility(self, rules) -> float:
        arr = self.joint(rules)
        eu = 0.0
        for u in self.did.utilities:
            f = Factor(
                u.parents,
                np.asarray(u.values).reshape(
                    tuple(len(self.did.states(p)) for p in u.parents)
                ),
            )
            eu += float((arr * f.align(self.nodes)).sum())
        return eu


def _check_policy(did: DeployedDid, policy: Policy) -> None:
    have = {r.node for r in policy.rules}
    want = set(did.decision_order)
    if have != want:
        missing = ", ".join(node_name(d) for d in sorted(want - have))
        extra = ", ".join(node_name(d) for d in sorted(have - want))
        raise SolveError(
            "policy does not cover the decisions: "
            + (f"missing {missing}" if missing else f"unknown {extra}")
        )
    for r in policy.rules:
        if r.observations != did.info_by_decision[r.node]:
            raise SolveError(
                f"policy for {node_name(r.node)} is keyed on the wrong observations"
            )
        n = 1
        for o in r.observations:
            n *= len(did.states(o))
        if len(r.choices) != n:
            raise SolveError(
                f"policy for {node_name(r.node)} has {len(r.choices)} entries, "
                f"needs {n}"
            )
        k = len(did.states(r.node))
        if any(not 0 <= c < k for c in r.choices):
            raise SolveError(f"policy for {node_name(r.node)} picks an unknown option")


def evaluate_policy(did: DeployedDid, policy: Policy) -> float:
    """Expected total utility of following the fixed policy."""
    _check_policy(did, policy)
    return _Dense(did).expected_utility(policy.rules)


def brute_force(did: DeployedDid) -> Policy:
    """Exhaustive oracle: try every deterministic policy, keep the best.

    Policies are enumerated lexicographically (decisions in decision
    order, observation states in row order, options ascending) and the
    first maximum is kept, matching ``solve``'s tie-breaking.
    """
    size = policy_space_size(did)
    cap = oracle_cap()
    if size > cap:
        raise OracleCapError(
            f"policy space has {size} policies, above the cap of {cap}"
        )
    dense = _Dense(did)
    per_entry: list[range] = []
    layout: list[tuple[NodeId, int]] = []  # (decision, n_entries)
    for d in did.decision_order:
        m = len(_entry_vars(did, d))
        k = len(did.states(d))
        layout.append((d, m))
        per_entry.extend([range(k)] * m)

    best_eu = None
    best_assign = None
    for assign in itertools.product(*per_entry):
        rules = []
        at = 0
        for d, m in layout:
            rules.append(
                DecisionRule(d, did.info_by_decision[d], assign[at : at + m])
            )
            at += m
        eu = dense.expected_utility(rules)
        if best_eu is None or eu > best_eu:
            best_eu = eu
            best_assign = rules
    if best_eu is None:  # no decisions: the single empty policy
        best_eu = dense.expected_utility(())
        best_assign = []
    return Policy(tuple(best_assign), best_eu)


def policies_agree(
    did: DeployedDid, a: Policy, b: Policy, tol: float = 1e-9
) -> bool:
    """Whether two policies agree wherever it can matter.

    Both must claim the same maximum expected utility (within ``tol``)
    over the same information structure, and both must independently
    evaluate to that optimum.  Choices may still differ on observation
    states -- reachable or not -- whenever the difference costs nothing,
    even when realizing the tie takes coordinated differences across
    several decisions (one decision relaying a signal another decodes);
    any difference that matters shows up as lost expected utility.
    """
    if abs(a.meu - b.meu) > tol:
        return False
    for ra in a.rules:
        rb = b.rule(ra.node)
        if ra.observations != rb.observations:
            return False
    optimum = max(a.meu, b.meu)
    return (
        abs(evaluate_policy(did, a) - optimum) <= tol
        and abs(evaluate_policy(did, b) - optimum) <= tol
    )


def policy_json(did: DeployedDid, policy: Policy) -> str:
    """Policy as JSON with stable key order and canonical floats."""
    from ._fmt import canonical_json

    decisions = []
    for r in policy.rules:
        options = did.states(r.node)
        decisions.append(
            {
                "node": node_name(r.node),
                "parents": [node_name(o) for o in r.observations],
                "table": [options[c] for c in r.choices],
            }
        )
    return canonical_json({"meu": policy.meu, "decisions": decisions})
