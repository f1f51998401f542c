"""Deploy a condensed model into a slice-indexed influence diagram.

Deployment unrolls each temporal variable over the master time sequence.
A chance or decision variable gets one probabilistic (or free) node per
index in its own sequence and an identity *copy node* at every other
master index; copies point at their abstraction group's starting node, so
a copy always equals the most recent indexed value.  Value variables get
nodes only at their own indices.  Time-lag arcs wire each node to the most
recent strictly earlier indexed slice of the parent; instantaneous arcs
stay within a slice, passing through copies where the parent is not
indexed.

The result carries an implicit super value node: total utility is the sum
over all value nodes.  Decision nodes observe their informational parents
(the arcs into them) plus every earlier decision.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .model import (
    CHANCE,
    DECISION,
    INST,
    VALUE,
    CondensedTdid,
    ModelError,
    parent_signature,
    validate,
)

__all__ = [
    "COPY",
    "NodeId",
    "SliceNode",
    "DeployedTable",
    "DeployedUtility",
    "DeployedDid",
    "node_name",
    "partition",
    "resolve_parents",
    "deploy",
    "eliminate_barren",
    "collapse_copies",
    "table_entry_count",
    "serialize_deployed",
    "emit_dot",
]

COPY = "copy"

NodeId = tuple[str, int]  # (base variable, slice)


def node_name(node: NodeId) -> str:
    return f"{node[0]}@{node[1]}"


@dataclass(frozen=True)
class SliceNode:
    base: str
    slice: int
    kind: str  # chance | decision | value | copy
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def id(self) -> NodeId:
        return (self.base, self.slice)


@dataclass(frozen=True)
class DeployedTable:
    """Conditional distribution of one chance or copy node."""

    node: NodeId
    parents: tuple[NodeId, ...]
    rows: tuple[tuple[float, ...], ...]  # row per joint parent state, last fastest

    def __post_init__(self):
        object.__setattr__(self, "node", tuple(self.node))
        object.__setattr__(self, "parents", tuple(tuple(p) for p in self.parents))
        object.__setattr__(
            self, "rows", tuple(tuple(float(x) for x in r) for r in self.rows)
        )


@dataclass(frozen=True)
class DeployedUtility:
    """Additive utility contribution of one value node."""

    node: NodeId
    parents: tuple[NodeId, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "node", tuple(self.node))
        object.__setattr__(self, "parents", tuple(tuple(p) for p in self.parents))
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))


@dataclass(frozen=True)
class DeployedDid:
    """Unrolled influence diagram with an implicit additive super value node.

    ``info`` lists, per decision in ``decision_order``, everything that
    decision observes: its informational parents followed by earlier
    decisions not already among them.
    """

    slices: tuple[int, ...]
    nodes: tuple[SliceNode, ...]
    arcs: tuple[tuple[NodeId, NodeId], ...]
    tables: tuple[DeployedTable, ...]
    utilities: tuple[DeployedUtility, ...]
    decision_order: tuple[NodeId, ...]
    info: tuple[tuple[NodeId, tuple[NodeId, ...]], ...]

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(self.slices))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(
            self, "arcs", tuple((tuple(s), tuple(d)) for s, d in self.arcs)
        )
        object.__setattr__(self, "tables", tuple(self.tables))
        object.__setattr__(self, "utilities", tuple(self.utilities))
        object.__setattr__(
            self, "decision_order", tuple(tuple(d) for d in self.decision_order)
        )
        object.__setattr__(
            self,
            "info",
            tuple((tuple(d), tuple(tuple(p) for p in obs)) for d, obs in self.info),
        )

    @cached_property
    def _by_id(self) -> dict[NodeId, SliceNode]:
        return {n.id: n for n in self.nodes}

    def node(self, node: NodeId) -> SliceNode:
        try:
            return self._by_id[tuple(node)]
        except KeyError:
            raise ModelError(f"no deployed node {node_name(node)}") from None

    def has_node(self, node: NodeId) -> bool:
        return tuple(node) in self._by_id

    def states(self, node: NodeId) -> tuple[str, ...]:
        return self.node(node).states

    @cached_property
    def value_nodes(self) -> tuple[NodeId, ...]:
        """Summands of the super value node."""
        return tuple(n.id for n in self.nodes if n.kind == VALUE)

    @cached_property
    def table_by_node(self) -> dict[NodeId, DeployedTable]:
        return {t.node: t for t in self.tables}

    @cached_property
    def info_by_decision(self) -> dict[NodeId, tuple[NodeId, ...]]:
        return dict(self.info)

    @cached_property
    def children(self) -> dict[NodeId, tuple[NodeId, ...]]:
        out: dict[NodeId, list[NodeId]] = {n.id: [] for n in self.nodes}
        for src, dst in self.arcs:
            out[src].append(dst)
        return {k: tuple(v) for k, v in out.items()}


# ---------------------------------------------------------------------------


def partition(
    master: tuple[int, ...], node_times: tuple[int, ...]
) -> tuple[tuple[int, ...], ...]:
    """Split the master sequence into contiguous groups led by node indices.

    Every master index joins the group of the largest node index ≤ it.
    """
    times = set(node_times)
    if not times <= set(master):
        raise ModelError("node times are not a subset of the master sequence")
    if not node_times or node_times[0] != master[0]:
        raise ModelError("node times must start at the master's first index")
    groups: list[list[int]] = []
    for i in master:
        if i in times:
            groups.append([i])
        else:
            groups[-1].append(i)
    return tuple(tuple(g) for g in groups)


def resolve_parents(model: CondensedTdid, name: str, i: int) -> tuple[NodeId, ...]:
    """Deployed parents of variable ``name`` at index ``i``.

    Instantaneous parents map to the same slice (a copy node when the
    parent is not indexed there); a time-lag parent maps to its most recent
    indexed slice strictly before ``i``, and is absent when none exists.
    Order: instantaneous then lag, each in arc declaration order.
    """
    if i not in model.variable(name).times:
        raise ModelError(f"{name} is not indexed at time {i}")
    return _place(model, parent_signature(model, name, i), i)


def _place(
    model: CondensedTdid, signature: tuple[tuple[str, str], ...], i: int
) -> tuple[NodeId, ...]:
    out = []
    for pname, role in signature:
        if role == INST:
            out.append((pname, i))
        else:
            j = max(k for k in model.variable(pname).times if k < i)
            out.append((pname, j))
    return tuple(out)


def deploy(model: CondensedTdid, *, barren: bool = True) -> DeployedDid:
    """Unroll a valid condensed model into its deployed form.

    With ``barren=True`` (the default), nodes that cannot influence any
    value node are removed before returning; this never changes the
    maximum expected utility.
    """
    problems = validate(model)
    if problems:
        raise ModelError("invalid model: " + "; ".join(problems))

    nodes: list[SliceNode] = []
    tables: list[DeployedTable] = []
    utilities: list[DeployedUtility] = []
    arcs: list[tuple[NodeId, NodeId]] = []

    for i in model.master:
        for v in model.variables:
            if v.kind == VALUE:
                if i in v.times:
                    nodes.append(SliceNode(v.name, i, VALUE, ()))
                continue
            kind = v.kind if i in v.times else COPY
            nodes.append(SliceNode(v.name, i, kind, v.states))

    group_start: dict[NodeId, int] = {}
    for v in model.variables:
        if v.kind == VALUE:
            continue
        for group in partition(model.master, v.times):
            for i in group[1:]:
                group_start[(v.name, i)] = group[0]

    for n in nodes:
        if n.kind == COPY:
            src = (n.base, group_start[n.id])
            arcs.append((src, n.id))
            k = len(n.states)
            ident = tuple(
                tuple(1.0 if c == r else 0.0 for c in range(k)) for r in range(k)
            )
            tables.append(DeployedTable(n.id, (src,), ident))
            continue
        v = model.variable(n.base)
        if n.kind == DECISION:
            parents = resolve_parents(model, n.base, n.slice)
            arcs.extend((p, n.id) for p in parents)
            continue
        t = model.table_for(n.base, n.slice)
        parents = _place(model, t.parents, n.slice)
        arcs.extend((p, n.id) for p in parents)
        if n.kind == CHANCE:
            tables.append(DeployedTable(n.id, parents, t.table))
        else:
            utilities.append(DeployedUtility(n.id, parents, t.values))

    decision_order = _order_decisions(model, nodes, arcs)
    info = _information(arcs, decision_order)

    did = DeployedDid(
        model.master,
        tuple(nodes),
        tuple(arcs),
        tuple(tables),
        tuple(utilities),
        decision_order,
        info,
    )
    return eliminate_barren(did) if barren else did


def _order_decisions(model, nodes, arcs) -> tuple[NodeId, ...]:
    """Total order over decision nodes: by slice, then topologically within
    a slice (a decision that can influence another — possibly through
    intermediate chance nodes — acts first), then by name.  Name, not
    declaration order, breaks ties so the order is stable under permuting
    the model's variable declarations."""
    decisions = [n.id for n in nodes if n.kind == DECISION]
    parents_of: dict[NodeId, list[NodeId]] = {}
    for src, dst in arcs:
        parents_of.setdefault(dst, []).append(src)

    def ancestors(nid: NodeId) -> set[NodeId]:
        out: set[NodeId] = set()
        stack = list(parents_of.get(nid, []))
        while stack:
            p = stack.pop()
            if p not in out:
                out.add(p)
                stack.extend(parents_of.get(p, []))
        return out

    anc = {d: ancestors(d) for d in decisions}
    by_slice: dict[int, list[NodeId]] = {}
    for d in decisions:
        by_slice.setdefault(d[1], []).append(d)
    out: list[NodeId] = []
    for i in sorted(by_slice):
        group = sorted(by_slice[i])  # name order
        while group:
            # Kahn step: take the first decision (by name) no other waiting
            # decision can influence.  Same-slice influence runs along
            # instantaneous arcs, which are acyclic, so this terminates.
            for d in group:
                if not any(o in anc[d] for o in group if o != d):
                    out.append(d)
                    group.remove(d)
                    break
            else:  # unreachable for deployments of valid models
                out.extend(group)
                group.clear()
    return tuple(out)


def _information(arcs, decision_order) -> tuple:
    parents_of: dict[NodeId, list[NodeId]] = {}
    for src, dst in arcs:
        parents_of.setdefault(dst, []).append(src)
    info = []
    for k, d in enumerate(decision_order):
        obs = list(parents_of.get(d, []))
        for earlier in decision_order[:k]:
            if earlier not in obs:
                obs.append(earlier)
        info.append((d, tuple(obs)))
    return tuple(info)


def eliminate_barren(did: DeployedDid) -> DeployedDid:
    """Drop nodes that cannot influence any value node.

    Chance and copy nodes are barren when childless.  A decision node is
    barren only when it is childless *and* no later decision remains: a
    childless decision that a later decision observes can still act as a
    signal, so removing it could change the achievable expected utility.
    Value nodes are never removed.  Iterates to a fixpoint; the maximum
    expected utility is unchanged.
    """
    nodes = {n.id: n for n in did.nodes}
    arcs = set(did.arcs)
    order = list(did.decision_order)

    changed = True
    while changed:
        changed = False
        children: dict[NodeId, int] = {nid: 0 for nid in nodes}
        for src, dst in arcs:
            children[src] += 1
        for nid, n in list(nodes.items()):
            if n.kind == VALUE or children[nid]:
                continue
            if n.kind == DECISION and order and order[-1] != nid:
                continue
            del nodes[nid]
            arcs = {(s, d) for s, d in arcs if d != nid}
            if n.kind == DECISION:
                order.remove(nid)
            changed = True

    keep = set(nodes)
    kept_nodes = tuple(n for n in did.nodes if n.id in keep)
    kept_arcs = tuple(a for a in did.arcs if a[0] in keep and a[1] in keep)
    decision_order = tuple(d for d in did.decision_order if d in keep)
    info = _information(kept_arcs, decision_order)
    return DeployedDid(
        did.slices,
        kept_nodes,
        kept_arcs,
        tuple(t for t in did.tables if t.node in keep),
        tuple(u for u in did.utilities if u.node in keep),
        decision_order,
        info,
    )


def collapse_copies(did: DeployedDid) -> DeployedDid:
    """Remove all copy nodes, rewiring children to the copied node.

    A copy is an identity of its group's starting node, so substituting
    the source everywhere preserves the joint distribution and hence the
    maximum expected utility exactly.  When a child ends up with the same
    parent twice (it already depended on the source directly), the two
    table axes are merged by taking their diagonal.
    """
    source = {}
    for t in did.tables:
        if did.node(t.node).kind == COPY:
            (source[t.node],) = t.parents

    def resolve(nid: NodeId) -> NodeId:
        return source.get(nid, nid)

    def rewire_table(parents, body, n_states):
        shape = [len(did.states(p)) for p in parents] + [n_states]
        arr = np.asarray(body, dtype=float).reshape(shape)
        new_parents = list(parents)
        k = 0
        while k < len(new_parents):
            p = resolve(new_parents[k])
            first = new_parents.index(p) if p in new_parents[:k] else k
            if first < k:
                arr = np.diagonal(arr, axis1=first, axis2=k)
                arr = np.moveaxis(arr, -1, first)
                del new_parents[k]
            else:
                new_parents[k] = p
                k += 1
        return tuple(new_parents), arr

    nodes = tuple(n for n in did.nodes if n.kind != COPY)
    tables = []
    for t in did.tables:
        if t.node in source:
            continue
        parents, arr = rewire_table(t.parents, t.rows, len(did.states(t.node)))
        tables.append(
            DeployedTable(t.node, parents, tuple(map(tuple, arr.reshape(-1, arr.shape[-1]))))
        )
    utilities = []
    for u in did.utilities:
        parents, arr = rewire_table(u.parents, np.asarray(u.values)[..., None], 1)
        utilities.append(DeployedUtility(u.node, parents, tuple(arr.reshape(-1))))

    arcs = []
    for src, dst in did.arcs:
        if dst in source:
            continue
        a = (resolve(src), dst)
        if a not in arcs:
            arcs.append(a)

    info = []
    for d, obs in did.info:
        seen: list[NodeId] = []
        for o in obs:
            r = resolve(o)
            if r not in seen:
                seen.append(r)
        info.append((d, tuple(seen)))

    return DeployedDid(
        did.slices,
        nodes,
        tuple(arcs),
        tuple(tables),
        tuple(utilities),
        did.decision_order,
        tuple(info),
    )


def table_entry_count(did: DeployedDid) -> int:
    """Total probability-table entries across non-copy nodes.

    Identity tables on copy nodes carry no free parameters and vanish
    under ``collapse_copies``, so they do not count toward a model's
    space complexity; coarsening a time sequence therefore shrinks it.
    """
    return sum(
        len(t.rows) * len(t.rows[0])
        for t in did.tables
        if did.node(t.node).kind != COPY
    )


# ---------------------------------------------------------------------------
# Output formats


def serialize_deployed(did: DeployedDid) -> str:
    """Canonical text rendering of a deployed diagram.

    Nodes appear slice by slice; copies print as ``copy X@2 of X@1``
    (their identity tables are implied).  The ``super`` line lists the
    value nodes summed by the implicit super value node.
    """
    from ._fmt import fmt_float, fmt_int

    out = ["deployed 1"]
    out.append("slices " + " ".join(fmt_int(i) for i in did.slices))
    src_of = {t.node: t.parents[0] for t in did.tables if did.node(t.node).kind == COPY}
    for n in did.nodes:
        if n.kind == COPY:
            out.append(f"copy {node_name(n.id)} of {node_name(src_of[n.id])}")
        elif n.kind == VALUE:
            out.append(f"value {node_name(n.id)}")
        else:
            out.append(f"{n.kind} {node_name(n.id)} : " + " ".join(n.states))
    for src, dst in sorted(did.arcs):
        out.append(f"arc {node_name(src)} {node_name(dst)}")
    for t in sorted(did.tables, key=lambda t: t.node):
        if did.node(t.node).kind == COPY:
            continue
        rows = " , ".join(" ".join(fmt_float(x) for x in row) for row in t.rows)
        parents = " ".join(node_name(p) for p in t.parents)
        out.append(
            f"cpt {node_name(t.node)} |{' ' + parents if parents else ''} : {rows}"
        )
    for u in sorted(did.utilities, key=lambda u: u.node):
        parents = " ".join(node_name(p) for p in u.parents)
        vals = " ".join(fmt_float(x) for x in u.values)
        out.append(
            f"util {node_name(u.node)} |{' ' + parents if parents else ''} : {vals}"
        )
    for d, obs in did.info:
        out.append(f"info {node_name(d)} : " + " ".join(node_name(o) for o in obs))
    if did.decision_order:
        out.append("order " + " ".join(node_name(d) for d in did.decision_order))
    out.append("super " + " ".join(node_name(v) for v in did.value_nodes))
    return "\n".join(out) + "\n"


_DOT_SHAPE = {CHANCE: "ellipse", DECISION: "box", VALUE: "diamond", COPY: "ellipse"}


def emit_dot(did: DeployedDid) -> str:
    """Graph-description text for visualization."""
    out = ["digraph deployed {", "  rankdir=LR;"]
    for n in did.nodes:
        style = ', style=dashed' if n.kind == COPY else ""
        out.append(
            f'  "{node_name(n.id)}" [shape={_DOT_SHAPE[n.kind]}{style}];'
        )
    out.append('  "super" [shape=doublecircle];')
    for src, dst in sorted(did.arcs):
        out.append(f'  "{node_name(src)}" -> "{node_name(dst)}";')
    for v in did.value_nodes:
        out.append(f'  "{node_name(v)}" -> "super";')
    out.append("}")
    return "\n".join(out) + "\n"
