"""Deployment: unrolling, copies, lag wiring, barren removal, collapse."""

import pytest

from tdid.model import INST, ModelError, parse
from tdid.deploy import (
    COPY,
    collapse_copies,
    deploy,
    eliminate_barren,
    emit_dot,
    node_name,
    partition,
    resolve_parents,
    serialize_deployed,
    table_entry_count,
)


def two_var(fixtures_dir):
    return parse((fixtures_dir / "two_var_lagged.tdid").read_bytes())


def cardiac(fixtures_dir):
    return parse((fixtures_dir / "cardiac.tdid").read_bytes())


# --- partition -------------------------------------------------------------


def test_partition_groups_by_largest_member_below():
    assert partition((1, 2, 3, 4), (1, 3)) == ((1, 2), (3, 4))
    assert partition((1, 2, 3, 4, 5), (1, 4)) == ((1, 2, 3), (4, 5))


def test_partition_identity_when_sequences_equal():
    assert partition((1, 2, 3), (1, 2, 3)) == ((1,), (2,), (3,))


def test_partition_rejects_bad_inputs():
    with pytest.raises(ModelError):
        partition((1, 2), (1, 3))
    with pytest.raises(ModelError):
        partition((1, 2), (2,))


# --- resolve_parents ---------------------------------------------------------


def test_lag_parent_is_most_recent_prior_indexed_slice(fixtures_dir):
    m = two_var(fixtures_dir)
    assert resolve_parents(m, "X", 3) == (("Y", 2),)


def test_no_lag_parent_at_first_index(fixtures_dir):
    m = two_var(fixtures_dir)
    assert resolve_parents(m, "X", 1) == ()


def test_inst_parent_through_copy_slice(fixtures_dir):
    m = two_var(fixtures_dir)
    assert resolve_parents(m, "Y", 2) == (("X", 2),)  # X@2 is a copy of X@1


def test_resolve_parents_requires_indexed_slice(fixtures_dir):
    with pytest.raises(ModelError):
        resolve_parents(two_var(fixtures_dir), "X", 2)


# --- deploy ------------------------------------------------------------------


def test_figure_structure_probabilistic_vs_copy(fixtures_dir):
    did = deploy(two_var(fixtures_dir))
    kinds = {node_name(n.id): n.kind for n in did.nodes}
    assert kinds == {
        "X@1": "chance",
        "X@2": "copy",
        "X@3": "chance",
        "X@4": "copy",
        "Y@1": "chance",
        "Y@2": "chance",
        "Y@3": "chance",
        "Y@4": "chance",
        "U@1": "value",
        "U@2": "value",
        "U@3": "value",
        "U@4": "value",
    }
    xy_arcs = {
        (node_name(s), node_name(d)) for s, d in did.arcs if s[0] != "U" and d[0] != "U"
    }
    assert xy_arcs == {
        ("X@1", "Y@1"),
        ("X@2", "Y@2"),
        ("X@3", "Y@3"),
        ("X@4", "Y@4"),
        ("Y@2", "X@3"),
        ("X@1", "X@2"),
        ("X@3", "X@4"),
    }


def test_copy_nodes_get_identity_tables(fixtures_dir):
    did = deploy(two_var(fixtures_dir))
    t = did.table_by_node[("X", 2)]
    assert t.parents == (("X", 1),)
    assert t.rows == ((1.0, 0.0), (0.0, 1.0))


def test_uniform_sequences_replicate_slices(fixtures_dir):
    m = cardiac(fixtures_dir)
    did = deploy(m)
    assert all(n.kind != COPY for n in did.nodes)
    inst = [(a.src, a.dst) for a in m.arcs if a.kind == "inst"]
    lag = [(a.src, a.dst) for a in m.arcs if a.kind == "lag"]
    expected = set()
    for i in (1, 2, 3):
        expected |= {((s, i), (d, i)) for s, d in inst}
    for i, j in ((1, 2), (2, 3)):
        expected |= {((s, i), (d, j)) for s, d in lag}
    assert set(did.arcs) == expected


def test_single_slice_master_deploys_to_condensed_structure():
    m = parse(
        """
        tdid 1
        master 1
        chance X : a b
        value U
        arc inst X U
        cpt X @ 1 | : 0.5 0.5
        util U @ 1 | X : 1 0
        """
    )
    did = deploy(m)
    assert {node_name(n.id) for n in did.nodes} == {"X@1", "U@1"}
    assert did.value_nodes == (("U", 1),)


def test_deploy_rejects_invalid_model():
    m = parse(
        """
        tdid 1
        master 1
        chance X : a b
        value U
        arc inst X U
        cpt X @ 1 | : 0.5 0.4
        util U @ 1 | X : 1 0
        """
    )
    with pytest.raises(ModelError, match="sums to"):
        deploy(m)


def test_decision_copy_repeats_most_recent_decision():
    m = parse(
        """
        tdid 1
        master 1 2
        decision D : d0 d1 ; times 1
        value U
        arc inst D U
        util U @ * | D : 3 1
        """
    )
    did = deploy(m)
    assert did.node(("D", 2)).kind == COPY
    t = did.table_by_node[("D", 2)]
    assert t.parents == (("D", 1),)
    assert t.rows == ((1.0, 0.0), (0.0, 1.0))
    assert did.decision_order == (("D", 1),)


def test_lag_arc_into_value_node():
    m = parse(
        """
        tdid 1
        master 1 2
        chance X : a b
        value U ; times 1 2
        arc lag X U
        arc inst X U
        cpt X @ * | : 0.5 0.5
        util U @ 1 | X : 1 0
        util U @ 2 | X X : 4 3 2 1
        """
    )
    did = deploy(m)
    (u2,) = [u for u in did.utilities if u.node == ("U", 2)]
    assert u2.parents == (("X", 2), ("X", 1))


def test_deployed_graph_is_acyclic(fixtures_dir):
    did = deploy(cardiac(fixtures_dir))
    order = {}
    for k, n in enumerate(did.nodes):
        order[n.id] = k
    # nodes are created slice-major, so every arc must not point backward
    # in (slice, creation) order once lag arcs are taken into account
    seen = set()
    import collections

    indeg = collections.Counter()
    children = collections.defaultdict(list)
    for s, d in did.arcs:
        indeg[d] += 1
        children[s].append(d)
    queue = [n.id for n in did.nodes if indeg[n.id] == 0]
    while queue:
        nid = queue.pop()
        seen.add(nid)
        for c in children[nid]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    assert len(seen) == len(did.nodes)


# --- barren elimination ------------------------------------------------------


def barren_chain_model():
    return parse(
        """
        tdid 1
        master 1
        chance A : a0 a1
        chance B : b0 b1
        chance C : c0 c1
        value U
        arc inst A B
        arc inst C U
        cpt A @ 1 | : 0.5 0.5
        cpt B @ 1 | A : 0.5 0.5 , 0.5 0.5
        cpt C @ 1 | : 0.3 0.7
        util U @ 1 | C : 1 0
        """
    )


def test_barren_chain_removed_transitively():
    did = deploy(barren_chain_model(), barren=False)
    assert did.has_node(("A", 1)) and did.has_node(("B", 1))
    out = eliminate_barren(did)
    assert not out.has_node(("A", 1))
    assert not out.has_node(("B", 1))
    assert out.has_node(("C", 1))
    assert out.has_node(("U", 1))


def test_deploy_eliminates_barren_by_default():
    did = deploy(barren_chain_model())
    assert {node_name(n.id) for n in did.nodes} == {"C@1", "U@1"}


def test_childless_decision_kept_when_later_decision_observes_it():
    # D1 observes C and has no children; D2 could still read C through D1's
    # choice, so D1 must survive barren elimination.
    m = parse(
        """
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
    )
    did = deploy(m)
    assert did.has_node(("D1", 1))
    obs = did.info_by_decision[("D2", 1)]
    assert ("D1", 1) in obs


def test_trailing_childless_decision_removed():
    m = parse(
        """
        tdid 1
        master 1
        chance C : c0 c1
        decision D : a b
        value U
        arc inst C U
        cpt C @ 1 | : 0.5 0.5
        util U @ 1 | C : 1 0
        """
    )
    did = deploy(m)
    assert not did.has_node(("D", 1))
    assert did.decision_order == ()


# --- collapse ----------------------------------------------------------------


def test_collapse_removes_copies_and_rewires(fixtures_dir):
    did = collapse_copies(deploy(two_var(fixtures_dir)))
    assert all(n.kind != COPY for n in did.nodes)
    t = did.table_by_node[("Y", 2)]
    assert t.parents == (("X", 1),)
    assert (("X", 1), ("Y", 2)) in did.arcs


def test_collapse_merges_duplicate_parent_axes():
    m = parse(
        """
        tdid 1
        master 1 2
        chance X : a b ; times 1
        chance Y : y0 y1
        value U
        arc inst X Y
        arc lag X Y
        arc inst Y U
        cpt X @ 1 | : 0.5 0.5
        cpt Y @ 1 | X : 0.9 0.1 , 0.2 0.8
        cpt Y @ 2 | X X : 0.9 0.1 , 0.8 0.2 , 0.3 0.7 , 0.2 0.8
        util U @ * | Y : 1 0
        """
    )
    did = collapse_copies(deploy(m))
    t = did.table_by_node[("Y", 2)]
    # X@2 (copy of X@1) and lag parent X@1 merge into one axis: keep the
    # diagonal rows (a,a) and (b,b) of the original 4-row table.
    assert t.parents == (("X", 1),)
    assert t.rows == ((0.9, 0.1), (0.2, 0.8))


def test_entry_count_skips_copy_identities(fixtures_dir):
    did = deploy(two_var(fixtures_dir))
    # X@1: 2, X@3: 4 (lag parent Y), Y@i: 4 each; identity tables on the
    # copies X@2/X@4 carry no parameters.
    assert table_entry_count(did) == 2 + 4 + 4 * 4
    # Collapsing removes the copies outright; the count is unchanged.
    assert table_entry_count(collapse_copies(did)) == 2 + 4 + 4 * 4


def test_entry_count_falls_under_time_abstraction(fixtures_dir):
    from tdid.abstraction import abstract_time

    m = two_var(fixtures_dir)
    coarse = abstract_time(m, "X", (1,))
    assert table_entry_count(deploy(coarse)) < table_entry_count(deploy(m))


# --- output formats ----------------------------------------------------------


def test_serialize_deployed_mentions_copies_and_super(fixtures_dir):
    text = serialize_deployed(deploy(two_var(fixtures_dir)))
    assert "copy X@2 of X@1" in text
    assert "copy X@4 of X@3" in text
    assert "super U@1 U@2 U@3 U@4" in text
    assert text == serialize_deployed(deploy(two_var(fixtures_dir)))  # stable


def test_emit_dot_lists_every_node_and_super(fixtures_dir):
    did = deploy(two_var(fixtures_dir))
    dot = emit_dot(did)
    for n in did.nodes:
        assert f'"{node_name(n.id)}"' in dot
    assert '"super"' in dot
