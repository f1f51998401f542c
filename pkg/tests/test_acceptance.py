"""Acceptance gate: one test per shipping criterion.

Each test is self-contained, re-deriving its expectations from first
principles (hand-built graphs, brute-force enumeration, hand-evaluated
selection tables) rather than trusting library internals, and asserts
the stated tolerance and time budget.  A conftest hook prints one
pass/fail line per criterion.
"""

import dataclasses
import json
import time

import numpy as np
import pytest

from gen import corpus as make_corpus, random_model
from tdid.abstraction import (
    abstract_space,
    enumerate_abstractions,
    parse_lattice,
    retime,
)
from tdid.deploy import (
    CHANCE,
    COPY,
    collapse_copies,
    deploy,
    eliminate_barren,
    serialize_deployed,
    table_entry_count,
)
from tdid.metareason import (
    CostModel,
    Problem,
    SuiteEntry,
    UrgencyFunction,
    construct,
    evc,
    make_entry,
    select,
    selection_report,
    solve_entry,
    with_cost,
    write_entry,
)
from tdid.model import INST, LAG, VALUE, canonical, parse, serialize
from tdid.solve import (
    brute_force,
    policies_agree,
    policy_json,
    policy_space_size,
    solve,
)


@pytest.fixture(scope="module")
def corpus():
    # 200 random valid models, ≤8 deployed non-value binary nodes each,
    # kept within the brute-force enumeration cap.
    return [m for m, _ in make_corpus(200, seed=42, max_policies=2048)]


def load(fixtures_dir, name):
    return parse((fixtures_dir / name).read_bytes())


def test_criterion_1_unrolling_with_copies_and_lag(fixtures_dir):
    start = time.perf_counter()
    did = deploy(load(fixtures_dir, "two_var_lagged.tdid"))

    nonvalue = {n.id: n for n in did.nodes if n.kind != VALUE}
    assert set(nonvalue) == {("X", i) for i in (1, 2, 3, 4)} | {
        ("Y", i) for i in (1, 2, 3, 4)
    }
    assert {i for i, n in nonvalue.items() if n.kind == CHANCE} == {
        ("X", 1),
        ("X", 3),
        ("Y", 1),
        ("Y", 2),
        ("Y", 3),
        ("Y", 4),
    }
    assert {i for i, n in nonvalue.items() if n.kind == COPY} == {("X", 2), ("X", 4)}

    # The copies are identities of their group representatives.
    for copy, source in ((("X", 2), ("X", 1)), (("X", 4), ("X", 3))):
        table = did.table_by_node[copy]
        assert table.parents == (source,)
        assert table.rows == ((1.0, 0.0), (0.0, 1.0))

    # Exact arc set over the non-value subgraph: X feeds Y in every slice,
    # X's second true node takes its time-lag input from Y at the most
    # recent earlier index of Y's sequence (= 2), and each copy hangs off
    # its source.
    arcs = {
        (s, d)
        for s, d in did.arcs
        if did.node(s).kind != VALUE and did.node(d).kind != VALUE
    }
    assert arcs == {
        (("X", 1), ("Y", 1)),
        (("X", 2), ("Y", 2)),
        (("X", 3), ("Y", 3)),
        (("X", 4), ("Y", 4)),
        (("Y", 2), ("X", 3)),
        (("X", 1), ("X", 2)),
        (("X", 3), ("X", 4)),
    }
    assert time.perf_counter() - start < 1.0


def test_criterion_2_uniform_sequences_replicate_slices(fixtures_dir):
    start = time.perf_counter()
    model = load(fixtures_dir, "cardiac.tdid")
    assert all(v.times == (1, 2, 3) for v in model.variables)

    did = deploy(model)
    names = [v.name for v in model.variables]
    assert {n.id for n in did.nodes} == {(n, i) for n in names for i in (1, 2, 3)}
    assert not any(n.kind == COPY for n in did.nodes)

    # Every instantaneous arc appears once per slice; every lag arc joins
    # each adjacent slice pair exactly once.  Nothing else.
    expected = {
        ((a.src, i), (a.dst, i)) for a in model.arcs if a.kind == INST for i in (1, 2, 3)
    } | {((a.src, i), (a.dst, i + 1)) for a in model.arcs if a.kind == LAG for i in (1, 2)}
    assert set(did.arcs) == expected
    assert time.perf_counter() - start < 1.0


def test_criterion_3_space_and_time_abstraction_shapes(fixtures_dir):
    start = time.perf_counter()
    model = load(fixtures_dir, "cardiac.tdid")

    # Dropping the cognitive-damage variable removes its utility and the
    # whole chain that only existed to predict it.
    lean = abstract_space(model, ["CD"])
    assert {v.name for v in lean.variables} == {"cr", "treat", "U_surv"}
    assert {(a.kind, a.src, a.dst) for a in lean.arcs} == {
        (INST, "cr", "treat"),
        (INST, "cr", "U_surv"),
        (INST, "treat", "U_surv"),
        (LAG, "cr", "cr"),
        (LAG, "treat", "cr"),
    }

    # Coarsening every sequence to <1,3> leaves nothing probabilistic in
    # slice 2: only copies, which barren elimination then clears out.
    coarse = retime(model, "all", (1, 3))
    kept = deploy(coarse, barren=False)
    slice2 = [n for n in kept.nodes if n.id[1] == 2]
    assert slice2 and all(n.kind == COPY for n in slice2)
    assert all(n.id[1] != 2 for n in deploy(coarse).nodes)
    assert time.perf_counter() - start < 1.0


def test_criterion_4_solver_matches_brute_force_oracle(corpus):
    start = time.perf_counter()
    assert len(corpus) >= 200
    for model in corpus:
        did = deploy(model)
        got = solve(did)
        want = brute_force(did)
        assert abs(got.meu - want.meu) <= 1e-9, serialize(model)
        assert policies_agree(did, got, want), serialize(model)
    assert time.perf_counter() - start < 60.0


def test_criterion_5_meu_invariances(corpus):
    rng = np.random.default_rng(3141)
    k = 3.25
    for model in corpus:
        reference = solve(deploy(model)).meu

        # Barren-node elimination and copy collapse are evaluation
        # optimizations: identical objective value.
        full = deploy(model, barren=False)
        if policy_space_size(full) <= 4096:
            assert abs(solve(full).meu - reference) <= 1e-9, serialize(model)
        assert abs(solve(collapse_copies(deploy(model))).meu - reference) <= 1e-9

        # Declaration order is cosmetic.
        variables = list(model.variables)
        rng.shuffle(variables)
        cpds = list(model.cpds)
        rng.shuffle(cpds)
        shuffled = dataclasses.replace(
            model, variables=tuple(variables), cpds=tuple(cpds)
        )
        assert abs(solve(deploy(shuffled)).meu - reference) <= 1e-9, serialize(model)

    # Shifting the utility at one value node by k shifts the optimum by
    # exactly k and leaves the optimal policy untouched.  A stationary
    # table gets an explicit single-index override so only one deployed
    # node moves.
    for model in corpus[:60]:
        base = solve(deploy(model))
        target = model.utilities[0]
        index = (
            target.time_index
            if target.time_index is not None
            else model.variable(target.variable).times[-1]
        )
        override = dataclasses.replace(
            target, time_index=index, values=tuple(v + k for v in target.values)
        )
        shifted_tables = tuple(
            t for t in model.utilities if (t.variable, t.time_index) != (target.variable, index)
        ) + (override,)
        shifted = dataclasses.replace(model, utilities=shifted_tables)
        got = solve(deploy(shifted))
        assert abs(got.meu - (base.meu + k)) <= 1e-9, serialize(model)
        assert [r.choices for r in got.rules] == [r.choices for r in base.rules]


TINY = parse(
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


def _entry(name, q, cost):
    return SuiteEntry(
        name=name, model=TINY, cost_time=cost, space_size=1, n_intervals=1, quality=q
    )


def test_criterion_6_worked_selection_fixture():
    start = time.perf_counter()
    suite = [_entry("m1", 5.0, 1.0), _entry("m2", 9.0, 4.0)]
    patient = UrgencyFunction.linear(1.0)

    assert evc(suite, patient, 1.0, 1.0) == 0.0
    assert evc(suite, patient, 1.0, 4.0) == 1.0

    curve = select(suite, patient, 1.0)
    assert curve.t_star == 4.0
    assert curve.best.name == "m2"
    assert curve.points[-1].uc == 5.0  # 9 − 4·1, the winning comprehensive value

    rushed = select(suite, UrgencyFunction.linear(10.0), 1.0)
    assert rushed.t_star == 1.0
    assert rushed.best.name == "m1"
    assert time.perf_counter() - start < 1.0


def test_criterion_7_selection_properties_on_random_suites():
    start = time.perf_counter()
    rng = np.random.default_rng(271828)
    for _ in range(110):
        n = int(rng.integers(1, 7))
        costs = np.round(rng.uniform(0.0, 10.0, size=n), 3)
        costs[0] = 0.0
        quals = np.round(rng.uniform(-5.0, 15.0, size=n), 3)
        suite = [
            _entry(f"m{i}", float(q), float(c))
            for i, (q, c) in enumerate(zip(quals, costs))
        ]
        lam = float(np.round(rng.uniform(0.0, 3.0), 3))
        t0 = float(np.round(rng.uniform(0.0, 10.0), 3))
        urgency = UrgencyFunction.linear(lam)
        curve = select(suite, urgency, t0)

        qs = [p.q for p in curve.points]
        assert all(a <= b for a, b in zip(qs, qs[1:]))  # Q nondecreasing
        assert curve.points[0].evc == 0.0  # EVC(t0) = 0

        # t* beats a dense grid of alternative stopping times.
        best = max(p.evc for p in curve.points)
        hi = max(float(costs.max()), t0) + 1.0
        for t in np.linspace(t0, hi, 29):
            assert evc(suite, urgency, t0, float(t)) <= best + 1e-12

        # Zero urgency: pick a globally best-quality model.
        free = select(suite, UrgencyFunction.linear(0.0), t0)
        assert free.best.quality == max(e.quality for e in suite)

        # Rescaling the time unit moves the clock, not the choice.
        scale = 7.0
        rescaled = [
            dataclasses.replace(e, cost_time=e.cost_time * scale) for e in suite
        ]
        curve_s = select(rescaled, UrgencyFunction.linear(lam / scale), t0 * scale)
        assert curve_s.best.name == curve.best.name
    assert time.perf_counter() - start < 30.0


def test_criterion_8_end_to_end_selection_pipeline(tmp_path, fixtures_dir):
    start = time.perf_counter()
    model = load(fixtures_dir, "cardiac.tdid")
    spec = parse_lattice((fixtures_dir / "cardiac.lattice").read_bytes())
    variants = enumerate_abstractions(model, spec)
    assert len(variants) == 4

    # Build the knowledge base exactly as a modeling session would: one
    # entry per abstraction, costs from the analytic model.
    cost_model = CostModel(alpha=0.1, beta=1.0)
    kb = tmp_path / "kb"
    names = {}
    for variant in variants:
        name = "_".join(t.split("=", 1)[1].replace(",", "") for t in variant.tags)
        names[name] = variant.model
        write_entry(kb, with_cost(make_entry(name, variant.model, variant.tags), cost_model))

    # Independent selection table: qualities from fresh solves, the value
    # of computation evaluated by hand at each candidate time.
    lam = 2.0
    qual = {n: solve(deploy(m)).meu for n, m in names.items()}
    cost = {
        n: cost_model.alpha * table_entry_count(deploy(m)) + cost_model.beta
        for n, m in names.items()
    }
    t0 = min(cost.values())
    candidates = sorted({t0} | {c for c in cost.values() if c >= t0})

    def q_at(t):
        return max(q for n, q in qual.items() if cost[n] <= t)

    table = {t: (q_at(t) - q_at(t0)) - (lam * t - lam * t0) for t in candidates}
    best_value = max(table.values())
    expected_t_star = min(t for t, v in table.items() if v == best_value)
    feasible = [n for n in qual if cost[n] <= expected_t_star]
    expected_winner = min(feasible, key=lambda n: (-qual[n], cost[n]))

    # The pipeline must agree with the hand table.
    result = construct(kb, Problem(urgency=UrgencyFunction.linear(lam)))
    assert result.curve.t_star == expected_t_star
    assert result.entry.name == expected_winner
    assert [p.evc for p in result.curve.points] == [table[t] for t in candidates]

    # The trade-off is real: the winner is neither the cheapest nor the
    # highest-quality variant.
    assert cost[expected_winner] > min(cost.values())
    assert qual[expected_winner] < max(qual.values())

    # And the winner's policy is exactly optimal per the oracle.
    did = deploy(result.entry.model)
    reference = brute_force(did)
    assert abs(result.policy.meu - reference.meu) <= 1e-9
    assert policies_agree(did, result.policy, reference)

    report = json.loads(selection_report(result.curve, result.policy.meu))
    assert report["model"] == expected_winner
    assert report["t_star"] == expected_t_star
    assert time.perf_counter() - start < 10.0


def test_criterion_9_round_trips_and_byte_stable_reports(fixtures_dir, tmp_path):
    for path in sorted(fixtures_dir.glob("*.tdid")):
        model = parse(path.read_bytes())
        text = serialize(model)
        assert parse(text) == canonical(model)
        assert serialize(parse(text)) == text  # serialization is a fixed point

    rng = np.random.default_rng(4242)
    for _ in range(100):
        model = random_model(rng)
        assert parse(serialize(model)) == canonical(model)

    # Reports are byte-stable across repeated runs.
    model = parse((fixtures_dir / "two_var_lagged.tdid").read_bytes())
    did = deploy(model)
    assert serialize_deployed(did) == serialize_deployed(deploy(model))
    assert policy_json(did, solve(did)) == policy_json(did, solve(did))

    cm = CostModel(alpha=0.1, beta=1.0)
    kb = tmp_path / "kb"
    write_entry(kb, with_cost(make_entry("full", model), cm))
    problem = Problem(urgency=UrgencyFunction.linear(1.0))
    first = construct(kb, problem)
    second = construct(kb, problem)
    assert selection_report(first.curve, first.policy.meu) == selection_report(
        second.curve, second.policy.meu
    )
