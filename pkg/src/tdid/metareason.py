"""Deliberation-time model selection.

A suite holds abstracted variants of one decision model, each annotated
with its quality (the maximum expected utility it achieves, once solved)
and its computation cost in time.  Deliberating longer admits better
models but delays action, which an urgency function converts into lost
utility.  The comprehensive value of using model m after deliberating for
time t is u*(m) − urgency(t).

Writing Q(t) for the best quality achievable within cost t, the expected
value of continuing to deliberate from the baseline t0 up to t is

    EVC(t) = [Q(t) − Q(t0)] − [urgency(t) − urgency(t0)]

Q is a right-continuous step function that only rises at the suite's cost
times, and urgency is nondecreasing, so EVC is maximized at one of those
cost times (or at t0 itself); ``select`` evaluates exactly those
candidates, breaks ties toward acting sooner, and reports the winning
deliberation time t*, the model to use, and the full curve.
"""

from __future__ import annotations

import pathlib
import time
from dataclasses import dataclass, replace

from ._fmt import canonical_json, fmt_float, fmt_int
from .deploy import deploy, table_entry_count
from .model import CondensedTdid, ModelError, ModelFormatError
from .model import parse as parse_model
from .model import serialize as serialize_model
from .solve import Policy, solve

__all__ = [
    "MetareasonError",
    "SuiteEntry",
    "UrgencyFunction",
    "CostModel",
    "EvcPoint",
    "EvcCurve",
    "Problem",
    "make_entry",
    "solve_entry",
    "estimate_cost",
    "with_cost",
    "comprehensive_value",
    "quality",
    "evc",
    "select",
    "construct",
    "selection_report",
    "parse_urgency",
    "load_kb",
    "write_entry",
]


class MetareasonError(ModelError):
    """Selection cannot proceed as posed."""


@dataclass(frozen=True)
class SuiteEntry:
    """One candidate model with its selection annotations.

    ``quality`` is the model's maximum expected utility, present once the
    model has been solved.  ``space_size`` counts deployed probability
    table entries (copy identities excluded); ``cost_time`` is the
    deliberation time charged for using the model; ``measured_time`` is a
    recorded wall-clock solve time, when one exists.
    """

    name: str
    model: CondensedTdid
    cost_time: float
    space_size: int
    n_intervals: int
    quality: float | None = None
    tags: tuple[str, ...] = ()
    measured_time: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(self.tags))
        if self.cost_time < 0:
            raise MetareasonError(f"entry {self.name!r}: negative cost")
        if self.space_size < 1:
            raise MetareasonError(f"entry {self.name!r}: empty deployed model")


@dataclass(frozen=True)
class UrgencyFunction:
    """Utility lost by delaying action until time t; nondecreasing, 0 at 0.

    Kinds: ``linear`` (rate·t), ``step`` (penalty once t exceeds the
    deadline), ``tabulated`` (piecewise-linear through given points,
    clamped outside their range).
    """

    kind: str
    rate: float = 0.0
    deadline: float = 0.0
    penalty: float = 0.0
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "points", tuple((float(t), float(u)) for t, u in self.points)
        )
        if self.kind == "linear":
            if self.rate < 0:
                raise MetareasonError("linear urgency needs a nonnegative rate")
        elif self.kind == "step":
            if self.penalty < 0:
                raise MetareasonError("step urgency needs a nonnegative penalty")
        elif self.kind == "tabulated":
            ts = [t for t, _ in self.points]
            us = [u for _, u in self.points]
            if not self.points or ts != sorted(ts) or us != sorted(us):
                raise MetareasonError(
                    "tabulated urgency needs points nondecreasing in t and u"
                )
        else:
            raise MetareasonError(f"unknown urgency kind {self.kind!r}")

    @staticmethod
    def linear(rate: float) -> "UrgencyFunction":
        return UrgencyFunction("linear", rate=float(rate))

    @staticmethod
    def step(deadline: float, penalty: float) -> "UrgencyFunction":
        return UrgencyFunction(
            "step", deadline=float(deadline), penalty=float(penalty)
        )

    @staticmethod
    def tabulated(points) -> "UrgencyFunction":
        return UrgencyFunction("tabulated", points=tuple(points))

    def __call__(self, t: float) -> float:
        if self.kind == "linear":
            return self.rate * t
        if self.kind == "step":
            return self.penalty if t > self.deadline else 0.0
        ts = [p[0] for p in self.points]
        us = [p[1] for p in self.points]
        if t <= ts[0]:
            return us[0]
        if t >= ts[-1]:
            return us[-1]
        for (t1, u1), (t2, u2) in zip(self.points, self.points[1:]):
            if t1 <= t <= t2:
                if t2 == t1:
                    return u2
                return u1 + (u2 - u1) * (t - t1) / (t2 - t1)
        raise AssertionError("unreachable")


def parse_urgency(text: str) -> UrgencyFunction:
    """Parse CLI syntax: ``linear:<rate>`` or ``step:<deadline>,<penalty>``."""
    kind, _, args = text.partition(":")
    try:
        if kind == "linear":
            return UrgencyFunction.linear(float(args))
        if kind == "step":
            d, p = args.split(",")
            return UrgencyFunction.step(float(d), float(p))
    except ValueError:
        pass
    raise MetareasonError(
        f"cannot parse urgency {text!r}: expected linear:<rate> or "
        "step:<deadline>,<penalty>"
    )


@dataclass(frozen=True)
class CostModel:
    """How deliberation time is charged: analytic α·space + β, or measured."""

    alpha: float = 0.0
    beta: float = 0.0
    measured: bool = False

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise MetareasonError("cost parameters must be nonnegative")


def estimate_cost(entry: SuiteEntry, cost_model: CostModel) -> float:
    """Deliberation time for the entry under the cost model."""
    if cost_model.measured:
        if entry.measured_time is None:
            raise MetareasonError(
                f"entry {entry.name!r} has no measured solve time; run a "
                "calibration solve first"
            )
        return entry.measured_time
    return cost_model.alpha * entry.space_size + cost_model.beta


def with_cost(entry: SuiteEntry, cost_model: CostModel) -> SuiteEntry:
    return replace(entry, cost_time=estimate_cost(entry, cost_model))


def make_entry(name: str, model: CondensedTdid, tags=()) -> SuiteEntry:
    """Build an unsolved entry, measuring deployed size. Cost defaults to
    the space size (an analytic model with α=1, β=0) until re-costed."""
    did = deploy(model)
    space = table_entry_count(did)
    return SuiteEntry(
        name=name,
        model=model,
        cost_time=float(space),
        space_size=space,
        n_intervals=len(model.master),
        tags=tuple(tags),
    )


def solve_entry(entry: SuiteEntry) -> tuple[SuiteEntry, Policy]:
    """Solve the entry's model; fill in quality and the measured time."""
    t0 = time.perf_counter()
    policy = solve(deploy(entry.model))
    elapsed = time.perf_counter() - t0
    return replace(entry, quality=policy.meu, measured_time=elapsed), policy


def comprehensive_value(entry: SuiteEntry) -> float:
    """Object-level utility minus deliberation cost, in utility units."""
    if entry.quality is None:
        raise MetareasonError(f"entry {entry.name!r} is unsolved; no quality yet")
    return entry.quality - entry.cost_time


def quality(suite, t: float) -> tuple[float, SuiteEntry]:
    """Best quality achievable within deliberation time t, and its entry.

    Ties break toward the cheaper entry, then suite order.
    """
    if not suite:
        raise MetareasonError("empty model suite")
    feasible = [e for e in suite if e.cost_time <= t]
    if not feasible:
        raise MetareasonError(
            f"no model is computable within t={fmt_float(float(t))}; suites "
            "should include a zero-cost baseline (default action)"
        )
    best = None
    for e in feasible:
        if e.quality is None:
            raise MetareasonError(f"entry {e.name!r} is unsolved; no quality yet")
        if (
            best is None
            or e.quality > best.quality
            or (e.quality == best.quality and e.cost_time < best.cost_time)
        ):
            best = e
    return best.quality, best


def evc(suite, urgency: UrgencyFunction, t0: float, t: float) -> float:
    """Expected value of extending deliberation from t0 to t."""
    if t < t0:
        raise MetareasonError(f"t={t} is before the baseline t0={t0}")
    q_t, _ = quality(suite, t)
    q_t0, _ = quality(suite, t0)
    return (q_t - q_t0) - (urgency(t) - urgency(t0))


@dataclass(frozen=True)
class EvcPoint:
    t: float
    q: float
    uc: float  # comprehensive value Q(t) − urgency(t)
    evc: float


@dataclass(frozen=True)
class EvcCurve:
    t0: float
    points: tuple[EvcPoint, ...]
    t_star: float
    best: SuiteEntry

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))


def select(suite, urgency: UrgencyFunction, t0: float | None = None) -> EvcCurve:
    """Pick the deliberation time maximizing EVC, and the model to use.

    Candidates are the suite's distinct cost times ≥ t0, plus t0 itself
    (whose EVC is identically 0, so deliberation never extends at a
    loss).  Ties break toward the smaller time: act sooner.  A t0 of
    None means "the fastest model available": its cheapest cost time.
    """
    if t0 is None:
        if not suite:
            raise MetareasonError("empty model suite")
        t0 = min(e.cost_time for e in suite)
    candidates = sorted({float(t0)} | {e.cost_time for e in suite if e.cost_time >= t0})
    points = []
    best_point: EvcPoint | None = None
    for t in candidates:
        q_t, _ = quality(suite, t)
        value = evc(suite, urgency, t0, t)
        point = EvcPoint(t, q_t, q_t - urgency(t), value)
        points.append(point)
        if best_point is None or point.evc > best_point.evc:
            best_point = point
    _, best_entry = quality(suite, best_point.t)
    return EvcCurve(float(t0), tuple(points), best_point.t, best_entry)


# ---------------------------------------------------------------------------
# Knowledge base


@dataclass(frozen=True)
class Problem:
    """Requirements for a selection run."""

    urgency: UrgencyFunction
    t0: float | None = None  # None: baseline is the cheapest model's cost
    deadline: float | None = None
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(self.tags))


def load_kb(path) -> list[SuiteEntry]:
    """Read every ``*.entry`` manifest (and its model file) in a directory."""
    path = pathlib.Path(path)
    if not path.is_dir():
        raise FileNotFoundError(f"knowledge base {str(path)!r} is not a directory")
    entries = []
    for manifest in sorted(path.glob("*.entry")):
        entries.append(_read_entry(manifest))
    if not entries:
        raise MetareasonError(f"knowledge base {str(path)!r} has no entries")
    return entries


def _read_entry(manifest: pathlib.Path) -> SuiteEntry:
    fields: dict[str, str] = {}
    for n, raw in enumerate(manifest.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        if key in fields:
            raise ModelFormatError(f"duplicate {key!r} in {manifest.name}", n)
        fields[key] = rest.strip()
    missing = {"model", "quality", "cost", "space", "intervals"} - set(fields)
    if missing:
        raise MetareasonError(
            f"{manifest.name}: missing {', '.join(sorted(missing))}"
        )
    model_path = manifest.parent / fields["model"]
    try:
        model = parse_model(model_path.read_bytes())
    except OSError as err:
        raise MetareasonError(f"{manifest.name}: cannot read model: {err}") from err
    q = fields["quality"]
    return SuiteEntry(
        name=manifest.stem,
        model=model,
        cost_time=float(fields["cost"]),
        space_size=int(fields["space"]),
        n_intervals=int(fields["intervals"]),
        quality=None if q == "unsolved" else float(q),
        tags=tuple(fields.get("tags", "").split()),
    )


def write_entry(kb_dir, entry: SuiteEntry) -> pathlib.Path:
    """Write ``<name>.tdid`` and ``<name>.entry`` into the directory."""
    kb_dir = pathlib.Path(kb_dir)
    kb_dir.mkdir(parents=True, exist_ok=True)
    model_file = f"{entry.name}.tdid"
    (kb_dir / model_file).write_text(serialize_model(entry.model))
    lines = [
        f"model {model_file}",
        f"quality {'unsolved' if entry.quality is None else fmt_float(entry.quality)}",
        f"cost {fmt_float(entry.cost_time)}",
        f"space {fmt_int(entry.space_size)}",
        f"intervals {fmt_int(entry.n_intervals)}",
    ]
    if entry.tags:
        lines.append("tags " + " ".join(entry.tags))
    out = kb_dir / f"{entry.name}.entry"
    out.write_text("\n".join(lines) + "\n")
    return out


@dataclass(frozen=True)
class ConstructResult:
    curve: EvcCurve
    entry: SuiteEntry
    policy: Policy
    suite: tuple[SuiteEntry, ...]


def construct(kb_path, problem: Problem) -> ConstructResult:
    """Full selection pipeline over a knowledge base.

    Filters entries by the problem's tags and deadline, solves any entry
    still missing its quality, selects the best deliberation time and
    model, then solves the winner for its policy.
    """
    suite = load_kb(kb_path)
    if problem.tags:
        want = set(problem.tags)
        suite = [e for e in suite if want <= set(e.tags)]
        if not suite:
            raise MetareasonError("no knowledge-base entry carries the required tags")
    if problem.deadline is not None:
        suite = [e for e in suite if e.cost_time <= problem.deadline]
        if not suite:
            raise MetareasonError(
                f"infeasible deadline: no model is computable within "
                f"{fmt_float(float(problem.deadline))}"
            )

    policies: dict[str, Policy] = {}
    prepared = []
    for e in suite:
        if e.quality is None:
            e, policies[e.name] = solve_entry(e)
        prepared.append(e)

    curve = select(prepared, problem.urgency, problem.t0)
    winner = curve.best
    if winner.name in policies:
        policy = policies[winner.name]
    else:
        policy = solve(deploy(winner.model))
    return ConstructResult(curve, winner, policy, tuple(prepared))


def selection_report(curve: EvcCurve, meu: float) -> str:
    """Selection result as JSON with stable key order."""
    return canonical_json(
        {
            "t0": curve.t0,
            "curve": [
                {"t": p.t, "Q": p.q, "uc": p.uc, "evc": p.evc} for p in curve.points
            ],
            "t_star": curve.t_star,
            "model": curve.best.name,
            "meu": meu,
        }
    )
