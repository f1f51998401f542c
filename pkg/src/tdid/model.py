"""Condensed-form time-critical dynamic influence diagrams.

A condensed model describes a dynamic decision problem compactly: each
variable stands for a whole family of time-indexed nodes.  The model carries

* a master time sequence (the global, strictly increasing index set),
* temporal chance / decision / value variables, each indexed by a
  subsequence of the master sequence that shares its first index,
* instantaneous arcs (dependence within one slice) and time-lag arcs
  (dependence on the most recent earlier indexed slice of the parent),
* tabular conditional distributions for chance variables and utility
  tables for value variables, either per index or stationary (``@ *``).

Models are immutable after construction and safe to share across threads.
``validate`` reports every violated invariant; ``parse`` / ``serialize``
implement the line-oriented text format documented in the README.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from functools import cached_property

__all__ = [
    "CHANCE",
    "DECISION",
    "VALUE",
    "INST",
    "LAG",
    "ROW_SUM_TOL",
    "ModelError",
    "ModelFormatError",
    "TemporalVariable",
    "Arc",
    "TabularCpd",
    "UtilityTable",
    "CondensedTdid",
    "parent_signature",
    "validate",
    "parse",
    "serialize",
    "canonical",
]

CHANCE = "chance"
DECISION = "decision"
VALUE = "value"

INST = "inst"
LAG = "lag"

ROW_SUM_TOL = 1e-9

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


class ModelError(Exception):
    """Domain error raised by model operations."""


class ModelFormatError(ModelError):
    """Raised by the parser; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _as_tuple(obj, value):
    # Frozen dataclasses: normalize list-ish fields to tuples in-place.
    return tuple(value)


@dataclass(frozen=True)
class TemporalVariable:
    """A time-indexed family of chance, decision, or value nodes."""

    name: str
    kind: str
    states: tuple[str, ...]
    times: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "times", tuple(self.times))


@dataclass(frozen=True)
class Arc:
    src: str
    dst: str
    kind: str  # INST or LAG


@dataclass(frozen=True)
class TabularCpd:
    """Conditional distribution of one chance variable at one time index.

    ``time_index`` is an integer, or None for a stationary table that covers
    every index of the variable not covered by an explicit table.  Parents
    are (name, role) pairs, role INST or LAG; rows follow the joint parent
    states with the last listed parent varying fastest, columns follow the
    child's states.
    """

    variable: str
    time_index: int | None
    parents: tuple[tuple[str, str], ...]
    table: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "parents", tuple((str(n), str(r)) for n, r in self.parents)
        )
        object.__setattr__(
            self, "table", tuple(tuple(float(x) for x in row) for row in self.table)
        )

    @property
    def stationary(self) -> bool:
        return self.time_index is None


@dataclass(frozen=True)
class UtilityTable:
    """Additive utility contribution of one value variable at one index."""

    variable: str
    time_index: int | None
    parents: tuple[tuple[str, str], ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "parents", tuple((str(n), str(r)) for n, r in self.parents)
        )
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))

    @property
    def stationary(self) -> bool:
        return self.time_index is None


@dataclass(frozen=True)
class CondensedTdid:
    """The condensed model: master sequence, variables, arcs, and tables."""

    master: tuple[int, ...]
    variables: tuple[TemporalVariable, ...]
    arcs: tuple[Arc, ...]
    cpds: tuple[TabularCpd, ...]
    utilities: tuple[UtilityTable, ...]
    tick: tuple[float, str] | None = None  # real duration of one index step

    def __post_init__(self):
        object.__setattr__(self, "master", tuple(self.master))
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "arcs", tuple(self.arcs))
        object.__setattr__(self, "cpds", tuple(self.cpds))
        object.__setattr__(self, "utilities", tuple(self.utilities))
        if self.tick is not None:
            d, unit = self.tick
            object.__setattr__(self, "tick", (float(d), str(unit)))

    @cached_property
    def _by_name(self) -> dict[str, TemporalVariable]:
        return {v.name: v for v in self.variables}

    def variable(self, name: str) -> TemporalVariable:
        try:
            return self._by_name[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def has_variable(self, name: str) -> bool:
        return name in self._by_name

    def of_kind(self, kind: str) -> tuple[TemporalVariable, ...]:
        return tuple(v for v in self.variables if v.kind == kind)

    def arcs_into(self, name: str, kind: str | None = None) -> tuple[Arc, ...]:
        return tuple(
            a for a in self.arcs if a.dst == name and (kind is None or a.kind == kind)
        )

    def table_for(
        self, name: str, i: int
    ) -> TabularCpd | UtilityTable | None:
        """The CPD or utility table covering variable ``name`` at index ``i``.

        An explicit table at ``i`` takes precedence; otherwise the stationary
        table applies.  Returns None when neither exists.
        """
        pool = self.utilities if self.variable(name).kind == VALUE else self.cpds
        stationary = None
        for t in pool:
            if t.variable != name:
                continue
            if t.time_index == i:
                return t
            if t.time_index is None:
                stationary = t
        return stationary


def parent_signature(
    model: CondensedTdid, name: str, i: int
) -> tuple[tuple[str, str], ...]:
    """Parents of variable ``name`` at index ``i`` as (name, role) pairs.

    Instantaneous parents come first, then time-lag parents, each in arc
    declaration order.  A lag parent is present only when the parent's
    sequence has some index strictly before ``i``.
    """
    sig = [(a.src, INST) for a in model.arcs_into(name, INST)]
    for a in model.arcs_into(name, LAG):
        if model.has_variable(a.src) and any(k < i for k in model.variable(a.src).times):
            sig.append((a.src, LAG))
    return tuple(sig)


# ---------------------------------------------------------------------------
# Validation


def validate(model: CondensedTdid) -> list[str]:
    """Check every model invariant; return one message per violation.

    An empty list means the model is valid and deployable.  Violations are
    reported, never repaired: a denormalized probability row, for example,
    is flagged rather than silently renormalized.
    """
    out: list[str] = []
    out.extend(_check_sequence("master sequence", model.master))
    master_ok = not out
    names_seen: set[str] = set()

    for v in model.variables:
        where = f"variable {v.name!r}"
        if not _NAME_RE.match(v.name):
            out.append(f"{where}: invalid identifier")
        if v.name in names_seen:
            out.append(f"{where}: duplicate name")
        names_seen.add(v.name)
        if v.kind not in (CHANCE, DECISION, VALUE):
            out.append(f"{where}: unknown kind {v.kind!r}")
            continue
        if v.kind == VALUE:
            if v.states:
                out.append(f"{where}: value variables have no states")
        else:
            if len(v.states) < 2:
                out.append(f"{where}: needs at least 2 states, has {len(v.states)}")
            if len(set(v.states)) != len(v.states):
                out.append(f"{where}: duplicate state labels")
        out.extend(_check_sequence(f"{where} times", v.times))
        if master_ok and v.times:
            if not set(v.times) <= set(model.master):
                out.append(f"{where}: times not a subset of the master sequence")
            elif v.times[0] != model.master[0]:
                out.append(
                    f"{where}: first index {v.times[0]} differs from master "
                    f"first index {model.master[0]}"
                )

    structure_ok = not out

    arc_triples: set[tuple[str, str, str]] = set()
    for a in model.arcs:
        where = f"arc {a.kind} {a.src} {a.dst}"
        if a.kind not in (INST, LAG):
            out.append(f"{where}: unknown arc kind")
        for end in (a.src, a.dst):
            if end not in names_seen:
                out.append(f"{where}: undeclared variable {end!r}")
        if (a.src, a.dst, a.kind) in arc_triples:
            out.append(f"{where}: duplicate arc")
        arc_triples.add((a.src, a.dst, a.kind))
        if a.src in names_seen and model.variable(a.src).kind == VALUE:
            out.append(f"{where}: value variables have no outgoing arcs")

    if structure_ok and _inst_cycle(model):
        out.append(
            "instantaneous arcs form a cycle: " + " -> ".join(_inst_cycle(model))
        )

    if not model.of_kind(VALUE):
        out.append("model has no value variable")

    if model.tick is not None and not model.tick[0] > 0:
        out.append(f"tick duration must be positive, got {model.tick[0]}")

    if not structure_ok:
        return out  # table checks below assume sound structure

    covered: dict[tuple[str, int | None], int] = {}
    for cpd in model.cpds:
        out.extend(_check_table(model, cpd, covered))
    for util in model.utilities:
        out.extend(_check_table(model, util, covered))

    # Coverage: every indexed node needs exactly one applicable table.
    for v in model.variables:
        if v.kind == DECISION:
            continue
        label = "cpd" if v.kind == CHANCE else "utility"
        has_stationary = (v.name, None) in covered
        for i in v.times:
            if (v.name, i) in covered:
                continue
            if has_stationary:
                # The stationary table must fit this index's parent set.
                t = model.table_for(v.name, i)
                want = parent_signature(model, v.name, i)
                if t is not None and sorted(t.parents) != sorted(want):
                    out.append(
                        f"{label} {v.name} @ *: parents {_sig(t.parents)} do not "
                        f"match {_sig(want)} required at index {i}"
                    )
                continue
            out.append(f"{v.name}: no {label} covers index {i}")

    return out


def _sig(parents) -> str:
    if not parents:
        return "(none)"
    return " ".join(f"{n}/{r}" for n, r in parents)


def _check_sequence(where: str, seq: tuple[int, ...]) -> list[str]:
    out = []
    if not seq:
        out.append(f"{where}: empty")
        return out
    if any(not isinstance(i, int) or i < 1 for i in seq):
        out.append(f"{where}: indices must be positive integers")
    if any(b <= a for a, b in zip(seq, seq[1:])):
        out.append(f"{where}: not strictly increasing")
    return out


def _check_table(model, t, covered) -> list[str]:
    is_cpd = isinstance(t, TabularCpd)
    label = "cpd" if is_cpd else "utility"
    at = "*" if t.stationary else str(t.time_index)
    where = f"{label} {t.variable} @ {at}"
    out: list[str] = []

    if not model.has_variable(t.variable):
        return [f"{where}: undeclared variable"]
    v = model.variable(t.variable)
    if is_cpd and v.kind != CHANCE:
        out.append(f"{where}: cpd declared for {v.kind} variable")
        return out
    if not is_cpd and v.kind != VALUE:
        out.append(f"{where}: utility declared for {v.kind} variable")
        return out

    key = (t.variable, t.time_index)
    if key in covered:
        out.append(f"{where}: duplicate table")
    covered[key] = 1

    if not t.stationary and t.time_index not in v.times:
        out.append(f"{where}: index {t.time_index} not in the variable's times")

    n_rows = 1
    for pname, role in t.parents:
        if not model.has_variable(pname):
            out.append(f"{where}: undeclared parent {pname!r}")
            return out
        p = model.variable(pname)
        if p.kind == VALUE:
            out.append(f"{where}: value variable {pname!r} cannot be a parent")
            return out
        n_rows *= len(p.states)

    if not t.stationary:
        want = parent_signature(model, t.variable, t.time_index)
        if sorted(t.parents) != sorted(want):
            out.append(
                f"{where}: parents {_sig(t.parents)} do not match arcs "
                f"({_sig(want)})"
            )

    if is_cpd:
        if len(t.table) != n_rows:
            out.append(f"{where}: expected {n_rows} rows, got {len(t.table)}")
        n_cols = len(v.states)
        for r, row in enumerate(t.table):
            if len(row) != n_cols:
                out.append(f"{where}: row {r} has {len(row)} entries, expected {n_cols}")
                continue
            if any(x < 0.0 or x > 1.0 for x in row):
                out.append(f"{where}: row {r} has entries outside [0, 1]")
            s = sum(row)
            if abs(s - 1.0) > ROW_SUM_TOL:
                out.append(f"{where}: row {r} sums to {s!r}, expected 1")
    else:
        if len(t.values) != n_rows:
            out.append(f"{where}: expected {n_rows} values, got {len(t.values)}")
        if any(x != x or x in (float("inf"), float("-inf")) for x in t.values):
            out.append(f"{where}: utility values must be finite")
    return out


def _inst_cycle(model: CondensedTdid) -> list[str] | None:
    """Find one cycle among instantaneous arcs, or None."""
    children: dict[str, list[str]] = {v.name: [] for v in model.variables}
    for a in model.arcs:
        if a.kind == INST and a.src in children and a.dst in children:
            children[a.src].append(a.dst)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in children}
    stack: list[str] = []

    def visit(n: str) -> list[str] | None:
        color[n] = GRAY
        stack.append(n)
        for c in children[n]:
            if color[c] == GRAY:
                return stack[stack.index(c):] + [c]
            if color[c] == WHITE:
                cyc = visit(c)
                if cyc:
                    return cyc
        stack.pop()
        color[n] = BLACK
        return None

    for n in children:
        if color[n] == WHITE:
            cyc = visit(n)
            if cyc:
                return cyc
    return None


# ---------------------------------------------------------------------------
# Text format


def parse(text: str | bytes) -> CondensedTdid:
    """Parse model-file text into a CondensedTdid.

    Raises ModelFormatError (with the line number) on syntax errors,
    references to undeclared variables, duplicate declarations, and tables
    at indices the variable is not indexed by.  Numeric invariants such as
    row normalization are left to ``validate``.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = _logical_lines(text)
    if not lines:
        raise ModelFormatError("empty model file")

    ln, toks = lines[0]
    if toks[:1] != ["tdid"]:
        raise ModelFormatError("expected 'tdid 1' header", ln)
    if toks[1:] != ["1"]:
        raise ModelFormatError(f"unsupported format version {' '.join(toks[1:])!r}", ln)

    master: tuple[int, ...] | None = None
    tick: tuple[float, str] | None = None
    variables: list[TemporalVariable] = []
    var_lines: dict[str, int] = {}
    arcs: list[Arc] = []
    raw_cpds: list[tuple[int, str, int | None, list[str], list[list[float]]]] = []
    raw_utils: list[tuple[int, str, int | None, list[str], list[float]]] = []

    for ln, toks in lines[1:]:
        head = toks[0]
        if head == "master":
            if master is not None:
                raise ModelFormatError("duplicate master declaration", ln)
            master = tuple(_int(t, ln) for t in toks[1:])
            if not master:
                raise ModelFormatError("master sequence is empty", ln)
        elif head == "tick":
            if tick is not None:
                raise ModelFormatError("duplicate tick declaration", ln)
            if len(toks) != 3:
                raise ModelFormatError("expected: tick <duration> <unit>", ln)
            tick = (_float(toks[1], ln), toks[2])
        elif head in (CHANCE, DECISION, VALUE):
            name, states, times = _parse_variable(head, toks, ln, master)
            if name in var_lines:
                raise ModelFormatError(f"duplicate variable {name!r}", ln)
            var_lines[name] = ln
            variables.append(TemporalVariable(name, head, states, times))
        elif head == "arc":
            if len(toks) != 4 or toks[1] not in (INST, LAG):
                raise ModelFormatError("expected: arc inst|lag <src> <dst>", ln)
            arc = Arc(toks[2], toks[3], toks[1])
            if arc in arcs:
                raise ModelFormatError(
                    f"duplicate arc {arc.kind} {arc.src} {arc.dst}", ln
                )
            arcs.append(arc)
        elif head == "cpt":
            name, idx, parents, rows = _parse_table(toks, ln, rows=True)
            raw_cpds.append((ln, name, idx, parents, rows))
        elif head == "util":
            name, idx, parents, values = _parse_table(toks, ln, rows=False)
            raw_utils.append((ln, name, idx, parents, values))
        else:
            raise ModelFormatError(f"unknown directive {head!r}", ln)

    if master is None:
        raise ModelFormatError("missing master declaration")
    for v in variables:
        if v.times == ():
            raise ModelFormatError(
                f"variable {v.name!r} declared before the master sequence "
                "and without a times clause",
                var_lines[v.name],
            )

    model = CondensedTdid(master, variables, arcs, (), (), tick)

    for a in arcs:
        for end in (a.src, a.dst):
            if not model.has_variable(end):
                raise ModelFormatError(f"arc references undeclared variable {end!r}")

    cpds = []
    seen_tables: set[tuple[str, str, int | None]] = set()
    for ln, name, idx, parents, rows in raw_cpds:
        cpds.append(
            TabularCpd(name, idx, _assign_roles(model, name, parents, ln), rows)
        )
        _check_declared(model, "cpt", name, idx, ln, seen_tables)
    utils = []
    for ln, name, idx, parents, values in raw_utils:
        utils.append(
            UtilityTable(name, idx, _assign_roles(model, name, parents, ln), values)
        )
        _check_declared(model, "util", name, idx, ln, seen_tables)

    return replace(model, cpds=tuple(cpds), utilities=tuple(utils))


def _check_declared(model, label, name, idx, ln, seen) -> None:
    if not model.has_variable(name):
        raise ModelFormatError(f"{label} references undeclared variable {name!r}", ln)
    key = (label, name, idx)
    if key in seen:
        at = "*" if idx is None else idx
        raise ModelFormatError(f"duplicate {label} {name} @ {at}", ln)
    seen.add(key)
    if idx is not None and idx not in model.variable(name).times:
        raise ModelFormatError(
            f"{label} {name} @ {idx}: variable is not indexed at time {idx}", ln
        )


def _assign_roles(model, child, parents, ln) -> tuple[tuple[str, str], ...]:
    """Resolve listed parent names to (name, role) pairs using the arcs.

    A parent connected by both an instantaneous and a lag arc must be listed
    twice; the first mention is the instantaneous one.
    """
    inst = {a.src for a in model.arcs_into(child, INST)}
    lag = {a.src for a in model.arcs_into(child, LAG)}
    used_inst: set[str] = set()
    out = []
    for pname in parents:
        if not model.has_variable(pname):
            raise ModelFormatError(
                f"table for {child!r} references undeclared variable {pname!r}", ln
            )
        if pname in inst and pname in lag:
            role = INST if pname not in used_inst else LAG
        elif pname in lag:
            role = LAG
        else:
            # Not a declared lag parent: instantaneous (or reported by
            # validate as a parent mismatch).
            role = INST
        if role == INST:
            used_inst.add(pname)
        out.append((pname, role))
    return tuple(out)


def _parse_variable(kind, toks, ln, master):
    rest = toks[1:]
    times_part: list[str] = []
    if ";" in rest:
        cut = rest.index(";")
        rest, times_part = rest[:cut], rest[cut + 1:]
        if times_part[:1] != ["times"] or len(times_part) < 2:
            raise ModelFormatError("expected: ; times <i> ...", ln)
        times_part = times_part[1:]
    if not rest:
        raise ModelFormatError(f"missing {kind} variable name", ln)
    name = rest[0]
    if not _NAME_RE.match(name):
        raise ModelFormatError(f"invalid variable name {name!r}", ln)
    states: list[str] = []
    if kind == VALUE:
        if len(rest) > 1:
            raise ModelFormatError("value variables take no states", ln)
    else:
        if len(rest) < 2 or rest[1] != ":":
            raise ModelFormatError(f"expected: {kind} <name> : <state> ...", ln)
        states = rest[2:]
        if not states:
            raise ModelFormatError(f"{kind} variable {name!r} lists no states", ln)
    if times_part:
        times = tuple(_int(t, ln) for t in times_part)
    else:
        if master is None:
            times = ()  # resolved (or rejected) after all lines are read
        else:
            times = master
    return name, tuple(states), times


def _parse_table(toks, ln, rows: bool):
    # cpt  <name> @ <i|*> | <parent> ... : r11 r12 ... , r21 ...
    # util <name> @ <i|*> | <parent> ... : v1 v2 ...
    label = toks[0]
    if len(toks) < 3 or toks[2] != "@":
        raise ModelFormatError(f"expected: {label} <name> @ <i|*> | ... : ...", ln)
    name = toks[1]
    idx_tok = toks[3] if len(toks) > 3 else ""
    idx = None if idx_tok == "*" else _int(idx_tok, ln)
    rest = toks[4:]
    if rest[:1] != ["|"]:
        raise ModelFormatError("expected '|' before the parent list", ln)
    rest = rest[1:]
    if ":" not in rest:
        raise ModelFormatError("expected ':' before table entries", ln)
    cut = rest.index(":")
    parents, entries = rest[:cut], rest[cut + 1:]
    for p in parents:
        if not _NAME_RE.match(p):
            raise ModelFormatError(f"invalid parent name {p!r}", ln)
    if rows:
        table: list[list[float]] = [[]]
        for tok in entries:
            if tok == ",":
                table.append([])
            else:
                table[-1].append(_float(tok, ln))
        if any(not row for row in table):
            raise ModelFormatError("empty probability row", ln)
        return name, idx, parents, table
    values = [_float(tok, ln) for tok in entries]
    if not values:
        raise ModelFormatError("utility table lists no values", ln)
    return name, idx, parents, values


def _logical_lines(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        out.append((n, line.split()))
    return out


def _int(tok: str, ln: int) -> int:
    try:
        return int(tok, 10)
    except ValueError:
        raise ModelFormatError(f"expected an integer, got {tok!r}", ln) from None


def _float(tok: str, ln: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ModelFormatError(f"expected a number, got {tok!r}", ln) from None


def canonical(model: CondensedTdid) -> CondensedTdid:
    """The same model with arcs and tables in canonical order.

    Canonical order is what ``serialize`` emits, so
    ``parse(serialize(m)) == canonical(m)`` for every valid model.  Table
    parent order is part of each table (it fixes the row layout) and is
    left untouched.
    """
    order = {v.name: k for k, v in enumerate(model.variables)}

    def table_key(t):
        return (order.get(t.variable, len(order)), t.stationary, t.time_index or 0)

    return replace(
        model,
        arcs=tuple(sorted(model.arcs, key=lambda a: (a.kind, a.src, a.dst))),
        cpds=tuple(sorted(model.cpds, key=table_key)),
        utilities=tuple(sorted(model.utilities, key=table_key)),
    )


def serialize(model: CondensedTdid) -> str:
    """Render a model in canonical form.

    Variables keep declaration order; arcs are sorted by (kind, src, dst);
    tables are grouped per variable with explicit indices ascending and the
    stationary table last.  Output is byte-stable: structurally identical
    models serialize identically.
    """
    from ._fmt import fmt_float, fmt_int

    out = ["tdid 1"]
    out.append("master " + " ".join(fmt_int(i) for i in model.master))
    if model.tick is not None:
        out.append(f"tick {fmt_float(model.tick[0])} {model.tick[1]}")

    for v in model.variables:
        line = v.kind + " " + v.name
        if v.kind != VALUE:
            line += " : " + " ".join(v.states)
        if v.times != model.master:
            line += " ; times " + " ".join(fmt_int(i) for i in v.times)
        out.append(line)

    for a in sorted(model.arcs, key=lambda a: (a.kind, a.src, a.dst)):
        out.append(f"arc {a.kind} {a.src} {a.dst}")

    order = {v.name: k for k, v in enumerate(model.variables)}

    def table_key(t):
        return (order.get(t.variable, len(order)), t.stationary, t.time_index or 0)

    for cpd in sorted(model.cpds, key=table_key):
        at = "*" if cpd.stationary else fmt_int(cpd.time_index)
        parents = " ".join(n for n, _ in cpd.parents)
        rows = " , ".join(" ".join(fmt_float(x) for x in row) for row in cpd.table)
        out.append(f"cpt {cpd.variable} @ {at} |{' ' + parents if parents else ''} : {rows}")
    for util in sorted(model.utilities, key=table_key):
        at = "*" if util.stationary else fmt_int(util.time_index)
        parents = " ".join(n for n, _ in util.parents)
        vals = " ".join(fmt_float(x) for x in util.values)
        out.append(f"util {util.variable} @ {at} |{' ' + parents if parents else ''} : {vals}")

    return "\n".join(out) + "\n"
