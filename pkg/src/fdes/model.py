"""The fuzzy discrete event system model and its trace-level operations.

An FdesModel is a deterministic crisp transition skeleton whose states carry
fuzzy state vectors and whose events carry fuzzy event matrices, an
observability degree, and one failure-possibility degree per declared failure
type. Unobservability is always 1 minus observability and is never stored.

Projections, trace degrees, silent closures and the bounded-run assumption
checks all live here; the diagnoser and the verdict machinery are built on
top of these primitives.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Mapping

from .errors import InputError, ModelError, ParseError
from .possibility import Degree, EventMatrix, StateVector, max_min_compose

Trace = tuple[str, ...]

# Accumulated failure maxima along a trace segment, aligned with
# FdesModel.failure_types.
DegreeProfile = tuple[Degree, ...]


def join_profiles(a: DegreeProfile, b: DegreeProfile) -> DegreeProfile:
    return tuple(max(x, y) for x, y in zip(a, b))


@dataclass(frozen=True)
class FuzzyEvent:
    """One fuzzy event: transfer matrix, observability, per-type failure degrees."""

    name: str
    matrix: EventMatrix
    observability: Degree
    failures: Mapping[str, Degree]

    @property
    def unobservability(self) -> Degree:
        return self.observability.complement()


class SilentRunStatus(Enum):
    """Outcome of the bounded-silent-run check for a reference event.

    STRICT: the subgraph of erased (non-qualifying) edges is acyclic.
    VACUOUS: erased cycles exist but none can reach a kept edge, so every
        erased-then-kept run is still bounded.
    VIOLATED: an erased cycle can reach a kept edge; erased-then-kept runs
        of unbounded length exist and diagnoser semantics break down.
    """

    STRICT = "strict"
    VACUOUS = "vacuous"
    VIOLATED = "violated"


@dataclass
class ValidationReport:
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __str__(self) -> str:
        if self.ok:
            return "model is valid"
        return "\n".join(self.problems)


class FdesModel:
    """A fuzzy automaton with fuzzy observability and failure degrees.

    Immutable after construction; every operation is a pure function of the
    model and its arguments.
    """

    def __init__(
        self,
        dimension: int,
        states: Mapping[str, StateVector],
        initial: str,
        events: Mapping[str, FuzzyEvent],
        failure_types: tuple[str, ...],
        transitions: Mapping[tuple[str, str], str],
    ):
        self.dimension = dimension
        self.states = dict(states)
        self.initial = initial
        self.events = dict(events)
        self.failure_types = tuple(failure_types)
        self.transitions = dict(transitions)

    # ------------------------------------------------------------------
    # validation

    def validate(self) -> ValidationReport:
        """Check every structural invariant; the report lists all violations."""
        report = ValidationReport()
        add = report.problems.append

        if self.dimension < 1:
            add(f"dimension must be at least 1, got {self.dimension}")
        if self.initial not in self.states:
            add(f"initial state {self.initial!r} is not a declared state")
        if len(set(self.failure_types)) != len(self.failure_types):
            add("failure types contain duplicates")

        for name, vec in self.states.items():
            if vec.dimension != self.dimension:
                add(f"state {name!r} vector has length {vec.dimension}, expected {self.dimension}")
        for name, ev in self.events.items():
            if ev.matrix.dimension != self.dimension:
                add(f"event {name!r} matrix is {ev.matrix.dimension}x{ev.matrix.dimension}, expected {self.dimension}")
            for ftype in self.failure_types:
                if ftype not in ev.failures:
                    add(f"event {name!r} lacks a failure degree for type {ftype!r}")
            for ftype, deg in ev.failures.items():
                if ftype not in self.failure_types:
                    add(f"event {name!r} declares degree for unknown failure type {ftype!r}")
                elif deg > ev.unobservability:
                    add(
                        f"failure bound violated for event {name!r}, type {ftype!r}: "
                        f"{deg} > 1 - {ev.observability} = {ev.unobservability}"
                    )

        for (src, ev_name), dst in sorted(self.transitions.items()):
            if src not in self.states:
                add(f"transition ({src}, {ev_name}) -> {dst}: unknown source state {src!r}")
                continue
            if ev_name not in self.events:
                add(f"transition ({src}, {ev_name}) -> {dst}: unknown event {ev_name!r}")
                continue
            if dst not in self.states:
                add(f"transition ({src}, {ev_name}) -> {dst}: unknown target state {dst!r}")
                continue
            ev = self.events[ev_name]
            if ev.matrix.dimension != self.dimension or self.states[src].dimension != self.dimension:
                continue  # dimension problems already reported
            expected = max_min_compose(self.states[src], ev.matrix)
            if tuple(expected) != tuple(self.states[dst]):
                add(
                    f"vector inconsistency at edge ({src}, {ev_name}) -> {dst}: "
                    f"composition gives {expected!r} but {dst} is declared {self.states[dst]!r}"
                )
        return report

    # ------------------------------------------------------------------
    # core walks

    def step(self, state: str, event: str) -> str | None:
        """Follow one crisp skeleton edge; None where the partial map is undefined."""
        if event not in self.events:
            raise InputError(f"unknown event {event!r}")
        return self.transitions.get((state, event))

    def target_state(self, trace: Trace, start: str | None = None) -> str | None:
        state = self.initial if start is None else start
        for ev in trace:
            state = self.step(state, ev)
            if state is None:
                return None
        return state

    def run(self, trace: Trace) -> StateVector | None:
        """Fuzzy state reached from the initial state, or None when undefined."""
        state = self.target_state(trace)
        return None if state is None else self.states[state]

    def language_positive(self, trace: Trace) -> bool:
        """True when the trace is physically possible: the skeleton path exists
        and the resulting fuzzy state has some positive entry."""
        vec = self.run(trace)
        return vec is not None and vec.is_positive()

    def language_degree(self, trace: Trace) -> Degree | None:
        """Informational degree of a trace: the largest entry of the reached
        vector, None when the path is undefined."""
        vec = self.run(trace)
        return None if vec is None else vec.max_entry()

    def state_positive(self, state: str) -> bool:
        return self.states[state].is_positive()

    # ------------------------------------------------------------------
    # trace degrees

    def observability_of(self, trace: Trace) -> Degree:
        """Observability degree of a trace: min over its events, 0 for the
        empty trace by convention."""
        if not trace:
            return Degree.ZERO
        return min(self._event(ev).observability for ev in trace)

    def zero_profile(self) -> DegreeProfile:
        return tuple(Degree.ZERO for _ in self.failure_types)

    def event_profile(self, event: str) -> DegreeProfile:
        ev = self._event(event)
        return tuple(ev.failures[t] for t in self.failure_types)

    def failure_profile(self, trace: Trace) -> DegreeProfile:
        """Per-type max of failure degrees over the events of the trace."""
        profile = self.zero_profile()
        for ev in trace:
            profile = join_profiles(profile, self.event_profile(ev))
        return profile

    def failure_degree(self, trace: Trace, ftype: str) -> Degree:
        return self.failure_profile(trace)[self._ftype_index(ftype)]

    # ------------------------------------------------------------------
    # observability structure

    def maximal_observable_set(self) -> frozenset[str]:
        """Events attaining the greatest observability degree."""
        if not self.events:
            raise ModelError("model has no events")
        top = max(ev.observability for ev in self.events.values())
        return frozenset(n for n, ev in self.events.items() if ev.observability == top)

    def qualifies(self, event: str, ref: str) -> bool:
        """True when the projection relative to ref keeps this event: it is
        maximally observable or strictly more observable than ref."""
        ev = self._event(event)
        ref_ev = self._event(ref)
        return event in self.maximal_observable_set() or ev.observability > ref_ev.observability

    def project(self, trace: Trace, ref: str) -> Trace:
        """Erase every event the ref-relative projection does not keep."""
        return tuple(ev for ev in trace if self.qualifies(ev, ref))

    # ------------------------------------------------------------------
    # bounded enumerations

    def iter_positive_traces(self, max_len: int) -> Iterator[tuple[Trace, str]]:
        """All physically possible traces of length <= max_len, with their
        target state, in deterministic depth-first order.

        States whose vector is all-zero are never entered: composition keeps
        them all-zero forever, so no continuation can become possible again.
        """
        if not self.state_positive(self.initial):
            return
        stack: list[tuple[Trace, str]] = [((), self.initial)]
        event_order = sorted(self.events)
        while stack:
            trace, state = stack.pop()
            yield trace, state
            if len(trace) == max_len:
                continue
            for ev in reversed(event_order):
                nxt = self.transitions.get((state, ev))
                if nxt is not None and self.state_positive(nxt):
                    stack.append((trace + (ev,), nxt))

    def inverse_projections(
        self, observed: Trace, ref: str, max_len: int, *, observable_ending: bool = False
    ) -> set[Trace]:
        """All physically possible traces of length <= max_len whose
        ref-relative projection equals the observed trace.

        With observable_ending the result keeps only traces whose final event
        the projection would itself keep.
        """
        if max_len < len(observed):
            raise InputError(f"max_len {max_len} is below the observed length {len(observed)}")
        for ev in observed:
            self._event(ev)
        result: set[Trace] = set()
        for trace, _state in self.iter_positive_traces(max_len):
            matched = 0
            feasible = True
            for ev in trace:
                if self.qualifies(ev, ref):
                    if matched >= len(observed) or observed[matched] != ev:
                        feasible = False
                        break
                    matched += 1
            if not feasible or matched != len(observed):
                continue
            if observable_ending and (not trace or not self.qualifies(trace[-1], ref)):
                continue
            result.add(trace)
        return result

    def failure_ending_traces(self, ref: str, ftype: str, max_len: int) -> set[Trace]:
        """All physically possible traces of length <= max_len whose final
        event has a type-ftype failure degree at least that of ref."""
        threshold = self._event(ref).failures[self._check_ftype(ftype)]
        result: set[Trace] = set()
        for trace, _state in self.iter_positive_traces(max_len):
            if trace and self._event(trace[-1]).failures[ftype] >= threshold:
                result.add(trace)
        return result

    # ------------------------------------------------------------------
    # silent closures

    def silent_closure(self, state: str, ref: str) -> frozenset[tuple[str, DegreeProfile]]:
        """Fixpoint of the erased-edge subgraph from a state.

        Returns every (state, profile) pair such that some run of erased
        events (including the empty run, with the zero profile) leads there
        while accumulating exactly that failure profile. The pair lattice is
        finite, so this terminates even across erased cycles.
        """
        if state not in self.states:
            raise InputError(f"unknown state {state!r}")
        self._event(ref)
        seen: set[tuple[str, DegreeProfile]] = {(state, self.zero_profile())}
        worklist = [(state, self.zero_profile())]
        silent_events = sorted(e for e in self.events if not self.qualifies(e, ref))
        while worklist:
            cur, profile = worklist.pop()
            for ev in silent_events:
                nxt = self.transitions.get((cur, ev))
                if nxt is None or not self.state_positive(nxt):
                    continue
                joined = join_profiles(profile, self.event_profile(ev))
                if (nxt, joined) not in seen:
                    seen.add((nxt, joined))
                    worklist.append((nxt, joined))
        return frozenset(seen)

    def reach_after_silence(
        self, state: str, ref: str, event: str
    ) -> frozenset[tuple[str, DegreeProfile]]:
        """Summaries of the erased-run-then-kept-event strings from a state.

        For every silent-closure member with a defined, possible edge on the
        kept event, yields the edge target together with the profile of the
        whole string (silent run joined with the final event).
        """
        if not self.qualifies(event, ref):
            raise ModelError(
                f"contract violation: event {event!r} is erased by the projection for {ref!r}"
            )
        ev_profile = self.event_profile(event)
        result: set[tuple[str, DegreeProfile]] = set()
        for mid, profile in self.silent_closure(state, ref):
            nxt = self.transitions.get((mid, event))
            if nxt is not None and self.state_positive(nxt):
                result.add((nxt, join_profiles(profile, ev_profile)))
        return frozenset(result)

    # ------------------------------------------------------------------
    # assumptions

    def reachable_states(self) -> list[str]:
        """Skeleton-reachable states from the initial one, in BFS order."""
        order: list[str] = []
        seen = {self.initial}
        queue = [self.initial]
        event_order = sorted(self.events)
        while queue:
            state = queue.pop(0)
            order.append(state)
            for ev in event_order:
                nxt = self.transitions.get((state, ev))
                if nxt is not None and nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return order

    def is_live(self) -> bool:
        """True when every reachable state has at least one outgoing edge."""
        for state in self.reachable_states():
            if not any((state, ev) in self.transitions for ev in self.events):
                return False
        return True

    def silent_run_bound(self, ref: str) -> tuple[SilentRunStatus, list[str] | None]:
        """Classify the erased-edge subgraph reachable from the initial state.

        Returns the status and, when VIOLATED, a witness: a cycle of states
        (closed list) all of whose connecting edges are erased, from which a
        kept edge is reachable through erased edges.
        """
        self._event(ref)
        nodes = [s for s in self.reachable_states() if self.state_positive(s)]
        node_set = set(nodes)
        silent_events = sorted(e for e in self.events if not self.qualifies(e, ref))
        kept_events = sorted(e for e in self.events if self.qualifies(e, ref))

        silent_succ: dict[str, list[str]] = {s: [] for s in nodes}
        for s in nodes:
            for ev in silent_events:
                nxt = self.transitions.get((s, ev))
                if nxt is not None and nxt in node_set:
                    silent_succ[s].append(nxt)

        cyclic = self._cyclic_nodes(nodes, silent_succ)
        if not cyclic:
            return SilentRunStatus.STRICT, None

        # A cycle is harmful only if a kept edge is reachable from it through
        # erased edges; otherwise no erased-then-kept run grows unboundedly.
        reach_from_cycles = set(cyclic)
        queue = sorted(cyclic)
        while queue:
            s = queue.pop(0)
            for nxt in silent_succ[s]:
                if nxt not in reach_from_cycles:
                    reach_from_cycles.add(nxt)
                    queue.append(nxt)
        offenders = [
            s
            for s in sorted(reach_from_cycles)
            if any(
                self.transitions.get((s, ev)) is not None
                and self.state_positive(self.transitions[(s, ev)])
                for ev in kept_events
            )
        ]
        if not offenders:
            return SilentRunStatus.VACUOUS, None
        return SilentRunStatus.VIOLATED, self._silent_cycle_witness(sorted(cyclic), silent_succ)

    @staticmethod
    def _cyclic_nodes(nodes: list[str], succ: dict[str, list[str]]) -> set[str]:
        """Nodes lying on some cycle of the given subgraph (iterative Tarjan)."""
        index: dict[str, int] = {}
        lowlink: dict[str, int] = {}
        on_stack: set[str] = set()
        stack: list[str] = []
        counter = [0]
        cyclic: set[str] = set()

        for root in nodes:
            if root in index:
                continue
            work = [(root, iter(succ[root]))]
            index[root] = lowlink[root] = counter[0]
            counter[0] += 1
            stack.append(root)
            on_stack.add(root)
            while work:
                node, it = work[-1]
                advanced = False
                for nxt in it:
                    if nxt not in index:
                        index[nxt] = lowlink[nxt] = counter[0]
                        counter[0] += 1
                        stack.append(nxt)
                        on_stack.add(nxt)
                        work.append((nxt, iter(succ[nxt])))
                        advanced = True
                        break
                    if nxt in on_stack:
                        lowlink[node] = min(lowlink[node], index[nxt])
                if advanced:
                    continue
                work.pop()
                if work:
                    parent = work[-1][0]
                    lowlink[parent] = min(lowlink[parent], lowlink[node])
                if lowlink[node] == index[node]:
                    component = []
                    while True:
                        member = stack.pop()
                        on_stack.discard(member)
                        component.append(member)
                        if member == node:
                            break
                    if len(component) > 1 or node in succ[node]:
                        cyclic.update(component)
        return cyclic

    def _silent_cycle_witness(self, cyclic: list[str], succ: dict[str, list[str]]) -> list[str]:
        """A concrete erased-edge cycle through the first cyclic node, as a
        closed state list (first element repeated at the end)."""
        start = cyclic[0]
        cyclic_set = set(cyclic)
        parents: dict[str, str] = {}
        queue: list[str] = []
        for nxt in succ[start]:
            if nxt in cyclic_set and nxt not in parents:
                parents[nxt] = start
                queue.append(nxt)
        while start not in parents and queue:
            node = queue.pop(0)
            for nxt in succ[node]:
                if nxt == start:
                    parents[start] = node
                    break
                if nxt in cyclic_set and nxt not in parents:
                    parents[nxt] = node
                    queue.append(nxt)
        chain = [start]
        cur = parents[start]
        while cur != start:
            chain.append(cur)
            cur = parents[cur]
        chain.append(start)
        chain.reverse()
        return chain

    # ------------------------------------------------------------------
    # helpers

    def _event(self, name: str) -> FuzzyEvent:
        try:
            return self.events[name]
        except KeyError:
            raise InputError(f"unknown event {name!r}") from None

    def _ftype_index(self, ftype: str) -> int:
        try:
            return self.failure_types.index(ftype)
        except ValueError:
            raise InputError(f"unknown failure type {ftype!r}") from None

    def _check_ftype(self, ftype: str) -> str:
        self._ftype_index(ftype)
        return ftype

    # ------------------------------------------------------------------
    # serialization

    def to_json_obj(self) -> dict:
        return {
            "dimension": self.dimension,
            "states": {n: [str(d) for d in v] for n, v in self.states.items()},
            "initial": self.initial,
            "events": {
                n: {
                    "matrix": [[str(d) for d in row] for row in ev.matrix],
                    "observability": str(ev.observability),
                    "failures": {t: str(ev.failures[t]) for t in self.failure_types},
                }
                for n, ev in self.events.items()
            },
            "failure_types": list(self.failure_types),
            "transitions": [[s, e, d] for (s, e), d in sorted(self.transitions.items())],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True) + "\n"


# ----------------------------------------------------------------------
# strict parsing


def _require_obj(value, what: str) -> dict:
    if not isinstance(value, dict):
        raise ParseError(f"{what} must be an object")
    return value


def _check_fields(obj: dict, required: set[str], what: str) -> None:
    missing = required - obj.keys()
    unknown = obj.keys() - required
    if missing:
        raise ParseError(f"{what}: missing field(s) {sorted(missing)}")
    if unknown:
        raise ParseError(f"{what}: unknown field(s) {sorted(unknown)}")


def parse_model(text: str) -> FdesModel:
    """Parse the JSON model format strictly: unknown fields, malformed degrees
    and nondeterministic transition pairs are all rejected."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from None
    raw = _require_obj(raw, "model document")
    _check_fields(
        raw,
        {"dimension", "states", "initial", "events", "failure_types", "transitions"},
        "model document",
    )

    dimension = raw["dimension"]
    if not isinstance(dimension, int) or isinstance(dimension, bool) or dimension < 1:
        raise ParseError(f"dimension must be a positive integer, got {dimension!r}")

    failure_types = raw["failure_types"]
    if not isinstance(failure_types, list) or not all(isinstance(t, str) for t in failure_types):
        raise ParseError("failure_types must be a list of strings")
    if len(set(failure_types)) != len(failure_types):
        raise ParseError("failure_types contains duplicates")

    states_raw = _require_obj(raw["states"], "states")
    states: dict[str, StateVector] = {}
    for name, entries in states_raw.items():
        if not isinstance(entries, list) or len(entries) != dimension:
            raise ParseError(f"state {name!r}: vector must be a list of {dimension} degrees")
        try:
            states[name] = StateVector(Degree.parse(e) for e in entries)
        except ParseError as exc:
            raise ParseError(f"state {name!r}: {exc}") from None

    initial = raw["initial"]
    if not isinstance(initial, str):
        raise ParseError("initial must be a state name")

    events_raw = _require_obj(raw["events"], "events")
    events: dict[str, FuzzyEvent] = {}
    for name, spec in events_raw.items():
        spec = _require_obj(spec, f"event {name!r}")
        _check_fields(spec, {"matrix", "observability", "failures"}, f"event {name!r}")
        matrix_raw = spec["matrix"]
        if (
            not isinstance(matrix_raw, list)
            or len(matrix_raw) != dimension
            or any(not isinstance(row, list) or len(row) != dimension for row in matrix_raw)
        ):
            raise ParseError(f"event {name!r}: matrix must be {dimension}x{dimension}")
        try:
            matrix = EventMatrix(
                tuple(Degree.parse(e) for e in row) for row in matrix_raw
            )
            observability = Degree.parse(spec["observability"])
            failures_raw = _require_obj(spec["failures"], f"event {name!r} failures")
            _check_fields(failures_raw, set(failure_types), f"event {name!r} failures")
            failures = {t: Degree.parse(failures_raw[t]) for t in failure_types}
        except ParseError as exc:
            raise ParseError(f"event {name!r}: {exc}") from None
        events[name] = FuzzyEvent(name, matrix, observability, failures)

    transitions_raw = raw["transitions"]
    if not isinstance(transitions_raw, list):
        raise ParseError("transitions must be a list of [source, event, target] triples")
    transitions: dict[tuple[str, str], str] = {}
    for item in transitions_raw:
        if (
            not isinstance(item, list)
            or len(item) != 3
            or not all(isinstance(x, str) for x in item)
        ):
            raise ParseError(f"transition {item!r} is not a [source, event, target] triple")
        src, ev, dst = item
        if (src, ev) in transitions:
            raise ParseError(
                f"nondeterministic skeleton: ({src}, {ev}) maps to both "
                f"{transitions[(src, ev)]!r} and {dst!r}"
            )
        transitions[(src, ev)] = dst

    return FdesModel(dimension, states, initial, events, tuple(failure_types), transitions)


def load_model(path: str | Path) -> FdesModel:
    return parse_model(Path(path).read_text(encoding="utf-8"))
