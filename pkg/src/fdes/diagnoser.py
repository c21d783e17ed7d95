"""Observability-based diagnoser construction and indeterminate-cycle search.

A diagnoser is built for one reference event. Its alphabet is the set of
events the reference-relative projection keeps, its states are canonical
sets of (model state, label) pairs, and its transitions are computed from
silent-closure summaries rather than string enumeration, so erased cycles in
the model cannot cause divergence.

Labels are sets of failure-type tags; the empty set is the normal marker.
A tag is added as soon as the accumulated failure possibility of a connecting
string reaches the reference event's degree for that type, and is never
removed afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import AssumptionError, InputError, ModelError
from .model import DegreeProfile, FdesModel, SilentRunStatus, Trace
from .possibility import Degree

Label = tuple[str, ...]  # failure-type tags in declared order; () is normal
Pair = tuple[str, Label]


def label_text(label: Label) -> str:
    return "N" if not label else "+".join(label)


@dataclass(frozen=True, order=True)
class DiagnoserState:
    """A canonical, duplicate-free, sorted set of (state, label) pairs.

    Ordering is lexicographic on the pair tuple, which makes every listing
    and walk in the package deterministic.
    """

    pairs: tuple[Pair, ...]

    def __post_init__(self):
        if not self.pairs:
            raise ModelError("diagnoser state must contain at least one pair")
        if tuple(sorted(set(self.pairs))) != self.pairs:
            raise ModelError("diagnoser state pairs must be sorted and duplicate-free")

    @classmethod
    def of(cls, pairs) -> "DiagnoserState":
        return cls(tuple(sorted(set(pairs))))

    def __str__(self) -> str:
        return " | ".join(f"{state} {label_text(label)}" for state, label in self.pairs)


class Classification(Enum):
    CERTAIN_WITH = "certain-with"
    CERTAIN_WITHOUT = "certain-without"
    UNCERTAIN = "uncertain"


def classify(state: DiagnoserState, ftype: str) -> Classification:
    """Certain-with when every pair carries the tag, certain-without when none
    does, uncertain otherwise."""
    with_tag = [p for p in state.pairs if ftype in p[1]]
    if len(with_tag) == len(state.pairs):
        return Classification.CERTAIN_WITH
    if not with_tag:
        return Classification.CERTAIN_WITHOUT
    return Classification.UNCERTAIN


@dataclass(frozen=True)
class Diagnoser:
    """The diagnoser automaton for one reference event.

    states are in construction (breadth-first) order; canonical_states gives
    the order used for externally visible listings.
    """

    ref_event: str
    event_set: tuple[str, ...]
    failure_types: tuple[str, ...]
    thresholds: tuple[tuple[str, Degree], ...]
    initial: DiagnoserState
    states: tuple[DiagnoserState, ...]
    transitions: dict[tuple[DiagnoserState, str], DiagnoserState]

    def canonical_states(self) -> list[DiagnoserState]:
        return sorted(self.states, key=lambda s: s.pairs)

    def edge_count(self) -> int:
        return len(self.transitions)

    def step(self, state: DiagnoserState, event: str) -> DiagnoserState | None:
        if event not in self.event_set:
            raise InputError(
                f"event {event!r} is not in the diagnoser alphabet for {self.ref_event!r}"
            )
        return self.transitions.get((state, event))


def sigma_event_set(model: FdesModel, ref: str) -> tuple[str, ...]:
    """The diagnoser alphabet: every event the projection keeps, in model
    declaration order. Nonempty by construction of the maximal observable set."""
    events = tuple(e for e in model.events if model.qualifies(e, ref))
    return events


def thresholds_for(model: FdesModel, ref: str) -> tuple[tuple[str, Degree], ...]:
    ev = model.events[ref]
    return tuple((t, ev.failures[t]) for t in model.failure_types)


def propagate_label(
    label: Label, profile: DegreeProfile, thresholds: tuple[tuple[str, Degree], ...]
) -> Label:
    """Add every tag whose accumulated degree reaches its threshold; existing
    tags persist. The normal marker survives only when nothing fires."""
    tags = set(label)
    for (ftype, threshold), degree in zip(thresholds, profile):
        if degree >= threshold:
            tags.add(ftype)
    order = {ftype: i for i, (ftype, _) in enumerate(thresholds)}
    return tuple(sorted(tags, key=order.__getitem__))


def diagnoser_step(
    model: FdesModel, ref: str, state: DiagnoserState, event: str
) -> DiagnoserState | None:
    """One diagnoser transition: the union, over the pairs of the state, of
    silent-run-then-event summaries with labels propagated. None when empty."""
    if not model.qualifies(event, ref):
        raise ModelError(
            f"contract violation: {event!r} is not in the diagnoser alphabet for {ref!r}"
        )
    thresholds = thresholds_for(model, ref)
    pairs: set[Pair] = set()
    for q, label in state.pairs:
        for target, profile in model.reach_after_silence(q, ref, event):
            pairs.add((target, propagate_label(label, profile, thresholds)))
    if not pairs:
        return None
    return DiagnoserState.of(pairs)


def build_diagnoser(model: FdesModel, ref: str) -> Diagnoser:
    """Breadth-first closure of the initial state under diagnoser transitions.

    Refuses with the witness cycle when the bounded-silent-run assumption is
    violated for the reference event, because the transition summaries would
    then describe runs the definition does not bound.
    """
    if ref not in model.events:
        raise InputError(f"unknown event {ref!r}")
    status, witness = model.silent_run_bound(ref)
    if status is SilentRunStatus.VIOLATED:
        raise AssumptionError(
            f"bounded-silent-run assumption violated for reference event {ref!r}: "
            f"erased cycle {' -> '.join(witness)} can reach a kept edge",
            witness=witness,
        )
    event_set = sigma_event_set(model, ref)
    init = DiagnoserState.of([(model.initial, ())])
    states: list[DiagnoserState] = [init]
    seen = {init}
    transitions: dict[tuple[DiagnoserState, str], DiagnoserState] = {}
    queue = [init]
    while queue:
        state = queue.pop(0)
        for event in event_set:
            target = diagnoser_step(model, ref, state, event)
            if target is None:
                continue
            transitions[(state, event)] = target
            if target not in seen:
                seen.add(target)
                states.append(target)
                queue.append(target)
    return Diagnoser(
        ref_event=ref,
        event_set=event_set,
        failure_types=model.failure_types,
        thresholds=thresholds_for(model, ref),
        initial=init,
        states=tuple(states),
        transitions=transitions,
    )


def observe(
    diag: Diagnoser, trace: Trace
) -> tuple[DiagnoserState | None, dict[str, Classification]]:
    """Run the diagnoser over an observed trace; report the reached state and
    its per-type classification. The state is None when some step is undefined."""
    state: DiagnoserState | None = diag.initial
    for event in trace:
        if event not in diag.event_set:
            raise InputError(
                f"event {event!r} is not in the diagnoser alphabet for {diag.ref_event!r}"
            )
        if state is None:
            break
        state = diag.transitions.get((state, event))
    if state is None:
        return None, {}
    return state, {t: classify(state, t) for t in diag.failure_types}


# ----------------------------------------------------------------------
# indeterminate cycles


@dataclass(frozen=True)
class CycleWitness:
    """An indeterminate cycle: uncertain diagnoser states connected by kept
    events, together with one tagged and one untagged pair sequence whose
    model states cycle along with it."""

    ftype: str
    states: tuple[DiagnoserState, ...]
    events: tuple[str, ...]
    x_pairs: tuple[Pair, ...]
    y_pairs: tuple[Pair, ...]

    def to_json_obj(self) -> dict:
        return {
            "failure_type": self.ftype,
            "cycle": [
                {
                    "state": str(state),
                    "tagged_pair": [self.x_pairs[i][0], label_text(self.x_pairs[i][1])],
                    "untagged_pair": [self.y_pairs[i][0], label_text(self.y_pairs[i][1])],
                    "event": self.events[i],
                }
                for i, state in enumerate(self.states)
            ],
        }


def find_indeterminate_cycle(
    model: FdesModel, diag: Diagnoser, ftype: str
) -> CycleWitness | None:
    """Search for an indeterminate cycle for one failure type.

    Works on the triple product of the diagnoser with a tagged and an
    untagged pair choice: a node is (uncertain state, pair carrying the tag,
    pair not carrying it), and an edge exists when the diagnoser moves to an
    uncertain state while both pair choices are realized by actual
    silent-run-then-event strings. Any cycle of this product is a witness;
    strongly connected components make the search complete even for cycles
    that wind the diagnoser loop several times.
    """
    if ftype not in model.failure_types:
        raise InputError(f"unknown failure type {ftype!r}")
    ref = diag.ref_event
    thresholds = thresholds_for(model, ref)

    uncertain = [s for s in diag.states if classify(s, ftype) is Classification.UNCERTAIN]
    if not uncertain:
        return None
    uncertain_set = set(uncertain)

    nodes: list[tuple[DiagnoserState, Pair, Pair]] = []
    for state in uncertain:
        xs = [p for p in state.pairs if ftype in p[1]]
        ys = [p for p in state.pairs if ftype not in p[1]]
        for x in xs:
            for y in ys:
                nodes.append((state, x, y))

    reach_cache: dict[tuple[str, str], frozenset] = {}

    def pair_moves(pair: Pair, event: str) -> set[Pair]:
        key = (pair[0], event)
        if key not in reach_cache:
            reach_cache[key] = model.reach_after_silence(pair[0], ref, event)
        return {
            (target, propagate_label(pair[1], profile, thresholds))
            for target, profile in reach_cache[key]
        }

    succ: dict[tuple, list[tuple[tuple, str]]] = {n: [] for n in nodes}
    for node in nodes:
        state, x, y = node
        for event in diag.event_set:
            target = diag.transitions.get((state, event))
            if target is None or target not in uncertain_set:
                continue
            target_pairs = set(target.pairs)
            x_next = sorted(p for p in pair_moves(x, event) if p in target_pairs and ftype in p[1])
            y_next = sorted(
                p for p in pair_moves(y, event) if p in target_pairs and ftype not in p[1]
            )
            for xn in x_next:
                for yn in y_next:
                    succ[node].append(((target, xn, yn), event))

    cycle = _find_cycle(nodes, succ)
    if cycle is None:
        return None
    path_nodes, path_events = cycle
    return CycleWitness(
        ftype=ftype,
        states=tuple(n[0] for n in path_nodes),
        events=tuple(path_events),
        x_pairs=tuple(n[1] for n in path_nodes),
        y_pairs=tuple(n[2] for n in path_nodes),
    )


def _find_cycle(nodes, succ):
    """Any cycle in the given graph, as (nodes on the cycle, connecting events).

    Finds a strongly connected component containing an internal edge, then
    walks breadth-first inside it from one node back to itself.
    """
    index, lowlink = {}, {}
    on_stack, stack = set(), []
    counter = [0]
    components = []

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
            for nxt, _event in it:
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
                components.append(component)

    for component in components:
        members = set(component)
        internal = [
            (n, nxt, ev) for n in component for nxt, ev in succ[n] if nxt in members
        ]
        if not internal:
            continue
        start = component[-1]  # discovery-order head of the component
        # breadth-first walk inside the component from start back to start
        parents: dict = {}
        queue = []
        for nxt, ev in succ[start]:
            if nxt in members and nxt not in parents:
                parents[nxt] = (start, ev)
                queue.append(nxt)
        while start not in parents and queue:
            node = queue.pop(0)
            for nxt, ev in succ[node]:
                if nxt in members:
                    if nxt == start:
                        parents[start] = (node, ev)
                        break
                    if nxt not in parents:
                        parents[nxt] = (node, ev)
                        queue.append(nxt)
        if start not in parents:
            continue  # component has internal edges but none lies on a cycle through start
        chain_nodes, chain_events = [], []
        cur, ev = parents[start]
        chain_nodes.append(cur)
        chain_events.append(ev)
        while cur != start:
            cur, ev = parents[cur]
            chain_nodes.append(cur)
            chain_events.append(ev)
        chain_nodes.reverse()
        chain_events.reverse()
        return chain_nodes, chain_events
    return None


# ----------------------------------------------------------------------
# DOT export


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(diag: Diagnoser, uncertain_types: tuple[str, ...] = ()) -> str:
    """Render the diagnoser as Graphviz DOT, byte-stable across runs.

    Nodes follow the canonical state order. When failure types are supplied,
    states uncertain for any of them are drawn dashed and annotated per type.
    """
    for t in uncertain_types:
        if t not in diag.failure_types:
            raise InputError(f"unknown failure type {t!r}")
    lines = ["digraph diagnoser {", "  rankdir=LR;", "  node [shape=box];"]
    ordered = diag.canonical_states()
    lines.append("  __start [shape=point];")
    for state in ordered:
        attrs = []
        marks = [t for t in uncertain_types if classify(state, t) is Classification.UNCERTAIN]
        label = str(state)
        if marks:
            label += "\\n[uncertain: " + ", ".join(marks) + "]"
            attrs.append("style=dashed")
        attrs.insert(0, f"label={_quote(label)}")
        lines.append(f"  {_quote(str(state))} [{', '.join(attrs)}];")
    lines.append(f"  __start -> {_quote(str(diag.initial))};")
    edges = sorted(
        diag.transitions.items(), key=lambda item: (item[0][0].pairs, item[0][1])
    )
    for (src, event), dst in edges:
        lines.append(f"  {_quote(str(src))} -> {_quote(str(dst))} [label={_quote(event)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
