"""Diagnosability decisions.

Two independent routes are provided and cross-checked by the test suite:

* check_wrt / check_type decide diagnosability through the diagnoser and the
  indeterminate-cycle condition;
* oracle_check works from the definition itself. It enumerates bounded
  witness triples (failure-ending trace, continuation, alternative
  explanation with the same observed record), certifies a delay bound
  exactly on the product of the model with its own observer estimate, and
  certifies refutations only when the violating triple can be pumped around
  a cycle that advances the observation. Silent divergence that no
  observation ever reflects is reported as inconclusive rather than decided.

Alternative explanations are quantified over traces ending in an event the
projection keeps: those are exactly the traces the observer's pair semantics
ranges over, and any silently extended explanation inherits its failure
degree from such a prefix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnoser import (
    Classification,
    CycleWitness,
    Diagnoser,
    DiagnoserState,
    build_diagnoser,
    classify,
    find_indeterminate_cycle,
)
from .errors import InputError
from .model import FdesModel, SilentRunStatus, Trace
from .possibility import Degree


def failure_event_set(model: FdesModel, ftype: str) -> tuple[str, ...]:
    """Events with a positive failure possibility for the type, in declaration order."""
    if ftype not in model.failure_types:
        raise InputError(f"unknown failure type {ftype!r}")
    return tuple(e for e, ev in model.events.items() if ev.failures[ftype] > 0)


def check_wrt(model: FdesModel, ref: str, ftype: str) -> tuple[bool, CycleWitness | None]:
    """Diagnosability with respect to one reference event: true exactly when
    the diagnoser has no indeterminate cycle for the type.

    Raises AssumptionError when the bounded-silent-run assumption is violated
    for the reference event.
    """
    diag = build_diagnoser(model, ref)
    witness = find_indeterminate_cycle(model, diag, ftype)
    return witness is None, witness


@dataclass
class SigmaVerdict:
    sigma: str
    a2_status: str
    diagnosable: bool | None
    witness: CycleWitness | None = None
    delay: int | None = None

    def to_json_obj(self) -> dict:
        obj: dict = {
            "sigma": self.sigma,
            "a2_status": self.a2_status,
            "diagnosable": self.diagnosable,
        }
        if self.witness is not None:
            obj["witness"] = self.witness.to_json_obj()
        if self.delay is not None:
            obj["delay"] = self.delay
        return obj


@dataclass
class VerdictReport:
    failure_type: str
    per_sigma: list[SigmaVerdict] = field(default_factory=list)

    @property
    def aggregate(self) -> bool | None:
        """Conjunction over the per-event verdicts; None when some verdict was
        withheld because the silent-run assumption failed there."""
        if any(v.diagnosable is False for v in self.per_sigma):
            return False
        if any(v.diagnosable is None for v in self.per_sigma):
            return None
        return True

    def to_json_obj(self) -> dict:
        agg = self.aggregate
        return {
            "type": self.failure_type,
            "per_sigma": [v.to_json_obj() for v in self.per_sigma],
            "aggregate": "undetermined" if agg is None else agg,
        }


def check_type(
    model: FdesModel, ftype: str, oracle_bounds: tuple[int, int] | None = None
) -> VerdictReport:
    """Diagnosability of a failure type: the conjunction over every event with
    a positive failure possibility for it.

    Events whose silent-run assumption is violated get a withheld verdict
    instead of a negative one. With oracle_bounds = (max_delay, max_len), the
    oracle additionally attaches the least certified delay where it holds.
    """
    report = VerdictReport(failure_type=ftype)
    for sigma in failure_event_set(model, ftype):
        status, _ = model.silent_run_bound(sigma)
        if status is SilentRunStatus.VIOLATED:
            report.per_sigma.append(SigmaVerdict(sigma, status.value, None))
            continue
        ok, witness = check_wrt(model, sigma, ftype)
        verdict = SigmaVerdict(sigma, status.value, ok, witness=witness)
        if ok and oracle_bounds is not None:
            result = oracle_check(model, sigma, ftype, *oracle_bounds)
            if result.kind == "holds":
                verdict.delay = result.delay
        report.per_sigma.append(verdict)
    return report


# ----------------------------------------------------------------------
# the definitional oracle


@dataclass
class OracleResult:
    """Outcome of the bounded definitional check.

    kind is "holds" (with the least certified delay), "fails" (with a pumpable
    witness triple), or "inconclusive" when the bounds were exhausted without
    either certificate. bounded_max_t is the longest continuation length among
    the violations found by plain enumeration, -1 when none were found.
    """

    kind: str
    delay: int | None = None
    witness: dict | None = None
    bounded_max_t: int = -1

    def to_json_obj(self) -> dict:
        obj: dict = {"result": self.kind}
        if self.delay is not None:
            obj["delay"] = self.delay
        if self.witness is not None:
            obj["witness"] = self.witness
        obj["bounded_max_t"] = self.bounded_max_t
        return obj


def oracle_check(
    model: FdesModel, ref: str, ftype: str, max_delay: int, max_len: int
) -> OracleResult:
    """Decide diagnosability with respect to one reference event from the
    definition, within the given enumeration bounds."""
    if max_delay < 0:
        raise InputError(f"max_delay must be nonnegative, got {max_delay}")
    if max_len < 1:
        raise InputError(f"max_len must be positive, got {max_len}")
    if ftype not in model.failure_types:
        raise InputError(f"unknown failure type {ftype!r}")
    threshold = model.events[ref].failures[ftype] if ref in model.events else None
    if threshold is None:
        raise InputError(f"unknown event {ref!r}")

    diag = build_diagnoser(model, ref)  # also rejects violated silent-run bound

    violations = _bounded_violations(model, ref, ftype, threshold, max_len)
    bounded_max_t = max((len(t) for _, t, _ in violations), default=-1)

    certified = _certified_delay(model, ref, ftype, threshold, diag, max_delay)
    if certified is not None:
        if certified <= bounded_max_t:
            raise RuntimeError(
                "internal inconsistency: delay certification contradicts the "
                "bounded enumeration"
            )
        return OracleResult("holds", delay=certified, bounded_max_t=bounded_max_t)

    witness = _pump_search(model, ref, ftype, threshold, violations, max_delay)
    if witness is not None:
        return OracleResult("fails", witness=witness, bounded_max_t=bounded_max_t)
    return OracleResult("inconclusive", bounded_max_t=bounded_max_t)


def _bounded_violations(
    model: FdesModel, ref: str, ftype: str, threshold: Degree, max_len: int
) -> list[tuple[Trace, Trace, Trace]]:
    """Every (s, t, w) with s failure-ending, t a continuation, and w an
    alternative explanation of the same observed record whose failure degree
    stays below the threshold, over traces of length <= max_len.

    For each observed record only the explanation of least degree is kept;
    any would do as a witness.
    """
    idx = model.failure_types.index(ftype)
    best: dict[Trace, tuple[Degree, Trace]] = {}
    traces: list[Trace] = []
    for w, _state in model.iter_positive_traces(max_len):
        traces.append(w)
        if w and model.qualifies(w[-1], ref):
            u = model.project(w, ref)
            degree = model.failure_profile(w)[idx]
            cur = best.get(u)
            if cur is None or degree < cur[0] or (degree == cur[0] and w < cur[1]):
                best[u] = (degree, w)

    violations: list[tuple[Trace, Trace, Trace]] = []
    for w in traces:
        entry = best.get(model.project(w, ref))
        if entry is None or entry[0] >= threshold:
            continue
        for i in range(1, len(w) + 1):
            if model.events[w[i - 1]].failures[ftype] >= threshold:
                violations.append((w[:i], w[i:], entry[1]))
    return violations


def _estimate_product(model: FdesModel, ref: str, diag: Diagnoser):
    """Product of the model with its observer estimate.

    Nodes are (model state, diagnoser state, observed yet?), starting before
    any observation; kept events advance the estimate, erased ones leave it.
    """
    nodes: list[tuple[str, DiagnoserState, bool]] = []
    edges: list[tuple[tuple, str, tuple]] = []
    if not model.state_positive(model.initial):
        return nodes, edges
    start = (model.initial, diag.initial, False)
    seen = {start}
    queue = [start]
    event_order = sorted(model.events)
    while queue:
        node = queue.pop(0)
        nodes.append(node)
        state, dstate, observed = node
        for ev in event_order:
            nxt = model.transitions.get((state, ev))
            if nxt is None or not model.state_positive(nxt):
                continue
            if model.qualifies(ev, ref):
                dnext = diag.transitions.get((dstate, ev))
                if dnext is None:
                    raise RuntimeError(
                        "internal inconsistency: estimate undefined along a real trace"
                    )
                target = (nxt, dnext, True)
            else:
                target = (nxt, dstate, observed)
            edges.append((node, ev, target))
            if target not in seen:
                seen.add(target)
                queue.append(target)
    return nodes, edges


def _certified_delay(
    model: FdesModel,
    ref: str,
    ftype: str,
    threshold: Degree,
    diag: Diagnoser,
    max_delay: int,
) -> int | None:
    """Least n <= max_delay such that every run is certainly tagged n steps
    after any failure-possibility event, judged on the estimate product.

    A node is bad when something has been observed but the estimate still
    contains an untagged pair: by construction of the estimate that pair is
    realized by an explanation below the threshold. The check walks the set
    of nodes entered by a failure-heavy edge forward n steps and requires the
    closure to avoid every bad node, which decides the delay exactly.
    """
    nodes, edges = _estimate_product(model, ref, diag)
    succ: dict[tuple, list[tuple]] = {n: [] for n in nodes}
    for src, _ev, dst in edges:
        succ[src].append(dst)

    bad = {
        n
        for n in nodes
        if n[2] and classify(n[1], ftype) is not Classification.CERTAIN_WITH
    }
    # nodes from which a bad node is reachable (including bad nodes themselves)
    pred: dict[tuple, list[tuple]] = {n: [] for n in nodes}
    for src, _ev, dst in edges:
        pred[dst].append(src)
    can_reach_bad = set(bad)
    queue = sorted(bad)
    while queue:
        node = queue.pop(0)
        for p in pred[node]:
            if p not in can_reach_bad:
                can_reach_bad.add(p)
                queue.append(p)

    frontier = {
        dst
        for src, ev, dst in edges
        if model.events[ev].failures[ftype] >= threshold
    }
    for n in range(max_delay + 1):
        if not frontier & can_reach_bad:
            return n
        frontier = {d for node in frontier for d in succ[node]}
    return None


def _pump_search(
    model: FdesModel,
    ref: str,
    ftype: str,
    threshold: Degree,
    violations: list[tuple[Trace, Trace, Trace]],
    max_delay: int,
) -> dict | None:
    """Try to certify a refutation: extend some violating triple around a pair
    of synchronized cycles, one for the continuation and one for the
    explanation, that share the same kept-event sequence and keep the
    explanation's failure degree below the threshold.

    The cycle must advance the observation (contain a kept event); that is the
    shape of refutations the indeterminate-cycle condition speaks about, and
    it keeps this certificate sound.
    """
    tried: set[tuple[str, str]] = set()
    for s, t, omega in sorted(violations, key=lambda v: (len(v[0]) + len(v[1]), v)):
        a_state = model.target_state(s + t)
        b_state = model.target_state(omega)
        if (a_state, b_state) in tried:
            continue
        tried.add((a_state, b_state))
        lasso = _observable_lasso(model, ref, ftype, threshold, a_state, b_state)
        if lasso is None:
            continue
        t_cycle, omega_cycle = lasso
        pumps = 1
        while len(t) + pumps * len(t_cycle) <= max_delay:
            pumps += 1
        return {
            "s": list(s),
            "t": list(t),
            "omega": list(omega),
            "t_cycle": list(t_cycle),
            "omega_cycle": list(omega_cycle),
            "pumped_t": list(t + t_cycle * pumps),
            "pumped_omega": list(omega + omega_cycle * pumps),
        }
    return None


def _observable_lasso(
    model: FdesModel, ref: str, ftype: str, threshold: Degree, a_state: str, b_state: str
) -> tuple[Trace, Trace] | None:
    """Synchronized cycle search from (a_state, b_state) back to itself.

    The two sides move independently on erased events and together on kept
    ones; every event on the explanation side must stay below the failure
    threshold. Returns the two event sequences, or None when no cycle with a
    kept event exists.
    """
    idx = model.failure_types.index(ftype)
    event_order = sorted(model.events)

    def moves(node):
        x, y = node
        out = []
        for ev in event_order:
            fi = model.events[ev].failures[ftype]
            if model.qualifies(ev, ref):
                if fi >= threshold:
                    continue
                nx = model.transitions.get((x, ev))
                ny = model.transitions.get((y, ev))
                if (
                    nx is not None
                    and ny is not None
                    and model.state_positive(nx)
                    and model.state_positive(ny)
                ):
                    out.append(((nx, ny), "sync", ev))
            else:
                nx = model.transitions.get((x, ev))
                if nx is not None and model.state_positive(nx):
                    out.append(((nx, y), "x", ev))
                if fi < threshold:
                    ny = model.transitions.get((y, ev))
                    if ny is not None and model.state_positive(ny):
                        out.append(((x, ny), "y", ev))
        return out

    start = (a_state, b_state)
    # forward reachability from start
    forward = {start}
    queue = [start]
    while queue:
        node = queue.pop(0)
        for nxt, _kind, _ev in moves(node):
            if nxt not in forward:
                forward.add(nxt)
                queue.append(nxt)
    # backward reachability to start, within the forward set
    rev: dict[tuple, list[tuple]] = {n: [] for n in forward}
    all_edges = []
    for node in sorted(forward):
        for nxt, kind, ev in moves(node):
            if nxt in forward:
                rev[nxt].append(node)
                all_edges.append((node, kind, ev, nxt))
    backward = {start}
    queue = [start]
    while queue:
        node = queue.pop(0)
        for p in rev[node]:
            if p not in backward:
                backward.add(p)
                queue.append(p)
    core = forward & backward  # nodes on some start-to-start circuit
    sync_edges = [
        (src, ev, dst)
        for src, kind, ev, dst in all_edges
        if kind == "sync" and src in core and dst in core
    ]
    if not sync_edges:
        return None
    src, ev, dst = sorted(sync_edges)[0]

    def path(frm, to):
        """Edge list of a shortest path inside the core."""
        if frm == to:
            return []
        parents = {}
        queue = [frm]
        while queue:
            node = queue.pop(0)
            for nxt, kind, e in moves(node):
                if nxt in core and nxt not in parents and nxt != frm:
                    parents[nxt] = (node, kind, e)
                    if nxt == to:
                        queue = []
                        break
                    queue.append(nxt)
        chain = []
        cur = to
        while cur != frm:
            prev, kind, e = parents[cur]
            chain.append((kind, e))
            cur = prev
        chain.reverse()
        return chain

    cycle_edges = path(start, src) + [("sync", ev)] + path(dst, start)
    t_cycle = tuple(e for kind, e in cycle_edges if kind in ("x", "sync"))
    omega_cycle = tuple(e for kind, e in cycle_edges if kind in ("y", "sync"))
    return t_cycle, omega_cycle
