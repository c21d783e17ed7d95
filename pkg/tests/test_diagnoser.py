"""Diagnoser construction, classification, cycle search, observation, DOT."""

import pytest

from fdes import (
    AssumptionError,
    Classification,
    Degree,
    DiagnoserState,
    InputError,
    ModelError,
    build_diagnoser,
    classify,
    diagnoser_step,
    find_indeterminate_cycle,
    observe,
    propagate_label,
    sigma_event_set,
    thresholds_for,
    to_dot,
)
from fdes.model import FdesModel

from .checks import (
    check_cycle_label_uniformity,
    check_label_persistence,
    check_pair_semantics,
    check_pair_state_membership,
    diagnoser_shape,
)


def d(text):
    return Degree.parse(text)


def dstate(*pairs):
    return DiagnoserState.of(pairs)


class TestAlphabet:
    def test_event_sets(self, ex2, ex4):
        assert sigma_event_set(ex2, "beta") == ("alpha", "gamma")
        assert sigma_event_set(ex2, "alpha") == ("gamma",)
        assert sigma_event_set(ex4, "tau") == ("alpha", "beta", "gamma")

    def test_never_empty_on_bundled_models(self, ex1, ex2, ex3, ex4):
        for m in (ex1, ex2, ex3, ex4):
            for ref in m.events:
                assert sigma_event_set(m, ref)


class TestLabelPropagation:
    def test_below_threshold_keeps_normal(self, ex2):
        th = thresholds_for(ex2, "beta")
        assert propagate_label((), (d("0.1"),), th) == ()

    def test_at_threshold_tags(self, ex2):
        th = thresholds_for(ex2, "beta")
        assert propagate_label((), (d("0.2"),), th) == ("f1",)

    def test_tags_persist(self, ex2):
        th = thresholds_for(ex2, "beta")
        assert propagate_label(("f1",), (d("0"),), th) == ("f1",)

    def test_declared_order(self, ex4):
        th = thresholds_for(ex4, "tau")
        assert propagate_label((), (d("0.4"), d("0.1")), th) == ("f1", "f2")


class TestStep:
    def test_first_observation(self, ex2):
        init = dstate(("q0", ()))
        got = diagnoser_step(ex2, "beta", init, "alpha")
        assert got == dstate(("q1", ()), ("q5", ("f1",)))

    def test_uncertainty_resolves(self, ex2):
        state = dstate(("q1", ()), ("q5", ("f1",)))
        assert diagnoser_step(ex2, "beta", state, "alpha") == dstate(("q5", ("f1",)))

    def test_undefined_step(self, ex2):
        init = dstate(("q0", ()))
        assert diagnoser_step(ex2, "beta", init, "gamma") is None

    def test_erased_event_is_contract_violation(self, ex2):
        with pytest.raises(ModelError):
            diagnoser_step(ex2, "beta", dstate(("q0", ())), "beta")


class TestBuild:
    def test_two_state_diagnoser(self, ex2):
        states, edges = diagnoser_shape(build_diagnoser(ex2, "alpha"))
        s0 = frozenset({("q0", "N")})
        s1 = frozenset({("q3", "f1")})
        assert states == {s0, s1}
        assert edges == {(s0, "gamma", s1), (s1, "gamma", s1)}

    def test_five_state_diagnoser(self, ex2):
        diag = build_diagnoser(ex2, "beta")
        assert len(diag.states) == 5
        assert diag.edge_count() == 6

    def test_rebuild_is_identical(self, ex2):
        a = build_diagnoser(ex2, "beta")
        b = build_diagnoser(ex2, "beta")
        assert a.states == b.states
        assert a.transitions == b.transitions
        assert a.event_set == b.event_set

    def test_unknown_reference_event(self, ex2):
        with pytest.raises(InputError):
            build_diagnoser(ex2, "nope")

    def test_refuses_unbounded_silent_runs(self, ex1):
        transitions = dict(ex1.transitions)
        transitions[("q3", "alpha")] = "q3"
        mutant = FdesModel(
            ex1.dimension, ex1.states, ex1.initial, ex1.events, ex1.failure_types, transitions
        )
        with pytest.raises(AssumptionError) as err:
            build_diagnoser(mutant, "theta")
        assert err.value.witness is not None


class TestClassify:
    def test_multi_type_state(self, ex4):
        state = dstate(("q1", ("f2",)), ("q5", ("f1", "f2")))
        assert classify(state, "f2") is Classification.CERTAIN_WITH
        assert classify(state, "f1") is Classification.UNCERTAIN

    def test_initial_state(self):
        assert classify(dstate(("q0", ())), "f1") is Classification.CERTAIN_WITHOUT


class TestIndeterminateCycles:
    def test_witness_on_undiagnosable_model(self, ex3):
        diag = build_diagnoser(ex3, "tau")
        witness = find_indeterminate_cycle(ex3, diag, "f1")
        assert witness is not None
        assert len(witness.states) == 3
        assert {q for q, _ in witness.x_pairs} == {"q5", "q6", "q7"}
        assert {q for q, _ in witness.y_pairs} == {"q1", "q2", "q3"}
        assert sorted(witness.events) == ["alpha", "beta", "gamma"]

    def test_none_on_diagnosable_model(self, ex2):
        diag = build_diagnoser(ex2, "beta")
        assert find_indeterminate_cycle(ex2, diag, "f1") is None

    def test_per_type_difference(self, ex4):
        diag = build_diagnoser(ex4, "tau")
        assert find_indeterminate_cycle(ex4, diag, "f1") is not None
        assert find_indeterminate_cycle(ex4, diag, "f2") is None

    def test_unknown_type(self, ex2):
        diag = build_diagnoser(ex2, "beta")
        with pytest.raises(InputError):
            find_indeterminate_cycle(ex2, diag, "f9")


class TestObserve:
    def test_certain_after_two_steps(self, ex2):
        diag = build_diagnoser(ex2, "beta")
        state, classes = observe(diag, ("alpha", "gamma"))
        assert state == dstate(("q3", ("f1",)))
        assert classes["f1"] is Classification.CERTAIN_WITH

    def test_empty_observation(self, ex2):
        diag = build_diagnoser(ex2, "beta")
        state, classes = observe(diag, ())
        assert state == diag.initial
        assert classes["f1"] is Classification.CERTAIN_WITHOUT

    def test_uncertain_observation(self, ex3):
        diag = build_diagnoser(ex3, "tau")
        state, classes = observe(diag, ("alpha", "beta", "gamma"))
        assert state == dstate(("q3", ()), ("q7", ("f1",)))
        assert classes["f1"] is Classification.UNCERTAIN

    def test_event_outside_alphabet(self, ex2):
        diag = build_diagnoser(ex2, "beta")
        with pytest.raises(InputError):
            observe(diag, ("beta",))

    def test_undefined_observation(self, ex2):
        diag = build_diagnoser(ex2, "beta")
        state, classes = observe(diag, ("gamma",))
        assert state is None
        assert classes == {}


def bundled_diagnosers(ex1, ex2, ex3, ex4):
    from fdes.model import SilentRunStatus

    for model in (ex1, ex2, ex3, ex4):
        for ref in model.events:
            if model.silent_run_bound(ref)[0] is not SilentRunStatus.VIOLATED:
                yield model, build_diagnoser(model, ref)


class TestStructuralProperties:
    def test_label_persistence_everywhere(self, ex1, ex2, ex3, ex4):
        for model, diag in bundled_diagnosers(ex1, ex2, ex3, ex4):
            check_label_persistence(model, diag)

    def test_cycle_label_uniformity_everywhere(self, ex1, ex2, ex3, ex4):
        for _model, diag in bundled_diagnosers(ex1, ex2, ex3, ex4):
            check_cycle_label_uniformity(diag)

    def test_pair_states_are_eligible(self, ex1, ex2, ex3, ex4):
        for model, diag in bundled_diagnosers(ex1, ex2, ex3, ex4):
            check_pair_state_membership(model, diag)

    def test_pair_semantics_bounded(self, ex1, ex2, ex3, ex4):
        for model, diag in bundled_diagnosers(ex1, ex2, ex3, ex4):
            check_pair_semantics(model, diag, max_obs=3, max_omega=10)


class TestDot:
    def test_stable_and_canonical(self, ex2):
        diag = build_diagnoser(ex2, "beta")
        first = to_dot(diag)
        second = to_dot(build_diagnoser(ex2, "beta"))
        assert first == second
        assert first.index('"q0 N"') < first.index('"q1 N | q5 f1"')
        assert '"q0 N" -> "q1 N | q5 f1" [label="alpha"];' in first

    def test_uncertain_marking(self, ex3):
        diag = build_diagnoser(ex3, "tau")
        dot = to_dot(diag, uncertain_types=("f1",))
        assert "style=dashed" in dot
        assert "[uncertain: f1]" in dot

    def test_unknown_type_rejected(self, ex2):
        diag = build_diagnoser(ex2, "beta")
        with pytest.raises(InputError):
            to_dot(diag, uncertain_types=("f7",))
