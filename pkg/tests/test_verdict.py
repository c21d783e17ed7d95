"""Cycle-condition verdicts, the definitional oracle, and report serialization."""

import pytest

from fdes import (
    AssumptionError,
    Degree,
    FdesModel,
    FuzzyEvent,
    InputError,
    check_type,
    check_wrt,
    oracle_check,
)
from fdes.verdict import failure_event_set


def d(text):
    return Degree.parse(text)


class TestCheckWrt:
    def test_refuted_reference_event(self, ex3):
        ok, witness = check_wrt(ex3, "tau", "f1")
        assert not ok
        assert witness is not None

    def test_confirmed_cases(self, ex1, ex2):
        assert check_wrt(ex1, "beta", "f2")[0]
        assert check_wrt(ex2, "gamma", "f1")[0]

    def test_refuses_on_violated_assumption(self, ex1):
        transitions = dict(ex1.transitions)
        transitions[("q3", "alpha")] = "q3"
        mutant = FdesModel(
            ex1.dimension, ex1.states, ex1.initial, ex1.events, ex1.failure_types, transitions
        )
        with pytest.raises(AssumptionError):
            check_wrt(mutant, "theta", "f1")


class TestCheckType:
    def test_failure_event_sets(self, ex2, ex4):
        assert failure_event_set(ex2, "f1") == ("alpha", "beta", "gamma")
        assert failure_event_set(ex4, "f2") == ("tau", "alpha", "beta", "gamma")

    def test_diagnosable_type(self, ex2):
        report = check_type(ex2, "f1")
        assert report.aggregate is True
        assert [v.sigma for v in report.per_sigma] == ["alpha", "beta", "gamma"]
        assert all(v.diagnosable for v in report.per_sigma)

    def test_mixed_types(self, ex4):
        assert check_type(ex4, "f1").aggregate is False
        assert check_type(ex4, "f2").aggregate is True

    def test_witness_attached_to_refutations(self, ex3):
        report = check_type(ex3, "f1")
        assert report.aggregate is False
        by_sigma = {v.sigma: v for v in report.per_sigma}
        assert by_sigma["tau"].diagnosable is False
        assert by_sigma["tau"].witness is not None

    def test_no_failure_events_is_vacuously_diagnosable(self, ex2):
        events = {
            n: FuzzyEvent(n, ev.matrix, ev.observability, {"f1": d("0")})
            for n, ev in ex2.events.items()
        }
        m = FdesModel(ex2.dimension, ex2.states, ex2.initial, events, ("f1",), ex2.transitions)
        report = check_type(m, "f1")
        assert report.per_sigma == []
        assert report.aggregate is True

    def test_withheld_verdict_under_violated_assumption(self, ex1):
        transitions = dict(ex1.transitions)
        transitions[("q3", "alpha")] = "q3"
        mutant = FdesModel(
            ex1.dimension, ex1.states, ex1.initial, ex1.events, ex1.failure_types, transitions
        )
        report = check_type(mutant, "f1")
        by_sigma = {v.sigma: v for v in report.per_sigma}
        assert by_sigma["theta"].diagnosable is None
        assert by_sigma["theta"].a2_status == "violated"
        # tau is still refutable, so the aggregate is a definite no
        assert by_sigma["tau"].diagnosable is False
        assert report.aggregate is False

    def test_json_shape(self, ex4):
        obj = check_type(ex4, "f2", oracle_bounds=(4, 10)).to_json_obj()
        assert set(obj) == {"type", "per_sigma", "aggregate"}
        assert obj["aggregate"] is True
        for entry in obj["per_sigma"]:
            assert {"sigma", "a2_status", "diagnosable"} <= set(entry)
            assert entry["diagnosable"] is True
            assert "delay" in entry

    def test_unknown_type(self, ex2):
        with pytest.raises(InputError):
            check_type(ex2, "f9")


class TestOracle:
    def test_refutation_with_pumpable_witness(self, ex1):
        result = oracle_check(ex1, "tau", "f1", 4, 10)
        assert result.kind == "fails"
        w = result.witness
        assert w["s"] == ["alpha", "beta", "tau"]
        assert w["t_cycle"] == ["theta"]
        assert w["omega_cycle"] == ["theta"]
        assert w["omega"][:4] == ["alpha", "beta", "gamma", "theta"]
        assert len(w["pumped_t"]) > 4
        # the pumped pair still projects identically and stays below threshold
        s, t, omega = map(tuple, (w["s"], w["pumped_t"], w["pumped_omega"]))
        assert ex1.project(s + t, "tau") == ex1.project(omega, "tau")
        idx = ex1.failure_types.index("f1")
        assert ex1.failure_profile(omega)[idx] < ex1.events["tau"].failures["f1"]
        assert ex1.language_positive(s + t) and ex1.language_positive(omega)

    def test_confirmation_with_delay(self, ex1):
        result = oracle_check(ex1, "beta", "f2", 4, 10)
        assert result.kind == "holds"
        assert result.delay == 2

    def test_confirmation_at_zero_delay(self, ex4):
        result = oracle_check(ex4, "alpha", "f2", 6, 12)
        assert result.kind == "holds"
        assert result.delay <= 2

    def test_inconclusive_when_starved(self, ex1):
        result = oracle_check(ex1, "tau", "f1", 4, 1)
        assert result.kind == "inconclusive"

    def test_inconclusive_on_silent_divergence(self, ex1):
        # after the observation stops growing, uncertainty here persists
        # forever; the cycle condition cannot see it and the oracle declines
        # to certify either way
        result = oracle_check(ex1, "theta", "f1", 4, 10)
        assert result.kind == "inconclusive"
        assert result.bounded_max_t >= 4
        assert check_wrt(ex1, "theta", "f1")[0] is True

    def test_bad_bounds(self, ex1):
        with pytest.raises(InputError):
            oracle_check(ex1, "tau", "f1", -1, 10)
        with pytest.raises(InputError):
            oracle_check(ex1, "tau", "f1", 4, 0)

    def test_least_delays_on_examples(self, ex2, ex4):
        # regression-pinned minimal delays, derivable by hand from the models
        assert oracle_check(ex2, "alpha", "f1", 6, 12).delay == 0
        assert oracle_check(ex2, "beta", "f1", 6, 12).delay == 2
        assert oracle_check(ex4, "beta", "f1", 6, 12).delay == 3
        assert oracle_check(ex4, "beta", "f2", 6, 12).delay == 1

    def test_json_shape(self, ex1):
        obj = oracle_check(ex1, "beta", "f2", 4, 10).to_json_obj()
        assert obj["result"] == "holds"
        assert obj["delay"] == 2
        assert "bounded_max_t" in obj
