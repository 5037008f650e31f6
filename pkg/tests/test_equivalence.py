from __future__ import annotations

import random

import pytest

from conftest import naive_weak_bisim, prefix_lts, random_lts, tau_pad
from padlver import build_lts, hide, minimize, parallel, relabel, saturate
from padlver import strong_bisim_check, weak_bisim_check, weak_bisim_upto_relabeling
from padlver.equivalence import Dia, Tt, eval_formula
from padlver.lts import from_traces


# -- saturation ----------------------------------------------------------------


def test_saturate_tau_free_adds_only_reflexive_tau():
    lts = from_traces(("a", "b"))
    sat = saturate(lts)
    view = {(s, l, d) for s, l, d, _, _ in sat.transition_view()}
    assert view == {(0, "a", 1), (1, "b", 2),
                    (0, "tau", 0), (1, "tau", 1), (2, "tau", 2)}


def test_saturate_skips_over_tau():
    lts = from_traces(("a", "tau", "b"))
    sat = saturate(lts)
    view = {(s, l, d) for s, l, d, _, _ in sat.transition_view()}
    assert (0, "a", 1) in view and (0, "a", 2) in view
    assert (1, "b", 3) in view and (2, "b", 3) in view
    assert (1, "tau", 2) in view


def test_saturate_initial_tau():
    lts = from_traces(("tau", "a"))
    sat = saturate(lts)
    assert (0, "a", 2) in {(s, l, d) for s, l, d, _, _ in sat.transition_view()}


def test_saturate_requires_resolved():
    lts = build_lts(3, 0, [(0, "x", 1, "C.x_exception", 2)])
    with pytest.raises(ValueError):
        saturate(lts)


def test_saturation_budget_surfaces_as_resource_error():
    from padlver.diagnostics import StateLimitExceeded

    chain = from_traces(tuple("a" for _ in range(6)))
    with pytest.raises(StateLimitExceeded):
        saturate(chain, max_transitions=3)
    with pytest.raises(StateLimitExceeded):
        weak_bisim_check(chain, chain, saturation_budget=3)


# -- basic verdicts --------------------------------------------------------------


def test_reflexivity():
    lts = random_lts(random.Random(0))
    assert weak_bisim_check(lts, lts).equivalent


def test_tau_absorption():
    assert weak_bisim_check(from_traces(("a", "tau")), from_traces(("a",))).equivalent


def test_distinct_labels_give_diamond_formula():
    verdict = weak_bisim_check(from_traces(("a",)), from_traces(("b",)))
    assert not verdict.equivalent
    assert verdict.formula == Dia("a", Tt())
    assert eval_formula(from_traces(("a",)), verdict.formula)
    assert not eval_formula(from_traces(("b",)), verdict.formula)


def test_strong_check_distinguishes_internal_step():
    a_tau = from_traces(("a", "tau"))
    a = from_traces(("a",))
    assert weak_bisim_check(a_tau, a).equivalent
    assert not strong_bisim_check(a_tau, a).equivalent


# -- minimization ---------------------------------------------------------------


def test_minimize_tau_chain():
    lts = from_traces(("tau", "tau", "a"))
    small = minimize(lts)
    assert small.n_states == 2
    assert [(s, l, d) for s, l, d, _, _ in small.transition_view()] == [(0, "a", 1)]


def test_minimize_is_idempotent_and_preserves_equivalence():
    rng = random.Random(13)
    for _ in range(60):
        lts = random_lts(rng)
        small = minimize(lts)
        assert weak_bisim_check(small, lts).equivalent
        again = minimize(small)
        assert again.n_states == small.n_states


def test_minimize_already_minimal_keeps_count():
    lts = from_traces(("a", "b"))
    assert minimize(lts).n_states == lts.n_states


# -- up-to-relabeling -------------------------------------------------------------


def test_upto_relabeling_identity_and_rename():
    a, b = from_traces(("a",)), from_traces(("b",))
    assert weak_bisim_upto_relabeling(a, a, {}).equivalent
    assert weak_bisim_upto_relabeling(a, b, {"a": "b"}).equivalent
    assert not weak_bisim_upto_relabeling(a, b, {}).equivalent


# -- property suites (the larger runs live in the acceptance module) --------------


def test_equivalence_relation_laws():
    rng = random.Random(17)
    for _ in range(150):
        l1 = random_lts(rng, max_states=6)
        l2 = tau_pad(l1, rng) if rng.random() < 0.5 else random_lts(rng, max_states=6)
        l3 = tau_pad(l2, rng) if rng.random() < 0.5 else random_lts(rng, max_states=6)
        r12 = weak_bisim_check(l1, l2).equivalent
        r21 = weak_bisim_check(l2, l1).equivalent
        assert r12 == r21
        r23 = weak_bisim_check(l2, l3).equivalent
        r13 = weak_bisim_check(l1, l3).equivalent
        if r12 and r23:
            assert r13
        assert weak_bisim_check(l1, l1).equivalent


def test_tau_law_on_random_processes():
    rng = random.Random(19)
    for _ in range(100):
        p = random_lts(rng, max_states=5)
        a_tau_p = prefix_lts("a", prefix_lts("tau", p))
        a_p = prefix_lts("a", p)
        assert weak_bisim_check(a_tau_p, a_p).equivalent


def test_oracle_agreement_small():
    rng = random.Random(23)
    for _ in range(120):
        l1 = random_lts(rng, max_states=4)
        l2 = tau_pad(l1, rng) if rng.random() < 0.5 else random_lts(rng, max_states=4)
        assert weak_bisim_check(l1, l2).equivalent == naive_weak_bisim(l1, l2)


def test_saturation_correspondence():
    rng = random.Random(29)
    for _ in range(100):
        l1 = random_lts(rng, max_states=6)
        l2 = tau_pad(l1, rng) if rng.random() < 0.5 else random_lts(rng, max_states=6)
        weak = weak_bisim_check(l1, l2).equivalent
        strong_on_saturated = strong_bisim_check(saturate(l1), saturate(l2)).equivalent
        assert weak == strong_on_saturated


def test_congruence_for_static_operators():
    rng = random.Random(31)
    for _ in range(60):
        l1 = random_lts(rng, max_states=5)
        l2 = tau_pad(l1, rng)
        m_ = random_lts(rng, max_states=4)
        sync = {"a"}
        assert weak_bisim_check(l1, l2).equivalent
        assert weak_bisim_check(
            parallel(l1, m_, sync), parallel(l2, m_, sync)
        ).equivalent
        assert weak_bisim_check(
            hide(l1, hide_set={"b"}), hide(l2, hide_set={"b"})
        ).equivalent
        phi = {"a": "z"}
        assert weak_bisim_check(relabel(l1, phi), relabel(l2, phi)).equivalent


def test_distinguishing_formula_soundness():
    rng = random.Random(37)
    checked = 0
    for _ in range(200):
        l1 = random_lts(rng, max_states=6)
        l2 = random_lts(rng, max_states=6)
        verdict = weak_bisim_check(l1, l2)
        if verdict.equivalent:
            continue
        checked += 1
        assert eval_formula(l1, verdict.formula), verdict.formula.render()
        assert not eval_formula(l2, verdict.formula), verdict.formula.render()
    assert checked >= 50


def test_witness_partition_groups_equivalent_states():
    l1 = from_traces(("a", "tau"))
    l2 = from_traces(("a",))
    verdict = weak_bisim_check(l1, l2)
    assert verdict.equivalent
    assert verdict.blocks_left[l1.initial] == verdict.blocks_right[l2.initial]
    # the post-a states are all equivalent to each other
    assert verdict.blocks_left[1] == verdict.blocks_left[2] == verdict.blocks_right[1]
