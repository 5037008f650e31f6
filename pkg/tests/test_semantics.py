from __future__ import annotations

import pytest

from conftest import fixture_source
from padlver import parse
from padlver import model as m
from padlver.diagnostics import SemanticsError, StateLimitExceeded
from padlver.elaborate import _queue_aet_equations
from padlver.semantics import generate_lts


def eq(name, body, params=()):
    return m.BehaviorEquation(name, tuple(params), body)


def test_stop_has_single_state_and_no_transitions():
    lts = generate_lts([eq("Dead", m.Stop())])
    assert lts.n_states == 1
    assert lts.transition_view() == []


def test_queue_initially_enables_only_arrive():
    # guard on depart is n > 0, so the empty queue can only accept
    lts = generate_lts(_queue_aet_equations(1), prefix="Q")
    initial_moves = {lts.labels[t.label] for t in lts.trans[lts.initial]}
    assert initial_moves == {"Q.arrive"}
    assert lts.n_states == 2  # n = 0 and n = 1


def test_queue_capacity_blocks_arrive_when_full():
    lts = generate_lts(_queue_aet_equations(2), prefix="Q",
                       mark_when=lambda env: env.get("n") == 2)
    assert lts.n_states == 3
    full = next(iter(lts.marked))
    moves = {lts.labels[t.label] for t in lts.trans[full]}
    assert moves == {"Q.depart"}


def test_queue_capacity_sublts():
    # canonical numbering puts n = k at state k, so the capacity-1
    # system embeds into the capacity-2 one
    small = generate_lts(_queue_aet_equations(1), prefix="Q")
    large = generate_lts(_queue_aet_equations(2), prefix="Q")
    small_view = set(small.transition_view())
    large_view = set(large.transition_view())
    assert small.n_states <= large.n_states
    assert {t for t in small_view if t[1] == "Q.arrive" and t[0] < small.n_states - 1} \
        <= large_view
    assert {t for t in small_view if t[1] == "Q.depart"} <= large_view


def test_client_in_isolation_has_both_outcomes():
    # after send_request two successors: one enabling receive_response
    # (success) and one enabling keep_processing (exception)
    ast = parse(fixture_source("client_server_async"))
    client = ast.aet("Client_Type")
    lts = generate_lts(client.equations, prefix="C_1",
                       ssync_actions={"send_request"})
    (send,) = [t for t in lts.trans[1] if lts.labels[t.label] == "C_1.send_request"]
    assert send.semisync
    ok_moves = {lts.labels[t.label] for t in lts.trans[send.target]}
    exc_moves = {lts.labels[t.label] for t in lts.trans[send.exc_target]}
    assert ok_moves == {"C_1.receive_response"}
    assert exc_moves == {"C_1.keep_processing"}
    assert lts.labels[send.exc_label] == "C_1.send_request_exception"


def test_false_guards_contribute_nothing():
    body = m.Choice((
        m.Branch(m.BoolLit(True), m.Prefix("a", m.Invoke("E", ()))),
        m.Branch(m.BoolLit(False), m.Prefix("b", m.Invoke("E", ()))),
    ))
    lts = generate_lts([eq("E", body)])
    assert {lts.labels[t.label] for t in lts.trans[0]} == {"a"}


def test_parameter_values_drive_guards():
    # E(n) = choice { cond(n < 2) -> up . E(n + 1), cond(n > 0) -> down . E(n - 1) }
    n = m.Var("n")
    body = m.Choice((
        m.Branch(m.Binary("<", n, m.IntLit(2)), m.Prefix("up", m.Invoke("E", (m.Binary("+", n, m.IntLit(1)),)))),
        m.Branch(m.Binary(">", n, m.IntLit(0)), m.Prefix("down", m.Invoke("E", (m.Binary("-", n, m.IntLit(1)),)))),
    ))
    lts = generate_lts([eq("E", body, [m.Param("n", m.IntType(0, 2), m.IntLit(0))])])
    assert lts.n_states == 3


def test_out_of_range_invocation_rejected():
    body = m.Prefix("a", m.Invoke("E", (m.Binary("+", m.Var("n"), m.IntLit(1)),)))
    with pytest.raises(SemanticsError):
        generate_lts([eq("E", body, [m.Param("n", m.IntType(0, 1), m.IntLit(0))])])


def test_unguarded_recursion_detected():
    looping = [eq("A", m.Invoke("B", ())), eq("B", m.Invoke("A", ()))]
    with pytest.raises(SemanticsError):
        generate_lts(looping)


def test_unknown_equation_rejected():
    with pytest.raises(SemanticsError):
        generate_lts([eq("A", m.Invoke("Nope", ()))])


def test_state_limit_reports_progress():
    n = m.Var("n")
    body = m.Prefix("tick", m.Invoke("E", (m.Binary("+", n, m.IntLit(1)),)))
    with pytest.raises(StateLimitExceeded) as err:
        generate_lts(
            [eq("E", body, [m.Param("n", m.IntType(0, 500), m.IntLit(0))])],
            state_limit=10,
        )
    assert err.value.states_seen == 10


def test_generation_is_deterministic():
    ast = parse(fixture_source("cruise_control"))
    panel = ast.aet("Panel_Type")
    ssync = {"signal_engine_on", "signal_engine_off", "signal_accelerator",
             "signal_brake", "signal_on", "signal_off", "signal_resume"}
    one = generate_lts(panel.equations, prefix="P", ssync_actions=ssync)
    two = generate_lts(panel.equations, prefix="P", ssync_actions=ssync)
    assert one == two


def test_success_environment_is_live_only():
    # an unread success flag does not split states: both continuations
    # of the semisync transition coincide
    body = m.Prefix("s", m.Prefix("next", m.Invoke("E", ())))
    lts = generate_lts([eq("E", body)], ssync_actions={"s"})
    (tr,) = [t for t in lts.trans[lts.initial] if t.semisync]
    assert tr.target == tr.exc_target
