import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aoiipoll.channel import LinkModel, poll, poll_from_uniforms, success_probability


def test_certain_link_succeeds_first_try():
    out = poll(LinkModel(pdr=1.0), 0, np.random.default_rng(0))
    assert (out.woke, out.attempts, out.success) == (True, 1, True)


def test_dead_link_exhausts_retries():
    out = poll(LinkModel(pdr=0.0, r_max=3), 0, np.random.default_rng(0))
    assert (out.woke, out.attempts, out.success) == (True, 4, False)


def test_failed_wakeup_costs_no_attempts():
    out = poll_from_uniforms(LinkModel(wakeup_reliability=0.5), 0, [0.9, 0.0, 0.0, 0.0, 0.0])
    assert (out.woke, out.attempts, out.success) == (False, 0, False)


def test_per_node_pdr():
    link = LinkModel(pdr=(1.0, 0.0), r_max=1)
    draws = [0.0, 0.5, 0.5]
    assert poll_from_uniforms(link, 0, draws).success
    assert not poll_from_uniforms(link, 1, draws).success


def test_invalid_link_rejected():
    with pytest.raises(ValueError):
        LinkModel(pdr=1.2)
    with pytest.raises(ValueError):
        LinkModel(r_max=-1)


def test_closed_form_success_probability():
    assert success_probability(0.8, 3) == pytest.approx(1 - 0.2**4)
    assert success_probability(0.5, 0, wakeup_reliability=0.5) == 0.25


@pytest.mark.parametrize("rho", [0.5, 0.8, 0.9])
def test_empirical_success_rate(rho):
    link = LinkModel(pdr=rho, r_max=3)
    rng = np.random.default_rng(1234)
    wins = sum(poll(link, 0, rng).success for _ in range(10_000))
    assert abs(wins / 10_000 - success_probability(rho, 3)) <= 0.02


@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=5, max_size=5),
       st.floats(0, 1), st.floats(0, 1))
def test_outcome_invariants(draws, rho, wake):
    out = poll_from_uniforms(LinkModel(pdr=rho, r_max=3, wakeup_reliability=wake), 0, draws)
    assert out.attempts <= 4
    assert (out.attempts == 0) == (not out.woke)
    assert not out.success or out.woke


def test_replay_is_deterministic():
    link = LinkModel(pdr=0.6)
    a = [poll(link, 0, np.random.default_rng(9)) for _ in range(3)]
    b = [poll(link, 0, np.random.default_rng(9)) for _ in range(3)]
    assert a == b


def test_mean_attempts_bounded_by_inverse_pdr():
    link = LinkModel(pdr=0.4, r_max=3)
    rng = np.random.default_rng(5)
    mean = np.mean([poll(link, 0, rng).attempts for _ in range(20_000)])
    assert mean <= 1 / 0.4
