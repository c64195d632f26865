import math

import numpy as np
import pytest

from socialcoop.agents import (
    CCETrackingAgent,
    ConstantAgent,
    GrimTriggerAgent,
    HandshakeAgent,
    HandshakeCodebook,
    HedgeAgent,
    InvalidPopulationError,
    Population,
    RegretMatchingAgent,
    TypeDistribution,
    UniformAgent,
    WorstCaseFlipAgent,
    cce_tracking_pair,
    codebook_for,
    default_hedge_rate,
    sample_pairing,
    select_pone,
)
from socialcoop.equilibrium import enumerate_nash, pone_set
from socialcoop.games import JointType, make_coordpref_game, pure
from socialcoop.play import play_episode


GAME = make_coordpref_game(2, 0.6, horizon=12)


def test_codebook_round_trip():
    for n, n_types in [(2, 2), (2, 5), (3, 9), (4, 4)]:
        cb = HandshakeCodebook(n, tuple(range(n_types)))
        assert cb.code_length == max(1, math.ceil(math.log(n_types, n)))
        for t in range(n_types):
            code = cb.encode(t)
            assert len(code) == cb.code_length
            assert cb.decode(code) == t


def test_codebook_decode_invalid_returns_none():
    cb = HandshakeCodebook(2, (0, 1, 2))  # code_length 2, index 3 unused
    assert cb.decode((1, 1)) is None


def test_select_pone_prefers_sum_then_low_actions():
    pones = pone_set(JointType(0, 1), GAME)
    chosen = select_pone(pones)
    # Equal payoff sums: the tie-break picks the profile massing on action 0.
    assert chosen.s1[0] == 1.0 and chosen.s2[0] == 1.0


def test_hedge_closed_form_weights():
    game = make_coordpref_game(2, 0.6, horizon=100)
    agent = HedgeAgent(game, learning_rate=1.0)
    agent.reset(0, 1)
    for _ in range(10):
        agent.observe((0, 0))
    d = agent.act()
    expected = math.exp(10.0) / (math.exp(10.0) + 1.0)
    assert d[0] == pytest.approx(expected, abs=1e-12)


def test_hedge_default_rate():
    assert default_hedge_rate(2, 10000) == pytest.approx(math.sqrt(8 * math.log(2) / 10000))


def test_regret_matching_tracks_positive_regret():
    agent = RegretMatchingAgent(GAME)
    agent.reset(0, 1)
    assert np.allclose(agent.act(), [0.5, 0.5])
    agent.observe((1, 0))  # played 1 vs partner 0: regret for 0 is 1-0=1
    assert np.allclose(agent.act(), [1.0, 0.0])


@pytest.mark.parametrize("jt", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_handshake_self_play_reaches_selected_pone(jt):
    jt = JointType(*jt)
    rec = play_episode(HandshakeAgent(GAME), HandshakeAgent(GAME), jt, GAME, seed=0)
    selected = select_pone(pone_set(jt, GAME))
    a1 = int(np.argmax(selected.s1))
    a2 = int(np.argmax(selected.s2))
    # Stage 1 is the type handshake; afterwards both follow the agreed profile.
    assert rec.history[0] == (jt.theta1, jt.theta2)
    assert rec.history[1:] == ((a1, a2),) * (GAME.horizon - 1)


def test_handshake_falls_back_on_deviation():
    agent = HandshakeAgent(GAME)
    agent.reset(0, 1)
    agent.observe((0, 0))  # handshake: partner claims type 0; agreed play is (0, 0)
    assert agent.fallback is None
    agent.observe((0, 1))  # partner plays a zero-likelihood action
    assert isinstance(agent.fallback, HedgeAgent)
    # Fallback is warm-started from the full observed history.
    expected = HedgeAgent(GAME)
    expected.reset(0, 1)
    expected.warm_start([(0, 0), (0, 1)])
    assert np.allclose(agent.act(), expected.act())


def test_grim_trigger_trace_equivalent_until_deviation():
    jt = JointType(0, 1)
    rec_h = play_episode(HandshakeAgent(GAME), HandshakeAgent(GAME), jt, GAME, seed=1)
    rec_g = play_episode(GrimTriggerAgent(GAME), GrimTriggerAgent(GAME), jt, GAME, seed=1)
    assert rec_h.history == rec_g.history


def test_grim_trigger_punishes_with_minimax_action():
    # Deviation after decoding partner type 0: punisher of type 1 holds the
    # partner's achievable payoff to the smallest column ceiling of G(0).
    agent = GrimTriggerAgent(GAME)
    agent.reset(1, 1)
    agent.observe((1, 0))   # handshake: we encode 1, partner encodes 0; agreed PONE is (0, 0)
    assert agent.fallback is None
    agent.observe((0, 1))   # partner plays 1, zero likelihood under the agreement
    assert isinstance(agent.fallback, ConstantAgent)
    assert agent.fallback.action == 1  # column ceilings of G(0) are [1, 0.6]


def test_grim_trigger_predecode_punishment_covers_all_types():
    # Three types with two actions gives a two-digit handshake where code
    # (1, 1) decodes to nothing; punishment then scans every type's matrix.
    from socialcoop.games import GameClass

    mats = {
        0: np.array([[1.0, 0.0], [0.0, 0.6]]),
        1: np.array([[0.6, 0.0], [0.0, 1.0]]),
        2: np.array([[0.5, 0.0], [0.0, 0.5]]),
    }
    game = GameClass(2, (0, 1, 2), lambda t: mats[t], 10)
    agent = GrimTriggerAgent(game)
    agent.reset(0, 1)
    agent.observe((0, 1))
    assert agent.fallback is None
    agent.observe((0, 1))   # partner digits (1, 1) decode to no type
    assert isinstance(agent.fallback, ConstantAgent)
    # Column ceilings over all matrices are [1, 1]; ties break to action 0.
    assert agent.fallback.action == 0


def test_worst_case_flip_targets_empirical_counts():
    agent = WorstCaseFlipAgent(GAME, GAME.payoff_matrix(0))
    agent.reset(0, 2)
    assert np.allclose(agent.act(), pure(1, 2))  # uniform prior: column 1 hurts type 0 most
    for _ in range(5):
        agent.observe((1, 1))
    # Target mostly plays 1 now; flipping to column 0 denies the 0.6 payoff.
    assert np.allclose(agent.act(), pure(0, 2))


def test_cce_pair_follows_shared_stream_in_self_play():
    jt = JointType(0, 1)
    mixed = [
        e for e in enumerate_nash(jt, GAME)
        if max(max(e.strategy1), max(e.strategy2)) < 1.0 - 1e-9
    ][0]
    target = np.outer(mixed.s1, mixed.s2)
    game = GAME.with_horizon(2000)
    a1, a2 = cce_tracking_pair(target, game, 0.05, shared_seed=9,
                               type_dist=TypeDistribution.point_mass(jt))
    rec = play_episode(a1, a2, jt, game, seed=4)
    assert a1.defected is None and a2.defected is None
    assert rec.history == tuple(map(tuple, a1.recommendations))


def test_cce_pair_rejects_non_cce_target():
    z = np.zeros((2, 2))
    z[0, 1] = 1.0
    with pytest.raises(InvalidPopulationError):
        cce_tracking_pair(z, GAME, 0.05, 0, TypeDistribution.point_mass(JointType(0, 0)))


def test_cce_watchdog_fires_against_adversary():
    jt = JointType(0, 1)
    mixed = [
        e for e in enumerate_nash(jt, GAME)
        if max(max(e.strategy1), max(e.strategy2)) < 1.0 - 1e-9
    ][0]
    target = np.outer(mixed.s1, mixed.s2)
    game = GAME.with_horizon(10000)
    agent = CCETrackingAgent(target, game, watchdog_slack=0.05, shared_seed=3)
    adversary = ConstantAgent(1, game)
    rec = play_episode(agent, adversary, jt, game, seed=8)
    assert agent.defected is not None
    # Post-fallback regret matching keeps per-step regret small.
    g = game.payoff_matrix(0)
    h = np.asarray(rec.history)
    counterfactual = g[:, h[:, 1]].sum(axis=1)
    realized = g[h[:, 0], h[:, 1]].sum()
    assert (counterfactual.max() - realized) / game.horizon <= 0.05


def test_cce_streams_differ_across_episodes():
    target = np.full((2, 2), 0.25)
    agent = CCETrackingAgent(target, GAME, shared_seed=1)
    agent.episode_key = 10
    agent.reset(0, 1)
    first = agent.recommendations.copy()
    agent.episode_key = 11
    agent.reset(0, 1)
    assert not np.array_equal(first, agent.recommendations)


def test_population_weights_validation():
    ctor = lambda: UniformAgent(GAME)
    pop = Population.of("p", ("a", ctor, 2.0), ("b", ctor, 2.0))
    assert pop.weights == (0.5, 0.5)
    with pytest.raises(InvalidPopulationError):
        Population("bad", tuple(), tuple())
    with pytest.raises(InvalidPopulationError):
        Population("bad", (("a", ctor),), (0.9,))


def test_sample_pairing_frequencies_and_determinism():
    pop = Population.of(
        "p",
        ("u", lambda: UniformAgent(GAME), 0.75),
        ("c", lambda: ConstantAgent(0, GAME), 0.25),
    )
    td = TypeDistribution.uniform(GAME)
    picks = []
    for seed in range(2000):
        s1, s2, jt = sample_pairing(pop, td, seed)
        picks.append(isinstance(s1, UniformAgent))
        if seed == 17:
            again = sample_pairing(pop, td, seed)
            assert type(again[0]) is type(s1) and again[2] == jt
    assert np.mean(picks) == pytest.approx(0.75, abs=0.04)


def test_type_distribution_uniform_support():
    td = TypeDistribution.uniform(GAME)
    assert len(td.joint_types) == 4
    assert sum(w for _, w in td.items()) == pytest.approx(1.0)
