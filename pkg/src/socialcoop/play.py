"""Meta-strategy interface and seeded episode simulation.

A meta-strategy maps (own type, seat, history of joint actions) to an action
distribution. Instances may keep incremental per-episode state: ``reset`` is
called at episode start, ``act`` queries the current-stage distribution, and
``observe`` feeds back the realized joint action. One instance is used by at
most one episode at a time; episodes with distinct seeds are independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import ATOL, GameClass, History, JointType, ProtocolViolation


@dataclass(frozen=True)
class EpisodeRecord:
    joint_type: JointType
    history: History
    seed: int


class MetaStrategy:
    """Base class for agents playing repeated matrix games.

    Subclasses implement ``act`` and ``observe``. ``reset`` receives the
    agent's own type, its seat (1 or 2), and an optional RNG for strategies
    that need private randomness beyond action sampling (e.g. a one-off
    committed draw). Action sampling itself is handled by the episode runner.
    """

    name = "meta"

    #: Set by the episode runner before ``reset``: the episode seed, visible to
    #: both seats. Lets coordinated constructions (e.g. a shared recommendation
    #: stream) vary across episodes without a private channel.
    episode_key = None

    def reset(self, theta, role: int, rng: np.random.Generator | None = None) -> None:
        self.theta = theta
        self.role = role
        self.rng = rng

    def act(self) -> np.ndarray:
        raise NotImplementedError

    def observe(self, joint_action: tuple[int, int]) -> None:
        pass

    def partner_action(self, joint_action: tuple[int, int]) -> int:
        return joint_action[1] if self.role == 1 else joint_action[0]

    def own_action(self, joint_action: tuple[int, int]) -> int:
        return joint_action[0] if self.role == 1 else joint_action[1]


def replay_distribution(strategy: MetaStrategy, theta, role: int, history: History) -> np.ndarray:
    """Strategy's action distribution after the given history, by replay.

    Pure in (theta, role, history) for strategies without private randomness;
    used by exact history-distribution enumeration.
    """
    strategy.reset(theta, role)
    for joint in history:
        strategy.observe(tuple(joint))
    return strategy.act()


def sample_action(dist: np.ndarray, u: float) -> int:
    """Map a uniform draw to an action via the CDF; shared by all backends."""
    a = 0
    c = 0.0
    for k in range(len(dist) - 1):
        c += dist[k]
        if u >= c:
            a = k + 1
    return a


def play_episode(
    strategy1: MetaStrategy,
    strategy2: MetaStrategy,
    joint_type: JointType,
    game: GameClass,
    seed: int,
) -> EpisodeRecord:
    """Run one seeded episode of length ``game.horizon`` between two strategies.

    Per stage, both agents' distributions are queried simultaneously, actions
    are sampled (agent 1 first), and the joint action is shown to both.
    Identical arguments and seed reproduce the record exactly.
    """
    joint_type = game.check_joint_type(joint_type)
    root = np.random.SeedSequence(seed)
    rng, rng1, rng2 = (np.random.default_rng(s) for s in root.spawn(3))
    strategy1.episode_key = seed
    strategy2.episode_key = seed
    strategy1.reset(joint_type.theta1, 1, rng1)
    strategy2.reset(joint_type.theta2, 2, rng2)
    steps = []
    for t in range(game.horizon):
        joint = []
        for seat, strat in ((1, strategy1), (2, strategy2)):
            d = strat.act()
            if (
                not isinstance(d, np.ndarray)
                or d.shape != (game.n_actions,)
                or d.min() < -ATOL
                or abs(d.sum() - 1.0) > ATOL
            ):
                raise ProtocolViolation(
                    f"strategy in seat {seat} emitted an invalid distribution at stage {t + 1}: {d!r}"
                )
            joint.append(sample_action(d, rng.random()))
        joint = (joint[0], joint[1])
        steps.append(joint)
        strategy1.observe(joint)
        strategy2.observe(joint)
    return EpisodeRecord(joint_type=joint_type, history=tuple(steps), seed=seed)


def episode_payoffs(record: EpisodeRecord, game: GameClass) -> tuple[float, float]:
    """Total realized (agent1, agent2) payoffs of a recorded episode."""
    g1 = game.payoff_matrix(record.joint_type.theta1)
    g2 = game.payoff_matrix(record.joint_type.theta2)
    h = np.asarray(record.history, dtype=int)
    if len(h) == 0:
        return 0.0, 0.0
    return float(g1[h[:, 0], h[:, 1]].sum()), float(g2[h[:, 1], h[:, 0]].sum())


def expected_total_payoff(
    strategy1: MetaStrategy,
    strategy2: MetaStrategy,
    joint_type: JointType,
    game: GameClass,
    n_rollouts: int,
    seed: int,
    agent: int = 1,
) -> tuple[float, float]:
    """Monte Carlo estimate of an agent's expected total episode payoff.

    Returns (estimate, 95% confidence half-width). The half-width is 0 for
    deterministic strategy pairs.
    """
    if n_rollouts < 1:
        raise ValueError("n_rollouts must be >= 1")
    children = np.random.SeedSequence(seed).spawn(n_rollouts)
    totals = np.empty(n_rollouts)
    for j, child in enumerate(children):
        rec = play_episode(strategy1, strategy2, joint_type, game, child.generate_state(1)[0])
        totals[j] = episode_payoffs(rec, game)[agent - 1]
    if n_rollouts == 1:
        return float(totals[0]), 0.0
    half = 1.96 * float(totals.std(ddof=1)) / np.sqrt(n_rollouts)
    return float(totals.mean()), half
