"""Imitate-then-commit meta-strategy and its analytic altruistic-regret bound.

The agent samples from a tabular imitation policy for the first T~ stages,
summarizes the observed joint play as an empirical joint distribution, draws a
single mixed strategy from a mixture built from that distribution, and plays
it i.i.d. for the remaining stages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import GameClass, History, pure
from .imitation import EmpiricalPolicy, lemma1_bound
from .play import MetaStrategy, sample_action


@dataclass(frozen=True)
class JointEmpirical:
    """Frequency histogram of joint actions over a history prefix."""

    weights: tuple  # N x N nested tuple, rows = seat-1 action
    prefix_length: int

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.weights)


@dataclass(frozen=True)
class ICConfig:
    imitation_horizon: int
    total_horizon: int
    seat: int = 1

    def __post_init__(self):
        if not 0 < self.imitation_horizon < self.total_horizon:
            raise ValueError("need 0 < T~ < T")
        if self.seat not in (1, 2):
            raise ValueError("seat must be 1 or 2")


def empirical_joint_strategy(history: History, prefix_length: int, n_actions: int) -> JointEmpirical:
    """Joint-action frequencies over the first ``prefix_length`` steps."""
    if prefix_length < 1:
        raise ValueError("prefix length must be >= 1")
    if len(history) < prefix_length:
        raise ValueError("history shorter than the requested prefix")
    m = np.zeros((n_actions, n_actions))
    for a1, a2 in history[:prefix_length]:
        m[a1, a2] += 1.0
    m /= prefix_length
    return JointEmpirical(weights=tuple(map(tuple, m)), prefix_length=prefix_length)


def commit_mixture(z_hat: JointEmpirical, own_seat: int) -> list[tuple[np.ndarray, float]]:
    """Mixture over pure own-seat strategies weighted by the own-seat marginal.

    Guarantee (the max-vs-average inequality): for any partner payoff matrix B,
    the expected best-response value of the partner under this mixture is at
    least the partner's payoff under z_hat. Zero-weight components are dropped.
    """
    z = z_hat.matrix
    marginal = z.sum(axis=1) if own_seat == 1 else z.sum(axis=0)
    n = len(marginal)
    return [(pure(a, n), float(marginal[a])) for a in range(n) if marginal[a] > 0.0]


def mixture_best_response_value(
    mixture: list[tuple[np.ndarray, float]], partner_matrix: np.ndarray
) -> float:
    """Expected partner best-response value over the mixture components.

    ``partner_matrix`` rows are the partner's own actions; a component x fixes
    our action distribution, so the partner's best reply is max over its rows
    of B @ x.
    """
    b = np.asarray(partner_matrix, dtype=float)
    return sum(w * float(np.max(b @ x)) for x, w in mixture)


class ImitateThenCommitAgent(MetaStrategy):
    """Imitation prefix followed by a committed i.i.d. mixed strategy."""

    name = "imitate_then_commit"

    def __init__(self, policy: EmpiricalPolicy, config: ICConfig):
        if policy.imitation_horizon != config.imitation_horizon:
            raise ValueError("policy horizon must match the IC configuration")
        self.policy = policy
        self.config = config

    def reset(self, theta, role, rng=None):
        super().reset(theta, role, rng)
        self.prefix: list[tuple[int, int]] = []
        self.committed: np.ndarray | None = None

    def act(self) -> np.ndarray:
        if len(self.prefix) >= self.config.total_horizon:
            raise RuntimeError("episode ran past the configured horizon")
        if self.committed is not None:
            return self.committed
        return self.policy.lookup(self.theta, tuple(self.prefix))

    def observe(self, joint_action):
        self.prefix.append(tuple(joint_action))
        if len(self.prefix) == self.config.imitation_horizon:
            self._commit()

    def _commit(self):
        z_hat = empirical_joint_strategy(
            tuple(self.prefix), self.config.imitation_horizon, self.policy.n_actions
        )
        mixture = commit_mixture(z_hat, own_seat=self.role)
        weights = np.array([w for _, w in mixture])
        u = self.rng.random() if self.rng is not None else 0.0
        idx = sample_action(weights / weights.sum(), u)
        self.committed = mixture[idx][0]


def theorem1_bound(
    delta: float,
    epsilon: float,
    k: int,
    n_actions: int,
    partial_horizon: int,
    total_horizon: int,
    n_types: int,
) -> float:
    """Analytic altruistic-regret bound for an imitate-then-commit agent
    against a certified population: 2*delta + delta(K) + (2(T-T~)/T + 1)*eps.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    if epsilon < 0.0:
        raise ValueError("epsilon must be non-negative")
    if not 0 < partial_horizon < total_horizon:
        raise ValueError("need 0 < T~ < T")
    delta_k = lemma1_bound(n_actions, partial_horizon, n_types, k)
    coefficient = 2.0 * (total_horizon - partial_horizon) / total_horizon + 1.0
    return 2.0 * delta + delta_k + coefficient * epsilon
