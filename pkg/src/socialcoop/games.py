"""Core game objects: game classes, histories, mixed strategies, episode play.

A game class bundles an action count N, a finite type space, a map from
types to NxN payoff matrices with entries in [0, 1], and a horizon T.
A concrete stage game is selected by a joint type (theta1, theta2); agent 1's
stage payoff for joint action (a1, a2) is G(theta1)[a1, a2] and agent 2's is
G(theta2)[a2, a1].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

ATOL = 1e-9


class GameError(ValueError):
    """Invalid game construction or invalid arguments to a game operation."""


class ProtocolViolation(RuntimeError):
    """A strategy emitted an invalid action distribution during play."""


class JointType(NamedTuple):
    theta1: int
    theta2: int


#: A history is an ordered tuple of (action_agent1, action_agent2) pairs.
History = tuple[tuple[int, int], ...]


def validate_distribution(p: np.ndarray, n_actions: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (n_actions,):
        raise GameError(f"distribution has shape {p.shape}, expected ({n_actions},)")
    if np.any(p < -ATOL) or abs(p.sum() - 1.0) > ATOL:
        raise GameError(f"invalid distribution {p}")
    return p


def pure(action: int, n_actions: int) -> np.ndarray:
    """Degenerate mixed strategy putting all mass on one action."""
    p = np.zeros(n_actions)
    p[action] = 1.0
    return p


def uniform(n_actions: int) -> np.ndarray:
    return np.full(n_actions, 1.0 / n_actions)


@dataclass(frozen=True)
class GameClass:
    """A family of repeated two-player matrix games with private types.

    Payoff matrices are evaluated once per type at construction and cached,
    so ``payoff_matrix`` is deterministic even if ``payoff_map`` is not.
    """

    n_actions: int
    type_space: tuple
    payoff_map: Callable[[int], np.ndarray]
    horizon: int

    def __post_init__(self):
        if self.n_actions < 1:
            raise GameError("n_actions must be positive")
        if self.horizon < 1:
            raise GameError("horizon must be positive")
        if not self.type_space:
            raise GameError("type_space must be non-empty")
        matrices = {}
        for theta in self.type_space:
            m = np.array(self.payoff_map(theta), dtype=float)
            m.setflags(write=False)
            if m.shape != (self.n_actions, self.n_actions):
                raise GameError(
                    f"payoff matrix for type {theta} has shape {m.shape}, "
                    f"expected ({self.n_actions}, {self.n_actions})"
                )
            if np.any(m < -ATOL) or np.any(m > 1.0 + ATOL):
                raise GameError(f"payoff matrix for type {theta} has entries outside [0, 1]")
            matrices[theta] = m
        object.__setattr__(self, "_matrices", matrices)

    def payoff_matrix(self, theta) -> np.ndarray:
        try:
            return self._matrices[theta]
        except KeyError:
            raise GameError(f"unknown type {theta!r}") from None

    def check_joint_type(self, joint_type: JointType) -> JointType:
        jt = JointType(*joint_type)
        if jt.theta1 not in self._matrices or jt.theta2 not in self._matrices:
            raise GameError(f"joint type {jt} not in type space")
        return jt

    def with_horizon(self, horizon: int) -> "GameClass":
        return GameClass(self.n_actions, self.type_space, self.payoff_map, horizon)


def payoff(sigma: np.ndarray, sigma_prime: np.ndarray, theta, game: GameClass) -> float:
    """Expected stage payoff sigma' G(theta) sigma' for the type-theta agent.

    ``sigma`` is the type-theta agent's own strategy (rows of its matrix),
    ``sigma_prime`` the partner's.
    """
    g = game.payoff_matrix(theta)
    sigma = validate_distribution(sigma, game.n_actions)
    sigma_prime = validate_distribution(sigma_prime, game.n_actions)
    return float(sigma @ g @ sigma_prime)


def stage_payoffs(a1: int, a2: int, joint_type: JointType, game: GameClass) -> tuple[float, float]:
    """Realized (agent1, agent2) payoffs for one joint action."""
    g1 = game.payoff_matrix(joint_type.theta1)
    g2 = game.payoff_matrix(joint_type.theta2)
    return float(g1[a1, a2]), float(g2[a2, a1])


def make_coordpref_game(n_actions: int, off_peak: float, horizon: int = 100) -> GameClass:
    """Typed coordination family: each type prefers coordinating on its own action.

    G(theta)[a, a'] is 1 if a == a' == theta, ``off_peak`` if a == a' != theta,
    and 0 on miscoordination.
    """
    if n_actions < 2:
        raise GameError("coordpref requires n_actions >= 2")
    if not 0.0 < off_peak < 1.0:
        raise GameError("off_peak must lie strictly between 0 and 1")

    def payoff_map(theta: int) -> np.ndarray:
        m = np.eye(n_actions) * off_peak
        m[theta, theta] = 1.0
        return m

    return GameClass(n_actions, tuple(range(n_actions)), payoff_map, horizon)


def two_matrix_game(a: Sequence, b: Sequence, horizon: int = 100) -> GameClass:
    """Game class with exactly two types holding the given matrices.

    Pairing joint type (0, 1) recovers an arbitrary bimatrix game where
    agent 1 has matrix ``a`` and agent 2 has matrix ``b`` (rows = own action).
    """
    mats = {0: np.array(a, dtype=float), 1: np.array(b, dtype=float)}
    return GameClass(mats[0].shape[0], (0, 1), lambda theta: mats[theta], horizon)
