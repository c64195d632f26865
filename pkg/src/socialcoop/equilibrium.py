"""Exact equilibrium analysis of the bimatrix stage game selected by a joint type.

Agent 1's matrix is A = G(theta1) and agent 2's is B = G(theta2), both with
rows indexed by the owner's action. Nash equilibria are found by support
enumeration with linear-system solves, guarded to N <= 5.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .games import GameClass, JointType, validate_distribution

log = logging.getLogger(__name__)

MAX_SUPPORT_N = 5
DEDUP_TOL = 1e-6
DOMINATION_MARGIN = 1e-9


class UnsupportedSizeError(ValueError):
    """Game too large for exact support enumeration."""


class NoPoneError(RuntimeError):
    """Empty Pareto-optimal Nash set; degenerate game instance."""


@dataclass(frozen=True)
class EquilibriumProfile:
    strategy1: tuple
    strategy2: tuple
    payoff1: float
    payoff2: float

    @property
    def s1(self) -> np.ndarray:
        return np.array(self.strategy1)

    @property
    def s2(self) -> np.ndarray:
        return np.array(self.strategy2)


def stage_matrices(joint_type: JointType, game: GameClass) -> tuple[np.ndarray, np.ndarray]:
    joint_type = game.check_joint_type(joint_type)
    return game.payoff_matrix(joint_type.theta1), game.payoff_matrix(joint_type.theta2)


def best_response(
    opponent_strategy: np.ndarray, theta, role: int, game: GameClass
) -> tuple[int, float]:
    """Best pure reply and its value against a fixed opponent mixed strategy.

    Ties break toward the lowest action index.
    """
    q = validate_distribution(opponent_strategy, game.n_actions)
    values = game.payoff_matrix(theta) @ q
    a = int(np.argmax(values))
    return a, float(values[a])


def _epsilon_of_profile(p: np.ndarray, q: np.ndarray, a_mat: np.ndarray, b_mat: np.ndarray) -> float:
    """Largest unilateral pure-deviation gain for either agent."""
    gain1 = float(np.max(a_mat @ q) - p @ a_mat @ q)
    gain2 = float(np.max(b_mat @ p) - q @ b_mat @ p)
    return max(gain1, gain2)


def _solve_support(own_mat: np.ndarray, rows: tuple, cols: tuple) -> np.ndarray | None:
    """Opponent mixture on ``cols`` making the owner indifferent across ``rows``.

    Returns the full-length strategy vector, or None if the indifference
    system is singular or the solution leaves the simplex.
    """
    k = len(rows)
    n = own_mat.shape[0]
    lhs = np.zeros((k + 1, k + 1))
    lhs[:k, :k] = own_mat[np.ix_(rows, cols)]
    lhs[:k, k] = -1.0
    lhs[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        return None
    weights = sol[:k]
    if np.any(weights < -1e-9):
        return None
    full = np.zeros(n)
    full[list(cols)] = np.clip(weights, 0.0, None)
    total = full.sum()
    if total <= 0:
        return None
    return full / total


def enumerate_nash(joint_type: JointType, game: GameClass, tol: float = 1e-9) -> list[EquilibriumProfile]:
    """All Nash equilibria of the stage game found by support enumeration.

    Every returned profile passes an eps-NE check with eps <= tol; profiles
    within L-inf 1e-6 of each other are merged. Singular indifference systems
    (degenerate support pairs) are skipped with a debug log.
    """
    n = game.n_actions
    if n > MAX_SUPPORT_N:
        raise UnsupportedSizeError(f"support enumeration is guarded to N <= {MAX_SUPPORT_N}, got {n}")
    a_mat, b_mat = stage_matrices(joint_type, game)
    found: list[EquilibriumProfile] = []
    skipped = 0
    for k in range(1, n + 1):
        for rows in itertools.combinations(range(n), k):
            for cols in itertools.combinations(range(n), k):
                # q makes agent 1 indifferent on `rows`; p makes agent 2
                # indifferent on `cols` (agent 2's own actions are B's rows).
                q = _solve_support(a_mat, rows, cols)
                p = _solve_support(b_mat, cols, rows)
                if q is None or p is None:
                    skipped += 1
                    continue
                if _epsilon_of_profile(p, q, a_mat, b_mat) > tol:
                    continue
                if any(
                    max(np.max(np.abs(p - e.s1)), np.max(np.abs(q - e.s2))) <= DEDUP_TOL
                    for e in found
                ):
                    continue
                found.append(
                    EquilibriumProfile(
                        strategy1=tuple(float(x) for x in p),
                        strategy2=tuple(float(x) for x in q),
                        payoff1=float(p @ a_mat @ q),
                        payoff2=float(q @ b_mat @ p),
                    )
                )
    if skipped:
        log.debug("enumerate_nash skipped %d singular/infeasible support pairs", skipped)
    return found


def pareto_optimal_nash(ne_set: list[EquilibriumProfile]) -> list[EquilibriumProfile]:
    """Drop equilibria strongly Pareto-dominated by another equilibrium."""
    kept = []
    for e in ne_set:
        dominated = any(
            other.payoff1 > e.payoff1 + DOMINATION_MARGIN
            and other.payoff2 > e.payoff2 + DOMINATION_MARGIN
            for other in ne_set
        )
        if not dominated:
            kept.append(e)
    return kept


def worst_pone_for(partner_role: int, pone_set: list[EquilibriumProfile]) -> EquilibriumProfile:
    """The Pareto-optimal equilibrium paying the partner seat the least.

    Ties break lexicographically on (other agent's payoff, strategy vectors).
    """
    if not pone_set:
        raise NoPoneError("empty Pareto-optimal Nash set")
    if partner_role == 2:
        key = lambda e: (e.payoff2, e.payoff1, e.strategy1, e.strategy2)
    else:
        key = lambda e: (e.payoff1, e.payoff2, e.strategy1, e.strategy2)
    return min(pone_set, key=key)


def is_cce(z: np.ndarray, joint_type: JointType, game: GameClass, tol: float = 1e-9) -> tuple[bool, float]:
    """Coarse-correlated-equilibrium membership of a joint action distribution.

    ``z[a1, a2]`` is the probability of the joint action. Returns the verdict
    and the largest fixed-action deviation gain over both agents.
    """
    a_mat, b_mat = stage_matrices(joint_type, game)
    z = np.asarray(z, dtype=float)
    n = game.n_actions
    if z.shape != (n, n) or np.any(z < -1e-12) or abs(z.sum() - 1.0) > 1e-9:
        raise ValueError("z must be an NxN distribution over joint actions")
    marg1 = z.sum(axis=1)
    marg2 = z.sum(axis=0)
    value1 = float(np.sum(z * a_mat))
    value2 = float(np.sum(z * b_mat.T))
    gain1 = float(np.max(a_mat @ marg2) - value1)
    gain2 = float(np.max(b_mat @ marg1) - value2)
    max_violation = max(gain1, gain2)
    return max_violation <= tol, max_violation


@lru_cache(maxsize=4096)
def _pone_cached(game: GameClass, theta1, theta2) -> tuple:
    ne = enumerate_nash(JointType(theta1, theta2), game)
    return tuple(pareto_optimal_nash(ne))


def pone_set(joint_type: JointType, game: GameClass) -> list[EquilibriumProfile]:
    """Cached Pareto-optimal Nash set for a joint type."""
    jt = game.check_joint_type(joint_type)
    return list(_pone_cached(game, jt.theta1, jt.theta2))
