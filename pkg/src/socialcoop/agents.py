"""Agent zoo: no-regret learners, handshake cooperators, grim trigger,
recommendation-following CCE trackers, fixed adversaries, and population sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .equilibrium import NoPoneError, is_cce, pone_set
from .games import GameClass, JointType, pure, uniform
from .play import MetaStrategy


class InvalidPopulationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Fixed and adversarial agents


class ConstantAgent(MetaStrategy):
    name = "constant"

    def __init__(self, action: int, game: GameClass):
        self.action = action
        self.game = game

    def act(self) -> np.ndarray:
        return pure(self.action, self.game.n_actions)


class UniformAgent(MetaStrategy):
    name = "uniform"

    def __init__(self, game: GameClass):
        self.game = game

    def act(self) -> np.ndarray:
        return uniform(self.game.n_actions)


class WorstCaseFlipAgent(MetaStrategy):
    """Adversary minimizing the target agent's expected payoff against the
    target's empirical action frequencies so far. Stage 1 assumes uniform."""

    name = "flip"

    def __init__(self, game: GameClass, target_matrix: np.ndarray):
        self.game = game
        self.target_matrix = np.asarray(target_matrix, dtype=float)

    def reset(self, theta, role, rng=None):
        super().reset(theta, role, rng)
        self.counts = np.ones(self.game.n_actions)  # uniform prior

    def act(self) -> np.ndarray:
        values = self.counts @ self.target_matrix  # target payoff per our action
        return pure(int(np.argmin(values)), self.game.n_actions)

    def observe(self, joint_action):
        self.counts[self.partner_action(joint_action)] += 1.0


class BestResponseEmpiricalAgent(MetaStrategy):
    """Plays the best reply to the partner's empirical action frequencies."""

    name = "br_empirical"

    def __init__(self, game: GameClass):
        self.game = game

    def reset(self, theta, role, rng=None):
        super().reset(theta, role, rng)
        self.counts = np.ones(self.game.n_actions)

    def act(self) -> np.ndarray:
        values = self.game.payoff_matrix(self.theta) @ self.counts
        return pure(int(np.argmax(values)), self.game.n_actions)

    def observe(self, joint_action):
        self.counts[self.partner_action(joint_action)] += 1.0


# ---------------------------------------------------------------------------
# No-regret learners


def default_hedge_rate(n_actions: int, horizon: int) -> float:
    return math.sqrt(8.0 * math.log(n_actions) / horizon)


class HedgeAgent(MetaStrategy):
    """Multiplicative-weights learner over cumulative counterfactual payoffs."""

    name = "hedge"

    def __init__(self, game: GameClass, learning_rate: float | None = None):
        self.game = game
        self.eta = (
            learning_rate
            if learning_rate is not None
            else default_hedge_rate(game.n_actions, game.horizon)
        )
        if self.eta <= 0:
            raise ValueError("learning_rate must be positive")

    def reset(self, theta, role, rng=None):
        super().reset(theta, role, rng)
        self.w = np.zeros(self.game.n_actions)

    def warm_start(self, history: Sequence[tuple[int, int]]) -> None:
        """Initialize counterfactual payoffs from an already-observed history."""
        for joint in history:
            self.observe(joint)

    def act(self) -> np.ndarray:
        e = np.exp(self.eta * (self.w - self.w.max()))
        return e / e.sum()

    def observe(self, joint_action):
        g = self.game.payoff_matrix(self.theta)
        self.w += g[:, self.partner_action(joint_action)]


class RegretMatchingAgent(MetaStrategy):
    """Plays proportionally to positive cumulative external regrets."""

    name = "regret_matching"

    def __init__(self, game: GameClass):
        self.game = game

    def reset(self, theta, role, rng=None):
        super().reset(theta, role, rng)
        self.regrets = np.zeros(self.game.n_actions)

    def act(self) -> np.ndarray:
        pos = np.clip(self.regrets, 0.0, None)
        total = pos.sum()
        if total <= 0.0:
            return uniform(self.game.n_actions)
        return pos / total

    def observe(self, joint_action):
        g = self.game.payoff_matrix(self.theta)
        a_p = self.partner_action(joint_action)
        self.regrets += g[:, a_p] - g[self.own_action(joint_action), a_p]


def hedge_agent(learning_rate: float | None, game: GameClass) -> HedgeAgent:
    return HedgeAgent(game, learning_rate)


def regret_matching_agent(game: GameClass) -> RegretMatchingAgent:
    return RegretMatchingAgent(game)


# ---------------------------------------------------------------------------
# Handshake cooperators


@dataclass(frozen=True)
class HandshakeCodebook:
    """Fixed-length base-N encoding of types as action sequences."""

    n_actions: int
    types: tuple

    def __post_init__(self):
        length = max(1, math.ceil(math.log(len(self.types), self.n_actions)))
        object.__setattr__(self, "code_length", length)

    def encode(self, theta) -> tuple[int, ...]:
        index = self.types.index(theta)
        digits = []
        for _ in range(self.code_length):
            digits.append(index % self.n_actions)
            index //= self.n_actions
        return tuple(reversed(digits))

    def decode(self, actions: Sequence[int]):
        index = 0
        for a in actions:
            index = index * self.n_actions + a
        if index >= len(self.types):
            return None
        return self.types[index]


def codebook_for(game: GameClass) -> HandshakeCodebook:
    return HandshakeCodebook(game.n_actions, tuple(game.type_space))


def select_pone(pones):
    """Selection rule shared by all handshake agents: maximize the payoff sum,
    break ties toward strategies massing on lower action indices."""
    if not pones:
        raise NoPoneError("empty Pareto-optimal Nash set")
    return min(
        pones,
        key=lambda e: (
            -(e.payoff1 + e.payoff2),
            tuple(-x for x in e.strategy1),
            tuple(-x for x in e.strategy2),
        ),
    )


class HandshakeAgent(MetaStrategy):
    """Socially-intelligent cooperator: encodes its type for the first
    ``code_length`` stages, decodes the partner's type, then plays its seat of
    the selected Pareto-optimal Nash equilibrium. Any zero-likelihood partner
    action permanently triggers ``on_deviation`` (default: fall back to Hedge
    warm-started from the observed history).
    """

    name = "handshake"

    def __init__(self, game: GameClass, codebook: HandshakeCodebook | None = None,
                 fallback_learning_rate: float | None = None):
        self.game = game
        self.codebook = codebook if codebook is not None else codebook_for(game)
        if self.codebook.code_length >= game.horizon:
            raise ValueError("handshake code must be shorter than the horizon")
        self.fallback_learning_rate = fallback_learning_rate
        valid = {self.codebook.encode(t) for t in self.codebook.types}
        self._valid_digits = [
            {code[i] for code in valid} for i in range(self.codebook.code_length)
        ]

    def reset(self, theta, role, rng=None):
        super().reset(theta, role, rng)
        self.stage = 0
        self.history: list[tuple[int, int]] = []
        self.partner_digits: list[int] = []
        self.agreed_own: np.ndarray | None = None
        self.agreed_partner: np.ndarray | None = None
        self.fallback: MetaStrategy | None = None
        self.own_code = self.codebook.encode(theta)

    def act(self) -> np.ndarray:
        if self.fallback is not None:
            return self.fallback.act()
        if self.stage < self.codebook.code_length:
            return pure(self.own_code[self.stage], self.game.n_actions)
        return self.agreed_own

    def observe(self, joint_action):
        joint_action = tuple(joint_action)
        self.history.append(joint_action)
        if self.fallback is not None:
            self.stage += 1
            self.fallback.observe(joint_action)
            return
        a_p = self.partner_action(joint_action)
        if self.stage < self.codebook.code_length:
            deviated = a_p not in self._valid_digits[self.stage]
            self.partner_digits.append(a_p)
            self.stage += 1
            if deviated:
                self._deviate()
            elif self.stage == self.codebook.code_length:
                self._conclude_handshake()
        else:
            self.stage += 1
            if self.agreed_partner[a_p] <= 0.0:
                self._deviate()

    def _conclude_handshake(self):
        partner_type = self.codebook.decode(self.partner_digits)
        if partner_type is None:
            self._deviate()
            return
        self.partner_type = partner_type
        if self.role == 1:
            jt = JointType(self.theta, partner_type)
        else:
            jt = JointType(partner_type, self.theta)
        try:
            selected = select_pone(pone_set(jt, self.game))
        except NoPoneError:
            self._deviate()
            return
        if self.role == 1:
            self.agreed_own, self.agreed_partner = selected.s1, selected.s2
        else:
            self.agreed_own, self.agreed_partner = selected.s2, selected.s1

    def _deviate(self):
        self.on_deviation()

    def on_deviation(self):
        fallback = HedgeAgent(self.game, self.fallback_learning_rate)
        fallback.reset(self.theta, self.role)
        fallback.warm_start(self.history)
        self.fallback = fallback


class GrimTriggerAgent(HandshakeAgent):
    """Handshake cooperator that punishes any deviation for the rest of the
    horizon by playing the pure minimax action against the decoded partner
    type (or against all types if the deviation precedes decoding)."""

    name = "grim_trigger"

    def __init__(self, game: GameClass, codebook: HandshakeCodebook | None = None):
        super().__init__(game, codebook)

    def on_deviation(self):
        partner_type = getattr(self, "partner_type", None)
        if partner_type is not None:
            mats = [self.game.payoff_matrix(partner_type)]
        else:
            mats = [self.game.payoff_matrix(t) for t in self.game.type_space]
        # Partner payoff G(theta_p)[a_p, a_own]: our action indexes columns.
        ceilings = np.max(np.stack([m.max(axis=0) for m in mats]), axis=0)
        action = int(np.argmin(ceilings))
        self.fallback = ConstantAgent(action, self.game)
        self.fallback.reset(self.theta, self.role)


def handshake_si_agent(codebook: HandshakeCodebook, game: GameClass,
                       fallback_learning_rate: float | None = None) -> HandshakeAgent:
    return HandshakeAgent(game, codebook, fallback_learning_rate)


def grim_trigger_agent(codebook: HandshakeCodebook, game: GameClass) -> GrimTriggerAgent:
    return GrimTriggerAgent(game, codebook)


# ---------------------------------------------------------------------------
# CCE-tracking recommendation followers


class CCETrackingAgent(MetaStrategy):
    """Follows a shared i.i.d. recommendation stream drawn from a target joint
    distribution; a per-step regret watchdog switches permanently to regret
    matching if following the recommendations stops being a good idea."""

    name = "cce_tracking"

    def __init__(self, target: np.ndarray, game: GameClass,
                 watchdog_slack: float = 0.05, shared_seed: int = 0, c: float = 2.5):
        self.game = game
        self.target = np.asarray(target, dtype=float)
        self.watchdog_slack = watchdog_slack
        self.shared_seed = shared_seed
        self.c = c

    def reset(self, theta, role, rng=None):
        super().reset(theta, role, rng)
        n = self.game.n_actions
        # Stream keyed by (pair seed, episode): both seats regenerate the same
        # recommendations, and distinct episodes get fresh draws.
        episode = self.episode_key if self.episode_key is not None else 0
        stream_rng = np.random.default_rng(
            np.random.SeedSequence((self.shared_seed, episode))
        )
        flat = stream_rng.choice(n * n, size=self.game.horizon, p=self.target.ravel())
        self.recommendations = np.stack([flat // n, flat % n], axis=1)
        self.t = 0
        self.w = np.zeros(n)
        self.realized = 0.0
        self.defected: RegretMatchingAgent | None = None

    def act(self) -> np.ndarray:
        if self.defected is not None:
            return self.defected.act()
        rec = self.recommendations[self.t][self.role - 1]
        return pure(int(rec), self.game.n_actions)

    def observe(self, joint_action):
        if self.defected is not None:
            self.defected.observe(joint_action)
            return
        g = self.game.payoff_matrix(self.theta)
        a_p = self.partner_action(joint_action)
        self.w += g[:, a_p]
        self.realized += g[self.own_action(joint_action), a_p]
        self.t += 1
        per_step_regret = (self.w.max() - self.realized) / self.t
        if per_step_regret > self.watchdog_slack + self.c / math.sqrt(self.t):
            agent = RegretMatchingAgent(self.game)
            agent.reset(self.theta, self.role)
            agent.regrets = self.w - self.realized
            self.defected = agent


def cce_tracking_pair(
    target: np.ndarray,
    game: GameClass,
    watchdog_slack: float,
    shared_seed: int,
    type_dist: "TypeDistribution | None" = None,
) -> tuple[CCETrackingAgent, CCETrackingAgent]:
    """A coordinated pair of recommendation followers for a target CCE.

    If a type distribution is supplied, the target is verified to be a CCE for
    every joint type in its support.
    """
    if type_dist is not None:
        for jt, w in type_dist.items():
            if w <= 0:
                continue
            ok, violation = is_cce(target, jt, game, tol=1e-9)
            if not ok:
                raise InvalidPopulationError(
                    f"target is not a CCE for joint type {jt} (violation {violation:.3g})"
                )
    make = lambda: CCETrackingAgent(target, game, watchdog_slack, shared_seed)
    return make(), make()


# ---------------------------------------------------------------------------
# Populations and type distributions


@dataclass(frozen=True)
class Population:
    """Weighted set of meta-strategy constructors (the distribution rho)."""

    name: str
    members: tuple[tuple[str, Callable[[], MetaStrategy]], ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.members:
            raise InvalidPopulationError("population must be non-empty")
        w = np.array(self.weights, dtype=float)
        if len(w) != len(self.members) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise InvalidPopulationError("weights must be non-negative and sum to 1")

    @classmethod
    def of(cls, name: str, *members: tuple[str, Callable, float]) -> "Population":
        total = sum(m[2] for m in members)
        return cls(
            name=name,
            members=tuple((m[0], m[1]) for m in members),
            weights=tuple(m[2] / total for m in members),
        )

    def build(self, index: int) -> MetaStrategy:
        return self.members[index][1]()


@dataclass(frozen=True)
class TypeDistribution:
    """Distribution mu over the joint type space."""

    joint_types: tuple[JointType, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if len(w) != len(self.joint_types) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be non-negative and sum to 1")

    def items(self):
        return zip(self.joint_types, self.weights)

    def sample(self, rng: np.random.Generator) -> JointType:
        idx = rng.choice(len(self.joint_types), p=np.array(self.weights))
        return self.joint_types[idx]

    @classmethod
    def uniform(cls, game: GameClass) -> "TypeDistribution":
        jts = tuple(
            JointType(t1, t2) for t1 in game.type_space for t2 in game.type_space
        )
        return cls(jts, tuple([1.0 / len(jts)] * len(jts)))

    @classmethod
    def point_mass(cls, joint_type: JointType) -> "TypeDistribution":
        return cls((JointType(*joint_type),), (1.0,))


def sample_pairing(
    population: Population, type_dist: TypeDistribution, seed: int
) -> tuple[MetaStrategy, MetaStrategy, JointType]:
    """Independent seeded draws of two strategies from rho and a joint type from mu."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    weights = np.array(population.weights)
    i1, i2 = rng.choice(len(weights), size=2, p=weights)
    joint_type = type_dist.sample(rng)
    return population.build(int(i1)), population.build(int(i2)), joint_type
