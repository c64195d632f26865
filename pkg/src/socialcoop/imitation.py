"""Dataset generation, tabular history-conditioned imitation, and
total-variation distance between partial-history distributions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .agents import Population, TypeDistribution, sample_pairing
from .games import GameClass, History, JointType, uniform
from .play import EpisodeRecord, MetaStrategy, play_episode, replay_distribution

ENUMERATION_GUARD = 10**6


class EnumerationGuardError(ValueError):
    """History space too large for exact enumeration; use the MC estimator."""


@dataclass(frozen=True)
class Dataset:
    """K recorded self-play episodes plus generation metadata."""

    episodes: tuple[EpisodeRecord, ...]
    n_actions: int
    horizon: int
    n_types: int
    master_seed: int
    population: str

    @property
    def k(self) -> int:
        return len(self.episodes)

    def subsample(self, k: int) -> "Dataset":
        if k > self.k:
            raise ValueError(f"cannot subsample {k} episodes from {self.k}")
        return replace(self, episodes=self.episodes[:k])

    def save(self, path) -> None:
        with open(path, "w") as f:
            meta = {
                "n_actions": self.n_actions,
                "horizon": self.horizon,
                "n_types": self.n_types,
                "master_seed": self.master_seed,
                "population": self.population,
                "k": self.k,
            }
            f.write(json.dumps({"meta": meta}, sort_keys=True) + "\n")
            for ep in self.episodes:
                row = {
                    "theta1": int(ep.joint_type.theta1),
                    "theta2": int(ep.joint_type.theta2),
                    "actions": [[int(a1), int(a2)] for a1, a2 in ep.history],
                }
                f.write(json.dumps(row, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "Dataset":
        with open(path) as f:
            header = json.loads(f.readline())
            meta = header["meta"]
            episodes = []
            for line in f:
                row = json.loads(line)
                episodes.append(
                    EpisodeRecord(
                        joint_type=JointType(row["theta1"], row["theta2"]),
                        history=tuple((a1, a2) for a1, a2 in row["actions"]),
                        seed=0,
                    )
                )
        return cls(
            episodes=tuple(episodes),
            n_actions=meta["n_actions"],
            horizon=meta["horizon"],
            n_types=meta["n_types"],
            master_seed=meta["master_seed"],
            population=meta["population"],
        )


def generate_dataset(
    population: Population,
    type_dist: TypeDistribution,
    k: int,
    game: GameClass,
    master_seed: int,
) -> Dataset:
    """Play K independently seeded population pairings to the full horizon."""
    if k < 1:
        raise ValueError("K must be >= 1")
    children = np.random.SeedSequence(master_seed).spawn(k)
    episodes = []
    for child in children:
        pair_seed, play_seed = child.generate_state(2)
        s1, s2, jt = sample_pairing(population, type_dist, int(pair_seed))
        episodes.append(play_episode(s1, s2, jt, game, int(play_seed)))
    return Dataset(
        episodes=tuple(episodes),
        n_actions=game.n_actions,
        horizon=game.horizon,
        n_types=len(game.type_space),
        master_seed=master_seed,
        population=population.name,
    )


@dataclass
class EmpiricalPolicy:
    """Tabular next-action frequencies keyed by (own type, joint-action prefix).

    Absent keys fall back to the uniform distribution over actions.
    """

    n_actions: int
    imitation_horizon: int
    seat: int
    table: dict = field(default_factory=dict)

    def lookup(self, theta, prefix: History) -> np.ndarray:
        dist = self.table.get((theta, tuple(prefix)))
        if dist is None:
            return uniform(self.n_actions)
        return dist


def fit_imitation(dataset: Dataset, imitation_horizon: int, seat: int = 1) -> EmpiricalPolicy:
    """Empirical seat-action distribution per (type, prefix) seen in the dataset."""
    if not 1 <= imitation_horizon < dataset.horizon:
        raise ValueError("imitation horizon must satisfy 1 <= T~ < T")
    counts: dict[tuple, np.ndarray] = {}
    for ep in dataset.episodes:
        theta = ep.joint_type.theta1 if seat == 1 else ep.joint_type.theta2
        for t in range(imitation_horizon):
            key = (theta, ep.history[:t])
            action = ep.history[t][seat - 1]
            vec = counts.get(key)
            if vec is None:
                vec = counts[key] = np.zeros(dataset.n_actions)
            vec[action] += 1.0
    table = {key: vec / vec.sum() for key, vec in counts.items()}
    return EmpiricalPolicy(
        n_actions=dataset.n_actions,
        imitation_horizon=imitation_horizon,
        seat=seat,
        table=table,
    )


class ImitationAgent(MetaStrategy):
    """Meta-strategy wrapper around an empirical policy (uniform past its horizon)."""

    name = "imitation"

    def __init__(self, policy: EmpiricalPolicy):
        self.policy = policy

    def reset(self, theta, role, rng=None):
        super().reset(theta, role, rng)
        self.prefix: list[tuple[int, int]] = []

    def act(self) -> np.ndarray:
        return self.policy.lookup(self.theta, tuple(self.prefix))

    def observe(self, joint_action):
        self.prefix.append(tuple(joint_action))


#: Maps length-T~ histories to probabilities.
HistoryDistribution = dict


def _member_distribution(member_ctor, theta, role, history):
    return replay_distribution(member_ctor(), theta, role, history)


def rollout_distribution_exact(
    seat1_policy: EmpiricalPolicy | None,
    population: Population,
    type_dist: TypeDistribution,
    game: GameClass,
    partial_horizon: int,
) -> HistoryDistribution:
    """Exact distribution over length-T~ histories by forward enumeration.

    With ``seat1_policy`` None this is population self-play; otherwise seat 1
    follows the imitation policy while seat 2 is drawn from the population.
    Requires every population member's action distribution to be a pure
    function of (type, history), which all zoo agents satisfy.
    """
    n = game.n_actions
    if n ** (2 * partial_horizon) > ENUMERATION_GUARD:
        raise EnumerationGuardError(
            f"N^(2 T~) = {n ** (2 * partial_horizon)} exceeds {ENUMERATION_GUARD}"
        )
    dist: HistoryDistribution = {}

    member_indices = range(len(population.members))
    weights = population.weights

    def seat1_dist(i1, theta1, history):
        if seat1_policy is not None:
            return seat1_policy.lookup(theta1, history)
        return _member_distribution(population.members[i1][1], theta1, 1, history)

    def recurse(i1, i2, jt, history, prob):
        if prob <= 0.0:
            return
        if len(history) == partial_horizon:
            dist[history] = dist.get(history, 0.0) + prob
            return
        d1 = seat1_dist(i1, jt.theta1, history)
        d2 = _member_distribution(population.members[i2][1], jt.theta2, 2, history)
        for a1 in range(n):
            if d1[a1] <= 0.0:
                continue
            for a2 in range(n):
                if d2[a2] <= 0.0:
                    continue
                recurse(i1, i2, jt, history + ((a1, a2),), prob * d1[a1] * d2[a2])

    seat1_indices = [None] if seat1_policy is not None else list(member_indices)
    for jt, w_t in type_dist.items():
        if w_t <= 0:
            continue
        for i2 in member_indices:
            w2 = weights[i2]
            if w2 <= 0:
                continue
            for i1 in seat1_indices:
                w1 = 1.0 if i1 is None else weights[i1]
                if w1 <= 0:
                    continue
                recurse(i1, i2, jt, (), w_t * w1 * w2)
    return dist


def tv_distance(p: HistoryDistribution, q: HistoryDistribution) -> float:
    """Half L1 distance over the union support."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def _history_histogram(make_seat1, population, type_dist, game, partial_horizon, n_samples, seed):
    truncated = game.with_horizon(partial_horizon)
    children = np.random.SeedSequence(seed).spawn(n_samples)
    hist: HistoryDistribution = {}
    for child in children:
        pair_seed, play_seed = child.generate_state(2)
        s1, s2, jt = sample_pairing(population, type_dist, int(pair_seed))
        if make_seat1 is not None:
            s1 = make_seat1()
        rec = play_episode(s1, s2, jt, truncated, int(play_seed))
        hist[rec.history] = hist.get(rec.history, 0.0) + 1.0 / n_samples
    return hist


def tv_distance_mc(
    policy: EmpiricalPolicy | None,
    population: Population,
    type_dist: TypeDistribution,
    game: GameClass,
    partial_horizon: int,
    n_samples: int,
    seed: int,
) -> tuple[float, str]:
    """Plug-in TV estimate between imitation and self-play history histograms.

    Biased upward for finite samples; the returned note flags this.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    s1, s2 = np.random.SeedSequence(seed).spawn(2)
    make_seat1 = None if policy is None else (lambda: ImitationAgent(policy))
    p_hat = _history_histogram(
        make_seat1, population, type_dist, game, partial_horizon, n_samples,
        int(s1.generate_state(1)[0]),
    )
    p_pop = _history_histogram(
        None, population, type_dist, game, partial_horizon, n_samples,
        int(s2.generate_state(1)[0]),
    )
    return tv_distance(p_hat, p_pop), "plug-in-biased-upward"


def lemma1_bound(n_actions: int, partial_horizon: int, n_types: int, k: int) -> float:
    """Analytic imitation-error bound: min of T~ and the sample-complexity term.

    Uses the natural logarithm. The second branch is
    N^(2(T~+1)) * |types| * T~^2 * log(K) / K.
    """
    if k < 2:
        raise ValueError("K must be >= 2")
    term = (
        n_actions ** (2 * (partial_horizon + 1))
        * n_types
        * partial_horizon**2
        * math.log(k)
        / k
    )
    return min(float(partial_horizon), term)
