"""Regret measurement and statistical certification of consistency,
compatibility, and social intelligence.

Certification is necessary-condition testing: the definitions quantify over
all partner strategies, which is untestable, so consistency is checked against
a fixed adversary suite and failure rates are aggregated worst-case over
(type, adversary) cells with two-sided 95% binomial confidence intervals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import stats

from .agents import (
    ConstantAgent,
    HedgeAgent,
    Population,
    RegretMatchingAgent,
    TypeDistribution,
    UniformAgent,
    WorstCaseFlipAgent,
)
from .equilibrium import NoPoneError, pone_set, worst_pone_for
from .games import GameClass, History, JointType
from .play import play_episode
from ._kernels import learner_regret_batch

CONFIDENCE = 0.95


@dataclass(frozen=True)
class RegretReport:
    total: float
    per_step: float
    horizon: int
    seat: int


def external_regret(history: History, theta, seat: int, game: GameClass) -> RegretReport:
    """Best-fixed-action counterfactual payoff minus realized payoff."""
    if not history:
        raise ValueError("history must be non-empty")
    g = game.payoff_matrix(theta)
    h = np.asarray(history, dtype=int)
    own = h[:, seat - 1]
    partner = h[:, 2 - seat]
    counterfactual = g[:, partner].sum(axis=1)
    realized = g[own, partner].sum()
    total = float(counterfactual.max() - realized)
    return RegretReport(total=total, per_step=total / len(history), horizon=len(history), seat=seat)


def altruistic_regret(
    history: History, partner_seat: int, joint_type: JointType, game: GameClass
) -> RegretReport:
    """Partner's payoff shortfall against their worst Pareto-optimal equilibrium.

    The baseline per-step value is the partner's payoff in the PONE that pays
    the partner the least; the total may be negative when realized play pays
    the partner more than that baseline.
    """
    if not history:
        raise ValueError("history must be non-empty")
    joint_type = game.check_joint_type(joint_type)
    pones = pone_set(joint_type, game)
    baseline_profile = worst_pone_for(partner_seat, pones)
    baseline = baseline_profile.payoff1 if partner_seat == 1 else baseline_profile.payoff2
    partner_type = joint_type.theta1 if partner_seat == 1 else joint_type.theta2
    g = game.payoff_matrix(partner_type)
    h = np.asarray(history, dtype=int)
    partner_actions = h[:, partner_seat - 1]
    other_actions = h[:, 2 - partner_seat]
    realized = float(g[partner_actions, other_actions].sum())
    total = baseline * len(history) - realized
    return RegretReport(
        total=total, per_step=total / len(history), horizon=len(history),
        seat=3 - partner_seat,
    )


@dataclass
class CertificationReport:
    property: str
    epsilon_requested: float
    delta_requested: float
    epsilon_measured: float
    delta_measured: float
    delta_upper_bound: float
    trials: int
    confidence: float
    passed: bool
    cells: dict = field(default_factory=dict)
    binding_cell: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def _binomial_upper(failures: int, n: int) -> float:
    """Upper end of the two-sided 95% Clopper-Pearson interval."""
    if failures >= n:
        return 1.0
    return float(stats.beta.ppf(0.5 + CONFIDENCE / 2, failures + 1, n - failures))


def _assemble(property_name, requested_delta, requested_epsilon, cells, trials):
    worst = max(cells, key=lambda name: (_binomial_upper(cells[name]["failures"], cells[name]["trials"]),
                                         cells[name]["epsilon_measured"]))
    delta_measured = max(c["failures"] / c["trials"] for c in cells.values())
    delta_upper = max(_binomial_upper(c["failures"], c["trials"]) for c in cells.values())
    epsilon_measured = max(c["epsilon_measured"] for c in cells.values())
    return CertificationReport(
        property=property_name,
        epsilon_requested=requested_epsilon,
        delta_requested=requested_delta,
        epsilon_measured=epsilon_measured,
        delta_measured=delta_measured,
        delta_upper_bound=delta_upper,
        trials=trials,
        confidence=CONFIDENCE,
        passed=delta_upper <= requested_delta,
        cells=cells,
        binding_cell=worst,
    )


def default_adversary_suite(game: GameClass):
    """The 4-member stress suite: both constants, uniform, and a worst-case
    flip adversary that minimizes the learner's payoff against the learner's
    empirical play. Factories receive (game, learner_theta)."""
    suite = []
    for a in range(game.n_actions):
        factory = lambda g, theta, a=a: ConstantAgent(a, g)
        factory.kernel_code = a
        factory.adversary_name = f"constant-{a}"
        suite.append(factory)
    uni = lambda g, theta: UniformAgent(g)
    uni.kernel_code = -1
    uni.adversary_name = "uniform"
    suite.append(uni)
    flip = lambda g, theta: WorstCaseFlipAgent(g, g.payoff_matrix(theta))
    flip.kernel_code = -2
    flip.adversary_name = "flip"
    suite.append(flip)
    return suite


def _quantile(values: np.ndarray, level: float) -> float:
    return float(np.quantile(values, min(max(level, 0.0), 1.0)))


def _kernel_spec(agent, adversary_factory):
    """(kind, eta) when the batch kernel can simulate this cell, else None."""
    if not hasattr(adversary_factory, "kernel_code"):
        return None
    if type(agent) is HedgeAgent:
        return "hedge", agent.eta
    if type(agent) is RegretMatchingAgent:
        return "regret_matching", 0.0
    return None


def _consistency_cell(agent_ctor, game, theta, adversary_factory, trials, seed, horizon):
    """Per-step external regrets for one (type, adversary) cell."""
    run_game = game if horizon == game.horizon else game.with_horizon(horizon)
    kernel = _kernel_spec(agent_ctor(run_game), adversary_factory)
    if kernel is not None:
        kind, eta = kernel
        regrets = learner_regret_batch(
            kind, game.payoff_matrix(theta), eta, adversary_factory.kernel_code,
            horizon, trials, seed,
        )
        return np.asarray(regrets) / horizon
    children = np.random.SeedSequence(seed).spawn(trials)
    per_step = np.empty(trials)
    for j, child in enumerate(children):
        agent = agent_ctor(run_game)
        adversary = adversary_factory(run_game, theta)
        rec = play_episode(agent, adversary, JointType(theta, theta), run_game,
                           int(child.generate_state(1)[0]))
        per_step[j] = external_regret(rec.history, theta, 1, run_game).per_step
    return per_step


def certify_consistency(
    agent_ctor,
    requested_delta: float,
    requested_epsilon: float,
    game: GameClass,
    adversary_suite=None,
    trials: int = 100,
    seed: int = 0,
    horizon: int | None = None,
) -> CertificationReport:
    """Empirical no-regret certification over a (type x adversary) grid.

    ``agent_ctor`` takes the game and returns a fresh agent for seat 1. The
    adversary occupies seat 2; its type equals the learner's (the learner's
    payoffs do not depend on the adversary's type).
    """
    if trials < 30:
        raise ValueError("need at least 30 trials per cell")
    if adversary_suite is None:
        adversary_suite = default_adversary_suite(game)
    if not adversary_suite:
        raise ValueError("adversary suite must be non-empty")
    horizon = horizon if horizon is not None else game.horizon
    cells = {}
    root = np.random.SeedSequence(seed)
    for theta in game.type_space:
        for i, factory in enumerate(adversary_suite):
            cell_seed = int(root.spawn(1)[0].generate_state(1)[0])
            per_step = _consistency_cell(
                agent_ctor, game, theta, factory, trials, cell_seed, horizon
            )
            failures = int(np.sum(per_step > requested_epsilon))
            name = f"type={theta}/adversary={getattr(factory, 'adversary_name', i)}"
            cells[name] = {
                "trials": trials,
                "failures": failures,
                "epsilon_measured": _quantile(per_step, 1.0 - requested_delta),
                "per_step_mean": float(per_step.mean()),
            }
    return _assemble("consistency", requested_delta, requested_epsilon, cells, trials)


def certify_compatibility(
    agent_ctor_a,
    agent_ctor_b,
    requested_delta: float,
    requested_epsilon: float,
    horizon: int,
    type_dist: TypeDistribution,
    game: GameClass,
    trials: int = 100,
    seed: int = 0,
) -> CertificationReport:
    """Pairwise cooperation certification against the Pareto-optimal Nash set.

    A trial succeeds if a single PONE exists whose per-step expected payoffs
    both seats approach within epsilon simultaneously.
    """
    if trials < 30:
        raise ValueError("need at least 30 trials per cell")
    run_game = game if horizon == game.horizon else game.with_horizon(horizon)
    cells = {}
    root = np.random.SeedSequence(seed)
    for jt, weight in type_dist.items():
        if weight <= 0:
            continue
        pones = pone_set(jt, game)
        if not pones:
            raise NoPoneError(f"no Pareto-optimal Nash equilibrium for {jt}")
        targets = [(e.payoff1, e.payoff2) for e in pones]
        children = root.spawn(trials)
        gaps = np.empty(trials)
        for j, child in enumerate(children):
            rec = play_episode(
                agent_ctor_a(run_game), agent_ctor_b(run_game), jt, run_game,
                int(child.generate_state(1)[0]),
            )
            g1 = run_game.payoff_matrix(jt.theta1)
            g2 = run_game.payoff_matrix(jt.theta2)
            h = np.asarray(rec.history, dtype=int)
            avg1 = float(g1[h[:, 0], h[:, 1]].mean())
            avg2 = float(g2[h[:, 1], h[:, 0]].mean())
            gaps[j] = min(max(v1 - avg1, v2 - avg2) for v1, v2 in targets)
        failures = int(np.sum(gaps > requested_epsilon))
        cells[f"joint_type={tuple(jt)}"] = {
            "trials": trials,
            "failures": failures,
            "epsilon_measured": _quantile(gaps, 1.0 - requested_delta),
            "per_step_mean": float(gaps.mean()),
        }
    return _assemble("compatibility", requested_delta, requested_epsilon, cells, trials)


def certify_si_class(
    population: Population,
    requested_delta: float,
    requested_epsilon: float,
    consistency_horizon: int,
    compatibility_horizon: int,
    game: GameClass,
    type_dist: TypeDistribution,
    adversary_suite=None,
    trials: int = 100,
    seed: int = 0,
) -> CertificationReport:
    """Certify a population: every member consistent at the long horizon,
    every ordered pair compatible at the short horizon."""
    if adversary_suite is None:
        adversary_suite = default_adversary_suite(game)
    if not adversary_suite:
        raise ValueError("adversary suite must be non-empty")
    root = np.random.SeedSequence(seed)
    cells = {}
    sub_reports = []
    for name, ctor in population.members:
        rep = certify_consistency(
            lambda g, ctor=ctor: ctor(), requested_delta, requested_epsilon, game,
            adversary_suite, trials, int(root.spawn(1)[0].generate_state(1)[0]),
            horizon=consistency_horizon,
        )
        sub_reports.append(rep)
        for cell_name, cell in rep.cells.items():
            cells[f"consistency/{name}/{cell_name}"] = cell
    for name_a, ctor_a in population.members:
        for name_b, ctor_b in population.members:
            rep = certify_compatibility(
                lambda g, ctor=ctor_a: ctor(), lambda g, ctor=ctor_b: ctor(),
                requested_delta, requested_epsilon, compatibility_horizon,
                type_dist, game, trials,
                int(root.spawn(1)[0].generate_state(1)[0]),
            )
            sub_reports.append(rep)
            for cell_name, cell in rep.cells.items():
                cells[f"compatibility/{name_a}+{name_b}/{cell_name}"] = cell
    return _assemble("si_class", requested_delta, requested_epsilon, cells, trials)
