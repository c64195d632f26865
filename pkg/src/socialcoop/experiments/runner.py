"""Experiment execution: imitate-then-commit evaluation sweeps, certification,
ablations, and bound tables, all deterministic under the config master seed.
"""

from __future__ import annotations

import concurrent.futures

import numpy as np

from ..agents import TypeDistribution, cce_tracking_pair, sample_pairing
from ..equilibrium import enumerate_nash
from ..games import JointType
from ..imitate_commit import ICConfig, ImitateThenCommitAgent, theorem1_bound
from ..imitation import (
    Dataset,
    EnumerationGuardError,
    ImitationAgent,
    fit_imitation,
    generate_dataset,
    lemma1_bound,
    rollout_distribution_exact,
    tv_distance,
    tv_distance_mc,
)
from ..metrics import altruistic_regret, certify_si_class, external_regret
from ..play import episode_payoffs, play_episode
from .config import (
    ConfigError,
    ExperimentConfig,
    build_game,
    build_population,
    build_type_distribution,
)

RESULT_COLUMNS = [
    "experiment_id",
    "k",
    "t_tilde",
    "seed",
    "eval_episodes",
    "ai_seat",
    "alt_regret_per_step_mean",
    "alt_regret_per_step_pos_mean",
    "alt_regret_per_step_q10",
    "alt_regret_per_step_q50",
    "alt_regret_per_step_q90",
    "ext_regret_per_step_mean",
    "partner_payoff_per_step_mean",
    "tv",
    "tv_method",
    "lemma1_bound",
    "theorem1_bound",
    "bound_delta",
    "bound_epsilon",
    "config_hash",
    "master_seed",
]


def fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as f:
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(fmt(row[c]) for c in columns) + "\n")


def _cell_seed_sequence(master_seed, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))


def _dataset_for_cell(config, game, population, type_dist, k, dataset):
    if dataset is not None:
        if (
            dataset.n_actions != game.n_actions
            or dataset.horizon != game.horizon
            or dataset.n_types != len(game.type_space)
        ):
            raise ConfigError(
                "dataset header does not match the configured game "
                f"(N={dataset.n_actions}, T={dataset.horizon}, |types|={dataset.n_types})"
            )
        if k > dataset.k:
            raise ConfigError(f"K={k} exceeds the {dataset.k} episodes in the dataset")
        return dataset.subsample(k)
    seed = int(_cell_seed_sequence(config.master_seed, 0, k).generate_state(1)[0])
    return generate_dataset(population, type_dist, k, game, seed)


def _measure_tv(policy, population, type_dist, game, t_tilde, mc_samples, seed):
    try:
        p_hat = rollout_distribution_exact(policy, population, type_dist, game, t_tilde)
        p_pop = rollout_distribution_exact(None, population, type_dist, game, t_tilde)
        return tv_distance(p_hat, p_pop), "exact"
    except EnumerationGuardError:
        tv, note = tv_distance_mc(
            policy, population, type_dist, game, t_tilde, mc_samples, seed
        )
        return tv, note


def evaluate_ic_cell(
    config: ExperimentConfig,
    k: int,
    t_tilde: int,
    seed: int,
    dataset: Dataset | None = None,
    bound_delta: float | None = None,
    bound_epsilon: float | None = None,
) -> dict:
    """One (K, T~, seed) result row: fit imitation, play the imitate-then-commit
    agent against fresh population pairings, and measure regrets and TV."""
    game = build_game(config.require("game"))
    population = build_population(config.require("population"), game)
    type_dist = build_type_distribution(config.get("type_distribution"), game)
    ai_seat = int(config.get("ai_seat", 1))
    eval_episodes = int(config.get("eval_episodes", 500))
    mc_samples = int(config.get("tv", {}).get("n_samples", 2000))
    delta = float(bound_delta if bound_delta is not None else config.get("requested_delta", 0.05))
    epsilon = float(
        bound_epsilon if bound_epsilon is not None else config.get("requested_epsilon", 0.1)
    )

    cell = _dataset_for_cell(config, game, population, type_dist, k, dataset)
    policy = fit_imitation(cell, t_tilde, seat=ai_seat)
    ic_config = ICConfig(imitation_horizon=t_tilde, total_horizon=game.horizon, seat=ai_seat)
    agent = ImitateThenCommitAgent(policy, ic_config)

    partner_seat = 3 - ai_seat
    eval_root = _cell_seed_sequence(config.master_seed, 1, k, t_tilde, seed)
    children = eval_root.spawn(eval_episodes)
    alt = np.empty(eval_episodes)
    ext = np.empty(eval_episodes)
    partner_payoff = np.empty(eval_episodes)
    for j, child in enumerate(children):
        pair_seed, play_seed = (int(s) for s in child.generate_state(2))
        s1, s2, jt = sample_pairing(population, type_dist, pair_seed)
        if ai_seat == 1:
            s1 = agent
        else:
            s2 = agent
        rec = play_episode(s1, s2, jt, game, play_seed)
        alt[j] = altruistic_regret(rec.history, partner_seat, jt, game).per_step
        ai_theta = jt.theta1 if ai_seat == 1 else jt.theta2
        ext[j] = external_regret(rec.history, ai_theta, ai_seat, game).per_step
        partner_payoff[j] = episode_payoffs(rec, game)[partner_seat - 1] / game.horizon

    tv_seed = int(_cell_seed_sequence(config.master_seed, 2, k, t_tilde, seed).generate_state(1)[0])
    tv, tv_method = _measure_tv(policy, population, type_dist, game, t_tilde, mc_samples, tv_seed)

    return {
        "experiment_id": config.experiment_id,
        "k": k,
        "t_tilde": t_tilde,
        "seed": seed,
        "eval_episodes": eval_episodes,
        "ai_seat": ai_seat,
        "alt_regret_per_step_mean": float(alt.mean()),
        "alt_regret_per_step_pos_mean": float(np.clip(alt, 0.0, None).mean()),
        "alt_regret_per_step_q10": float(np.quantile(alt, 0.10)),
        "alt_regret_per_step_q50": float(np.quantile(alt, 0.50)),
        "alt_regret_per_step_q90": float(np.quantile(alt, 0.90)),
        "ext_regret_per_step_mean": float(ext.mean()),
        "partner_payoff_per_step_mean": float(partner_payoff.mean()),
        "tv": float(tv),
        "tv_method": tv_method,
        "lemma1_bound": lemma1_bound(game.n_actions, t_tilde, len(game.type_space), max(k, 2)),
        "theorem1_bound": theorem1_bound(
            delta, epsilon, max(k, 2), game.n_actions, t_tilde, game.horizon,
            len(game.type_space),
        ),
        "bound_delta": delta,
        "bound_epsilon": epsilon,
        "config_hash": config.hash,
        "master_seed": config.master_seed,
    }


def _cell_worker(raw_config, k, t_tilde, seed, dataset_path, bound_delta, bound_epsilon):
    config = ExperimentConfig.from_dict(raw_config)
    dataset = Dataset.load(dataset_path) if dataset_path else None
    return evaluate_ic_cell(config, k, t_tilde, seed, dataset, bound_delta, bound_epsilon)


def run_ic(
    config: ExperimentConfig,
    dataset_path=None,
    bound_delta: float | None = None,
    bound_epsilon: float | None = None,
    threads: int = 1,
) -> list[dict]:
    """Evaluate the (K, T~, seed) sweep; rows are ordered by cell index
    regardless of execution order."""
    k_list = [int(k) for k in config.get("k_list", [1000])]
    t_tilde_list = [int(t) for t in config.get("t_tilde_list", [3])]
    seeds = [int(s) for s in config.get("seeds", [0])]
    cells = [
        (k, t_tilde, seed) for k in k_list for t_tilde in t_tilde_list for seed in seeds
    ]
    if threads <= 1:
        dataset = Dataset.load(dataset_path) if dataset_path else None
        return [
            evaluate_ic_cell(config, k, t, s, dataset, bound_delta, bound_epsilon)
            for k, t, s in cells
        ]
    with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(
                _cell_worker, config.raw, k, t, s, dataset_path, bound_delta, bound_epsilon
            )
            for k, t, s in cells
        ]
        return [f.result() for f in futures]


def certify(config: ExperimentConfig):
    game = build_game(config.require("game"))
    population = build_population(config.require("population"), game)
    type_dist = build_type_distribution(config.get("type_distribution"), game)
    cert = config.get("certification", {})
    report = certify_si_class(
        population,
        requested_delta=float(config.get("requested_delta", 0.05)),
        requested_epsilon=float(config.get("requested_epsilon", 0.15)),
        consistency_horizon=int(cert.get("consistency_horizon", game.horizon)),
        compatibility_horizon=int(cert.get("compatibility_horizon", game.horizon)),
        game=game,
        type_dist=type_dist,
        trials=int(cert.get("trials", 100)),
        seed=int(_cell_seed_sequence(config.master_seed, 3).generate_state(1)[0]),
    )
    return report


def make_dataset(config: ExperimentConfig, k: int | None = None) -> Dataset:
    game = build_game(config.require("game"))
    population = build_population(config.require("population"), game)
    type_dist = build_type_distribution(config.get("type_distribution"), game)
    if k is None:
        k = max(int(x) for x in config.get("k_list", [1000]))
    seed = int(_cell_seed_sequence(config.master_seed, 0, k).generate_state(1)[0])
    return generate_dataset(population, type_dist, k, game, seed)


ABLATION_A_COLUMNS = [
    "experiment_id", "k", "t_tilde", "eval_episodes",
    "ic_partner_payoff_per_step_mean", "selfplay_partner_payoff_per_step_mean",
    "payoff_gap", "config_hash", "master_seed",
]


def ablation_grim_trigger(config: ExperimentConfig) -> list[dict]:
    """Small-K imitate-then-commit against a punishing population: reports the
    partner's per-step payoff against the population's own self-play value."""
    game = build_game(config.require("game"))
    population = build_population(config.require("population"), game)
    type_dist = build_type_distribution(config.get("type_distribution"), game)
    spec = config.get("ablation", {})
    k = int(spec.get("k", 10))
    t_tilde = int(spec.get("t_tilde", 1))
    eval_episodes = int(spec.get("eval_episodes", 500))
    ai_seat = int(config.get("ai_seat", 1))
    partner_seat = 3 - ai_seat

    ds_seed = int(_cell_seed_sequence(config.master_seed, 4).generate_state(1)[0])
    dataset = generate_dataset(population, type_dist, k, game, ds_seed)
    policy = fit_imitation(dataset, t_tilde, seat=ai_seat)
    agent = ImitateThenCommitAgent(
        policy, ICConfig(imitation_horizon=t_tilde, total_horizon=game.horizon, seat=ai_seat)
    )

    root = _cell_seed_sequence(config.master_seed, 5)
    ic_payoffs = np.empty(eval_episodes)
    sp_payoffs = np.empty(eval_episodes)
    for j, child in enumerate(root.spawn(eval_episodes)):
        pair_seed, play_seed, sp_seed = (int(s) for s in child.generate_state(3))
        s1, s2, jt = sample_pairing(population, type_dist, pair_seed)
        sp = play_episode(s1, s2, jt, game, sp_seed)
        sp_payoffs[j] = episode_payoffs(sp, game)[partner_seat - 1] / game.horizon
        s1, s2, jt = sample_pairing(population, type_dist, pair_seed)
        if ai_seat == 1:
            s1 = agent
        else:
            s2 = agent
        rec = play_episode(s1, s2, jt, game, play_seed)
        ic_payoffs[j] = episode_payoffs(rec, game)[partner_seat - 1] / game.horizon
    return [{
        "experiment_id": config.experiment_id,
        "k": k,
        "t_tilde": t_tilde,
        "eval_episodes": eval_episodes,
        "ic_partner_payoff_per_step_mean": float(ic_payoffs.mean()),
        "selfplay_partner_payoff_per_step_mean": float(sp_payoffs.mean()),
        "payoff_gap": float(sp_payoffs.mean() - ic_payoffs.mean()),
        "config_hash": config.hash,
        "master_seed": config.master_seed,
    }]


ABLATION_B_COLUMNS = [
    "experiment_id", "measure", "joint_type", "seed", "horizon", "n_samples",
    "tv", "config_hash", "master_seed",
]


def ablation_inefficient_cce(config: ExperimentConfig) -> list[dict]:
    """Recommendation-following pair targeting an inefficient mixed product CCE:
    (i) self-play converges to the target; (ii) histories carry no type signal."""
    game = build_game(config.require("game"))
    type_dist = build_type_distribution(config.get("type_distribution"), game)
    spec = config.get("ablation", {})
    target_jt = JointType(*spec.get("target_joint_type", (0, 1)))
    horizon = int(spec.get("selfplay_horizon", 100000))
    n_seeds = int(spec.get("n_seeds", 5))
    t_tilde = int(spec.get("t_tilde", 2))
    mc_samples = int(spec.get("mc_samples", 10000))
    slack = float(spec.get("watchdog_slack", 0.05))

    mixed = [
        e for e in enumerate_nash(target_jt, game)
        if max(max(e.strategy1), max(e.strategy2)) < 1.0 - 1e-9
    ]
    if not mixed:
        raise ConfigError(f"no fully-mixed Nash equilibrium for joint type {tuple(target_jt)}")
    target = np.outer(mixed[0].s1, mixed[0].s2)

    rows = []
    long_game = game.with_horizon(horizon)
    root = _cell_seed_sequence(config.master_seed, 6)
    for i, child in enumerate(root.spawn(n_seeds)):
        shared_seed, play_seed = (int(s) for s in child.generate_state(2))
        # The target is a CCE of the target joint type only; the pair's
        # CCE precondition is checked against that type alone.
        a1, a2 = cce_tracking_pair(
            target, long_game, slack, shared_seed, TypeDistribution.point_mass(target_jt)
        )
        rec = play_episode(a1, a2, target_jt, long_game, play_seed)
        h = np.asarray(rec.history)
        empirical = np.zeros_like(target)
        np.add.at(empirical, (h[:, 0], h[:, 1]), 1.0 / horizon)
        tv = 0.5 * float(np.abs(empirical - target).sum())
        rows.append({
            "experiment_id": config.experiment_id,
            "measure": "selfplay_tv_to_target",
            "joint_type": f"{target_jt.theta1}|{target_jt.theta2}",
            "seed": i,
            "horizon": horizon,
            "n_samples": 1,
            "tv": tv,
            "config_hash": config.hash,
            "master_seed": config.master_seed,
        })

    # Type-signal check: TV between length-T~ history distributions under
    # different joint types, estimated from MC rollouts.
    short_game = game.with_horizon(max(t_tilde + 1, 2))
    mc_root = _cell_seed_sequence(config.master_seed, 7)
    shared_seed = int(mc_root.generate_state(1)[0])
    slack_pair = lambda: cce_tracking_pair(target, short_game, slack, shared_seed)
    histograms = {}
    joint_types = [jt for jt, w in type_dist.items() if w > 0]
    # Common random numbers: the same episode seeds across joint types, so any
    # histogram difference is type-driven rather than sampling noise.
    children = mc_root.spawn(mc_samples)
    for jt in joint_types:
        hist = {}
        for child in children:
            a1, a2 = slack_pair()
            rec = play_episode(a1, a2, jt, short_game, int(child.generate_state(1)[0]))
            key = rec.history[:t_tilde]
            hist[key] = hist.get(key, 0.0) + 1.0 / mc_samples
        histograms[jt] = hist
    for i, jt_a in enumerate(joint_types):
        for jt_b in joint_types[i + 1:]:
            tv = tv_distance(histograms[jt_a], histograms[jt_b])
            rows.append({
                "experiment_id": config.experiment_id,
                "measure": "type_signal_tv",
                "joint_type": f"{jt_a.theta1}|{jt_a.theta2}-vs-{jt_b.theta1}|{jt_b.theta2}",
                "seed": 0,
                "horizon": t_tilde,
                "n_samples": mc_samples,
                "tv": tv,
                "config_hash": config.hash,
                "master_seed": config.master_seed,
            })
    return rows


BOUNDS_COLUMNS = [
    "k", "n_actions", "t_tilde", "horizon", "n_types", "delta", "epsilon",
    "lemma1_bound", "lemma1_bound_capped", "theorem1_bound",
]


def bounds_table(n_actions, t_tilde, horizon, n_types, k_list, delta, epsilon) -> list[dict]:
    rows = []
    for k in k_list:
        l1 = lemma1_bound(n_actions, t_tilde, n_types, k)
        rows.append({
            "k": k,
            "n_actions": n_actions,
            "t_tilde": t_tilde,
            "horizon": horizon,
            "n_types": n_types,
            "delta": delta,
            "epsilon": epsilon,
            "lemma1_bound": l1,
            "lemma1_bound_capped": min(l1, 1.0),
            "theorem1_bound": theorem1_bound(
                delta, epsilon, k, n_actions, t_tilde, horizon, n_types
            ),
        })
    return rows
