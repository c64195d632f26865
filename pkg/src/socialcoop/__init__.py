"""Simulation lab for repeated two-player matrix games with private types."""

from .games import (
    GameClass,
    GameError,
    JointType,
    ProtocolViolation,
    make_coordpref_game,
    payoff,
    pure,
    two_matrix_game,
    uniform,
)
from .play import EpisodeRecord, MetaStrategy, expected_total_payoff, play_episode
from .equilibrium import (
    EquilibriumProfile,
    best_response,
    enumerate_nash,
    is_cce,
    pareto_optimal_nash,
    pone_set,
    worst_pone_for,
)
from .agents import (
    HandshakeCodebook,
    Population,
    TypeDistribution,
    cce_tracking_pair,
    grim_trigger_agent,
    handshake_si_agent,
    hedge_agent,
    regret_matching_agent,
    sample_pairing,
)
from .imitation import (
    Dataset,
    EmpiricalPolicy,
    fit_imitation,
    generate_dataset,
    lemma1_bound,
    rollout_distribution_exact,
    tv_distance,
    tv_distance_mc,
)
from .imitate_commit import (
    ICConfig,
    ImitateThenCommitAgent,
    commit_mixture,
    empirical_joint_strategy,
    theorem1_bound,
)
from .metrics import (
    altruistic_regret,
    certify_compatibility,
    certify_consistency,
    certify_si_class,
    external_regret,
)

__version__ = "0.1.0"
