"""Hot simulation kernels for learner-vs-adversary certification batches.

Two interchangeable backends compute per-trial external regret totals for a
no-regret learner playing many long episodes against a coded adversary:

* ``numba`` -- per-trial @njit loops (default when numba imports cleanly)
* ``numpy`` -- trial-vectorized pure numpy

Selection: set ``SOCIALCOOP_BACKEND`` to ``numba`` or ``numpy``. Both
backends consume identical pre-generated uniform streams and use the same
CDF sampling rule, so they produce identical action sequences.

Learner kinds: ``hedge``, ``regret_matching``. Adversary codes: a
non-negative integer plays that constant action, ``-1`` plays uniformly at
random, ``-2`` plays the action minimizing the learner's payoff against the
learner's empirical action counts (uniform prior).
"""

from __future__ import annotations

import os

import numpy as np

from . import numpy_backend

KIND_HEDGE = 0
KIND_REGRET_MATCHING = 1

_KINDS = {"hedge": KIND_HEDGE, "regret_matching": KIND_REGRET_MATCHING}


def available_backends() -> dict:
    backends = {"numpy": numpy_backend.simulate_batch}
    try:
        from . import numba_backend
        backends["numba"] = numba_backend.simulate_batch
    except ImportError:
        pass
    return backends


def active_backend_name() -> str:
    backends = available_backends()
    requested = os.environ.get("SOCIALCOOP_BACKEND", "").strip().lower()
    if requested:
        if requested not in backends:
            raise ValueError(
                f"SOCIALCOOP_BACKEND={requested!r} unavailable; have {sorted(backends)}"
            )
        return requested
    return "numba" if "numba" in backends else "numpy"


def learner_regret_batch(
    kind: str,
    payoff_matrix: np.ndarray,
    eta: float,
    adversary_code: int,
    horizon: int,
    n_trials: int,
    seed: int,
    backend: str | None = None,
) -> np.ndarray:
    """Total external regret of each of ``n_trials`` seeded episodes."""
    simulate = available_backends()[backend or active_backend_name()]
    g = np.ascontiguousarray(payoff_matrix, dtype=np.float64)
    n = g.shape[0]
    if not -2 <= adversary_code < n:
        raise ValueError(f"unknown adversary code {adversary_code}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    u_learner = rng.random((n_trials, horizon))
    u_adversary = rng.random((n_trials, horizon))
    return simulate(_KINDS[kind], g, float(eta), int(adversary_code), u_learner, u_adversary)
