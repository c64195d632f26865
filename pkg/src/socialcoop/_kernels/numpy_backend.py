"""Trial-vectorized pure-numpy certification kernel."""

from __future__ import annotations

import numpy as np


def simulate_batch(kind, g, eta, adversary_code, u_learner, u_adversary):
    n_trials, horizon = u_learner.shape
    n = g.shape[0]
    w = np.zeros((n_trials, n))          # cumulative counterfactual payoffs
    realized = np.zeros(n_trials)
    counts = np.ones((n_trials, n))      # learner action counts, uniform prior
    rows = np.arange(n_trials)
    uniform_dist = np.full(n, 1.0 / n)
    for t in range(horizon):
        if kind == 0:  # hedge
            e = np.exp(eta * (w - w.max(axis=1, keepdims=True)))
            probs = e / e.sum(axis=1, keepdims=True)
        else:  # regret matching
            pos = np.clip(w - realized[:, None], 0.0, None)
            totals = pos.sum(axis=1, keepdims=True)
            probs = np.where(totals > 0.0, pos / np.where(totals > 0.0, totals, 1.0), 1.0 / n)
        cum = np.cumsum(probs, axis=1)
        a_learn = (u_learner[:, t, None] >= cum[:, :-1]).sum(axis=1)
        if adversary_code >= 0:
            a_adv = np.full(n_trials, adversary_code)
        elif adversary_code == -1:
            cu = np.cumsum(uniform_dist)
            a_adv = (u_adversary[:, t, None] >= cu[None, :-1]).sum(axis=1)
        else:  # flip: minimize learner payoff vs empirical counts
            a_adv = np.argmin(counts @ g, axis=1)
        w += g[:, a_adv].T
        realized += g[a_learn, a_adv]
        counts[rows, a_learn] += 1.0
    return w.max(axis=1) - realized
