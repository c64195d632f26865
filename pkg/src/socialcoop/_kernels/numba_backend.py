"""Per-trial @njit certification kernel; mirrors the numpy backend exactly."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _simulate(kind, g, eta, adversary_code, u_learner, u_adversary):
    n_trials, horizon = u_learner.shape
    n = g.shape[0]
    out = np.empty(n_trials)
    probs = np.empty(n)
    for j in range(n_trials):
        w = np.zeros(n)
        realized = 0.0
        counts = np.ones(n)
        for t in range(horizon):
            if kind == 0:  # hedge
                m = w[0]
                for k in range(1, n):
                    if w[k] > m:
                        m = w[k]
                s = 0.0
                for k in range(n):
                    probs[k] = np.exp(eta * (w[k] - m))
                    s += probs[k]
                for k in range(n):
                    probs[k] /= s
            else:  # regret matching
                s = 0.0
                for k in range(n):
                    r = w[k] - realized
                    probs[k] = r if r > 0.0 else 0.0
                    s += probs[k]
                if s > 0.0:
                    for k in range(n):
                        probs[k] /= s
                else:
                    for k in range(n):
                        probs[k] = 1.0 / n
            u = u_learner[j, t]
            a_learn = 0
            c = 0.0
            for k in range(n - 1):
                c += probs[k]
                if u >= c:
                    a_learn = k + 1
            if adversary_code >= 0:
                a_adv = adversary_code
            elif adversary_code == -1:
                u2 = u_adversary[j, t]
                a_adv = 0
                c = 0.0
                for k in range(n - 1):
                    c += 1.0 / n
                    if u2 >= c:
                        a_adv = k + 1
            else:  # flip
                a_adv = 0
                best = np.inf
                for k in range(n):
                    v = 0.0
                    for i in range(n):
                        v += counts[i] * g[i, k]
                    if v < best:
                        best = v
                        a_adv = k
            for k in range(n):
                w[k] += g[k, a_adv]
            realized += g[a_learn, a_adv]
            counts[a_learn] += 1.0
        m = w[0]
        for k in range(1, n):
            if w[k] > m:
                m = w[k]
        out[j] = m - realized
    return out


def simulate_batch(kind, g, eta, adversary_code, u_learner, u_adversary):
    return _simulate(
        np.int64(kind), g, eta, np.int64(adversary_code),
        np.ascontiguousarray(u_learner), np.ascontiguousarray(u_adversary),
    )
