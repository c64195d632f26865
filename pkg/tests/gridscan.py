"""Brute-force epsilon-equilibrium grid scan, used as an independent oracle."""

import numpy as np


def simplex_grid(n: int, step: float) -> np.ndarray:
    ticks = np.round(np.arange(0.0, 1.0 + step / 2, step), 10)
    if n == 2:
        return np.stack([ticks, 1.0 - ticks], axis=1)
    if n == 3:
        pts = [
            (x, y, 1.0 - x - y)
            for x in ticks
            for y in ticks
            if x + y <= 1.0 + 1e-12
        ]
        return np.array(pts)
    raise ValueError("grid scan supports n in {2, 3}")


def grid_epsilon_ne(a_mat, b_mat, step=0.01, eps=0.02):
    """All (agent1 strategy, agent2 strategy) grid pairs that are eps-NE.

    Agent 1 maximizes q' A p, agent 2 maximizes p' B q. Returns an array of
    concatenated (q, p) profiles, possibly empty.
    """
    n = a_mat.shape[0]
    grid = simplex_grid(n, step)
    ap = grid @ a_mat.T            # row j: A p_j
    bq = grid @ b_mat.T            # row i: B q_i
    gain1 = ap.max(axis=1)[None, :] - grid @ ap.T   # [i, j]: agent 1 gain at (q_i, p_j)
    gain2 = bq.max(axis=1)[:, None] - (grid @ bq.T).T
    idx = np.argwhere((gain1 <= eps) & (gain2 <= eps))
    if len(idx) == 0:
        return np.empty((0, 2 * n))
    return np.concatenate([grid[idx[:, 0]], grid[idx[:, 1]]], axis=1)


def max_distance_to_enumerated(grid_profiles, ne_set) -> float:
    """Largest L-infinity distance from any grid eps-NE to its nearest
    enumerated profile; 0.0 when the scan found nothing.

    Caution: with a fixed eps this can be large even for a correct solver.
    Wherever payoff gradients are shallow, the eps-NE region is a plateau of
    width about eps divided by the gradient, so distant grid points can be
    genuine eps-NE without being near any exact equilibrium.
    """
    if len(grid_profiles) == 0:
        return 0.0
    enumerated = np.array([np.concatenate([e.s1, e.s2]) for e in ne_set])
    dists = np.abs(grid_profiles[:, None, :] - enumerated[None, :, :]).max(axis=2)
    return float(dists.min(axis=1).max())


def max_confirmation_distance(ne_set, grid_profiles) -> float:
    """Largest L-infinity distance from an enumerated profile to its nearest
    grid eps-NE: small values mean the scan independently confirms every
    solver output. Infinite when the scan found nothing at all."""
    if len(grid_profiles) == 0:
        return float("inf")
    enumerated = np.array([np.concatenate([e.s1, e.s2]) for e in ne_set])
    dists = np.abs(enumerated[:, None, :] - grid_profiles[None, :, :]).max(axis=2)
    return float(dists.min(axis=1).max())
