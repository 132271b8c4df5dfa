"""Closed-tour construction over waypoint sets.

Small instances are solved exactly with Held-Karp dynamic programming;
larger ones fall back to nearest-neighbour construction plus 2-opt descent.
Tours are canonicalized (fixed start, fixed direction) so equal-cost
solutions always come out identical.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Largest instance handed to the exact solver by default. Held-Karp state
# is O(n * 2^n); 16 points needs ~8 MB and well under a second.
EXACT_LIMIT_DEFAULT = 16

Point = Sequence[float]


@dataclass(frozen=True)
class Tour:
    """A closed tour over an indexed point set.

    order: visiting order as point indices; the tour returns to order[0].
    length: total closed-loop Euclidean length.
    exact: True when produced by the exact solver.
    """

    order: tuple[int, ...]
    length: float
    exact: bool


def _as_array(points: Sequence[Point]) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("points must be a non-empty sequence of coordinates")
    return pts


def _distance_matrix(pts: np.ndarray) -> np.ndarray:
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def tour_length(order: Sequence[int], points: Sequence[Point]) -> float:
    """Closed-loop length of visiting `points` in `order`.

    `order` must be a permutation of range(len(points)).
    """
    pts = _as_array(points)
    if sorted(order) != list(range(len(pts))):
        raise ValueError("order is not a permutation of the point indices")
    path = pts[list(order)]
    legs = np.roll(path, -1, axis=0) - path
    return float(np.sqrt((legs * legs).sum(axis=1)).sum())


def _canonical(order: list[int]) -> tuple[int, ...]:
    """Rotate to start at index 0; orient so the second index is smaller
    than the last. One representative per equivalence class of rotations
    and reflections."""
    i0 = order.index(0)
    rot = order[i0:] + order[:i0]
    if len(rot) >= 3 and rot[-1] < rot[1]:
        rot = [rot[0]] + rot[:0:-1]
    return tuple(rot)


def solve_exact(points: Sequence[Point], exact_limit: int = EXACT_LIMIT_DEFAULT) -> Tour:
    """Optimal closed tour by Held-Karp dynamic programming.

    Raises ValueError for more than `exact_limit` points (state size grows
    as n * 2^n; use solve_heuristic instead).
    """
    pts = _as_array(points)
    n = pts.shape[0]
    if n > exact_limit:
        raise ValueError(f"{n} points exceeds exact solver limit {exact_limit}")
    if n == 1:
        return Tour(order=(0,), length=0.0, exact=True)
    if n == 2:
        d = float(np.linalg.norm(pts[1] - pts[0]))
        return Tour(order=(0, 1), length=2.0 * d, exact=True)

    dist = _distance_matrix(pts)
    full = (1 << n) - 1
    # dp[mask, j] = shortest path over the point set `mask`, starting at 0
    # and ending at j. parent[mask, j] = predecessor of j on that path.
    dp = np.full((full + 1, n), np.inf)
    parent = np.full((full + 1, n), -1, dtype=np.int64)
    dp[1, 0] = 0.0

    masks_by_size: list[list[int]] = [[] for _ in range(n + 1)]
    for mask in range(1, full + 1, 2):  # only masks containing point 0
        masks_by_size[bin(mask).count("1")].append(mask)

    for size in range(2, n + 1):
        layer = np.array(masks_by_size[size], dtype=np.int64)
        for j in range(1, n):
            with_j = layer[(layer >> j) & 1 == 1]
            if with_j.size == 0:
                continue
            prev = with_j ^ (1 << j)
            cand = dp[prev, :] + dist[:, j]  # (masks, n): end at i, hop i -> j
            best = np.argmin(cand, axis=1)
            rows = np.arange(with_j.size)
            dp[with_j, j] = cand[rows, best]
            parent[with_j, j] = best

    closing = dp[full, :] + dist[:, 0]
    closing[0] = np.inf
    end = int(np.argmin(closing))
    length = float(closing[end])

    order_rev = []
    mask, j = full, end
    while j != 0:
        order_rev.append(j)
        mask, j = mask ^ (1 << j), int(parent[mask, j])
    order = [0] + order_rev[::-1]
    return Tour(order=_canonical(order), length=length, exact=True)


def solve_heuristic(points: Sequence[Point], seed: int = 0) -> Tour:
    """Nearest-neighbour tour from a seeded random start, improved by
    first-improvement 2-opt passes until no move helps."""
    pts = _as_array(points)
    n = pts.shape[0]
    if n == 1:
        return Tour(order=(0,), length=0.0, exact=False)
    dist = _distance_matrix(pts)

    start = random.Random(seed).randrange(n)
    unvisited = np.ones(n, dtype=bool)
    unvisited[start] = False
    order = np.empty(n, dtype=np.int64)
    order[0] = start
    current = start
    for k in range(1, n):
        row = dist[current].copy()
        row[~unvisited] = np.inf
        current = int(np.argmin(row))
        unvisited[current] = False
        order[k] = current

    improved = True
    while improved:
        improved = False
        for i in range(n - 2):
            j_hi = n - 1 if i > 0 else n - 2  # j = n-1 with i = 0 shares a node
            if j_hi < i + 2:
                continue
            js = np.arange(i + 2, j_hi + 1)
            a, b = order[i], order[i + 1]
            c = order[js]
            d = order[(js + 1) % n]
            delta = dist[a, c] + dist[b, d] - dist[a, b] - dist[c, d]
            k = int(np.argmin(delta))
            if delta[k] < -1e-12:
                j = int(js[k])
                order[i + 1 : j + 1] = order[i + 1 : j + 1][::-1].copy()
                improved = True

    order_list = [int(v) for v in order]
    return Tour(order=_canonical(order_list), length=tour_length(order_list, pts), exact=False)


def solve(
    points: Sequence[Point], seed: int = 0, exact_limit: int = EXACT_LIMIT_DEFAULT
) -> Tour:
    """Exact tour up to exact_limit points, heuristic beyond."""
    pts = _as_array(points)
    if pts.shape[0] <= exact_limit:
        return solve_exact(pts, exact_limit=exact_limit)
    return solve_heuristic(pts, seed=seed)
