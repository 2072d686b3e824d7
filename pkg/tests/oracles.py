"""Independent reference implementations used only to check the library.

Each oracle recomputes a result through a different route than the library
(raw-definition cluster distances instead of Lance-Williams updates,
covariance eigendecomposition instead of SVD, plain-loop moments, log-domain
geometric means), so agreement is meaningful.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np


def naive_linkage(points: np.ndarray, linkage: str):
    """O(n^3) agglomerative clustering computing every inter-cluster distance
    directly from the raw points per the linkage definition.

    Returns a list of (left_node, right_node, height, size) with the same node
    numbering and tie-breaking convention as the library: ties on height go to
    the pair containing the lowest leaf index, then the lowest on the other
    side.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    clusters: dict[int, list[int]] = {i: [i] for i in range(n)}
    merges = []

    def distance(a: list[int], b: list[int]) -> float:
        pair_dists = [
            float(np.linalg.norm(points[i] - points[j])) for i in a for j in b
        ]
        if linkage == "single":
            return min(pair_dists)
        if linkage == "complete":
            return max(pair_dists)
        if linkage == "average":
            return sum(pair_dists) / len(pair_dists)
        if linkage == "ward":
            mean_a = points[a].mean(axis=0)
            mean_b = points[b].mean(axis=0)
            factor = 2.0 * len(a) * len(b) / (len(a) + len(b))
            return math.sqrt(factor) * float(np.linalg.norm(mean_a - mean_b))
        raise ValueError(linkage)

    for t in range(n - 1):
        best = None
        for ida, idb in combinations(sorted(clusters), 2):
            low, high = sorted((min(clusters[ida]), min(clusters[idb])))
            key = (distance(clusters[ida], clusters[idb]), low, high, min(ida, idb), max(ida, idb))
            if best is None or key < best[0]:
                best = (key, ida, idb)
        key, ida, idb = best
        new_id = n + t
        clusters[new_id] = clusters.pop(min(ida, idb)) + clusters.pop(max(ida, idb))
        merges.append((min(ida, idb), max(ida, idb), key[0], len(clusters[new_id])))
    return merges


def covariance_eig_pca(values: np.ndarray):
    """PCA by eigendecomposition of the (n-1)-denominator covariance matrix.

    Returns eigenvalues sorted descending and the matching eigenvectors as
    rows (sign not normalized).
    """
    values = np.asarray(values, dtype=float)
    cov = np.cov(values, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    return eigenvalues[order], eigenvectors[:, order].T


def loop_moments(column) -> tuple[float, float]:
    """Mean and population standard deviation via plain accumulation loops."""
    total = 0.0
    for v in column:
        total += v
    mean = total / len(column)
    squares = 0.0
    for v in column:
        squares += (v - mean) ** 2
    return mean, math.sqrt(squares / len(column))


def log_geomean(values) -> float:
    return math.exp(sum(math.log(v) for v in values) / len(values))


def accuracy_of(scores_one_machine: dict[str, float], chosen) -> float:
    gm_suite = log_geomean(list(scores_one_machine.values()))
    gm_subset = log_geomean([scores_one_machine[w] for w in chosen])
    return 1.0 - abs(gm_subset - gm_suite) / gm_suite


def best_subset_recursive(scores_one_machine: dict[str, float], k: int):
    """Second, independently coded exhaustive subset search (single machine).

    Recursion instead of itertools, log-domain geometric means, same
    lexicographic tie-breaking.
    """
    workloads = sorted(scores_one_machine)
    best = {"subset": None, "accuracy": -math.inf}

    def recurse(start: int, chosen: list[str]) -> None:
        if len(chosen) == k:
            acc = accuracy_of(scores_one_machine, chosen)
            if acc > best["accuracy"]:
                best["subset"] = tuple(chosen)
                best["accuracy"] = acc
            return
        for i in range(start, len(workloads)):
            if len(workloads) - i < k - len(chosen):
                break
            chosen.append(workloads[i])
            recurse(i + 1, chosen)
            chosen.pop()

    recurse(0, [])
    return best["subset"], best["accuracy"]


def exhaustive_medoid(group, scores: dict[str, list[float]]) -> str:
    """Argmin over full pairwise-distance sums, lexicographic tie-break."""
    members = sorted(group)
    best_w, best_total = None, math.inf
    for w in members:
        total = 0.0
        for other in members:
            if other == w:
                continue
            total += math.dist(scores[w], scores[other])
        if total < best_total:
            best_w, best_total = w, total
    return best_w
