"""Principal component analysis over the normalized feature matrix.

Components come from an SVD of the centered data matrix (better conditioned
than eigendecomposing the covariance, which the test suite keeps only as an
oracle). A fixed sign convention makes fits bitwise-reproducible: each
component is flipped so its largest-magnitude coordinate is positive, with
ties broken by the lowest column index.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, TargetUnreachable, TooFewRows, UnlabeledColumns
from .features import Column, FeatureMatrix


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray                 # (d,)
    components: np.ndarray           # (k, d), orthonormal rows
    explained_variance: np.ndarray   # (k,), non-increasing
    explained_ratio: np.ndarray      # (k,), fractions of total_variance
    total_variance: float
    k: int
    col_labels: tuple[Column, ...] | None = None

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    def reconstruct(self, scores: np.ndarray) -> np.ndarray:
        return np.asarray(scores, dtype=float) @ self.components + self.mean


def _apply_sign_convention(components: np.ndarray) -> np.ndarray:
    out = components.copy()
    for i in range(out.shape[0]):
        pivot = int(np.argmax(np.abs(out[i])))  # argmax takes the lowest index on ties
        if out[i, pivot] < 0:
            out[i] = -out[i]
    return out


def fit_pca(
    matrix: FeatureMatrix,
    *,
    variance_target: float | None = None,
    fixed_k: int | None = None,
) -> PcaModel:
    """Fit PCA, retaining either enough components for variance_target or fixed_k.

    With neither given, 8 components are retained (capped at the number the
    matrix can supply). Variances use the n-1 sample convention.
    """
    if not matrix.normalized:
        raise ValueError("fit_pca expects a normalized feature matrix")
    n, d = matrix.values.shape
    if n < 2:
        raise TooFewRows("PCA needs at least 2 rows")
    if variance_target is not None and fixed_k is not None:
        raise ValueError("pass either variance_target or fixed_k, not both")

    mean = matrix.values.mean(axis=0)
    centered = matrix.values - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    variances = (s * s) / (n - 1)
    total = float(variances.sum())
    ratios = variances / total if total > 0 else np.zeros_like(variances)

    available = len(variances)
    if variance_target is not None:
        if variance_target > 1.0:
            raise TargetUnreachable(f"variance_target {variance_target} exceeds 1.0")
        if variance_target <= 0.0:
            raise ValueError("variance_target must be in (0, 1]")
        cumulative = np.cumsum(ratios)
        reached = np.flatnonzero(cumulative >= variance_target - 1e-12)
        k = int(reached[0]) + 1 if reached.size else available
    else:
        if fixed_k is None:
            fixed_k = 8
        if fixed_k <= 0:
            raise ValueError("fixed_k must be positive")
        k = min(fixed_k, available)

    components = _apply_sign_convention(vt[:k])
    return PcaModel(
        mean=mean,
        components=components,
        explained_variance=variances[:k].copy(),
        explained_ratio=ratios[:k].copy(),
        total_variance=total,
        k=k,
        col_labels=matrix.cols,
    )


def project(model: PcaModel, matrix: FeatureMatrix | np.ndarray) -> np.ndarray:
    """Scores of each row in the model's component space (rows x k)."""
    values = matrix.values if isinstance(matrix, FeatureMatrix) else np.asarray(matrix, dtype=float)
    if values.ndim != 2 or values.shape[1] != model.d:
        raise DimensionMismatch(f"matrix has {values.shape[-1]} columns, model expects {model.d}")
    return (values - model.mean) @ model.components.T


@dataclass(frozen=True)
class PcLoadings:
    pc: int  # 1-based
    entries: tuple[tuple[str, float], ...]  # (metric, mean loading over machines)


@dataclass(frozen=True)
class LoadingReport:
    per_pc: tuple[PcLoadings, ...]
    top_n: int


def loading_table(model: PcaModel, top_n: int) -> LoadingReport:
    """Per PC, metric loadings averaged (signed) over machines, top_n by |mean|."""
    if model.col_labels is None:
        raise UnlabeledColumns("model was fitted without (metric, machine) column labels")
    if top_n <= 0:
        raise ValueError("top_n must be positive")
    metric_cols: dict[str, list[int]] = {}
    for i, (metric, _machine) in enumerate(model.col_labels):
        metric_cols.setdefault(metric, []).append(i)
    report = []
    for pc_index in range(model.k):
        loadings = model.components[pc_index]
        means = [
            (metric, float(np.mean(loadings[cols]))) for metric, cols in metric_cols.items()
        ]
        means.sort(key=lambda item: (-abs(item[1]), item[0]))
        report.append(PcLoadings(pc=pc_index + 1, entries=tuple(means[:top_n])))
    return LoadingReport(per_pc=tuple(report), top_n=top_n)


def loading_markdown(report: LoadingReport) -> str:
    lines = [
        f"| PC | Top {report.top_n} metrics (mean loading over machines) |",
        "| --- | --- |",
    ]
    for pc in report.per_pc:
        cells = ", ".join(f"{metric} ({value:+.2f})" for metric, value in pc.entries)
        lines.append(f"| PC{pc.pc} | {cells} |")
    return "\n".join(lines) + "\n"


def export_scores_csv(
    labels: Sequence[str],
    scores: np.ndarray,
    path: str | Path,
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["workload", *(f"pc{i + 1}" for i in range(scores.shape[1]))])
        for label, row in zip(labels, scores):
            writer.writerow([label, *(repr(float(v)) for v in row)])


def export_variance_csv(model: PcaModel, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pc", "explained_variance", "explained_ratio", "cumulative_ratio"])
        cumulative = 0.0
        for i in range(model.k):
            cumulative += float(model.explained_ratio[i])
            writer.writerow(
                [
                    f"pc{i + 1}",
                    repr(float(model.explained_variance[i])),
                    repr(float(model.explained_ratio[i])),
                    repr(cumulative),
                ]
            )
