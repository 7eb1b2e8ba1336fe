"""SVD projection of unit vectors, node co-registration, group statistics.

Unit vectors are column-mean-centered jointly across both conditions and
projected on the top-2 right-singular vectors. Node positions are then
solved by least squares so each unit's edge-weighted centroid lands as
close as possible to its projected point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as t_dist

from .ingest import CODES, UnitId
from .network import DIRECTED, SYMMETRIC, UnitVector, unflatten


class ProjectionError(ValueError):
    pass


class TooFewUnits(ProjectionError):
    pass


class EmptyGroup(ProjectionError):
    pass


class DegenerateRankWarning(UserWarning):
    """Fewer than 2 nonzero singular values; dimension 2 is zeroed."""


class SingularSystemWarning(UserWarning):
    """Node placement system is singular; minimum-norm solution returned."""


@dataclass(frozen=True)
class ProjectionModel:
    kind: str
    units: tuple[UnitId, ...]
    column_means: np.ndarray
    basis: np.ndarray              # (n_features, 2), orthonormal columns
    singular_values: np.ndarray
    unit_points: np.ndarray        # (n_units, 2)
    variance_explained: np.ndarray  # per singular value, sums to 1


@dataclass(frozen=True)
class NodeLayout:
    positions: np.ndarray  # (|C|, 2), ordered as ingest.CODES
    residual: float


@dataclass(frozen=True)
class GroupNetwork:
    condition: str  # a condition label, or "difference"
    mean_weights: np.ndarray  # (|C|, |C|)
    centroid: np.ndarray      # (2,)
    ci95: np.ndarray          # (2,) half-widths


def fit_projection(vectors: list[UnitVector]) -> ProjectionModel:
    """Center, decompose, project.

    Sign convention for determinism: each basis vector's largest-magnitude
    component is made positive. A degenerate (< rank 2) cloud raises a
    DegenerateRankWarning and zeroes the second dimension.
    """
    if len(vectors) < 3:
        raise TooFewUnits("need ≥ 3 units for a projection")
    kinds = {v.kind for v in vectors}
    modes = {v.normalization_mode for v in vectors}
    if len(kinds) != 1 or len(modes) != 1:
        raise ProjectionError("unit vectors must share kind and normalization")
    matrix = np.vstack([v.values for v in vectors])
    if not np.all(np.isfinite(matrix)):
        raise ProjectionError("unit vectors contain non-finite values")

    means = matrix.mean(axis=0)
    centered = matrix - means
    u, s, vt = np.linalg.svd(centered, full_matrices=False)

    total = float(np.sum(s**2))
    if total > 0:
        var = s**2 / total
    else:
        var = np.zeros_like(s)

    tol = max(centered.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    basis = np.zeros((matrix.shape[1], 2))
    if rank >= 1:
        basis[:, 0] = vt[0]
    if rank >= 2:
        basis[:, 1] = vt[1]
    else:
        warnings.warn("projection rank < 2; second dimension zeroed", DegenerateRankWarning)

    # deterministic sign: largest-|component| of each basis vector positive
    for k in range(2):
        col = basis[:, k]
        if col.any():
            j = int(np.argmax(np.abs(col)))
            if col[j] < 0:
                basis[:, k] = -col

    points = centered @ basis
    return ProjectionModel(
        kind=vectors[0].kind,
        units=tuple(v.unit for v in vectors),
        column_means=means,
        basis=basis,
        singular_values=s,
        unit_points=points,
        variance_explained=var,
    )


def centroid_coefficients(vec: UnitVector) -> np.ndarray:
    """Per-code weights c such that centroid = c @ P for node positions P.

    Edge (i, j) pulls the centroid toward the edge midpoint (P_i + P_j)/2
    in proportion to its weight; a directed self-loop (i, i) pulls toward
    P_i. Coefficients are normalized by the total edge weight.
    """
    w = unflatten(vec)
    n = len(CODES)
    coeff = np.zeros(n)
    if vec.kind == SYMMETRIC:
        total = float(np.sum(w[np.triu_indices(n, k=1)]))
        coeff = w.sum(axis=1) / 2.0  # each pair (i,j) gives w/2 to both ends
    else:
        total = float(w.sum())
        off = w - np.diag(np.diag(w))
        coeff = off.sum(axis=1) / 2.0 + off.sum(axis=0) / 2.0 + np.diag(w)
    if total <= 0:
        return np.full(n, np.nan)
    return coeff / total


def place_nodes(model: ProjectionModel, vectors: list[UnitVector]) -> NodeLayout:
    """Least-squares node positions so unit centroids match unit points.

    Units with an all-zero network are excluded from the system. A rank-
    deficient system falls back to the minimum-norm solution with a
    SingularSystemWarning.
    """
    rows = []
    targets = []
    for vec, point in zip(vectors, model.unit_points):
        c = centroid_coefficients(vec)
        if np.all(np.isfinite(c)):
            rows.append(c)
            targets.append(point)
    if not rows:
        raise ProjectionError("no unit with nonzero weights to place nodes from")
    A = np.vstack(rows)
    b = np.vstack(targets)
    if len(rows) < len(CODES) or np.linalg.matrix_rank(A) < len(CODES):
        warnings.warn("node placement underdetermined; minimum-norm solution",
                      SingularSystemWarning)
    positions, *_ = np.linalg.lstsq(A, b, rcond=None)
    residual = float(np.mean(np.sum((A @ positions - b) ** 2, axis=1)))
    return NodeLayout(positions=positions, residual=residual)


def group_networks(units: tuple[UnitId, ...], points: np.ndarray,
                   vectors: list[UnitVector],
                   grouping: dict[UnitId, str] | None = None,
                   alpha: float = 0.05) -> list[GroupNetwork]:
    """Per-group mean network, centroid, and per-dimension 95% CI.

    grouping defaults to each unit's own condition label. With exactly two
    groups a third "difference" entry (first minus second in sorted-label
    order) is appended.
    """
    if grouping is None:
        grouping = {u: u.condition for u in units}
    labels = sorted(set(grouping.values()))
    groups: dict[str, list[int]] = {lab: [] for lab in labels}
    for idx, unit in enumerate(units):
        groups[grouping[unit]].append(idx)

    out: list[GroupNetwork] = []
    for lab in labels:
        idxs = groups[lab]
        if len(idxs) < 2:
            raise EmptyGroup(f"group {lab!r} has {len(idxs)} unit(s), need ≥ 2")
        mats = np.stack([unflatten(vectors[i]) for i in idxs])
        pts = points[idxs]
        n = len(idxs)
        sd = pts.std(axis=0, ddof=1)
        half = t_dist.ppf(1.0 - alpha / 2.0, n - 1) * sd / np.sqrt(n)
        out.append(GroupNetwork(lab, mats.mean(axis=0), pts.mean(axis=0), half))

    if len(labels) == 2:
        a, b = out[0], out[1]
        out.append(GroupNetwork("difference", a.mean_weights - b.mean_weights,
                                a.centroid - b.centroid, np.zeros(2)))
    return out


def group_statistics(model: ProjectionModel, vectors: list[UnitVector],
                     grouping: dict[UnitId, str] | None = None,
                     alpha: float = 0.05) -> list[GroupNetwork]:
    """group_networks evaluated on a fitted projection model."""
    return group_networks(model.units, model.unit_points, vectors, grouping, alpha)
