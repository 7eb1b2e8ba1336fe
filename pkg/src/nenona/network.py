"""Code-vector sequences -> per-unit weighted adjacency, normalized vectors.

Two accumulation kinds: symmetric within-epoch co-occurrence, and directed
windowed co-occurrence where the active codes of the preceding L-1 epochs
(ground) connect to the active codes of the current epoch (response).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import CODES, UnitId
from .features import CodeVector

SYMMETRIC = "symmetric"
DIRECTED = "directed"


class NetworkError(ValueError):
    pass


class MixedUnits(NetworkError):
    pass


class TooFewEpochs(NetworkError):
    pass


class ZeroDenominator(NetworkError):
    pass


@dataclass(frozen=True)
class NetworkAccumulator:
    kind: str
    codes: tuple[str, ...]
    weights: np.ndarray  # (|C|, |C|), counts
    unit: UnitId
    update_count: int


@dataclass(frozen=True)
class UnitVector:
    """Flattened adjacency: upper triangle for symmetric, full matrix for directed."""

    unit: UnitId
    kind: str
    values: np.ndarray
    normalized: bool = False
    normalization_mode: str | None = None


def _single_unit(code_vectors: list[CodeVector]) -> UnitId:
    units = {v.unit for v in code_vectors}
    if len(units) != 1:
        raise MixedUnits(f"expected one unit, found {sorted((u.participant, u.condition) for u in units)}")
    return units.pop()


def accumulate_symmetric(code_vectors: list[CodeVector]) -> NetworkAccumulator:
    """Within-epoch co-occurrence: every unordered pair of active codes +1."""
    unit = _single_unit(code_vectors)
    n = len(CODES)
    w = np.zeros((n, n))
    for v in code_vectors:
        active = np.flatnonzero(v.codes)
        for a_idx, i in enumerate(active):
            for j in active[a_idx + 1:]:
                w[i, j] += 1
                w[j, i] += 1
    return NetworkAccumulator(SYMMETRIC, CODES, w, unit, update_count=len(code_vectors))


def accumulate_directed(code_vectors: list[CodeVector], window: int = 2) -> NetworkAccumulator:
    """Windowed directed co-occurrence, ground (previous L-1 epochs) -> response.

    Self-connections (g == r) are counted. The first L-1 epochs contribute
    only as ground; update_count is the number of windows processed.
    """
    if window < 2:
        raise NetworkError("window must be ≥ 2")
    if len(code_vectors) < window:
        raise TooFewEpochs(f"need ≥ {window} epochs, got {len(code_vectors)}")
    unit = _single_unit(code_vectors)
    n = len(CODES)
    w = np.zeros((n, n))
    windows = 0
    for t in range(window - 1, len(code_vectors)):
        ground: set[int] = set()
        for v in code_vectors[t - (window - 1) : t]:
            ground.update(np.flatnonzero(v.codes).tolist())
        response = np.flatnonzero(code_vectors[t].codes)
        for g in ground:
            for r in response:
                w[g, r] += 1
        windows += 1
    return NetworkAccumulator(DIRECTED, CODES, w, unit, update_count=windows)


def flatten(acc: NetworkAccumulator) -> UnitVector:
    """Upper triangle (21 values for 7 codes) or full matrix (49 values)."""
    if acc.kind == SYMMETRIC:
        iu = np.triu_indices(len(acc.codes), k=1)
        values = acc.weights[iu]
    else:
        values = acc.weights.ravel().copy()
    return UnitVector(acc.unit, acc.kind, values)


def unflatten(vec: UnitVector) -> np.ndarray:
    """Inverse of flatten: reconstruct the (|C|, |C|) weight matrix."""
    n = len(CODES)
    if vec.kind == SYMMETRIC:
        w = np.zeros((n, n))
        iu = np.triu_indices(n, k=1)
        w[iu] = vec.values
        return w + w.T
    return vec.values.reshape(n, n).copy()


def normalize(acc: NetworkAccumulator, mode: str = "epoch-count") -> UnitVector:
    """Scale the flattened vector for cross-unit comparability.

    epoch-count divides by the number of accumulation updates (epochs or
    windows); entry-sum divides by the flattened vector's own sum, giving
    a probability-like vector.
    """
    vec = flatten(acc)
    if mode == "epoch-count":
        if acc.update_count <= 0:
            raise ZeroDenominator("no updates accumulated")
        values = vec.values / acc.update_count
    elif mode == "entry-sum":
        total = float(vec.values.sum())
        if total <= 0.0:
            raise ZeroDenominator("all-zero adjacency")
        values = vec.values / total
    else:
        raise NetworkError(f"unknown normalization mode {mode!r}")
    return UnitVector(acc.unit, acc.kind, values, normalized=True, normalization_mode=mode)


def accumulate_units(code_vectors: list[CodeVector], kind: str, window: int = 2
                     ) -> list[NetworkAccumulator]:
    """Group a mixed code-vector stream by unit and accumulate each group.

    Epoch order within each unit is preserved (matters for the directed kind).
    """
    groups: dict[UnitId, list[CodeVector]] = {}
    for v in code_vectors:
        groups.setdefault(v.unit, []).append(v)
    accs = []
    for unit in sorted(groups, key=lambda u: (u.participant, u.condition)):
        vecs = groups[unit]
        if kind == SYMMETRIC:
            accs.append(accumulate_symmetric(vecs))
        else:
            accs.append(accumulate_directed(vecs, window=window))
    return accs
