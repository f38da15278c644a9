"""Learning-difficulty profiles for minority instances.

Two criteria are available. The neighborhood criterion counts how many of an
instance's k nearest neighbours (Euclidean, self excluded) belong to the other
class. The MST criterion builds a Euclidean minimum spanning tree over all
instances and flags minority instances that share an edge with the other class.

Labels are 0/1 vectors; class 1 is the minority class being profiled.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, LengthMismatch, NotBinary, TooFewInstances, ValidationError

DEFAULT_K = 5


class Category(str, enum.Enum):
    PURE = "pure"
    SAFE = "safe"
    BORDER = "border"


def categorize(opposite_count: int) -> Category:
    if opposite_count == 0:
        return Category.PURE
    if opposite_count <= 2:
        return Category.SAFE
    return Category.BORDER


@dataclass(frozen=True)
class NeighborhoodProfile:
    instance_index: int
    opposite_count: int

    @property
    def category(self) -> Category:
        return categorize(self.opposite_count)

    @property
    def grade(self) -> int:
        return self.opposite_count


@dataclass(frozen=True)
class MstProfile:
    instance_index: int
    linked: bool


@dataclass(frozen=True)
class MstEdgeList:
    """Edges ``(i, j, weight)`` with ``i < j``, in the order they joined the tree."""

    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]

    @property
    def total_weight(self) -> float:
        # exactly rounded, so independent of edge order
        return math.fsum(w for _, _, w in self.edges)


def _check_binary(labels) -> np.ndarray:
    y = np.asarray(labels)
    if y.ndim != 1:
        raise NotBinary("labels must be a 1-D vector")
    values = set(np.unique(y).tolist())
    if not values <= {0, 1}:
        raise NotBinary(f"labels must be 0/1, got values {sorted(values)}")
    if len(values) != 2:
        raise NotBinary("both classes must be present")
    return y.astype(np.int64)


def _sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # explicit differences rather than the |a|^2 - 2ab + |b|^2 expansion:
    # exact zeros for duplicates, no cancellation, ties stay ties. Features
    # are accumulated left to right so the value does not depend on BLAS.
    out = np.zeros((A.shape[0], B.shape[0]))
    for k in range(A.shape[1]):
        diff = A[:, k, None] - B[None, :, k]
        out += diff * diff
    return out


def knn_profiles(features, labels, k: int = DEFAULT_K, chunk: int = 256) -> list[NeighborhoodProfile]:
    """Opposite-class counts among the k nearest neighbours of each minority instance.

    Neighbours are ranked by distance, then by index, so equidistant points
    resolve to the lower index. Returned in increasing instance order.
    """
    X = np.asarray(features, dtype=float)
    y = _check_binary(labels)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise LengthMismatch("features and labels disagree on the number of rows")
    if k < 1:
        raise ValidationError("k must be >= 1")
    n = X.shape[0]
    if n <= k:
        raise TooFewInstances(f"need more than k={k} instances, got {n}")

    minority = np.flatnonzero(y == 1)
    out = []
    for start in range(0, len(minority), chunk):
        rows = minority[start:start + chunk]
        d = _sq_dists(X[rows], X)
        d[np.arange(len(rows)), rows] = np.inf
        # stable sort keeps index order among equal distances
        nn = np.argsort(d, axis=1, kind="stable")[:, :k]
        opp = (y[nn] != 1).sum(axis=1)
        out.extend(NeighborhoodProfile(int(i), int(c)) for i, c in zip(rows, opp))
    return out


def build_mst(features) -> MstEdgeList:
    """Euclidean minimum spanning tree over all rows (dense Prim, O(N^2) memory-free).

    Edges are compared on ``(weight, min(i, j), max(i, j))``. That is a strict
    total order, so the tree is unique and is the same one Kruskal would pick
    when scanning pairs sorted by that key.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim != 2:
        raise DegenerateInput("features must be 2-D")
    n = X.shape[0]
    if n < 2:
        raise DegenerateInput("need at least 2 instances for a spanning tree")
    if not np.all(np.isfinite(X)):
        raise DegenerateInput("features must be finite")

    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best_w = _sq_dists(X[:1], X)[0]
    # best edge for vertex v is (best_w[v], lo[v], hi[v]); the tree side is vertex 0 so far
    lo = np.zeros(n, dtype=np.int64)
    hi = np.arange(n, dtype=np.int64)
    edges = []
    for _ in range(n - 1):
        cand = np.flatnonzero(~in_tree)
        order = np.lexsort((hi[cand], lo[cand], best_w[cand]))
        v = int(cand[order[0]])
        i, j = int(lo[v]), int(hi[v])
        edges.append((i, j, float(np.sqrt(best_w[v]))))
        in_tree[v] = True

        rest = np.flatnonzero(~in_tree)
        if len(rest) == 0:
            break
        w = _sq_dists(X[v:v + 1], X[rest])[0]
        nlo = np.minimum(rest, v)
        nhi = np.maximum(rest, v)
        cw, clo, chi = best_w[rest], lo[rest], hi[rest]
        better = (w < cw) | ((w == cw) & ((nlo < clo) | ((nlo == clo) & (nhi < chi))))
        upd = rest[better]
        best_w[upd] = w[better]
        lo[upd] = nlo[better]
        hi[upd] = nhi[better]
    return MstEdgeList(n, tuple(edges))


def linked_mask(mst: MstEdgeList, labels) -> np.ndarray:
    """Boolean mask of every vertex (either class) touching a cross-class edge."""
    y = np.asarray(labels)
    if len(y) != mst.n_vertices:
        raise LengthMismatch(f"{len(y)} labels for an MST over {mst.n_vertices} vertices")
    mask = np.zeros(len(y), dtype=bool)
    for i, j, _ in mst.edges:
        if y[i] != y[j]:
            mask[i] = mask[j] = True
    return mask


def mst_profiles(mst: MstEdgeList, labels) -> list[MstProfile]:
    y = np.asarray(labels)
    mask = linked_mask(mst, y)
    return [MstProfile(int(i), bool(mask[i])) for i in np.flatnonzero(y == 1)]


def summarize(profiles) -> dict[str, int]:
    """Category counts for a profile list (either kind)."""
    if profiles and isinstance(profiles[0], MstProfile):
        linked = sum(p.linked for p in profiles)
        return {"linked": linked, "normal": len(profiles) - linked}
    counts = {c.value: 0 for c in Category}
    for p in profiles:
        counts[p.category.value] += 1
    return counts
