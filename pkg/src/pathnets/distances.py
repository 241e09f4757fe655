"""Distance metrics between paths, path collections and multigraphs.

Path distances: longest-subpath (LSP) and longest-common-subsequence (LCS)
distances, both ``n + m - 2*delta``.  Collection distances: the edit distance
between sequences (optimal monotone matching, dynamic programme) and the
matching distance between multisets (optimal assignment on a padded square
cost matrix).  All of these return exact integers.  The Steinhaus transform
normalises the matching distance to [0, 1].

The inner dynamic programmes are jitted with numba when available; the same
code runs un-jitted otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

try:  # pragma: no cover - exercised implicitly
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap

PATH_METRICS = ("lsp", "lcs")
LEVELS = ("edit", "matching")
GRAPH_METRICS = ("hamming", "l1")

_LCS = 0
_LSP = 1


@njit(cache=True)
def _lcs_delta(a, b):
    n, m = a.shape[0], b.shape[0]
    if n == 0 or m == 0:
        return 0
    prev = np.zeros(m + 1, dtype=np.int64)
    cur = np.zeros(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            elif prev[j] >= cur[j - 1]:
                cur[j] = prev[j]
            else:
                cur[j] = cur[j - 1]
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True)
def _lsp_delta(a, b):
    n, m = a.shape[0], b.shape[0]
    if n == 0 or m == 0:
        return 0
    best = 0
    prev = np.zeros(m + 1, dtype=np.int64)
    cur = np.zeros(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
            else:
                cur[j] = 0
        prev, cur = cur, prev
    return best


@njit(cache=True)
def _path_dist(a, b, kind):
    if kind == _LSP:
        delta = _lsp_delta(a, b)
    else:
        delta = _lcs_delta(a, b)
    return a.shape[0] + b.shape[0] - 2 * delta


@njit(cache=True)
def _pair_costs(A, la, na, B, lb, nb, kind):
    C = np.empty((na, nb), dtype=np.int64)
    for i in range(na):
        for j in range(nb):
            C[i, j] = _path_dist(A[i, : la[i]], B[j, : lb[j]], kind)
    return C


@njit(cache=True)
def _seq_edit(A, la, na, B, lb, nb, kind):
    # D(i,j) = min over: leave path i unmatched, leave path j unmatched,
    # or pair them; unmatched penalty is the path length (distance to Λ).
    D = np.empty((na + 1, nb + 1), dtype=np.int64)
    D[0, 0] = 0
    for i in range(1, na + 1):
        D[i, 0] = D[i - 1, 0] + la[i - 1]
    for j in range(1, nb + 1):
        D[0, j] = D[0, j - 1] + lb[j - 1]
    for i in range(1, na + 1):
        for j in range(1, nb + 1):
            pair = D[i - 1, j - 1] + _path_dist(
                A[i - 1, : la[i - 1]], B[j - 1, : lb[j - 1]], kind
            )
            skip_i = D[i - 1, j] + la[i - 1]
            skip_j = D[i, j - 1] + lb[j - 1]
            best = pair
            if skip_i < best:
                best = skip_i
            if skip_j < best:
                best = skip_j
            D[i, j] = best
    return D[na, nb]


@njit(cache=True)
def _padded_costs(A, la, na, B, lb, nb, kind):
    # Square (na+nb) matrix: real-vs-real pair costs, dummy rows/cols carry
    # the unmatched penalties, dummy-vs-dummy is free.
    size = na + nb
    C = np.zeros((size, size), dtype=np.int64)
    for i in range(na):
        for j in range(nb):
            C[i, j] = _path_dist(A[i, : la[i]], B[j, : lb[j]], kind)
    for i in range(na):
        for j in range(nb, size):
            C[i, j] = la[i]
    for i in range(na, size):
        for j in range(nb):
            C[i, j] = lb[j]
    return C


@njit(cache=True)
def _seq_edit_to_many(obs_pad, obs_lens, obs_sizes, S, ls, ns, kind):
    total = 0
    for k in range(obs_pad.shape[0]):
        nk = obs_sizes[k]
        total += _seq_edit(obs_pad[k], obs_lens[k], nk, S, ls, ns, kind)
    return total


def _kind_code(inner: str) -> int:
    if inner == "lsp":
        return _LSP
    if inner == "lcs":
        return _LCS
    raise ValueError(f"unknown path metric {inner!r}; expected one of {PATH_METRICS}")


def _pad(obs) -> tuple:
    n = len(obs)
    k = max((len(p) for p in obs), default=0)
    arr = np.zeros((max(n, 1), max(k, 1)), dtype=np.int64)
    lens = np.zeros(max(n, 1), dtype=np.int64)
    for i, p in enumerate(obs):
        lens[i] = len(p)
        for j, x in enumerate(p):
            arr[i, j] = x
    return arr, lens, n


def common_subpath_len(a, b) -> int:
    """Length of the longest contiguous run common to both paths."""
    return int(_lsp_delta(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)))


def common_subseq_len(a, b) -> int:
    """Classic longest-common-subsequence length."""
    return int(_lcs_delta(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)))


def path_distance(a, b, kind: str = "lsp") -> int:
    """``n + m - 2*delta`` with delta the LSP or LCS overlap; Λ has length 0."""
    code = _kind_code(kind)
    return int(
        _path_dist(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64), code)
    )


def seq_distance(S, T, inner: str = "lsp") -> int:
    """Edit distance between interaction sequences (optimal monotone matching)."""
    code = _kind_code(inner)
    A, la, na = _pad(S)
    B, lb, nb = _pad(T)
    return int(_seq_edit(A, la, na, B, lb, nb, code))


def multiset_distance(E, F, inner: str = "lsp") -> int:
    """Matching distance between interaction multisets (optimal assignment).

    Solved on the padded ``(N+M)`` square cost matrix, so unmatched paths pay
    their distance to the empty path.  Invariant to path order on both sides.
    """
    code = _kind_code(inner)
    na, nb = len(E), len(F)
    if na == 0 and nb == 0:
        return 0
    if na == 0:
        return sum(len(p) for p in F)
    if nb == 0:
        return sum(len(p) for p in E)
    A, la, _ = _pad(E)
    B, lb, _ = _pad(F)
    C = _padded_costs(A, la, na, B, lb, nb, code)
    rows, cols = linear_sum_assignment(C)
    return int(C[rows, cols].sum())


def steinhaus(E, F, inner: str = "lsp") -> float:
    """Steinhaus-normalised matching distance, in [0, 1].

    ``2 d / (d(E, empty) + d(F, empty) + d)``; undefined when both are empty.
    """
    size_e = sum(len(p) for p in E)
    size_f = sum(len(p) for p in F)
    if size_e == 0 and size_f == 0:
        raise ValueError("Steinhaus distance undefined for two empty multisets")
    d = multiset_distance(E, F, inner)
    if d == 0:
        return 0.0
    return 2.0 * d / (size_e + size_f + d)


@dataclass(frozen=True)
class MetricSpec:
    """A collection-level metric: edit (sequences) or matching (multisets)."""

    level: str
    inner: str

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"unknown level {self.level!r}; expected one of {LEVELS}")
        _kind_code(self.inner)

    def distance(self, x, y) -> int:
        if self.level == "edit":
            return seq_distance(x, y, self.inner)
        return multiset_distance(x, y, self.inner)

    def __call__(self, x, y) -> int:
        return self.distance(x, y)


def graph_distance(G, H, kind: str = "l1") -> int:
    """Entry-wise L1 distance between adjacency matrices.

    ``hamming`` is the same formula restricted to binary graphs.
    """
    if kind not in GRAPH_METRICS:
        raise ValueError(f"unknown graph metric {kind!r}; expected one of {GRAPH_METRICS}")
    A = np.asarray(G, dtype=np.int64)
    B = np.asarray(H, dtype=np.int64)
    if A.shape != B.shape:
        raise ValueError(f"adjacency shapes differ: {A.shape} vs {B.shape}")
    if kind == "hamming":
        for M in (A, B):
            if not np.isin(M, (0, 1)).all():
                raise ValueError("hamming distance requires binary adjacency matrices")
    return int(np.abs(A - B).sum())


def frechet_mean(sample: Sequence, metric: Union[MetricSpec, Callable]) -> tuple:
    """Sample Fréchet mean: the element minimising the sum of squared distances.

    Returns ``(element, index)``; ties break to the smallest index.  The
    argmin is restricted to the sample itself.
    """
    if len(sample) == 0:
        raise ValueError("cannot take the Fréchet mean of an empty sample")
    dist = metric.distance if isinstance(metric, MetricSpec) else metric
    n = len(sample)
    cache = {}

    def d(i, j):
        key = (i, j) if i <= j else (j, i)
        if key not in cache:
            cache[key] = dist(sample[key[0]], sample[key[1]])
        return cache[key]

    best_idx = 0
    best_val = None
    for i in range(n):
        total = 0.0
        for j in range(n):
            if i != j:
                total += float(d(i, j)) ** 2
        if best_val is None or total < best_val:
            best_val = total
            best_idx = i
    return sample[best_idx], best_idx


class DatasetDistances:
    """Pre-padded dataset for fast repeated 'sum of distances to state' queries.

    Only the sequence-edit path is jitted end to end; the matching level falls
    back to per-pair assignment calls.
    """

    def __init__(self, observations, metric: MetricSpec):
        self.metric = metric
        self.observations = tuple(observations)
        self._code = _kind_code(metric.inner)
        n = len(self.observations)
        max_paths = max(len(o) for o in self.observations)
        max_len = max(len(p) for o in self.observations for p in o)
        self._pad_obs = np.zeros((n, max_paths, max_len), dtype=np.int64)
        self._lens = np.zeros((n, max_paths), dtype=np.int64)
        self._sizes = np.zeros(n, dtype=np.int64)
        for k, obs in enumerate(self.observations):
            self._sizes[k] = len(obs)
            for i, p in enumerate(obs):
                self._lens[k, i] = len(p)
                self._pad_obs[k, i, : len(p)] = p

    def total_to(self, state) -> int:
        if self.metric.level == "edit":
            S, ls, ns = _pad(state)
            return int(
                _seq_edit_to_many(
                    self._pad_obs, self._lens, self._sizes, S, ls, ns, self._code
                )
            )
        return sum(
            multiset_distance(obs, state, self.metric.inner)
            for obs in self.observations
        )

    def distances_to(self, state) -> np.ndarray:
        return np.array(
            [self.metric.distance(obs, state) for obs in self.observations],
            dtype=np.int64,
        )
