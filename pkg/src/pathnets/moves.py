"""Involutive proposal moves on sequences of paths.

Two moves drive every sampler in the package:

* edit allocation -- spread a number of entry deletions/insertions over the
  paths of the current state, varying path contents and lengths;
* path insertion/deletion -- delete and insert whole paths, varying the
  number of paths.

Each move is a pair (auxiliary distribution, involution).  The involution
maps ``(state, aux)`` to ``(proposal, aux')`` where ``aux'`` encodes exactly
the reverse edits, so applying it twice is the identity.  The acceptance
ratios need ``log q(aux' | proposal) - log q(aux | state)``, which collapses
to closed form because the subsequence-choice binomials cancel.

Indices here are 0-based; the written derivations are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Observation, Path
from .models import TrPoisson


@dataclass(frozen=True)
class CoOccurrence:
    """Vertex co-occurrence statistics of a sample, for informed proposals.

    ``counts[v, w]`` is the number of observations containing a path with
    both v and w (v at least twice on the diagonal); ``vertex_counts[v]`` is
    the number of observations with at least one path containing v.
    """

    counts: np.ndarray
    vertex_counts: np.ndarray

    @classmethod
    def from_data(cls, observations, V: int) -> "CoOccurrence":
        counts = np.zeros((V, V), dtype=np.int64)
        vertex_counts = np.zeros(V, dtype=np.int64)
        for obs in observations:
            pairs = set()
            present = set()
            for path in obs:
                seen = {}
                for x in path:
                    seen[x] = seen.get(x, 0) + 1
                for v in seen:
                    present.add(v)
                    if seen[v] >= 2:
                        pairs.add((v, v))
                verts = sorted(seen)
                for i, v in enumerate(verts):
                    for w in verts[i + 1 :]:
                        pairs.add((v, w))
            for v, w in pairs:
                counts[v, w] += 1
                if v != w:
                    counts[w, v] += 1
            for v in present:
                vertex_counts[v] += 1
        counts.setflags(write=False)
        vertex_counts.setflags(write=False)
        return cls(counts, vertex_counts)

    @property
    def V(self) -> int:
        return self.counts.shape[0]

    def row_probs(self) -> np.ndarray:
        """Row-normalised co-occurrence; all-zero rows fall back to uniform."""
        rows = self.counts.astype(float)
        sums = rows.sum(axis=1)
        out = np.full_like(rows, 1.0 / self.V)
        nz = sums > 0
        out[nz] = rows[nz] / sums[nz, None]
        return out

    def smoothed_rows(self, alpha: float) -> np.ndarray:
        """``(P + alpha) / (1 + V*alpha)`` rows; uniform as alpha grows."""
        if alpha < 0:
            raise ValueError("smoothing parameter must be non-negative")
        return (self.row_probs() + alpha) / (1.0 + self.V * alpha)

    def vertex_weights(self, alpha: float) -> np.ndarray:
        """Smoothed marginal vertex distribution ``(p_v + alpha) / (1 + alpha V)``."""
        if alpha < 0:
            raise ValueError("smoothing parameter must be non-negative")
        total = self.vertex_counts.sum()
        if total == 0:
            p = np.full(self.V, 1.0 / self.V)
        else:
            p = self.vertex_counts / total
        return (p + alpha) / (1.0 + alpha * self.V)


def informed_entry_dist(coocc: CoOccurrence, preserved, alpha: float) -> np.ndarray:
    """Equal-weight mixture of smoothed co-occurrence rows of the preserved
    vertices; uniform when nothing is preserved."""
    uniq = sorted(set(preserved))
    if not uniq:
        return np.full(coocc.V, 1.0 / coocc.V)
    rows = coocc.smoothed_rows(alpha)
    mix = rows[uniq].mean(axis=0)
    return mix / mix.sum()


@dataclass(frozen=True)
class MoveConfig:
    """Tuning of the two moves and their insertion distributions."""

    nu_ed: int = 2
    nu_td: int = 2
    beta: float = 0.5
    path_length: TrPoisson = field(default_factory=lambda: TrPoisson(3.0, 1, 10))
    insertion: str = "uniform"
    alpha_smooth: float = 0.1
    cooccurrence: Optional[CoOccurrence] = None

    def __post_init__(self):
        if self.nu_ed < 1 or self.nu_td < 1:
            raise ValueError("nu_ed and nu_td must be at least 1")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie strictly in (0, 1)")
        if self.insertion not in ("uniform", "informed"):
            raise ValueError(f"unknown insertion mode {self.insertion!r}")
        if self.insertion == "informed" and self.cooccurrence is None:
            raise ValueError("informed insertion needs a co-occurrence matrix")

    def with_data(self, observations, V: int) -> "MoveConfig":
        """Attach a co-occurrence matrix built from ``observations``."""
        coocc = CoOccurrence.from_data(observations, V)
        return MoveConfig(
            self.nu_ed, self.nu_td, self.beta, self.path_length,
            self.insertion, self.alpha_smooth, coocc,
        )


def _entry_probs(cfg: MoveConfig, preserved, V: int) -> np.ndarray:
    if cfg.insertion == "uniform":
        return np.full(V, 1.0 / V)
    return informed_entry_dist(cfg.cooccurrence, preserved, cfg.alpha_smooth)


def _marginal_probs(cfg: MoveConfig, V: int) -> np.ndarray:
    if cfg.insertion == "uniform":
        return np.full(V, 1.0 / V)
    return cfg.cooccurrence.vertex_weights(cfg.alpha_smooth)


def _entries_logp(probs: np.ndarray, entries) -> float:
    return float(sum(math.log(probs[x]) for x in entries))


def sample_insert_path(cfg: MoveConfig, V: int, rng: np.random.Generator) -> Path:
    """Whole-path proposal: length from the config's TrPoisson, entries iid."""
    length = cfg.path_length.sample(rng)
    probs = _marginal_probs(cfg, V)
    return tuple(int(v) for v in rng.choice(V, size=length, p=probs))


def insert_path_logp(cfg: MoveConfig, V: int, path: Path) -> float:
    """Density of the whole-path proposal; state-independent by construction."""
    lp = cfg.path_length.logpmf(len(path))
    if lp == -math.inf:
        return -math.inf
    return lp + _entries_logp(_marginal_probs(cfg, V), path)


def _sorted_subset(rng: np.random.Generator, n: int, k: int) -> tuple:
    if k == 0:
        return ()
    return tuple(int(i) for i in np.sort(rng.choice(n, size=k, replace=False)))


def _check_subseq(v, n: int, size: int, what: str) -> None:
    if len(v) != size:
        raise ValueError(f"{what} must have {size} indices, got {len(v)}")
    prev = -1
    for i in v:
        if not prev < i < n:
            raise ValueError(f"{what} {v} is not a strictly increasing subsequence of range({n})")
        prev = i


def delete_insert(path: Path, dels, ins_at, entries) -> Path:
    """Delete positions ``dels`` then build a path with ``entries`` at ``ins_at``."""
    kept = [x for i, x in enumerate(path) if i not in set(dels)]
    m = len(kept) + len(ins_at)
    out = [None] * m
    for pos, val in zip(ins_at, entries):
        out[pos] = val
    it = iter(kept)
    for i in range(m):
        if out[i] is None:
            out[i] = next(it)
    return tuple(out)


# ---------------------------------------------------------------------------
# Edit allocation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathEdit:
    """Per-path record: deletions, their indices, insertion slots, entries."""

    d: int
    v: tuple
    v_ins: tuple
    y: tuple


@dataclass(frozen=True)
class EditAllocAux:
    delta: int
    z: tuple
    edits: tuple  # one PathEdit per path

    def validate(self, S: Observation, V: Optional[int] = None) -> None:
        if self.delta < 1:
            raise ValueError("total number of edits must be at least 1")
        if len(self.z) != len(S) or len(self.edits) != len(S):
            raise ValueError("allocation does not match the number of paths")
        if sum(self.z) != self.delta:
            raise ValueError("allocation must sum to the total number of edits")
        for path, z_i, e in zip(S, self.z, self.edits):
            n_i = len(path)
            if not 0 <= e.d <= min(n_i, z_i):
                raise ValueError(f"deletion count {e.d} invalid for n={n_i}, z={z_i}")
            a_i = z_i - e.d
            m_i = n_i - e.d + a_i
            _check_subseq(e.v, n_i, e.d, "deletion index subsequence")
            _check_subseq(e.v_ins, m_i, a_i, "insertion index subsequence")
            if len(e.y) != a_i:
                raise ValueError("insertion entries do not match the insertion count")
            if V is not None and any(not 0 <= x < V for x in e.y):
                raise ValueError("inserted entry outside the vertex set")


def edit_alloc_sample_aux(
    S: Observation, V: int, cfg: MoveConfig, rng: np.random.Generator
) -> EditAllocAux:
    """Draw edit-allocation auxiliary variables for state ``S``."""
    N = len(S)
    delta = int(rng.integers(1, cfg.nu_ed + 1))
    z = tuple(int(c) for c in rng.multinomial(delta, np.full(N, 1.0 / N)))
    edits = []
    for path, z_i in zip(S, z):
        n_i = len(path)
        d_i = int(rng.integers(0, min(z_i, n_i) + 1))
        a_i = z_i - d_i
        m_i = n_i - d_i + a_i
        v = _sorted_subset(rng, n_i, d_i)
        v_ins = _sorted_subset(rng, m_i, a_i)
        if a_i > 0:
            preserved = tuple(x for j, x in enumerate(path) if j not in set(v))
            probs = _entry_probs(cfg, preserved, V)
            y = tuple(int(x) for x in rng.choice(V, size=a_i, p=probs))
        else:
            y = ()
        edits.append(PathEdit(d_i, v, v_ins, y))
    return EditAllocAux(delta, z, tuple(edits))


def edit_alloc_involution(S: Observation, aux: EditAllocAux) -> tuple:
    """Apply the encoded edits; returns ``(S', aux')`` with f(f(x)) = x."""
    aux.validate(S)
    new_paths = []
    new_edits = []
    for path, z_i, e in zip(S, aux.z, aux.edits):
        new_path = delete_insert(path, e.v, e.v_ins, e.y)
        deleted = tuple(path[i] for i in e.v)
        new_paths.append(new_path)
        new_edits.append(PathEdit(z_i - e.d, e.v_ins, e.v, deleted))
    return tuple(new_paths), EditAllocAux(aux.delta, aux.z, tuple(new_edits))


def edit_alloc_aux_logpdf(
    S: Observation, aux: EditAllocAux, V: int, cfg: MoveConfig
) -> float:
    """Exact log-density of the auxiliary draw (multinomial term included)."""
    aux.validate(S, V)
    N = len(S)
    if not 1 <= aux.delta <= cfg.nu_ed:
        return -math.inf
    lp = -math.log(cfg.nu_ed)
    lp += math.lgamma(aux.delta + 1) - sum(math.lgamma(z + 1) for z in aux.z)
    lp += aux.delta * math.log(1.0 / N)
    for path, z_i, e in zip(S, aux.z, aux.edits):
        n_i = len(path)
        a_i = z_i - e.d
        m_i = n_i - e.d + a_i
        lp -= math.log(min(n_i, z_i) + 1)
        lp -= math.log(math.comb(n_i, e.d))
        lp -= math.log(math.comb(m_i, a_i))
        if a_i > 0:
            preserved = tuple(x for j, x in enumerate(path) if j not in set(e.v))
            lp += _entries_logp(_entry_probs(cfg, preserved, V), e.y)
    return lp


def edit_alloc_log_ratio(
    S: Observation,
    S_prime: Observation,
    aux: EditAllocAux,
    aux_prime: EditAllocAux,
    V: int,
    cfg: MoveConfig,
) -> float:
    """``log q(aux' | S') - log q(aux | S)`` in closed form.

    The subsequence binomials cancel; what is left is the deletion-count
    normalisers and the entry-insertion densities, which share one mixture
    because both sides preserve the same entries.
    """
    total = 0.0
    for path, path_p, z_i, e, e_p in zip(S, S_prime, aux.z, aux.edits, aux_prime.edits):
        n_i, m_i = len(path), len(path_p)
        total += math.log(min(n_i, z_i) + 1) - math.log(min(m_i, z_i) + 1)
        if e.d > 0 or len(e.y) > 0:
            preserved = tuple(x for j, x in enumerate(path) if j not in set(e.v))
            probs = _entry_probs(cfg, preserved, V)
            total += _entries_logp(probs, e_p.y)  # reverse insertions = deleted entries
            total -= _entries_logp(probs, e.y)
    return total


# ---------------------------------------------------------------------------
# Path insertion and deletion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathIDAux:
    epsilon: int
    d: int
    v: tuple
    v_ins: tuple
    inserted: tuple  # paths

    def validate(self, S: Observation, V: Optional[int] = None) -> None:
        N = len(S)
        if self.epsilon < 1:
            raise ValueError("total number of path operations must be at least 1")
        if not 0 <= self.d <= min(N, self.epsilon):
            raise ValueError(f"deletion count {self.d} invalid for N={N}, eps={self.epsilon}")
        a = self.epsilon - self.d
        M = N - self.d + a
        _check_subseq(self.v, N, self.d, "path deletion subsequence")
        _check_subseq(self.v_ins, M, a, "path insertion subsequence")
        if len(self.inserted) != a:
            raise ValueError("inserted paths do not match the insertion count")
        for p in self.inserted:
            if len(p) == 0:
                raise ValueError("inserted paths must be non-empty")
            if V is not None and any(not 0 <= x < V for x in p):
                raise ValueError("inserted path entry outside the vertex set")


def path_id_sample_aux(
    S: Observation, V: int, cfg: MoveConfig, rng: np.random.Generator
) -> PathIDAux:
    """Draw path-insertion/deletion auxiliary variables for state ``S``."""
    N = len(S)
    epsilon = int(rng.integers(1, cfg.nu_td + 1))
    d = int(rng.integers(0, min(N, epsilon) + 1))
    a = epsilon - d
    M = N - d + a
    v = _sorted_subset(rng, N, d)
    v_ins = _sorted_subset(rng, M, a)
    inserted = tuple(sample_insert_path(cfg, V, rng) for _ in range(a))
    return PathIDAux(epsilon, d, v, v_ins, inserted)


def path_id_involution(S: Observation, aux: PathIDAux) -> tuple:
    """Delete paths at ``v``, insert ``inserted`` at ``v_ins``; self-inverse."""
    aux.validate(S)
    deleted = tuple(S[i] for i in aux.v)
    new_obs = delete_insert(S, aux.v, aux.v_ins, aux.inserted)
    aux_prime = PathIDAux(aux.epsilon, aux.epsilon - aux.d, aux.v_ins, aux.v, deleted)
    return new_obs, aux_prime


def path_id_aux_logpdf(S: Observation, aux: PathIDAux, V: int, cfg: MoveConfig) -> float:
    """Exact log-density of the auxiliary draw."""
    aux.validate(S, V)
    N = len(S)
    if not 1 <= aux.epsilon <= cfg.nu_td:
        return -math.inf
    a = aux.epsilon - aux.d
    M = N - aux.d + a
    lp = -math.log(cfg.nu_td)
    lp -= math.log(min(N, aux.epsilon) + 1)
    lp -= math.log(math.comb(N, aux.d))
    lp -= math.log(math.comb(M, a))
    for p in aux.inserted:
        lp += insert_path_logp(cfg, V, p)
    return lp


def path_id_log_ratio(
    S: Observation,
    S_prime: Observation,
    aux: PathIDAux,
    aux_prime: PathIDAux,
    V: int,
    cfg: MoveConfig,
) -> float:
    """``log q(aux' | S') - log q(aux | S)`` in closed form."""
    N, M = len(S), len(S_prime)
    eps = aux.epsilon
    total = math.log(min(N, eps) + 1) - math.log(min(M, eps) + 1)
    for p in aux_prime.inserted:  # reverse insertions = deleted paths
        total += insert_path_logp(cfg, V, p)
    for p in aux.inserted:
        total -= insert_path_logp(cfg, V, p)
    return total


def build_cooccurrence(observations, V: int) -> CoOccurrence:
    """Co-occurrence statistics of a sample (see :class:`CoOccurrence`)."""
    if len(observations) == 0:
        raise ValueError("cannot build co-occurrence from an empty sample")
    return CoOccurrence.from_data(observations, V)


def propose(state: Observation, V: int, cfg: MoveConfig, rng: np.random.Generator) -> tuple:
    """One draw from the move mixture: ``(proposal, log q-ratio, move kind)``.

    Edit allocation with probability ``beta``, path insertion/deletion
    otherwise.  The proposal may leave the bounded space (empty paths, empty
    collection, oversize); callers give such proposals acceptance zero.
    """
    if rng.random() < cfg.beta:
        aux = edit_alloc_sample_aux(state, V, cfg, rng)
        prop, aux_p = edit_alloc_involution(state, aux)
        ratio = edit_alloc_log_ratio(state, prop, aux, aux_p, V, cfg)
        return prop, ratio, "edit_alloc"
    aux = path_id_sample_aux(state, V, cfg, rng)
    prop, aux_p = path_id_involution(state, aux)
    ratio = path_id_log_ratio(state, prop, aux, aux_p, V, cfg)
    return prop, ratio, "path_id"
