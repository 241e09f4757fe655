"""Core domain types: vertices, paths, interaction sequences/multisets, bounds.

Observations are plain immutable data: a path is a tuple of vertex indices
in ``[0, V)``, an observation (interaction sequence or multiset) is a tuple
of paths.  Multisets use the same representation, interpreted as unordered;
:func:`canonicalize` gives the sorted normal form used for equality and
hashing.  Everything here is immutable after construction and safe to share
across concurrent workers.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

FORMAT_VERSION = 1

Path = tuple  # tuple[int, ...]
Observation = tuple  # tuple[Path, ...]

#: The empty path, used only as a distance argument (never stored).
EMPTY_PATH: Path = ()


class ValidationError(ValueError):
    """Raised when an input violates a structural invariant."""


@dataclass(frozen=True)
class VertexSet:
    """A fixed vertex set of dense indices ``0..size-1`` with optional labels."""

    size: int
    labels: Optional[tuple] = None

    def __post_init__(self):
        if self.size < 1:
            raise ValidationError(f"vertex set must be non-empty, got size={self.size}")
        if self.labels is not None:
            labels = tuple(self.labels)
            object.__setattr__(self, "labels", labels)
            if len(labels) != self.size:
                raise ValidationError(
                    f"expected {self.size} labels, got {len(labels)}"
                )
            if len(set(labels)) != len(labels):
                raise ValidationError("vertex labels must be distinct")

    def label(self, v: int) -> str:
        if self.labels is None:
            return str(v)
        return self.labels[v]

    def index(self, label: str) -> int:
        if self.labels is None:
            raise ValidationError("vertex set has no label table")
        return self.labels.index(label)


@dataclass(frozen=True)
class SpaceBounds:
    """Bounded sample space: paths up to length K, at most L paths, V vertices."""

    V: int
    K: int
    L: int

    def __post_init__(self):
        if self.V < 1 or self.K < 1 or self.L < 1:
            raise ValidationError(f"bounds must be positive, got {self}")


def as_path(entries: Iterable[int], V: Optional[int] = None) -> Path:
    """Validate and freeze a path. The empty tuple is allowed only as Λ."""
    path = tuple(int(x) for x in entries)
    for x in path:
        if x < 0 or (V is not None and x >= V):
            raise ValidationError(f"vertex {x} outside [0, {V})")
    return path


def as_observation(paths: Iterable[Iterable[int]], V: Optional[int] = None) -> Observation:
    """Validate and freeze an observation: non-empty paths, valid entries."""
    obs = tuple(as_path(p, V) for p in paths)
    for p in obs:
        if len(p) == 0:
            raise ValidationError("observations may not contain empty paths")
    return obs


def check_observations(
    data: Sequence, V: Optional[int] = None, bounds: Optional[SpaceBounds] = None
) -> tuple:
    """Validate a sample of observations, returning the frozen tuple form."""
    if len(data) == 0:
        raise ValidationError("empty sample")
    frozen = tuple(as_observation(obs, V) for obs in data)
    for obs in frozen:
        if len(obs) == 0:
            raise ValidationError("observations must contain at least one path")
        if bounds is not None and not in_bounds(obs, bounds):
            raise ValidationError(f"observation {obs} violates bounds {bounds}")
    return frozen


def canonicalize(multiset: Observation) -> Observation:
    """Sorted canonical form of a multiset of paths.

    Idempotent; two multisets are equal iff their canonical forms are equal.
    Paths sort by length first, then lexicographically by entries.
    """
    return tuple(sorted(multiset, key=lambda p: (len(p), p)))


def multisets_equal(a: Observation, b: Observation) -> bool:
    return canonicalize(a) == canonicalize(b)


def multiplicity_profile(multiset: Observation) -> list:
    """Unique paths with their multiplicities, in canonical order."""
    counts = Counter(multiset)
    return [(p, counts[p]) for p in sorted(counts, key=lambda p: (len(p), p))]


def in_bounds(obs: Observation, bounds: SpaceBounds) -> bool:
    """True iff the observation fits in the bounded sample space."""
    if len(obs) < 1 or len(obs) > bounds.L:
        return False
    return all(1 <= len(p) <= bounds.K for p in obs)


def vertex_count(obs: Observation, v: int) -> int:
    """Total occurrences of vertex ``v`` across all path entries."""
    return sum(1 for p in obs for x in p if x == v)


def total_entries(obs: Observation) -> int:
    return sum(len(p) for p in obs)


@dataclass(frozen=True)
class Dataset:
    """A sample of observations over a common bounded space.

    ``ordered`` distinguishes interaction sequences (True) from multisets
    (False).  Multiset observations are stored in canonical form.
    """

    observations: tuple
    bounds: SpaceBounds
    ordered: bool = True
    labels: Optional[tuple] = None

    def __post_init__(self):
        obs = tuple(as_observation(o, self.bounds.V) for o in self.observations)
        if not self.ordered:
            obs = tuple(canonicalize(o) for o in obs)
        object.__setattr__(self, "observations", obs)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
        for o in obs:
            if not in_bounds(o, self.bounds):
                raise ValidationError(f"observation {o} violates bounds {self.bounds}")

    @property
    def vertex_set(self) -> VertexSet:
        return VertexSet(self.bounds.V, self.labels)

    def __len__(self) -> int:
        return len(self.observations)

    def to_json(self) -> str:
        payload = {
            "format_version": FORMAT_VERSION,
            "V": self.bounds.V,
            "K": self.bounds.K,
            "L": self.bounds.L,
            "labels": list(self.labels) if self.labels is not None else None,
            "observations": [[list(p) for p in obs] for obs in self.observations],
            "ordered": self.ordered,
        }
        return json.dumps(payload, separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Dataset":
        payload = json.loads(text)
        version = payload.get("format_version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise ValidationError(f"unsupported dataset format_version {version}")
        for key in ("V", "K", "L", "observations", "ordered"):
            if key not in payload:
                raise ValidationError(f"dataset JSON missing field {key!r}")
        labels = payload.get("labels")
        return cls(
            observations=tuple(tuple(tuple(p) for p in obs) for obs in payload["observations"]),
            bounds=SpaceBounds(payload["V"], payload["K"], payload["L"]),
            ordered=bool(payload["ordered"]),
            labels=tuple(labels) if labels is not None else None,
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Dataset":
        with open(path) as fh:
            return cls.from_json(fh.read())
