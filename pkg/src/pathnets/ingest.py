"""Check-in TSV ingestion: one user's days of venue-category visits as paths.

Input rows carry (user id, venue id, venue category id, venue category name,
latitude, longitude, UTC timestamp, timezone offset in minutes).  A path is
one user's check-ins on one local calendar day (UTC shifted by the offset),
ordered by time; a user's observation is the multiset of their day-paths.
Low-level venue categories are mapped to top-level ones through a two-column
TSV.  Ingestion is deterministic: re-running produces byte-identical JSON.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Optional, Sequence

import numpy as np

from .core import Dataset, SpaceBounds, canonicalize
from .distances import steinhaus

TIME_FORMAT = "%a %b %d %H:%M:%S %z %Y"
COLUMNS = 8


@dataclass(frozen=True)
class CheckinRecord:
    user_id: str
    venue_category: str
    utc_time: datetime
    tz_offset_minutes: int

    def __post_init__(self):
        if not -900 <= self.tz_offset_minutes <= 900:
            raise ValueError(f"timezone offset {self.tz_offset_minutes} out of range")

    @property
    def local_time(self) -> datetime:
        return self.utc_time + timedelta(minutes=self.tz_offset_minutes)


@dataclass(frozen=True)
class IngestConfig:
    """Category mapping and the filtering thresholds."""

    category_map: dict
    min_path_len: int = 2
    min_paths_per_user: int = 10

    def __post_init__(self):
        if self.min_path_len < 1 or self.min_paths_per_user < 1:
            raise ValueError("filter thresholds must be at least 1")


def load_category_map(path) -> dict:
    """Two-column TSV mapping low-level category names to top-level ones."""
    mapping = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise ValueError(f"category map line {lineno}: expected 2 columns, got {len(row)}")
            mapping[row[0]] = row[1]
    return mapping


def parse_checkins(path) -> list:
    """Parse the raw TSV into records; malformed rows fail with line numbers."""
    records = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != COLUMNS:
                raise ValueError(f"line {lineno}: expected {COLUMNS} columns, got {len(row)}")
            user, _venue, _cat_id, cat_name, _lat, _lon, utc, offset = row
            try:
                when = datetime.strptime(utc.strip(), TIME_FORMAT)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad timestamp {utc!r}: {exc}") from None
            try:
                offset_min = int(offset)
            except ValueError:
                raise ValueError(f"line {lineno}: bad timezone offset {offset!r}") from None
            try:
                records.append(CheckinRecord(user, cat_name, when, offset_min))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
    return records


def ingest_records(records: Sequence[CheckinRecord], cfg: IngestConfig) -> Dataset:
    """Sessionise records into one interaction multiset per retained user."""
    unmapped = sorted({r.venue_category for r in records if r.venue_category not in cfg.category_map})
    if unmapped:
        raise ValueError(f"unmapped venue categories: {', '.join(unmapped)}")

    by_user_day: dict = {}
    for idx, rec in enumerate(records):
        key = (rec.user_id, rec.local_time.date())
        by_user_day.setdefault(key, []).append((rec.utc_time, idx, cfg.category_map[rec.venue_category]))

    by_user: dict = {}
    for (user, day), entries in by_user_day.items():
        entries.sort(key=lambda t: (t[0], t[1]))  # stable within identical timestamps
        path = tuple(cat for _, _, cat in entries)
        if len(path) >= cfg.min_path_len:
            by_user.setdefault(user, {})[day] = path

    kept = {
        user: [days[d] for d in sorted(days)]
        for user, days in by_user.items()
        if len(days) >= cfg.min_paths_per_user
    }
    if not kept:
        raise ValueError("no users survive the filtering thresholds")

    labels = sorted({cat for paths in kept.values() for p in paths for cat in p})
    index = {cat: i for i, cat in enumerate(labels)}
    observations = []
    for user in sorted(kept):
        obs = canonicalize(tuple(tuple(index[c] for c in p) for p in kept[user]))
        observations.append(obs)

    K = max(len(p) for obs in observations for p in obs)
    L = max(len(obs) for obs in observations)
    bounds = SpaceBounds(len(labels), K, L)
    return Dataset(tuple(observations), bounds, ordered=False, labels=tuple(labels))


def ingest(tsv_path, cfg: IngestConfig) -> Dataset:
    """Parse and sessionise a check-in TSV (see :func:`ingest_records`)."""
    return ingest_records(parse_checkins(tsv_path), cfg)


def select_subset(
    dataset: Dataset, m: int, inner: str = "lsp", include_center: bool = False
) -> Dataset:
    """Keep the tightest neighbourhood of size m under the Steinhaus distance.

    Scores every observation by the total normalised distance to its m
    nearest neighbours (excluding itself unless ``include_center``) and
    returns the neighbourhood of the best-scoring one.  Ties break to the
    smallest index.
    """
    n = len(dataset)
    if m < 1 or m > n:
        raise ValueError(f"subset size {m} invalid for a sample of {n}")
    if m == n:
        return dataset
    obs = dataset.observations
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = steinhaus(obs[i], obs[j], inner)

    best_score = None
    best_members: Optional[list] = None
    for i in range(n):
        others = [(D[i, j], j) for j in range(n) if include_center or j != i]
        others.sort()
        members = [j for _, j in others[:m]]
        score = sum(D[i, j] for j in members)
        if best_score is None or score < best_score:
            best_score = score
            best_members = members
    selected = sorted(best_members)
    return Dataset(
        tuple(obs[i] for i in selected),
        dataset.bounds,
        ordered=dataset.ordered,
        labels=dataset.labels,
    )
