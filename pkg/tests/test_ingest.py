import os

import pytest

from pathnets.core import Dataset, SpaceBounds
from pathnets.ingest import (
    IngestConfig,
    ingest,
    load_category_map,
    parse_checkins,
    select_subset,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
CHECKINS = os.path.join(FIXTURES, "checkins.tsv")
CATEGORIES = os.path.join(FIXTURES, "categories.tsv")

# Derived by hand from the fixture: user u1 at offset -240 has the UTC
# Apr-3 01:00 check-in pulled back onto local Apr 2 (path Arts,Food,Shop),
# one single-check-in day dropped, and an identical-timestamp pair kept in
# row order; user u2 at offset +600 has UTC Apr 3 23:50 and Apr 4 00:10
# merged onto local Apr 4, and UTC Apr 4 14:30 pushed to local Apr 5.
EXPECTED_JSON = (
    '{"K":3,"L":2,"V":4,"format_version":1,'
    '"labels":["Arts","Food","Outdoors","Shop"],'
    '"observations":[[[1,1],[0,1,3]],[[1,3],[3,0,2]]],"ordered":false}'
)


def fixture_config(**kw):
    defaults = dict(min_path_len=2, min_paths_per_user=2)
    defaults.update(kw)
    return IngestConfig(load_category_map(CATEGORIES), **defaults)


def test_ingest_fixture_byte_exact():
    ds = ingest(CHECKINS, fixture_config())
    assert ds.to_json() == EXPECTED_JSON


def test_ingest_deterministic():
    cfg = fixture_config()
    assert ingest(CHECKINS, cfg).to_json() == ingest(CHECKINS, cfg).to_json()


def test_ingest_filters():
    ds = ingest(CHECKINS, fixture_config())
    assert all(len(p) >= 2 for obs in ds.observations for p in obs)
    assert all(len(obs) >= 2 for obs in ds.observations)
    # raising the user threshold drops everyone
    with pytest.raises(ValueError):
        ingest(CHECKINS, fixture_config(min_paths_per_user=5))


def test_unmapped_category_error(tmp_path):
    bad_map = tmp_path / "map.tsv"
    bad_map.write_text("Jazz Club\tArts\n")
    cfg = IngestConfig(load_category_map(bad_map), 2, 1)
    with pytest.raises(ValueError) as err:
        ingest(CHECKINS, cfg)
    msg = str(err.value)
    assert "Coffee Shop" in msg and "Mall" in msg and "Park" in msg


def test_malformed_rows(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("u1\tv1\tc1\tX\t0\t0\tnot a time\t0\n")
    with pytest.raises(ValueError, match="line 1"):
        parse_checkins(bad)
    bad.write_text("u1\tv1\tc1\tX\t0\t0\n")
    with pytest.raises(ValueError, match="line 1"):
        parse_checkins(bad)
    bad.write_text(
        "u1\tv1\tc1\tX\t0\t0\tMon Apr 02 12:00:00 +0000 2012\t-240\n"
        "u1\tv1\tc1\tX\t0\t0\tMon Apr 02 12:00:00 +0000 2012\tabc\n"
    )
    with pytest.raises(ValueError, match="line 2"):
        parse_checkins(bad)
    bad.write_text("u1\tv1\tc1\tX\t0\t0\tMon Apr 02 12:00:00 +0000 2012\t2000\n")
    with pytest.raises(ValueError, match="line 1"):
        parse_checkins(bad)


def _toy_dataset():
    near = (((0, 1), (1, 2)),) * 0  # placeholder, built below
    observations = (
        ((0, 1), (1, 2)),
        ((0, 1), (1, 2)),
        ((0, 1), (2, 2)),
        ((3, 3, 3), (3, 3)),  # outlier
    )
    return Dataset(observations, SpaceBounds(4, 3, 2), ordered=False)


def test_select_subset_whole_dataset():
    ds = _toy_dataset()
    assert select_subset(ds, len(ds), "lsp").observations == ds.observations


def test_select_subset_excludes_outlier():
    ds = _toy_dataset()
    kept = select_subset(ds, len(ds) - 1, "lsp")
    assert ((3, 3, 3), (3, 3)) not in kept.observations
    assert len(kept) == 3


def test_select_subset_order_invariant():
    ds = _toy_dataset()
    shuffled = Dataset(
        tuple(reversed(ds.observations)), ds.bounds, ordered=False
    )
    a = sorted(select_subset(ds, 3, "lsp").observations)
    b = sorted(select_subset(shuffled, 3, "lsp").observations)
    assert a == b


def test_select_subset_errors():
    ds = _toy_dataset()
    with pytest.raises(ValueError):
        select_subset(ds, 0, "lsp")
    with pytest.raises(ValueError):
        select_subset(ds, len(ds) + 1, "lsp")
