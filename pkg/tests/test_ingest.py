import json
import logging
from datetime import datetime, timedelta, timezone

import pytest

from rumourseq import ingest
from rumourseq.data import AuthorMeta, DataError, Dataset, Label, Post, sort_timeline

from synthetic import make_dataset, write_pheme

T0 = datetime(2015, 3, 24, 9, 0, tzinfo=timezone.utc)
AUTHOR = AuthorMeta(1, 2, 3, 4, T0 - timedelta(days=10), True)


def post(pid, rt=100, minutes=0, label=Label.RUMOUR, text="t", event="e"):
    return Post(pid, event, text, T0 + timedelta(minutes=minutes), rt, AUTHOR, (), label)


def test_pheme_round_trip(tmp_path):
    ds = make_dataset(3, sizes=(12, 15))
    loaded = ingest.load_pheme(write_pheme(ds, tmp_path / "pheme"))
    assert loaded.event_ids == ds.event_ids
    for a, b in zip(loaded.events, ds.events):
        assert [p.id for p in a] == [p.id for p in b]
        assert [p.label for p in a] == [p.label for p in b]
        assert [p.text for p in a] == [p.text for p in b]
        assert [p.reply_texts for p in a] == [p.reply_texts for p in b]


def test_pheme_hidden_files_ignored(tmp_path):
    root = write_pheme(make_dataset(1, sizes=(10,)), tmp_path / "pheme")
    (root / ".DS_Store").write_text("junk")
    (root / "event0" / "rumours" / ".hidden").mkdir(parents=True, exist_ok=True)
    assert len(ingest.load_pheme(root)) == 10


def test_pheme_malformed_json_names_file(tmp_path):
    root = write_pheme(make_dataset(1, sizes=(10,)), tmp_path / "pheme")
    victim = next(root.rglob("source-tweet/*.json"))
    victim.write_text("{not json")
    with pytest.raises(DataError, match=victim.name):
        ingest.load_pheme(root)


def test_pheme_missing_source_names_thread(tmp_path):
    root = write_pheme(make_dataset(1, sizes=(10,)), tmp_path / "pheme")
    victim = next(root.rglob("source-tweet/*.json"))
    thread = victim.parent.parent
    victim.unlink()
    with pytest.raises(DataError, match=thread.name):
        ingest.load_pheme(root)


def test_pheme_empty_root(tmp_path):
    with pytest.raises(DataError):
        ingest.load_pheme(tmp_path)
    with pytest.raises(DataError):
        ingest.load_pheme(tmp_path / "absent")


def test_pheme_missing_user_fields_default_with_warning(tmp_path, caplog):
    root = write_pheme(make_dataset(1, sizes=(10,)), tmp_path / "pheme")
    victim = next(root.rglob("source-tweet/*.json"))
    tweet = json.loads(victim.read_text())
    del tweet["user"]["listed_count"]
    victim.write_text(json.dumps(tweet))
    with caplog.at_level(logging.WARNING, logger="rumourseq"):
        ds = ingest.load_pheme(root)
    assert "listed_count" in caplog.text
    target = next(p for p in ds.posts() if p.id == tweet["id_str"])
    assert target.author.listed_count == 0


def test_normalized_round_trip(tmp_path):
    ds = make_dataset(2, sizes=(11, 13))
    extra = sort_timeline([post("x1", text=""), post("x2", minutes=1, label=None)])
    ds = Dataset(ds.events + (extra,))
    path = tmp_path / "data.jsonl"
    ingest.export_normalized(ds, path)
    back = ingest.load_normalized(path)
    assert back == Dataset(tuple(sorted(ds.events, key=lambda t: t.event_id)))
    ingest.export_normalized(back, tmp_path / "a.jsonl")
    ingest.export_normalized(ingest.load_normalized(tmp_path / "a.jsonl"), tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_normalized_timestamps_are_utc_iso(tmp_path):
    path = tmp_path / "d.jsonl"
    ingest.export_normalized(Dataset((sort_timeline([post("a")]),)), path)
    rec = json.loads(path.read_text())
    assert rec["created_at"] == "2015-03-24T09:00:00+00:00"


def _write_records(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records))


def test_normalized_missing_text_reports_line(tmp_path):
    good = ingest.post_to_record(post("a"))
    bad = dict(ingest.post_to_record(post("b")))
    del bad["text"]
    path = tmp_path / "d.jsonl"
    _write_records(path, [good, bad])
    with pytest.raises(DataError, match=r":2:"):
        ingest.load_normalized(path)


def test_normalized_duplicate_id(tmp_path):
    path = tmp_path / "d.jsonl"
    _write_records(path, [ingest.post_to_record(post("a")), ingest.post_to_record(post("a", minutes=5))])
    with pytest.raises(DataError, match="duplicate"):
        ingest.load_normalized(path)


def test_retweet_filter():
    tl = sort_timeline([post("a", 99), post("b", 100, 1), post("c", 150, 2)])
    kept = ingest.filter_by_retweets(Dataset((tl,)), 100)
    assert [p.id for p in kept.posts()] == ["b", "c"]
    assert len(ingest.filter_by_retweets(Dataset((tl,)), 1000)) == 0


def test_decile_sizes():
    assert [b - a for a, b in ingest.decile_bounds(20)] == [2] * 10
    assert [b - a for a, b in ingest.decile_bounds(23)] == [3, 3, 3] + [2] * 7
    with pytest.raises(ValueError):
        ingest.decile_bounds(9)


@pytest.mark.parametrize("n", range(10, 80))
def test_deciles_cover_timeline_in_order(n):
    bounds = ingest.decile_bounds(n)
    assert bounds[0][0] == 0 and bounds[-1][1] == n
    assert all(b[1] == c[0] for b, c in zip(bounds, bounds[1:]))
    sizes = [b - a for a, b in bounds]
    assert max(sizes) - min(sizes) <= 1


def test_rumour_ratios():
    labels = [Label.RUMOUR] * 10 + [Label.NON_RUMOUR] * 10
    tl = sort_timeline([post(f"p{i:02d}", minutes=i, label=y) for i, y in enumerate(labels)])
    assert ingest.rumour_ratio_by_decile(tl) == [1.0] * 5 + [0.0] * 5


def test_summary_table():
    ds = make_dataset(0, sizes=(10, 20))
    rows = ingest.summary_table(ds)
    assert rows[-1][0] == "Total"
    assert rows[-1][3] == 30
    assert all(r + nr == t for _, r, nr, t in rows)
    text = ingest.format_summary(rows)
    assert text.splitlines()[0] == "Event\tRumours\tNon-rumours\tTotal"
