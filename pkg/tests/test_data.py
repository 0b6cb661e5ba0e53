from datetime import datetime, timedelta, timezone
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rumourseq.data import (
    AuthorMeta, DataError, Dataset, EventTimeline, Label, Post, Prediction, decision, sort_timeline,
)

T0 = datetime(2014, 10, 22, 14, 0, tzinfo=timezone.utc)
AUTHOR = AuthorMeta(10, 1, 100, 50, T0 - timedelta(days=400), False)


def post(pid, minutes=0, event="e", label=Label.RUMOUR, text="x"):
    return Post(pid, event, text, T0 + timedelta(minutes=minutes), 100, AUTHOR, (), label)


def test_label_order_and_wire_names():
    assert Label.NON_RUMOUR < Label.RUMOUR
    assert Label.from_wire("rumour") is Label.RUMOUR
    assert Label.from_wire(None) is None
    with pytest.raises(DataError):
        Label.from_wire("maybe")


def test_sort_by_time():
    tl = sort_timeline([post("c", 3), post("a", 1), post("b", 2)])
    assert [p.id for p in tl] == ["a", "b", "c"]


def test_equal_timestamps_break_by_id():
    tl = sort_timeline([post("b", 0), post("a", 0)])
    assert [p.id for p in tl] == ["a", "b"]


def test_empty_timeline_rejected():
    with pytest.raises(DataError):
        sort_timeline([])


def test_mixed_events_rejected_with_ids():
    with pytest.raises(DataError, match="z"):
        sort_timeline([post("a"), post("z", event="other")])


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 1000)), min_size=1, max_size=30, unique_by=lambda t: t[1]),
       st.randoms(use_true_random=False))
def test_sorting_is_idempotent_and_permutation_invariant(spec, rnd):
    posts = [post(str(pid), minutes) for minutes, pid in spec]
    tl = sort_timeline(posts)
    assert sort_timeline(tl.posts) == tl
    shuffled = list(posts)
    rnd.shuffle(shuffled)
    assert sort_timeline(shuffled) == tl


def test_timeline_invariants():
    with pytest.raises(DataError):
        EventTimeline("e", (post("b", 1), post("a", 0)))
    with pytest.raises(DataError):
        EventTimeline("e", (post("a", 0), post("a", 1)))


def test_post_invariants():
    with pytest.raises(DataError):
        post("")
    with pytest.raises(DataError):
        Post("p", "e", None, T0, 1, AUTHOR)
    with pytest.raises(DataError):
        AuthorMeta(-1, 0, 0, 0, T0, False)
    with pytest.raises(DataError):
        Post("p", "e", "", T0, 1, AuthorMeta(0, 0, 0, 0, T0 + timedelta(days=30), False))
    assert post("p", text="").text == ""


def test_dataset_rejects_duplicate_events_and_unlabeled_training():
    tl = sort_timeline([post("a")])
    with pytest.raises(DataError):
        Dataset((tl, tl))
    unlabeled = Dataset((sort_timeline([post("a", label=None)]),))
    with pytest.raises(DataError):
        unlabeled.require_labels()


def test_prediction_and_decision():
    assert decision(0.5) is Label.NON_RUMOUR
    assert decision(0.5000001) is Label.RUMOUR
    with pytest.raises(ValueError):
        Prediction("p", Label.RUMOUR, 1.5)
