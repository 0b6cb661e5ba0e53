"""Readers and writers for the PHEME rumour/non-rumour release and the
normalized one-record-per-line format, plus sampling and decile helpers."""

from __future__ import annotations

import json
import logging
import os
from collections import defaultdict
from datetime import datetime, timezone
from pathlib import Path

from .data import AuthorMeta, DataError, Dataset, EventTimeline, Label, Post, sort_timeline

log = logging.getLogger(__name__)

TWITTER_TIME = "%a %b %d %H:%M:%S %z %Y"
LABEL_DIRS = {"rumours": Label.RUMOUR, "non-rumours": Label.NON_RUMOUR}
SOURCE_DIRS = ("source-tweet", "source-tweets")
RECORD_KEYS = ("id", "event_id", "text", "created_at", "retweet_count", "author", "reply_texts", "label")
AUTHOR_KEYS = ("statuses_count", "listed_count", "followers_count", "following_count", "created_at", "verified")

# PHEME user-object key -> AuthorMeta field
_USER_COUNTS = {
    "statuses_count": "statuses_count",
    "listed_count": "listed_count",
    "followers_count": "followers_count",
    "friends_count": "following_count",
}

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def parse_twitter_time(value: str) -> datetime:
    return datetime.strptime(value, TWITTER_TIME).astimezone(timezone.utc)


def _visible(path: Path):
    return sorted(p for p in path.iterdir() if not p.name.startswith("."))


def _read_json(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DataError(f"malformed JSON in {path}: {exc}") from exc


def _author_from_user(user: dict, where: Path) -> AuthorMeta:
    counts = {}
    for src, dst in _USER_COUNTS.items():
        value = user.get(src)
        if value is None:
            log.warning("%s: user.%s missing, defaulting to 0", where, src)
            value = 0
        counts[dst] = int(value)
    if user.get("created_at"):
        created = parse_twitter_time(user["created_at"])
    else:
        log.warning("%s: user.created_at missing, defaulting to the epoch", where)
        created = EPOCH
    verified = user.get("verified")
    if verified is None:
        log.warning("%s: user.verified missing, defaulting to false", where)
        verified = False
    return AuthorMeta(created_at=created, verified=bool(verified), **counts)


def _thread_post(thread: Path, event_id: str, label: Label) -> Post:
    source_dir = next((thread / d for d in SOURCE_DIRS if (thread / d).is_dir()), None)
    sources = [p for p in _visible(source_dir) if p.suffix == ".json"] if source_dir else []
    if len(sources) != 1:
        raise DataError(f"thread {thread} must contain exactly one source tweet, found {len(sources)}")
    tweet = _read_json(sources[0])
    replies = []
    reactions = thread / "reactions"
    if reactions.is_dir():
        for path in _visible(reactions):
            if path.suffix == ".json":
                replies.append(_read_json(path).get("text") or "")
    post_id = str(tweet.get("id_str") or tweet.get("id") or sources[0].stem)
    if "created_at" not in tweet:
        raise DataError(f"{sources[0]}: source tweet has no created_at")
    return Post(
        id=post_id,
        event_id=event_id,
        text=tweet.get("text") or "",
        created_at=parse_twitter_time(tweet["created_at"]),
        retweet_count=int(tweet.get("retweet_count") or 0),
        author=_author_from_user(tweet.get("user") or {}, sources[0]),
        reply_texts=tuple(replies),
        label=label,
    )


def load_pheme(root) -> Dataset:
    """Load the PHEME rumour/non-rumour directory tree.

    Each event folder holds ``rumours/`` and ``non-rumours/``; each thread
    folder within contributes its source tweet as one post, with the texts of
    its reactions kept as replies.
    """
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"{root} is not a directory")
    events = []
    for event_dir in _visible(root):
        if not event_dir.is_dir():
            continue
        label_dirs = [event_dir / name for name in LABEL_DIRS if (event_dir / name).is_dir()]
        if not label_dirs:
            continue
        posts = []
        for label_dir in label_dirs:
            label = LABEL_DIRS[label_dir.name]
            for thread in _visible(label_dir):
                if thread.is_dir():
                    posts.append(_thread_post(thread, event_dir.name, label))
        if posts:
            events.append(sort_timeline(posts))
    if not events:
        raise DataError(f"no events found under {root}")
    return Dataset(tuple(events))


def _format_time(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat()


def _parse_time(value: str) -> datetime:
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    ts = datetime.fromisoformat(value)
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {value!r} lacks a UTC offset")
    return ts.astimezone(timezone.utc)


def post_to_record(post: Post) -> dict:
    a = post.author
    return {
        "id": post.id,
        "event_id": post.event_id,
        "text": post.text,
        "created_at": _format_time(post.created_at),
        "retweet_count": post.retweet_count,
        "author": {
            "statuses_count": a.statuses_count,
            "listed_count": a.listed_count,
            "followers_count": a.followers_count,
            "following_count": a.following_count,
            "created_at": _format_time(a.created_at),
            "verified": a.verified,
        },
        "reply_texts": list(post.reply_texts),
        "label": post.label.wire if post.label is not None else None,
    }


def record_to_post(record: dict) -> Post:
    if not isinstance(record, dict):
        raise ValueError("record is not an object")
    if set(record) != set(RECORD_KEYS):
        missing = sorted(set(RECORD_KEYS) - set(record))
        extra = sorted(set(record) - set(RECORD_KEYS))
        raise ValueError(f"bad keys (missing {missing}, unexpected {extra})")
    author = record["author"]
    if not isinstance(author, dict) or set(author) != set(AUTHOR_KEYS):
        raise ValueError(f"author must have exactly the keys {list(AUTHOR_KEYS)}")
    if not isinstance(record["text"], str):
        raise ValueError("text must be a string")
    return Post(
        id=str(record["id"]),
        event_id=str(record["event_id"]),
        text=record["text"],
        created_at=_parse_time(record["created_at"]),
        retweet_count=int(record["retweet_count"]),
        author=AuthorMeta(
            statuses_count=int(author["statuses_count"]),
            listed_count=int(author["listed_count"]),
            followers_count=int(author["followers_count"]),
            following_count=int(author["following_count"]),
            created_at=_parse_time(author["created_at"]),
            verified=bool(author["verified"]),
        ),
        reply_texts=tuple(record["reply_texts"]),
        label=Label.from_wire(record["label"]),
    )


def load_normalized(path) -> Dataset:
    grouped: dict[str, list[Post]] = defaultdict(list)
    seen: dict[str, set] = defaultdict(set)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                post = record_to_post(json.loads(line))
            except (ValueError, TypeError, KeyError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
            if post.id in seen[post.event_id]:
                raise DataError(f"{path}:{lineno}: duplicate post id {post.id!r} in event {post.event_id!r}")
            seen[post.event_id].add(post.id)
            grouped[post.event_id].append(post)
    return Dataset(tuple(sort_timeline(grouped[e]) for e in sorted(grouped)))


def export_normalized(ds: Dataset, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for post in ds.posts():
            fh.write(json.dumps(post_to_record(post), ensure_ascii=False) + "\n")
    os.replace(tmp, path)


def filter_by_retweets(ds: Dataset, threshold: int) -> Dataset:
    """Keep posts retweeted at least ``threshold`` times; drop emptied events."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    events = []
    for tl in ds.events:
        kept = tuple(p for p in tl.posts if p.retweet_count >= threshold)
        if kept:
            events.append(EventTimeline(tl.event_id, kept))
    return Dataset(tuple(events))


def decile_bounds(n: int) -> list[tuple[int, int]]:
    """Half-open index ranges of ten contiguous slices; the first ``n % 10`` get one extra."""
    if n < 10:
        raise ValueError(f"decile partition needs at least 10 posts, got {n}")
    q, r = divmod(n, 10)
    bounds, start = [], 0
    for d in range(10):
        size = q + 1 if d < r else q
        bounds.append((start, start + size))
        start += size
    return bounds


def decile_partition(tl: EventTimeline) -> list[tuple[Post, ...]]:
    return [tl.posts[a:b] for a, b in decile_bounds(len(tl))]


def rumour_ratio_by_decile(tl: EventTimeline) -> list[float]:
    labels = tl.require_labels()
    return [
        sum(1 for y in labels[a:b] if y is Label.RUMOUR) / (b - a)
        for a, b in decile_bounds(len(labels))
    ]


def summary_table(ds: Dataset) -> list[tuple[str, int, int, int]]:
    """Per-event (name, rumours, non-rumours, total) rows, plus a Total row."""
    rows = []
    for tl in ds.events:
        r = sum(1 for p in tl.posts if p.label is Label.RUMOUR)
        nr = sum(1 for p in tl.posts if p.label is Label.NON_RUMOUR)
        rows.append((tl.event_id, r, nr, len(tl)))
    rows.append(("Total", sum(x[1] for x in rows), sum(x[2] for x in rows), sum(x[3] for x in rows)))
    return rows


def format_summary(rows) -> str:
    lines = ["Event\tRumours\tNon-rumours\tTotal"]
    for name, r, nr, total in rows:
        pr = 100.0 * r / total if total else 0.0
        pnr = 100.0 * nr / total if total else 0.0
        lines.append(f"{name}\t{r:,} ({pr:.1f}%)\t{nr:,} ({pnr:.1f}%)\t{total:,}")
    return "\n".join(lines) + "\n"
