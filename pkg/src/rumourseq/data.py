"""Core domain types: posts, per-event timelines, datasets and predictions."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Iterable, Optional

# Author accounts created slightly after the post timestamp are tolerated
# (Twitter clocks are not perfectly synchronised).
CLOCK_SKEW = timedelta(days=1)


class DataError(ValueError):
    """Input data violates a structural invariant."""


class Label(enum.IntEnum):
    NON_RUMOUR = 0
    RUMOUR = 1

    @property
    def wire(self) -> str:
        return "rumour" if self is Label.RUMOUR else "non-rumour"

    @classmethod
    def from_wire(cls, value: Optional[str]) -> Optional["Label"]:
        if value is None:
            return None
        try:
            return {"rumour": cls.RUMOUR, "non-rumour": cls.NON_RUMOUR}[value]
        except KeyError:
            raise DataError(f"unknown label {value!r}") from None


LABELS = (Label.NON_RUMOUR, Label.RUMOUR)


@dataclass(frozen=True)
class AuthorMeta:
    statuses_count: int
    listed_count: int
    followers_count: int
    following_count: int
    created_at: datetime
    verified: bool

    def __post_init__(self):
        for name in ("statuses_count", "listed_count", "followers_count", "following_count"):
            if getattr(self, name) < 0:
                raise DataError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.created_at.tzinfo is None:
            raise DataError("author created_at must be timezone-aware")


@dataclass(frozen=True)
class Post:
    id: str
    event_id: str
    text: str
    created_at: datetime
    retweet_count: int
    author: AuthorMeta
    reply_texts: tuple[str, ...] = ()
    label: Optional[Label] = None

    def __post_init__(self):
        if not self.id:
            raise DataError("post id must be non-empty")
        if self.text is None:
            raise DataError(f"post {self.id}: text is absent")
        if self.retweet_count < 0:
            raise DataError(f"post {self.id}: negative retweet_count")
        if self.created_at.tzinfo is None:
            raise DataError(f"post {self.id}: created_at must be timezone-aware")
        if self.author.created_at > self.created_at + CLOCK_SKEW:
            raise DataError(f"post {self.id}: author account created after the post")
        if not isinstance(self.reply_texts, tuple):
            object.__setattr__(self, "reply_texts", tuple(self.reply_texts))


@dataclass(frozen=True)
class EventTimeline:
    event_id: str
    posts: tuple[Post, ...]

    def __post_init__(self):
        if not self.posts:
            raise DataError(f"timeline {self.event_id!r} is empty")
        seen = set()
        for p in self.posts:
            if p.event_id != self.event_id:
                raise DataError(f"post {p.id} belongs to {p.event_id!r}, not {self.event_id!r}")
            if p.id in seen:
                raise DataError(f"duplicate post id {p.id!r} in event {self.event_id!r}")
            seen.add(p.id)
        keys = [_order_key(p) for p in self.posts]
        if keys != sorted(keys):
            raise DataError(f"timeline {self.event_id!r} is not sorted by (created_at, id)")

    def __len__(self):
        return len(self.posts)

    def __iter__(self):
        return iter(self.posts)

    @property
    def labels(self) -> list[Optional[Label]]:
        return [p.label for p in self.posts]

    def require_labels(self) -> list[Label]:
        missing = [p.id for p in self.posts if p.label is None]
        if missing:
            raise DataError(f"event {self.event_id!r} has unlabeled posts: {missing[:5]}")
        return [p.label for p in self.posts]


@dataclass(frozen=True)
class Dataset:
    events: tuple[EventTimeline, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.events, tuple):
            object.__setattr__(self, "events", tuple(self.events))
        ids = [e.event_id for e in self.events]
        if len(set(ids)) != len(ids):
            raise DataError(f"duplicate event ids: {ids}")

    def __len__(self):
        return sum(len(e) for e in self.events)

    @property
    def event_ids(self) -> list[str]:
        return [e.event_id for e in self.events]

    def event(self, event_id: str) -> EventTimeline:
        for e in self.events:
            if e.event_id == event_id:
                return e
        raise KeyError(event_id)

    def posts(self) -> Iterable[Post]:
        for e in self.events:
            yield from e.posts

    def require_labels(self) -> None:
        for e in self.events:
            e.require_labels()


@dataclass(frozen=True)
class Prediction:
    post_id: str
    label: Label
    score: float

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"prediction score {self.score} outside [0, 1]")


def _order_key(post: Post):
    return (post.created_at, post.id)


def sort_timeline(posts: Iterable[Post]) -> EventTimeline:
    """Order posts by (timestamp, id) into a single event timeline."""
    posts = list(posts)
    if not posts:
        raise DataError("cannot build a timeline from zero posts")
    event_ids = {p.event_id for p in posts}
    if len(event_ids) > 1:
        first = posts[0].event_id
        offending = sorted(p.id for p in posts if p.event_id != first)
        raise DataError(f"posts span several events {sorted(event_ids)}; offending ids: {offending}")
    return EventTimeline(posts[0].event_id, tuple(sorted(posts, key=_order_key)))


def decision(score: float, threshold: float = 0.5) -> Label:
    """Map a RUMOUR confidence to a label; an exact tie goes to NON_RUMOUR."""
    return Label.RUMOUR if score > threshold else Label.NON_RUMOUR
