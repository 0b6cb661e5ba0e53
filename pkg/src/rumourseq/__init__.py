"""Sequential rumour detection over breaking-news timelines."""

from .data import AuthorMeta, Dataset, EventTimeline, Label, Post, Prediction, sort_timeline
from .kernels import backend_name

__all__ = [
    "AuthorMeta", "Dataset", "EventTimeline", "Label", "Post", "Prediction",
    "backend_name", "sort_timeline",
]
__version__ = "0.1.0"
