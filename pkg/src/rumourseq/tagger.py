"""Tweet tokenization and a small deterministic part-of-speech tagger.

The built-in tagger combines Twitter-specific rules (mentions, hashtags,
URLs, retweet markers, emoticons), a closed-class lexicon and suffix rules.
An external ``token<TAB>tag`` file can override the lexical tags.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

PENN_TAGS = (
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN",
    "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP",
    "SYM", "TO", "UH", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP",
    "WP$", "WRB",
)
TWITTER_TAGS = ("USR", "HT", "URL", "RT", "EMO")
TAGSET = PENN_TAGS + TWITTER_TAGS
TAG_INDEX = {t: i for i, t in enumerate(TAGSET)}

EMOTICONS = (
    r"[:;=8][\-o\*']?[\)\]\(\[dDpP/\\|@3]",
    r"[\)\]\(\[dDpP/\\|@3][\-o\*']?[:;=8]",
    r"<3",
    r"\^_*\^",
    r"[xX][dD]\b",
)
_EMOTICON = "(?:" + "|".join(EMOTICONS) + ")"
_EMOTICON_RE = re.compile(_EMOTICON + r"\Z")
_URL = r"(?:https?://|www\.)\S+"

_TOKEN_RE = re.compile(
    "|".join(
        (
            _URL,
            r"@\w+",
            r"#\w+",
            r"(?<!\S)" + _EMOTICON + r"(?=\s|$)",
            r"\d+(?:[.,:]\d+)*",
            r"\w+(?:['’\-]\w+)*",
            r"[^\w\s]",
        )
    ),
    re.UNICODE,
)

_LEXICON = {
    **dict.fromkeys("a an the this that these those every each no some any another".split(), "DT"),
    **dict.fromkeys(
        "of in on at by for from with about against between into through during before after "
        "above below under over near since until upon via within without across toward towards "
        "among amid despite per than as if because while although though whether".split(),
        "IN",
    ),
    **dict.fromkeys("i you he she it we they me him us them one".split(), "PRP"),
    **dict.fromkeys("my your his her its our their".split(), "PRP$"),
    **dict.fromkeys("can could may might must shall should will would".split(), "MD"),
    **dict.fromkeys("and or but nor yet so plus".split(), "CC"),
    **dict.fromkeys("who whom".split(), "WP"),
    **dict.fromkeys("how where when why".split(), "WRB"),
    "what": "WP", "which": "WDT", "whose": "WP$", "to": "TO", "there": "EX",
    "not": "RB", "n't": "RB", "very": "RB", "also": "RB", "now": "RB", "just": "RB",
    "still": "RB", "already": "RB", "here": "RB", "again": "RB",
    "is": "VBZ", "has": "VBZ", "does": "VBZ", "'s": "POS",
    "are": "VBP", "am": "VBP", "have": "VBP", "do": "VBP",
    "was": "VBD", "were": "VBD", "had": "VBD", "did": "VBD", "said": "VBD",
    "be": "VB", "been": "VBN", "being": "VBG",
    "more": "JJR", "less": "JJR", "most": "JJS", "least": "JJS",
    "all": "PDT", "both": "PDT", "half": "PDT",
    "oh": "UH", "yes": "UH", "wow": "UH", "omg": "UH", "lol": "UH", "please": "UH",
    "up": "RP", "off": "RP", "out": "RP", "down": "RP",
}

# (suffix, tag, minimum word length), first match wins
_SUFFIX_RULES = (
    ("ing", "VBG", 5),
    ("ed", "VBD", 4),
    ("ly", "RB", 4),
    ("est", "JJS", 5),
    ("ous", "JJ", 5),
    ("ful", "JJ", 5),
    ("able", "JJ", 6),
    ("ible", "JJ", 6),
    ("ive", "JJ", 5),
    ("al", "JJ", 5),
    ("ss", "NN", 3),
    ("s", "NNS", 3),
)


@dataclass(frozen=True)
class TokenTag:
    token: str
    tag: str


def tokenize(text: str) -> list[str]:
    """Split tweet text, keeping mentions, hashtags, URLs and emoticons whole."""
    return _TOKEN_RE.findall(text)


def _rule_tag(token: str) -> Optional[str]:
    if token.startswith("@") and len(token) > 1:
        return "USR"
    if token.startswith("#") and len(token) > 1:
        return "HT"
    if re.match(_URL, token, re.IGNORECASE):
        return "URL"
    if token == "RT":
        return "RT"
    if _EMOTICON_RE.match(token):
        return "EMO"
    return None


def _lexical_tag(token: str) -> str:
    low = token.lower()
    if low in _LEXICON:
        return _LEXICON[low]
    if re.fullmatch(r"\d+(?:[.,:]\d+)*", token):
        return "CD"
    if not any(ch.isalnum() for ch in token):
        return "SYM"
    if token[0].isupper():
        return "NNP"
    for suffix, tag, min_len in _SUFFIX_RULES:
        if len(low) >= min_len and low.endswith(suffix):
            return tag
    return "NN"


class Tagger:
    """Rule + lexicon + suffix tagger with an optional override table."""

    def __init__(self, overrides: Optional[Mapping[str, str]] = None):
        overrides = dict(overrides or {})
        bad = {t for t in overrides.values() if t not in TAG_INDEX}
        if bad:
            raise ValueError(f"override tags outside the tagset: {sorted(bad)}")
        self.overrides = overrides

    @classmethod
    def from_file(cls, path) -> "Tagger":
        table = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected token<TAB>tag")
                table[parts[0]] = parts[1]
        return cls(table)

    def tag(self, tokens: list[str]) -> list[TokenTag]:
        out = []
        for tok in tokens:
            tag = _rule_tag(tok)
            if tag is None:
                tag = self.overrides.get(tok) or self.overrides.get(tok.lower()) or _lexical_tag(tok)
            out.append(TokenTag(tok, tag))
        return out


_DEFAULT = Tagger()


def tag(tokens: list[str], tagger: Optional[Tagger] = None) -> list[TokenTag]:
    return (tagger or _DEFAULT).tag(tokens)


def pos_count_vector(tags: list[TokenTag]) -> np.ndarray:
    counts = np.zeros(len(TAGSET), dtype=np.int64)
    for tt in tags:
        counts[TAG_INDEX[tt.tag]] += 1
    return counts
