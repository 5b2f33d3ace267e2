"""Closed whitespace-symbol vocabulary shared by the synthesizer and the language model."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

PAD = "<pad>"
BOA = "<boa>"  # reserved begin-of-answer marker; not emitted by any assembly path
EOA = "<eoa>"
SIL = "<sil>"  # silence id returned by the spectral decoder for all-zero segments

SPECIAL_TOKENS = (PAD, BOA, EOA, SIL)

# Words usable inside question prompts (never synthesized into utterances).
QUESTION_WORDS = (
    "what", "did", "the", "speaker", "say", "?",
    "sound", "is", "this", "color", "person", "a",
)

# Binary keyword groups: each utterance carries exactly one word of each group,
# and that word doubles as the task label, so the answer occurs in the audio.
COLOR_WORDS = ("red", "blue")
GENDER_WORDS = ("man", "woman")

FILLER_WORDS = (
    "cat", "dog", "sun", "moon", "tree", "rock",
    "wind", "rain", "fire", "snow", "star", "leaf",
)

# Nine answer verbs for the non-speech sound classes.
SOUND_WORDS = (
    "rises", "falls", "hisses", "warbles", "ticks",
    "hums", "buzzes", "rings", "wobbles",
)

_TOKEN_RE = re.compile(r"<[a-z]+>|[a-z']+|\?")


class VocabularyError(ValueError):
    """Raised for unknown symbols or ids."""


@dataclass(frozen=True)
class Vocabulary:
    """Dense id <-> symbol table with pad/boa/eoa/silence specials at the front.

    Ids are the indices into ``tokens``; specials occupy the first positions so
    content ids form one contiguous block.
    """

    tokens: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.tokens) < 8:
            raise VocabularyError(f"vocabulary needs at least 8 tokens, got {len(self.tokens)}")
        if len(set(self.tokens)) != len(self.tokens):
            raise VocabularyError("duplicate symbols in vocabulary")
        for i, special in enumerate(SPECIAL_TOKENS):
            if self.tokens[i] != special:
                raise VocabularyError(f"token {i} must be {special!r}, got {self.tokens[i]!r}")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self._index[PAD]

    @property
    def boa_id(self) -> int:
        return self._index[BOA]

    @property
    def eoa_id(self) -> int:
        return self._index[EOA]

    @property
    def silence_id(self) -> int:
        return self._index[SIL]

    @property
    def special_ids(self) -> tuple[int, ...]:
        return tuple(range(len(SPECIAL_TOKENS)))

    @property
    def content_ids(self) -> tuple[int, ...]:
        return tuple(range(len(SPECIAL_TOKENS), len(self.tokens)))

    def is_content(self, token_id: int) -> bool:
        return len(SPECIAL_TOKENS) <= token_id < len(self.tokens)

    def id_of(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise VocabularyError(f"unknown symbol {symbol!r}") from None

    def symbol_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.tokens):
            raise VocabularyError(f"token id {token_id} outside vocabulary of size {len(self.tokens)}")
        return self.tokens[token_id]

    def encode(self, text: str) -> list[int]:
        """Tokenize lowercase text into ids; '?' splits off as its own token."""
        return [self.id_of(sym) for sym in _TOKEN_RE.findall(text.lower())]

    def decode(self, ids: list[int]) -> str:
        return " ".join(self.symbol_of(i) for i in ids)

    def to_dict(self) -> dict:
        return {"tokens": list(self.tokens)}

    @classmethod
    def from_dict(cls, payload: dict) -> "Vocabulary":
        return cls(tokens=tuple(payload["tokens"]))


def default_vocabulary() -> Vocabulary:
    """The standard vocabulary used by the synthetic corpora and the toy LM."""
    words = (
        SPECIAL_TOKENS
        + QUESTION_WORDS
        + COLOR_WORDS
        + GENDER_WORDS
        + FILLER_WORDS
        + SOUND_WORDS
    )
    return Vocabulary(tokens=words)
