"""Word-level tokenizer over the fixed template inventory.

Tokens are whole words (hyphen/apostrophe compounds included), whole
integers, single punctuation marks, and a newline marker.  Decoding is
rule-based and round-trips exactly for all text this package generates:
punctuation in NO_SPACE_BEFORE attaches to the previous token, newlines
attach to nothing, everything else is joined with single spaces.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

WORD_RE = re.compile(r"[A-Za-z]+(?:['-][A-Za-z]+)*|[0-9]+|[^A-Za-z0-9\s]")

PAD, BOS, EOS, SEP, NL = "<pad>", "<bos>", "<eos>", "<sep>", "<nl>"
SPECIALS = (PAD, BOS, EOS, SEP, NL)

NO_SPACE_BEFORE = {".", ",", ":", ";", "?", "!", "%", ")"}
NO_SPACE_AFTER = {"("}


def split_text(text: str) -> list[str]:
    """Split text into surface tokens; newlines become the NL marker."""
    out: list[str] = []
    for i, line in enumerate(text.split("\n")):
        if i:
            out.append(NL)
        out.extend(WORD_RE.findall(line))
    return out


class Tokenizer:
    def __init__(self, tokens: list[str]):
        if tuple(tokens[: len(SPECIALS)]) != SPECIALS:
            raise ValueError("vocabulary must start with the special tokens")
        if len(set(tokens)) != len(tokens):
            raise ValueError("vocabulary contains duplicates")
        self.tokens = list(tokens)
        self.index = {t: i for i, t in enumerate(tokens)}

    @property
    def vocab_size(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self.index[PAD]

    @property
    def bos_id(self) -> int:
        return self.index[BOS]

    @property
    def eos_id(self) -> int:
        return self.index[EOS]

    @property
    def sep_id(self) -> int:
        return self.index[SEP]

    def count(self, text: str) -> int:
        return len(split_text(text))

    def encode(self, text: str, bos: bool = False, eos: bool = False) -> np.ndarray:
        ids = []
        if bos:
            ids.append(self.bos_id)
        for tok in split_text(text):
            try:
                ids.append(self.index[tok])
            except KeyError:
                raise ValueError(f"unknown token: {tok!r}") from None
        if eos:
            ids.append(self.eos_id)
        return np.asarray(ids, dtype=np.int64)

    def decode(self, ids) -> str:
        parts: list[str] = []
        glue_next = True  # no space before the first token
        for i in ids:
            tok = self.tokens[int(i)]
            if tok in (PAD, BOS, EOS, SEP):
                continue
            if tok == NL:
                parts.append("\n")
                glue_next = True
                continue
            if not glue_next and tok not in NO_SPACE_BEFORE:
                parts.append(" ")
            parts.append(tok)
            glue_next = tok in NO_SPACE_AFTER
        return "".join(parts)

    def save(self, path) -> None:
        Path(path).write_text("\n".join(self.tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Tokenizer":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(lines)


def build_default() -> Tokenizer:
    """Build the tokenizer over the full template inventory."""
    from . import templates

    seen: set[str] = set()
    for text in templates.vocabulary_texts():
        seen.update(t for t in split_text(text) if t != NL)
    seen.update(str(n) for n in templates.NUMBER_TOKENS)
    seen.update(str(d) for d in range(10))
    seen.update(templates.PUNCTUATION)
    ordered = list(SPECIALS) + sorted(seen - set(SPECIALS))
    return Tokenizer(ordered)
