"""Text normalization shared by the stall detector, choice matching and tagging.

"Identical after trimming" is defined here once so every subsystem that
compares user-visible text (summaries, choices, ending phrases) agrees.
"""

from __future__ import annotations

import re

_WS = re.compile(r"\s+")
_TERMINAL_PUNCT = ".?!,;:…"


def normalize(text: str) -> str:
    """Case-fold, collapse internal whitespace, strip edges and trailing punctuation."""
    out = _WS.sub(" ", text.casefold()).strip()
    # Loop so mixed runs like "word . ." fully strip; keeps normalize idempotent.
    while True:
        stripped = out.rstrip(_TERMINAL_PUNCT).rstrip()
        if stripped == out:
            return out
        out = stripped


def tokenize(text: str, stopwords: frozenset[str] = frozenset()) -> frozenset[str]:
    """Split on non-alphanumeric runs, case-folded, with stopwords removed."""
    tokens = re.split(r"[^0-9a-z]+", text.casefold())
    return frozenset(t for t in tokens if t and t not in stopwords)
