"""Raw dialog corpus reader.

The corpus is a TSV with a header row naming the columns ``group_id``,
``context``, ``response``, ``label`` (any order, extra columns ignored).
The context cell may hold several utterances separated by ``|||``; they
are re-joined with the encoder's separator token at encoding time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass


class CorpusSchemaError(ValueError):
    """The TSV does not match the documented corpus schema."""


UTTERANCE_DELIMITER = "|||"

REQUIRED_COLUMNS = ("group_id", "context", "response", "label")


@dataclass(frozen=True)
class DialogPair:
    """One (context, candidate response) pair with its relevance label."""

    group_id: str
    utterances: tuple[str, ...]
    response: str
    label: int

    def __post_init__(self):
        if not self.utterances or not any(u.strip() for u in self.utterances):
            raise CorpusSchemaError("context must contain at least one utterance")
        if not self.response.strip():
            raise CorpusSchemaError("response must be non-empty")
        if self.label not in (0, 1):
            raise CorpusSchemaError(f"label must be 0 or 1, got {self.label!r}")


def read_corpus(path) -> list[DialogPair]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        if reader.fieldnames is None:
            raise CorpusSchemaError("corpus file is empty")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise CorpusSchemaError(f"corpus is missing columns: {missing}")
        pairs = []
        for lineno, row in enumerate(reader, start=2):
            try:
                label = int(row["label"])
            except (TypeError, ValueError) as e:
                raise CorpusSchemaError(f"line {lineno}: bad label {row['label']!r}") from e
            utterances = tuple(
                u.strip() for u in (row["context"] or "").split(UTTERANCE_DELIMITER)
                if u.strip()
            )
            try:
                pairs.append(DialogPair(
                    group_id=row["group_id"],
                    utterances=utterances,
                    response=(row["response"] or "").strip(),
                    label=label,
                ))
            except CorpusSchemaError as e:
                raise CorpusSchemaError(f"line {lineno}: {e}") from e
    if not pairs:
        raise CorpusSchemaError("corpus has no data rows")
    return pairs
