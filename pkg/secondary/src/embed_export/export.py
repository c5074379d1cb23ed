"""Convert a dialog corpus into the embedding-dataset JSONL format.

Output records carry exactly the keys the downstream classifier's loader
expects: ``id``, ``group_id``, ``label``, ``embedding``.
"""

from __future__ import annotations

import json

from .corpus import read_corpus
from .encoders import build_input_text, get_encoder


def export_embeddings(
    corpus_path,
    encoder_name: str,
    out_path,
    batch_size: int = 32,
    pooling: str = "cls",
    hash_dim: int = 768,
) -> int:
    """Encode every corpus pair and write one JSONL record per pair.

    Returns the number of records written.
    """
    pairs = read_corpus(corpus_path)
    encoder = get_encoder(encoder_name, pooling=pooling, hash_dim=hash_dim)
    texts = [build_input_text(p.utterances, p.response) for p in pairs]
    vectors = encoder.encode(texts, batch_size=batch_size)
    with open(out_path, "w", encoding="utf-8") as fh:
        for i, (pair, vec) in enumerate(zip(pairs, vectors)):
            rec = {
                "id": f"row{i}",
                "group_id": pair.group_id,
                "label": pair.label,
                "embedding": [float(v) for v in vec],
            }
            fh.write(json.dumps(rec) + "\n")
    return len(pairs)
