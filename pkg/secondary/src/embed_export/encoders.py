"""Text encoders producing fixed-width embedding vectors.

Two backends:

* ``hash`` -- a deterministic feature-hashing bag-of-tokens encoder
  (768 dims by default, matching base-size transformer hidden states).
  Needs no downloads, so it is the offline/test backend.
* any other name -- loaded through ``transformers.AutoModel`` with the
  pooled vector taken from the [CLS] position (or mean pooling behind a
  flag).  Inputs longer than the model maximum are head-truncated, and
  the limit in force is logged.
"""

from __future__ import annotations

import hashlib
import logging
import re

import numpy as np

logger = logging.getLogger(__name__)

SEP = "[SEP]"

HASH_DIM_DEFAULT = 768

_TOKEN_RE = re.compile(r"[a-z0-9]+|\[sep\]")


class EncoderLoadError(EnvironmentError):
    """The requested encoder could not be loaded in this environment."""


def build_input_text(utterances, response) -> str:
    """Single input string: utterances then the response, [SEP]-joined."""
    return f" {SEP} ".join([*utterances, response])


class HashingEncoder:
    """Deterministic bag-of-hashed-tokens embedding, L2-normalised.

    Each lowercase token hashes to a coordinate and a sign; the vector of
    accumulated counts is normalised.  Identical text always yields the
    identical vector, with no model assets required.
    """

    def __init__(self, dim: int = HASH_DIM_DEFAULT):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = dim

    @property
    def name(self) -> str:
        return f"hash-{self.dim}"

    def encode(self, texts, batch_size: int = 32) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for i, text in enumerate(texts):
            for token in _TOKEN_RE.findall(text.lower()):
                digest = hashlib.blake2b(token.encode("utf-8"), digest_size=9).digest()
                idx = int.from_bytes(digest[:8], "little") % self.dim
                sign = 1.0 if digest[8] & 1 else -1.0
                out[i, idx] += sign
            norm = np.linalg.norm(out[i])
            if norm > 0:
                out[i] /= norm
        return out


class TransformerEncoder:
    """Frozen pretrained encoder via transformers; pooling 'cls' or 'mean'."""

    def __init__(self, model_name: str, pooling: str = "cls"):
        if pooling not in ("cls", "mean"):
            raise ValueError(f"pooling must be 'cls' or 'mean', got {pooling!r}")
        self.model_name = model_name
        self.pooling = pooling
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer

            self._torch = torch
            self.tokenizer = AutoTokenizer.from_pretrained(model_name)
            self.model = AutoModel.from_pretrained(model_name)
        except Exception as e:
            raise EncoderLoadError(
                f"could not load encoder {model_name!r}: {e}"
            ) from e
        self.model.eval()
        self.max_length = self.tokenizer.model_max_length
        logger.info("encoder %s loaded; inputs head-truncated at %d tokens",
                    model_name, self.max_length)

    @property
    def name(self) -> str:
        return self.model_name

    def encode(self, texts, batch_size: int = 32) -> np.ndarray:
        torch = self._torch
        chunks = []
        with torch.no_grad():
            for start in range(0, len(texts), batch_size):
                batch = list(texts[start : start + batch_size])
                enc = self.tokenizer(batch, padding=True, truncation=True,
                                     return_tensors="pt")
                hidden = self.model(**enc).last_hidden_state
                if self.pooling == "cls":
                    pooled = hidden[:, 0]
                else:
                    mask = enc["attention_mask"].unsqueeze(-1)
                    pooled = (hidden * mask).sum(1) / mask.sum(1).clamp(min=1)
                chunks.append(pooled.double().numpy())
        return np.vstack(chunks)


def get_encoder(name: str, pooling: str = "cls", hash_dim: int = HASH_DIM_DEFAULT):
    if name == "hash":
        return HashingEncoder(dim=hash_dim)
    return TransformerEncoder(name, pooling=pooling)
