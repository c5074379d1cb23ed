"""Dialog corpus to embedding-JSONL exporter."""

__version__ = "0.1.0"

from .corpus import CorpusSchemaError, DialogPair, read_corpus
from .encoders import EncoderLoadError, HashingEncoder, TransformerEncoder, get_encoder
from .export import export_embeddings

__all__ = [
    "CorpusSchemaError", "DialogPair", "read_corpus",
    "EncoderLoadError", "HashingEncoder", "TransformerEncoder", "get_encoder",
    "export_embeddings",
]
