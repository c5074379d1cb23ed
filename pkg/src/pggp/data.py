"""Dataset format, synthetic generators, and model persistence.

Datasets are JSON-lines, one record per line with keys ``id``,
``group_id``, ``label``, ``embedding``.  Models persist to a single JSON
document with an explicit ``format_version``.  Serialization uses
Python's shortest round-trip float repr, so save/load is bit-faithful and
repeated runs under the same seed produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DatasetParseError,
    InvalidArgumentError,
    SchemaError,
    UnsupportedVersionError,
)
from .rng import RngStream

MODEL_FORMAT_VERSION = 1

GENERATORS = ("blobs", "two_moons", "ranking_groups")


@dataclass
class EmbeddingDataset:
    """Labeled, group-structured feature vectors."""

    ids: list[str]
    group_ids: list[str]
    labels: np.ndarray       # (n,) ints in {0, 1}
    embeddings: np.ndarray   # (n, d)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    def validate(self) -> "EmbeddingDataset":
        if self.n == 0:
            raise InvalidArgumentError("empty dataset")
        if len(set(self.ids)) != self.n:
            raise SchemaError("duplicate record ids")
        if not set(np.unique(self.labels)).issubset({0, 1}):
            raise SchemaError("labels must be 0 or 1")
        return self


def load_dataset(path) -> EmbeddingDataset:
    """Read and validate a JSONL dataset; dimension comes from the first record."""
    ids, group_ids, labels, rows = [], [], [], []
    seen = set()
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetParseError(f"line {lineno}: invalid JSON ({e.msg})", lineno) from e
            try:
                rid = str(rec["id"])
                gid = str(rec["group_id"])
                label = rec["label"]
                emb = rec["embedding"]
            except (KeyError, TypeError) as e:
                raise DatasetParseError(f"line {lineno}: missing record key {e}", lineno) from e
            if label not in (0, 1):
                raise SchemaError(f"line {lineno}: label must be 0 or 1, got {label!r}")
            if not isinstance(emb, list):
                raise SchemaError(f"line {lineno}: embedding must be a list")
            if dim is None:
                dim = len(emb)
            elif len(emb) != dim:
                raise SchemaError(
                    f"line {lineno}: embedding length {len(emb)} != dataset dimension {dim}"
                )
            if rid in seen:
                raise SchemaError(f"line {lineno}: duplicate id {rid!r}")
            seen.add(rid)
            ids.append(rid)
            group_ids.append(gid)
            labels.append(int(label))
            rows.append(emb)
    if not ids:
        raise InvalidArgumentError("empty dataset")
    try:
        embeddings = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"embeddings contain non-numeric values: {e}") from e
    return EmbeddingDataset(
        ids=ids,
        group_ids=group_ids,
        labels=np.asarray(labels, dtype=int),
        embeddings=embeddings,
    )


def save_dataset(dataset: EmbeddingDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(dataset.n):
            rec = {
                "id": dataset.ids[i],
                "group_id": dataset.group_ids[i],
                "label": int(dataset.labels[i]),
                "embedding": [float(v) for v in dataset.embeddings[i]],
            }
            fh.write(json.dumps(rec) + "\n")


@dataclass(frozen=True)
class SynthSpec:
    """Synthetic dataset recipe; for ranking_groups, n counts groups of 10."""

    generator: str
    n: int
    d: int = 2
    noise: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise InvalidArgumentError(
                f"unknown generator {self.generator!r}; expected one of {GENERATORS}"
            )
        if self.n < 2:
            raise InvalidArgumentError(f"n must be >= 2, got {self.n}")
        if self.d < 1:
            raise InvalidArgumentError(f"d must be >= 1, got {self.d}")
        if self.noise < 0:
            raise InvalidArgumentError(f"noise must be >= 0, got {self.noise}")


def generate_synthetic(spec: SynthSpec) -> EmbeddingDataset:
    """Deterministic synthetic datasets in the embedding format.

    blobs: two Gaussian clusters with class means 4 x noise-SD apart.
    two_moons: interleaved half-circles (d >= 2; extra dims are zero).
    ranking_groups: spec.n groups of 10 records, one positive near the
    group anchor and nine negatives scattered wide.
    """
    gen = RngStream(spec.seed).gen
    if spec.generator == "blobs":
        return _gen_blobs(spec, gen)
    if spec.generator == "two_moons":
        return _gen_two_moons(spec, gen)
    return _gen_ranking_groups(spec, gen)


def _gen_blobs(spec: SynthSpec, gen: np.random.Generator) -> EmbeddingDataset:
    n0 = spec.n // 2
    n1 = spec.n - n0
    sd = spec.noise if spec.noise > 0 else 1.0
    offset = np.zeros(spec.d)
    offset[0] = 2.0 * sd  # class means at -+2 sd: separation 4 sd
    x0 = gen.normal(size=(n0, spec.d)) * spec.noise - offset
    x1 = gen.normal(size=(n1, spec.d)) * spec.noise + offset
    x = np.vstack([x0, x1])
    y = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])
    return _assemble(x, y, ["all"] * spec.n)


def _gen_two_moons(spec: SynthSpec, gen: np.random.Generator) -> EmbeddingDataset:
    if spec.d < 2:
        raise InvalidArgumentError("two_moons needs d >= 2")
    n0 = spec.n // 2
    n1 = spec.n - n0
    t0 = np.pi * gen.random(n0)
    t1 = np.pi * gen.random(n1)
    x = np.zeros((spec.n, spec.d))
    x[:n0, 0] = np.cos(t0)
    x[:n0, 1] = np.sin(t0)
    x[n0:, 0] = 1.0 - np.cos(t1)
    x[n0:, 1] = 0.5 - np.sin(t1)
    x[:, :2] += gen.normal(size=(spec.n, 2)) * spec.noise
    y = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])
    return _assemble(x, y, ["all"] * spec.n)


def _gen_ranking_groups(spec: SynthSpec, gen: np.random.Generator) -> EmbeddingDataset:
    ids, gids, labels, rows = [], [], [], []
    for g in range(spec.n):
        anchor = gen.normal(size=spec.d)
        pos = anchor + gen.normal(size=spec.d) * spec.noise
        negs = gen.normal(size=(9, spec.d)) * 3.0
        members = [(1, pos)] + [(0, v) for v in negs]
        for j, (label, vec) in enumerate(members):
            ids.append(f"g{g}-r{j}")
            gids.append(f"g{g}")
            labels.append(label)
            rows.append(vec)
    return EmbeddingDataset(
        ids=ids, group_ids=gids,
        labels=np.asarray(labels, dtype=int),
        embeddings=np.asarray(rows, dtype=float),
    )


def _assemble(x: np.ndarray, y: np.ndarray, gids: list[str]) -> EmbeddingDataset:
    ids = [f"r{i}" for i in range(x.shape[0])]
    return EmbeddingDataset(ids=ids, group_ids=gids, labels=y, embeddings=x)


def save_model(model, path) -> None:
    """Persist a fitted model as one JSON document (format_version 1)."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "kernel": model.spec.to_dict(),
        "reference_features": [[float(v) for v in row] for row in model.reference_features],
        "reference_labels": [int(v) for v in model.reference_labels],
        "reference_w": [[float(v) for v in row] for row in model.reference_w],
        "provenance": model.provenance,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path):
    from .kernels import KernelSpec
    from .training import FittedModel

    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise DatasetParseError(f"model file is not valid JSON ({e.msg})") from e
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"unsupported model format_version {version!r}; this build reads {MODEL_FORMAT_VERSION}"
        )
    try:
        return FittedModel(
            spec=KernelSpec.from_dict(doc["kernel"]),
            reference_features=np.asarray(doc["reference_features"], dtype=float),
            reference_labels=np.asarray(doc["reference_labels"], dtype=int),
            reference_w=np.asarray(doc["reference_w"], dtype=float),
            provenance=doc.get("provenance", {}),
        )
    except KeyError as e:
        raise SchemaError(f"model file missing key {e}") from e
