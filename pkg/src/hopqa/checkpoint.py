"""Binary checkpoint containers.

One little-endian container discipline for all three artifacts, keyed by a
4-byte magic: ``KGE1`` (embedding model), ``QEN1`` (question encoder),
``QCL1`` (hop classifier). Layout is a fixed header::

    magic[4] | version u16 | dim u32 | rows_a u64 | rows_b u64 | hash_a[8] | hash_b[8]

followed by the model's float32 matrices in row-major order. The 8-byte
hashes fingerprint the vocabularies a model was built against so stale or
foreign checkpoints are rejected at load time. Encoder and classifier files
carry their token vocabulary inline after the matrices (u64 byte length +
newline-joined UTF-8), since tokenization must reproduce exactly at
inference.
"""

from __future__ import annotations

import hashlib
import struct
from typing import BinaryIO, Sequence

import numpy as np

from .errors import CheckpointWriteError, CorruptionError, FormatError, IncompatibleGraphError
from .kg import KnowledgeGraph

MAGIC_KGE = b"KGE1"
MAGIC_ENCODER = b"QEN1"
MAGIC_CLASSIFIER = b"QCL1"
VERSION = 1

_HEADER = struct.Struct("<4sHIQQ8s8s")
HEADER_SIZE = _HEADER.size


def vocab_fingerprint(ids: Sequence[str]) -> bytes:
    """8-byte content hash of an ordered vocabulary."""
    digest = hashlib.sha256("\n".join(ids).encode("utf-8")).digest()
    return digest[:8]


def entity_fingerprint(kg: KnowledgeGraph) -> bytes:
    return vocab_fingerprint(kg.entities.ids)


def relation_fingerprint(kg: KnowledgeGraph) -> bytes:
    return vocab_fingerprint(kg.relations.ids)


def _write_matrix(fh: BinaryIO, matrix: np.ndarray):
    fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def _read_exact(fh: BinaryIO, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise CorruptionError(f"truncated checkpoint: short read in {what}")
    return data


def _read_matrix(fh: BinaryIO, rows: int, cols: int, what: str) -> np.ndarray:
    data = _read_exact(fh, 4 * rows * cols, what)
    return np.frombuffer(data, dtype="<f4").reshape(rows, cols).astype(np.float64)


def _read_header(fh: BinaryIO, expected_magic: bytes):
    magic, version, dim, rows_a, rows_b, hash_a, hash_b = _HEADER.unpack(
        _read_exact(fh, HEADER_SIZE, "header")
    )
    if magic != expected_magic:
        raise FormatError(f"bad magic {magic!r}, expected {expected_magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported container version {version}")
    return dim, rows_a, rows_b, hash_a, hash_b


def _check_eof(fh: BinaryIO):
    if fh.read(1):
        raise CorruptionError("trailing bytes after checkpoint payload")


def save_checkpoint(model, kg: KnowledgeGraph, path) -> None:
    """Write an embedding model bound to ``kg``'s vocabularies."""
    header = _HEADER.pack(
        MAGIC_KGE,
        VERSION,
        model.d,
        model.num_entities,
        model.num_relations,
        entity_fingerprint(kg),
        relation_fingerprint(kg),
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            for m in (model.entity_re, model.entity_im, model.relation_re, model.relation_im):
                _write_matrix(fh, m)
    except OSError as exc:
        raise CheckpointWriteError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path, kg: KnowledgeGraph):
    """Read an embedding model, verifying it matches ``kg``."""
    from .kge import ComplexModel

    with open(path, "rb") as fh:
        d, n_ent, n_rel, ent_hash, rel_hash = _read_header(fh, MAGIC_KGE)
        if ent_hash != entity_fingerprint(kg) or rel_hash != relation_fingerprint(kg):
            raise IncompatibleGraphError(
                f"checkpoint {path} was trained against a different graph"
            )
        if n_ent != kg.num_entities or n_rel != kg.num_relations:
            raise IncompatibleGraphError(
                f"checkpoint {path} row counts do not match the graph"
            )
        model = ComplexModel(
            entity_re=_read_matrix(fh, n_ent, d, "entity_re"),
            entity_im=_read_matrix(fh, n_ent, d, "entity_im"),
            relation_re=_read_matrix(fh, n_rel, d, "relation_re"),
            relation_im=_read_matrix(fh, n_rel, d, "relation_im"),
        )
        _check_eof(fh)
    return model


def _write_vocab_blob(fh: BinaryIO, tokens: Sequence[str]):
    blob = "\n".join(tokens).encode("utf-8")
    fh.write(struct.pack("<Q", len(blob)))
    fh.write(blob)


def _read_vocab_blob(fh: BinaryIO) -> list[str]:
    (length,) = struct.unpack("<Q", _read_exact(fh, 8, "vocab length"))
    blob = _read_exact(fh, length, "vocab blob")
    text = blob.decode("utf-8")
    return text.split("\n") if text else []


def save_encoder(encoder, entity_hash: bytes, path) -> None:
    """Write a question encoder; ``entity_hash`` binds it to the graph whose
    embedding space it targets."""
    vocab = encoder.vocab
    header = _HEADER.pack(
        MAGIC_ENCODER,
        VERSION,
        encoder.d,
        len(vocab.tokens),
        encoder.m,
        vocab_fingerprint(vocab.tokens),
        entity_hash,
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            for m in (
                encoder.emb,
                encoder.w1,
                encoder.b1.reshape(1, -1),
                encoder.w2,
                encoder.b2.reshape(1, -1),
            ):
                _write_matrix(fh, m)
            _write_vocab_blob(fh, vocab.tokens)
    except OSError as exc:
        raise CheckpointWriteError(f"cannot write checkpoint {path}: {exc}") from exc


def load_encoder(path, kg: KnowledgeGraph | None = None):
    from .questions import QuestionEncoder, TokenVocabulary

    with open(path, "rb") as fh:
        d, n_tokens, m, token_hash, ent_hash = _read_header(fh, MAGIC_ENCODER)
        if kg is not None and ent_hash != entity_fingerprint(kg):
            raise IncompatibleGraphError(
                f"encoder {path} targets a different graph's embedding space"
            )
        emb = _read_matrix(fh, n_tokens, m, "token embeddings")
        w1 = _read_matrix(fh, m, m, "hidden weights")
        b1 = _read_matrix(fh, 1, m, "hidden bias")[0]
        w2 = _read_matrix(fh, m, 2 * d, "output weights")
        b2 = _read_matrix(fh, 1, 2 * d, "output bias")[0]
        tokens = _read_vocab_blob(fh)
        _check_eof(fh)
    if vocab_fingerprint(tokens) != token_hash:
        raise CorruptionError(f"encoder {path}: token vocabulary hash mismatch")
    vocab = TokenVocabulary(tokens)
    return QuestionEncoder(vocab=vocab, emb=emb, w1=w1, b1=b1, w2=w2, b2=b2), ent_hash


def save_classifier(classifier, path) -> None:
    vocab = classifier.vocab
    header = _HEADER.pack(
        MAGIC_CLASSIFIER,
        VERSION,
        classifier.num_classes,
        len(vocab.tokens),
        classifier.m,
        vocab_fingerprint(vocab.tokens),
        b"\x00" * 8,
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            for m in (classifier.emb, classifier.w, classifier.b.reshape(1, -1)):
                _write_matrix(fh, m)
            _write_vocab_blob(fh, vocab.tokens)
    except OSError as exc:
        raise CheckpointWriteError(f"cannot write checkpoint {path}: {exc}") from exc


def load_classifier(path):
    from .questions import HopClassifier, TokenVocabulary

    with open(path, "rb") as fh:
        n_classes, n_tokens, m, token_hash, _reserved = _read_header(fh, MAGIC_CLASSIFIER)
        emb = _read_matrix(fh, n_tokens, m, "token embeddings")
        w = _read_matrix(fh, m, n_classes, "weights")
        b = _read_matrix(fh, 1, n_classes, "bias")[0]
        tokens = _read_vocab_blob(fh)
        _check_eof(fh)
    if vocab_fingerprint(tokens) != token_hash:
        raise CorruptionError(f"classifier {path}: token vocabulary hash mismatch")
    return HopClassifier(vocab=TokenVocabulary(tokens), emb=emb, w=w, b=b)
