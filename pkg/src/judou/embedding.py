"""Radical-augmented character embeddings, pretrained with a modified CBOW.

Each position is represented by the concatenation of a character vector and
the vector of its radical. The context of a center position is the ordered
concatenation of these pairs over the 2N surrounding positions, and a single
projection predicts the center character with a full softmax; keeping the
positional order (instead of averaging the context) is what lets the model
weight the radical slots differently from the character slots.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from . import binio
from .corpus import Vocab
from .nncore import Param, make_rng
from .radicals import N_RADICALS, RadicalTable, radical_index

MAGIC = b"GJEMB01\n"
N_RADICAL_ROWS = N_RADICALS + 1  # row 0 is the no-radical sentinel


@dataclass
class EmbeddingConfig:
    d_char: int = 70
    d_radical: int = 30
    window: int = 2
    epochs: int = 5
    learning_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.d_char < 1 or self.d_radical < 1 or self.window < 1:
            raise ValueError(f"dims and window must be >= 1: {self}")

    @property
    def d_total(self) -> int:
        return self.d_char + self.d_radical


@dataclass
class EmbeddingSet:
    char_vectors: np.ndarray   # (|V|, d_char)
    radical_vectors: np.ndarray  # (215, d_radical)
    vocab: Vocab
    radtable: RadicalTable = field(repr=False, default=None)
    config: EmbeddingConfig = field(default_factory=EmbeddingConfig)

    def __post_init__(self):
        if self.char_vectors.shape[0] != self.vocab.size:
            raise ValueError(
                f"char matrix rows {self.char_vectors.shape[0]} != vocab size {self.vocab.size}")
        if self.radical_vectors.shape[0] != N_RADICAL_ROWS:
            raise ValueError(
                f"radical matrix must have {N_RADICAL_ROWS} rows, got {self.radical_vectors.shape[0]}")

    @property
    def d_char(self) -> int:
        return self.char_vectors.shape[1]

    @property
    def d_radical(self) -> int:
        return self.radical_vectors.shape[1]


@dataclass
class EncodedUnit:
    """A unit's characters as parallel vocab indices and radical indices."""

    char_ids: np.ndarray
    rad_ids: np.ndarray

    def __len__(self) -> int:
        return len(self.char_ids)


def encode_chars(chars: str, vocab: Vocab, radtable: RadicalTable) -> EncodedUnit:
    """Vocab-encode characters; radicals come from the character itself, so an
    out-of-vocabulary character still keeps its true radical."""
    return EncodedUnit(
        char_ids=np.array([vocab.encode(c) for c in chars], dtype=np.intp),
        rad_ids=np.array([radical_index(radtable, c) for c in chars], dtype=np.intp),
    )


@dataclass
class CbowModel:
    embeddings: EmbeddingSet
    char_param: Param
    rad_param: Param
    projection: Param  # (|V|, 2N * (d_char + d_radical))

    @property
    def config(self) -> EmbeddingConfig:
        return self.embeddings.config

    def params(self) -> list:
        return [self.char_param, self.rad_param, self.projection]


def new_cbow_model(vocab: Vocab, radtable: RadicalTable, cfg: EmbeddingConfig) -> CbowModel:
    """Random init, uniform in [-0.5/dim, 0.5/dim] per matrix row length."""
    rng = make_rng(cfg.seed)

    def init(rows, dim):
        return rng.uniform(-0.5 / dim, 0.5 / dim, size=(rows, dim))

    ctx_len = 2 * cfg.window * cfg.d_total
    emb = EmbeddingSet(
        char_vectors=init(vocab.size, cfg.d_char),
        radical_vectors=init(N_RADICAL_ROWS, cfg.d_radical),
        vocab=vocab,
        radtable=radtable,
        config=cfg,
    )
    return CbowModel(
        embeddings=emb,
        char_param=Param.of(emb.char_vectors, "cbow.char_vectors"),
        rad_param=Param.of(emb.radical_vectors, "cbow.radical_vectors"),
        projection=Param.of(init(vocab.size, ctx_len), "cbow.projection"),
    )


def _context_ids(encoded: EncodedUnit, center: int, window: int):
    """(char_id, rad_id) pairs of the 2N context slots; the center is excluded
    and out-of-range slots fall back to PAD / no-radical rows."""
    n = len(encoded)
    pairs = []
    for pos in list(range(center - window, center)) + list(range(center + 1, center + window + 1)):
        if 0 <= pos < n:
            pairs.append((int(encoded.char_ids[pos]), int(encoded.rad_ids[pos])))
        else:
            pairs.append((Vocab.PAD, 0))
    return pairs


def context_vector(model: CbowModel, encoded: EncodedUnit, center: int) -> np.ndarray:
    """Ordered concatenation of (char vector, radical vector) over the context."""
    if not 0 <= center < len(encoded):
        raise IndexError(f"center {center} outside sequence of length {len(encoded)}")
    cv = model.char_param.value
    rv = model.rad_param.value
    blocks = []
    for cid, rid in _context_ids(encoded, center, model.config.window):
        blocks.append(cv[cid])
        blocks.append(rv[rid])
    return np.concatenate(blocks)


def cbow_forward_loss(model: CbowModel, encoded: EncodedUnit, center: int) -> float:
    loss, _, _ = _cbow_loss_parts(model, encoded, center)
    return loss


def _cbow_loss_parts(model: CbowModel, encoded: EncodedUnit, center: int):
    h = context_vector(model, encoded, center)
    logits = model.projection.value @ h
    logits -= logits.max()
    exp = np.exp(logits)
    probs = exp / exp.sum()
    target = int(encoded.char_ids[center])
    loss = -float(np.log(probs[target]))
    return loss, h, probs


def cbow_loss_and_grads(model: CbowModel, encoded: EncodedUnit, center: int) -> float:
    """Forward plus hand-derived backward; accumulates into the model's grads."""
    loss, h, probs = _cbow_loss_parts(model, encoded, center)
    target = int(encoded.char_ids[center])
    dlogits = probs.copy()
    dlogits[target] -= 1.0
    model.projection.grad += np.outer(dlogits, h)
    dh = model.projection.value.T @ dlogits
    d = model.config.d_total
    d_c = model.config.d_char
    for slot, (cid, rid) in enumerate(_context_ids(encoded, center, model.config.window)):
        block = dh[slot * d:(slot + 1) * d]
        model.char_param.grad[cid] += block[:d_c]
        model.rad_param.grad[rid] += block[d_c:]
    return loss


def train_embeddings(corpus: list, radtable: RadicalTable, cfg: EmbeddingConfig,
                     vocab: Vocab = None, progress=None) -> EmbeddingSet:
    """Pretrain on a list of units (or raw strings) and return the embeddings.

    Plain per-pair SGD over every (sequence, center) position, in corpus order,
    for cfg.epochs epochs. Context windows never cross unit boundaries.
    """
    if not corpus:
        raise ValueError("cannot train embeddings on an empty corpus")
    texts = [u if isinstance(u, str) else u.seq.chars for u in corpus]
    if vocab is None:
        from .corpus import build_vocab, chunk_units, LabeledSequence
        units = []
        for t in texts:
            units.extend(chunk_units(LabeledSequence(t, "O" * len(t)), unit_size=max(2, len(t))))
        vocab = build_vocab(units)
    model = new_cbow_model(vocab, radtable, cfg)
    encoded = [encode_chars(t, vocab, radtable) for t in texts]
    lr = cfg.learning_rate
    for epoch in range(cfg.epochs):
        total, count = 0.0, 0
        for enc in encoded:
            for center in range(len(enc)):
                loss = cbow_loss_and_grads(model, enc, center)
                total += loss
                count += 1
                for p in model.params():
                    p.value -= lr * p.grad
                    p.zero_grad()
        mean = total / max(1, count)
        if progress is not None:
            progress(epoch, mean)
    emb = model.embeddings
    emb.char_vectors = model.char_param.value
    emb.radical_vectors = model.rad_param.value
    return emb


# ---------------------------------------------------------------------------
# persistence

def save_embeddings(emb: EmbeddingSet, path) -> None:
    with open(path, "wb") as f:
        f.write(MAGIC)
        for v in (emb.vocab.size, emb.d_char, emb.d_radical, emb.config.window, 0):
            binio.write_u32(f, v)
        for s in emb.vocab.index_to_char:
            binio.write_string(f, s)
        binio.write_matrix(f, emb.char_vectors)
        binio.write_matrix(f, emb.radical_vectors)


def load_embeddings(path, radtable: RadicalTable = None) -> EmbeddingSet:
    with open(path, "rb") as f:
        magic = binio.read_exact(f, len(MAGIC), "magic")
        if magic != MAGIC:
            raise binio.FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        vocab_size = binio.read_u32(f, "vocab size")
        d_char = binio.read_u32(f, "char dim")
        d_radical = binio.read_u32(f, "radical dim")
        window = binio.read_u32(f, "window")
        binio.read_u32(f, "reserved")
        index_to_char = [binio.read_string(f, f"vocab entry {i}") for i in range(vocab_size)]
        char_vectors = binio.read_matrix(f, vocab_size, d_char, "char vectors")
        radical_vectors = binio.read_matrix(f, N_RADICAL_ROWS, d_radical, "radical vectors")
        extra = f.read(1)
        if extra:
            raise binio.FormatError("trailing bytes after radical vectors")
    vocab = Vocab(
        char_to_index={ch: i for i, ch in enumerate(index_to_char) if i >= 2},
        index_to_char=index_to_char,
    )
    cfg = EmbeddingConfig(d_char=d_char, d_radical=d_radical, window=window)
    return EmbeddingSet(char_vectors=char_vectors, radical_vectors=radical_vectors,
                        vocab=vocab, radtable=radtable, config=cfg)


def export_text(emb: EmbeddingSet, path) -> None:
    """word2vec-style text export of the concatenated (char ++ radical) vectors."""
    vocab = emb.vocab
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        dim = emb.d_char + emb.d_radical
        f.write(f"{vocab.size - 2} {dim}\n")
        for i in range(2, vocab.size):
            ch = vocab.index_to_char[i]
            rid = radical_index(emb.radtable, ch) if emb.radtable else 0
            vec = np.concatenate([emb.char_vectors[i], emb.radical_vectors[rid]])
            f.write(ch + " " + " ".join(repr(float(x)) for x in vec) + "\n")
