"""The full tagger: embeddings -> BiLSTM -> emission projection -> CRF.

Training fine-tunes the pretrained embeddings together with the network
(freezing them is available as an option), selects the best epoch by
validation F1, and restores those parameters at the end. Evaluation scores
sentence boundaries (positions after each E tag), never the tags themselves.
"""

from dataclasses import dataclass, field

import numpy as np

from . import binio
from .corpus import (DEFAULT_PUNCT, LabeledSequence, TAG_CHARS, TAG_E,
                     TAG_TO_ID, Vocab, boundary_positions, normalize_text,
                     tags_to_text)
from .crf import CrfParams, crf_nll, new_transitions, viterbi_decode
from .embedding import EmbeddingSet, EncodedUnit, encode_chars
from .lstm import (BiLstmParams, bilstm_backward_batch, bilstm_forward_batch,
                   new_bilstm_params)
from .nncore import Param, SgdConfig, dropout_mask, glorot_uniform, make_rng, sgd_step
from .radicals import RadicalTable

MAGIC = b"GJSEG01\n"
VERSION = 1
N_TAGS = 3


@dataclass
class Hyperparams:
    embed_dim: int = 100
    hidden: int = 100
    layers: int = 1
    batch: int = 50
    epochs: int = 30
    learning_rate: float = 0.01
    clip_norm: float = 5.0
    dropout: float = 0.5

    def __post_init__(self):
        if min(self.embed_dim, self.hidden, self.layers, self.batch) < 1:
            raise ValueError(f"dimensions and batch must be positive: {self}")
        if self.epochs < 0 or self.learning_rate < 0 or self.clip_norm <= 0:
            raise ValueError(f"bad optimization settings: {self}")
        if not 0 <= self.dropout < 1:
            raise ValueError(f"dropout must be in [0, 1): {self.dropout}")


@dataclass
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "EvalReport":
        p = tp / (tp + fp) if tp + fp > 0 else 0.0
        r = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(tp=tp, fp=fp, fn=fn, precision=p, recall=r, f1=f1)


@dataclass
class EpochRecord:
    mean_loss: float
    val_report: EvalReport


@dataclass
class TrainLog:
    epochs: list
    best_epoch: int | None


@dataclass
class SegmenterModel:
    embeddings: EmbeddingSet
    char_param: Param
    rad_param: Param
    bilstm: BiLstmParams
    emit_W: Param  # (2H, 3)
    emit_b: Param  # (3,)
    crf: CrfParams
    use_radicals: bool = True

    @property
    def vocab(self) -> Vocab:
        return self.embeddings.vocab

    @property
    def radtable(self) -> RadicalTable:
        return self.embeddings.radtable

    @property
    def d_in(self) -> int:
        return self.embeddings.d_char + (self.embeddings.d_radical if self.use_radicals else 0)

    def all_params(self) -> list:
        return ([self.char_param, self.rad_param] + self.bilstm.params()
                + [self.emit_W, self.emit_b, self.crf.trans])

    def trainable_params(self, freeze_embeddings: bool = False) -> list:
        params = self.all_params()
        return params[2:] if freeze_embeddings else params


def build_model(embeddings: EmbeddingSet, hidden: int = 100, seed: int = 0,
                use_radicals: bool = True) -> SegmenterModel:
    rng = make_rng(seed)
    d_in = embeddings.d_char + (embeddings.d_radical if use_radicals else 0)
    return SegmenterModel(
        embeddings=embeddings,
        char_param=Param.of(embeddings.char_vectors, "emb.char_vectors"),
        rad_param=Param.of(embeddings.radical_vectors, "emb.radical_vectors"),
        bilstm=new_bilstm_params(d_in, hidden, rng),
        emit_W=Param.of(glorot_uniform((2 * hidden, N_TAGS), rng), "emit.W"),
        emit_b=Param.zeros(N_TAGS, "emit.b"),
        crf=CrfParams(trans=new_transitions()),
        use_radicals=use_radicals,
    )


# ---------------------------------------------------------------------------
# forward / backward over a batch of equal-length units

def _forward_batch(model: SegmenterModel, char_ids: np.ndarray, rad_ids: np.ndarray,
                   training: bool, rng, dropout_rate: float):
    X = model.char_param.value[char_ids]
    if model.use_radicals:
        X = np.concatenate([X, model.rad_param.value[rad_ids]], axis=2)
    in_mask = out_mask = None
    if training and dropout_rate > 0:
        in_mask = dropout_mask(X.shape, dropout_rate, rng)
        X = X * in_mask
    H2, lstm_cache = bilstm_forward_batch(model.bilstm, X)
    if training and dropout_rate > 0:
        out_mask = dropout_mask(H2.shape, dropout_rate, rng)
        H2 = H2 * out_mask
    P = np.tensordot(H2, model.emit_W.value, axes=([2], [0])) + model.emit_b.value
    cache = {"char_ids": char_ids, "rad_ids": rad_ids, "in_mask": in_mask,
             "out_mask": out_mask, "H2": H2, "lstm_cache": lstm_cache}
    return P, cache


def _backward_batch(model: SegmenterModel, cache: dict, dP: np.ndarray) -> None:
    H2 = cache["H2"]
    two_h = H2.shape[2]
    model.emit_W.grad += H2.reshape(-1, two_h).T @ dP.reshape(-1, N_TAGS)
    model.emit_b.grad += dP.sum(axis=(0, 1))
    dH2 = np.tensordot(dP, model.emit_W.value.T, axes=([2], [0]))
    if cache["out_mask"] is not None:
        dH2 = dH2 * cache["out_mask"]
    dX = bilstm_backward_batch(model.bilstm, cache["lstm_cache"], dH2)
    if cache["in_mask"] is not None:
        dX = dX * cache["in_mask"]
    d_c = model.embeddings.d_char
    np.add.at(model.char_param.grad, cache["char_ids"], dX[:, :, :d_c])
    if model.use_radicals:
        np.add.at(model.rad_param.grad, cache["rad_ids"], dX[:, :, d_c:])


def model_forward(model: SegmenterModel, chars: str, training: bool = False,
                  rng=None, dropout_rate: float = 0.0) -> np.ndarray:
    """Emission scores (n, 3) for one unit; unknown characters encode as UNK."""
    if not chars:
        raise ValueError("cannot run the model on an empty unit")
    enc = encode_chars(chars, model.vocab, model.radtable)
    P, _ = _forward_batch(model, enc.char_ids[None, :], enc.rad_ids[None, :],
                          training, rng, dropout_rate)
    return P[0]


# ---------------------------------------------------------------------------
# training / evaluation / segmentation

def _encode_units(model: SegmenterModel, units: list) -> list:
    return [encode_chars(u.seq.chars, model.vocab, model.radtable) for u in units]


def _gold_ids(units: list) -> list:
    return [np.array([TAG_TO_ID[t] for t in u.seq.tags], dtype=np.intp) for u in units]


def train(model: SegmenterModel, splits, hp: Hyperparams, seed: int = 0,
          freeze_embeddings: bool = False, progress=None) -> TrainLog:
    """Minibatch SGD on the mean sequence NLL; returns the per-epoch log.

    The model ends up with the parameters of the epoch with the best
    validation F1 (earliest on ties).
    """
    if not splits.train:
        raise ValueError("training split is empty")
    rng = make_rng(seed)
    trainable = model.trainable_params(freeze_embeddings)
    frozen = [p for p in model.all_params() if p not in trainable]
    # lr 0 is a supported null update (losses and evals still run)
    cfg = None
    if hp.learning_rate > 0:
        cfg = SgdConfig(learning_rate=hp.learning_rate, clip_norm=hp.clip_norm,
                        dropout_rate=hp.dropout)
    encoded = _encode_units(model, splits.train)
    golds = _gold_ids(splits.train)

    records = []
    best_f1 = -1.0
    best_epoch = None
    best_values = None
    for epoch in range(hp.epochs):
        order = rng.permutation(len(encoded))
        total_loss = 0.0
        for start in range(0, len(order), hp.batch):
            batch = order[start:start + hp.batch]
            n_batch = len(batch)
            by_len: dict = {}
            for idx in batch:
                by_len.setdefault(len(encoded[idx]), []).append(idx)
            for idxs in by_len.values():
                char_ids = np.stack([encoded[i].char_ids for i in idxs])
                rad_ids = np.stack([encoded[i].rad_ids for i in idxs])
                P, cache = _forward_batch(model, char_ids, rad_ids, True, rng, hp.dropout)
                dP = np.empty_like(P)
                for row, i in enumerate(idxs):
                    loss, dP_i, dA_i = crf_nll(P[row], model.crf, golds[i])
                    total_loss += loss
                    dP[row] = dP_i / n_batch
                    model.crf.trans.grad += dA_i / n_batch
                _backward_batch(model, cache, dP)
            if cfg is not None:
                sgd_step(trainable, cfg)
            else:
                for p in trainable:
                    p.zero_grad()
            for p in frozen:
                p.zero_grad()
        mean_loss = total_loss / len(encoded)
        val_report = evaluate(model, splits.valid)
        records.append(EpochRecord(mean_loss=mean_loss, val_report=val_report))
        if progress is not None:
            progress(epoch, mean_loss, val_report)
        if val_report.f1 > best_f1:
            best_f1 = val_report.f1
            best_epoch = epoch
            best_values = [p.value.copy() for p in model.all_params()]
    if best_values is not None:
        for p, v in zip(model.all_params(), best_values):
            p.value[...] = v
    return TrainLog(epochs=records, best_epoch=best_epoch)


def predict_tags(model: SegmenterModel, chars: str) -> str:
    """Viterbi-decoded tag string for one unit."""
    P = model_forward(model, chars)
    path = viterbi_decode(P, model.crf)
    return "".join(TAG_CHARS[t] for t in path.tags)


def evaluate(model: SegmenterModel, units: list) -> EvalReport:
    """Boundary-level precision/recall/F1 over gold-tagged units."""
    tp = fp = fn = 0
    for unit in units:
        gold = boundary_positions(unit.seq.tags)
        P = model_forward(model, unit.seq.chars)
        path = viterbi_decode(P, model.crf)
        pred = {i + 1 for i, t in enumerate(path.tags) if t == TAG_E}
        tp += len(gold & pred)
        fp += len(pred - gold)
        fn += len(gold - pred)
    return EvalReport.from_counts(tp, fp, fn)


def segment(model: SegmenterModel, raw: str, separator: str = "/",
            punct=DEFAULT_PUNCT, unit_size: int = 100) -> str:
    """Segment raw text: normalize (dropping any existing stops), decode
    100-character units, and reinsert boundaries after predicted E tags."""
    norm = normalize_text(raw, punct)
    chars = "".join(c for c in norm if c not in punct.stops)
    if not chars:
        return ""
    tags = []
    for start in range(0, len(chars), unit_size):
        tags.append(predict_tags(model, chars[start:start + unit_size]))
    # reconstruct over the whole stream so boundaries at unit joins survive
    return tags_to_text(LabeledSequence(chars, "".join(tags)), separator)


# ---------------------------------------------------------------------------
# checkpoints

def save_model(model: SegmenterModel, path) -> None:
    sections = []
    blob = bytearray()
    for p in model.all_params():
        mat = p.value if p.value.ndim == 2 else p.value.reshape(1, -1)
        sections.append((p.name, mat.shape[0], mat.shape[1], len(blob)))
        blob.extend(np.ascontiguousarray(mat, dtype="<f8").tobytes())
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(bytes([VERSION]))
        f.write(bytes([1 if model.use_radicals else 0]))
        table = model.radtable
        binio.write_string(f, table.sha256 if table is not None else "")
        binio.write_u32(f, model.vocab.size)
        for s in model.vocab.index_to_char:
            binio.write_string(f, s)
        binio.write_u32(f, len(sections))
        for name, rows, cols, offset in sections:
            binio.write_string(f, name)
            binio.write_u32(f, rows)
            binio.write_u32(f, cols)
            binio.write_u64(f, offset)
        f.write(bytes(blob))


def load_model(path, radtable: RadicalTable = None) -> SegmenterModel:
    """Rebuild a model from a checkpoint, verifying the radical table hash."""
    if radtable is None:
        from .radicals import default_table
        radtable = default_table()
    with open(path, "rb") as f:
        magic = binio.read_exact(f, len(MAGIC), "magic")
        if magic != MAGIC:
            raise binio.FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        version = binio.read_exact(f, 1, "version")[0]
        if version != VERSION:
            raise binio.FormatError(f"unsupported checkpoint version {version}")
        use_radicals = bool(binio.read_exact(f, 1, "radical flag")[0])
        saved_hash = binio.read_string(f, "radical table hash")
        if saved_hash != (radtable.sha256 or ""):
            raise binio.FormatError(
                f"radical table hash mismatch: checkpoint has {saved_hash[:12]!r}")
        vocab_size = binio.read_u32(f, "vocab size")
        index_to_char = [binio.read_string(f, f"vocab entry {i}") for i in range(vocab_size)]
        n_sections = binio.read_u32(f, "section count")
        entries = []
        for _ in range(n_sections):
            name = binio.read_string(f, "section name")
            rows = binio.read_u32(f, f"section {name} rows")
            cols = binio.read_u32(f, f"section {name} cols")
            offset = binio.read_u64(f, f"section {name} offset")
            entries.append((name, rows, cols, offset))
        blob = f.read()
    matrices = {}
    for name, rows, cols, offset in entries:
        end = offset + rows * cols * 8
        if end > len(blob):
            raise binio.FormatError(f"section {name!r}: data [{offset}:{end}) beyond blob of {len(blob)}")
        matrices[name] = np.frombuffer(blob[offset:end], dtype="<f8").reshape(rows, cols).copy()

    def take(name, expect_rows=None):
        if name not in matrices:
            raise binio.FormatError(f"section {name!r} missing from checkpoint")
        m = matrices[name]
        if expect_rows is not None and m.shape[0] != expect_rows:
            raise binio.FormatError(f"section {name!r}: {m.shape[0]} rows, expected {expect_rows}")
        return m

    char_vectors = take("emb.char_vectors", expect_rows=vocab_size)
    radical_vectors = take("emb.radical_vectors")
    vocab = Vocab(
        char_to_index={ch: i for i, ch in enumerate(index_to_char) if i >= 2},
        index_to_char=index_to_char,
    )
    from .embedding import EmbeddingConfig
    emb = EmbeddingSet(char_vectors=char_vectors, radical_vectors=radical_vectors,
                       vocab=vocab, radtable=radtable,
                       config=EmbeddingConfig(d_char=char_vectors.shape[1],
                                              d_radical=radical_vectors.shape[1]))
    hidden = take("fwd.W_hi").shape[0]
    model = build_model(emb, hidden=hidden, seed=0, use_radicals=use_radicals)
    for p in model.all_params():
        m = take(p.name)
        if m.size != p.value.size:
            raise binio.FormatError(
                f"section {p.name!r}: shape {m.shape} incompatible with {p.value.shape}")
        p.value[...] = m.reshape(p.value.shape)
    return model
