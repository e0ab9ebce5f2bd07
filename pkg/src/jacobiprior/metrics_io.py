"""Evaluation metrics, feature-file ingestion, model serialization, reports.

The deployable classifier serializes to a fixed little-endian layout:

    magic "TBJD" (4 bytes)
    format version, uint16 (= 1)
    p, uint32
    K, uint32
    a, float64
    b, float64
    coefficients, p*K float64 in class-major order (class 0's p values first)
    K class names, each uint16 byte length + UTF-8 bytes

Round trips are bitwise: load(save(m)) reproduces every coefficient bit.
The CLI's other artifacts (GP, ridge, PCA pipelines) use a separate
container magic "TBJX" so the plain format above stays exactly as written.
"""

from __future__ import annotations

import json
import struct
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import RidgeModel
from .dmr import JacobiDmrModel
from .errors import InvalidInput, ModelFormatError
from .features import PcaProjection, Standardizer
from .gp import JacobiGpModel

MAGIC_DMR = b"TBJD"
MAGIC_BUNDLE = b"TBJX"
FORMAT_VERSION = 1

_KIND_CODES = {"dmr": 1, "gp": 2, "ridge": 3}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}


@dataclass(frozen=True)
class FeatureDataset:
    """n x p feature matrix with integer class labels in 0..K-1."""

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes, columns are predicted classes."""

    counts: np.ndarray
    class_names: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "class_names": list(self.class_names),
            "counts": self.counts.tolist(),
        }


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion: ConfusionMatrix
    fit_seconds: float | None = None
    predict_micros_per_sample: float | None = None

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "confusion": self.confusion.to_dict(),
            "fit_seconds": self.fit_seconds,
            "predict_micros_per_sample": self.predict_micros_per_sample,
        }


def evaluate(true_labels, predicted_labels, class_names,
             fit_seconds: float | None = None,
             predict_micros_per_sample: float | None = None) -> EvalReport:
    """Accuracy and macro-averaged precision/recall/F1.

    Macro aggregates are unweighted class means; a class with zero support
    or zero predicted count contributes 0, never NaN, so the averages are
    always defined.
"""
    true = np.asarray(true_labels, dtype=np.int64).ravel()
    pred = np.asarray(predicted_labels, dtype=np.int64).ravel()
    if true.shape[0] != pred.shape[0]:
        raise InvalidInput(
            f"label vectors disagree in length: {true.shape[0]} vs {pred.shape[0]}"
        )
    if true.shape[0] == 0:
        raise InvalidInput("cannot evaluate zero samples")
    names = tuple(str(c) for c in class_names)
    K = len(names)
    if true.min() < 0 or pred.min() < 0 or true.max() >= K or pred.max() >= K:
        raise InvalidInput(f"labels out of range for {K} classes")

    counts = np.zeros((K, K), dtype=np.int64)
    np.add.at(counts, (true, pred), 1)

    diag = np.diag(counts).astype(np.float64)
    support = counts.sum(axis=1).astype(np.float64)
    predicted = counts.sum(axis=0).astype(np.float64)
    precision = np.divide(diag, predicted, out=np.zeros(K), where=predicted > 0)
    recall = np.divide(diag, support, out=np.zeros(K), where=support > 0)
    pr = precision + recall
    f1 = np.divide(2 * precision * recall, pr, out=np.zeros(K), where=pr > 0)

    return EvalReport(
        accuracy=float(diag.sum() / true.shape[0]),
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        confusion=ConfusionMatrix(counts=counts, class_names=names),
        fit_seconds=fit_seconds,
        predict_micros_per_sample=predict_micros_per_sample,
    )


def time_fit(fit_closure) -> tuple[float, object]:
    """Wall-clock a single invocation on the monotonic timer.

    Returns (seconds rounded to microsecond resolution, closure result).
    """
    start = time.perf_counter()
    result = fit_closure()
    elapsed = time.perf_counter() - start
    return round(elapsed, 6), result


# ---------------------------------------------------------------------------
# feature CSV ingestion


def load_feature_csv(path) -> FeatureDataset:
    """Parse a ``label,f0,...,f{p-1}`` CSV into a FeatureDataset.

    The label column holds class-name strings; indices are assigned by first
    appearance.  Rows with the wrong field count or non-numeric features are
    rejected with the offending line number.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise InvalidInput(f"{path}: empty file")
    header = lines[0].split(",")
    if len(header) < 2 or header[0].strip() != "label":
        raise InvalidInput(
            f"{path}: header must be 'label,f0,...', got {lines[0][:80]!r}"
        )
    p = len(header) - 1

    names: list[str] = []
    index: dict[str, int] = {}
    labels: list[int] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != p + 1:
            raise InvalidInput(
                f"{path}: line {lineno} has {len(fields) - 1} features, expected {p}"
            )
        label = fields[0].strip()
        if label not in index:
            index[label] = len(names)
            names.append(label)
        labels.append(index[label])
        try:
            rows.append([float(v) for v in fields[1:]])
        except ValueError as exc:
            raise InvalidInput(f"{path}: line {lineno}: non-numeric feature ({exc})") from exc
    if not rows:
        raise InvalidInput(f"{path}: no data rows")
    return FeatureDataset(
        features=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        class_names=tuple(names),
    )


def write_feature_csv(path, features, labels, class_names) -> None:
    """Inverse of load_feature_csv, mainly for fixtures and round trips."""
    X = np.asarray(features, dtype=np.float64)
    lab = np.asarray(labels, dtype=np.int64)
    names = [str(c) for c in class_names]
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("label," + ",".join(f"f{j}" for j in range(X.shape[1])) + "\n")
        for i in range(X.shape[0]):
            row = ",".join(repr(float(v)) for v in X[i])
            handle.write(f"{names[lab[i]]},{row}\n")


# ---------------------------------------------------------------------------
# binary model serialization


def _pack_names(class_names) -> bytes:
    out = bytearray()
    for name in class_names:
        raw = str(name).encode("utf-8")
        if len(raw) > 0xFFFF:
            raise InvalidInput(f"class name too long: {name!r}")
        out += struct.pack("<H", len(raw)) + raw
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise ModelFormatError(f"{self.path}: truncated file")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def names(self, count: int) -> tuple[str, ...]:
        out = []
        for _ in range(count):
            (length,) = self.unpack("<H")
            out.append(self.take(length).decode("utf-8"))
        return tuple(out)

    def array(self, count: int, shape) -> np.ndarray:
        raw = self.take(8 * count)
        return np.frombuffer(raw, dtype="<f8").reshape(shape).copy()

    def done(self):
        if self.offset != len(self.data):
            raise ModelFormatError(f"{self.path}: trailing bytes after model payload")


def _dmr_record(model: JacobiDmrModel) -> bytes:
    header = MAGIC_DMR + struct.pack(
        "<HIIdd", FORMAT_VERSION, model.p, model.num_classes, model.a, model.b
    )
    payload = np.ascontiguousarray(model.coefficients.T, dtype="<f8").tobytes()
    return header + payload + _pack_names(model.class_names)


def _read_dmr_record(reader: _Reader) -> JacobiDmrModel:
    magic = reader.take(4)
    if magic != MAGIC_DMR:
        raise ModelFormatError(f"{reader.path}: bad magic {magic!r}")
    version, p, K = reader.unpack("<HII")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"{reader.path}: unsupported format version {version}")
    a, b = reader.unpack("<dd")
    coef = reader.array(p * K, (K, p)).T.copy()
    names = reader.names(K)
    return JacobiDmrModel(coefficients=coef, a=a, b=b, class_names=names)


def save_model(model: JacobiDmrModel, path) -> None:
    """Write the deployable classifier in the fixed little-endian layout."""
    if not isinstance(model, JacobiDmrModel):
        raise InvalidInput("save_model only serializes the linear classifier")
    Path(path).write_bytes(_dmr_record(model))


def load_model(path) -> JacobiDmrModel:
    """Bit-exact inverse of save_model."""
    reader = _Reader(Path(path).read_bytes(), path)
    model = _read_dmr_record(reader)
    reader.done()
    return model


# --- container for the CLI's other artifacts (GP, ridge, PCA pipelines) ---


def _pca_block(proj: PcaProjection) -> bytes:
    p, d = proj.components.shape
    return (
        struct.pack("<II", p, d)
        + np.ascontiguousarray(proj.mean, dtype="<f8").tobytes()
        + np.ascontiguousarray(proj.components, dtype="<f8").tobytes()
        + np.ascontiguousarray(proj.explained_variance, dtype="<f8").tobytes()
        + struct.pack("<d", proj.total_variance)
    )


def _read_pca_block(reader: _Reader) -> PcaProjection:
    p, d = reader.unpack("<II")
    mean = reader.array(p, (p,))
    components = reader.array(p * d, (p, d))
    explained = reader.array(d, (d,))
    (total,) = reader.unpack("<d")
    return PcaProjection(mean=mean, components=components,
                         explained_variance=explained, total_variance=total)


def _gp_block(model: JacobiGpModel) -> bytes:
    n, p = model.train_X.shape
    K = model.num_classes
    return (
        struct.pack("<III", n, p, K)
        + struct.pack("<ddddd", model.length_scale, model.signal_var,
                      model.noise_var, model.a, model.b)
        + np.ascontiguousarray(model.train_X, dtype="<f8").tobytes()
        + np.ascontiguousarray(model.alphas, dtype="<f8").tobytes()
        + np.ascontiguousarray(model.target_means, dtype="<f8").tobytes()
        + _pack_names(model.class_names)
    )


def _read_gp_block(reader: _Reader) -> JacobiGpModel:
    n, p, K = reader.unpack("<III")
    ls, sv, nv, a, b = reader.unpack("<ddddd")
    train_X = reader.array(n * p, (n, p))
    alphas = reader.array(n * K, (n, K))
    means = reader.array(K, (K,))
    names = reader.names(K)
    return JacobiGpModel(train_X=train_X, alphas=alphas, length_scale=ls,
                         signal_var=sv, noise_var=nv, a=a, b=b,
                         class_names=names, target_means=means)


def _ridge_block(model: RidgeModel) -> bytes:
    p, K = model.coefficients.shape
    return (
        struct.pack("<IId", p, K, model.alpha)
        + np.ascontiguousarray(model.coefficients.T, dtype="<f8").tobytes()
        + np.ascontiguousarray(model.intercepts, dtype="<f8").tobytes()
        + np.ascontiguousarray(model.standardizer.mean, dtype="<f8").tobytes()
        + np.ascontiguousarray(model.standardizer.scale, dtype="<f8").tobytes()
        + _pack_names(model.class_names)
    )


def _read_ridge_block(reader: _Reader) -> RidgeModel:
    p, K, alpha = reader.unpack("<IId")
    coef = reader.array(p * K, (K, p)).T.copy()
    intercepts = reader.array(K, (K,))
    mean = reader.array(p, (p,))
    scale = reader.array(p, (p,))
    names = reader.names(K)
    return RidgeModel(coefficients=coef, intercepts=intercepts, alpha=alpha,
                      standardizer=Standardizer(mean=mean, scale=scale),
                      class_names=names)


def save_classifier(path, model, pca: PcaProjection | None = None) -> None:
    """Serialize any trained classifier, optionally bundled with a PCA step.

    A plain linear classifier without PCA uses the fixed TBJD layout; every
    other combination goes into the TBJX container.
    """
    if isinstance(model, JacobiDmrModel) and pca is None:
        save_model(model, path)
        return
    if isinstance(model, JacobiDmrModel):
        kind = "dmr"
        block = _dmr_record(model)
    elif isinstance(model, JacobiGpModel):
        kind = "gp"
        block = _gp_block(model)
    elif isinstance(model, RidgeModel):
        kind = "ridge"
        block = _ridge_block(model)
    else:
        raise InvalidInput(f"cannot serialize object of type {type(model).__name__}")
    out = MAGIC_BUNDLE + struct.pack(
        "<HBB", FORMAT_VERSION, _KIND_CODES[kind], 1 if pca is not None else 0
    )
    if pca is not None:
        out += _pca_block(pca)
    Path(path).write_bytes(out + block)


def load_classifier(path):
    """Load either layout; returns (model, pca-or-None, kind string)."""
    data = Path(path).read_bytes()
    if data[:4] == MAGIC_DMR:
        reader = _Reader(data, path)
        model = _read_dmr_record(reader)
        reader.done()
        return model, None, "dmr"
    if data[:4] != MAGIC_BUNDLE:
        raise ModelFormatError(f"{path}: bad magic {data[:4]!r}")
    reader = _Reader(data, path)
    reader.take(4)
    version, kind_code, has_pca = reader.unpack("<HBB")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {version}")
    if kind_code not in _KIND_NAMES:
        raise ModelFormatError(f"{path}: unknown model kind {kind_code}")
    pca = _read_pca_block(reader) if has_pca else None
    kind = _KIND_NAMES[kind_code]
    if kind == "dmr":
        model = _read_dmr_record(reader)
    elif kind == "gp":
        model = _read_gp_block(reader)
    else:
        model = _read_ridge_block(reader)
    reader.done()
    return model, pca, kind


# ---------------------------------------------------------------------------
# JSON reports


def write_json_report(path, payload: dict) -> None:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    text = json.dumps(payload, sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")
