"""
Dataset ingestion (CSV, IDX), synthetic blobs and embedding export.

Every loaded or generated feature row is L2-normalized. Labels travel
alongside the features but the training API only ever sees
`LabeledDataset.features`.
"""

import csv
import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from suvr_engine.exceptions import DatasetFormatError
from suvr_engine.exceptions import NormTooSmallError
from suvr_engine.numeric import NORM_FLOOR
from suvr_engine.numeric import DenseMatrix
from suvr_engine.numeric import make_rng
from suvr_engine.numeric import normalize_rows
from suvr_engine.numeric import random_unit_rows

logger = logging.getLogger(__name__)

IDX_UNSIGNED_BYTE = 0x08


@dataclass(frozen=True)
class LabeledDataset:
    features: DenseMatrix
    labels: np.ndarray | None = None
    name: str = "dataset"
    # original CSV label text, indexed by label id
    label_names: tuple[str, ...] | None = None

    def __post_init__(self):
        n = self.features.shape[0]
        if self.labels is not None and len(self.labels) != n:
            raise DatasetFormatError(f"{len(self.labels)} labels for {n} instances")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d_in(self) -> int:
        return self.features.shape[1]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def subset(self, indices, name: str | None = None) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            features=self.features[indices],
            labels=None if self.labels is None else self.labels[indices],
            name=name or self.name,
            label_names=self.label_names,
        )


@dataclass(frozen=True)
class BlobSpec:
    num_classes: int = 3
    per_class: int = 100
    d_in: int = 16
    center_radius: float = 5.0
    noise_sigma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if min(self.num_classes, self.per_class, self.d_in) < 1:
            raise ValueError("blob counts and dimension must be >= 1")
        if self.center_radius <= 0 or self.noise_sigma <= 0:
            raise ValueError("blob radius and sigma must be > 0")


def _normalize_features(features: np.ndarray, source: str) -> DenseMatrix:
    norms = np.linalg.norm(features, axis=1)
    small = np.flatnonzero(norms < NORM_FLOOR)
    if small.size:
        raise DatasetFormatError(
            f"{source}: all-zero feature row cannot be normalized", row=int(small[0]) + 1
        )
    return features / norms[:, None]


def load_csv(
    path: str | Path, has_header: bool = False, label_column: int | None = None
) -> LabeledDataset:
    """
    Read a comma-separated numeric file.

    Label cells may hold any text; they are remapped to 0..C-1 in order of
    first appearance. Rows and columns in error messages are 1-based.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetFormatError(f"CSV file not found: {path}")
    rows: list[list[float]] = []
    raw_labels: list[str] = []
    width: int | None = None
    with path.open(newline="") as f:
        reader = csv.reader(f)
        for line_no, record in enumerate(reader, start=1):
            if has_header and line_no == 1:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
                if label_column is not None and label_column >= width:
                    raise DatasetFormatError(
                        f"{path}: label column {label_column} outside {width} columns",
                        row=line_no,
                    )
            elif len(record) != width:
                raise DatasetFormatError(
                    f"{path}: ragged row with {len(record)} cells, expected {width}",
                    row=line_no,
                )
            values = []
            for col, cell in enumerate(record):
                if col == label_column:
                    raw_labels.append(cell.strip())
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise DatasetFormatError(
                        f"{path}: non-numeric value {cell!r}", row=line_no, column=col + 1
                    ) from None
                if not math.isfinite(value):
                    raise DatasetFormatError(
                        f"{path}: non-finite value {cell!r}", row=line_no, column=col + 1
                    )
                values.append(value)
            rows.append(values)
    if not rows or not rows[0]:
        raise DatasetFormatError(f"{path}: no feature rows")
    labels = None
    names = None
    if label_column is not None:
        ids: dict[str, int] = {}
        labels = np.array([ids.setdefault(raw, len(ids)) for raw in raw_labels], dtype=np.int64)
        names = tuple(ids)
    features = _normalize_features(np.array(rows, dtype=np.float64), str(path))
    logger.info(f"Loaded {features.shape[0]} x {features.shape[1]} features from {path}")
    return LabeledDataset(features, labels, name=path.stem, label_names=names)


def align_labels(dataset: LabeledDataset, reference: LabeledDataset) -> LabeledDataset:
    """
    Re-express CSV label ids of `dataset` in the id space of `reference`.

    Label text unseen in `reference` gets fresh ids after the known ones.
    """
    if dataset.label_names is None or reference.label_names is None:
        return dataset
    ids = {name: i for i, name in enumerate(reference.label_names)}
    for name in dataset.label_names:
        ids.setdefault(name, len(ids))
    mapping = np.array([ids[name] for name in dataset.label_names], dtype=np.int64)
    return LabeledDataset(
        dataset.features, mapping[dataset.labels], dataset.name, tuple(ids)
    )


def _read_idx(path: Path) -> np.ndarray:
    # Header (big endian): 0x00 0x00 dtype ndims, then ndims uint32 sizes.
    if not path.is_file():
        raise DatasetFormatError(f"IDX file not found: {path}")
    data = path.read_bytes()
    if len(data) < 4 or data[0] != 0 or data[1] != 0:
        raise DatasetFormatError(f"{path}: bad IDX magic")
    dtype, ndims = data[2], data[3]
    if dtype != IDX_UNSIGNED_BYTE:
        raise DatasetFormatError(f"{path}: unsupported IDX dtype 0x{dtype:02x}")
    if ndims < 1:
        raise DatasetFormatError(f"{path}: IDX file declares no dimensions")
    header = 4 + 4 * ndims
    if len(data) < header:
        raise DatasetFormatError(f"{path}: truncated IDX header")
    dims = struct.unpack(f">{ndims}I", data[4:header])
    expected = math.prod(dims)
    if len(data) - header != expected:
        raise DatasetFormatError(
            f"{path}: IDX payload has {len(data) - header} bytes, dimensions {dims} need {expected}"
        )
    return np.frombuffer(data, dtype=np.uint8, offset=header).reshape(dims)


def load_idx(images_path: str | Path, labels_path: str | Path | None = None) -> LabeledDataset:
    """
    Decode unsigned-byte IDX images (and optional labels).

    Images are flattened to rows, scaled by 1/255 and L2-normalized.
    """
    images_path = Path(images_path)
    images = _read_idx(images_path)
    n = images.shape[0]
    pixels = images.reshape(n, -1).astype(np.float64) / 255.0
    if pixels.shape[1] == 0:
        raise DatasetFormatError(f"{images_path}: images have no pixels")
    labels = None
    if labels_path is not None:
        raw = _read_idx(Path(labels_path))
        if raw.ndim != 1:
            raise DatasetFormatError(f"{labels_path}: label file must be one-dimensional")
        if raw.shape[0] != n:
            raise DatasetFormatError(
                f"{labels_path}: {raw.shape[0]} labels for {n} images"
            )
        labels = raw.astype(np.int64)
    features = _normalize_features(pixels, str(images_path))
    logger.info(f"Loaded {n} IDX images of {features.shape[1]} pixels from {images_path}")
    return LabeledDataset(features, labels, name=images_path.stem)


def make_blobs(spec: BlobSpec) -> LabeledDataset:
    """
    Gaussian class blobs around random centers at distance `center_radius`.

    Instances are grouped by class (class 0 first) and normalized afterwards.
    """
    rng = make_rng(spec.seed)
    centers = random_unit_rows(spec.num_classes, spec.d_in, rng) * spec.center_radius
    labels = np.repeat(np.arange(spec.num_classes, dtype=np.int64), spec.per_class)
    noise = rng.standard_normal((labels.size, spec.d_in)) * spec.noise_sigma
    raw = centers[labels] + noise
    try:
        features = normalize_rows(raw)
    except NormTooSmallError as e:
        raise DatasetFormatError(f"blob generation produced a zero row: {e}") from e
    return LabeledDataset(features, labels, name="blobs")


def train_test_split(
    dataset: LabeledDataset, test_size: int, seed: int | np.random.SeedSequence
) -> tuple[LabeledDataset, LabeledDataset | None]:
    """Seeded split into (train, test); test is None when test_size is 0."""
    if test_size == 0:
        return dataset, None
    if not 0 < test_size < dataset.n:
        raise DatasetFormatError(
            f"test_size {test_size} must leave at least one of {dataset.n} instances for training"
        )
    order = make_rng(seed).permutation(dataset.n)
    test_idx = np.sort(order[:test_size])
    train_idx = np.sort(order[test_size:])
    return (
        dataset.subset(train_idx, name=f"{dataset.name}-train"),
        dataset.subset(test_idx, name=f"{dataset.name}-test"),
    )


def export_embeddings(embeddings, path: str | Path, labels=None) -> None:
    """
    Write embeddings as text.

    First line "n d has_labels", then one line per instance: index, d values
    with round-trip float formatting, and the label when present.
    """
    embeddings = np.asarray(embeddings, dtype=np.float64)
    if embeddings.ndim != 2 or embeddings.shape[0] == 0:
        raise DatasetFormatError("refusing to export an empty embedding matrix")
    n, d = embeddings.shape
    if labels is not None and len(labels) != n:
        raise DatasetFormatError(f"{len(labels)} labels for {n} embeddings")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        f.write(f"{n} {d} {int(labels is not None)}\n")
        for i, row in enumerate(embeddings):
            cells = [str(i), *(repr(float(x)) for x in row)]
            if labels is not None:
                cells.append(str(int(labels[i])))
            f.write(" ".join(cells) + "\n")
    logger.info(f"Exported {n} embeddings of dimension {d} to {path}")


def import_embeddings(path: str | Path) -> tuple[DenseMatrix, np.ndarray | None]:
    """Inverse of `export_embeddings`."""
    path = Path(path)
    if not path.is_file():
        raise DatasetFormatError(f"embedding file not found: {path}")
    with path.open() as f:
        try:
            n, d, has_labels = (int(tok) for tok in f.readline().split())
        except ValueError:
            raise DatasetFormatError(f"{path}: malformed header", row=1) from None
        width = 1 + d + has_labels
        matrix = np.empty((n, d), dtype=np.float64)
        labels = np.empty(n, dtype=np.int64) if has_labels else None
        for i in range(n):
            tokens = f.readline().split()
            if len(tokens) != width:
                raise DatasetFormatError(
                    f"{path}: expected {width} fields, found {len(tokens)}", row=i + 2
                )
            if int(tokens[0]) != i:
                raise DatasetFormatError(f"{path}: out-of-order index {tokens[0]}", row=i + 2)
            matrix[i] = [float(tok) for tok in tokens[1 : 1 + d]]
            if labels is not None:
                labels[i] = int(tokens[-1])
    return matrix, labels
