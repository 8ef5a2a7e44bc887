"""CSV ingestion, feature selection and scaling."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, ParseError, SchemaError, ValidationError

BUILTIN_PREFIX = "builtin:"
BUILTIN_DATASETS = {
    "iris": ("iris.csv", "species"),
    "breast_cancer": ("breast_cancer.csv", "diagnosis"),
}
BREAST_CANCER_MEAN_FEATURES = [
    "mean_radius",
    "mean_texture",
    "mean_perimeter",
    "mean_area",
    "mean_smoothness",
    "mean_compactness",
    "mean_concavity",
    "mean_concave_points",
    "mean_symmetry",
    "mean_fractal_dimension",
]
SCALINGS = ("none", "standard", "minmax", "standard_then_minmax")


def fingerprint_of(features, labels, feature_names) -> str:
    h = hashlib.sha256()
    feats = np.ascontiguousarray(features, dtype="<f8")
    h.update(repr(feats.shape).encode())
    h.update(feats.tobytes())
    h.update(np.ascontiguousarray(labels, dtype="<i8").tobytes())
    h.update("\x1f".join(feature_names).encode())
    return h.hexdigest()


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    class_names: list[str]
    feature_names: list[str]
    fingerprint: str = ""

    def __post_init__(self):
        feats = np.array(self.features, dtype=float)
        labels = np.array(self.labels, dtype=int)
        if feats.ndim != 2 or feats.shape[0] != labels.shape[0]:
            raise ValidationError(
                f"features {feats.shape} do not match {labels.shape[0]} labels"
            )
        if not np.all(np.isfinite(feats)):
            raise ValidationError("features contain NaN or Inf")
        if len(self.feature_names) != feats.shape[1]:
            raise ValidationError("feature_names length does not match feature columns")
        present = np.bincount(labels, minlength=len(self.class_names))
        if labels.min(initial=0) < 0 or len(present) != len(self.class_names) or np.any(present == 0):
            raise ValidationError("every class must be non-empty and labels must be 0..c-1")
        feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", list(self.class_names))
        object.__setattr__(self, "feature_names", list(self.feature_names))
        object.__setattr__(
            self, "fingerprint", fingerprint_of(feats, labels, self.feature_names)
        )

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


@dataclass(frozen=True)
class CsvSchema:
    label_column: str | int
    feature_columns: tuple | None = None
    has_header: bool = True


def resolve_path(path, base: Path | None = None) -> Path:
    """Expand ``builtin:<name>`` and make relative paths relative to ``base``."""
    path = str(path)
    if path.startswith(BUILTIN_PREFIX):
        name = path[len(BUILTIN_PREFIX):]
        if name not in BUILTIN_DATASETS:
            raise InvalidArgumentError(
                f"unknown builtin dataset {name!r}; have {sorted(BUILTIN_DATASETS)}"
            )
        return Path(str(resources.files("qkmeans") / "datasets" / BUILTIN_DATASETS[name][0]))
    p = Path(path)
    if not p.is_absolute() and base is not None:
        p = base / p
    return p


def _column_index(spec, header, ncols):
    if isinstance(spec, int) or (isinstance(spec, str) and spec.isdigit() and spec not in header):
        idx = int(spec)
        if idx < 0:
            idx += ncols
        if not 0 <= idx < ncols:
            raise SchemaError(f"column index {idx} out of range (file has {ncols} columns)")
        return idx
    if spec not in header:
        raise SchemaError(f"missing column {spec!r}; file has {header}")
    return header.index(spec)


def load_csv(path, schema: CsvSchema) -> Dataset:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as f:
        rows = [r for r in csv.reader(f) if r and any(c.strip() for c in r)]
    if schema.has_header:
        if not rows:
            raise ValidationError(f"{path}: empty file")
        header = [c.strip() for c in rows[0]]
        body = rows[1:]
        first_line = 2
    else:
        header = [str(i) for i in range(len(rows[0]))] if rows else []
        body = rows
        first_line = 1
    if len(body) < 2:
        raise ValidationError(f"{path}: need at least 2 data rows, got {len(body)}")
    ncols = len(header)
    label_idx = _column_index(schema.label_column, header, ncols)
    if schema.feature_columns is None:
        feat_idx = [i for i in range(ncols) if i != label_idx]
    else:
        feat_idx = [_column_index(c, header, ncols) for c in schema.feature_columns]
    if not feat_idx:
        raise ValidationError("no feature columns selected")

    features = np.empty((len(body), len(feat_idx)))
    class_index = {}
    labels = []
    for r, row in enumerate(body):
        line = first_line + r
        if len(row) != ncols:
            raise ParseError(f"{path}:{line}: expected {ncols} cells, got {len(row)}", row=line)
        for c, idx in enumerate(feat_idx):
            cell = row[idx].strip()
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}:{line}: column {header[idx]!r} holds non-numeric {cell!r}",
                    row=line, column=header[idx],
                ) from None
            if not np.isfinite(value):
                raise ParseError(
                    f"{path}:{line}: column {header[idx]!r} is not finite", row=line, column=header[idx]
                )
            features[r, c] = value
        name = row[label_idx].strip()
        labels.append(class_index.setdefault(name, len(class_index)))
    return Dataset(features, np.array(labels), list(class_index), [header[i] for i in feat_idx])


def load_builtin(name: str) -> Dataset:
    fname, label = BUILTIN_DATASETS[name]
    return load_csv(resolve_path(BUILTIN_PREFIX + name), CsvSchema(label))


def select_features(ds: Dataset, columns) -> Dataset:
    """Keep the given columns (indices or names), in the given order."""
    columns = list(columns)
    if not columns:
        raise ValidationError("feature selection must keep at least one column")
    idx = []
    for c in columns:
        if isinstance(c, (int, np.integer)):
            if not 0 <= c < ds.d:
                raise InvalidArgumentError(f"feature index {c} out of range 0..{ds.d - 1}")
            idx.append(int(c))
        elif c in ds.feature_names:
            idx.append(ds.feature_names.index(c))
        else:
            raise InvalidArgumentError(f"unknown feature {c!r}")
    return Dataset(
        ds.features[:, idx], ds.labels, ds.class_names, [ds.feature_names[i] for i in idx]
    )


@dataclass(frozen=True, eq=False)
class ScalingSpec:
    kind: str
    lo: float = 0.0
    hi: float = 1.0
    means: np.ndarray | None = None
    stds: np.ndarray | None = None
    mins: np.ndarray | None = None
    maxs: np.ndarray | None = None

    def transform(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=float)
        if self.means is not None:
            x = (x - self.means) / self.stds
        if self.mins is not None:
            span = self.maxs - self.mins
            safe = np.where(span > 0, span, 1.0)
            x = self.lo + (x - self.mins) / safe * (self.hi - self.lo)
            x = np.where(span > 0, x, self.lo)
        return x


def _fit_standard(x):
    # a constant column can have a mean a few ulps off its value; pin it so
    # the column maps to exactly 0
    const = x.max(axis=0) == x.min(axis=0)
    means = np.where(const, x[0], x.mean(axis=0))
    stds = x.std(axis=0)  # population std (ddof=0)
    stds = np.where(const | (stds == 0), 1.0, stds)
    return means, stds


def fit_scale(ds: Dataset, kind: str = "standard", lo: float = 0.0, hi: float = 1.0):
    """Fit a scaler on ``ds`` and return ``(scaled_dataset, spec)``.

    Constant columns go to 0 under standard scaling and to ``lo`` under
    min-max scaling.
    """
    if kind not in SCALINGS:
        raise InvalidArgumentError(f"unknown scaling {kind!r}; expected one of {SCALINGS}")
    if hi < lo:
        raise InvalidArgumentError(f"scaling range reversed: [{lo}, {hi}]")
    x = ds.features
    means = stds = mins = maxs = None
    if kind in ("standard", "standard_then_minmax"):
        means, stds = _fit_standard(x)
        x = (x - means) / stds
    if kind in ("minmax", "standard_then_minmax"):
        mins, maxs = x.min(axis=0), x.max(axis=0)
    spec = ScalingSpec(kind, float(lo), float(hi), means, stds, mins, maxs)
    return replace(ds, features=spec.transform(ds.features)), spec
