"""From-scratch k-nearest-neighbors with the square-root-of-n default k.

A lazy learner: training stores the data verbatim. Prediction is an exact
full scan; the k nearest neighbors are chosen by (distance, training index)
so ties resolve toward the earlier training row.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Optional, Sequence, Union

import numpy as np

SCALINGS = ("none", "standardize")

FORMAT_VERSION = 1


def default_k(n: int) -> int:
    """floor(sqrt(n)), decremented to odd so binary votes cannot tie."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    k = math.isqrt(n)
    if k % 2 == 0:
        k -= 1
    return max(k, 1)


def _standardize(values: np.ndarray, means: np.ndarray, stds: np.ndarray) -> np.ndarray:
    """Z-score features; zero-variance features collapse to 0 on both sides."""
    safe = np.where(stds > 0, stds, 1.0)
    z = (values - means) / safe
    return np.where(stds > 0, z, 0.0)


@dataclass
class KnnModel:
    features: np.ndarray  # (n, d)
    labels: np.ndarray    # (n,) of {0,1}
    k: int
    scaling: str
    means: Optional[np.ndarray] = None
    stds: Optional[np.ndarray] = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features and labels must align")
        if not 1 <= self.k <= self.labels.size:
            raise ValueError(f"k must be in [1, {self.labels.size}], got {self.k}")
        if self.scaling not in SCALINGS:
            raise ValueError(f"scaling must be one of {SCALINGS}, got {self.scaling!r}")
        if self.scaling == "standardize":
            if self.means is None or self.stds is None:
                raise ValueError("standardize scaling requires means and stds")
            self.means = np.asarray(self.means, dtype=float)
            self.stds = np.asarray(self.stds, dtype=float)
        self._train = self._transform(self.features)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def _transform(self, values: np.ndarray) -> np.ndarray:
        if self.scaling == "none":
            return np.asarray(values, dtype=float)
        return _standardize(np.asarray(values, dtype=float), self.means, self.stds)

    def predict(self, query: Sequence[float]) -> int:
        return predict_knn(self, query)

    def predict_many(self, queries: Sequence[Sequence[float]],
                     block: int = 256) -> np.ndarray:
        """Vectorized batch prediction; identical results to predict()."""
        Q = np.asarray(list(queries), dtype=float)
        if Q.ndim != 2 or Q.shape[1] != self.n_features:
            raise ValueError(f"queries must be (m, {self.n_features})")
        out = np.empty(Q.shape[0], dtype=np.int64)
        for start in range(0, Q.shape[0], block):
            chunk = self._transform(Q[start:start + block])
            sq = _squared_distances(chunk, self._train)
            order = np.argsort(sq, axis=1, kind="stable")[:, :self.k]
            ones = self.labels[order].sum(axis=1)
            out[start:start + block] = _vote(ones, self.k)
        return out

    def distance(self, a: Sequence[float], b: Sequence[float]) -> float:
        """Distance under this model's scaling."""
        stats = (self.means, self.stds) if self.scaling == "standardize" else None
        return distance(a, b, self.scaling, stats)

    def to_dict(self) -> dict:
        doc = {"version": FORMAT_VERSION, "kind": "knn", "k": self.k,
               "scaling": self.scaling,
               "data": [[*map(float, row), int(label)]
                        for row, label in zip(self.features, self.labels)]}
        if self.scaling == "standardize":
            doc["stats"] = {"means": [float(v) for v in self.means],
                            "stds": [float(v) for v in self.stds]}
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "KnnModel":
        version = doc.get("version")
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported knn model version {version!r}; "
                             f"this build reads version {FORMAT_VERSION}")
        rows = np.asarray(doc["data"], dtype=float)
        if rows.ndim != 2 or rows.shape[1] < 2:
            raise ValueError("knn model data must be rows of features plus a label")
        stats = doc.get("stats") or {}
        return cls(features=rows[:, :-1], labels=rows[:, -1].astype(np.int64),
                   k=int(doc["k"]), scaling=doc["scaling"],
                   means=stats.get("means"), stds=stats.get("stds"))

    def save(self, sink: Union[str, Path, IO[str]]) -> None:
        text = json.dumps(self.to_dict(), sort_keys=True)
        if isinstance(sink, (str, Path)):
            Path(sink).write_text(text + "\n", encoding="utf-8")
        else:
            sink.write(text + "\n")

    @classmethod
    def load(cls, source: Union[str, Path, IO[str]]) -> "KnnModel":
        if isinstance(source, (str, Path)):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = source.read()
        return cls.from_dict(json.loads(text))


def train_knn(samples: Sequence, k: int, scaling: str = "none") -> KnnModel:
    """Store the training set verbatim; compute scaling stats if requested."""
    if len(samples) == 0:
        raise ValueError("empty training set")
    feats, labels = [], []
    for s in samples:
        if hasattr(s, "features"):
            f, y = s.features, s.label
        else:
            f, y = s
        feats.append(tuple(float(v) for v in f))
        labels.append(int(y))
    X = np.asarray(feats, dtype=float)
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k must be in [1, {X.shape[0]}], got {k}")
    means = stds = None
    if scaling == "standardize":
        means = X.mean(axis=0)
        stds = X.std(axis=0)
    return KnnModel(features=X, labels=np.asarray(labels), k=k,
                    scaling=scaling, means=means, stds=stds)


def _squared_distances(Q: np.ndarray, T: np.ndarray) -> np.ndarray:
    """(m, n) squared Euclidean distances, accumulated feature by feature.

    The per-feature accumulation keeps the floating-point evaluation order
    identical for single queries and batches, so ties are reproducible.
    """
    out = np.zeros((Q.shape[0], T.shape[0]))
    for j in range(Q.shape[1]):
        diff = Q[:, j, None] - T[None, :, j]
        out += diff * diff
    return out


def distance(a: Sequence[float], b: Sequence[float], scaling: str = "none",
             stats: Optional[tuple[np.ndarray, np.ndarray]] = None) -> float:
    """Euclidean distance over (optionally standardized) coordinates."""
    va = np.asarray(tuple(float(v) for v in a))
    vb = np.asarray(tuple(float(v) for v in b))
    if va.shape != vb.shape:
        raise ValueError(f"arity mismatch: {va.shape[0]} vs {vb.shape[0]}")
    if scaling not in SCALINGS:
        raise ValueError(f"scaling must be one of {SCALINGS}, got {scaling!r}")
    if scaling == "standardize":
        if stats is None:
            raise ValueError("standardize scaling requires (means, stds) stats")
        means = np.asarray(stats[0], dtype=float)
        stds = np.asarray(stats[1], dtype=float)
        va = _standardize(va, means, stds)
        vb = _standardize(vb, means, stds)
    return float(np.sqrt(_squared_distances(va[None, :], vb[None, :])[0, 0]))


def _vote(ones, k: int):
    """Majority vote from the count of label-1 neighbors; exact ties -> 0."""
    return (np.asarray(ones) * 2 > k).astype(np.int64)


def predict_knn(model: KnnModel, query: Sequence[float]) -> int:
    """Majority label among the k nearest, ties on distance by lower index."""
    q = tuple(float(v) for v in query)
    if len(q) != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {len(q)}")
    z = model._transform(np.asarray(q)[None, :])
    sq = _squared_distances(z, model._train)[0]
    order = np.argsort(sq, kind="stable")[:model.k]
    ones = int(model.labels[order].sum())
    return int(_vote(ones, model.k))
