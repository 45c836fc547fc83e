"""Binary CART-style decision tree grown best-first under a leaf budget.

Growth keeps a priority queue of splittable leaves keyed by size-weighted
impurity decrease and expands the best one until the leaf budget is reached
or no leaf has a strictly positive gain. Everything is deterministic: equal
gains tie-break on (feature index, threshold), equal priorities on node
creation order.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import IO, Optional, Sequence, Union

import numpy as np

CRITERIA = ("gini", "entropy")

#: Version of the JSON model document this build reads and writes.
FORMAT_VERSION = 1


@dataclass(frozen=True)
class TreeConfig:
    criterion: str = "gini"
    max_leaf_nodes: int = 50
    min_samples_leaf: int = 1
    # Accepted for interface symmetry; growth itself has no random choices.
    seed: int = 324

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        if self.max_leaf_nodes < 1:
            raise ValueError(f"max_leaf_nodes must be >= 1, got {self.max_leaf_nodes}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")


@dataclass
class Split:
    """Internal node: go left iff feature value <= threshold."""

    feature: int
    threshold: float
    left: int
    right: int
    impurity: float
    n: int


@dataclass
class Leaf:
    """Terminal node predicting its training majority (tie -> class 0)."""

    label: int
    counts: tuple[int, int]  # (n class 0, n class 1)


def _impurity_values(n0, n1, criterion: str):
    """Vectorized impurity from class counts; counts may be arrays."""
    n0 = np.asarray(n0, dtype=float)
    n1 = np.asarray(n1, dtype=float)
    total = n0 + n1
    p0 = np.divide(n0, total, out=np.zeros_like(total), where=total > 0)
    p1 = np.divide(n1, total, out=np.zeros_like(total), where=total > 0)
    if criterion == "gini":
        return 1.0 - p0 * p0 - p1 * p1
    log0 = np.zeros_like(p0)
    log1 = np.zeros_like(p1)
    np.log2(p0, out=log0, where=p0 > 0)
    np.log2(p1, out=log1, where=p1 > 0)
    return -(p0 * log0 + p1 * log1)


def impurity(class_counts: tuple[int, int], criterion: str = "gini") -> float:
    """Gini (1 - p0^2 - p1^2) or entropy (-sum p log2 p, 0*log0 = 0)."""
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    n0, n1 = class_counts
    if n0 < 0 or n1 < 0 or n0 + n1 < 1:
        raise ValueError(f"class counts must be nonnegative and nonempty, got {class_counts}")
    return float(_impurity_values(n0, n1, criterion))


def _as_arrays(samples: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """Accept LabeledSample-likes or (features, label) pairs."""
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
    if X.ndim != 2:
        raise ValueError("samples must share one feature arity")
    y = np.asarray(labels, dtype=np.int64)
    if not set(labels) <= {0, 1}:
        raise ValueError("labels must be binary 0/1")
    return X, y


def _best_split(X: np.ndarray, y: np.ndarray, criterion: str,
                min_samples_leaf: int) -> Optional[tuple[int, float, float]]:
    """Best (feature, threshold, gain) with gain > 0, or None.

    Candidate thresholds are midpoints of consecutive distinct sorted values.
    Gain is the weighted impurity decrease relative to the node.
    """
    n = y.size
    if n < 2:
        return None
    c1 = int(y.sum())
    c0 = n - c1
    if c0 == 0 or c1 == 0:
        return None
    parent = float(_impurity_values(c0, c1, criterion))
    best = None
    best_gain = 0.0
    for feature in range(X.shape[1]):
        order = np.argsort(X[:, feature], kind="stable")
        values = X[order, feature]
        cum1 = np.cumsum(y[order])
        cuts = np.nonzero(values[:-1] < values[1:])[0]
        if cuts.size == 0:
            continue
        n_left = cuts + 1
        keep = (n_left >= min_samples_leaf) & (n - n_left >= min_samples_leaf)
        cuts = cuts[keep]
        if cuts.size == 0:
            continue
        n_left = cuts + 1
        n_right = n - n_left
        l1 = cum1[cuts]
        l0 = n_left - l1
        children = ((n_left / n) * _impurity_values(l0, l1, criterion)
                    + (n_right / n) * _impurity_values(c0 - l0, c1 - l1, criterion))
        gains = parent - children
        pos = int(np.argmax(gains))  # first max -> lowest threshold on ties
        if gains[pos] > best_gain:  # strict -> lowest feature index on ties
            threshold = float((values[cuts[pos]] + values[cuts[pos] + 1]) / 2.0)
            best = (feature, threshold, float(gains[pos]))
            best_gain = float(gains[pos])
    return best


def best_split(samples_at_node: Sequence, criterion: str = "gini",
               min_samples_leaf: int = 1) -> Optional[tuple[int, float, float]]:
    """Scan every feature of the node's samples for the best admissible split.

    Returns (feature_index, threshold, impurity_decrease) maximizing the
    weighted impurity decrease with both children >= min_samples_leaf, or
    None when no candidate strictly decreases impurity.
    """
    X, y = _as_arrays(samples_at_node)
    return _best_split(X, y, criterion, min_samples_leaf)


@dataclass
class TreeModel:
    """Trained tree: a node array rooted at index 0."""

    config: TreeConfig
    nodes: list
    n_features: int

    def predict(self, features: Sequence[float]) -> int:
        return predict_tree(self, features)

    @property
    def leaf_count(self) -> int:
        return sum(isinstance(node, Leaf) for node in self.nodes)

    def to_dict(self) -> dict:
        nodes = []
        for i, node in enumerate(self.nodes):
            if isinstance(node, Split):
                nodes.append({"id": i, "type": "split", **asdict(node)})
            else:
                nodes.append({"id": i, "type": "leaf", "label": node.label,
                              "counts": list(node.counts)})
        return {"version": FORMAT_VERSION, "kind": "tree",
                "config": asdict(self.config), "n_features": self.n_features,
                "nodes": nodes}

    @classmethod
    def from_dict(cls, doc: dict) -> "TreeModel":
        version = doc.get("version")
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported tree model version {version!r}; "
                             f"this build reads version {FORMAT_VERSION}")
        nodes: list = [None] * len(doc["nodes"])
        for rec in doc["nodes"]:
            if rec["type"] == "split":
                node = Split(feature=int(rec["feature"]), threshold=float(rec["threshold"]),
                             left=int(rec["left"]), right=int(rec["right"]),
                             impurity=float(rec["impurity"]), n=int(rec["n"]))
            else:
                node = Leaf(label=int(rec["label"]), counts=tuple(rec["counts"]))
            nodes[int(rec["id"])] = node
        if not nodes or any(n is None for n in nodes):
            raise ValueError("tree model document has missing node ids")
        return cls(config=TreeConfig(**doc["config"]), nodes=nodes,
                   n_features=int(doc["n_features"]))

    def save(self, sink: Union[str, Path, IO[str]]) -> None:
        text = json.dumps(self.to_dict(), sort_keys=True)
        if isinstance(sink, (str, Path)):
            Path(sink).write_text(text + "\n", encoding="utf-8")
        else:
            sink.write(text + "\n")

    @classmethod
    def load(cls, source: Union[str, Path, IO[str]]) -> "TreeModel":
        if isinstance(source, (str, Path)):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = source.read()
        return cls.from_dict(json.loads(text))


def train_tree(train_samples: Sequence, config: TreeConfig = TreeConfig()) -> TreeModel:
    """Grow a tree best-first until the leaf budget or gain is exhausted.

    The frontier is ordered by gain * node_size (largest first); expanding a
    leaf replaces it in place and appends its two children, so node ids
    record creation order.
    """
    X, y = _as_arrays(train_samples)
    nodes: list = []
    frontier: list = []  # (-priority, node_id, feature, threshold, gain, indices)

    def leaf_for(indices: np.ndarray) -> Leaf:
        c1 = int(y[indices].sum())
        c0 = int(indices.size) - c1
        return Leaf(label=1 if c1 > c0 else 0, counts=(c0, c1))

    def enqueue(node_id: int, indices: np.ndarray) -> None:
        found = _best_split(X[indices], y[indices],
                            config.criterion, config.min_samples_leaf)
        if found is not None:
            feature, threshold, gain = found
            heapq.heappush(frontier,
                           (-gain * indices.size, node_id, feature, threshold, gain, indices))

    root_indices = np.arange(y.size)
    nodes.append(leaf_for(root_indices))
    n_leaves = 1
    if config.max_leaf_nodes >= 2:
        enqueue(0, root_indices)

    while frontier and n_leaves < config.max_leaf_nodes:
        _, node_id, feature, threshold, gain, indices = heapq.heappop(frontier)
        goes_left = X[indices, feature] <= threshold
        left_indices = indices[goes_left]
        right_indices = indices[~goes_left]
        left_id = len(nodes)
        nodes.append(leaf_for(left_indices))
        right_id = len(nodes)
        nodes.append(leaf_for(right_indices))
        counts = nodes[node_id].counts
        nodes[node_id] = Split(feature=feature, threshold=threshold,
                               left=left_id, right=right_id,
                               impurity=impurity(counts, config.criterion),
                               n=int(indices.size))
        n_leaves += 1
        enqueue(left_id, left_indices)
        enqueue(right_id, right_indices)

    return TreeModel(config=config, nodes=nodes, n_features=X.shape[1])


def predict_tree(model: TreeModel, features: Sequence[float]) -> int:
    """Route from the root (left iff value <= threshold) to a leaf class."""
    x = tuple(float(v) for v in features)
    if len(x) != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {len(x)}")
    node = model.nodes[0]
    while isinstance(node, Split):
        node = model.nodes[node.left if x[node.feature] <= node.threshold else node.right]
    return node.label
