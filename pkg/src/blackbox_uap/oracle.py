"""Hard-label classifiers, query accounting and dataset/model file ingestion.

Every oracle exposes only the top-1 label of a query. Built-in models have
known geometry (linear, nearest-centroid, dense feed-forward) so boundary
distances can be checked against closed forms in tests.
"""
import csv
import json
import threading
from dataclasses import dataclass

import numpy as np

from ._validation import check_labels, check_samples, check_vector
from .exceptions import FitError, InputError, ParseError, SchemaError


class QueryCounter:
    """Thread-safe running count of oracle invocations."""

    def __init__(self):
        self._total = 0
        self._lock = threading.Lock()

    @property
    def total(self):
        return self._total

    def add(self, n=1):
        with self._lock:
            self._total += n

    def __getstate__(self):
        return {"_total": self._total}

    def __setstate__(self, state):
        self._total = state["_total"]
        self._lock = threading.Lock()


def _argmax_lowest(scores):
    # np.argmax already returns the first maximal index
    return int(np.argmax(scores))


class HardLabelOracle:
    """Black-box classifier ``f: R^d -> [K]`` returning only a label.

    Subclasses implement :meth:`_scores` (or override :meth:`_label`) and set
    ``dimension`` and ``class_count``. Model parameters are treated as
    immutable after construction, so one instance may be queried from many
    threads.
    """

    kind = None

    def __init__(self, dimension, class_count):
        self.dimension = int(dimension)
        self.class_count = int(class_count)
        self.counter = QueryCounter()

    @property
    def queries(self):
        return self.counter.total

    def classify(self, x):
        """Return the label of ``x`` and count one query."""
        x = check_vector(x, self.dimension)
        self.counter.add(1)
        return self._label(x)

    def predict(self, X):
        """Label every row of ``X``; counts one query per row."""
        X = check_samples(X, self.dimension)
        self.counter.add(X.shape[0])
        return np.array([self._label(x) for x in X], dtype=np.int64)

    def _label(self, x):
        return _argmax_lowest(self._scores(x))

    def _scores(self, x):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class LinearModel(HardLabelOracle):
    """``argmax_k (W x + b)_k`` with ties going to the lowest class index."""

    kind = "linear"

    def __init__(self, weights, biases):
        weights = np.array(weights, dtype=float, ndmin=2)
        biases = np.array(biases, dtype=float).reshape(-1)
        if weights.shape[0] != biases.shape[0]:
            raise SchemaError(
                f"linear model has {weights.shape[0]} weight rows but {biases.shape[0]} biases"
            )
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(biases))):
            raise SchemaError("linear model parameters must be finite")
        super().__init__(weights.shape[1], weights.shape[0])
        self.weights = weights
        self.biases = biases
        self.weights.setflags(write=False)
        self.biases.setflags(write=False)

    def _scores(self, x):
        return self.weights @ x + self.biases

    def to_dict(self):
        return {
            "kind": self.kind,
            "d": self.dimension,
            "k": self.class_count,
            "weights": self.weights.tolist(),
            "biases": self.biases.tolist(),
        }


class CentroidModel(HardLabelOracle):
    """Nearest centroid in Euclidean distance, ties to the lowest index."""

    kind = "centroid"

    def __init__(self, centroids):
        centroids = np.array(centroids, dtype=float, ndmin=2)
        if not np.all(np.isfinite(centroids)):
            raise SchemaError("centroids must be finite")
        super().__init__(centroids.shape[1], centroids.shape[0])
        self.centroids = centroids
        self.centroids.setflags(write=False)

    def _scores(self, x):
        diff = self.centroids - x
        return -np.einsum("ij,ij->i", diff, diff)

    def to_dict(self):
        return {
            "kind": self.kind,
            "d": self.dimension,
            "k": self.class_count,
            "centroids": self.centroids.tolist(),
        }


ACTIVATIONS = {
    "relu": lambda z: np.maximum(z, 0.0),
    "identity": lambda z: z,
}


@dataclass(frozen=True)
class DenseLayer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray
    activation: str = "identity"


class FeedForwardModel(HardLabelOracle):
    """Dense network; the last layer emits K class scores."""

    kind = "feedforward"

    def __init__(self, layers):
        built = []
        for i, layer in enumerate(layers):
            if isinstance(layer, DenseLayer):
                w, b, act = layer.weights, layer.bias, layer.activation
            else:
                w, b, act = layer
            w = np.array(w, dtype=float, ndmin=2)
            b = np.array(b, dtype=float).reshape(-1)
            if act not in ACTIVATIONS:
                raise SchemaError(f"layer {i}: unknown activation {act!r}")
            if w.shape[0] != b.shape[0]:
                raise SchemaError(f"layer {i}: {w.shape[0]} weight rows but {b.shape[0]} biases")
            if built and built[-1].weights.shape[0] != w.shape[1]:
                raise SchemaError(
                    f"layer {i}: expects {w.shape[1]} inputs, previous layer emits "
                    f"{built[-1].weights.shape[0]}"
                )
            w.setflags(write=False)
            b.setflags(write=False)
            built.append(DenseLayer(w, b, act))
        if not built:
            raise SchemaError("feedforward model needs at least one layer")
        super().__init__(built[0].weights.shape[1], built[-1].weights.shape[0])
        self.layers = tuple(built)

    def _scores(self, x):
        z = x
        for layer in self.layers:
            z = ACTIVATIONS[layer.activation](layer.weights @ z + layer.bias)
        return z

    def to_dict(self):
        return {
            "kind": self.kind,
            "d": self.dimension,
            "k": self.class_count,
            "layers": [
                {"weights": l.weights.tolist(), "bias": l.bias.tolist(), "activation": l.activation}
                for l in self.layers
            ],
        }


@dataclass(frozen=True)
class LabeledDataset:
    """The N (sample, label) pairs an attack is fitted on."""

    X: np.ndarray
    y: np.ndarray
    class_count: int

    def __post_init__(self):
        X = check_samples(self.X)
        if X.shape[0] == 0:
            raise InputError("dataset must be non-empty")
        y = check_labels(self.y, X.shape[0], self.class_count)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "class_count", int(self.class_count))

    @classmethod
    def from_arrays(cls, X, y, class_count=None):
        y = np.asarray(y)
        if class_count is None:
            class_count = int(np.max(y)) + 1 if y.size else 0
        return cls(np.asarray(X, dtype=float), y, class_count)

    @property
    def dimension(self):
        return self.X.shape[1]

    def __len__(self):
        return self.X.shape[0]

    def max_norm(self):
        return float(np.max(np.linalg.norm(self.X, axis=1)))

    def mean_norm(self):
        return float(np.mean(np.linalg.norm(self.X, axis=1)))


def load_dataset(path, class_count=None):
    """Read a headerless ``label,f_1,...,f_d`` CSV file.

    ``class_count`` overrides the inferred ``max(label) + 1``.
    """
    X, y = [], []
    width = None
    with open(path, newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise ParseError("expected a label and at least one feature", row_no)
            label_text = row[0].strip()
            if not label_text.isdigit():
                raise ParseError(f"label {label_text!r} is not a non-negative integer", row_no)
            try:
                features = [float(cell) for cell in row[1:]]
            except ValueError as exc:
                raise ParseError(f"bad feature value ({exc})", row_no) from None
            if not all(np.isfinite(features)):
                raise ParseError("features must be finite", row_no)
            if width is None:
                width = len(features)
            elif len(features) != width:
                raise ParseError(f"expected {width} features, found {len(features)}", row_no)
            y.append(int(label_text))
            X.append(features)
    if not X:
        raise ParseError(f"{path}: dataset is empty")
    inferred = max(y) + 1
    if class_count is None:
        class_count = inferred
    elif class_count < inferred:
        raise ParseError(f"label {max(y)} exceeds declared class count {class_count}")
    return LabeledDataset(np.array(X, dtype=float), np.array(y, dtype=np.int64), class_count)


def save_dataset(dataset, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for x, y in zip(dataset.X, dataset.y):
            writer.writerow([int(y)] + [repr(float(v)) for v in x])


def _require(doc, key):
    if key not in doc:
        raise SchemaError(f"model file missing field {key!r}")
    return doc[key]


def model_from_dict(doc):
    if not isinstance(doc, dict):
        raise SchemaError("model file must contain a JSON object")
    kind = _require(doc, "kind")
    try:
        if kind == "linear":
            model = LinearModel(_require(doc, "weights"), _require(doc, "biases"))
        elif kind == "centroid":
            model = CentroidModel(_require(doc, "centroids"))
        elif kind == "feedforward":
            layers = [
                (_require(l, "weights"), _require(l, "bias"), l.get("activation", "identity"))
                for l in _require(doc, "layers")
            ]
            model = FeedForwardModel(layers)
        else:
            raise SchemaError(f"unknown model kind {kind!r}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"malformed {kind} model: {exc}") from None
    if "d" in doc and int(doc["d"]) != model.dimension:
        raise SchemaError(f"declared d={doc['d']} but parameters imply d={model.dimension}")
    if "k" in doc and int(doc["k"]) != model.class_count:
        raise SchemaError(f"declared k={doc['k']} but parameters imply k={model.class_count}")
    return model


def load_model(path):
    """Build a :class:`HardLabelOracle` from a model JSON file."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(doc)


def dump_model(model):
    return json.dumps(model.to_dict(), indent=2) + "\n"


def save_model(model, path):
    with open(path, "w") as fh:
        fh.write(dump_model(model))


def fit_centroid(dataset):
    """Fit a nearest-centroid model: one class mean per label."""
    centroids = np.empty((dataset.class_count, dataset.dimension))
    for k in range(dataset.class_count):
        members = dataset.X[dataset.y == k]
        if members.shape[0] == 0:
            raise FitError(f"class {k} has no samples")
        centroids[k] = members.mean(axis=0)
    return CentroidModel(centroids)
