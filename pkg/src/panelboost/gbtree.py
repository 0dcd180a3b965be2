"""Second-order gradient-boosted regression trees.

Squared-error boosting with exact greedy split finding, learned default
directions for missing values, L1/L2 leaf regularization, a per-leaf
split penalty, and seeded row/column subsampling. Everything is
deterministic given (data, params, seed).

Loss is l(y, yhat) = 1/2 (y - yhat)^2, so g = yhat - y and h = 1; leaf
weights are the classic -G/(H + lambda) with L1 soft-thresholding of G.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ModelFormatError

MODEL_FORMAT_VERSION = 1

# JSON field names for the two regularizers keep the conventional short
# names; the Python attributes avoid the `lambda` keyword.
_HP_JSON_NAMES = {"reg_lambda": "lambda", "reg_alpha": "alpha"}


@dataclass(frozen=True)
class HyperParams:
    n_estimators: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_child_weight: float = 1.0
    gamma: float = 0.0
    subsample: float = 1.0
    colsample_bytree: float = 1.0
    colsample_bylevel: float = 1.0
    reg_lambda: float = 1.0
    reg_alpha: float = 0.0
    scale_pos_weight: float = 1.0

    def __post_init__(self):
        checks = [
            (self.n_estimators >= 0, "n_estimators must be >= 0"),
            (0 < self.learning_rate <= 1, "learning_rate must be in (0, 1]"),
            (self.max_depth >= 0, "max_depth must be >= 0"),
            (self.min_child_weight >= 0, "min_child_weight must be >= 0"),
            (self.gamma >= 0, "gamma must be >= 0"),
            (0 < self.subsample <= 1, "subsample must be in (0, 1]"),
            (0 < self.colsample_bytree <= 1, "colsample_bytree must be in (0, 1]"),
            (0 < self.colsample_bylevel <= 1, "colsample_bylevel must be in (0, 1]"),
            (self.reg_lambda >= 0, "lambda must be >= 0"),
            (self.reg_alpha >= 0, "alpha must be >= 0"),
            (self.scale_pos_weight > 0, "scale_pos_weight must be > 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)
        if self.scale_pos_weight != 1.0:
            warnings.warn(
                "scale_pos_weight is accepted but ignored for regression",
                stacklevel=2,
            )

    def to_json_dict(self) -> dict:
        d = asdict(self)
        for attr, name in _HP_JSON_NAMES.items():
            d[name] = d.pop(attr)
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "HyperParams":
        d = dict(d)
        for attr, name in _HP_JSON_NAMES.items():
            if name in d:
                d[attr] = d.pop(name)
        return cls(**d)


@dataclass(frozen=True)
class Leaf:
    weight: float


@dataclass(frozen=True)
class Split:
    feature_index: int
    threshold: float
    default_goes_left: bool
    left: "Leaf | Split"
    right: "Leaf | Split"


TreeNode = Leaf | Split


@dataclass(frozen=True)
class RegressionTree:
    root: TreeNode
    num_leaves: int

    def predict_row(self, row: np.ndarray) -> float:
        node = self.root
        while isinstance(node, Split):
            v = row[node.feature_index]
            if math.isnan(v):
                node = node.left if node.default_goes_left else node.right
            elif v < node.threshold:
                node = node.left
            else:
                node = node.right
        return node.weight


@dataclass(frozen=True)
class BoostedModel:
    base_score: float
    trees: tuple[RegressionTree, ...]
    learning_rate: float
    feature_codes: tuple[str, ...]
    hyperparams: HyperParams
    seed: int


def compute_gradients(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    """Gradient / hessian of 1/2 (y - yhat)^2 w.r.t. yhat: (yhat - y, 1)."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.size < 1:
        raise ValueError(f"length mismatch: {y.shape} vs {yhat.shape}")
    return yhat - y, np.ones_like(y)


def _soft_threshold(g: float, alpha: float) -> float:
    if g > alpha:
        return g - alpha
    if g < -alpha:
        return g + alpha
    return 0.0


def leaf_weight(G: float, H: float, reg_lambda: float, reg_alpha: float) -> float:
    """Minimizer of G*w + 1/2 (H + lambda) w^2 + alpha |w|."""
    if not H + reg_lambda > 0:
        raise ValueError(f"H + lambda must be positive, got {H + reg_lambda}")
    return -_soft_threshold(G, reg_alpha) / (H + reg_lambda)


def split_gain(
    G_L: float, H_L: float, G_R: float, H_R: float, reg_lambda: float, gamma: float
) -> float:
    """Objective reduction from splitting one node into (L, R), minus gamma."""
    if not (H_L + reg_lambda > 0 and H_R + reg_lambda > 0):
        raise ValueError("each child must satisfy H + lambda > 0")
    G, H = G_L + G_R, H_L + H_R
    return 0.5 * (
        G_L**2 / (H_L + reg_lambda)
        + G_R**2 / (H_R + reg_lambda)
        - G**2 / (H + reg_lambda)
    ) - gamma


def _subsample(indices: list[int], fraction: float, rng: np.random.Generator) -> list[int]:
    """Fisher-Yates draw of floor(fraction*n) elements (min 1), sorted order."""
    n = len(indices)
    if fraction >= 1.0 or n <= 1:
        return list(indices)
    m = max(1, int(math.floor(fraction * n)))
    pool = sorted(indices)
    for i in range(m):
        j = i + int(rng.integers(0, n - i))
        pool[i], pool[j] = pool[j], pool[i]
    return sorted(pool[:m])


@dataclass
class _BestSplit:
    gain: float = -math.inf
    feature: int = -1
    threshold: float = math.nan
    default_left: bool = True
    left_rows: list[int] = field(default_factory=list)
    right_rows: list[int] = field(default_factory=list)


def _find_best_split(X, g, h, rows, features, params: HyperParams) -> _BestSplit:
    """Exact greedy search over (feature, midpoint threshold, default side).

    Deterministic argmax: strict improvement only, scanning features in
    ascending index and thresholds in ascending value, default-left first.
    """
    best = _BestSplit()
    for f in features:
        col = X[rows, f]
        present_mask = ~np.isnan(col)
        present = [rows[i] for i in range(len(rows)) if present_mask[i]]
        missing = [rows[i] for i in range(len(rows)) if not present_mask[i]]
        if len(present) < 2:
            continue
        order = sorted(present, key=lambda r: X[r, f])
        vals = [X[r, f] for r in order]
        G_miss = float(g[missing].sum())
        H_miss = float(h[missing].sum())
        G_all = float(g[rows].sum())
        H_all = float(h[rows].sum())
        G_pref = 0.0
        H_pref = 0.0
        for p in range(1, len(order)):
            G_pref += float(g[order[p - 1]])
            H_pref += float(h[order[p - 1]])
            if vals[p] == vals[p - 1]:
                continue
            threshold = 0.5 * (vals[p - 1] + vals[p])
            for default_left in (True, False):
                G_L = G_pref + (G_miss if default_left else 0.0)
                H_L = H_pref + (H_miss if default_left else 0.0)
                G_R = G_all - G_L
                H_R = H_all - H_L
                if H_L + params.reg_lambda <= 0 or H_R + params.reg_lambda <= 0:
                    continue
                if H_L < params.min_child_weight or H_R < params.min_child_weight:
                    continue
                gain = split_gain(G_L, H_L, G_R, H_R, params.reg_lambda, params.gamma)
                if gain > best.gain:
                    left = order[:p] + (missing if default_left else [])
                    right = order[p:] + ([] if default_left else missing)
                    best = _BestSplit(
                        gain, f, threshold, default_left, sorted(left), sorted(right)
                    )
    return best


def grow_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    rows: list[int],
    params: HyperParams,
    rng: np.random.Generator,
) -> RegressionTree:
    """Grow one regression tree by exact greedy splitting.

    Row subsampling happens once per tree; column sampling once per tree
    and then once per depth level, all from the supplied generator.
    """
    if len(rows) == 0:
        raise ValueError("rows must be non-empty")
    rows = _subsample(list(rows), params.subsample, rng)
    n_features = X.shape[1]
    tree_cols = _subsample(list(range(n_features)), params.colsample_bytree, rng)
    level_cols = [
        _subsample(tree_cols, params.colsample_bylevel, rng)
        for _ in range(max(params.max_depth, 0))
    ]

    num_leaves = 0

    def build(node_rows: list[int], depth: int) -> TreeNode:
        nonlocal num_leaves
        G = float(g[node_rows].sum())
        H = float(h[node_rows].sum())
        if depth < params.max_depth and len(node_rows) >= 2:
            best = _find_best_split(X, g, h, node_rows, level_cols[depth], params)
            if best.gain > 0 and best.left_rows and best.right_rows:
                left = build(best.left_rows, depth + 1)
                right = build(best.right_rows, depth + 1)
                return Split(best.feature, best.threshold, best.default_left, left, right)
        num_leaves += 1
        return Leaf(leaf_weight(G, H, params.reg_lambda, params.reg_alpha))

    root = build(rows, 0)
    return RegressionTree(root=root, num_leaves=num_leaves)


def fit(
    X: np.ndarray,
    y: np.ndarray,
    feature_codes: list[str],
    params: HyperParams,
    seed: int,
) -> BoostedModel:
    """Boost n_estimators trees against the squared-error gradients.

    The starting prediction is the training-target mean; each round adds
    learning_rate times the new tree's output.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X and y must align on rows")
    if y.size < 2:
        raise ValueError("need at least 2 training rows")
    if not np.isfinite(y).all():
        raise ValueError("target contains non-finite values")
    if X.shape[1] != len(feature_codes):
        raise ValueError("feature_codes must match the number of columns")

    rng = np.random.Generator(np.random.PCG64(seed))
    base_score = float(y.mean())
    yhat = np.full_like(y, base_score)
    rows = list(range(len(y)))
    trees = []
    for _ in range(params.n_estimators):
        g, h = compute_gradients(y, yhat)
        tree = grow_tree(X, g, h, rows, params, rng)
        trees.append(tree)
        yhat = yhat + params.learning_rate * np.array(
            [tree.predict_row(X[i]) for i in rows]
        )
    return BoostedModel(
        base_score=base_score,
        trees=tuple(trees),
        learning_rate=params.learning_rate,
        feature_codes=tuple(feature_codes),
        hyperparams=params,
        seed=int(seed),
    )


def fit_panel(panel, params: HyperParams, seed: int) -> BoostedModel:
    """Train on a CountryPanel's feature matrix and target."""
    return fit(panel.features, panel.target, panel.feature_codes, params, seed)


def predict(model: BoostedModel, row) -> float:
    """base_score + sum of learning_rate * tree(row); NaN routes by default side."""
    row = np.asarray(row, dtype=float)
    if row.shape != (len(model.feature_codes),):
        raise ValueError(
            f"row has {row.shape} values, model expects {len(model.feature_codes)}"
        )
    total = model.base_score
    for tree in model.trees:
        total += model.learning_rate * tree.predict_row(row)
    return float(total)


def predict_matrix(model: BoostedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return np.array([predict(model, X[i]) for i in range(X.shape[0])])


def _node_to_dict(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": node.weight}
    return {
        "feature": node.feature_index,
        "threshold": node.threshold,
        "default_left": node.default_goes_left,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(doc: dict) -> TreeNode:
    if "leaf" in doc:
        return Leaf(float(doc["leaf"]))
    return Split(
        feature_index=int(doc["feature"]),
        threshold=float(doc["threshold"]),
        default_goes_left=bool(doc["default_left"]),
        left=_node_from_dict(doc["left"]),
        right=_node_from_dict(doc["right"]),
    )


def _count_leaves(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    return _count_leaves(node.left) + _count_leaves(node.right)


def serialize_model(model: BoostedModel) -> str:
    """Versioned JSON document; floats keep full round-trip precision."""
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "base_score": model.base_score,
        "learning_rate": model.learning_rate,
        "feature_codes": list(model.feature_codes),
        "hyperparams": model.hyperparams.to_json_dict(),
        "seed": model.seed,
        "trees": [_node_to_dict(t.root) for t in model.trees],
    }
    return json.dumps(doc, indent=2)


def deserialize_model(text: str) -> BoostedModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc
    try:
        if doc["version"] != MODEL_FORMAT_VERSION:
            raise ModelFormatError(
                f"unsupported model version {doc['version']!r}, "
                f"expected {MODEL_FORMAT_VERSION}"
            )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            params = HyperParams.from_json_dict(doc["hyperparams"])
        trees = tuple(
            RegressionTree(root=(root := _node_from_dict(t)), num_leaves=_count_leaves(root))
            for t in doc["trees"]
        )
        return BoostedModel(
            base_score=float(doc["base_score"]),
            trees=trees,
            learning_rate=float(doc["learning_rate"]),
            feature_codes=tuple(doc["feature_codes"]),
            hyperparams=params,
            seed=int(doc["seed"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc
