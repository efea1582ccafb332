"""Pool-based active learning loop and its query strategies.

Each round trains the forest on the labeled set, scores every pool
candidate with the configured strategy, queries the oracle for the top
batch, and re-evaluates on the held-out test set.  All randomness flows
from the run seed, so a (strategy, seed) cell is fully reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset import PoolSplit
from .features import features_matrix, labels_array
from .forest import TrainConfig, fit_arrays, predict_proba_matrix
from .metrics import MetricSet, evaluate

STRATEGIES = ("random", "least_confidence", "margin", "entropy", "qbc")


@dataclass(frozen=True)
class ALConfig:
    strategy: str = "entropy"
    init_size: int = 30
    batch_size: int = 50
    n_queries: int = 50
    committee_size: int = 5
    committee_trees: int = 25
    score_cap: int = 0  # 0 scores the entire pool each round
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.n_queries < 0:
            raise ValueError("n_queries must be nonnegative")
        if self.strategy == "qbc" and self.committee_size < 2:
            raise ValueError("qbc needs a committee of at least 2")


@dataclass
class RoundLog:
    round_index: int
    n_labeled: int
    metrics: MetricSet
    queried_indices: list
    ik_reduction: float
    truncated: bool = False


def _entropy_bits(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log2(p), 0.0)
    return -terms.sum(axis=-1)


def score_least_confidence(probs) -> np.ndarray:
    """1 - max(p); largest when the top class is least certain."""
    p = np.atleast_2d(np.asarray(probs, dtype=float))
    return 1.0 - p.max(axis=1)


def score_margin(probs) -> np.ndarray:
    """Negated top-two gap; ranks smaller margins as more informative."""
    p = np.atleast_2d(np.asarray(probs, dtype=float))
    return -np.abs(p[:, 1] - p[:, 0])


def score_entropy(probs) -> np.ndarray:
    """Shannon entropy of the predictive distribution, in bits."""
    p = np.atleast_2d(np.asarray(probs, dtype=float))
    return _entropy_bits(p)


def score_qbc(committee_probs) -> np.ndarray:
    """Vote entropy of committee hard votes (ties vote unreachable)."""
    cp = np.asarray(committee_probs, dtype=float)
    if cp.ndim == 2:
        cp = cp[:, None, :]
    k = cp.shape[0]
    if k < 2:
        raise ValueError("committee needs at least 2 members")
    votes = (cp[:, :, 1] > 0.5).sum(axis=0)
    f1 = votes / k
    dist = np.stack([1.0 - f1, f1], axis=-1)
    return _entropy_bits(dist)


def select_batch(scores, b: int) -> list[int]:
    """Indices of the ``b`` highest scores; ties go to the lowest index."""
    scores = np.asarray(scores, dtype=float)
    if b > len(scores):
        raise ValueError("batch larger than the candidate pool")
    order = np.lexsort((np.arange(len(scores)), -scores))
    return [int(i) for i in order[:b]]


def _evaluate_model(model, X_test, y_test):
    scores = predict_proba_matrix(model, X_test)[:, 1]
    m = evaluate(scores, y_test)
    preds = (scores > 0.5).astype(np.int64)
    return m, float(np.mean(preds == 0))


def run_loop(
    pools: PoolSplit,
    cfg: ALConfig,
    train_cfg: Optional[TrainConfig] = None,
) -> list[RoundLog]:
    """Run the query loop until ``n_queries`` labels have been acquired.

    Round 0 logs the model trained on the initial labeled set alone; each
    later round appends one batch.  Pool exhaustion truncates the final
    round and flags it rather than failing.
    """
    train_cfg = train_cfg or TrainConfig()

    X_pool = features_matrix(pools.unlabeled)
    X_test = features_matrix(pools.test)
    y_test = labels_array(pools.test)

    X_lab = features_matrix(pools.labeled)
    y_lab = labels_array(pools.labeled)

    rng_random = np.random.default_rng([cfg.seed, 0x5EED])
    remaining = list(range(len(pools.unlabeled)))

    model = fit_arrays(X_lab, y_lab, train_cfg)
    m, ik_red = _evaluate_model(model, X_test, y_test)
    logs = [
        RoundLog(
            round_index=0,
            n_labeled=len(y_lab),
            metrics=m,
            queried_indices=[],
            ik_reduction=ik_red,
        )
    ]

    acquired = 0
    round_index = 0
    while acquired < cfg.n_queries and remaining:
        round_index += 1
        b = min(cfg.batch_size, cfg.n_queries - acquired, len(remaining))
        truncated = b < min(cfg.batch_size, cfg.n_queries - acquired)

        if cfg.score_cap and cfg.score_cap < len(remaining):
            scored_positions = rng_random.choice(
                len(remaining), size=cfg.score_cap, replace=False
            )
            scored_positions.sort()
        else:
            scored_positions = np.arange(len(remaining))
        pool_rows = np.array([remaining[i] for i in scored_positions])
        X_cand = X_pool[pool_rows]

        if cfg.strategy == "random":
            scores = rng_random.uniform(size=len(pool_rows))
        elif cfg.strategy == "qbc":
            committee = []
            for k in range(cfg.committee_size):
                rng_member = np.random.default_rng([cfg.seed, 0xC0, round_index, k])
                resample = rng_member.integers(0, len(y_lab), size=len(y_lab))
                member_cfg = TrainConfig(
                    n_trees=cfg.committee_trees,
                    max_depth=train_cfg.max_depth,
                    min_samples_leaf=train_cfg.min_samples_leaf,
                    features_per_split=train_cfg.features_per_split,
                    bootstrap=train_cfg.bootstrap,
                    seed=train_cfg.seed + 1 + k,
                )
                member = fit_arrays(X_lab[resample], y_lab[resample], member_cfg)
                committee.append(predict_proba_matrix(member, X_cand))
            scores = score_qbc(np.stack(committee))
        else:
            probs = predict_proba_matrix(model, X_cand)
            if cfg.strategy == "least_confidence":
                scores = score_least_confidence(probs)
            elif cfg.strategy == "margin":
                scores = score_margin(probs)
            else:
                scores = score_entropy(probs)

        picked = select_batch(scores, b)
        batch = [int(pool_rows[i]) for i in picked]

        new_labels = np.array([pools.reveal(i) for i in batch], dtype=np.int64)
        X_lab = np.vstack([X_lab, X_pool[batch]])
        y_lab = np.concatenate([y_lab, new_labels])
        batch_set = set(batch)
        remaining = [i for i in remaining if i not in batch_set]
        acquired += b

        model = fit_arrays(X_lab, y_lab, train_cfg)
        m, ik_red = _evaluate_model(model, X_test, y_test)
        logs.append(
            RoundLog(
                round_index=round_index,
                n_labeled=len(y_lab),
                metrics=m,
                queried_indices=batch,
                ik_reduction=ik_red,
                truncated=truncated or (acquired < cfg.n_queries and not remaining),
            )
        )
    return logs
