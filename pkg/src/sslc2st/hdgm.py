"""
Bimodal high-dimensional Gaussian-mixture benchmark data.

Each distribution is an equal-weight mixture of two d-dimensional Gaussians.
Cluster means are mu_1 = 0 and mu_2 = delta_mu * ones(d). The reference
distribution P uses identity covariances; the alternative Q shifts every
coordinate of each cluster mean by delta_q and perturbs the covariance of the
first two dimensions with an off-diagonal +0.5 in cluster 1 and -0.5 in
cluster 2. Difficulty levels fix (delta_mu, delta_q): easy (10, 5),
medium (10, 0), hard (0.5, 0).

Sampling is stratified (exactly n rows per cluster) and a pure function of
(spec, n, seed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

ROLES = ("P", "Q-null", "Q-alt")
N_CLUSTERS = 2
# Off-diagonal covariance perturbation of the first two dims, per cluster.
CLUSTER_COV_DELTAS = (0.5, -0.5)
LEVELS = {"easy": (10.0, 5.0), "medium": (10.0, 0.0), "hard": (0.5, 0.0)}


@dataclass(frozen=True)
class HdgmSpec:
    """Parameters of one mixture: dimension, gaps, and which side it plays."""

    d: int
    delta_mu: float
    delta_q: float
    role: str

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")

    @property
    def c(self) -> int:
        return N_CLUSTERS

    def cluster_mean(self, i: int) -> np.ndarray:
        """Mean of cluster i (0-based): mu_1 = 0, mu_2 = mu_1 + delta_mu."""
        mu = np.full(self.d, i * self.delta_mu)
        if self.role == "Q-alt":
            mu += self.delta_q
        return mu

    def cluster_cov(self, i: int) -> np.ndarray:
        """Covariance of cluster i: identity, except Q-alt flips a +-0.5
        correlation between the first two dimensions."""
        cov = np.eye(self.d)
        if self.role == "Q-alt":
            delta = CLUSTER_COV_DELTAS[i]
            cov[0, 1] = delta
            cov[1, 0] = delta
        return cov

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "delta_mu": self.delta_mu,
            "delta_q": self.delta_q,
            "role": self.role,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HdgmSpec":
        return cls(
            d=int(data["d"]),
            delta_mu=float(data["delta_mu"]),
            delta_q=float(data["delta_q"]),
            role=str(data["role"]),
        )


def hdgm_pair(level: str, d: int, hypothesis: str = "H1") -> tuple[HdgmSpec, HdgmSpec]:
    """Build the (P, Q) spec pair for a difficulty level.

    Under H1, Q carries the mean shift and covariance perturbation; under H0
    the P spec is reused for both sides, so the generators are identical.
    """
    if level not in LEVELS:
        raise ValueError(f"level must be one of {sorted(LEVELS)}, got {level!r}")
    if hypothesis not in ("H0", "H1"):
        raise ValueError(f"hypothesis must be H0 or H1, got {hypothesis!r}")
    delta_mu, delta_q = LEVELS[level]
    spec_p = HdgmSpec(d=d, delta_mu=delta_mu, delta_q=delta_q, role="P")
    if hypothesis == "H0":
        return spec_p, spec_p
    return spec_p, HdgmSpec(d=d, delta_mu=delta_mu, delta_q=delta_q, role="Q-alt")


def sample_hdgm(spec: HdgmSpec, n_per_cluster: int, rng_seed=0) -> np.ndarray:
    """Draw a stratified sample: n_per_cluster rows from each cluster.

    Rows 0..n-1 come from cluster 1, the rest from cluster 2. Each cluster is
    sampled as standard normals pushed through the Cholesky factor of its
    covariance, shifted by its mean.
    """
    if n_per_cluster < 1:
        raise ValueError("n_per_cluster must be >= 1")
    rng = np.random.default_rng(rng_seed)
    blocks = []
    for i in range(spec.c):
        cov = spec.cluster_cov(i)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"cluster {i} covariance not positive definite") from exc
        z = rng.standard_normal((n_per_cluster, spec.d))
        blocks.append(z @ chol.T + spec.cluster_mean(i))
    return np.vstack(blocks)


@dataclass
class LabeledDataset:
    """Pooled sample points with 0/1 source labels (0 = from P, 1 = from Q)."""

    points: np.ndarray  # (N, d)
    labels: np.ndarray  # (N,) of {0, 1}

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.intp)
        if self.points.ndim != 2 or self.labels.shape != (self.points.shape[0],):
            raise ValueError("points must be (N, d) with one label per row")
        if self.labels.size and not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def is_balanced(self) -> bool:
        return 2 * int(self.labels.sum()) == len(self.labels)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def points_for_label(self, label: int) -> np.ndarray:
        return self.points[self.labels == label]


@dataclass
class SplitDataset:
    """Half/half train-test split of a labeled dataset."""

    train: LabeledDataset
    test: LabeledDataset

    @property
    def n_te(self) -> int:
        return len(self.test)


def build_dataset(sp: np.ndarray, sq: np.ndarray) -> LabeledDataset:
    """Pool the two samples, labeling P rows 0 and Q rows 1."""
    sp = np.asarray(sp, dtype=np.float64)
    sq = np.asarray(sq, dtype=np.float64)
    if sp.size == 0 or sq.size == 0:
        raise ValueError("samples must be nonempty")
    if sp.shape != sq.shape:
        raise ValueError(f"samples must match in size: {sp.shape} vs {sq.shape}")
    labels = np.concatenate([np.zeros(len(sp), dtype=np.intp), np.ones(len(sq), dtype=np.intp)])
    return LabeledDataset(points=np.vstack([sp, sq]), labels=labels)


def shuffle_split(ds: LabeledDataset, rng_seed=0) -> SplitDataset:
    """Seeded stratified half/half split: each half keeps label balance."""
    n = len(ds)
    if n % 2 != 0:
        raise ValueError("dataset size must be even")
    rng = np.random.default_rng(rng_seed)
    train_idx, test_idx = [], []
    for label in (0, 1):
        idx = np.flatnonzero(ds.labels == label)
        if len(idx) % 2 != 0:
            raise ValueError(f"label {label} count {len(idx)} is odd; cannot halve")
        idx = rng.permutation(idx)
        half = len(idx) // 2
        train_idx.append(idx[:half])
        test_idx.append(idx[half:])
    train_idx = rng.permutation(np.concatenate(train_idx))
    test_idx = rng.permutation(np.concatenate(test_idx))
    return SplitDataset(
        train=LabeledDataset(ds.points[train_idx], ds.labels[train_idx]),
        test=LabeledDataset(ds.points[test_idx], ds.labels[test_idx]),
    )


def strip_labels(ds: LabeledDataset, rng_seed=0) -> np.ndarray:
    """All rows, seeded-shuffled, labels dropped."""
    rng = np.random.default_rng(rng_seed)
    return ds.points[rng.permutation(len(ds))]


def write_jsonl(path, ds: LabeledDataset, spec=None, seed=None) -> None:
    """Write one header record then one {"x": [...], "label": 0|1} per point."""
    header = {
        "n": len(ds),
        "d": ds.dim,
        "spec": spec.to_dict() if spec is not None else None,
        "seed": seed,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for x, label in zip(ds.points, ds.labels):
            fh.write(json.dumps({"x": [float(v) for v in x], "label": int(label)}) + "\n")


def read_jsonl(path) -> tuple[LabeledDataset, dict]:
    """Read a dataset file written by :func:`write_jsonl`."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path} is empty")
    header = json.loads(lines[0])
    points, labels = [], []
    for line in lines[1:]:
        rec = json.loads(line)
        points.append(rec["x"])
        labels.append(rec["label"])
    return LabeledDataset(np.asarray(points), np.asarray(labels)), header
