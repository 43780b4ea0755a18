"""
The two training phases behind the tests.

Phase 1 fits an autoencoder by minibatch Adam on the pooled unlabeled points,
minimizing reconstruction MSE; its encoder captures the data's inherent
structure. Phase 2 builds a binary classifier from an encoder (pretrained for
the semi-supervised variant, freshly initialized for the plain one) plus a
classification head, and fine-tunes on the labeled training half with
cross-entropy. Both variants share the same topology and the same Phase-2
procedure; they differ only in encoder initialization.

Everything is deterministic given (config, data): parameter init and
minibatch order derive from fixed substreams of the config seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .hdgm import SplitDataset
from .nn import (
    AdamState,
    MlpModel,
    TrainingDiverged,
    adam_step,
    backward,
    cross_entropy_from_logits,
    forward,
    init_mlp,
    mse_loss,
    softmax,
)

FEATURE_LAYERS = ("p0_scalar", "hidden_rep", "logits")

# Substream tags for deriving per-purpose RNGs from one config seed.
_SEED_AE_INIT, _SEED_AE_BATCH, _SEED_ENC_INIT, _SEED_HEAD_INIT, _SEED_CLF_BATCH = range(5)

MODEL_DUMP_VERSION = 1


@dataclass
class TrainConfig:
    """Architecture and optimization settings for both phases.

    ``encoder_widths`` runs input -> latent (all relu); the decoder mirrors
    it back with an identity output layer. ``head_widths`` runs latent ->
    hidden -> 2 logits. ``unlabeled_fraction`` controls how much of the test
    half joins the Phase-1 pool (1.0 = all points, the default).
    """

    encoder_widths: tuple = (10, 50, 50, 20)
    head_widths: tuple = (20, 50, 50, 2)
    lr_pretrain: float = 1e-3
    lr_classifier: float = 1e-3
    epochs_pretrain: int = 100
    epochs_classifier: int = 200
    batch_size: int = 128
    freeze_encoder: bool = False
    unlabeled_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        self.encoder_widths = tuple(int(w) for w in self.encoder_widths)
        self.head_widths = tuple(int(w) for w in self.head_widths)
        if len(self.encoder_widths) < 2 or len(self.head_widths) < 2:
            raise ValueError("encoder and head need at least two widths each")
        if self.encoder_widths[-1] != self.head_widths[0]:
            raise ValueError(
                f"latent width {self.encoder_widths[-1]} does not feed head "
                f"input {self.head_widths[0]}"
            )
        if self.head_widths[-1] != 2:
            raise ValueError("head must emit 2 logits")
        if self.epochs_pretrain < 1 or self.epochs_classifier < 1:
            raise ValueError("epoch counts must be >= 1")
        if not 0.0 <= self.unlabeled_fraction <= 1.0:
            raise ValueError("unlabeled_fraction must lie in [0, 1]")

    @property
    def latent_size(self) -> int:
        return self.encoder_widths[-1]

    @property
    def decoder_widths(self) -> tuple:
        return tuple(reversed(self.encoder_widths))

    def to_dict(self) -> dict:
        return {
            "encoder_widths": list(self.encoder_widths),
            "head_widths": list(self.head_widths),
            "lr_pretrain": self.lr_pretrain,
            "lr_classifier": self.lr_classifier,
            "epochs_pretrain": self.epochs_pretrain,
            "epochs_classifier": self.epochs_classifier,
            "batch_size": self.batch_size,
            "freeze_encoder": self.freeze_encoder,
            "unlabeled_fraction": self.unlabeled_fraction,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        return cls(**data)


def default_train_config(d: int, **overrides) -> TrainConfig:
    """Default architecture for d-dimensional inputs: d-50-50-20 encoder,
    mirrored decoder, 20-50-50-2 head."""
    cfg = dict(encoder_widths=(d, 50, 50, 20), head_widths=(20, 50, 50, 2))
    cfg.update(overrides)
    return TrainConfig(**cfg)


@dataclass
class TrainedTest:
    """A trained classifier plus how it was produced."""

    model: MlpModel
    provenance: str  # "c2st" | "ssl-c2st"
    train_trace: list = field(default_factory=list)
    pretrain_trace: list = field(default_factory=list)


def _seed(cfg_seed: int, tag: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(cfg_seed, spawn_key=(tag,))


def _run_epochs(model, data, targets, loss_kind, loss_fn, lr, epochs, batch_size,
                batch_rng, frozen_layers=0):
    """Generic minibatch Adam loop; returns per-epoch mean losses."""
    state = AdamState.for_model(model, lr=lr)
    n = data.shape[0]
    trace = []
    for _ in range(epochs):
        order = batch_rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            xb = data[idx]
            tb = targets[idx]
            out, cache = forward(model, xb)
            loss = loss_fn(out, tb)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"{loss_kind} loss became {loss} at step {state.step}"
                )
            grads = backward(model, cache, loss_kind, tb)
            for i in range(frozen_layers):
                grads[i] = (np.zeros_like(grads[i][0]), np.zeros_like(grads[i][1]))
            adam_step(model, grads, state)
            total += loss * len(idx)
        trace.append(total / n)
    return trace


def train_autoencoder(s_unl: np.ndarray, cfg: TrainConfig, hidden_activation="relu"):
    """Phase 1: fit encoder+decoder on the unlabeled pool by reconstruction MSE.

    Returns (encoder, decoder, per-epoch loss trace). Every layer uses
    ``hidden_activation`` except the decoder's output layer, which is
    identity so reconstructions can take any real value (pass "identity"
    for a fully linear autoencoder).
    """
    s_unl = np.asarray(s_unl, dtype=np.float64)
    if s_unl.ndim != 2 or s_unl.shape[0] == 0:
        raise ValueError("unlabeled pool must be a nonempty (n, d) matrix")
    if s_unl.shape[1] != cfg.encoder_widths[0]:
        raise ValueError(
            f"data dim {s_unl.shape[1]} does not match encoder input "
            f"{cfg.encoder_widths[0]}"
        )
    n_enc = len(cfg.encoder_widths) - 1
    n_dec = len(cfg.decoder_widths) - 1
    widths = cfg.encoder_widths + cfg.decoder_widths[1:]
    activations = [hidden_activation] * (n_enc + n_dec - 1) + ["identity"]
    ae = init_mlp(widths, activations, rng_seed=_seed(cfg.seed, _SEED_AE_INIT))
    rng = np.random.default_rng(_seed(cfg.seed, _SEED_AE_BATCH))
    trace = _run_epochs(
        ae, s_unl, s_unl, "mse", mse_loss, cfg.lr_pretrain,
        cfg.epochs_pretrain, cfg.batch_size, rng,
    )
    encoder = MlpModel(ae.layers[:n_enc])
    decoder = MlpModel(ae.layers[n_enc:])
    return encoder, decoder, trace


def train_classifier(init, split: SplitDataset, cfg: TrainConfig,
                     pretrain_trace=None) -> TrainedTest:
    """Phase 2: fine-tune encoder + head on the labeled training half.

    ``init`` is a pretrained encoder (semi-supervised variant) or None for a
    fresh random encoder (plain variant). With ``cfg.freeze_encoder`` only
    head parameters move; otherwise the encoder fine-tunes too. The passed
    encoder is copied, never mutated.
    """
    train = split.train
    labels = train.labels
    if labels.min() == labels.max():
        raise ValueError("training labels are degenerate (single class)")
    if init is not None:
        if init.input_dim != train.dim:
            raise ValueError(
                f"encoder input {init.input_dim} does not match data dim {train.dim}"
            )
        if init.output_dim != cfg.head_widths[0]:
            raise ValueError(
                f"encoder output {init.output_dim} does not feed head input "
                f"{cfg.head_widths[0]}"
            )
        encoder = init.copy()
        provenance = "ssl-c2st"
    else:
        encoder = init_mlp(
            cfg.encoder_widths, "relu", rng_seed=_seed(cfg.seed, _SEED_ENC_INIT)
        )
        provenance = "c2st"
    n_head = len(cfg.head_widths) - 1
    head = init_mlp(
        cfg.head_widths,
        ["relu"] * (n_head - 1) + ["identity"],
        rng_seed=_seed(cfg.seed, _SEED_HEAD_INIT),
    )
    rng = np.random.default_rng(_seed(cfg.seed, _SEED_CLF_BATCH))
    if cfg.freeze_encoder:
        # Frozen encoder: encode once and train the head alone on the fixed
        # features. Step-for-step identical to zeroing encoder gradients.
        encoded, _ = forward(encoder, train.points)
        trace = _run_epochs(
            head, encoded, labels, "cross_entropy", cross_entropy_from_logits,
            cfg.lr_classifier, cfg.epochs_classifier, cfg.batch_size, rng,
        )
        model = MlpModel(encoder.layers + head.layers)
    else:
        model = MlpModel(encoder.layers + head.layers)
        trace = _run_epochs(
            model, train.points, labels, "cross_entropy", cross_entropy_from_logits,
            cfg.lr_classifier, cfg.epochs_classifier, cfg.batch_size, rng,
        )
    return TrainedTest(
        model=model,
        provenance=provenance,
        train_trace=trace,
        pretrain_trace=list(pretrain_trace or []),
    )


def predict_proba(t: TrainedTest, batch: np.ndarray) -> np.ndarray:
    """Softmax class-1 probability per row."""
    out, _ = forward(t.model, batch)
    return softmax(out)[:, 1]


def predict_labels(t: TrainedTest, batch: np.ndarray) -> np.ndarray:
    """Argmax class prediction per row."""
    out, _ = forward(t.model, batch)
    return np.argmax(out, axis=1)


def extract_features(t: TrainedTest, batch: np.ndarray, layer: str) -> np.ndarray:
    """Feature matrix used by the mean-embedding statistic.

    - ``p0_scalar``: one column, the class-0 softmax probability;
    - ``hidden_rep``: the head's hidden activation (the discriminative
      representation);
    - ``logits``: the raw 2-column output.
    """
    if layer not in FEATURE_LAYERS:
        raise ValueError(f"layer must be one of {FEATURE_LAYERS}, got {layer!r}")
    out, cache = forward(t.model, batch)
    if layer == "p0_scalar":
        return softmax(out)[:, :1]
    if layer == "logits":
        return out
    if len(cache.activations) < 2:
        raise ValueError("model has no hidden layer to extract")
    return cache.activations[-2]


def unlabeled_pool(split: SplitDataset, fraction: float, rng_seed=0) -> np.ndarray:
    """Phase-1 pool: all training rows plus a seeded ``fraction`` of test rows.

    fraction 1.0 reproduces the full pooled sample; smaller values subsample
    the test half only (the training half always participates).
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    parts = [split.train.points]
    k = int(round(fraction * split.n_te))
    if k > 0:
        take = rng.permutation(split.n_te)[:k]
        parts.append(split.test.points[take])
    pool = np.vstack(parts)
    return pool[rng.permutation(len(pool))]


def save_model(path, t: TrainedTest, extra: dict | None = None) -> None:
    """Versioned JSON parameter dump for reproducibility audits."""
    payload = {
        "format_version": MODEL_DUMP_VERSION,
        "provenance": t.provenance,
        "layers": [
            {
                "weights": l.weights.tolist(),
                "bias": l.bias.tolist(),
                "activation": l.activation,
            }
            for l in t.model.layers
        ],
        "train_trace": [float(v) for v in t.train_trace],
        "pretrain_trace": [float(v) for v in t.pretrain_trace],
        "extra": extra or {},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_model(path) -> TrainedTest:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format_version") != MODEL_DUMP_VERSION:
        raise ValueError(f"unsupported model dump version {payload.get('format_version')}")
    from .nn import Layer

    layers = [
        Layer(np.asarray(l["weights"], dtype=np.float64),
              np.asarray(l["bias"], dtype=np.float64), l["activation"])
        for l in payload["layers"]
    ]
    return TrainedTest(
        model=MlpModel(layers),
        provenance=payload["provenance"],
        train_trace=payload["train_trace"],
        pretrain_trace=payload["pretrain_trace"],
    )
