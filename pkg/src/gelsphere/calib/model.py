"""Color+position -> gradient regressor: a small fully connected network.

5 inputs (dR, dG, dB, u, v) -> 32 -> 32 -> 2 outputs (gx, gy), tanh hidden
units, trained by Adam on mean squared gradient error with a fixed seed.
Deterministic end to end: same seed + same dataset give identical bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ..io_common import read_framed, write_framed
from .dataset import CalibrationDataset

MODEL_MAGIC = b"GSMD"
MODEL_VERSION = 1


class DatasetTooSmall(Exception):
    pass


class Diverged(Exception):
    pass


class ModelNotTrained(Exception):
    pass


@dataclass
class TrainConfig:
    hidden: tuple[int, ...] = (32, 32)
    epochs: int = 200
    batch_size: int = 512
    learning_rate: float = 3e-3
    seed: int = 0
    val_fraction: float = 0.1
    patience: int = 25
    min_samples: int = 10_000


@dataclass
class GradientModel:
    """Serialized-weight regressor plus normalization statistics."""

    layer_dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    in_mean: np.ndarray
    in_std: np.ndarray
    out_mean: np.ndarray
    out_std: np.ndarray
    dataset_hash: str = ""
    epochs_trained: int = 0
    train_loss: float = float("nan")
    val_loss: float = float("nan")
    val_rmse: float = float("nan")
    trained: bool = field(default=False)

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        """(N, 5) -> (N, 2) slope estimates; deterministic."""
        if not self.trained:
            raise ModelNotTrained("model has no trained weights")
        a = (np.asarray(inputs, np.float64) - self.in_mean) / self.in_std
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            a = np.tanh(a @ W + b)
        a = a @ self.weights[-1] + self.biases[-1]
        return a * self.out_std + self.out_mean

    def save(self, path) -> None:
        dims = self.layer_dims
        payload = struct.pack("<H", len(dims))
        payload += struct.pack(f"<{len(dims)}H", *dims)
        for arr in (self.in_mean, self.in_std, self.out_mean, self.out_std):
            payload += np.asarray(arr, "<f4").tobytes()
        for W, b in zip(self.weights, self.biases):
            payload += np.asarray(W, "<f4").tobytes()
            payload += np.asarray(b, "<f4").tobytes()
        meta = self.dataset_hash.encode()[:16].ljust(16, b"\0")
        payload += meta
        payload += struct.pack(
            "<Ifff", self.epochs_trained, self.train_loss, self.val_loss, self.val_rmse
        )
        write_framed(path, MODEL_MAGIC, MODEL_VERSION, payload)

    @staticmethod
    def load(path) -> "GradientModel":
        payload = read_framed(path, MODEL_MAGIC, MODEL_VERSION)
        (ndims,) = struct.unpack_from("<H", payload, 0)
        off = 2
        dims = struct.unpack_from(f"<{ndims}H", payload, off)
        off += 2 * ndims
        d_in, d_out = dims[0], dims[-1]

        def take(n):
            nonlocal off
            out = np.frombuffer(payload, "<f4", n, off).astype(np.float64)
            off += 4 * n
            return out

        in_mean = take(d_in)
        in_std = take(d_in)
        out_mean = take(d_out)
        out_std = take(d_out)
        weights, biases = [], []
        for a, b in zip(dims[:-1], dims[1:]):
            weights.append(take(a * b).reshape(a, b))
            biases.append(take(b))
        dataset_hash = payload[off : off + 16].rstrip(b"\0").decode()
        off += 16
        epochs, tl, vl, vr = struct.unpack_from("<Ifff", payload, off)
        return GradientModel(
            layer_dims=tuple(dims),
            weights=weights,
            biases=biases,
            in_mean=in_mean,
            in_std=in_std,
            out_mean=out_mean,
            out_std=out_std,
            dataset_hash=dataset_hash,
            epochs_trained=epochs,
            train_loss=tl,
            val_loss=vl,
            val_rmse=vr,
            trained=True,
        )


def _init_layers(dims, rng):
    weights, biases = [], []
    for a, b in zip(dims[:-1], dims[1:]):
        scale = np.sqrt(2.0 / (a + b))
        weights.append(rng.normal(0.0, scale, size=(a, b)))
        biases.append(np.zeros(b))
    return weights, biases


def _forward(x, weights, biases):
    acts = [x]
    a = x
    for W, b in zip(weights[:-1], biases[:-1]):
        a = np.tanh(a @ W + b)
        acts.append(a)
    acts.append(a @ weights[-1] + biases[-1])
    return acts


def train(dataset: CalibrationDataset, config: TrainConfig | None = None) -> GradientModel:
    """Fit the regressor; deterministic for a fixed seed and dataset.

    Raises DatasetTooSmall below config.min_samples and Diverged when the
    validation loss stops being finite.
    """
    cfg = config or TrainConfig()
    n = len(dataset)
    if n < cfg.min_samples:
        raise DatasetTooSmall(f"{n} samples < required {cfg.min_samples}")

    x = dataset.inputs.astype(np.float64)
    y = dataset.targets.astype(np.float64)
    in_mean = x.mean(axis=0)
    in_std = x.std(axis=0) + 1e-8
    out_mean = y.mean(axis=0)
    out_std = y.std(axis=0) + 1e-8
    xn = (x - in_mean) / in_std
    yn = (y - out_mean) / out_std

    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(n)
    n_val = max(int(n * cfg.val_fraction), 1)
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    xv, yv = xn[val_idx], yn[val_idx]
    xt, yt = xn[train_idx], yn[train_idx]

    dims = (x.shape[1],) + tuple(cfg.hidden) + (y.shape[1],)
    weights, biases = _init_layers(dims, rng)
    mw = [np.zeros_like(w) for w in weights]
    vw = [np.zeros_like(w) for w in weights]
    mb = [np.zeros_like(b) for b in biases]
    vb = [np.zeros_like(b) for b in biases]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    def val_loss_fn():
        pred = _forward(xv, weights, biases)[-1]
        return float(((pred - yv) ** 2).mean())

    best_val = np.inf
    best_state = None
    best_epoch = 0
    train_loss = np.nan
    eff_epochs = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(xt))
        losses = []
        for start in range(0, len(xt), cfg.batch_size):
            sel = order[start : start + cfg.batch_size]
            xb, yb = xt[sel], yt[sel]
            acts = _forward(xb, weights, biases)
            delta = 2.0 * (acts[-1] - yb) / len(xb)
            losses.append(float(((acts[-1] - yb) ** 2).mean()))
            grads_w = [None] * len(weights)
            grads_b = [None] * len(weights)
            for li in reversed(range(len(weights))):
                grads_w[li] = acts[li].T @ delta
                grads_b[li] = delta.sum(axis=0)
                if li > 0:
                    delta = (delta @ weights[li].T) * (1.0 - acts[li] ** 2)
            step += 1
            corr1 = 1.0 - beta1**step
            corr2 = 1.0 - beta2**step
            for li in range(len(weights)):
                mw[li] = beta1 * mw[li] + (1 - beta1) * grads_w[li]
                vw[li] = beta2 * vw[li] + (1 - beta2) * grads_w[li] ** 2
                weights[li] -= cfg.learning_rate * (mw[li] / corr1) / (np.sqrt(vw[li] / corr2) + eps)
                mb[li] = beta1 * mb[li] + (1 - beta1) * grads_b[li]
                vb[li] = beta2 * vb[li] + (1 - beta2) * grads_b[li] ** 2
                biases[li] -= cfg.learning_rate * (mb[li] / corr1) / (np.sqrt(vb[li] / corr2) + eps)

        train_loss = float(np.mean(losses))
        vl = val_loss_fn()
        eff_epochs = epoch + 1
        if not np.isfinite(vl):
            raise Diverged(f"validation loss became {vl} at epoch {epoch}")
        if vl < best_val - 1e-7:
            best_val = vl
            best_state = ([w.copy() for w in weights], [b.copy() for b in biases])
            best_epoch = epoch
        elif epoch - best_epoch >= cfg.patience:
            break

    if best_state is not None:
        weights, biases = best_state

    # report the validation RMSE in slope units (denormalized)
    pred = _forward(xv, weights, biases)[-1] * out_std + out_mean
    truth = yv * out_std + out_mean
    val_rmse = float(np.sqrt(((pred - truth) ** 2).mean()))

    return GradientModel(
        layer_dims=dims,
        weights=[w.astype(np.float32).astype(np.float64) for w in weights],
        biases=[b.astype(np.float32).astype(np.float64) for b in biases],
        in_mean=in_mean.astype(np.float32).astype(np.float64),
        in_std=in_std.astype(np.float32).astype(np.float64),
        out_mean=out_mean.astype(np.float32).astype(np.float64),
        out_std=out_std.astype(np.float32).astype(np.float64),
        dataset_hash=dataset.content_hash(),
        epochs_trained=eff_epochs,
        train_loss=train_loss,
        val_loss=best_val,
        val_rmse=val_rmse,
        trained=True,
    )
