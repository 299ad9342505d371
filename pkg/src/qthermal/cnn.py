"""Minimal from-scratch convolutional classifier.

Valid-padding convolutions with ReLU, dense layers, softmax cross-entropy
and plain SGD by backpropagation, all in numpy.  ``loss_and_grad`` returns
batch-summed quantities, so duplicated batch entries double both; the
trainer divides by the batch size when updating.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .classify import ErrorEstimate, NoiseModel, estimate_error, trial_stream
from .data import BinaryImageDataset
from .errors import NonFiniteLossError, ShapeMismatchError

CHECKPOINT_MAGIC = b"QTHC"
CHECKPOINT_VERSION = 1

DEFAULT_CONV = ((8, 3, 1), (16, 3, 2))
DEFAULT_DENSE = (64,)


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture description: conv stages (filters, kernel, stride),
    hidden dense widths, and the output class count."""

    input_shape: tuple[int, int]
    conv: tuple[tuple[int, int, int], ...] = DEFAULT_CONV
    dense: tuple[int, ...] = DEFAULT_DENSE
    classes: int = 10

    def __post_init__(self):
        if self.classes < 1:
            raise ValueError("need at least one output class")
        h, w = self.input_shape
        c = 1
        for filters, kernel, stride in self.conv:
            if filters < 1 or kernel < 1 or stride < 1:
                raise ValueError(f"bad conv stage ({filters}, {kernel}, {stride})")
            if kernel > h or kernel > w:
                raise ValueError(
                    f"kernel {kernel} exceeds spatial extent ({h}, {w})"
                )
            h = (h - kernel) // stride + 1
            w = (w - kernel) // stride + 1
            c = filters
        if any(d < 1 for d in self.dense):
            raise ValueError("dense widths must be positive")

    def feature_shapes(self) -> list[tuple[int, int, int]]:
        """(channels, height, width) after the input and each conv stage."""
        h, w = self.input_shape
        shapes = [(1, h, w)]
        for filters, kernel, stride in self.conv:
            h = (h - kernel) // stride + 1
            w = (w - kernel) // stride + 1
            shapes.append((filters, h, w))
        return shapes

    def parameter_shapes(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """(W, b) shapes per layer, conv stages first, output layer last."""
        shapes = []
        feats = self.feature_shapes()
        for i, (filters, kernel, _) in enumerate(self.conv):
            c_in = feats[i][0]
            shapes.append(((filters, c_in, kernel, kernel), (filters,)))
        width = int(np.prod(feats[-1]))
        for d in self.dense:
            shapes.append(((d, width), (d,)))
            width = d
        shapes.append(((self.classes, width), (self.classes,)))
        return shapes


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    batch_size: int = 64
    epochs: int = 5
    seed: int = 0
    noisy_train: bool = True
    holdout_fraction: float = 0.1

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning rate must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


def spec_digest(net: NetworkSpec) -> bytes:
    payload = json.dumps(
        {
            "input_shape": list(net.input_shape),
            "conv": [list(c) for c in net.conv],
            "dense": list(net.dense),
            "classes": net.classes,
        },
        sort_keys=True,
    ).encode()
    return hashlib.sha256(payload).digest()


def init_params(net: NetworkSpec, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """He-style uniform initialisation from a counter-based stream."""
    rng = trial_stream(seed, 0xC0)
    params = []
    for w_shape, b_shape in net.parameter_shapes():
        fan_in = int(np.prod(w_shape[1:]))
        limit = np.sqrt(6.0 / fan_in)
        W = rng.uniform(-limit, limit, size=w_shape)
        params.append((W, np.zeros(b_shape)))
    return params


def _check_params(net: NetworkSpec, params) -> None:
    expected = net.parameter_shapes()
    if len(params) != len(expected):
        raise ShapeMismatchError(
            f"expected {len(expected)} parameter layers, got {len(params)}"
        )
    for (W, b), (ws, bs) in zip(params, expected):
        if tuple(W.shape) != ws or tuple(b.shape) != bs:
            raise ShapeMismatchError(f"parameter shape {W.shape}/{b.shape} != {ws}/{bs}")


def _im2col(x: np.ndarray, kernel: int, stride: int) -> np.ndarray:
    # x: (B, C, H, W) -> (B, OH, OW, C, k, k)
    windows = np.lib.stride_tricks.sliding_window_view(x, (kernel, kernel), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride]
    return np.ascontiguousarray(windows.transpose(0, 2, 3, 1, 4, 5))


def _col2im(dcols: np.ndarray, x_shape, kernel: int, stride: int) -> np.ndarray:
    # dcols: (B, OH, OW, C, k, k) scattered back onto (B, C, H, W)
    B, C, H, W = x_shape
    oh, ow = dcols.shape[1], dcols.shape[2]
    dx = np.zeros(x_shape)
    for i in range(kernel):
        for j in range(kernel):
            dx[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += (
                dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
            )
    return dx


def _forward_batch(net: NetworkSpec, params, images: np.ndarray, want_cache: bool):
    """Shared forward pass; images (B, H, W) floats, returns logits."""
    _check_params(net, params)
    if images.ndim != 3 or images.shape[1:] != net.input_shape:
        raise ShapeMismatchError(
            f"images must be (B, {net.input_shape[0]}, {net.input_shape[1]}), got {images.shape}"
        )
    x = images[:, None, :, :].astype(float)
    cache = []
    idx = 0
    for filters, kernel, stride in net.conv:
        W, b = params[idx]
        cols = _im2col(x, kernel, stride)
        B, oh, ow = cols.shape[:3]
        flat = cols.reshape(B * oh * ow, -1)
        z = (flat @ W.reshape(filters, -1).T + b).reshape(B, oh, ow, filters)
        z = z.transpose(0, 3, 1, 2)
        if want_cache:
            cache.append(("conv", x.shape, cols, z))
        x = np.maximum(z, 0.0)
        idx += 1
    B = x.shape[0]
    a = x.reshape(B, -1)
    for li, _ in enumerate(net.dense):
        W, b = params[idx]
        z = a @ W.T + b
        if want_cache:
            cache.append(("dense", a, z))
        a = np.maximum(z, 0.0)
        idx += 1
    W, b = params[idx]
    logits = a @ W.T + b
    if want_cache:
        cache.append(("out", a, logits))
    return logits, cache


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward(net: NetworkSpec, params, image: np.ndarray) -> np.ndarray:
    """Class-probability vector for one image."""
    image = np.asarray(image, dtype=float)
    if image.shape != net.input_shape:
        raise ShapeMismatchError(f"image shape {image.shape} != {net.input_shape}")
    logits, _ = _forward_batch(net, params, image[None], want_cache=False)
    return _softmax(logits)[0]


def predict_labels(net: NetworkSpec, params, images: np.ndarray) -> np.ndarray:
    """Argmax class labels for a (B, H, W) or flattened (B, H*W) batch."""
    images = np.asarray(images, dtype=float)
    if images.ndim == 2:
        images = images.reshape(-1, *net.input_shape)
    logits, _ = _forward_batch(net, params, images, want_cache=False)
    return np.argmax(logits, axis=1)


def loss_and_grad(net: NetworkSpec, params, images: np.ndarray, labels: np.ndarray):
    """Batch-summed softmax cross-entropy and its parameter gradient.

    Returns:
        (loss, grads) where grads mirrors the parameter list layout.
    """
    images = np.asarray(images, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    if images.ndim == 2:
        images = images.reshape(-1, *net.input_shape)
    if len(images) == 0:
        raise ValueError("batch must be non-empty")
    if labels.shape != (images.shape[0],):
        raise ShapeMismatchError("labels do not match the batch size")
    logits, cache = _forward_batch(net, params, images, want_cache=True)
    B = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
    loss = float(np.sum(lse - logits[np.arange(B), labels]))
    if not np.isfinite(loss):
        raise NonFiniteLossError(f"loss evaluated to {loss}")

    grads: list = [None] * len(params)
    probs = _softmax(logits)
    probs[np.arange(B), labels] -= 1.0
    delta = probs
    kind, a_in, _ = cache[-1]
    W, _ = params[-1]
    grads[-1] = (delta.T @ a_in, delta.sum(axis=0))
    da = delta @ W

    idx = len(params) - 2
    for entry in reversed(cache[:-1]):
        if entry[0] == "dense":
            _, a_in, z = entry
            dz = da * (z > 0.0)
            W, _ = params[idx]
            grads[idx] = (dz.T @ a_in, dz.sum(axis=0))
            da = dz @ W
            idx -= 1
        else:
            _, x_shape, cols, z = entry
            filters, kernel, stride = net.conv[idx]
            dz = (da.reshape(z.shape) if da.ndim == 2 else da) * (z > 0.0)
            B2, _, oh, ow = dz.shape
            dz_flat = dz.transpose(0, 2, 3, 1).reshape(-1, filters)
            cols_flat = cols.reshape(B2 * oh * ow, -1)
            W, _ = params[idx]
            grads[idx] = (
                (dz_flat.T @ cols_flat).reshape(W.shape),
                dz_flat.sum(axis=0),
            )
            dcols = (dz_flat @ W.reshape(filters, -1)).reshape(
                B2, oh, ow, *cols.shape[3:]
            )
            dx = _col2im(dcols, x_shape, kernel, stride)
            da = dx
            idx -= 1
    return loss, grads


@dataclass
class TrainResult:
    params: list
    trace: list[dict] = field(default_factory=list)
    best_epoch: int = 0


def train(
    net: NetworkSpec,
    training: BinaryImageDataset,
    noise: NoiseModel | None,
    config: TrainConfig,
) -> TrainResult:
    """Plain SGD training with a held-out slice for best-epoch selection.

    With ``noisy_train`` each image receives a fresh noise sample every
    epoch, drawn from (seed, epoch, batch) streams; everything is
    deterministic for a fixed config.
    """
    if len(training) == 0:
        raise ValueError("training set is empty")
    n = len(training)
    images = training.images.reshape(n, *net.input_shape)
    labels = training.labels

    n_hold = max(1, int(round(config.holdout_fraction * n))) if n > 1 else 0
    perm = trial_stream(config.seed, 0x51).permutation(n)
    hold_idx, fit_idx = perm[:n_hold], perm[n_hold:]
    if len(fit_idx) == 0:
        fit_idx, hold_idx = perm, perm
    x_hold, y_hold = images[hold_idx], labels[hold_idx]

    params = init_params(net, config.seed)
    best = [(W.copy(), b.copy()) for W, b in params]
    best_acc, best_epoch = -1.0, 0
    trace = []
    apply_noise = noise is not None and config.noisy_train and noise.flip_probability > 0

    for epoch in range(config.epochs):
        order = trial_stream(config.seed, 0x5E, epoch).permutation(len(fit_idx))
        total_loss = 0.0
        for bi in range(0, len(order), config.batch_size):
            sel = fit_idx[order[bi : bi + config.batch_size]]
            xb = images[sel].astype(float)
            if apply_noise:
                rng = trial_stream(config.seed, 0x7A, epoch, bi)
                flips = rng.random(xb.shape) < noise.flip_probability
                xb = np.abs(xb - flips)
            loss, grads = loss_and_grad(net, params, xb, labels[sel])
            total_loss += loss
            lr = config.learning_rate / len(sel)
            params = [
                (W - lr * gW, b - lr * gb)
                for (W, b), (gW, gb) in zip(params, grads)
            ]
        if apply_noise:
            rng = trial_stream(config.seed, 0x40, epoch)
            flips = rng.random(x_hold.shape) < noise.flip_probability
            x_eval = np.abs(x_hold.astype(float) - flips)
        else:
            x_eval = x_hold
        acc = float(np.mean(predict_labels(net, params, x_eval) == y_hold)) if len(y_hold) else 0.0
        trace.append(
            {
                "epoch": epoch,
                "mean_loss": total_loss / max(len(fit_idx), 1),
                "holdout_accuracy": acc,
            }
        )
        if acc >= best_acc:
            best_acc, best_epoch = acc, epoch
            best = [(W.copy(), b.copy()) for W, b in params]
    return TrainResult(params=best if best_acc >= 0 else params, trace=trace, best_epoch=best_epoch)


def make_predictor(net: NetworkSpec, params):
    """Batch label predictor compatible with the Monte Carlo estimator."""

    def predict(batch: np.ndarray) -> np.ndarray:
        return predict_labels(net, params, batch)

    return predict


def evaluate(
    net: NetworkSpec,
    params,
    evaluation: BinaryImageDataset,
    noise: NoiseModel,
    trials: int,
    master_seed: int,
    threads: int = 1,
) -> ErrorEstimate:
    """Monte Carlo misclassification of the network on noisy samples; mirrors
    the nearest-neighbour estimator's contract."""
    return estimate_error(
        None,
        evaluation,
        noise,
        trials,
        master_seed,
        threads=threads,
        predictor=make_predictor(net, params),
    )


def _flatten(params) -> np.ndarray:
    return np.concatenate([arr.ravel() for W, b in params for arr in (W, b)])


def _unflatten(net: NetworkSpec, flat: np.ndarray):
    params, pos = [], 0
    for w_shape, b_shape in net.parameter_shapes():
        wn, bn = int(np.prod(w_shape)), int(np.prod(b_shape))
        W = flat[pos : pos + wn].reshape(w_shape)
        pos += wn
        b = flat[pos : pos + bn].reshape(b_shape)
        pos += bn
        params.append((W, b))
    if pos != flat.size:
        raise ShapeMismatchError("checkpoint size does not match the architecture")
    return params


def save_params(path: str, net: NetworkSpec, params) -> None:
    """Versioned checkpoint: magic, format version, architecture digest, and
    the flat little-endian float64 parameter vector."""
    _check_params(net, params)
    flat = _flatten(params).astype("<f8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(spec_digest(net))
        fh.write(struct.pack("<Q", flat.size))
        fh.write(flat.tobytes())


def load_params(path: str, net: NetworkSpec):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != CHECKPOINT_MAGIC:
        raise ValueError("not a parameter checkpoint")
    (version,) = struct.unpack("<I", data[4:8])
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    if data[8:40] != spec_digest(net):
        raise ValueError("checkpoint was written for a different architecture")
    (count,) = struct.unpack("<Q", data[40:48])
    flat = np.frombuffer(data, dtype="<f8", offset=48)
    if flat.size != count:
        raise ValueError("checkpoint payload truncated")
    return _unflatten(net, flat.astype(float))
