"""Pixel-noise sampling, nearest-neighbour classification and Monte Carlo
error estimation.

Sensor imperfection is modelled as independent symmetric pixel flips whose
probability comes from the single-pixel error bounds.  All randomness flows
through counter-based streams keyed on (master seed, trial, image), so any
parallel schedule of the trials reproduces the same numbers bit for bit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bounds import pixel_error_bounds
from .channels import EnvironmentPair, fidelity_choi_inf, fidelity_classical
from .data import BinaryImageDataset
from .errors import (
    EmptyEvaluationSetError,
    EmptyTrainingSetError,
    InsufficientSamplesError,
    SingularDesignError,
)

NOISE_DERIVATIONS = (
    "classical-lower",
    "classical-upper",
    "quantum-lower",
    "quantum-upper",
)


@dataclass(frozen=True)
class NoiseModel:
    """Symmetric pixel-flip channel with provenance.

    ``derivation`` records which endpoint of the single-pixel error interval
    the flip probability came from (or ``"override"``); when the generating
    (fidelity, M) pair is recorded, the probability must lie inside the
    interval they produce.
    """

    flip_probability: float
    derivation: str = "override"
    fidelity: float | None = None
    copies: int | None = None

    def __post_init__(self):
        p = self.flip_probability
        if not 0.0 <= p <= 0.5:
            raise ValueError(f"flip probability must lie in [0, 1/2], got {p}")
        if self.fidelity is not None and self.copies is not None:
            lo, hi = pixel_error_bounds(self.fidelity, self.copies)
            if not lo - 1e-12 <= p <= hi + 1e-12:
                raise ValueError(
                    f"flip probability {p} outside pixel error interval [{lo}, {hi}]"
                )

    @classmethod
    def from_bounds(cls, fidelity: float, copies: int, derivation: str) -> "NoiseModel":
        if derivation not in NOISE_DERIVATIONS:
            raise ValueError(f"derivation must be one of {NOISE_DERIVATIONS}")
        lo, hi = pixel_error_bounds(fidelity, copies)
        p = lo if derivation.endswith("lower") else hi
        return cls(flip_probability=p, derivation=derivation, fidelity=fidelity, copies=copies)


def endpoint_noise_models(pair: EnvironmentPair, copies: int) -> dict[str, NoiseModel]:
    """The four noise models spanned by the quantum/classical error bounds."""
    f_q = fidelity_choi_inf(pair)
    f_cl = fidelity_classical(pair)
    return {
        tag: NoiseModel.from_bounds(f_cl if tag.startswith("classical") else f_q, copies, tag)
        for tag in NOISE_DERIVATIONS
    }


def trial_stream(master_seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator for one (seed, trial, image, ...) coordinate."""
    entropy = (int(master_seed),) + tuple(int(p) for p in path)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def sample_noisy(image: np.ndarray, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """Flip each pixel independently with the model's probability."""
    image = np.asarray(image, dtype=np.uint8)
    flips = rng.random(image.shape) < noise.flip_probability
    return image ^ flips.astype(np.uint8)


def nn_classify(query: np.ndarray, training: BinaryImageDataset) -> int:
    """Label of the Hamming-nearest training image; ties resolve to the
    lowest training index."""
    if len(training) == 0:
        raise EmptyTrainingSetError("training set is empty")
    distances = np.count_nonzero(training.images != np.asarray(query, dtype=np.uint8), axis=1)
    return int(training.labels[int(np.argmin(distances))])


def _nn_label_batch(
    queries: np.ndarray, train_images: np.ndarray, train_labels: np.ndarray
) -> np.ndarray:
    # hamming(a, b) = |a| + |b| - 2 a.b for binary vectors; the float32
    # products are exact integers below 2**24, and argmin picks the first
    # (lowest-index) minimiser
    qf = queries.astype(np.float32)
    tf = train_images.astype(np.float32)
    d = qf.sum(axis=1)[:, None] + tf.sum(axis=1)[None, :] - 2.0 * (qf @ tf.T)
    return train_labels[np.argmin(d, axis=1)]


@dataclass(frozen=True)
class ErrorEstimate:
    """Monte Carlo misclassification estimate."""

    mean: float
    stderr: float
    trials: int
    evaluations: int

    @property
    def total_samples(self) -> int:
        return self.trials * self.evaluations


def _noisy_eval_batch(
    evaluation: BinaryImageDataset, noise: NoiseModel, master_seed: int, trial: int
) -> np.ndarray:
    out = np.empty_like(evaluation.images)
    for i in range(len(evaluation)):
        rng = trial_stream(master_seed, trial, i)
        out[i] = sample_noisy(evaluation.images[i], noise, rng)
    return out


def estimate_error(
    training: BinaryImageDataset | None,
    evaluation: BinaryImageDataset,
    noise: NoiseModel,
    trials: int,
    master_seed: int,
    threads: int = 1,
    predictor: Callable[[np.ndarray], np.ndarray] | None = None,
) -> ErrorEstimate:
    """Expected misclassification probability over noisy evaluation samples.

    Each trial draws a fresh noisy copy of every evaluation image from its
    (seed, trial, image) stream and classifies it, by nearest neighbour
    against ``training`` unless a ``predictor`` batch callable is supplied.
    The result is independent of ``threads`` for a fixed master seed.

    Returns:
        ``ErrorEstimate`` with mean error and standard error
        sample-stddev / sqrt(trials * |evaluation|).
    """
    if predictor is None and (training is None or len(training) == 0):
        raise EmptyTrainingSetError("training set is empty")
    if len(evaluation) == 0:
        raise EmptyEvaluationSetError("evaluation set is empty")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    if predictor is None:
        t_images, t_labels = training.images, training.labels

        def predict(batch: np.ndarray) -> np.ndarray:
            return _nn_label_batch(batch, t_images, t_labels)

    else:
        predict = predictor

    def run_trial(trial: int) -> int:
        noisy = _noisy_eval_batch(evaluation, noise, master_seed, trial)
        return int(np.count_nonzero(predict(noisy) != evaluation.labels))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(run_trial, range(trials)))
    else:
        counts = [run_trial(t) for t in range(trials)]

    n = trials * len(evaluation)
    wrong = sum(counts)
    mean = wrong / n
    # sample standard deviation of 0/1 indicators
    var = (wrong * (1.0 - mean) ** 2 + (n - wrong) * mean**2) / (n - 1) if n > 1 else 0.0
    return ErrorEstimate(mean=mean, stderr=float(np.sqrt(var / n)), trials=trials, evaluations=len(evaluation))


@dataclass(frozen=True)
class SnappFit:
    """Finite-sample interpolation of classifier error against training size,
    E(T) ~ e_inf + sum_{j=2..jmax} x_j T^(-j/m)."""

    e_inf: float
    coefficients: np.ndarray
    residual_rms: float
    clipped: bool


def _snapp_design(T: np.ndarray, m: int, jmax: int) -> np.ndarray:
    cols = [np.ones_like(T)] + [T ** (-j / m) for j in range(2, jmax + 1)]
    return np.column_stack(cols)


def snapp_fit(samples: Sequence[tuple[float, float]], m: int, jmax: int = 5) -> SnappFit:
    """Least-squares fit of the truncated finite-sample error expansion.

    Args:
        samples: (T, E) pairs; at least ``jmax`` distinct training sizes.
        m: pixel count entering the T^(-j/m) basis.
        jmax: truncation order of the expansion.

    The normal equations carry a 1e-12 ridge on unit-scaled columns and a few
    refinement sweeps; the asymptotic error estimate is clipped at zero
    (flagged via ``clipped``) since error probabilities cannot be negative.
    """
    if m < 1:
        raise ValueError(f"pixel count must be >= 1, got {m}")
    pts = np.asarray(list(samples), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("samples must be (T, E) pairs")
    T, E = pts[:, 0], pts[:, 1]
    if np.any(T < 1):
        raise ValueError("training sizes must be >= 1")
    if len(np.unique(T)) < jmax:
        raise InsufficientSamplesError(
            f"need at least {jmax} distinct training sizes, got {len(np.unique(T))}"
        )
    A = _snapp_design(T, m, jmax)
    coeff = _ridge_least_squares(A, E)
    clipped = coeff[0] < 0.0
    if clipped:
        # refit with the asymptote pinned at zero so the returned model
        # (e_inf, coefficients) still describes one consistent fit
        tail = _ridge_least_squares(A[:, 1:], E)
        coeff = np.concatenate([[0.0], tail])
    resid = E - A @ coeff
    return SnappFit(
        e_inf=float(coeff[0]),
        coefficients=coeff[1:].copy(),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        clipped=clipped,
    )


def _ridge_least_squares(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Normal equations on unit-scaled columns with a 1e-12 ridge and a few
    refinement sweeps; the basis is near-collinear for large m."""
    scale = np.linalg.norm(A, axis=0)
    if np.any(scale == 0.0):
        raise SingularDesignError("design matrix has a zero column")
    As = A / scale
    G = As.T @ As + 1e-12 * np.eye(As.shape[1])
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > 1e15:
        raise SingularDesignError(f"normal equations are singular (cond {cond:.3g})")
    x = np.linalg.solve(G, As.T @ y)
    for _ in range(3):
        x = x + np.linalg.solve(G, As.T @ (y - As @ x))
    return x / scale


@dataclass(frozen=True)
class AdvantageRow:
    """One probe-copy grid point of a quantum-vs-classical simulation."""

    M: int
    p_cl_low: float
    p_cl_up: float
    p_q_low: float
    p_q_up: float
    e_cl_low: ErrorEstimate
    e_cl_up: ErrorEstimate
    e_q_low: ErrorEstimate
    e_q_up: ErrorEstimate

    @property
    def de_min(self) -> float:
        return self.e_cl_low.mean - self.e_q_up.mean

    @property
    def de_max(self) -> float:
        return self.e_cl_low.mean - self.e_q_low.mean

    @property
    def stderr_max(self) -> float:
        return max(
            self.e_cl_low.stderr,
            self.e_cl_up.stderr,
            self.e_q_low.stderr,
            self.e_q_up.stderr,
        )


def advantage_regions(
    training: BinaryImageDataset,
    evaluation: BinaryImageDataset,
    pair: EnvironmentPair,
    M_grid: Sequence[int],
    trials: int,
    master_seed: int,
    threads: int = 1,
    predictor_factory: Callable[[NoiseModel, int], Callable] | None = None,
    p_override: float | None = None,
) -> list[AdvantageRow]:
    """Classifier error regions across the four pixel-noise endpoints.

    For each M the pixel error bounds of the quantum and classical strategies
    define four flip probabilities; the classification error is estimated at
    each, and the guaranteed/potential error advantages are their
    differences.  ``predictor_factory(noise, M)`` may supply a trained
    classifier per endpoint (the nearest-neighbour rule is used otherwise);
    ``p_override`` forces one flip probability everywhere, for diagnostics.
    """
    f_q = fidelity_choi_inf(pair)
    f_cl = fidelity_classical(pair)
    rows = []
    for mi, M in enumerate(M_grid):
        models = {
            tag: NoiseModel.from_bounds(
                f_cl if tag.startswith("classical") else f_q, M, tag
            )
            for tag in NOISE_DERIVATIONS
        }
        if p_override is not None:
            models = {
                tag: NoiseModel(flip_probability=p_override, derivation="override")
                for tag in NOISE_DERIVATIONS
            }
        estimates = {}
        for ei, tag in enumerate(NOISE_DERIVATIONS):
            predictor = predictor_factory(models[tag], M) if predictor_factory else None
            estimates[tag] = estimate_error(
                training,
                evaluation,
                models[tag],
                trials,
                trial_stream(master_seed, mi, ei).integers(2**63),
                threads=threads,
                predictor=predictor,
            )
        rows.append(
            AdvantageRow(
                M=int(M),
                p_cl_low=models["classical-lower"].flip_probability,
                p_cl_up=models["classical-upper"].flip_probability,
                p_q_low=models["quantum-lower"].flip_probability,
                p_q_up=models["quantum-upper"].flip_probability,
                e_cl_low=estimates["classical-lower"],
                e_cl_up=estimates["classical-upper"],
                e_q_low=estimates["quantum-lower"],
                e_q_up=estimates["quantum-upper"],
            )
        )
    return rows
