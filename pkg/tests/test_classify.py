"""Noise sampling, nearest-neighbour classification and error estimation."""

import numpy as np
import pytest

from qthermal.bounds import pixel_error_bounds
from qthermal.channels import EnvironmentPair
from qthermal.classify import (
    NoiseModel,
    advantage_regions,
    endpoint_noise_models,
    estimate_error,
    nn_classify,
    sample_noisy,
    snapp_fit,
    trial_stream,
)
from qthermal.classify import _snapp_design
from qthermal.data import BinaryImageDataset, synthetic_digits
from qthermal.errors import (
    EmptyEvaluationSetError,
    EmptyTrainingSetError,
    InsufficientSamplesError,
)


def make_dataset(images, labels, width=None):
    images = np.asarray(images, np.uint8)
    width = width or images.shape[1]
    return BinaryImageDataset(
        images=images,
        labels=np.asarray(labels, np.int64),
        height=1,
        width=images.shape[1],
        split="training",
    )


class TestNoiseModel:
    def test_probability_domain(self):
        with pytest.raises(ValueError):
            NoiseModel(0.7)

    def test_endpoint_consistency(self):
        model = NoiseModel.from_bounds(0.9, 10, "quantum-upper")
        lo, hi = pixel_error_bounds(0.9, 10)
        assert model.flip_probability == hi
        model = NoiseModel.from_bounds(0.9, 10, "quantum-lower")
        assert model.flip_probability == lo

    def test_out_of_interval_rejected(self):
        with pytest.raises(ValueError):
            NoiseModel(flip_probability=0.4, derivation="quantum-lower", fidelity=0.5, copies=20)

    def test_four_endpoints(self):
        models = endpoint_noise_models(EnvironmentPair.additive(0.02, 0.01), 20)
        assert set(models) == {
            "classical-lower",
            "classical-upper",
            "quantum-lower",
            "quantum-upper",
        }
        assert models["quantum-upper"].flip_probability < models["classical-upper"].flip_probability


class TestSampleNoisy:
    def test_zero_probability_is_identity(self):
        img = np.array([0, 1, 1, 0], np.uint8)
        out = sample_noisy(img, NoiseModel(0.0), trial_stream(1, 2))
        assert np.array_equal(out, img)

    def test_half_probability_uniform_chi2(self):
        # m = 4, 1e5 samples; chi-squared against uniform over 16 patterns,
        # 15 dof, fixed stream; 99.9% quantile is 37.7
        rng = trial_stream(42, 0)
        noise = NoiseModel(0.5)
        img = np.zeros(4, np.uint8)
        n = 100_000
        flips = rng.random((n, 4)) < noise.flip_probability
        codes = (flips.astype(np.uint8) * [1, 2, 4, 8]).sum(axis=1)
        counts = np.bincount(codes, minlength=16)
        expected = n / 16
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        assert chi2 < 37.7

    def test_flip_count_concentration(self):
        # mean flips over 1e4 trials of a 784-pixel image at p = 0.1
        p, m, trials = 0.1, 784, 10_000
        img = np.zeros(m, np.uint8)
        noise = NoiseModel(p)
        total = 0
        for t in range(trials):
            total += int(sample_noisy(img, noise, trial_stream(7, t)).sum())
        mean = total / trials
        sigma = np.sqrt(m * p * (1 - p) / trials)
        assert abs(mean - m * p) < 3 * sigma

    def test_deterministic_given_stream(self):
        img = np.ones(100, np.uint8)
        a = sample_noisy(img, NoiseModel(0.3), trial_stream(5, 1, 2))
        b = sample_noisy(img, NoiseModel(0.3), trial_stream(5, 1, 2))
        assert np.array_equal(a, b)


class TestNNClassify:
    def test_exact_match_returns_own_label(self):
        train = make_dataset([[0, 0, 0], [1, 1, 1]], [7, 2])
        assert nn_classify([1, 1, 1], train) == 2

    def test_distance_ordering(self):
        train = make_dataset([[0, 0, 0], [1, 1, 1]], [0, 1])
        assert nn_classify([0, 0, 1], train) == 0

    def test_tie_breaks_to_lowest_index(self):
        train = make_dataset([[0, 0], [1, 1]], [0, 1])
        assert nn_classify([0, 1], train) == 0

    def test_empty_training(self):
        train = make_dataset(np.zeros((0, 3), np.uint8), [])
        with pytest.raises(EmptyTrainingSetError):
            nn_classify([0, 0, 0], train)


class TestEstimateError:
    def test_noiseless_subset_is_exact_zero(self, digits_small):
        train, _ = digits_small
        subset = train.subset(np.arange(40))
        est = estimate_error(train, subset, NoiseModel(0.0), trials=3, master_seed=1)
        assert est.mean == 0.0

    def test_maximal_noise_ten_classes(self, digits_small):
        train, evaluation = digits_small
        est = estimate_error(train, evaluation, NoiseModel(0.5), trials=20, master_seed=2)
        sigma = max(est.stderr, 1e-9)
        assert abs(est.mean - 0.9) < 3.5 * np.sqrt(0.9 * 0.1 / est.total_samples) + 3 * sigma

    def test_thread_count_invariance(self, digits_small):
        train, evaluation = digits_small
        kwargs = dict(noise=NoiseModel(0.1), trials=6, master_seed=9)
        a = estimate_error(train, evaluation, threads=1, **kwargs)
        b = estimate_error(train, evaluation, threads=4, **kwargs)
        assert a == b

    def test_monotone_in_training_size(self):
        evaluation = synthetic_digits(150, seed=21, split="evaluation")
        noise = NoiseModel(0.08)
        prev = None
        for i, T in enumerate((100, 1000, 4000)):
            train = synthetic_digits(T, seed=31)
            est = estimate_error(train, evaluation, noise, trials=8, master_seed=3)
            if prev is not None:
                assert est.mean <= prev.mean + 2 * (est.stderr + prev.stderr)
            prev = est

    def test_monotone_in_flip_probability(self, digits_small):
        train, evaluation = digits_small
        f, M = 0.97, 20
        lo, hi = pixel_error_bounds(f, M)
        e_lo = estimate_error(train, evaluation, NoiseModel(lo), trials=10, master_seed=4)
        e_hi = estimate_error(train, evaluation, NoiseModel(hi), trials=10, master_seed=4)
        assert e_lo.mean <= e_hi.mean + 2 * (e_lo.stderr + e_hi.stderr)

    def test_empty_sets(self, digits_small):
        train, evaluation = digits_small
        empty = train.subset(np.array([], dtype=int))
        with pytest.raises(EmptyTrainingSetError):
            estimate_error(empty, evaluation, NoiseModel(0.1), 1, 0)
        with pytest.raises(EmptyEvaluationSetError):
            estimate_error(train, empty, NoiseModel(0.1), 1, 0)


class TestSnappFit:
    def test_roundtrip_recovery(self):
        m, jmax = 4, 5
        Ts = np.array([10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000, 50000], float)
        truth = np.array([0.05, 0.3, -0.2, 0.15, -0.04])
        E = _snapp_design(Ts, m, jmax) @ truth
        fit = snapp_fit(list(zip(Ts, E)), m, jmax)
        assert fit.e_inf == pytest.approx(truth[0], rel=1e-6)
        np.testing.assert_allclose(fit.coefficients, truth[1:], rtol=1e-6)
        assert fit.residual_rms < 1e-10
        assert not fit.clipped

    def test_constant_samples(self):
        Ts = [10, 100, 1000, 10000, 100000, 500000]
        fit = snapp_fit([(t, 0.25) for t in Ts], m=9)
        assert fit.e_inf == pytest.approx(0.25, abs=1e-9)
        np.testing.assert_allclose(fit.coefficients, 0.0, atol=1e-7)

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientSamplesError):
            snapp_fit([(10, 0.1), (100, 0.05), (1000, 0.02), (1000, 0.02)], m=4)

    def test_negative_asymptote_clipped(self):
        m, jmax = 4, 5
        Ts = np.array([10, 30, 100, 300, 1000, 3000, 10000], float)
        truth = np.array([-0.02, 0.5, 0.1, -0.05, 0.01])
        E = _snapp_design(Ts, m, jmax) @ truth
        fit = snapp_fit(list(zip(Ts, E)), m, jmax)
        assert fit.clipped and fit.e_inf == 0.0
        # the reported model stays self-consistent after clipping
        pred = _snapp_design(Ts, m, jmax) @ np.concatenate([[fit.e_inf], fit.coefficients])
        assert np.sqrt(np.mean((E - pred) ** 2)) == pytest.approx(fit.residual_rms, rel=1e-9)

    def test_singular_design_gate(self):
        from qthermal.classify import _ridge_least_squares
        from qthermal.errors import SingularDesignError

        # with T >= 1 the basis columns are always positive, so the gate is
        # defensive; a zero column trips it directly
        A = np.column_stack([np.ones(6), np.zeros(6)])
        with pytest.raises(SingularDesignError):
            _ridge_least_squares(A, np.ones(6))

    def test_invalid_pixel_count(self):
        with pytest.raises(ValueError):
            snapp_fit([(t, 0.1) for t in (10, 100, 1000, 10000, 100000)], m=0)


class TestAdvantageRegions:
    def test_identical_channels_no_advantage(self, digits_small):
        train, evaluation = digits_small
        pair = EnvironmentPair.additive(0.02, 0.02)
        rows = advantage_regions(train, evaluation, pair, [5], trials=4, master_seed=8)
        row = rows[0]
        means = [row.e_cl_low.mean, row.e_cl_up.mean, row.e_q_low.mean, row.e_q_up.mean]
        assert max(means) - min(means) <= 4 * row.stderr_max + 0.05
        assert row.de_min <= 0.0 + 4 * row.stderr_max

    def test_p_override_zero_on_subset(self, digits_small):
        train, _ = digits_small
        subset = train.subset(np.arange(30))
        pair = EnvironmentPair.additive(0.02, 0.01)
        rows = advantage_regions(
            train, subset, pair, [10], trials=2, master_seed=1, p_override=0.0
        )
        row = rows[0]
        assert row.e_cl_low.mean == row.e_q_up.mean == 0.0
        assert row.de_min == row.de_max == 0.0

    def test_pixel_probabilities_recorded(self, digits_small):
        train, evaluation = digits_small
        pair = EnvironmentPair.additive(0.02, 0.01)
        rows = advantage_regions(train, evaluation, pair, [10, 40], trials=2, master_seed=1)
        for row, M in zip(rows, (10, 40)):
            assert row.M == M
            assert row.p_q_low <= row.p_q_up
            assert row.p_cl_low <= row.p_cl_up
            assert row.p_q_up < row.p_cl_up
