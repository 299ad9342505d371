"""Shared fixtures and brute-force oracles for the test suite."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import pytest

from qthermal.data import synthetic_digits


@lru_cache(maxsize=None)
def all_patterns(m: int) -> np.ndarray:
    """All 2^m binary patterns as an (2^m, m) uint8 array."""
    idx = np.arange(2**m, dtype=np.uint32)
    return ((idx[:, None] >> np.arange(m)) & 1).astype(np.uint8)


@lru_cache(maxsize=None)
def hamming_matrix(m: int) -> np.ndarray:
    pats = all_patterns(m)
    return (pats[:, None, :] != pats[None, :, :]).sum(axis=2).astype(np.int64)


def brute_pair_sum(m: int, f: float, mask_a=None, mask_b=None, exclude_equal=True) -> float:
    """Sum of f^hamming over ordered pattern pairs from two index masks."""
    H = hamming_matrix(m)
    pats = all_patterns(m)
    pop = pats.sum(axis=1)
    sel_a = np.ones(len(pats), bool) if mask_a is None else mask_a(pop)
    sel_b = np.ones(len(pats), bool) if mask_b is None else mask_b(pop)
    sub = H[np.ix_(sel_a, sel_b)]
    weights = np.power(float(f), sub, dtype=float)
    if exclude_equal:
        weights = np.where(sub == 0, 0.0, weights)
    return float(weights.sum())


def brute_uniform(m: int, f: float) -> float:
    return brute_pair_sum(m, f) / 2**m


def brute_cpf(m: int, k: int, f: float) -> float:
    from math import comb

    mask = lambda pop: pop == k
    return brute_pair_sum(m, f, mask, mask) / comb(m, k)


def brute_cross(m: int, k: int, l: int, f: float) -> float:
    return brute_pair_sum(
        m, f, lambda pop: pop == k, lambda pop: pop == l, exclude_equal=False
    )


def brute_bcpf(m: int, ks, f: float) -> float:
    ks = set(ks)
    mask = lambda pop: np.isin(pop, list(ks))
    return brute_pair_sum(m, f, mask, mask)


def random_symplectic(modes: int, rng: np.random.Generator) -> np.ndarray:
    """Random symplectic from mode rotations, pair mixers and squeezers."""
    n = 2 * modes
    S = np.eye(n)
    for _ in range(3):
        for mode in range(modes):
            th = rng.uniform(0, 2 * np.pi)
            R = np.eye(n)
            c, s = np.cos(th), np.sin(th)
            R[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2] = [[c, s], [-s, c]]
            S = R @ S
            r = rng.uniform(-0.8, 0.8)
            Q = np.eye(n)
            Q[2 * mode, 2 * mode] = np.exp(r)
            Q[2 * mode + 1, 2 * mode + 1] = np.exp(-r)
            S = Q @ S
        for a in range(modes):
            for b in range(a + 1, modes):
                th = rng.uniform(0, 2 * np.pi)
                M = np.eye(n)
                c, s = np.cos(th), np.sin(th)
                for off in (0, 1):
                    i, j = 2 * a + off, 2 * b + off
                    M[i, i] = c
                    M[i, j] = s
                    M[j, i] = -s
                    M[j, j] = c
                S = M @ S
    return S


def random_cm(modes: int, rng: np.random.Generator) -> np.ndarray:
    """Random bona fide covariance matrix via Williamson synthesis."""
    S = random_symplectic(modes, rng)
    nus = rng.uniform(0.5, 4.0, modes)
    D = np.diag(np.repeat(nus, 2))
    return S @ D @ S.T


@pytest.fixture(scope="session")
def digits_small():
    train = synthetic_digits(200, seed=11, split="training")
    evaluation = synthetic_digits(100, seed=12, split="evaluation")
    return train, evaluation


def relu_margin(net, params, images) -> float:
    """Smallest |pre-activation| over all hidden units of the batch."""
    from qthermal.cnn import _forward_batch

    _, cache = _forward_batch(net, params, images, want_cache=True)
    margins = [np.min(np.abs(entry[-1])) for entry in cache if entry[0] != "out"]
    return float(min(margins)) if margins else float("inf")


def smooth_configuration(net, seed, batch=4):
    """Random parameters and inputs with all ReLU inputs away from zero.

    Central differences at the contract step 1e-3 are only meaningful when
    the perturbation cannot cross an activation kink.
    """
    from qthermal.cnn import init_params

    for attempt in range(50):
        rng = np.random.default_rng(seed + 1000 * attempt)
        params = init_params(net, seed + 1000 * attempt)
        images = rng.random((batch, *net.input_shape))
        labels = rng.integers(0, net.classes, batch)
        if relu_margin(net, params, images) > 0.02:
            return params, images, labels
    raise RuntimeError("no kink-free configuration found")


def max_fd_error(net, params, images, labels, coords=100, eps=1e-3, seed=0):
    """Worst relative deviation of backprop from central differences."""
    from qthermal.cnn import _flatten, _unflatten, loss_and_grad

    _, grads = loss_and_grad(net, params, images, labels)
    flat_g = _flatten(grads)
    flat_p = _flatten(params)
    idxs = np.random.default_rng(seed).choice(
        flat_p.size, size=min(coords, flat_p.size), replace=False
    )
    worst = 0.0
    for i in idxs:
        hi = flat_p.copy()
        hi[i] += eps
        lo = flat_p.copy()
        lo[i] -= eps
        vh, _ = loss_and_grad(net, _unflatten(net, hi), images, labels)
        vl, _ = loss_and_grad(net, _unflatten(net, lo), images, labels)
        fd = (vh - vl) / (2 * eps)
        worst = max(worst, abs(fd - flat_g[i]) / max(abs(fd), abs(flat_g[i]), 1e-8))
    return worst
