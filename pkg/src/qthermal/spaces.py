"""Binary image spaces and their Hamming-distance fidelity functionals.

An m-pixel binary image space is either the full set of 2^m patterns
(uniform), the patterns with exactly k target pixels (k-CPF), or a union of
such sets over a bounded set of target counts (k-BCPF).  The discrimination
bounds all reduce to weighted sums of f^hamming over ordered unequal pattern
pairs; the closed forms below are terminating hypergeometric-type sums,
evaluated with log-domain binomials so that pixel counts up to ~10^4 do not
overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

NEG_INF = float("-inf")


def log_binomial(n: int, k) -> np.ndarray:
    """log C(n, k), elementwise; -inf outside 0 <= k <= n."""
    k = np.asarray(k, dtype=float)
    out = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    return np.where((k < 0) | (k > n), NEG_INF, out)


@dataclass(frozen=True)
class ImageSpace:
    """Uniform, k-CPF, or k-BCPF space over m-pixel binary patterns.

    A BCPF set covering every count 0..m is normalised to the uniform
    variant, since the two describe the same pattern ensemble.
    """

    m: int
    kind: str
    k: int | None = None
    ks: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"pixel count must be >= 1, got {self.m}")
        if self.kind not in ("uniform", "cpf", "bcpf"):
            raise ValueError(f"unknown image-space kind {self.kind!r}")
        if self.kind == "cpf":
            if self.k is None or not 0 <= self.k <= self.m:
                raise ValueError(f"CPF target count must lie in [0, {self.m}]")
        if self.kind == "bcpf":
            if not self.ks:
                raise ValueError("BCPF target-count set must be non-empty")
            if len(set(self.ks)) != len(self.ks):
                raise ValueError("BCPF target counts must be distinct")
            if any(not 0 <= k <= self.m for k in self.ks):
                raise ValueError(f"BCPF target counts must lie in [0, {self.m}]")

    @classmethod
    def uniform(cls, m: int) -> "ImageSpace":
        return cls(m=m, kind="uniform")

    @classmethod
    def cpf(cls, m: int, k: int) -> "ImageSpace":
        return cls(m=m, kind="cpf", k=k)

    @classmethod
    def bcpf(cls, m: int, ks) -> "ImageSpace":
        ks = tuple(sorted(int(k) for k in ks))
        if ks == tuple(range(m + 1)):
            return cls(m=m, kind="uniform")
        return cls(m=m, kind="bcpf", ks=ks)

    def log_pattern_count(self) -> float:
        """log of the number of patterns in the space."""
        if self.kind == "uniform":
            return self.m * np.log(2.0)
        if self.kind == "cpf":
            return float(log_binomial(self.m, self.k))
        return float(logsumexp([log_binomial(self.m, k) for k in self.ks]))


def hamming_functional_uniform(m: int, f: float) -> float:
    """Per-pattern Hamming sum over the uniform space: (f+1)^m - 1.

    Equals (1/2^m) * sum over ordered unequal m-bit pattern pairs of
    f^hamming.
    """
    _check_mf(m, f)
    return float(np.expm1(m * np.log1p(f)))


def _log_cpf_sum_tail(m: int, k: int, log_f: float) -> float:
    """log of sum_{j>=1} C(k,j) C(m-k,j) f^{2j}  (the j = 0 term dropped)."""
    jmax = min(k, m - k)
    if jmax < 1 or log_f == NEG_INF:
        return NEG_INF
    js = np.arange(1, jmax + 1, dtype=float)
    terms = log_binomial(k, js) + log_binomial(m - k, js) + 2.0 * js * log_f
    return float(logsumexp(terms))


def cpf_functional(m: int, k: int, f: float) -> float:
    """Per-pattern Hamming sum over the k-CPF space.

    Terminating series sum_{j>=1} C(k,j) C(m-k,j) f^{2j}; zero for the
    singleton spaces k = 0 and k = m.
    """
    _check_mf(m, f)
    if not 0 <= k <= m:
        raise ValueError(f"target count k must lie in [0, {m}], got {k}")
    return float(np.exp(_log_cpf_sum_tail(m, k, _safe_log(f))))


def _log_cross_sum(m: int, k: int, l: int, log_f: float) -> float:
    """log of the ordered cross sum between the k- and l-CPF spaces."""
    if k > l:
        k, l = l, k
    if log_f == NEG_INF:
        # all Hamming exponents are >= l - k > 0, so every term vanishes
        return NEG_INF
    ts = np.arange(l, k + l + 1, dtype=float)
    exps = 2.0 * ts - (k + l)
    terms = (
        log_binomial(m, ts)
        + log_binomial(ts, float(l))
        + log_binomial(l, k + l - ts)
        + exps * log_f
    )
    return float(logsumexp(terms))


def cross_functional(m: int, k: int, l: int, f: float) -> float:
    """Sum of f^hamming over all ordered pairs drawn from the k- and l-CPF
    spaces (k != l); equals C(m,k) C(m,l) at f = 1."""
    _check_mf(m, f)
    if k == l:
        raise ValueError("cross functional requires distinct target counts")
    for v in (k, l):
        if not 0 <= v <= m:
            raise ValueError(f"target count {v} outside [0, {m}]")
    return float(np.exp(_log_cross_sum(m, k, l, _safe_log(f))))


def _log_bcpf_sum(m: int, ks: tuple[int, ...], log_f: float) -> float:
    """log of the unnormalised Hamming sum over the union of k-CPF spaces.

    Diagonal blocks contribute C(m,k) * (per-pattern k-CPF sum); off-diagonal
    blocks contribute the plain cross sums.
    """
    parts = []
    for k in ks:
        diag = _log_cpf_sum_tail(m, k, log_f)
        if diag != NEG_INF:
            parts.append(float(log_binomial(m, k)) + diag)
    for i, k in enumerate(ks):
        for l in ks[i + 1 :]:
            cross = _log_cross_sum(m, k, l, log_f)
            if cross != NEG_INF:
                # ordered pairs count both directions
                parts.append(cross + np.log(2.0))
    if not parts:
        return NEG_INF
    return float(logsumexp(parts))


def bcpf_functional(space: ImageSpace, f: float) -> float:
    """Unnormalised sum of f^hamming over ordered unequal pattern pairs of a
    BCPF space; for the full count set it equals 2^m * ((f+1)^m - 1)."""
    _check_mf(space.m, f)
    if space.kind == "uniform":
        ks = tuple(range(space.m + 1))
    elif space.kind == "bcpf":
        ks = space.ks
    elif space.kind == "cpf":
        ks = (space.k,)
    return float(np.exp(_log_bcpf_sum(space.m, ks, _safe_log(f))))


def _safe_log(f: float) -> float:
    return float(np.log(f)) if f > 0.0 else NEG_INF


def _check_mf(m: int, f: float) -> None:
    if m < 1:
        raise ValueError(f"pixel count must be >= 1, got {m}")
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fidelity argument must lie in [0, 1], got {f}")
