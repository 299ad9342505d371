"""Error-probability bounds for multi-pixel channel discrimination.

Given the single-pixel output fidelities of the quantum (entangled-probe)
and classical (vacuum-probe) strategies, these functions bound the optimal
misclassification probability over an image space, and quantify the
guaranteed and potential advantage of the quantum strategy.  All
probability arithmetic runs in log space: F^(2M) underflows double
precision long before the bounds become uninteresting.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .spaces import (
    NEG_INF,
    ImageSpace,
    _log_bcpf_sum,
    _log_cpf_sum_tail,
    log_binomial,
)

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ProbeSpec:
    """Probe budget and energy regime of the quantum strategy.

    ``energy`` selects how the quantum-side fidelity is obtained:
    ``"classical"`` uses the vacuum probe (a = 1/2), ``"finite"`` the
    Choi state at squeezing ``a``, ``"asymptotic"`` the infinite-squeezing
    limit.
    """

    copies: int
    energy: str = "asymptotic"
    a: float | None = None

    def __post_init__(self):
        if self.copies < 1:
            raise ValueError(f"probe copy number must be >= 1, got {self.copies}")
        if self.energy not in ("classical", "finite", "asymptotic"):
            raise ValueError(f"unknown energy regime {self.energy!r}")
        if self.energy == "finite" and (self.a is None or self.a < 0.5):
            raise ValueError("finite energy requires a squeezing parameter a >= 1/2")

    def quantum_fidelity(self, pair) -> float:
        """Single-pixel output fidelity of this probe on a channel pair."""
        from .channels import fidelity_choi_inf, fidelity_classical, fidelity_finite

        if self.energy == "classical":
            return fidelity_classical(pair)
        if self.energy == "finite":
            return fidelity_finite(pair, self.a)
        return fidelity_choi_inf(pair)


@dataclass(frozen=True)
class BoundReport:
    """Bounds and advantage metrics for one (space, M, fidelity) configuration.

    ``q_lower``/``q_upper`` sandwich the optimal quantum-assisted error
    probability, ``cl_lower`` bounds the optimal classical strategy from
    below, ``mga = cl_lower - q_upper`` is the minimum guaranteed advantage,
    ``mpa = cl_lower - q_lower`` the maximum potential advantage and
    ``mbar_adv`` the minimum probe copies per pixel guaranteeing advantage
    on uniform spaces (infinite when no crossing exists).
    """

    q_lower: float
    q_upper: float
    cl_lower: float
    mga: float
    mpa: float
    mbar_adv: float


def _clip01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def _log_pow(F: float, exponent: float) -> float:
    """log(F^exponent) for F in [0, 1]."""
    if F <= 0.0:
        return NEG_INF
    if F >= 1.0:
        return 0.0
    return exponent * math.log(F)


def _uniform_lower(m: int, log_f: float) -> float:
    """((f + 1)^m - 1) / 2^(m+1) with f = exp(log_f), stable for any m."""
    L = m * math.log1p(math.exp(log_f)) if log_f > -745 else 0.0
    B = (m + 1) * LN2
    if L <= 0.0:
        return 0.0
    if L < 0.5:
        return math.exp(-B) * math.expm1(L)
    return math.exp(L - B) - math.exp(-B)


def _uniform_upper(m: int, log_f: float) -> float:
    """min(local Helstrom bound, joint-measurement bound) on uniform spaces."""
    local = -math.expm1(m * math.log1p(-0.5 * math.exp(log_f)))
    lse = m * math.log1p(math.exp(log_f)) if log_f > -745 else 0.0
    pgm = math.expm1(lse) if lse < LN2 else 1.0
    return min(local, pgm, 1.0)


def _cpf_lower(m: int, k: int, log_f: float) -> float:
    tail = _log_cpf_sum_tail(m, k, log_f)
    if tail == NEG_INF:
        return 0.0
    return math.exp(tail - LN2 - float(log_binomial(m, k)))


def _cpf_upper(m: int, k: int, log_f: float) -> float:
    tail = _log_cpf_sum_tail(m, k, log_f)
    if tail == NEG_INF:
        return 0.0
    return 1.0 if tail >= 0.0 else math.exp(tail)


def _bcpf_lower(m: int, ks, log_f: float) -> float:
    total = _log_bcpf_sum(m, ks, log_f)
    if total == NEG_INF:
        return 0.0
    log_count = float(np.logaddexp.reduce([log_binomial(m, k) for k in ks]))
    return math.exp(total - 2.0 * log_count - LN2)


def _bcpf_upper(m: int, ks, log_f: float) -> float:
    total = _log_bcpf_sum(m, ks, log_f)
    if total == NEG_INF:
        return 0.0
    log_count = float(np.logaddexp.reduce([log_binomial(m, k) for k in ks]))
    val = total - log_count
    return 1.0 if val >= 0.0 else math.exp(val)


def bounds(space: ImageSpace, M: int, F_q: float, F_cl: float) -> BoundReport:
    """Error-probability bounds for discriminating patterns of ``space`` with
    M probe copies per pixel.

    Args:
        space: image space (uniform, k-CPF or k-BCPF).
        M: probe copies per pixel, >= 1.
        F_q: single-pixel Choi-state fidelity of the quantum strategy.
        F_cl: single-pixel output fidelity of the vacuum-probe strategy.

    Returns:
        ``BoundReport`` with all probabilities clipped to [0, 1].  A pair
        with F_q > F_cl or values outside [0, 1] triggers a warning, not an
        error.
    """
    if M < 1:
        raise ValueError(f"probe copy number must be >= 1, got {M}")
    if not (0.0 <= F_q <= F_cl <= 1.0):
        warnings.warn(
            f"expected 0 <= F_q <= F_cl <= 1, got F_q={F_q}, F_cl={F_cl}",
            stacklevel=2,
        )
    log_q1 = _log_pow(F_q, float(M))
    log_q2 = _log_pow(F_q, 2.0 * M)
    log_c2 = _log_pow(F_cl, 2.0 * M)

    if space.kind == "uniform":
        q_lower = _uniform_lower(space.m, log_q2)
        q_upper = _uniform_upper(space.m, log_q1)
        cl_lower = _uniform_lower(space.m, log_c2)
    elif space.kind == "cpf":
        q_lower = _cpf_lower(space.m, space.k, log_q2)
        q_upper = _cpf_upper(space.m, space.k, log_q1)
        cl_lower = _cpf_lower(space.m, space.k, log_c2)
    else:
        q_lower = _bcpf_lower(space.m, space.ks, log_q2)
        q_upper = _bcpf_upper(space.m, space.ks, log_q1)
        cl_lower = _bcpf_lower(space.m, space.ks, log_c2)

    q_lower, q_upper, cl_lower = map(_clip01, (q_lower, q_upper, cl_lower))
    return BoundReport(
        q_lower=q_lower,
        q_upper=q_upper,
        cl_lower=cl_lower,
        mga=cl_lower - q_upper,
        mpa=cl_lower - q_lower,
        mbar_adv=min_rel_probe_uniform(F_q, F_cl),
    )


def min_rel_probe_uniform(F_q: float, F_cl: float) -> float:
    """Minimum probe copies per pixel guaranteeing quantum advantage on
    uniform spaces: log 2 / (2 log F_cl - log F_q).

    The advantage condition F_cl^(2M) > 2^m F_q^M has a solution only when
    the denominator is positive; otherwise (including F_q = F_cl = 1) the
    crossing does not exist and infinity is returned.
    """
    if not (0.0 < F_q <= 1.0 and 0.0 < F_cl <= 1.0):
        if F_q == 0.0:
            return 0.0
        raise ValueError(f"fidelities must lie in (0, 1], got {F_q}, {F_cl}")
    denom = 2.0 * math.log(F_cl) - math.log(F_q)
    if denom <= 0.0:
        return math.inf
    return LN2 / denom


def min_rel_probe_additive(nu_t: float, nu_b: float) -> float:
    """Closed form of :func:`min_rel_probe_uniform` for an additive-noise
    pair, via the quantum and classical excess-noise gaps

        d_q  = (sqrt(nu_b) - sqrt(nu_t))^2 / (2 sqrt(nu_b nu_t)),
        d_cl = sqrt((nu_t+1)(nu_b+1)) - sqrt(nu_b nu_t) - 1,

    giving log 2 / (log(1 + d_q) - 2 log(1 + d_cl))."""
    if nu_t < 0 or nu_b < 0:
        raise ValueError("additive noise parameters must be non-negative")
    if nu_t == nu_b:
        return math.inf
    d_q = (math.sqrt(nu_b) - math.sqrt(nu_t)) ** 2 / (2.0 * math.sqrt(nu_b * nu_t))
    d_cl = math.sqrt((nu_t + 1.0) * (nu_b + 1.0)) - math.sqrt(nu_b * nu_t) - 1.0
    denom = math.log1p(d_q) - 2.0 * math.log1p(d_cl)
    if denom <= 0.0:
        return math.inf
    return LN2 / denom


def pixel_error_bounds(F: float, M: int) -> tuple[float, float]:
    """Single-pixel misclassification bounds for M probe copies:

        (1 - sqrt(1 - F^(2M))) / 2  <=  p  <=  F^M / 2.
    """
    if not 0.0 <= F <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {F}")
    if M < 1:
        raise ValueError(f"probe copy number must be >= 1, got {M}")
    log_f2m = _log_pow(F, 2.0 * M)
    if log_f2m == NEG_INF:
        lower = 0.0
    else:
        # 1 - sqrt(1-x) = x / (1 + sqrt(1-x)) avoids cancellation at small x
        x = math.exp(log_f2m)
        lower = 0.5 * x / (1.0 + math.sqrt(max(1.0 - x, 0.0)))
    log_fm = _log_pow(F, float(M))
    upper = 0.5 * math.exp(log_fm) if log_fm > NEG_INF else 0.0
    return lower, upper
