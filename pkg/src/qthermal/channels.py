"""Gaussian phase-insensitive channels and their probe-state fidelities.

A channel is parameterised by transmissivity/gain tau and induced noise nu
(shot-noise units).  Background/target pairs share the same tau and differ
only in noise, so every fidelity here reduces to a function of the pair's
noise parameters, evaluated either from closed forms or from covariance
matrices via :func:`qthermal.gaussian.gaussian_fidelity`.

The covariance-matrix route is the ground truth.  Printed closed forms for
the thermal (loss/amplifier) family are validated against it on every call
and are abandoned, with a warning, if they disagree.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from mpmath import mp
from scipy.constants import c as _c_light
from scipy.constants import h as _h_planck
from scipy.constants import k as _k_boltzmann

from .errors import (
    ConventionUnresolvedWarning,
    ExtrapolationWarning,
    NonPhysicalChannelError,
)
from .gaussian import MP_LOCK, Z2, CovarianceMatrix, gaussian_fidelity, symplectic_form

_CP_TOL = 1e-12

# squeezing values standing in for the a -> infinity limit; the two-point
# spread doubles as the convergence estimate
_ASYMPTOTIC_A = (1e13, 1e14)
_ASYMPTOTIC_SPREAD_TOL = 1e-9
_CLOSED_FORM_TOL = 1e-6


@dataclass(frozen=True)
class ChannelSpec:
    """Thermal-loss (0 <= tau < 1), additive-noise (tau = 1) or amplifier
    (tau > 1) channel with induced noise nu >= |1 - tau|/2."""

    tau: float
    nu: float

    def __post_init__(self):
        if not np.isfinite(self.tau) or not np.isfinite(self.nu) or self.tau < 0:
            raise NonPhysicalChannelError(
                f"invalid channel parameters tau={self.tau}, nu={self.nu}"
            )
        floor = abs(1.0 - self.tau) / 2.0
        if self.nu < floor - _CP_TOL:
            raise NonPhysicalChannelError(
                f"induced noise {self.nu} below complete-positivity floor {floor}"
            )

    @property
    def kind(self) -> str:
        if self.tau == 1.0:
            return "additive"
        return "loss" if self.tau < 1.0 else "amplifier"

    @property
    def epsilon(self) -> float:
        """Environmental thermal parameter nu/|1-tau| = nbar + 1/2."""
        if self.tau == 1.0:
            raise ValueError("epsilon is undefined for additive channels (tau = 1)")
        return self.nu / abs(1.0 - self.tau)

    @property
    def env_nbar(self) -> float:
        return self.epsilon - 0.5

    @classmethod
    def additive(cls, nu: float) -> "ChannelSpec":
        return cls(1.0, nu)

    @classmethod
    def from_epsilon(cls, tau: float, epsilon: float) -> "ChannelSpec":
        if tau == 1.0:
            raise ValueError("additive channels are parameterised by nu directly")
        return cls(tau, epsilon * abs(1.0 - tau))


@dataclass(frozen=True)
class EnvironmentPair:
    """Background/target channels with identical transmissivities."""

    background: ChannelSpec
    target: ChannelSpec

    def __post_init__(self):
        if self.background.tau != self.target.tau:
            raise NonPhysicalChannelError(
                "background and target transmissivities must be identical, got "
                f"{self.background.tau} and {self.target.tau}"
            )

    @property
    def tau(self) -> float:
        return self.background.tau

    @property
    def kind(self) -> str:
        return self.background.kind

    @classmethod
    def additive(cls, nu_background: float, nu_target: float) -> "EnvironmentPair":
        return cls(ChannelSpec.additive(nu_background), ChannelSpec.additive(nu_target))

    @classmethod
    def thermal(cls, tau: float, eps_background: float, eps_target: float) -> "EnvironmentPair":
        return cls(
            ChannelSpec.from_epsilon(tau, eps_background),
            ChannelSpec.from_epsilon(tau, eps_target),
        )


def choi_cm(channel: ChannelSpec, a: float) -> CovarianceMatrix:
    """Covariance matrix of the finite-energy Choi state at squeezing a.

    One half of a two-mode squeezed vacuum with diagonal parameter
    a = n_s + 1/2 is sent through the channel.  Mode 1 is the retained
    idler (variance a), mode 2 the channel output (variance a*tau + nu),
    with q/p correlations +-sqrt(tau*(a^2 - 1/4)).
    """
    if a < 0.5:
        raise ValueError(f"squeezing parameter a must be >= 1/2, got {a}")
    c = np.sqrt(channel.tau * (a * a - 0.25))
    V = np.block(
        [
            [a * np.eye(2), c * Z2],
            [c * Z2, (a * channel.tau + channel.nu) * np.eye(2)],
        ]
    )
    return CovarianceMatrix(V)


def classical_output_cm(channel: ChannelSpec) -> CovarianceMatrix:
    """Vacuum-probe output: a thermal state with variance tau/2 + nu."""
    return CovarianceMatrix((channel.tau / 2.0 + channel.nu) * np.eye(2))


def fidelity_finite(pair: EnvironmentPair, a: float) -> float:
    """Fidelity between the pair's finite-energy Choi states at squeezing a.

    At a = 1/2 the probe is vacuum and the idler decouples, recovering
    :func:`fidelity_classical`; the value is non-increasing in a.
    """
    return gaussian_fidelity(choi_cm(pair.target, a), choi_cm(pair.background, a))


def fidelity_classical(pair: EnvironmentPair) -> float:
    """Output fidelity of the optimal classical (vacuum-probe) strategy."""
    return gaussian_fidelity(
        classical_output_cm(pair.target), classical_output_cm(pair.background)
    )


def classical_fidelity_additive(nu_t: float, nu_b: float) -> float:
    """Closed form 1/(sqrt((nu_t+1)(nu_b+1)) - sqrt(nu_t*nu_b))."""
    return 1.0 / (np.sqrt((nu_t + 1.0) * (nu_b + 1.0)) - np.sqrt(nu_t * nu_b))


def _mp_choi_fidelity(pair: EnvironmentPair, a: float, dps: int = 60) -> float:
    """Choi-state fidelity with covariance matrices built and diagonalised in
    extended precision, usable at squeezing values far beyond double range."""
    with MP_LOCK, mp.workdps(dps):
        tau = mp.mpf(pair.tau)
        am = mp.mpf(a)
        c = mp.sqrt(tau * (am * am - mp.mpf(1) / 4))

        def choi(nu):
            M = mp.zeros(4)
            M[0, 0] = M[1, 1] = am
            M[2, 2] = M[3, 3] = am * tau + mp.mpf(nu)
            M[0, 2] = M[2, 0] = c
            M[1, 3] = M[3, 1] = -c
            return M

        A1 = choi(pair.target.nu)
        A2 = choi(pair.background.nu)
        O = mp.matrix(symplectic_form(2).tolist())
        S = A1 + A2
        Vaux = O.T * (S ** -1) * (O / 4 + A2 * O * A1)
        eig, _ = mp.eig(Vaux * O)
        mods = sorted(abs(x) for x in eig)
        prod = mp.mpf(1)
        for vt in mods[::2]:
            d = 4 * vt * vt - 1
            if d < 0:
                d = mp.mpf(0)
            prod *= 2 * vt + mp.sqrt(d)
        return float(mp.sqrt(prod) / mp.det(S) ** mp.mpf(0.25))


def fidelity_choi_inf_extrapolated(pair: EnvironmentPair) -> float:
    """Infinite-squeezing Choi fidelity from the covariance-matrix route.

    Evaluated at two squeezing values far into the asymptotic regime; the
    spread between them estimates the residual.  Warns with
    ``ExtrapolationWarning`` if the spread exceeds 1e-9.
    """
    lo = _mp_choi_fidelity(pair, _ASYMPTOTIC_A[0])
    hi = _mp_choi_fidelity(pair, _ASYMPTOTIC_A[1])
    if abs(hi - lo) > _ASYMPTOTIC_SPREAD_TOL:
        warnings.warn(
            f"infinite-squeezing fidelity spread {abs(hi - lo):.3e} above tolerance",
            ExtrapolationWarning,
            stacklevel=2,
        )
    return min(hi, 1.0)


def choi_fidelity_thermal(eps_t: float, eps_b: float) -> float:
    """Infinite-squeezing Choi fidelity of a loss/amplifier pair.

    Depends only on the environmental thermal parameters eps = nbar + 1/2,
    not on the common transmissivity:

        F = sqrt((4 e_t e_b + 1 + sqrt((4 e_t^2 - 1)(4 e_b^2 - 1))) / 2) / (e_t + e_b)
    """
    cross = np.sqrt((4.0 * eps_t**2 - 1.0) * (4.0 * eps_b**2 - 1.0))
    return np.sqrt(2.0 * eps_t * eps_b + 0.5 + 0.5 * cross) / (eps_t + eps_b)


def choi_fidelity_additive(nu_t: float, nu_b: float) -> float:
    """Infinite-squeezing Choi fidelity 2 sqrt(nu_t nu_b)/(nu_t + nu_b)."""
    if nu_t == nu_b:
        return 1.0
    return 2.0 * np.sqrt(nu_t * nu_b) / (nu_t + nu_b)


def fidelity_choi_inf(pair: EnvironmentPair) -> float:
    """Fidelity between the pair's asymptotic (infinitely squeezed) Choi states.

    Additive pairs use the exact closed form.  Loss/amplifier pairs use the
    thermal closed form only after validating it against the
    covariance-matrix extrapolation on this very pair; on disagreement beyond
    1e-6 the closed form is dropped, a ``ConventionUnresolvedWarning`` is
    emitted and the extrapolated value is returned.
    """
    if pair.kind == "additive":
        return choi_fidelity_additive(pair.target.nu, pair.background.nu)
    closed = choi_fidelity_thermal(pair.target.epsilon, pair.background.epsilon)
    oracle = fidelity_choi_inf_extrapolated(pair)
    if abs(closed - oracle) > _CLOSED_FORM_TOL:
        warnings.warn(
            f"thermal Choi closed form {closed:.9g} disagrees with the "
            f"covariance-matrix value {oracle:.9g}; using the latter",
            ConventionUnresolvedWarning,
            stacklevel=2,
        )
        return oracle
    return closed


def temperature_of(nbar: float, wavelength: float) -> float:
    """Blackbody temperature (Kelvin) of a mode with occupation ``nbar`` at
    the given wavelength (meters), T = hc / (k lambda ln(1/nbar + 1))."""
    if nbar <= 0:
        raise ValueError(f"occupation must be positive, got {nbar}")
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return _h_planck * _c_light / (_k_boltzmann * wavelength * np.log1p(1.0 / nbar))
