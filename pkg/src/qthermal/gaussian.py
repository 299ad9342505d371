"""Zero-mean Gaussian states in covariance-matrix form.

Quadrature ordering is (q1, p1, ..., qN, pN) throughout, with shot noise 1/2,
i.e. the N-mode vacuum has covariance matrix I/2.  All matrix functions are
computed through symmetric eigendecompositions; the matrices handled here are
tiny (at most 4x4), so robustness is preferred over speed.
"""

from __future__ import annotations

import threading

import numpy as np
from mpmath import mp

from .errors import (
    CutoffTooSmallError,
    DimensionMismatchError,
    NonPhysicalError,
    NonSymmetricError,
    UnsupportedStateError,
)

SYMMETRY_TOL = 1e-12
PHYSICALITY_TOL = 1e-8

# Below this margin above the minimal symplectic eigenvalue 1/2, the
# double-precision sqrt(4*v^2 - 1) in the fidelity loses half the digits,
# so the computation is redone in extended precision.
_NEAR_PURE_MARGIN = 1e-5
_MP_DPS = 50

# mpmath's working precision is process-global state; serialise the
# extended-precision sections so the pure-function contract holds under
# concurrent callers
MP_LOCK = threading.Lock()

Z2 = np.diag([1.0, -1.0])


def symplectic_form(modes: int) -> np.ndarray:
    """Standard symplectic form, a direct sum of [[0, 1], [-1, 0]] blocks."""
    return np.kron(np.eye(modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


class CovarianceMatrix:
    """Validated second-moment matrix of a zero-mean Gaussian state.

    The input is symmetrised as (V + V^T)/2 before validation; asymmetry
    beyond ``SYMMETRY_TOL`` and symplectic eigenvalues below
    ``1/2 - PHYSICALITY_TOL`` are rejected.  Entries must be finite: the
    infinite-squeezing limit is always handled by extrapolation elsewhere,
    never by infinite matrix entries.
    """

    __slots__ = ("_matrix", "_modes")

    def __init__(self, matrix) -> None:
        arr = np.array(matrix, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2:
            raise ValueError(f"covariance matrix must be square 2Nx2N, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonPhysicalError("covariance matrix has non-finite entries")
        gap = np.max(np.abs(arr - arr.T))
        if gap > SYMMETRY_TOL:
            raise NonSymmetricError(f"asymmetry {gap:.3e} exceeds tolerance")
        arr = 0.5 * (arr + arr.T)
        arr.setflags(write=False)
        self._matrix = arr
        self._modes = arr.shape[0] // 2
        nu_min = _symplectic_eigenvalues(arr).min()
        if nu_min < 0.5 - PHYSICALITY_TOL:
            raise NonPhysicalError(
                f"minimal symplectic eigenvalue {nu_min:.12g} below 1/2"
            )

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def modes(self) -> int:
        return self._modes

    def __repr__(self) -> str:
        return f"CovarianceMatrix(modes={self._modes})"


def vacuum_cm(modes: int = 1) -> CovarianceMatrix:
    return CovarianceMatrix(0.5 * np.eye(2 * modes))


def thermal_cm(nbar: float) -> CovarianceMatrix:
    """Single-mode thermal state with mean photon number ``nbar``."""
    if nbar < 0:
        raise NonPhysicalError(f"thermal occupation must be >= 0, got {nbar}")
    return CovarianceMatrix((nbar + 0.5) * np.eye(2))


def tmsv_cm(a: float) -> CovarianceMatrix:
    """Two-mode squeezed vacuum with diagonal blocks a*I, a = n_s + 1/2."""
    if a < 0.5:
        raise NonPhysicalError(f"squeezing parameter a must be >= 1/2, got {a}")
    c = np.sqrt(a * a - 0.25)
    V = np.block([[a * np.eye(2), c * Z2], [c * Z2, a * np.eye(2)]])
    return CovarianceMatrix(V)


def _as_matrix(V) -> np.ndarray:
    if isinstance(V, CovarianceMatrix):
        return V.matrix
    return CovarianceMatrix(V).matrix


def _symplectic_eigenvalues(arr: np.ndarray) -> np.ndarray:
    # sqrt(V) Omega sqrt(V) is antisymmetric with singular values
    # {nu_1, nu_1, nu_2, nu_2, ...}; SVD of it is numerically stable.
    w, Q = np.linalg.eigh(arr)
    w = np.clip(w, 0.0, None)
    root = (Q * np.sqrt(w)) @ Q.T
    n = arr.shape[0] // 2
    s = np.linalg.svd(root @ symplectic_form(n) @ root, compute_uv=False)
    return s[::2]


def symplectic_eigenvalues(V) -> np.ndarray:
    """Symplectic spectrum of a bona fide covariance matrix, descending.

    Raises:
        NonSymmetricError: asymmetry above tolerance.
        NonPhysicalError: any symplectic eigenvalue below 1/2 - 1e-8.
    """
    arr = _as_matrix(V)
    return _symplectic_eigenvalues(arr)


def _fidelity_mp(V1: np.ndarray, V2: np.ndarray) -> float:
    """Extended-precision evaluation of the Gaussian fidelity product form."""
    with MP_LOCK, mp.workdps(_MP_DPS):
        n = V1.shape[0] // 2
        O = mp.matrix(symplectic_form(n).tolist())
        A1 = mp.matrix(V1.tolist())
        A2 = mp.matrix(V2.tolist())
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
        F = mp.sqrt(prod) / mp.det(S) ** mp.mpf(0.25)
        return float(F)


def gaussian_fidelity(V1, V2) -> float:
    """Bures fidelity F(rho1, rho2) = ||sqrt(rho1) sqrt(rho2)||_1 of two
    zero-mean Gaussian states.

    Uses the closed form built on the auxiliary matrix
    W = Omega^T (V1+V2)^{-1} (Omega/4 + V2 Omega V1): with the auxiliary
    symplectic eigenvalues v_j of W,

        F = prod_j sqrt(2 v_j + sqrt(4 v_j^2 - 1)) / det(V1+V2)^{1/4}.

    Args:
        V1, V2: covariance matrices (arrays or ``CovarianceMatrix``) with the
            same mode count; both must be bona fide.

    Returns:
        Fidelity in [0, 1]; symmetric in its arguments.
    """
    A1 = _as_matrix(V1)
    A2 = _as_matrix(V2)
    if A1.shape != A2.shape:
        raise DimensionMismatchError(f"mode mismatch: {A1.shape} vs {A2.shape}")
    n = A1.shape[0] // 2
    O = symplectic_form(n)
    S = A1 + A2
    w, Q = np.linalg.eigh(S)
    Sinv = (Q / w) @ Q.T
    detS = float(np.prod(w))
    Vaux = O.T @ Sinv @ (O / 4.0 + A2 @ O @ A1)
    lam = np.linalg.eigvals(Vaux @ O)
    # eigenvalues come in +-i v pairs of equal modulus
    vt = np.sort(np.abs(lam))[::2]
    if vt.min() < 0.5 + _NEAR_PURE_MARGIN:
        return min(_fidelity_mp(A1, A2), 1.0)
    factors = 2.0 * vt + np.sqrt(4.0 * vt * vt - 1.0)
    F = float(np.prod(np.sqrt(factors)) / detS ** 0.25)
    return min(F, 1.0)


def _thermal_occupations(arr: np.ndarray) -> np.ndarray:
    """Per-mode occupations of a diagonal product-of-thermals CM."""
    n = arr.shape[0] // 2
    off = arr - np.diag(np.diag(arr))
    scale = max(1.0, np.max(np.abs(arr)))
    if np.max(np.abs(off)) > 1e-10 * scale:
        raise UnsupportedStateError("oracle requires a diagonal covariance matrix")
    d = np.diag(arr)
    q, p = d[0::2], d[1::2]
    if np.max(np.abs(q - p)) > 1e-10 * scale:
        raise UnsupportedStateError("oracle requires equal q and p variances per mode")
    return q - 0.5


def fock_fidelity_oracle(V1, V2, cutoff: int) -> float:
    """Uhlmann fidelity of truncated Fock representations.

    Deliberately narrow verification oracle: only single-mode thermal states
    and tensor products thereof are accepted (diagonal Fock representation),
    where the fidelity is the Bhattacharyya sum of Bose-Einstein weights,
    evaluated per mode up to ``cutoff``.  Converges monotonically upward in
    the cutoff.

    Raises:
        UnsupportedStateError: non-diagonal Fock representation requested.
        CutoffTooSmallError: truncated trace below 1 - 1e-6 for either state.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be a positive integer")
    A1 = _as_matrix(V1)
    A2 = _as_matrix(V2)
    if A1.shape != A2.shape:
        raise DimensionMismatchError(f"mode mismatch: {A1.shape} vs {A2.shape}")
    occ1 = _thermal_occupations(A1)
    occ2 = _thermal_occupations(A2)
    ns = np.arange(cutoff + 1, dtype=float)
    F = 1.0
    for n1, n2 in zip(occ1, occ2):
        logp = _log_bose_einstein(n1, ns)
        logq = _log_bose_einstein(n2, ns)
        for lg, nb in ((logp, n1), (logq, n2)):
            trace = np.sum(np.exp(lg))
            if trace < 1.0 - 1e-6:
                raise CutoffTooSmallError(
                    f"truncated trace {trace:.9f} at cutoff {cutoff} (nbar={nb:.4g})"
                )
        F *= float(np.sum(np.exp(0.5 * (logp + logq))))
    return F


def _log_bose_einstein(nbar: float, ns: np.ndarray) -> np.ndarray:
    nbar = max(float(nbar), 0.0)
    if nbar == 0.0:
        out = np.full(ns.shape, -np.inf)
        out[0] = 0.0
        return out
    return ns * (np.log(nbar) - np.log1p(nbar)) - np.log1p(nbar)
