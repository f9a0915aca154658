"""
Common-stream beamformers, private-stream precoders and power normalization.

All builders accept channel estimates of shape ``(..., K, L)`` and return
arrays with the same leading batch dimensions, so one call can produce the
precoders for a whole block of Monte Carlo trials.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, SingularityError
from .channel import gen_realization

__all__ = [
    "Scheme",
    "Precoder",
    "PowerSplit",
    "as_power_split",
    "build_precoder",
    "rzf_regularization",
    "normalization_mf_analytic",
    "precoder_power_moments",
    "normalization_empirical",
    "transmit_signal_power",
    "ZF_CONDITION_LIMIT",
]

ZF_CONDITION_LIMIT = 1e12


class Scheme(str, enum.Enum):
    """Precoding scheme for the common and private streams."""

    MF_JOINT = "MF_JOINT"  # one matched filter precodes the superposed streams
    MRT_MF = "MRT_MF"
    MRT_ZF = "MRT_ZF"
    MRT_RZF = "MRT_RZF"

    @property
    def is_mf_family(self):
        return self in (Scheme.MF_JOINT, Scheme.MRT_MF)

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PowerSplit:
    """Fraction ``rho`` of the power on the common stream, ``1 - rho`` private."""

    rho: float

    def __post_init__(self):
        r = float(self.rho)
        if not 0.0 <= r <= 1.0:
            raise DomainError(f"rho must lie in [0, 1], got {self.rho!r}")
        object.__setattr__(self, "rho", r)

    @property
    def rho_bar(self):
        return 1.0 - self.rho

    def matrix(self, K):
        """The diagonal ``Diag{sqrt(rho), sqrt(1-rho), ..., sqrt(1-rho)}``."""
        d = np.full(int(K) + 1, math.sqrt(self.rho_bar))
        d[0] = math.sqrt(self.rho)
        return np.diag(d)


def as_power_split(rho):
    return rho if isinstance(rho, PowerSplit) else PowerSplit(rho)


@dataclass(frozen=True)
class Precoder:
    """Common beamformer ``w_common`` (..., L) and private matrix (..., L, K)."""

    w_common: np.ndarray
    W_private: np.ndarray
    scheme: Scheme


def _hermitian(A):
    return np.conj(np.swapaxes(A, -1, -2))


def rzf_regularization(K, sigma2, Pt):
    """MMSE-style loading ``K sigma2 / Pt`` (``sigma2`` averaged over users)."""
    return K * float(np.mean(sigma2)) / Pt


def _gram_inverse_precoder(scheme, H_hat, reg):
    K = H_hat.shape[-2]
    G = H_hat @ _hermitian(H_hat)
    if reg:
        G = G + reg * np.eye(K)
    cond = np.linalg.cond(G)
    bad = ~(cond <= ZF_CONDITION_LIMIT)
    if np.any(bad):
        idx = int(np.flatnonzero(np.atleast_1d(bad))[0])
        trial = idx if np.ndim(bad) else None
        raise SingularityError(
            f"{scheme.value}: Gram matrix condition number "
            f"{np.atleast_1d(cond)[idx]:.3g} exceeds {ZF_CONDITION_LIMIT:.0e}",
            scheme=scheme,
            trial=trial,
        )
    # (G^-1 H)^H = H^H G^-1 because G is Hermitian
    return _hermitian(np.linalg.solve(G, H_hat))


def build_precoder(scheme, H_hat, reg=0.0):
    """Build the precoder of ``scheme`` from the channel estimate ``H_hat``.

    Every scheme beamforms the common stream with MRT, ``sum_i conj(h_hat_i)``.
    Private streams use ``H_hat^H`` (MF_JOINT, MRT_MF),
    ``H_hat^H (H_hat H_hat^H)^-1`` (MRT_ZF) or
    ``H_hat^H (H_hat H_hat^H + reg I)^-1`` (MRT_RZF).

    Raises
    ------
    SingularityError
        If the (regularized) Gram matrix has condition number above 1e12.
    """
    scheme = Scheme(scheme)
    H_hat = np.asarray(H_hat)
    if H_hat.ndim < 2:
        raise DomainError("H_hat must have shape (..., K, L)")
    if not np.all(np.isfinite(H_hat)):
        raise DomainError("H_hat must be finite")
    w_c = np.conj(H_hat).sum(axis=-2)
    if scheme.is_mf_family:
        W_p = _hermitian(H_hat)
    elif scheme is Scheme.MRT_ZF:
        W_p = _gram_inverse_precoder(scheme, H_hat, 0.0)
    else:
        if reg is None or reg < 0:
            raise DomainError("MRT_RZF needs a regularization reg >= 0")
        W_p = _gram_inverse_precoder(scheme, H_hat, float(reg))
    return Precoder(w_c, W_p, scheme)


def normalization_mf_analytic(stats, Pt):
    """Closed-form MF normalization ``Pt / (L sum_k beta_hat_k)``, for any rho."""
    if not Pt > 0:
        raise DomainError("Pt must be positive")
    return Pt / (stats.L * float(np.sum(stats.beta_hat)))


def precoder_power_moments(scheme, stats, n_trials, rng, reg=0.0, block=512):
    """Sample means of ``||w_c||^2`` and ``Tr{W_p^H W_p}`` over fresh estimates.

    These two numbers determine the empirical normalization for every rho,
    since the trace in the definition is linear in them.
    """
    n_trials = int(n_trials)
    sum_c = 0.0
    sum_p = 0.0
    done = 0
    while done < n_trials:
        n = min(block, n_trials - done)
        real = gen_realization(stats, rng, n)
        try:
            pc = build_precoder(scheme, real.H_hat, reg)
        except SingularityError as err:
            err.trial = done + (err.trial or 0)
            raise
        sum_c += math.fsum(np.sum(np.abs(pc.w_common) ** 2, axis=-1))
        sum_p += math.fsum(np.sum(np.abs(pc.W_private) ** 2, axis=(-2, -1)))
        done += n
    return sum_c / n_trials, sum_p / n_trials


def normalization_empirical(scheme, stats, rho, Pt, n_trials, rng, reg=0.0):
    """Monte Carlo estimate of ``Pt / E{rho ||w_c||^2 + (1-rho) Tr W_p^H W_p}``."""
    split = as_power_split(rho)
    if int(n_trials) < 1000:
        raise DomainError("empirical normalization needs n_trials >= 1000")
    ec, ep = precoder_power_moments(scheme, stats, n_trials, rng, reg)
    return Pt / (split.rho * ec + split.rho_bar * ep)


def transmit_signal_power(precoder, alpha, rho, x):
    """Instantaneous power ``||s||^2`` of the transmit vector.

    ``x`` holds the ``K + 1`` symbols ``[x_c, x_p1, ..., x_pK]`` along its
    last axis (batched like the precoder).
    """
    split = as_power_split(rho)
    x = np.asarray(x)
    s = math.sqrt(split.rho) * precoder.w_common * x[..., :1]
    s = s + math.sqrt(split.rho_bar) * np.einsum("...lk,...k->...l", precoder.W_private, x[..., 1:])
    return alpha * np.sum(np.abs(s) ** 2, axis=-1)
