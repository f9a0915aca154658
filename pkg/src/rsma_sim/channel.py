"""
Channel statistics and realizations.

Users see i.i.d. Rayleigh fading, ``h_k ~ CN(0, beta_k I_L)``. The transmitter
only knows the estimate ``h_hat_k = h_k + h_err_k`` with an independent error
``h_err_k ~ CN(0, beta_err_k I_L)``. Matrices are stored with one user per
row (``K x L``), optionally with leading batch dimensions for vectorized
Monte Carlo.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

__all__ = [
    "ChannelStats",
    "ChannelRealization",
    "symmetric_stats",
    "gen_realization",
    "estimation_error_variance",
    "pathloss_macrocell",
    "drop_users",
    "noise_power",
    "db_to_linear",
    "dbm_to_watts",
    "rng_stream",
    "MACRO_L0",
    "MACRO_ETA",
    "MACRO_R_IN",
    "MACRO_R_OUT",
]

MACRO_L0 = 10.0 ** -3.53
MACRO_ETA = 3.76
MACRO_R_IN = 35.0
MACRO_R_OUT = 500.0


@dataclass(frozen=True)
class ChannelStats:
    """Large-scale statistics of a K-user, L-antenna downlink.

    Parameters
    ----------
    beta : array_like
        Per-user large-scale gains ``beta_k > 0`` (linear).
    beta_err : array_like or float
        Per-user CSIT error variances ``>= 0``; a scalar is broadcast.
    L : int
        Number of transmit antennas.
    """

    beta: np.ndarray
    beta_err: np.ndarray
    L: int

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float)).copy()
        beta_err = np.broadcast_to(np.asarray(self.beta_err, dtype=float), beta.shape).copy()
        if beta.ndim != 1 or beta.size == 0:
            raise DomainError("beta must be a nonempty vector")
        if not np.all(np.isfinite(beta)) or np.any(beta <= 0):
            raise DomainError("all beta_k must be finite and > 0")
        if not np.all(np.isfinite(beta_err)) or np.any(beta_err < 0):
            raise DomainError("all beta_err_k must be finite and >= 0")
        if int(self.L) < 1:
            raise DomainError("L must be >= 1")
        beta.flags.writeable = False
        beta_err.flags.writeable = False
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "beta_err", beta_err)
        object.__setattr__(self, "L", int(self.L))

    @property
    def K(self):
        return self.beta.size

    @property
    def beta_hat(self):
        return self.beta + self.beta_err

    @property
    def theta(self):
        return self.L / self.K

    @property
    def beta_ave(self):
        return float(np.mean(self.beta))

    @property
    def beta_hat_ave(self):
        return float(np.mean(self.beta_hat))

    @property
    def delta(self):
        return self.beta_ave / self.beta_hat_ave

    @property
    def perfect_csit(self):
        return not np.any(self.beta_err)


def symmetric_stats(L, K, beta=1.0, beta_err=0.0):
    """Stats where every user has the same gain and error variance."""
    return ChannelStats(np.full(int(K), float(beta)), float(beta_err), L)


@dataclass(frozen=True)
class ChannelRealization:
    """True channel ``H``, CSIT error ``H_err`` and estimate ``H_hat = H + H_err``.

    Arrays have shape ``(..., K, L)``; row ``k`` is ``h_k^T``.
    """

    H: np.ndarray
    H_err: np.ndarray
    H_hat: np.ndarray


def _cn(rng, var, shape):
    # var broadcasts against the trailing (K, 1) axes
    scale = np.sqrt(np.asarray(var, dtype=float) / 2.0)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * scale


def gen_realization(stats, rng, n=None):
    """Draw one (or ``n`` batched) channel realizations.

    Entries of row ``k`` of ``H`` are CN(0, beta_k) and those of ``H_err``
    CN(0, beta_err_k), all independent. With perfect CSIT no error is drawn
    and ``H_hat`` is ``H`` itself.
    """
    K, L = stats.K, stats.L
    shape = (K, L) if n is None else (int(n), K, L)
    H = _cn(rng, stats.beta[:, None], shape)
    if stats.perfect_csit:
        H_err = np.zeros(shape, dtype=complex)
        H_hat = H
    else:
        H_err = _cn(rng, stats.beta_err[:, None], shape)
        H_hat = H + H_err
    return ChannelRealization(H, H_err, H_hat)


def estimation_error_variance(Pt, N):
    """CSIT error variance ``1 / (Pt N)`` for ``N`` training symbols."""
    if not Pt > 0:
        raise DomainError(f"Pt must be > 0, got {Pt!r}")
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N!r}")
    if math.isinf(Pt):
        return 0.0
    return 1.0 / (Pt * N)


def pathloss_macrocell(r):
    """Macro-cell large-scale gain ``10**-3.53 * r**-3.76`` for ``r >= 35`` m."""
    ra = np.asarray(r, dtype=float)
    if np.any(~(ra >= MACRO_R_IN)):
        raise DomainError(f"distance must be >= {MACRO_R_IN} m")
    out = MACRO_L0 * ra ** -MACRO_ETA
    return float(out) if out.ndim == 0 else out


def drop_users(K, r_in, r_out, rng):
    """Radii of ``K`` users placed uniformly over the annulus ``[r_in, r_out]``."""
    if not (0 < r_in < r_out):
        raise DomainError(f"need 0 < r_in < r_out, got r_in={r_in!r}, r_out={r_out!r}")
    u = rng.random(int(K))
    return np.sqrt(r_in ** 2 + u * (r_out ** 2 - r_in ** 2))


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def noise_power(density_dBm_per_Hz, bandwidth_Hz):
    """Thermal noise power in watts for a density in dBm/Hz over a bandwidth."""
    if not bandwidth_Hz > 0:
        raise DomainError("bandwidth must be positive")
    dbm = density_dBm_per_Hz + 10.0 * math.log10(bandwidth_Hz)
    return 10.0 ** ((dbm - 30.0) / 10.0)


def rng_stream(seed, *keys):
    """Independent generator for the stream identified by ``(seed, *keys)``.

    Streams depend only on the key tuple, never on execution order, which is
    what makes parallel runs reproducible.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(ss)
