"""
SINRs, instantaneous rates and Monte Carlo ergodic rates for 1-layer RSMA.

Every SINR model used here has the shape

    SINR_c,k = a rho  S_k / (sigma_k^2 + a (1-rho) T_k)
    SINR_p,k = a (1-rho) D_k / (sigma_k^2 + a (1-rho) O_k)

where ``S`` is the common-stream gain, ``T`` the total private-stream power
seen by user k, ``D`` its own private-stream gain and ``O = T - D`` the
inter-user interference. :class:`LinkGains` holds these four terms, so a
channel block is processed once and can then be evaluated for any power
split or normalization.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import gen_realization, rng_stream
from .exceptions import ConfigurationError, DomainError
from .precoding import (
    Scheme,
    as_power_split,
    build_precoder,
    normalization_mf_analytic,
    precoder_power_moments,
    rzf_regularization,
)

__all__ = [
    "SystemConfig",
    "LinkGains",
    "StreamSinrs",
    "RateReport",
    "ErgodicRates",
    "link_gains_perfect",
    "link_gains_mf_imperfect",
    "sinr_perfect",
    "sinr_mf_imperfect",
    "instant_rates",
    "ergodic_rates_mc",
    "simulate_rho_grid",
    "resolve_threads",
    "TRIAL_BLOCK",
]

# Trials are generated in fixed blocks, each with its own RNG stream, so the
# result does not depend on how blocks are scheduled over threads.
TRIAL_BLOCK = 64


@dataclass
class SystemConfig:
    """Parameters of one simulated operating point.

    ``sigma2`` may be a scalar or a per-user vector. ``N`` is the number of
    training symbols; ``None`` means perfect CSIT. ``reg`` is the RZF loading,
    defaulting to ``K sigma2 / Pt``.
    """

    L: int
    K: int
    Pt: float
    rho: float = 0.5
    sigma2: float = 1.0
    scheme: Scheme = Scheme.MF_JOINT
    seed: int = 0
    n_trials: int = 2000
    N: int | None = None
    reg: float | None = None
    norm_trials: int = 1000

    def __post_init__(self):
        self.scheme = Scheme(self.scheme)
        as_power_split(self.rho)
        if self.L < 1 or self.K < 1:
            raise ConfigurationError("L and K must be positive")
        if not self.Pt > 0:
            raise ConfigurationError("Pt must be positive")
        if self.N is not None and not self.scheme.is_mf_family:
            raise ConfigurationError(
                f"imperfect CSIT is only modelled for the MF family, not {self.scheme}"
            )

    def regularization(self):
        if self.reg is not None:
            return self.reg
        return rzf_regularization(self.K, self.sigma2, self.Pt)


@dataclass(frozen=True)
class LinkGains:
    """Per-user interference terms (shape ``(..., K)``) of one SINR model."""

    common: np.ndarray
    total: np.ndarray
    own: np.ndarray
    other: np.ndarray

    def sinrs(self, alpha, rho, sigma2):
        split = as_power_split(rho)
        sigma2 = np.asarray(sigma2, dtype=float)
        if np.any(~(sigma2 > 0)):
            raise DomainError("noise powers must be positive")
        a_c = alpha * split.rho
        a_p = alpha * split.rho_bar
        sc = a_c * self.common / (sigma2 + a_p * self.total)
        sp = a_p * self.own / (sigma2 + a_p * self.other)
        return StreamSinrs(sc, sp)


@dataclass(frozen=True)
class StreamSinrs:
    sinr_common: np.ndarray
    sinr_private: np.ndarray


@dataclass(frozen=True)
class RateReport:
    """Rates in bits/s/Hz. ``sum`` is ``min_common + sum(rate_private)``."""

    rate_common: np.ndarray
    rate_private: np.ndarray
    min_common: float
    sum: float


@dataclass(frozen=True)
class ErgodicRates(RateReport):
    """Monte Carlo ergodic rates, with the min over users taken after averaging.

    ``mean_instant_sum`` is the trial average of the instantaneous sum rate
    (min taken inside each realization) for comparison.
    """

    stderr_common: np.ndarray = field(default=None)
    stderr_private: np.ndarray = field(default=None)
    sum_stderr: float = 0.0
    mean_instant_min_common: float = 0.0
    mean_instant_sum: float = 0.0
    n_trials: int = 0
    alpha: float = float("nan")


def _check_dims(H, K=None):
    if H.ndim < 2:
        raise DomainError("channel must have shape (..., K, L)")
    if K is not None and H.shape[-2] != K:
        raise DomainError(f"channel has {H.shape[-2]} users, expected {K}")


def _offdiag_rowsum(P2):
    K = P2.shape[-1]
    return np.where(np.eye(K, dtype=bool), 0.0, P2).sum(axis=-1)


def link_gains_perfect(H, precoder):
    """Interference terms of the generic linear-precoder SINRs.

    ``H`` is the true channel the users see; the precoder may have been built
    from an estimate (naive plug-in evaluation).
    """
    H = np.asarray(H)
    _check_dims(H)
    if precoder.W_private.shape[-2:] != (H.shape[-1], H.shape[-2]):
        raise DomainError(
            f"precoder shape {precoder.W_private.shape[-2:]} does not match channel {H.shape[-2:]}"
        )
    c = np.einsum("...kl,...l->...k", H, precoder.w_common)
    P2 = np.abs(H @ precoder.W_private) ** 2
    own = np.diagonal(P2, axis1=-2, axis2=-1).copy()
    return LinkGains(np.abs(c) ** 2, P2.sum(axis=-1), own, _offdiag_rowsum(P2))


def link_gains_mf_imperfect(H, beta_err, users=None):
    """Interference terms of MF-precoded RSMA under imperfect CSIT.

    Only the true channel and the error *variances* enter; the receivers know
    their own channel, so the CSIT error shows up through its second moment.
    ``users`` restricts the computation to a subset of rows.
    """
    H = np.asarray(H)
    _check_dims(H)
    beta_err = np.asarray(beta_err, dtype=float)
    if beta_err.shape != (H.shape[-2],):
        raise DomainError("beta_err must have one entry per user")
    K = H.shape[-2]
    users = np.arange(K) if users is None else np.atleast_1d(users)
    # G[j, i] = h_{users[j]}^T conj(h_i)
    G = H[..., users, :] @ np.conj(np.swapaxes(H, -1, -2))
    is_own = np.arange(K)[None, :] == users[:, None]
    norms = np.real(G[..., np.arange(users.size), users])
    err_own = beta_err[users]
    err_total = math.fsum(beta_err)
    P2 = np.abs(G) ** 2
    common = np.abs(G.sum(axis=-1)) ** 2 + err_total * norms
    total = P2.sum(axis=-1) + err_total * norms
    own = norms ** 2 + err_own * norms
    other = np.where(is_own, 0.0, P2).sum(axis=-1) + (err_total - err_own) * norms
    return LinkGains(common, total, own, other)


def sinr_perfect(realization, precoder, alpha, rho, sigma2, plug_in=False):
    """Common and private SINRs of every user for a generic linear precoder.

    The realization must have perfect CSIT unless ``plug_in=True``, in which
    case the precoder (built from ``H_hat``) is evaluated on the true ``H``.
    """
    if not plug_in and np.any(realization.H_err):
        raise DomainError(
            "realization has CSIT error; use sinr_mf_imperfect or pass plug_in=True"
        )
    return link_gains_perfect(realization.H, precoder).sinrs(alpha, rho, sigma2)


def sinr_mf_imperfect(realization, stats, alpha, rho, sigma2):
    """SINRs of MF-precoded RSMA with CSIT error variances ``stats.beta_err``."""
    _check_dims(realization.H, stats.K)
    return link_gains_mf_imperfect(realization.H, stats.beta_err).sinrs(alpha, rho, sigma2)


def instant_rates(sinrs):
    """Rates of one realization; the common rate is limited by the worst user."""
    rc = np.log2(1.0 + np.asarray(sinrs.sinr_common, dtype=float))
    rp = np.log2(1.0 + np.asarray(sinrs.sinr_private, dtype=float))
    min_c = rc.min(axis=-1)
    total = min_c + rp.sum(axis=-1)
    if np.ndim(min_c) == 0:
        min_c, total = float(min_c), float(total)
    return RateReport(rc, rp, min_c, total)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------
def resolve_threads(threads=None):
    if threads is None:
        threads = int(os.environ.get("RSMA_SIM_THREADS", "1"))
    return max(1, int(threads))


def _block_gains(scheme, stats, rng, n, reg):
    real = gen_realization(stats, rng, n)
    if stats.perfect_csit:
        return link_gains_perfect(real.H, build_precoder(scheme, real.H_hat, reg))
    if not scheme.is_mf_family:
        raise ConfigurationError(f"imperfect CSIT is not modelled for {scheme}")
    return link_gains_mf_imperfect(real.H, stats.beta_err)


def _fsum_blocks(blocks, key):
    """Sum per-block partial sums with fsum, elementwise, in block order."""
    stacked = np.stack([b[key] for b in blocks])
    flat = stacked.reshape(stacked.shape[0], -1)
    out = np.array([math.fsum(flat[:, j]) for j in range(flat.shape[1])])
    return out.reshape(stacked.shape[1:])


def simulate_rho_grid(scheme, stats, rhos, Pt, sigma2, n_trials, seed, drop=0,
                      reg=None, norm_trials=1000, threads=None, alpha=None):
    """Ergodic rates of ``scheme`` for every power split in ``rhos``.

    Channel blocks are drawn once and reused for all splits. Block ``j`` of
    drop ``d`` uses the stream ``(seed, d, 0, j)``; the empirical
    normalization pre-pass (non-MF schemes) uses ``(seed, d, 1)``. Pass
    ``alpha`` to override the normalization for every split.

    Returns a list of :class:`ErgodicRates`, one per entry of ``rhos``.
    """
    scheme = Scheme(scheme)
    splits = [as_power_split(r) for r in rhos]
    n_trials = int(n_trials)
    if n_trials < 1:
        raise DomainError("n_trials must be >= 1")
    if not stats.perfect_csit and not scheme.is_mf_family:
        raise ConfigurationError(f"imperfect CSIT is not modelled for {scheme}")
    K = stats.K
    sigma2 = np.broadcast_to(np.asarray(sigma2, dtype=float), (K,))
    if reg is None:
        reg = rzf_regularization(K, sigma2, Pt)

    if alpha is not None:
        alphas = [float(alpha)] * len(splits)
    elif scheme.is_mf_family:
        alphas = [normalization_mf_analytic(stats, Pt)] * len(splits)
    else:
        ec, ep = precoder_power_moments(
            scheme, stats, norm_trials, rng_stream(seed, drop, 1), reg
        )
        alphas = [Pt / (s.rho * ec + s.rho_bar * ep) for s in splits]

    n_blocks = -(-n_trials // TRIAL_BLOCK)

    def run_block(j):
        n = min(TRIAL_BLOCK, n_trials - j * TRIAL_BLOCK)
        gains = _block_gains(scheme, stats, rng_stream(seed, drop, 0, j), n, reg)
        out = {k: [] for k in ("c", "c2", "p", "p2", "ps", "ps2", "mc", "is", "is2")}
        for s, a in zip(splits, alphas):
            rep = instant_rates(gains.sinrs(a, s, sigma2))
            psum = rep.rate_private.sum(axis=-1)
            inst = rep.min_common + psum
            out["c"].append(rep.rate_common.sum(axis=0))
            out["c2"].append((rep.rate_common ** 2).sum(axis=0))
            out["p"].append(rep.rate_private.sum(axis=0))
            out["p2"].append((rep.rate_private ** 2).sum(axis=0))
            out["ps"].append(psum.sum())
            out["ps2"].append((psum ** 2).sum())
            out["mc"].append(np.sum(rep.min_common))
            out["is"].append(inst.sum())
            out["is2"].append((inst ** 2).sum())
        return {k: np.asarray(v) for k, v in out.items()}

    threads = resolve_threads(threads)
    if threads > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(run_block, range(n_blocks)))
    else:
        blocks = [run_block(j) for j in range(n_blocks)]

    n = float(n_trials)
    sums = {k: _fsum_blocks(blocks, k) for k in blocks[0]}

    def stderr(s, s2):
        if n_trials < 2:
            return np.zeros_like(s)
        var = np.maximum(s2 / n - (s / n) ** 2, 0.0) * n / (n - 1.0)
        return np.sqrt(var / n)

    reports = []
    for i, a in enumerate(alphas):
        rc = sums["c"][i] / n
        rp = sums["p"][i] / n
        se_c = stderr(sums["c"][i], sums["c2"][i])
        se_p = stderr(sums["p"][i], sums["p2"][i])
        kmin = int(np.argmin(rc))
        min_c = float(rc[kmin])
        psum = float(sums["ps"][i] / n)
        se_ps = float(stderr(sums["ps"][i], sums["ps2"][i]))
        reports.append(
            ErgodicRates(
                rate_common=rc,
                rate_private=rp,
                min_common=min_c,
                sum=min_c + psum,
                stderr_common=se_c,
                stderr_private=se_p,
                sum_stderr=math.hypot(float(se_c[kmin]), se_ps),
                mean_instant_min_common=float(sums["mc"][i] / n),
                mean_instant_sum=float(sums["is"][i] / n),
                n_trials=n_trials,
                alpha=a,
            )
        )
    return reports


def ergodic_rates_mc(config, stats, n_trials=None, drop=0, threads=None, alpha=None):
    """Ergodic per-user rates and ESR of ``config`` over independent fadings.

    The ESR takes the minimum over users of the *ergodic* common rates, then
    adds the ergodic private rates.
    """
    if stats.L != config.L or stats.K != config.K:
        raise DomainError("stats do not match the configured L, K")
    n = config.n_trials if n_trials is None else n_trials
    (rep,) = simulate_rho_grid(
        config.scheme,
        stats,
        [config.rho],
        config.Pt,
        config.sigma2,
        n,
        config.seed,
        drop=drop,
        reg=config.regularization(),
        norm_trials=config.norm_trials,
        threads=threads,
        alpha=alpha,
    )
    return rep
