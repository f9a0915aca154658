"""
Scenario presets, parameter sweeps and CSV/JSON reporting.

Two scenarios are supported. ``symmetric`` gives every user ``beta_k = 1``
and unit noise, with optional ``N``-symbol CSIT (``beta_err = 1/(Pt N)``).
``macrocell`` drops users uniformly over a 35-500 m annulus, uses the
``10**-3.53 r**-3.76`` pathloss and thermal noise over the user bandwidth,
and averages the per-drop ergodic sum rate over many drops.

All randomness is keyed on ``(seed, drop, ...)`` streams, never on the grid
point or the scheme, so every scheme and every point sees the same fading
(common random numbers) and a rerun reproduces the output byte for byte.
"""

import csv
import dataclasses
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics
from .channel import (
    ChannelStats,
    MACRO_R_IN,
    MACRO_R_OUT,
    drop_users,
    dbm_to_watts,
    estimation_error_variance,
    noise_power,
    pathloss_macrocell,
    rng_stream,
)
from .exceptions import ConfigurationError, SingularityError
from .precoding import Scheme
from .rsma import SystemConfig, simulate_rho_grid

__all__ = [
    "SweepSpec",
    "ResultRow",
    "PRESETS",
    "preset",
    "validate",
    "run_sweep",
    "rows_to_csv",
    "rows_to_json",
    "load_config",
    "spec_to_dict",
    "spec_from_dict",
    "CSV_COLUMNS",
]

SWEEPABLE = ("rho", "L", "Pt", "N")
SCENARIOS = ("symmetric", "macrocell")
RHO_GRID_11 = [round(0.1 * i, 10) for i in range(11)]

CSV_COLUMNS = [
    "scheme",
    "param_name",
    "param_value",
    "esr",
    "min_common_rate",
    "private_sum_rate",
    "mc_stderr",
    "n_trials",
    "n_drops",
    "skipped_singular",
]


@dataclass
class SweepSpec:
    """A one-parameter sweep over one or more schemes.

    ``theta`` pins ``K = L / theta`` when ``L`` is swept. For the macrocell
    scenario ``drops`` user placements are drawn and the noise power is
    derived from ``noise_density_dBm_per_Hz`` and ``bandwidth_Hz``
    (``fixed.sigma2`` is ignored).
    """

    swept_parameter: str
    grid: list
    fixed: SystemConfig
    schemes: list
    drops: int = 1
    trials_per_point: int = 2000
    scenario: str = "symmetric"
    theta: float | None = None
    beta: float = 1.0
    r_in: float = MACRO_R_IN
    r_out: float = MACRO_R_OUT
    noise_density_dBm_per_Hz: float = -174.0
    bandwidth_Hz: float = 20e6
    attach_analytic: bool = True
    name: str = "custom"

    def __post_init__(self):
        self.schemes = [Scheme(s) for s in self.schemes]
        self.grid = list(self.grid)


@dataclass
class ResultRow:
    scheme: str
    param_name: str
    param_value: float
    esr: float
    min_common_rate: float
    private_sum_rate: float
    mean_common_rate: float
    mc_stderr: float
    n_trials: int
    n_drops: int
    skipped_singular: int
    wall_time: float = 0.0
    analytic_min_common: float | None = None
    analytic_private_sum: float | None = None
    analytic_esr: float | None = None


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------
def _fig3(Pt=None, **kw):
    if Pt is None:
        raise ConfigurationError("the fig3 preset needs an explicit Pt (linear, sigma2 = 1)")
    fixed = SystemConfig(L=100, K=20, Pt=Pt, rho=0.5, sigma2=1.0, N=10)
    kw.setdefault("grid", [10, 20, 50, 100, 150, 200])
    kw.setdefault("schemes", [Scheme.MF_JOINT])
    return SweepSpec("L", fixed=fixed, theta=5.0, name="fig3", **kw)


def _fig4(Pt=10.0, N=10, **kw):
    fixed = SystemConfig(L=12, K=4, Pt=Pt, rho=0.5, sigma2=1.0, N=N)
    kw.setdefault("grid", RHO_GRID_11)
    kw.setdefault("schemes", [Scheme.MF_JOINT])
    return SweepSpec("rho", fixed=fixed, name="fig4", **kw)


def _macro(L, K, name, Pt=None, **kw):
    Pt = float(dbm_to_watts(40.0)) if Pt is None else Pt
    kw.setdefault("drops", 1000)
    kw.setdefault("grid", RHO_GRID_11)
    kw.setdefault("schemes", [Scheme.MF_JOINT, Scheme.MRT_ZF, Scheme.MRT_RZF])
    fixed = SystemConfig(L=L, K=K, Pt=Pt, rho=0.5, sigma2=noise_power(-174.0, 20e6), N=None)
    return SweepSpec("rho", fixed=fixed, scenario="macrocell", name=name, **kw)


PRESETS = {
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": lambda **kw: _macro(8, 8, "fig5", **kw),
    "fig6": lambda **kw: _macro(16, 8, "fig6", **kw),
}


def preset(name, **overrides):
    """Sweep of one of the built-in scenarios.

    ``fig3``: ESR against ``L`` at ``theta = 5``, ``rho = 0.5``, ``N = 10``;
    ``Pt`` must be supplied. ``fig4``: ESR against ``rho`` at ``L = 12``,
    ``K = 4``, ``Pt = 10`` (10 dB), one curve per ``N`` (default 10).
    ``fig5``/``fig6``: macrocell ESR against ``rho`` at ``L = K = 8`` and
    ``L = 16, K = 8``, 40 dBm, perfect CSIT, MF_JOINT vs MRT_ZF vs MRT_RZF.

    Keyword overrides go to the preset (``Pt``, ``N``) or to
    :class:`SweepSpec` (``drops``, ``trials_per_point``, ``grid``...).
    """
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None
    return factory(**overrides)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------
def validate(spec):
    """Raise :class:`ConfigurationError` for an invalid or unsupported sweep."""
    if spec.swept_parameter not in SWEEPABLE:
        raise ConfigurationError(f"cannot sweep {spec.swept_parameter!r}; choose from {SWEEPABLE}")
    if spec.scenario not in SCENARIOS:
        raise ConfigurationError(f"unknown scenario {spec.scenario!r}")
    if not spec.grid:
        raise ConfigurationError("grid is empty")
    if list(spec.grid) != sorted(spec.grid):
        raise ConfigurationError("grid must be sorted")
    if not spec.schemes:
        raise ConfigurationError("no schemes selected")
    if spec.swept_parameter == "rho" and not all(0.0 <= r <= 1.0 for r in spec.grid):
        raise ConfigurationError("rho grid must lie in [0, 1]")
    if not 0.0 <= spec.fixed.rho <= 1.0:
        raise ConfigurationError("rho must lie in [0, 1]")
    imperfect = spec.fixed.N is not None or spec.swept_parameter == "N"
    if imperfect:
        bad = [s.value for s in spec.schemes if not s.is_mf_family]
        if bad:
            raise ConfigurationError(
                f"imperfect CSIT is only modelled for the MF family; unsupported: {bad}"
            )
    if spec.scenario == "macrocell" and not (0 < spec.r_in < spec.r_out):
        raise ConfigurationError("macrocell radii need 0 < r_in < r_out")
    if spec.swept_parameter == "L" and spec.theta is not None:
        for L in spec.grid:
            K = L / spec.theta
            if abs(K - round(K)) > 1e-9 or round(K) < 1:
                raise ConfigurationError(f"L={L} does not give an integral K at theta={spec.theta}")
    if spec.drops < 1 or spec.trials_per_point < 1:
        raise ConfigurationError("drops and trials_per_point must be >= 1")
    if spec.scenario == "symmetric" and spec.drops != 1:
        raise ConfigurationError("the symmetric scenario has a single (deterministic) drop")


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------
def _point_config(spec, value):
    cfg = dataclasses.replace(spec.fixed)
    p = spec.swept_parameter
    if p == "rho":
        cfg.rho = float(value)
    elif p == "L":
        cfg.L = int(value)
        if spec.theta is not None:
            cfg.K = int(round(value / spec.theta))
    elif p == "Pt":
        cfg.Pt = float(value)
    elif p == "N":
        cfg.N = int(value)
    return cfg


def _sigma2(spec, cfg):
    if spec.scenario == "macrocell":
        return noise_power(spec.noise_density_dBm_per_Hz, spec.bandwidth_Hz)
    return cfg.sigma2


def _drop_stats(spec, cfg, seed, d):
    beta_err = 0.0 if cfg.N is None else estimation_error_variance(cfg.Pt, cfg.N)
    if spec.scenario == "symmetric":
        beta = np.full(cfg.K, float(spec.beta))
    else:
        radii = drop_users(cfg.K, spec.r_in, spec.r_out, rng_stream(seed, d, 2))
        beta = pathloss_macrocell(radii)
    return ChannelStats(beta, beta_err, cfg.L)


def _analytic(stats, sigma2, Pt, rho):
    params = [asymptotics.AsymptoticParams.from_stats(stats, k, sigma2, Pt, rho)
              for k in range(stats.K)]
    if np.all(stats.beta == stats.beta[0]):
        # exchangeable users: one quadrature serves all
        common = asymptotics.ergodic_common_rate(params[0])
    else:
        common = min(asymptotics.ergodic_common_rate(p) for p in params)
    private = math.fsum(asymptotics.ergodic_private_rate(p) for p in params)
    return common, private


def _evaluate(spec, cfg_list, scheme, seed, threads):
    """Rows for one scheme over configs that differ only in rho (or a single config)."""
    base = cfg_list[0]
    rhos = [c.rho for c in cfg_list]
    per_point = [[] for _ in cfg_list]
    skipped = 0
    t0 = time.perf_counter()
    stats = None
    for d in range(spec.drops):
        stats = _drop_stats(spec, base, seed, d)
        sigma2 = _sigma2(spec, base)
        try:
            reports = simulate_rho_grid(
                scheme, stats, rhos, base.Pt, sigma2, spec.trials_per_point, seed,
                drop=d, reg=base.reg, norm_trials=base.norm_trials, threads=threads,
            )
        except SingularityError:
            skipped += 1
            continue
        for i, rep in enumerate(reports):
            per_point[i].append(rep)
    elapsed = time.perf_counter() - t0

    rows = []
    for i, cfg in enumerate(cfg_list):
        reps = per_point[i]
        n_used = len(reps)
        if n_used == 0:
            nan = float("nan")
            mc = ps = mean_c = se = nan
        else:
            mc = math.fsum(r.min_common for r in reps) / n_used
            ps = math.fsum(float(np.sum(r.rate_private)) for r in reps) / n_used
            mean_c = math.fsum(float(np.mean(r.rate_common)) for r in reps) / n_used
            if n_used > 1:
                esrs = np.array([r.min_common + float(np.sum(r.rate_private)) for r in reps])
                se = float(np.std(esrs, ddof=1) / math.sqrt(n_used))
            else:
                se = reps[0].sum_stderr
        row = ResultRow(
            scheme=scheme.value,
            param_name=spec.swept_parameter,
            param_value=_param_value(spec, cfg),
            esr=mc + ps,
            min_common_rate=mc,
            private_sum_rate=ps,
            mean_common_rate=mean_c,
            mc_stderr=se,
            n_trials=spec.trials_per_point,
            n_drops=n_used,
            skipped_singular=skipped,
            wall_time=elapsed / len(cfg_list),
        )
        if spec.attach_analytic and spec.scenario == "symmetric" and scheme.is_mf_family:
            common, private = _analytic(stats, _sigma2(spec, cfg), cfg.Pt, cfg.rho)
            row.analytic_min_common = common
            row.analytic_private_sum = private
            row.analytic_esr = common + private
        rows.append(row)
    return rows


def _param_value(spec, cfg):
    return getattr(cfg, spec.swept_parameter)


def run_sweep(spec, seed=None, threads=None):
    """Simulate every grid point for every scheme of ``spec``.

    A rho sweep draws its channels once per drop and evaluates all splits on
    them. A drop where a ZF Gram matrix is singular is skipped and counted in
    ``skipped_singular``. Rows come out grouped by scheme, in grid order.
    """
    validate(spec)
    seed = spec.fixed.seed if seed is None else int(seed)
    configs = [_point_config(spec, v) for v in spec.grid]
    rows = []
    for scheme in spec.schemes:
        if spec.swept_parameter == "rho":
            rows.extend(_evaluate(spec, configs, scheme, seed, threads))
        else:
            for cfg in configs:
                rows.extend(_evaluate(spec, [cfg], scheme, seed, threads))
    return rows


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------
def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def rows_to_csv(rows):
    """CSV text with a header row; floats carry 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, Scheme):
        return v.value
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def spec_to_dict(spec):
    d = {f.name: getattr(spec, f.name) for f in dataclasses.fields(spec) if f.name != "fixed"}
    d["schemes"] = [s.value for s in spec.schemes]
    d["fixed"] = {f.name: _jsonable(getattr(spec.fixed, f.name))
                  for f in dataclasses.fields(spec.fixed)}
    return {k: _jsonable(v) for k, v in d.items()}


def spec_from_dict(d):
    d = dict(d)
    if "preset" in d:
        name = d.pop("preset")
        fixed_over = d.pop("fixed", {}) or {}
        spec = preset(name, **{k: v for k, v in fixed_over.items() if k in ("Pt", "N")})
        for k, v in d.items():
            setattr(spec, k, v)
        spec.__post_init__()
        return spec
    fixed = SystemConfig(**d.pop("fixed"))
    unknown = set(d) - {f.name for f in dataclasses.fields(SweepSpec)}
    if unknown:
        raise ConfigurationError(f"unknown sweep fields: {sorted(unknown)}")
    return SweepSpec(fixed=fixed, **d)


def load_config(path):
    """Read a sweep from a JSON file mirroring the SweepSpec/SystemConfig fields."""
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


def rows_to_json(rows, spec, seed):
    doc = {
        "config": spec_to_dict(spec),
        "seed": seed,
        "rows": [{k: _jsonable(v) for k, v in dataclasses.asdict(r).items()} for r in rows],
    }
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# Verification battery
# ---------------------------------------------------------------------------
@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def verification_battery(seed=0, quick=False):
    """Convergence, concentration and MGF checks of the large-system theory.

    Sizes match the acceptance settings unless ``quick`` is set, which
    shrinks sample counts for a smoke run (thresholds unchanged).
    """
    Ls = [40, 100, 200, 400]
    n_ks = 1000 if quick else 5000
    n_conc = 500 if quick else 2000
    n_mgf = 10 ** 5 if quick else 10 ** 6
    checks = []

    ks = asymptotics.convergence_in_distribution_test(Ls, 5.0, n_ks, seed=seed)
    dists = ", ".join(f"{d:.4f}" for d in ks.distances)
    checks.append(Check("common-rate KS distance strictly decreasing in L",
                        ks.strictly_decreasing, f"L={Ls}: {dists}"))
    checks.append(Check("common-rate KS distance < 0.05 at L=400",
                        ks.distances[-1] < 0.05, f"{ks.distances[-1]:.4f}"))

    conc = asymptotics.private_rate_concentration_test(Ls, 5.0, n_conc, seed=seed)
    stds = ", ".join(f"{s:.4f}" for s in conc.std)
    checks.append(Check("private-rate std strictly decreasing in L",
                        conc.strictly_decreasing, f"L={Ls}: {stds}"))
    rel = abs(conc.mean[-1] - conc.limit) / conc.limit
    checks.append(Check("private-rate mean within 2% of its limit at L=400",
                        rel < 0.02, f"mean {conc.mean[-1]:.4f} vs {conc.limit:.4f} ({rel:.2%})"))

    stats = ChannelStats(np.ones(100), 0.0, 500)
    mgf = asymptotics.shifted_gain_mgf_test(stats, 0, n_mgf, [0.1, 0.25], seed=seed)
    for t, emp, lim, disc in zip(mgf.t, mgf.empirical, mgf.limit, mgf.discrepancy):
        checks.append(Check(f"shifted-gain MGF within 2% of chi2 limit at t={t:g}",
                            bool(disc < 0.02),
                            f"empirical {emp:.4f} vs limit {lim:.4f} ({disc:.2%})"))
    return checks
