"""Monte Carlo and large-system rate engine for matched-filter precoded RSMA."""

from .exceptions import ConfigurationError, DomainError, QuadratureError, SingularityError
from .specfun import (
    NoncentralChi2,
    bessel_i0_scaled,
    integrate_semi_infinite,
    ncx2_cdf,
    ncx2_mgf,
    ncx2_pdf,
    ncx2_sample,
)
from .channel import (
    ChannelRealization,
    ChannelStats,
    drop_users,
    estimation_error_variance,
    gen_realization,
    noise_power,
    pathloss_macrocell,
    symmetric_stats,
)
from .precoding import (
    PowerSplit,
    Precoder,
    Scheme,
    build_precoder,
    normalization_empirical,
    normalization_mf_analytic,
    transmit_signal_power,
)
from .rsma import (
    RateReport,
    StreamSinrs,
    SystemConfig,
    ergodic_rates_mc,
    instant_rates,
    sinr_mf_imperfect,
    sinr_perfect,
)
from .asymptotics import (
    AsymptoticParams,
    common_rate_limit_draw,
    ergodic_common_rate,
    ergodic_private_rate,
    esr_asymptotic,
    symmetric_system,
)
from .harness import SweepSpec, ResultRow, preset, rows_to_csv, rows_to_json, run_sweep

__version__ = "0.1.0"
