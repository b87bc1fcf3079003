"""K-S goodness-of-fit modulation classification for QAM signals.

Library layout:

- ``constellation``: candidate QAM formats, Gray mapping, demodulation,
  exact fourth-order cumulants.
- ``channel``: AWGN and two-antenna SDMA channel simulation, seeded
  substream derivation.
- ``ks_core``: quadrature statistics, ECDF, K-S distance and significance.
- ``cdf_model``: reference CDFs and quantized lookup tables (build, read,
  serialize).
- ``classifiers``: K-S (exact / table) and cumulant classifiers.
- ``sdma_receiver``: MMSE extraction, interference cancellation, per-frame
  receiver simulation.
- ``experiments``: seeded Monte Carlo sweeps emitting CSV.
- ``cli``: the ``ksamc`` command.
"""

from .constellation import (
    Constellation,
    ModulationFormat,
    constellation_points,
    count_bit_errors,
    demodulate_min_distance,
    modulate,
    theoretical_c42,
)
from .channel import (
    NoiseParams,
    SdmaChannelSet,
    awgn_apply,
    derive_rng,
    draw_sdma_channels,
    sdma_transmit,
    sigma_sq_to_snr_db,
    snr_db_to_sigma_sq,
)
from .ks_core import (
    SampleSet,
    ecdf_eval,
    gaussian_q,
    ks_q,
    ks_significance,
    ks_statistic,
    quadrature_split,
)
from .cdf_model import (
    QuantizedCdfTable,
    TableError,
    TableFormatError,
    TableTruncatedError,
    TableValidationError,
    build_cdf_table,
    deserialize_table,
    load_table,
    save_table,
    serialize_table,
    table_lookup,
    theoretical_cdf_eval,
)
from .classifiers import (
    ClassificationResult,
    classify_cumulant,
    classify_ks_exact,
    classify_ks_table,
    sample_c42,
    soft_decision,
)
from .sdma_receiver import (
    MmseFilter,
    SdmaFrameConfig,
    SdmaReceiverReport,
    cancel_and_demod,
    classify_interferer,
    mmse_design,
    mmse_output,
    run_sdma_frame,
)
from .experiments import (
    CANDIDATES,
    ConfigError,
    ExperimentConfig,
    ResultRow,
    load_config,
    run_ber_sweep,
    run_pcc_vs_offset,
    run_pcc_vs_samples,
    run_pcc_vs_snr,
    write_csv,
)

__version__ = "0.1.0"
