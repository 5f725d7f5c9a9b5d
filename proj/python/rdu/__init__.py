"""Discrete speech unit denoising: feature extraction, quantisation, denoiser
training and evaluation. The heavy lifting lives in the _rdu extension."""

from ._rdu import (
    SAMPLE_RATE,
    ConfigError,
    Error,
    IoError,
    NumericalError,
    Pipeline,
    PseudoEncoder,
    ShapeError,
    StaleInputError,
    assign,
    binomial_std,
    convolve_rir,
    ctc_nll,
    deduplicate,
    dump_features,
    edit_distance,
    load_features,
    measure_snr,
    mix_at_snr,
    parse_config,
    read_manifest,
    read_units,
    read_wav,
    stage_names,
    train_kmeans,
    uer,
    write_wav,
)

__all__ = [name for name in dir() if not name.startswith("_")]
