"""Latent dynamic process monitoring with T2, SPE and DI control charts."""

from ._ppfa import (
    ControlLimits,
    GaConfig,
    Model,
    ModelParams,
    PpfaError,
    StreamMonitor,
    WhiteningTransform,
    far,
    fdr,
    fit_whitening,
    kde_limit,
    load_model,
    random_stable_model,
    save_model,
    score,
    select,
    simulate,
    train,
)

__all__ = [
    "ControlLimits",
    "GaConfig",
    "Model",
    "ModelParams",
    "PpfaError",
    "StreamMonitor",
    "WhiteningTransform",
    "far",
    "fdr",
    "fit_whitening",
    "kde_limit",
    "load_model",
    "random_stable_model",
    "save_model",
    "score",
    "select",
    "simulate",
    "train",
]
