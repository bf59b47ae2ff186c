"""Variational autoencoders with additive-noise-model priors over time."""

from ._core import (
    ConfigError,
    Gmm,
    IoError,
    Mechanism,
    Model,
    NumericalDomainError,
    ParseError,
    VersionError,
    build_prior,
    evaluate,
    generate_dataset,
    intervene,
    kl_mc,
    latent_mse,
    read_dataset,
    recon_accuracy,
    run_cli,
    train,
    write_dataset,
)

__all__ = [
    "ConfigError",
    "Gmm",
    "IoError",
    "Mechanism",
    "Model",
    "NumericalDomainError",
    "ParseError",
    "VersionError",
    "build_prior",
    "evaluate",
    "generate_dataset",
    "intervene",
    "kl_mc",
    "latent_mse",
    "read_dataset",
    "recon_accuracy",
    "run_cli",
    "train",
    "write_dataset",
]
