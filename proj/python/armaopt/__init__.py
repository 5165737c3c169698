"""Exact-likelihood ARMA estimation with boundary-safe parametrizations."""

from ._core import (
    AllZeroDifferences,
    DegenerateDenominator,
    NonCausalError,
    NonInvertibleError,
    arma_to_pacf,
    fit_arma,
    forecast,
    friedman,
    hannan_rissanen,
    jones_inverse,
    jones_map,
    kalman_loglik,
    mase,
    nemenyi,
    pacf_to_arma,
    scaled_error,
    simulate_arma,
    wilcoxon_signed_rank,
)

__all__ = [
    "AllZeroDifferences",
    "DegenerateDenominator",
    "NonCausalError",
    "NonInvertibleError",
    "arma_to_pacf",
    "fit_arma",
    "forecast",
    "friedman",
    "hannan_rissanen",
    "jones_inverse",
    "jones_map",
    "kalman_loglik",
    "mase",
    "nemenyi",
    "pacf_to_arma",
    "scaled_error",
    "simulate_arma",
    "wilcoxon_signed_rank",
]
