"""Distributional counterfactual explanations.

Sliced-Wasserstein distances, DKW quantile confidence limits, and the
block-coordinate counterfactual optimizer, backed by the C++ core.
"""

from discount._core import (
    DiscountError,
    DiscountResult,
    IterationRecord,
    Model,
    band_beta,
    coverage,
    discount_run,
    diversity,
    dpc,
    eta_balance,
    external_model,
    load_model,
    lp_ot_oracle,
    make_synthetic_blobs,
    mmd_sq,
    monotone_plan,
    percentile_diffs,
    sample_projections,
    sliced_wasserstein_sq,
    train_model,
    ucl_sw2,
    ucl_w2,
    wasserstein1d_sq,
)

__all__ = [
    "DiscountError",
    "DiscountResult",
    "IterationRecord",
    "Model",
    "band_beta",
    "coverage",
    "discount_run",
    "diversity",
    "dpc",
    "eta_balance",
    "external_model",
    "load_model",
    "lp_ot_oracle",
    "make_synthetic_blobs",
    "mmd_sq",
    "monotone_plan",
    "percentile_diffs",
    "sample_projections",
    "sliced_wasserstein_sq",
    "train_model",
    "ucl_sw2",
    "ucl_w2",
    "wasserstein1d_sq",
]

__version__ = "0.1.0"
