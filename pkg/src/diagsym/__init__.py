"""Symmetry-family models for square ordinal contingency tables."""

from importlib import resources

from .divergence import (
    KL,
    PEARSON,
    REVERSE_KL,
    DivergenceFamily,
    DivergenceParameters,
    band_contrasts,
    dps_parameter,
    dps_parameters,
    f_divergence,
    g_inverse,
    g_transform,
    power,
)
from .errors import *  # noqa: F403
from .fit import (
    FittedModel,
    ModelId,
    degrees_of_freedom,
    fit,
    fit_cs,
    fit_dgs,
    fit_dps,
    fit_gs,
    fit_s,
)
from .inference import (
    DesignMatrices,
    PartitionReport,
    StatKind,
    TestResult,
    build_design_matrices,
    chi_square_sf,
    g2,
    partition,
    wald,
)
from .report import AnalysisConfig, AnalysisResult, parse_csv, render, run_analysis
from .table import (
    BandSums,
    ProbTable,
    SquareTable,
    band_sums,
    conditional_symmetric,
    new_table,
    pair_sums,
    to_probabilities,
)

__version__ = "0.1.0"


def example_path(name: str = "stemcell") -> str:
    """Filesystem path of a bundled example CSV."""
    return str(resources.files(__name__).joinpath("data", f"{name}.csv"))


def load_example(name: str = "stemcell") -> SquareTable:
    with resources.files(__name__).joinpath("data", f"{name}.csv").open(encoding="utf-8") as fh:
        return parse_csv(fh)
