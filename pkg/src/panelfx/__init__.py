"""Panel-data estimators, specification tests and reporting for web-traffic bounce rates."""

from importlib.resources import files

from .errors import DataError, NumericalError, PanelError
from .estimators import (
    EntitySlope,
    FixedEffectsFit,
    RandomEffectsFit,
    entity_slopes,
    fixed_effects_within,
    lsdv,
    pooled_ols,
    random_effects_gls,
)
from .modelsel import Model, SpecTestResult, breusch_pagan, hausman, select_model
from .numstats import RegressionFit, chi_square_sf, ols, student_t_sf, t_critical
from .panel import (
    CategoryMap,
    Observation,
    PanelDataset,
    aggregate_by_category,
    balance_report,
    build_panel,
    group_means,
    within_transform,
)
from .report import ingest_csv, load_category_map, read_corpus, run_pipeline, run_report
from .simulate import SimConfig, generate_panel, monte_carlo

__version__ = "0.1.0"

__all__ = [
    "PanelError", "DataError", "NumericalError",
    "EntitySlope", "FixedEffectsFit", "RandomEffectsFit", "entity_slopes",
    "fixed_effects_within", "lsdv", "pooled_ols", "random_effects_gls",
    "Model", "SpecTestResult", "breusch_pagan", "hausman", "select_model",
    "RegressionFit", "chi_square_sf", "ols", "student_t_sf", "t_critical",
    "CategoryMap", "Observation", "PanelDataset", "aggregate_by_category",
    "balance_report", "build_panel", "group_means", "within_transform",
    "ingest_csv", "load_category_map", "read_corpus", "run_pipeline", "run_report",
    "SimConfig", "generate_panel", "monte_carlo", "sample_corpus_path",
]


def sample_corpus_path():
    """Path to the bundled synthetic 30-site corpus (seed 42, 2017-2020)."""
    return files(__package__) / "data" / "sample_corpus.csv"
