"""Bayesian spatio-temporal forecasting with logic-based verification.

Fits Bayesian models to gridded intensity data, draws posterior predictive
trajectories, monitors spatio-temporal logic properties on them, and turns
the results into satisfaction probabilities, expected robustness and
property-based model-comparison measures.
"""

from .assess import (binder_partition, expected_robustness,
                     robustness_rmse, satisfaction_accuracy,
                     satisfaction_f1, satisfaction_probability)
from .formula import (Always, And, AtomicCompare, AtomicLabel, Escape,
                      Eventually, Formula, Implies, Not, Or, Reach,
                      Somewhere, expand_derived, temporal_depth, to_text)
from .gibbs import (BNPConfig, GibbsSampler, Hyperparams, McmcConfig,
                    ModelConfig, PosteriorDraw, gibbs_run)
from .gmrf import laplacian, leroux_precision
from .harmonic import HarmonicDesign, periodogram, select_top_frequencies
from .monitor import (VerificationField, boolean_monitor, monitor_ensemble,
                      quantitative_monitor)
from .parser import parse, parse_script
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .predict import cumulative_log_bayes_factor, lpds, predictive_draws
from .properties import (PropertyParams, build_p1, build_p2, build_p3,
                         build_p4, build_property_set)
from .spatial import SpatialGrid, StaticLabels, Trace, hop_distance, \
    queen_adjacency

__version__ = "0.1.0"

__all__ = [
    "Always", "And", "AtomicCompare", "AtomicLabel", "Escape", "Eventually",
    "Formula", "Implies", "Not", "Or", "Reach", "Somewhere",
    "expand_derived", "temporal_depth", "to_text",
    "VerificationField", "boolean_monitor", "monitor_ensemble",
    "quantitative_monitor",
    "parse", "parse_script",
    "PropertyParams", "build_p1", "build_p2", "build_p3", "build_p4",
    "build_property_set",
    "SpatialGrid", "StaticLabels", "Trace", "hop_distance",
    "queen_adjacency",
    "HarmonicDesign", "periodogram", "select_top_frequencies",
    "laplacian", "leroux_precision",
    "BNPConfig", "GibbsSampler", "Hyperparams", "McmcConfig",
    "ModelConfig", "PosteriorDraw", "gibbs_run",
    "cumulative_log_bayes_factor", "lpds", "predictive_draws",
    "satisfaction_probability", "expected_robustness",
    "satisfaction_accuracy", "satisfaction_f1", "robustness_rmse",
    "binder_partition",
    "PipelineConfig", "PipelineResult", "run_pipeline",
    "__version__",
]
