"""Manifold models, Fermi charts, curvature data and expansion checks."""

from .curvature import CurvatureData, curvature_data
from .expansion import ExpansionFitReport, random_curvature_tensor, tec_lemma_check, verify_metric_expansion
from .fermi import ChartError, CurveFermiMetric, FermiChart, fermi_chart, geodesic
from .models import (
    AnalyticMetricPatch,
    ConfigError,
    EuclideanEpigraph,
    ManifoldModel,
    half_space,
    load_model,
    model_from_config,
    sphere_cap,
)

__all__ = [
    "AnalyticMetricPatch",
    "ChartError",
    "ConfigError",
    "CurvatureData",
    "CurveFermiMetric",
    "EuclideanEpigraph",
    "ExpansionFitReport",
    "FermiChart",
    "ManifoldModel",
    "curvature_data",
    "fermi_chart",
    "geodesic",
    "half_space",
    "load_model",
    "model_from_config",
    "random_curvature_tensor",
    "sphere_cap",
    "tec_lemma_check",
    "verify_metric_expansion",
]
