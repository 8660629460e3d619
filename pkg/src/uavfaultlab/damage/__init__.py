"""Windowed feature extraction, rule-based fault localization, reporting."""

from .features import (OBSERVER_COLUMNS, FeatureVector, extract_features,
                       feature_names)
from .rules import (Aggregate, DamageReport, Rule, RuleBase, RuleThresholds,
                    classify, estimate_onset, glide_distance_estimate)
from .report import (confusion_matrix, emit_report, location_accuracy,
                     plot_run)

__all__ = [
    "Aggregate", "DamageReport", "FeatureVector", "OBSERVER_COLUMNS", "Rule",
    "RuleBase", "RuleThresholds", "classify", "confusion_matrix",
    "emit_report", "estimate_onset", "extract_features", "feature_names",
    "glide_distance_estimate", "location_accuracy", "plot_run",
]
