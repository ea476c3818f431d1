"""Feature extractors, the feature registry and per-class reference models."""

from .config import DEFAULT_CATEGORIES, ExtractorConfig
from .reference import DEFAULT_PRIORS, ReferenceModels, build_reference_models
from .registry import (
    CATEGORY_FEATURES,
    REGISTRY_VERSION,
    FeatureDescriptor,
    FeatureVector,
    extract_all,
    feature_names,
    prepare,
    registry,
)

__all__ = [
    "CATEGORY_FEATURES",
    "DEFAULT_CATEGORIES",
    "DEFAULT_PRIORS",
    "ExtractorConfig",
    "FeatureDescriptor",
    "FeatureVector",
    "REGISTRY_VERSION",
    "ReferenceModels",
    "build_reference_models",
    "extract_all",
    "feature_names",
    "prepare",
    "registry",
]
