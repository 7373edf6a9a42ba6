"""advertoscope: advertorial detection and disclosure-audit toolkit.

Library layout:

* ``page`` — uniform page model (static HTML or rendered snapshots)
* ``structure`` — disclaimer-phrase lexicon and selector-rule detection
* ``darkpattern`` — WCAG contrast, position, and font-prominence audits
* ``textmetrics`` — type-token ratio and Linsear-Write readability
* ``features`` / ``engines`` — per-domain feature vectors from engine reports
* ``forest`` — from-scratch CART random forest with Gini importances
* ``corpus`` — KS tests, eTLD+1, trackers, dHash, RDAP
* ``pipeline`` — the two-stage conjunction and batch auditing
* ``cli`` — the ``advertoscope`` command
"""

__version__ = "0.1.0"

from .colors import ColorValue, effective_color
from .page import PageDocument, RawPage, RenderedSnapshot, ingest_snapshot, parse_static
from .structure import (
    DisclaimerLexicon,
    SelectorRule,
    StructureMatch,
    load_lexicon,
    load_selector_rules,
    match_disclaimers,
    match_selectors,
    normalize_text,
    structure_verdict,
)
from .darkpattern import (
    DarkPatternReport,
    analyze_dark_patterns,
    classify_disclosure,
    contrast_ratio,
    disclosure_position,
    font_prominence,
    relative_luminance,
)
from .textmetrics import TokenStream, count_syllables, linsear_write, tokenize, type_token_ratio
from .features import FeatureSchema, FeatureSpec, FeatureVector, default_schema, encode_and_impute
from .forest import (
    CVResult,
    Dataset,
    ForestModel,
    Hyperparams,
    best_split,
    cross_validate,
    gini_impurity,
    predict,
    select_features,
    train_forest,
)
from .pipeline import AuditReport, RunConfig, classify_page, run_batch, split_main_vs_disclaimer

__all__ = [
    "AuditReport",
    "CVResult",
    "ColorValue",
    "DarkPatternReport",
    "Dataset",
    "DisclaimerLexicon",
    "FeatureSchema",
    "FeatureSpec",
    "FeatureVector",
    "ForestModel",
    "Hyperparams",
    "PageDocument",
    "RawPage",
    "RenderedSnapshot",
    "RunConfig",
    "SelectorRule",
    "StructureMatch",
    "TokenStream",
    "__version__",
    "analyze_dark_patterns",
    "best_split",
    "classify_disclosure",
    "classify_page",
    "contrast_ratio",
    "count_syllables",
    "cross_validate",
    "default_schema",
    "disclosure_position",
    "effective_color",
    "encode_and_impute",
    "font_prominence",
    "gini_impurity",
    "ingest_snapshot",
    "linsear_write",
    "load_lexicon",
    "load_selector_rules",
    "match_disclaimers",
    "match_selectors",
    "normalize_text",
    "parse_static",
    "predict",
    "relative_luminance",
    "run_batch",
    "select_features",
    "split_main_vs_disclaimer",
    "structure_verdict",
    "tokenize",
    "train_forest",
    "type_token_ratio",
]
