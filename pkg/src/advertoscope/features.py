"""Per-domain feature vectors built from engine reports.

The schema is an ordered list of declarations that defines the vector layout
forever: categorical signals are encoded ordinally against declared levels
(tree models are insensitive to monotone encodings), and imputation values
are fitted once on the training corpus and stored *in* the schema so
inference can never drift from training.

The shipped default schema is a documented reconstruction of a 45-feature
space (per-engine risk scores and verdicts, a few engine-specific extras,
landing-page size, and registration metadata); the exact production feature
list of the original study was never published, so this one is labeled
non-identical by construction.
"""

from __future__ import annotations

import hashlib
import json
import statistics
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import SchemaError, SchemaMismatch

OTHER_LEVEL = "__other__"

NUMERIC = "numeric"
CATEGORICAL = "categorical"

# The 19 third-party engine identifiers (alphabetical), as used for signal
# namespacing. Adapters for them are plugin stubs; see engines.py.
THIRD_PARTY_ENGINE_IDS = (
    "blacklist_alert", "cyren", "fortiguard", "getsafeonline", "kaspersky",
    "maltiverse", "mywot", "norton_safeweb", "scamadviser", "scamdoc",
    "scamguard", "scam_validator", "spamhaus", "sucuri", "talos_intelligence",
    "trend_micro", "urlvoid", "virustotal", "zscaler",
)


@dataclass(frozen=True)
class FeatureSpec:
    name: str  # namespaced "engine.signal"
    kind: str  # numeric | categorical
    category_levels: tuple[str, ...] = ()  # categorical only; OTHER_LEVEL last
    impute: str = "median"  # median | mode | constant
    impute_value: float | None = None  # fitted (encoded) fallback value

    def __post_init__(self) -> None:
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"{self.name}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if not self.category_levels or self.category_levels[-1] != OTHER_LEVEL:
                raise SchemaError(f"{self.name}: categorical levels must end with {OTHER_LEVEL}")
        if self.impute not in ("median", "mode", "constant"):
            raise SchemaError(f"{self.name}: unknown impute {self.impute!r}")
        if self.impute == "constant" and self.impute_value is None:
            raise SchemaError(f"{self.name}: constant imputation needs a value")


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[FeatureSpec, ...]
    version: str = "1"

    def __post_init__(self) -> None:
        names = [f.name for f in self.features]
        if len(names) != len(set(names)):
            raise SchemaError("duplicate feature names in schema")

    def __len__(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "features": [
                {
                    "name": f.name,
                    "kind": f.kind,
                    "category_levels": list(f.category_levels),
                    "impute": f.impute,
                    "impute_value": f.impute_value,
                }
                for f in self.features
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSchema":
        try:
            features = tuple(
                FeatureSpec(
                    name=f["name"],
                    kind=f["kind"],
                    category_levels=tuple(f.get("category_levels") or ()),
                    impute=f.get("impute", "median"),
                    impute_value=f.get("impute_value"),
                )
                for f in d["features"]
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed schema: {exc}") from exc
        return cls(features=features, version=str(d.get("version", "1")))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "FeatureSchema":
        return cls.from_dict(json.loads(s))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FeatureSchema":
        return cls.from_json(Path(path).read_text("utf-8"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class FeatureVector:
    domain: str
    values: tuple[float, ...]
    missing_mask: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.missing_mask):
            raise SchemaMismatch("values and missing_mask lengths differ")


def _is_missing(value) -> bool:
    return value is None


def encode_value(spec: FeatureSpec, value) -> float:
    """Encode one present signal value against its declaration."""
    if spec.kind == NUMERIC:
        if isinstance(value, bool):
            return 1.0 if value else 0.0
        if isinstance(value, (int, float)):
            return float(value)
        raise SchemaMismatch(f"{spec.name}: expected numeric, got {type(value).__name__}")
    if not isinstance(value, str):
        raise SchemaMismatch(f"{spec.name}: expected category string, got {type(value).__name__}")
    try:
        return float(spec.category_levels.index(value))
    except ValueError:
        return float(spec.category_levels.index(OTHER_LEVEL))


def decode_value(spec: FeatureSpec, encoded: float):
    """Inverse of encode_value for categoricals (numerics pass through)."""
    if spec.kind == NUMERIC:
        return encoded
    idx = int(encoded)
    if not 0 <= idx < len(spec.category_levels):
        raise SchemaMismatch(f"{spec.name}: encoded level {encoded} out of range")
    return spec.category_levels[idx]


def merge_signals(reports) -> dict:
    """Union of namespaced signals across one domain's engine reports."""
    signals: dict = {}
    for report in reports:
        signals.update(report.signals)
    return signals


def encode_and_impute(reports, schema: FeatureSchema, domain: str | None = None) -> FeatureVector:
    """Build a schema-aligned vector; missing signals take stored imputations."""
    signals = merge_signals(reports)
    if domain is None:
        domain = reports[0].domain if reports else ""
    values: list[float] = []
    mask: list[bool] = []
    for spec in schema.features:
        raw = signals.get(spec.name)
        if _is_missing(raw):
            if spec.impute_value is None:
                raise SchemaError(
                    f"{spec.name} is missing and the schema has no fitted imputation value"
                )
            values.append(float(spec.impute_value))
            mask.append(True)
        else:
            values.append(encode_value(spec, raw))
            mask.append(False)
    return FeatureVector(domain=domain, values=tuple(values), missing_mask=tuple(mask))


def fit_imputation(schema: FeatureSchema, signal_rows: list[dict]) -> FeatureSchema:
    """Compute per-feature imputation values from training rows.

    Numeric medians use the standard even-count average; categorical modes
    break ties by first occurrence. Features absent from every row fall back
    to 0.0 / the OTHER level so the schema is always usable.
    """
    fitted = []
    for spec in schema.features:
        if spec.impute == "constant":
            fitted.append(spec)
            continue
        present = [row[spec.name] for row in signal_rows if not _is_missing(row.get(spec.name))]
        if spec.kind == NUMERIC:
            numeric = [encode_value(spec, v) for v in present]
            value = float(statistics.median(numeric)) if numeric else 0.0
        else:
            if present:
                counts = Counter(str(v) for v in present)
                top = max(counts.items(), key=lambda kv: kv[1])[0]
                value = encode_value(spec, top)
            else:
                value = float(spec.category_levels.index(OTHER_LEVEL))
        fitted.append(replace(spec, impute_value=value))
    return FeatureSchema(features=tuple(fitted), version=schema.version)


def _categorical(name: str, levels: list[str], impute: str = "mode") -> FeatureSpec:
    return FeatureSpec(
        name=name, kind=CATEGORICAL, category_levels=tuple(levels) + (OTHER_LEVEL,), impute=impute
    )


def default_schema() -> FeatureSchema:
    """The shipped 45-feature reconstruction (see module docstring)."""
    verdict_levels = ["safe", "suspicious", "malicious", "unknown"]
    registrar_levels = [
        "namecheap", "godaddy", "tucows", "gandi", "cloudflare", "markmonitor",
    ]
    features: list[FeatureSpec] = []
    for engine in THIRD_PARTY_ENGINE_IDS:
        features.append(FeatureSpec(name=f"{engine}.risk_score", kind=NUMERIC, impute="median"))
        features.append(_categorical(f"{engine}.verdict", verdict_levels))
    features.extend(
        [
            FeatureSpec(name="virustotal.detections", kind=NUMERIC, impute="median"),
            FeatureSpec(name="virustotal.total_scanners", kind=NUMERIC, impute="median"),
            FeatureSpec(name="mywot.child_safety", kind=NUMERIC, impute="median"),
            FeatureSpec(name="scamadviser.trust_score", kind=NUMERIC, impute="median"),
            FeatureSpec(name="local.page_size_chars", kind=NUMERIC, impute="median"),
            FeatureSpec(name="rdap.domain_age_days", kind=NUMERIC, impute="median"),
            _categorical("rdap.registrar", registrar_levels),
        ]
    )
    assert len(features) == 45
    return FeatureSchema(features=tuple(features), version="1")
