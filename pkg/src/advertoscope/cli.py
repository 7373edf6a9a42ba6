"""The ``advertoscope`` command-line interface."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import date
from pathlib import Path

from . import __version__
from .corpus.dhash import dhash, hamming_near_duplicates, load_grayscale
from .corpus.psl import etld_plus_one, refresh_psl
from .corpus.rdap import RdapResolver, refresh_bootstrap
from .corpus.webstats import TrackerList, load_har_request_log, text_length_report, third_party_stats
from .engines import EngineCache, RdapEngine, third_party_stub_engines
from .errors import AdvertoscopeError
from .features import FeatureSchema, default_schema, encode_and_impute, fit_imputation
from .forest import Dataset, ForestModel, Hyperparams, cross_validate, predict, select_features, train_forest
from .pipeline import RunConfig, load_input, run_batch
from .structure import load_lexicon, load_selector_rules
from .textmetrics import text_metrics

OFFLINE_ENV = "ADVERTOSCOPE_OFFLINE"


def _collect_inputs(paths: list[str]) -> list[Path]:
    out: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            out.extend(sorted(q for q in p.iterdir() if q.suffix.lower() in (".html", ".htm", ".json")))
        else:
            out.append(p)
    return out


def _env_offline() -> bool:
    return os.environ.get(OFFLINE_ENV, "") not in ("", "0", "false")


def _report_csv_row(report) -> dict:
    d = report.to_dict()
    dark = d["darkpatterns"]
    return {
        "url": d["url"],
        "mode": d["mode"],
        "verdict": d["verdict"],
        "is_candidate": d["structure"]["is_candidate"],
        "content_label": d["content"]["label"],
        "content_probability": d["content"]["probability"],
        "n_disclosures": len(dark["records"]),
        "share_below_median_font": dark["summary"]["share_below_median_font"],
        "share_below_aa": dark["summary"]["share_below_aa"],
        "ttr_main": d["metrics"]["ttr_main"],
        "ttr_disclaimer": d["metrics"]["ttr_disclaimer"],
        "linsear_main": d["metrics"]["linsear_main"],
        "linsear_disclaimer": d["metrics"]["linsear_disclaimer"],
    }


def cmd_analyze(args) -> int:
    lexicon = load_lexicon(args.lexicon)
    rules = load_selector_rules(args.rules)
    model = ForestModel.load(args.model) if args.model else None
    offline = args.offline or _env_offline()
    cache = EngineCache(args.cache) if args.cache else EngineCache()
    resolver = RdapResolver(offline=offline)
    clients = tuple(third_party_stub_engines() + [RdapEngine(resolver=resolver)])
    config = RunConfig(
        lexicon=lexicon,
        rules=tuple(rules),
        model=model,
        clients=clients,
        cache=cache,
        offline=offline,
        deterministic=args.deterministic,
        aa_threshold=args.aa_threshold,
        banner_max_tokens=args.banner_max_tokens,
        seed=args.seed,
        workers=args.workers,
    )
    inputs = _collect_inputs(args.inputs)
    result = run_batch(inputs, config)

    out = open(args.output, "w", encoding="utf-8", newline="") if args.output else sys.stdout
    try:
        if args.format == "csv":
            rows = [_report_csv_row(r) for r in result.reports]
            writer = csv.DictWriter(out, fieldnames=list(rows[0].keys()) if rows else ["url"])
            writer.writeheader()
            writer.writerows(rows)
        else:
            for report in result.reports:
                out.write(report.to_json() + "\n")
        if args.group_by_domain:
            groups: dict[str, str] = {}
            for report in result.reports:
                host = report.url.split("//", 1)[-1].split("/", 1)[0]
                try:
                    domain = etld_plus_one(host) if "." in host else host
                except AdvertoscopeError:
                    domain = host
                rank = {"problematic_advertorial": 2, "candidate_only": 1, "benign": 0}
                if rank[report.verdict] > rank.get(groups.get(domain, "benign"), 0):
                    groups[domain] = report.verdict
            out.write(json.dumps({"by_domain": groups}, sort_keys=True) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    print(json.dumps(result.summary(), sort_keys=True), file=sys.stderr)
    return result.exit_code


def _load_training_rows(path: str) -> tuple[list[dict], list[str], list[str]]:
    rows, labels, domains = [], [], []
    for line in Path(path).read_text("utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        rows.append(rec.get("signals") or {})
        labels.append(rec["label"])
        domains.append(rec.get("domain", ""))
    return rows, labels, domains


def _dataset_from_args(args) -> Dataset:
    rows, labels, domains = _load_training_rows(args.data)
    schema = FeatureSchema.load(args.schema) if args.schema else default_schema()
    schema = fit_imputation(schema, rows)

    class _Row:
        def __init__(self, domain, signals):
            self.domain = domain
            self.signals = signals

    vectors = tuple(
        encode_and_impute([_Row(domain, row)], schema, domain=domain)
        for domain, row in zip(domains, rows)
    )
    return Dataset(vectors=vectors, labels=tuple(labels), schema=schema)


def _hp_from_args(args) -> Hyperparams:
    return Hyperparams(
        n_trees=args.n_trees,
        max_depth=args.max_depth,
        min_leaf=args.min_leaf,
        mtry=args.mtry,
        seed=args.seed,
        bootstrap=not args.no_bootstrap,
    )


def cmd_train(args) -> int:
    ds = _dataset_from_args(args)
    model = train_forest(ds, _hp_from_args(args))
    model.save(args.out)
    print(f"trained {len(model.trees)} trees over {len(ds.vectors)} examples -> {args.out}")
    return 0


def cmd_cross_validate(args) -> int:
    ds = _dataset_from_args(args)
    result = cross_validate(ds, _hp_from_args(args), iterations=args.iterations)
    print(result.table())
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(result.to_dict(), indent=2), encoding="utf-8")
    return 0


def cmd_select_features(args) -> int:
    model = ForestModel.load(args.model)
    reduced = select_features(model, threshold=args.threshold)
    reduced.save(args.out)
    print(f"kept {len(reduced)} of {len(model.schema)} features -> {args.out}")
    return 0


def cmd_metrics(args) -> int:
    if args.input == "-":
        text = sys.stdin.read()
    else:
        text = Path(args.input).read_text("utf-8")
    print(json.dumps(text_metrics(text), sort_keys=True))
    return 0


def cmd_corpus_stats(args) -> int:
    groups = {}
    for spec in args.group:
        name, _, path = spec.partition("=")
        if not path:
            print(f"--group must be name=dir, got {spec!r}", file=sys.stderr)
            return 2
        docs = []
        for p in _collect_inputs([path]):
            try:
                docs.append(load_input(p))
            except (AdvertoscopeError, OSError, ValueError) as exc:
                print(f"skipping {p}: {exc}", file=sys.stderr)
        groups[name] = docs
    report = text_length_report(groups)
    if args.har and args.trackers:
        trackers = TrackerList.from_disconnect_json(args.trackers)
        har_stats = []
        for har in sorted(Path(args.har).glob("*.har")) + sorted(Path(args.har).glob("*.json")):
            first_party = har.stem
            log = load_har_request_log(har, first_party=first_party)
            har_stats.append({"page": first_party, **third_party_stats(log, trackers).to_dict()})
        report["third_parties"] = har_stats
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_hash_images(args) -> int:
    paths = _collect_image_paths(args.inputs)
    hashes = []
    for p in paths:
        try:
            hashes.append(dhash(load_grayscale(p), source=str(p)))
        except (ValueError, RuntimeError, OSError) as exc:
            print(f"skipping {p}: {exc}", file=sys.stderr)
    for h in hashes:
        print(json.dumps({"source": h.source, "algorithm": h.algorithm, "bits": f"{h.bits:016x}"}))
    pairs = hamming_near_duplicates(hashes, threshold=args.threshold)
    for i, j, distance in pairs:
        print(
            json.dumps(
                {"near_duplicate": [hashes[i].source, hashes[j].source], "distance": distance}
            )
        )
    return 0


def _collect_image_paths(inputs: list[str]) -> list[Path]:
    exts = (".pgm", ".png", ".jpg", ".jpeg")
    out: list[Path] = []
    for raw in inputs:
        p = Path(raw)
        if p.is_dir():
            out.extend(sorted(q for q in p.iterdir() if q.suffix.lower() in exts))
        else:
            out.append(p)
    return out


def cmd_rdap(args) -> int:
    if args.refresh_bootstrap:
        dest = refresh_bootstrap(args.refresh_bootstrap)
        print(f"bootstrap written to {dest}")
        return 0
    resolver = RdapResolver(
        offline=args.offline or _env_offline(),
        fixtures_dir=args.fixtures,
        reference_date=date.fromisoformat(args.reference_date) if args.reference_date else None,
    )
    for record in resolver.lookup_batch(args.domains):
        print(json.dumps(record.to_dict(), sort_keys=True))
    return 0


def cmd_cache(args) -> int:
    if args.refresh_psl:
        dest = refresh_psl(args.refresh_psl)
        print(f"PSL snapshot written to {dest}")
        return 0
    cache = EngineCache(args.path)
    if args.clear:
        cache.clear()
        print("cache cleared")
    else:
        print(json.dumps({"path": str(cache.path), "records": len(cache)}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advertoscope", description=__doc__)
    parser.add_argument("--version", action="version", version=f"advertoscope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="audit pages (HTML files or snapshot JSON)")
    p.add_argument("inputs", nargs="+", help="files or directories")
    p.add_argument("--lexicon", default=None, help="phrase lexicon TSV (default: bundled seed)")
    p.add_argument("--rules", default=None, help="selector rules TSV (default: bundled seed)")
    p.add_argument("--model", default=None, help="trained model JSON for the content stage")
    p.add_argument("--cache", default=None, help="engine cache path (or ADVERTOSCOPE_CACHE)")
    p.add_argument("--offline", action="store_true", help="forbid network (ADVERTOSCOPE_OFFLINE=1)")
    p.add_argument("--deterministic", action="store_true", help="zero timestamps for golden files")
    p.add_argument("--aa-threshold", type=float, default=4.5)
    p.add_argument("--banner-max-tokens", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--output", default=None)
    p.add_argument("--group-by-domain", action="store_true")
    p.set_defaults(func=cmd_analyze)

    for name, func in (("train", cmd_train), ("cross-validate", cmd_cross_validate)):
        p = sub.add_parser(name, help=f"{name} the content classifier")
        p.add_argument("--data", required=True, help="JSONL rows {domain, label, signals}")
        p.add_argument("--schema", default=None, help="feature schema JSON (default: built-in)")
        p.add_argument("--n-trees", type=int, default=300)
        p.add_argument("--max-depth", type=int, default=None)
        p.add_argument("--min-leaf", type=int, default=1)
        p.add_argument("--mtry", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--no-bootstrap", action="store_true")
        if name == "train":
            p.add_argument("--out", required=True)
        else:
            p.add_argument("--iterations", type=int, default=20)
            p.add_argument("--json-out", default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("select-features", help="cumulative-importance feature selection")
    p.add_argument("--model", required=True)
    p.add_argument("--threshold", type=float, default=0.96)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_select_features)

    p = sub.add_parser("metrics", help="TTR and Linsear-Write for a text file or stdin")
    p.add_argument("input", help="path or '-' for stdin")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("corpus-stats", help="size distributions and third-party counts")
    p.add_argument("--group", action="append", required=True, metavar="NAME=DIR")
    p.add_argument("--har", default=None, help="directory of HAR captures")
    p.add_argument("--trackers", default=None, help="Disconnect services JSON")
    p.set_defaults(func=cmd_corpus_stats)

    p = sub.add_parser("hash-images", help="perceptual hashes and near-duplicate pairs")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--threshold", type=int, default=10)
    p.set_defaults(func=cmd_hash_images)

    p = sub.add_parser("rdap", help="registration metadata lookups")
    p.add_argument("domains", nargs="*")
    p.add_argument("--offline", action="store_true")
    p.add_argument("--fixtures", default=None, help="directory of <domain>.json RDAP fixtures")
    p.add_argument("--reference-date", default=None, help="YYYY-MM-DD for age computation")
    p.add_argument("--refresh-bootstrap", default=None, metavar="PATH")
    p.set_defaults(func=cmd_rdap)

    p = sub.add_parser("cache", help="inspect or clear the engine cache")
    p.add_argument("--path", default=None)
    p.add_argument("--clear", action="store_true")
    p.add_argument("--refresh-psl", default=None, metavar="PATH")
    p.set_defaults(func=cmd_cache)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AdvertoscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
