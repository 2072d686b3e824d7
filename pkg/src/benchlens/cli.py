"""Command-line pipeline driver.

Commands map one-to-one onto the pipeline stages (ingest, derive, featurize,
pca, cluster, subset, compare, proxy) plus `report`, which composes them.
Every knob lives in a YAML config file and is overridable by a flag of the
same name. Outputs are deterministic: rerunning a command on unchanged
inputs rewrites byte-identical files.

Exit codes: 0 success, 1 usage/config, 2 data error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np
import yaml

from . import cluster as cluster_mod
from . import compare as compare_mod
from . import dataset, features, metrics, pca, proxy, render, subset
from .errors import BenchlensError, BudgetExceeded, ConfigError

DEFAULT_OUT_ENV = "BENCHLENS_OUT"
FORMATS = ("csv", "md", "svg")
COMMANDS = ("ingest", "derive", "featurize", "pca", "cluster", "subset", "compare", "proxy", "report")


@dataclass(frozen=True)
class PipelineConfig:
    store: str | None = None
    scores: str | None = None
    countermap: str | None = None
    raw: str | None = None
    out: str = ""
    format: tuple[str, ...] = FORMATS
    machine: str | None = None
    suite: str | None = None
    workload: str | None = None
    suite_a: str | None = None
    suite_b: str | None = None
    linkage: str = "ward"
    pcs: int | None = None
    variance: float | None = None
    threshold: float | None = None
    groups: int | None = None
    subset_k: int | None = None
    mix_k: int = 2
    mix: str | None = None
    target: str | None = None
    weights: dict[str, float] | None = None
    budget: int = 2_000_000

    def __post_init__(self):
        if self.pcs is not None and self.variance is not None:
            raise ConfigError("pcs and variance are mutually exclusive")
        if self.threshold is not None and self.groups is not None:
            raise ConfigError("threshold and groups are mutually exclusive")
        if self.linkage not in cluster_mod.LINKAGES:
            raise ConfigError(f"linkage must be one of {cluster_mod.LINKAGES}")
        unknown = [f for f in self.format if f not in FORMATS]
        if unknown:
            raise ConfigError(f"unknown output formats: {unknown}")


def load_config(path: str | None, overrides: dict) -> PipelineConfig:
    values: dict = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: config must be a key/value mapping")
        known = {f.name for f in fields(PipelineConfig)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"{path}: unknown config keys: {unknown}")
        values.update(doc)
    values.update({k: v for k, v in overrides.items() if v is not None})
    if isinstance(values.get("format"), str):
        values["format"] = tuple(values["format"].split(","))
    elif isinstance(values.get("format"), list):
        values["format"] = tuple(values["format"])
    if not values.get("out"):
        values["out"] = os.environ.get(DEFAULT_OUT_ENV, "out")
    try:
        return PipelineConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _write_text(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(content)


def _load_records(cfg: PipelineConfig) -> list[dataset.RunRecord]:
    if not cfg.store:
        raise ConfigError("a store path is required (--store)")
    return dataset.load_canonical(cfg.store, cfg.scores)


def _machines(cfg: PipelineConfig, records) -> list[str]:
    if cfg.machine:
        return [cfg.machine]
    return dataset.machines_in(records)


def _single_machine(cfg: PipelineConfig, records) -> str:
    if cfg.machine:
        return cfg.machine
    machines = dataset.machines_in(records)
    if len(machines) == 1:
        return machines[0]
    raise ConfigError(f"--machine is required; store has {machines}")


def _derived(records) -> dict[tuple[str, str, str], metrics.MetricVector]:
    return metrics.derive_store(records)


def _feature_matrix(cfg: PipelineConfig, records, vectors) -> features.FeatureMatrix:
    machines = _machines(cfg, records)
    workloads = sorted({rec.workload for rec in records if rec.machine in machines})
    cells = {
        (workload, machine): vec
        for (suite, workload, machine), vec in vectors.items()
        if machine in machines
    }
    return features.build_matrix(cells, workloads, machines)


def _fit(cfg: PipelineConfig, matrix: features.FeatureMatrix) -> pca.PcaModel:
    normalized = features.normalize(matrix)
    if cfg.variance is not None:
        return pca.fit_pca(normalized, variance_target=cfg.variance)
    return pca.fit_pca(normalized, fixed_k=cfg.pcs or 8)


def _scores_by_label(matrix: features.FeatureMatrix, model: pca.PcaModel) -> dict[str, list[float]]:
    normalized = features.normalize(matrix) if not matrix.normalized else matrix
    score_rows = pca.project(model, normalized)
    return {label: [float(v) for v in score_rows[i]] for i, label in enumerate(matrix.rows)}


def _suite_scores(records, suite: str, machines: list[str]) -> subset.ScoreTable:
    table: dict[str, dict[str, float]] = {}
    for rec in records:
        if rec.suite != suite or rec.machine not in machines:
            continue
        if rec.score is None:
            raise ConfigError(
                f"run {rec.key} has no running score; pass a scores CSV with --scores"
            )
        table.setdefault(rec.machine, {})[rec.workload] = rec.score
    if not table:
        raise ConfigError(f"no scored runs for suite {suite!r} on machines {machines}")
    return table


def _suite_wallclock(records, suite: str, machines: list[str]) -> dict[str, float]:
    clocks: dict[str, float] = {}
    for rec in records:
        if rec.suite == suite and rec.machine in machines:
            clocks[rec.workload] = clocks.get(rec.workload, 0.0) + rec.wallclock_seconds
    return clocks


def cmd_ingest(cfg: PipelineConfig) -> str:
    if not (cfg.raw and cfg.suite and cfg.workload and cfg.machine and cfg.store):
        raise ConfigError("ingest needs --raw, --suite, --workload, --machine and --store")
    if cfg.countermap:
        maps = dataset.load_counter_maps(cfg.countermap)
        if cfg.machine not in maps:
            raise ConfigError(f"counter map manifest has no machine {cfg.machine!r}")
        cmap = maps[cfg.machine]
    else:
        cmap = dataset.identity_counter_map(cfg.machine)
    result = dataset.parse_counter_file(
        cfg.raw, cfg.machine, cmap, suite=cfg.suite, workload=cfg.workload
    )
    for err in result.errors:
        print(f"warning: {type(err).__name__} at line {err.line_no}: {err.line}", file=sys.stderr)
    new_records = dataset.build_records(result.samples)
    existing = dataset.load_canonical(cfg.store) if Path(cfg.store).exists() else []
    merged = dataset.merge_records(existing, new_records)
    Path(cfg.store).parent.mkdir(parents=True, exist_ok=True)
    dataset.save_canonical(merged, cfg.store)
    return (
        f"ingest: {len(result.samples)} samples ({len(result.errors)} bad lines) "
        f"from {cfg.raw} -> {cfg.store}"
    )


def cmd_derive(cfg: PipelineConfig) -> str:
    records = _load_records(cfg)
    machines = _machines(cfg, records)
    records = [rec for rec in records if rec.machine in machines]
    vectors = _derived(records)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    metrics.export_metrics_csv(vectors, out / "metrics.csv")
    validation = dataset.validate_store(records)
    lines = ["machine,metric,status,missing_events"]
    for machine in sorted(validation.per_machine):
        entry = validation.per_machine[machine]
        for metric in entry.computable:
            lines.append(f"{machine},{metric},computable,")
        for metric, missing in entry.blocked.items():
            lines.append(f"{machine},{metric},blocked,{' '.join(missing)}")
    _write_text(out / "metric_availability.csv", "\n".join(lines) + "\n")
    return f"derive: {len(vectors)} metric rows -> {out / 'metrics.csv'}"


def cmd_featurize(cfg: PipelineConfig) -> str:
    records = _load_records(cfg)
    matrix = _feature_matrix(cfg, records, _derived(records))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    features.export_csv(matrix, out / "features.csv")
    dropped = ["metric,machine"] + [f"{metric},{machine}" for metric, machine in matrix.dropped]
    _write_text(out / "dropped_columns.csv", "\n".join(dropped) + "\n")
    return (
        f"featurize: {len(matrix.rows)}x{len(matrix.cols)} matrix "
        f"({len(matrix.dropped)} columns dropped) -> {out / 'features.csv'}"
    )


def cmd_pca(cfg: PipelineConfig) -> str:
    records = _load_records(cfg)
    matrix = _feature_matrix(cfg, records, _derived(records))
    model = _fit(cfg, matrix)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    scores = _scores_by_label(matrix, model)
    if "csv" in cfg.format:
        pca.export_scores_csv(
            list(matrix.rows),
            np.array([scores[w] for w in matrix.rows]),
            out / "pca_scores.csv",
        )
        pca.export_variance_csv(model, out / "pca_variance.csv")
    if "md" in cfg.format:
        report = pca.loading_table(model, top_n=4)
        _write_text(out / "pca_loadings.md", pca.loading_markdown(report))
    captured = float(sum(model.explained_ratio))
    return f"pca: k={model.k} capturing {100 * captured:.1f}% of variance -> {out}"


def cmd_cluster(cfg: PipelineConfig) -> str:
    records = _load_records(cfg)
    matrix = _feature_matrix(cfg, records, _derived(records))
    model = _fit(cfg, matrix)
    scores = _scores_by_label(matrix, model)
    suites = [cfg.suite] if cfg.suite else dataset.suites_in(records)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    built = 0
    for suite_name in suites:
        workloads = dataset.workloads_in(records, suite_name)
        workloads = [w for w in workloads if w in scores]
        if len(workloads) < 2:
            continue
        rows = [scores[w] for w in workloads]
        dendrogram = cluster_mod.build_dendrogram(rows, workloads, cfg.linkage)
        if "csv" in cfg.format:
            cluster_mod.export_merges_csv(dendrogram, out / f"dendrogram_{suite_name}.csv")
        if "svg" in cfg.format:
            _write_text(out / f"dendrogram_{suite_name}.svg", render.dendrogram_svg(dendrogram))
        built += 1
    return f"cluster: {built} dendrograms ({cfg.linkage} linkage) -> {out}"


def cmd_subset(cfg: PipelineConfig) -> str:
    records = _load_records(cfg)
    matrix = _feature_matrix(cfg, records, _derived(records))
    model = _fit(cfg, matrix)
    scores = _scores_by_label(matrix, model)
    machines = _machines(cfg, records)
    suites = [cfg.suite] if cfg.suite else dataset.suites_in(records)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for suite_name in suites:
        workloads = dataset.workloads_in(records, suite_name)
        if len(workloads) < 2:
            continue
        rows = [scores[w] for w in workloads]
        dendrogram = cluster_mod.build_dendrogram(rows, workloads, cfg.linkage)
        target_groups = cfg.groups or 4
        if cfg.threshold is not None:
            groups = cluster_mod.cut(dendrogram, cfg.threshold).groups
            target_groups = len(groups)
        target_groups = min(target_groups, len(workloads))
        running = _suite_scores(records, suite_name, machines)
        report = subset.select_representatives(
            dendrogram,
            {w: scores[w] for w in workloads},
            running,
            target_groups,
            suite=suite_name,
            wallclock=_suite_wallclock(records, suite_name, machines),
        )
        if cfg.subset_k is not None:
            report = replace(
                report, oracle_best=subset.oracle_best_subset(running, cfg.subset_k, budget=cfg.budget)
            )
        reports.append(report)
    if "csv" in cfg.format:
        subset.export_subset_csv(reports, out / "subsets.csv")
    if "md" in cfg.format:
        _write_text(out / "subsets.md", subset.subset_markdown(reports))
    return f"subset: {len(reports)} suite reports -> {out / 'subsets.md'}"


def cmd_compare(cfg: PipelineConfig) -> str:
    records = _load_records(cfg)
    if not (cfg.suite_a and cfg.suite_b):
        raise ConfigError("compare needs --suite-a and --suite-b")
    if not cfg.machine:
        raise ConfigError("compare needs an explicit --machine")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = _compare_pair(cfg, records, cfg.suite_a, cfg.suite_b, cfg.machine, out)
    _write_volume_ratios(cfg, records, out)
    return f"compare: {summary}"


def _compare_pair(cfg, records, suite_a, suite_b, machine, out: Path) -> str:
    vectors = _derived(records)
    metrics_a = [vec for (s, w, m), vec in sorted(vectors.items()) if s == suite_a and m == machine]
    metrics_b = [vec for (s, w, m), vec in sorted(vectors.items()) if s == suite_b and m == machine]
    cmp = compare_mod.compare_suites(suite_a, metrics_a, suite_b, metrics_b, machine)
    stem = f"compare_{suite_a}_vs_{suite_b}"
    if "csv" in cfg.format:
        compare_mod.export_comparison_csv(cmp, out / f"{stem}.csv")
    if "md" in cfg.format:
        _write_text(out / f"{stem}.md", compare_mod.comparison_markdown(cmp))
    if "svg" in cfg.format:
        _write_text(out / f"{stem}.svg", render.boxplot_svg(cmp))
    return f"{len(cmp.metrics)} metrics compared for {suite_a} vs {suite_b} on {machine} -> {out / stem}.*"


def _suite_icounts(records, suite_name: str) -> list[float]:
    values = []
    for rec in dataset.records_for(records, suite=suite_name):
        instructions = rec.event_values().get("instructions")
        if instructions:
            values.append(instructions)
    return values


def _volume_ratios(records) -> list[tuple[str, float, float, float]]:
    """speed/rate mean-icount ratios for every <prefix>_rate / <prefix>_speed pair."""
    suites = dataset.suites_in(records)
    rows = []
    for suite_name in suites:
        if not suite_name.endswith("_rate"):
            continue
        prefix = suite_name[: -len("_rate")]
        speed = f"{prefix}_speed"
        if speed not in suites:
            continue
        rate_counts, speed_counts = _suite_icounts(records, suite_name), _suite_icounts(records, speed)
        if rate_counts and speed_counts:
            ratio = compare_mod.instruction_volume_ratio(speed_counts, rate_counts)
            rows.append(
                (
                    prefix,
                    sum(speed_counts) / len(speed_counts),
                    sum(rate_counts) / len(rate_counts),
                    ratio,
                )
            )
    return rows


def _write_volume_ratios(cfg: PipelineConfig, records, out: Path) -> int:
    ratios = _volume_ratios(records)
    if ratios and "csv" in cfg.format:
        rows = ["pair,mean_speed_icount,mean_rate_icount,speed_over_rate"]
        rows += [f"{p},{s!r},{r!r},{x!r}" for p, s, r, x in ratios]
        _write_text(out / "volume_ratios.csv", "\n".join(rows) + "\n")
    return len(ratios)


def cmd_proxy(cfg: PipelineConfig) -> str:
    records = _load_records(cfg)
    machine = _single_machine(cfg, records)
    pool_suite = cfg.suite or dataset.suites_in(records)[0]
    pool_records = dataset.records_for(records, suite=pool_suite, machine=machine)
    pool_records = [rec for rec in pool_records if rec.workload != cfg.target]
    if not pool_records:
        raise ConfigError(f"no candidate runs in suite {pool_suite!r} on {machine!r}")
    vectors = _derived(records)
    profiles = [proxy.WorkloadProfile.from_record(rec) for rec in pool_records]
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    target_vec = None
    if cfg.target:
        target_keys = [key for key in vectors if key[1] == cfg.target and key[2] == machine]
        if not target_keys:
            raise ConfigError(f"target workload {cfg.target!r} has no run on {machine!r}")
        target_vec = vectors[target_keys[0]]

    if cfg.mix:
        chosen, schedule = proxy.apply_mix_spec(profiles, proxy.read_mix_file(cfg.mix))
        blend = proxy.simulate_rrr(chosen, schedule)
        if target_vec is not None:
            weights = cfg.weights or {metric: 1.0 for metric in target_vec.available()}
            report = proxy.blend_distance(blend, target_vec, weights)
            blend = replace(blend, distance_to_target=report.distance, target=cfg.target)
        if "csv" in cfg.format:
            proxy.export_mixes_csv([(schedule.order, blend)], out / "proxy_blend.csv")
        if "md" in cfg.format:
            _write_text(out / "proxy_blend.md", proxy.blend_markdown(blend, target_vec, chosen))
        return f"proxy: simulated mix {'+'.join(schedule.order)} -> {out / 'proxy_blend.csv'}"

    if target_vec is None:
        raise ConfigError("proxy needs --target (or --mix with a mix specification file)")
    pool_vectors = {
        (rec.workload, machine): vectors[rec.key] for rec in pool_records
    }
    pool_matrix = features.build_matrix(
        pool_vectors, [rec.workload for rec in pool_records], [machine]
    )
    scales = features.normalize(pool_matrix).scales_for_machine(machine)
    weights = cfg.weights or {
        metric: 1.0 for metric in target_vec.available()
    }
    mix_k = min(cfg.mix_k, len(profiles))
    ranked = proxy.search_mix(
        profiles,
        target_vec,
        mix_k,
        weights,
        scales=scales,
        target_name=cfg.target,
        budget=cfg.budget,
    )
    if "csv" in cfg.format:
        proxy.export_mixes_csv(ranked, out / "proxy_mixes.csv")
    if "md" in cfg.format:
        best_order, best_blend = ranked[0]
        constituents = [p for p in profiles if p.workload in best_order]
        _write_text(out / "proxy_best.md", proxy.blend_markdown(best_blend, target_vec, constituents))
    return (
        f"proxy: {len(ranked)} mixes ranked against {cfg.target} "
        f"(best: {'+'.join(ranked[0][0])}) -> {out / 'proxy_mixes.csv'}"
    )


def cmd_report(cfg: PipelineConfig) -> str:
    lines = [cmd_derive(cfg), cmd_featurize(cfg), cmd_pca(cfg), cmd_cluster(cfg), cmd_subset(cfg)]
    records = _load_records(cfg)
    out = Path(cfg.out)
    ratio_count = _write_volume_ratios(cfg, records, out)
    if ratio_count:
        lines.append(f"volume: {ratio_count} speed/rate ratios -> {out / 'volume_ratios.csv'}")
    suites = dataset.suites_in(records)
    if cfg.suite_a and cfg.suite_b:
        pairs = [(cfg.suite_a, cfg.suite_b)]
    else:
        pairs = [
            (s, s[: -len('_rate')] + "_speed")
            for s in suites
            if s.endswith("_rate") and s[: -len('_rate')] + "_speed" in suites
        ]
    machine = _single_machine(cfg, records)
    for suite_a, suite_b in pairs:
        lines.append("compare: " + _compare_pair(cfg, records, suite_a, suite_b, machine, out))
    return "\n".join(lines)


_COMMANDS = {
    "ingest": cmd_ingest,
    "derive": cmd_derive,
    "featurize": cmd_featurize,
    "pca": cmd_pca,
    "cluster": cmd_cluster,
    "subset": cmd_subset,
    "compare": cmd_compare,
    "proxy": cmd_proxy,
    "report": cmd_report,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's default 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="benchlens", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="YAML config file; flags override its keys")
    parser.add_argument("--store", help="canonical store CSV")
    parser.add_argument("--scores", help="scores CSV (suite,workload,machine,score,wallclock_seconds)")
    parser.add_argument("--countermap", help="counter map manifest (YAML)")
    parser.add_argument("--raw", help="raw counter dump to ingest")
    parser.add_argument("--suite", help="suite to operate on (ingest/cluster/subset/proxy)")
    parser.add_argument("--workload", help="workload id (ingest)")
    parser.add_argument("--machine", help="machine id")
    parser.add_argument("--suite-a", dest="suite_a", help="left suite for compare")
    parser.add_argument("--suite-b", dest="suite_b", help="right suite for compare")
    parser.add_argument("--linkage", choices=cluster_mod.LINKAGES)
    group_k = parser.add_mutually_exclusive_group()
    group_k.add_argument("--pcs", type=int, help="retain a fixed number of principal components")
    group_k.add_argument("--variance", type=float, help="retain components reaching this variance fraction")
    group_cut = parser.add_mutually_exclusive_group()
    group_cut.add_argument("--threshold", type=float, help="dendrogram cut height")
    group_cut.add_argument("--groups", type=int, help="cut to exactly this many groups")
    parser.add_argument("--subset-k", dest="subset_k", type=int, help="also run the exhaustive oracle at size k")
    parser.add_argument("--mix-k", dest="mix_k", type=int, help="max constituents per proxy mix")
    parser.add_argument("--mix", help="mix specification file: one workload[,duration] per line")
    parser.add_argument("--target", help="target workload for proxy search")
    parser.add_argument("--budget", type=int, help="enumeration budget for exhaustive searches")
    parser.add_argument("--out", help=f"output directory (default ${DEFAULT_OUT_ENV} or ./out)")
    parser.add_argument("--format", help="comma-separated subset of csv,md,svg")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config")
    try:
        cfg = load_config(config_path, args)
        summary = _COMMANDS[command](cfg)
    except ConfigError as exc:
        print(json.dumps({"stage": command, "error": "ConfigError", "message": str(exc)}), file=sys.stderr)
        return 1
    except BudgetExceeded as exc:
        print(json.dumps({"stage": command, "error": "BudgetExceeded", "message": str(exc)}), file=sys.stderr)
        return 3
    except BenchlensError as exc:
        print(
            json.dumps({"stage": command, "error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 2
    except (OSError, ValueError) as exc:
        print(
            json.dumps({"stage": command, "error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 2
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
