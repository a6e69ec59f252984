"""Command-line orchestration: batch experiments in, CSV/JSON/SVG out.

Every run writes a manifest.json capturing the effective configuration,
sha256 checksums of the written artifacts and wall-clock timings. All
randomness flows from the single master seed; re-running a command with
the same configuration byte-reproduces every CSV/JSON artifact (manifest
timings aside), independent of the thread count.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, figures
from .ensemble import (
    EnsembleConfig,
    derive_subseed,
    expected_metrics,
    generate_ensemble,
    sample_network,
)
from .errors import (
    ConfigurationError,
    DataValidationError,
    DegenerateEnsembleError,
    DomainError,
    InsufficientDataError,
    InvalidNetworkError,
    NonConvergenceError,
    NumericalError,
    ParseError,
    ReconError,
    SingularityError,
    UndefinedAUCError,
    UndefinedReciprocityError,
)
from .estimation import SolverConfig, fit_fdcm, fit_fgrm
from .graph import degrees_strengths
from .ingest import (
    aggregate,
    build_windows,
    parse_transactions,
    read_fitness_csv,
    synth_fitness,
    synth_transactions,
    write_fitness_csv,
    write_transactions_csv,
)
from .models import ModelKind, dyad_probability_arrays
from .serialize import (
    read_json,
    read_model,
    read_network,
    read_nodes,
    write_csv,
    write_json,
    write_model,
    write_network,
    write_nodes,
)
from .spectral import bulk_shape, eigenvalues, rescale_matrix, tau_matrix
from .validation import (
    RocResult,
    cross_entropy,
    mann_whitney_auc,
    rho,
    roc_auc,
    scan_aggregations,
)

_USAGE_ERRORS = (ConfigurationError, DomainError)
_DATA_ERRORS = (ParseError, DataValidationError, InvalidNetworkError,
                UndefinedReciprocityError, InsufficientDataError, UndefinedAUCError)
_NUMERIC_ERRORS = (NonConvergenceError, NumericalError, DegenerateEnsembleError,
                   SingularityError)


def _threads(cfg) -> int:
    env = os.environ.get("RECON_NET_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(f"RECON_NET_THREADS={env!r} is not an integer") from None
    if cfg.get("threads") is not None:
        return max(1, int(cfg["threads"]))
    return os.cpu_count() or 1


def _need(cfg, field, kind=None):
    value = cfg.get(field)
    if value is None:
        raise ConfigurationError(f"missing required field '{field}'")
    if kind is not None:
        try:
            value = kind(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"field '{field}' has invalid value {value!r}") from None
    return value


def _need_path(cfg, field) -> Path:
    path = Path(_need(cfg, field))
    if not path.exists():
        raise ConfigurationError(f"field '{field}': no such file {path}")
    return path


def _fraction(cfg, field, lo, hi, lo_open=True, hi_open=True):
    value = _need(cfg, field, float)
    ok_lo = value > lo if lo_open else value >= lo
    ok_hi = value < hi if hi_open else value <= hi
    if not (ok_lo and ok_hi):
        bra = "(" if lo_open else "["
        ket = ")" if hi_open else "]"
        raise ConfigurationError(f"field '{field}' must be in {bra}{lo}, {hi}{ket}, got {value}")
    return value


def _out_dir(cfg) -> Path:
    out = Path(_need(cfg, "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _solver_config(cfg) -> SolverConfig | None:
    overrides = cfg.get("solver")
    if not overrides:
        return None
    known = {"residual_tolerance", "step_tolerance", "max_iterations", "lower_bound"}
    bad = set(overrides) - known
    if bad:
        raise ConfigurationError(f"unknown solver fields {sorted(bad)}")
    return SolverConfig(**overrides)


def parse_delta_ts(text) -> list[int]:
    """'a:b' or 'a:b:step' inclusive ranges, or a comma list of integers."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                lo, hi, step = parts[0], parts[1], 1
            elif len(parts) == 3:
                lo, hi, step = parts
            else:
                raise ValueError
            if lo < 1 or hi < lo or step < 1:
                raise ValueError
            return list(range(lo, hi + 1, step))
        values = sorted({int(p) for p in text.split(",")})
        if not values or values[0] < 1:
            raise ValueError
        return values
    except ValueError:
        raise ConfigurationError(
            f"field 'delta_t' must be 'a:b[:step]' or a comma list of days >= 1, got {text!r}"
        ) from None


# ---------------------------------------------------------------------------
# Subcommands; each returns (paths_written, result_summary)
# ---------------------------------------------------------------------------


def _cmd_synth(cfg, out):
    n = _need(cfg, "nodes", int)
    dist = _need(cfg, "fitness_dist")
    kind = ModelKind(_need(cfg, "model"))
    d = _fraction(cfg, "density", 0.0, 1.0)
    seed = _need(cfg, "seed", int)
    fitness = synth_fitness(n, dist, derive_subseed(seed, 0))
    solver = _solver_config(cfg)
    if kind is ModelKind.FGRM:
        r = _fraction(cfg, "reciprocity", 0.0, 1.0, lo_open=False)
        model = fit_fgrm(fitness, d, r, config=solver)
    elif kind is ModelKind.FDCM:
        model = fit_fdcm(fitness, d, config=solver)
    else:
        raise ConfigurationError(f"field 'model' must be fdcm or fgrm, got {kind.value}")
    records = synth_transactions(model, _need(cfg, "year", int), _need(cfg, "days", int),
                                 derive_subseed(seed, 1),
                                 amount_sigma=float(cfg.get("amount_sigma") or 0.0))
    paths = [out / "fitness.csv", out / "transactions.csv", out / "truth.json"]
    write_fitness_csv(paths[0], fitness)
    write_transactions_csv(paths[1], records)
    write_model(paths[2], model)
    return paths, {"transactions": len(records), "params": model.params}


def _cmd_aggregate(cfg, out):
    records = parse_transactions(_need_path(cfg, "transactions"))
    year = _need(cfg, "year", int)
    delta_t = _need(cfg, "delta_t", int)
    windows = build_windows(records, year, delta_t)
    net_dir = out / "networks"
    net_dir.mkdir(exist_ok=True)
    paths = []
    rows = []
    for window in windows:
        net = aggregate(records, window)
        if not paths:
            paths.append(net_dir / "nodes.csv")
            write_nodes(paths[0], net.labels)
        p = net_dir / f"window_{window.window_index:03d}.csv"
        write_network(p, net)
        paths.append(p)
        m = degrees_strengths(net)
        rows.append([delta_t, window.window_index, m.n, m.link_count, m.recip_count,
                     m.d, m.r if m.r is not None else float("nan")])
    metrics = out / "metrics.csv"
    write_csv(metrics, ["delta_t", "window_index", "n", "links", "recip_links",
                        "density", "reciprocity"], rows)
    paths.append(metrics)
    return paths, {"windows": len(windows)}


def _cmd_fit(cfg, out):
    fitness, _ = read_fitness_csv(_need_path(cfg, "fitness"))
    kind = ModelKind(_need(cfg, "model"))
    d = _fraction(cfg, "density", 0.0, 1.0)
    solver = _solver_config(cfg)
    if kind is ModelKind.FGRM:
        r = _fraction(cfg, "reciprocity", 0.0, 1.0, lo_open=False)
        model = fit_fgrm(fitness, d, r, config=solver)
    elif kind is ModelKind.FDCM:
        model = fit_fdcm(fitness, d, config=solver)
    else:
        raise ConfigurationError(f"field 'model' must be fdcm or fgrm, got {kind.value}")
    paths = [out / "fitted.json"]
    write_model(paths[0], model)

    tau = tau_matrix(model)
    iu, ju = np.triu_indices(fitness.n, k=1)
    keep = tau.defined[iu, ju]
    tau_path = out / "tau.csv"
    write_csv(tau_path, ["i", "j", "tau"],
              [[int(a), int(b), float(t)] for a, b, t in
               zip(iu[keep], ju[keep], tau.values[iu[keep], ju[keep]])])
    paths.append(tau_path)
    paths.extend(figures.emit_figures(tau.defined_values(), "tau_histogram", out))
    report = model.report
    return paths, {
        "params": model.params,
        "report": {"iterations": report.iterations, "residual_norm": report.residual_norm,
                   "converged": report.converged},
    }


def _cmd_sample(cfg, out):
    model = read_model(_need_path(cfg, "model_file"))
    samples = _need(cfg, "samples", int)
    seed = _need(cfg, "seed", int)
    summary = generate_ensemble(
        model, EnsembleConfig(sample_count=samples, master_seed=seed),
        compute_lambda=not cfg.get("no_spectra", False),
        threads=_threads(cfg),
    )
    paths = [out / "ensemble.json"]
    write_json(paths[0], {
        "sample_count": summary.sample_count,
        "mean_density": summary.mean_density,
        "std_density": summary.std_density,
        "mean_reciprocity": summary.mean_reciprocity,
        "std_reciprocity": summary.std_reciprocity,
        "mean_lambda_max": summary.mean_lambda_max,
        "std_lambda_max": summary.std_lambda_max,
        "densities": summary.densities,
        "reciprocities": summary.reciprocities,
        "lambda_max": summary.lambda_max,
    })
    n_write = int(cfg.get("write_networks") or 0)
    if n_write > 0:
        sample_dir = out / "samples"
        sample_dir.mkdir(exist_ok=True)
        nodes = sample_dir / "nodes.csv"
        write_nodes(nodes, [f"B{k:04d}" for k in range(model.n)])
        # keep the generating model next to its realizations so `spectra
        # --rescale` can find it without an explicit --model-file
        fitted = sample_dir / "fitted.json"
        write_model(fitted, model)
        paths.extend([nodes, fitted])
        for k in range(min(n_write, samples)):
            net = sample_network(model, derive_subseed(seed, k))
            p = sample_dir / f"sample_{k:05d}.csv"
            write_network(p, net)
            paths.append(p)
    return paths, {"mean_density": summary.mean_density,
                   "mean_lambda_max": summary.mean_lambda_max}


def _cmd_spectra(cfg, out):
    net_dir = Path(_need(cfg, "networks"))
    if not net_dir.is_dir():
        raise ConfigurationError(f"field 'networks': no such directory {net_dir}")
    nodes_path = net_dir / "nodes.csv"
    if not nodes_path.exists():
        raise ConfigurationError(f"missing {nodes_path} (needed to fix the node count)")
    labels = read_nodes(nodes_path)
    n = len(labels)
    files = sorted(p for p in net_dir.glob("*.csv") if p.name != "nodes.csv")
    if not files:
        raise ConfigurationError(f"no network files in {net_dir}")
    rescale = bool(cfg.get("rescale", False))
    model = None
    if rescale:
        model_path = cfg.get("model_file") or net_dir / "fitted.json"
        if not Path(model_path).exists():
            raise ConfigurationError(
                "rescaling needs --model-file (no fitted.json next to the networks)")
        model = read_model(model_path)
    mean_tau = tau_matrix(model).mean_tau if rescale else float("nan")

    def spectrum_of(path):
        net = read_network(path, n)
        matrix = rescale_matrix(net, model) if rescale else net.adjacency.astype(float)
        return eigenvalues(matrix)

    workers = _threads(cfg)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(spectrum_of, files))
    else:
        spectra = [spectrum_of(p) for p in files]

    rows = []
    for path, spec in zip(files, spectra):
        stem = path.stem
        for lam in spec.values:
            rows.append([stem, float(lam.real), float(lam.imag)])
    paths = [out / "spectra.csv"]
    write_csv(paths[0], ["sample_id", "re", "im"], rows)

    shape = bulk_shape(spectra, mean_tau=mean_tau)
    bulk_path = out / "bulk.json"
    write_json(bulk_path, {
        "semi_axis_re": shape.semi_axis_re,
        "semi_axis_im": shape.semi_axis_im,
        "axis_ratio": shape.axis_ratio,
        "pooled_count": shape.pooled_count,
        "mean_tau": shape.mean_tau,
    })
    paths.append(bulk_path)
    pooled = np.concatenate([s.bulk() for s in spectra])
    paths.extend(figures.emit_figures(
        (pooled, shape.mean_tau if rescale else None), "spectrum_scatter", out))
    return paths, {"axis_ratio": shape.axis_ratio, "spectra": len(files)}


def _scan_rows(result):
    rows = []
    for row in result.rows:
        rows.append([row.delta_t, row.window_count, row.skipped_windows,
                     row.mean_density, row.mean_reciprocity, row.mean_r_fdcm,
                     row.mean_rho])
    return rows


def _cmd_scan(cfg, out):
    records = parse_transactions(_need_path(cfg, "transactions"))
    year = _need(cfg, "year", int)
    delta_ts = parse_delta_ts(_need(cfg, "delta_t"))
    fitness = None
    if cfg.get("fitness"):
        fitness, _ = read_fitness_csv(_need_path(cfg, "fitness"))
    result = scan_aggregations(records, year, delta_ts, fitness=fitness,
                               solver_config=_solver_config(cfg))
    paths = [out / "rho_scan.csv", out / "rho_windows.csv", out / "scan.json"]
    write_csv(paths[0], ["delta_t", "window_count", "skipped_windows", "mean_density",
                         "mean_reciprocity", "mean_r_fdcm", "mean_rho"],
              _scan_rows(result))
    write_csv(paths[1], ["delta_t", "window_index", "density", "reciprocity",
                         "r_fdcm", "rho"],
              [[w.delta_t, w.window_index, w.density, w.reciprocity, w.r_fdcm, w.rho]
               for w in result.windows])
    landmarks = {"t_min": result.t_min, "t_0": result.t_0, "t_max": result.t_max,
                 "rho_min": result.rho_min, "rho_max": result.rho_max}
    write_json(paths[2], landmarks)
    series = [(str(year),
               [row.delta_t for row in result.rows if not row.missing],
               [row.mean_rho for row in result.rows if not row.missing])]
    paths.extend(figures.emit_figures(series, "rho_curve", out))
    return paths, landmarks


def _cmd_validate(cfg, out):
    model = read_model(_need_path(cfg, "model_file"))
    records = parse_transactions(_need_path(cfg, "transactions"))
    year = _need(cfg, "year", int)
    delta_t = _need(cfg, "delta_t", int)
    window_index = int(cfg.get("window") or 0)
    windows = build_windows(records, year, delta_t)
    if not windows:
        raise DataValidationError(f"no complete windows for year {year}, delta_t {delta_t}")
    if window_index >= len(windows):
        raise ConfigurationError(
            f"field 'window': index {window_index} out of range (have {len(windows)})")
    net = aggregate(records, windows[window_index])
    if net.n != model.n:
        raise DataValidationError(f"model has {model.n} nodes, window has {net.n}")

    arrs = dyad_probability_arrays(model)
    off = ~np.eye(net.n, dtype=bool)
    roc = roc_auc(arrs.link[off], net.adjacency[off])
    metrics = degrees_strengths(net)
    _, r_model = expected_metrics(model)
    rho_value = None
    if metrics.r is not None and np.isfinite(r_model) and r_model < 1.0:
        rho_value = rho(metrics.r, r_model)
    summary = {
        "auc": roc.auc,
        "mann_whitney_auc": mann_whitney_auc(arrs.link[off], net.adjacency[off]),
        "cross_entropy": cross_entropy(model, net),
        "density": metrics.d,
        "reciprocity": metrics.r,
        "model_reciprocity": r_model,
        "rho": rho_value,
    }
    paths = [out / "roc.csv", out / "validation.json"]
    write_csv(paths[0], ["threshold", "fpr", "tpr"],
              [[t, f, tp] for t, f, tp in zip(roc.thresholds, roc.fpr, roc.tpr)])
    write_json(paths[1], summary)
    paths.extend(figures.emit_figures(roc, "roc_curve", out))
    return paths, summary


def _cmd_report(cfg, out):
    src = Path(_need(cfg, "in"))
    if not src.is_dir():
        raise ConfigurationError(f"field 'in': no such directory {src}")
    paths = []
    spectra_csv = src / "spectra.csv"
    if spectra_csv.exists():
        with open(spectra_csv, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            eigs = np.array([complex(float(r[1]), float(r[2])) for r in reader if r])
        mean_tau = None
        bulk_json = src / "bulk.json"
        if bulk_json.exists():
            mean_tau = read_json(bulk_json).get("mean_tau")
        paths.extend(figures.emit_figures((eigs, mean_tau), "spectrum_scatter", out))
    scan_csv = src / "rho_scan.csv"
    if scan_csv.exists():
        with open(scan_csv, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            pts = [(int(r[0]), float(r[6])) for r in reader if r and int(r[1]) > 0]
        if pts:
            series = [("scan", [p[0] for p in pts], [p[1] for p in pts])]
            paths.extend(figures.emit_figures(series, "rho_curve", out))
    roc_csv = src / "roc.csv"
    if roc_csv.exists():
        with open(roc_csv, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            rows = [(float(r[1]), float(r[2])) for r in reader if r]
        roc = RocResult(thresholds=np.array([]), fpr=np.array([p[0] for p in rows]),
                        tpr=np.array([p[1] for p in rows]))
        paths.extend(figures.emit_figures(roc, "roc_curve", out))
    tau_csv = src / "tau.csv"
    if tau_csv.exists():
        with open(tau_csv, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            vals = np.array([float(r[2]) for r in reader if r])
        paths.extend(figures.emit_figures(vals, "tau_histogram", out))
    if not paths:
        print(f"report: no known artifacts found in {src}", file=sys.stderr)
    return paths, {"figures": len(paths)}


_COMMANDS = {
    "synth": _cmd_synth,
    "aggregate": _cmd_aggregate,
    "fit": _cmd_fit,
    "sample": _cmd_sample,
    "spectra": _cmd_spectra,
    "scan": _cmd_scan,
    "validate": _cmd_validate,
    "report": _cmd_report,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recon-net",
        description="Reconstruct, sample and evaluate directed financial network ensembles.",
    )
    sub = parser.add_subparsers(dest="command")

    def add(name, help_text, *specs):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file; explicit flags win")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int,
                       help="worker threads (RECON_NET_THREADS overrides)")
        for flag, kwargs in specs:
            p.add_argument(flag, **kwargs)
        return p

    add("synth", "generate synthetic fitness and transaction data",
        ("--nodes", dict(type=int)), ("--fitness-dist", dict()),
        ("--model", dict()), ("--density", dict(type=float)),
        ("--reciprocity", dict(type=float)), ("--days", dict(type=int)),
        ("--year", dict(type=int)), ("--seed", dict(type=int)),
        ("--amount-sigma", dict(type=float)))
    add("aggregate", "aggregate transactions into window snapshots",
        ("--transactions", dict()), ("--year", dict(type=int)),
        ("--delta-t", dict(type=int)))
    add("fit", "fit a model to fitness data and targets",
        ("--fitness", dict()), ("--model", dict()),
        ("--density", dict(type=float)), ("--reciprocity", dict(type=float)))
    add("sample", "sample an ensemble from a fitted model",
        ("--model-file", dict()), ("--samples", dict(type=int)),
        ("--seed", dict(type=int)), ("--write-networks", dict(type=int)),
        ("--no-spectra", dict(action="store_true", default=None)))
    add("spectra", "eigenvalue spectra of stored networks",
        ("--networks", dict()), ("--rescale", dict(action="store_true", default=None)),
        ("--model-file", dict()))
    add("scan", "reciprocity-gap scan across aggregation periods",
        ("--transactions", dict()), ("--year", dict(type=int)),
        ("--delta-t", dict()), ("--fitness", dict()))
    add("validate", "score a fitted model against an observed window",
        ("--model-file", dict()), ("--transactions", dict()),
        ("--year", dict(type=int)), ("--delta-t", dict(type=int)),
        ("--window", dict(type=int)))
    add("report", "regenerate figures from stored artifacts",
        ("--in", dict(dest="in_dir")))
    return parser


def _effective_config(args) -> dict:
    cfg = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigurationError(f"config file {path} does not exist")
        loaded = read_json(path)
        if not isinstance(loaded, dict):
            raise ConfigurationError("config file must hold a JSON object")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        cfg["in" if key == "in_dir" else key] = value
    return cfg


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def run(command: str, cfg: dict) -> int:
    """Execute one subcommand from an effective config dict."""
    if command not in _COMMANDS:
        raise ConfigurationError(f"unknown command {command!r}")
    out = _out_dir(cfg)
    start = time.perf_counter()
    paths, result = _COMMANDS[command](cfg, out)
    elapsed = time.perf_counter() - start
    manifest = {
        "command": command,
        "config": {k: v for k, v in sorted(cfg.items())},
        "version": __version__,
        "result": result,
        "outputs": [
            {"path": str(p.relative_to(out)), "sha256": _sha256(p), "bytes": p.stat().st_size}
            for p in sorted(set(paths))
        ],
        "timings": {"total_seconds": elapsed},
    }
    write_json(out / "manifest.json", manifest)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    if not args.command:
        parser.print_help()
        return 1
    try:
        return run(args.command, _effective_config(args))
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except ReconError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
