"""Command-line driver.

    qkmeans run <config> [--out DIR] [--seed N] [--shots S] [--kernel-cache PATH]
    qkmeans compare <config> <config> ... [--out DIR]
    qkmeans kernel <config> [--kernel-cache PATH]
    qkmeans plot <record.json> [--out DIR]
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .config import load_config
from .errors import InvalidArgumentError, QKMeansError, SchemaError
from .evaluation import aligned_predictions, majority_vote
from .experiment import (
    RunRecord,
    StageError,
    check_compatibility,
    get_kernel,
    load_dataset,
    run_experiment,
    stage,
    write_outputs,
)
from .plotting import confusion_svg, confusion_tsv, scatter_svg, scatter_tsv

log = logging.getLogger("qkmeans")


def _config(args, path):
    with stage("config"):
        cfg = load_config(path)
    return cfg.with_overrides(
        seed=getattr(args, "seed", None),
        shots=getattr(args, "shots", None),
        kernel_cache=getattr(args, "kernel_cache", None),
        out=getattr(args, "out", None),
    )


def _out_dir(cfg, fallback):
    return Path(cfg.output.get("dir") or fallback)


def cmd_run(args) -> int:
    cfg = _config(args, args.config)
    record = run_experiment(cfg)
    out = _out_dir(cfg, Path("runs") / cfg.name)
    with stage("output"):
        paths = write_outputs(record, out)
    sys.stdout.write(paths["report"].read_text(encoding="utf-8"))
    log.info("wrote %s", ", ".join(str(p) for p in paths.values()))
    return 0


def compare_rows(records):
    """Best-run rows sorted by accuracy, then ARI, then AMI, all descending."""
    rows = []
    for rec in records:
        cfg = rec.config
        rows.append({
            "name": cfg["name"],
            "algorithm": cfg["clustering"]["algorithm"],
            "map": cfg["map"]["map"] if "map" in cfg else "none",
            "qubits": cfg["map"]["qubits"] if "map" in cfg else 0,
            "accuracy": rec.accuracy,
            "ari": rec.ari,
            "ami": rec.ami,
            "theta_seed": rec.theta_seed,
            "init_seed": rec.init_seed,
        })
    rows.sort(key=lambda r: (-r["accuracy"], -r["ari"], -r["ami"], r["name"]))
    return rows


COMPARE_COLUMNS = ("name", "algorithm", "map", "qubits", "accuracy", "ari", "ami",
                   "theta_seed", "init_seed")


def compare_table(rows) -> str:
    lines = ["\t".join(COMPARE_COLUMNS)]
    for r in rows:
        cells = []
        for c in COMPARE_COLUMNS:
            v = r[c]
            cells.append(f"{v:.4f}" if isinstance(v, float) else str(v))
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def cmd_compare(args) -> int:
    if len(args.configs) < 2:
        raise StageError("config", InvalidArgumentError("compare needs at least two configs"))
    cfgs = [_config(args, p).with_overrides(out=None) for p in args.configs]
    records = [run_experiment(c) for c in cfgs]
    prints = {r.raw_fingerprint for r in records}
    if len(prints) != 1:
        raise StageError("compare", InvalidArgumentError(
            "configs use different datasets: " + ", ".join(
                f"{r.config['name']}={r.raw_fingerprint[:12]}" for r in records)
        ))
    table = compare_table(compare_rows(records))
    sys.stdout.write(table)
    if args.out:
        out = Path(args.out)
        with stage("output"):
            out.mkdir(parents=True, exist_ok=True)
            (out / "compare.tsv").write_text(table, encoding="utf-8")
    return 0


def cmd_kernel(args) -> int:
    cfg = _config(args, args.config)
    if cfg.algorithm == "classical":
        raise StageError("config", SchemaError("kernel needs a config with a map block"))
    with stage("dataset"):
        _, scaled = load_dataset(cfg)
    with stage("config"):
        check_compatibility(cfg, scaled)
    cache = cfg.output.get("kernel_cache") or (_out_dir(cfg, Path("runs") / cfg.name) / "kernel.bin")
    theta_seed = cfg.theta_seeds[0]
    with stage("kernel"):
        km, hit = get_kernel(cfg, scaled, theta_seed, Path(cache))
    v = km.values
    off = v[~np.eye(km.n, dtype=bool)]
    sys.stdout.write(
        f"kernel: {km.n}x{km.n} map={km.map_config.map_kind} theta_seed={theta_seed} "
        f"cache={'hit' if hit else 'miss'} path={cache}\n"
        f"off-diagonal min={off.min() if off.size else float('nan'):.6f} "
        f"mean={off.mean() if off.size else float('nan'):.6f} "
        f"max={off.max() if off.size else float('nan'):.6f}\n"
        f"symmetric={bool(np.array_equal(v, v.T))} "
        f"diagonal_max_dev={float(np.abs(np.diag(v) - 1).max()):.3e}\n"
    )
    return 0


def cmd_plot(args) -> int:
    path = Path(args.record)
    with stage("plot"):
        if not path.exists():
            raise FileNotFoundError(f"no run record at {path}")
        rec = RunRecord.from_json(path.read_text(encoding="utf-8"))
        out = Path(args.out) if args.out else path.parent
        out.mkdir(parents=True, exist_ok=True)
        pair = rec.config.get("output", {}).get("plot_features") or [0, 1]
        if len(rec.feature_names) < 2:
            pair = [0, 0]
        pair = [min(p, len(rec.feature_names) - 1) for p in pair[:2]]
        alignment = majority_vote(rec.labels, rec.truth)
        predicted = aligned_predictions(rec.labels, alignment)
        name = rec.config["name"]
        files = {
            "confusion.svg": confusion_svg(rec.confusion, rec.class_names, f"Confusion matrix: {name}"),
            "confusion.tsv": confusion_tsv(rec.confusion, rec.class_names),
            "scatter.svg": scatter_svg(rec.features, rec.truth, predicted, pair,
                                       rec.feature_names, rec.class_names,
                                       title=f"Ground truth and predicted labels: {name}"),
            "scatter.tsv": scatter_tsv(rec.features, rec.truth, predicted, pair, rec.feature_names),
        }
        for fname, text in files.items():
            (out / fname).write_text(text, encoding="utf-8")
    sys.stdout.write("".join(f"{out / f}\n" for f in files))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qkmeans", description=__doc__.split("\n")[0] or None)
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--backend", choices=sorted(_kernels.BACKENDS),
                   help="statevector kernel backend (default: compiled when available)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seeds=True):
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--kernel-cache", dest="kernel_cache", help="kernel cache file")
        if seeds:
            sp.add_argument("--seed", type=int, help="single init seed, replaces the sweep")
            sp.add_argument("--shots", type=int, help="use shot-sampled fidelities with S shots")

    sp = sub.add_parser("run", help="run one experiment config")
    sp.add_argument("config")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("compare", help="run several configs and tabulate their best runs")
    sp.add_argument("configs", nargs="+")
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("kernel", help="compute and cache the full kernel matrix")
    sp.add_argument("config")
    common(sp)
    sp.set_defaults(func=cmd_kernel)

    sp = sub.add_parser("plot", help="render SVG figures from a run record")
    sp.add_argument("record")
    sp.add_argument("--out", help="output directory (default: next to the record)")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.backend:
        _kernels.set_backend(args.backend)
    try:
        return args.func(args)
    except StageError as exc:
        log.error("%s", exc)
        return 2 if exc.stage == "config" else 1
    except QKMeansError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
