"""End-to-end experiment pipeline behind the CLI."""

from __future__ import annotations

import json
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .clustering import classical_kmeans, init_indices, kernel_matrix_kmeans, quantum_kmeans
from .config import ExperimentConfig, normalize
from .data import CsvSchema, Dataset, fit_scale, load_csv, resolve_path, select_features
from .errors import QKMeansError, StaleCacheError
from .evaluation import evaluate
from .feature_maps import theta_for
from .kernel import KernelMatrix, kernel_matrix, load_kernel, mode_label, save_kernel, to_distance

log = logging.getLogger(__name__)


class StageError(QKMeansError):
    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def stage(name):
    try:
        yield
    except StageError:
        raise
    except (QKMeansError, ValueError, OSError, KeyError) as exc:
        raise StageError(name, exc) from exc


def load_dataset(cfg: ExperimentConfig) -> tuple[Dataset, Dataset]:
    """The selected raw dataset and its scaled copy."""
    ds_cfg = cfg.dataset
    path = resolve_path(ds_cfg["path"], cfg.base_dir)
    cols = ds_cfg["feature_columns"]
    schema = CsvSchema(ds_cfg["label_column"], tuple(cols) if cols else None, ds_cfg["has_header"])
    raw = load_csv(path, schema)
    if ds_cfg["select"]:
        raw = select_features(raw, ds_cfg["select"])
    sc = ds_cfg["scaling"]
    scaled, _ = fit_scale(raw, sc["kind"], sc["lo"], sc["hi"])
    return raw, scaled


def check_compatibility(cfg: ExperimentConfig, scaled: Dataset) -> None:
    """Everything that can be rejected before any circuit is simulated."""
    if cfg.clustering["k"] > scaled.n:
        raise ValueError(f"k={cfg.clustering['k']} exceeds {scaled.n} data points")
    if cfg.algorithm != "classical":
        cfg.feature_map().check_dimension(scaled.d)


def cache_path_for(cfg: ExperimentConfig, theta_seed: int) -> Path | None:
    path = cfg.output.get("kernel_cache")
    if not path:
        return None
    path = Path(path)
    if len(cfg.theta_seeds) > 1:
        path = path.with_name(f"{path.stem}.theta{theta_seed}{path.suffix}")
    return path


def get_kernel(cfg: ExperimentConfig, scaled: Dataset, theta_seed: int,
               cache: Path | None) -> tuple[KernelMatrix, bool]:
    """Kernel for ``scaled`` under the config's map, via the cache when valid."""
    fmap = cfg.feature_map(theta_seed)
    mode = cfg.mode
    if cache is not None:
        try:
            km = load_kernel(cache, fingerprint=scaled.fingerprint, config=fmap, mode=mode)
            log.info("kernel cache hit: %s", cache)
            return km, True
        except FileNotFoundError:
            log.info("kernel cache miss: %s", cache)
        except StaleCacheError as exc:
            log.warning("stale kernel cache, recomputing: %s", exc)
    km = kernel_matrix(scaled.features, fmap, theta_for(fmap, scaled.d), mode, scaled.fingerprint)
    if cache is not None:
        save_kernel(cache, km)
        log.info("kernel cached at %s", cache)
    return km, False


def run_point(cfg: ExperimentConfig, scaled: Dataset, theta_seed: int, init_seed: int):
    cl = cfg.clustering
    if cfg.algorithm == "classical":
        return classical_kmeans(scaled.features, cl["k"], cl["t_max"], init_seed, cl["init"])
    fmap = cfg.feature_map(theta_seed)
    theta = theta_for(fmap, scaled.d)
    if cfg.algorithm == "quantum":
        return quantum_kmeans(scaled.features, cl["k"], fmap, theta, cl["t_max"], cfg.mode,
                              init_seed, cl["init"])
    km, _ = get_kernel(cfg, scaled, theta_seed, cache_path_for(cfg, theta_seed))
    start = init_indices(scaled.features, cl["k"], cl["init"], init_seed)
    return kernel_matrix_kmeans(to_distance(km), cl["k"], cl["t_max"], init_seed, start)


@dataclass
class RunRecord:
    """Everything needed to re-score or replay a run without recomputation."""

    config: dict
    config_digest: str
    dataset_fingerprint: str
    raw_fingerprint: str
    theta_seed: int
    init_seed: int
    labels: list[int]
    truth: list[int]
    trace: list[float]
    iterations: int
    converged: bool
    accuracy: float
    ari: float
    ami: float
    confusion: list[list[int]]
    runs: list[dict] = field(default_factory=list)
    class_names: list[str] = field(default_factory=list)
    feature_names: list[str] = field(default_factory=list)
    features: list[list[float]] = field(default_factory=list)
    duration_seconds: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> RunRecord:
        return cls(**json.loads(text))

    def summary(self) -> dict:
        accs = np.array([r["accuracy"] for r in self.runs])
        return {
            "best": self.accuracy,
            "mean": float(accs.mean()),
            "std": float(accs.std()),
            "min": float(accs.min()),
            "max": float(accs.max()),
        }


def run_experiment(cfg: ExperimentConfig) -> RunRecord:
    """Run every sweep point of ``cfg`` and keep the most accurate one.

    Ties keep the earliest point in sweep order (theta seeds outer, init
    seeds inner).
    """
    t0 = time.perf_counter()
    with stage("dataset"):
        raw, scaled = load_dataset(cfg)
    with stage("config"):
        check_compatibility(cfg, scaled)

    runs = []
    best = None
    for theta_seed in cfg.theta_seeds:
        for init_seed in cfg.init_seeds:
            with stage("clustering"):
                result = run_point(cfg, scaled, theta_seed, init_seed)
            with stage("evaluation"):
                rep = evaluate(result.labels, scaled.labels, scaled.n_classes)
            runs.append({
                "theta_seed": theta_seed,
                "init_seed": init_seed,
                "accuracy": rep.accuracy,
                "ari": rep.ari,
                "ami": rep.ami,
                "iterations": result.iterations_run,
                "converged": result.converged,
            })
            log.info("theta_seed=%d init_seed=%d accuracy=%.4f", theta_seed, init_seed, rep.accuracy)
            if best is None or rep.accuracy > best[2].accuracy:
                best = (theta_seed, init_seed, rep, result)

    theta_seed, init_seed, rep, result = best
    return RunRecord(
        config=cfg.to_dict(),
        config_digest=cfg.digest(),
        dataset_fingerprint=scaled.fingerprint,
        raw_fingerprint=raw.fingerprint,
        theta_seed=theta_seed,
        init_seed=init_seed,
        labels=[int(v) for v in result.labels],
        truth=[int(v) for v in scaled.labels],
        trace=[float(v) for v in result.similarity_trace],
        iterations=result.iterations_run,
        converged=bool(result.converged),
        accuracy=rep.accuracy,
        ari=rep.ari,
        ami=rep.ami,
        confusion=rep.confusion.tolist(),
        runs=runs,
        class_names=list(scaled.class_names),
        feature_names=list(scaled.feature_names),
        features=raw.features.tolist(),
        duration_seconds=time.perf_counter() - t0,
    )


def replay(record: RunRecord, base_dir: Path | None = None) -> np.ndarray:
    """Re-run the best sweep point of ``record`` and return its labels."""
    cfg = normalize(record.config, base_dir=base_dir)
    _, scaled = load_dataset(cfg)
    return run_point(cfg, scaled, record.theta_seed, record.init_seed).labels


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def results_lines(record: RunRecord) -> list[str]:
    """Flat ``key=value`` lines; wall-clock time is left out on purpose."""
    cfg = record.config
    lines = [
        ("name", cfg["name"]),
        ("config.digest", record.config_digest),
        ("dataset.fingerprint", record.dataset_fingerprint),
        ("dataset.raw_fingerprint", record.raw_fingerprint),
        ("dataset.n", len(record.truth)),
        ("dataset.classes", len(record.class_names)),
        ("algorithm", cfg["clustering"]["algorithm"]),
        ("map", cfg["map"]["map"] if "map" in cfg else "none"),
        ("mode", mode_label(normalize(cfg).mode)),
        ("k", cfg["clustering"]["k"]),
        ("best.theta_seed", record.theta_seed),
        ("best.init_seed", record.init_seed),
        ("best.accuracy", record.accuracy),
        ("best.ari", record.ari),
        ("best.ami", record.ami),
        ("best.iterations", record.iterations),
        ("best.converged", record.converged),
    ]
    for key, val in record.summary().items():
        lines.append((f"sweep.accuracy.{key}", float(val)))
    lines.append(("sweep.points", len(record.runs)))
    for t, row in enumerate(record.confusion):
        for p, count in enumerate(row):
            lines.append((f"confusion.{t}.{p}", count))
    for i, run in enumerate(record.runs):
        for key in ("theta_seed", "init_seed", "accuracy", "ari", "ami", "iterations", "converged"):
            lines.append((f"run.{i}.{key}", run[key]))
    return [f"{k}={_fmt(v)}" for k, v in lines]


def report_text(record: RunRecord) -> str:
    s = record.summary()
    cfg = record.config
    out = [
        f"experiment: {cfg['name']}",
        f"algorithm:  {cfg['clustering']['algorithm']}"
        + (f" ({cfg['map']['map']}, {cfg['map']['qubits']} qubits)" if "map" in cfg else ""),
        f"sweep:      {len(record.runs)} point(s); accuracy best {s['best']:.4f} "
        f"mean {s['mean']:.4f} std {s['std']:.4f}",
        f"best run:   theta_seed={record.theta_seed} init_seed={record.init_seed} "
        f"iterations={record.iterations} converged={record.converged}",
        f"accuracy:   {record.accuracy:.4f}",
        f"ARI:        {record.ari:.4f}",
        f"AMI:        {record.ami:.4f}",
        "confusion (rows = truth, columns = predicted):",
    ]
    width = max(len(c) for c in record.class_names)
    out.append(" " * (width + 2) + " ".join(f"{c[:8]:>8}" for c in record.class_names))
    for name, row in zip(record.class_names, record.confusion):
        out.append(f"{name:>{width}}  " + " ".join(f"{v:>8d}" for v in row))
    return "\n".join(out) + "\n"


def write_outputs(record: RunRecord, out_dir: Path) -> dict[str, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out_dir / "report.txt",
        "results": out_dir / "results.txt",
        "record": out_dir / "record.json",
    }
    paths["report"].write_text(report_text(record), encoding="utf-8")
    paths["results"].write_text("\n".join(results_lines(record)) + "\n", encoding="utf-8")
    paths["record"].write_text(record.to_json() + "\n", encoding="utf-8")
    return paths
