"""Pipeline runners and report serialization for the CLI.

A run configuration names exactly one data source (a libSVM or dataset-CSV
file, an explicit weight-matrix CSV, or a generator spec string), the
clustering parameters, and the embedding mode.  Runners return ExperimentRow
records; writers emit a versioned CSV schema or its JSON mirror.  Timing is a
monotonic clock around the embedding computation only (the weight matrix is
considered given); k-means time is reported separately.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import clustering as clst
from . import dataio, graph, spectral
from .errors import GapError, ParameterError, ParseError

CSV_SCHEMA = "speclust-rows v1"
CSV_COLUMNS = [
    "dataset",
    "mode",
    "p",
    "embed_seconds",
    "embed_seconds_norm",
    "kmeans_seconds",
    "nmi",
    "objective",
    "gap",
    "proj_dist",
]


@dataclass
class RunConfig:
    """One pipeline invocation; exactly one of the three sources must be set."""

    dataset_path: str | None = None
    w_path: str | None = None
    gen_spec: str | None = None
    k: int = 2
    mode: str = "exact"  # "exact" | "power"
    p: int | None = None
    auto_p: bool = False
    epsilon: float | None = None
    delta: float | None = None
    sigma: float | None = None  # None selects self-tuning bandwidth
    self_tuning_l: int = 7
    replicates: int = 10
    max_iter: int = 100
    seed: int = 0
    with_exact: bool = False

    def __post_init__(self):
        sources = [s for s in (self.dataset_path, self.w_path, self.gen_spec) if s]
        if len(sources) != 1:
            raise ParameterError(
                "exactly one data source is required (--dataset, --dataset-w or --gen)"
            )
        if self.mode not in ("exact", "power"):
            raise ParameterError(f"mode must be 'exact' or 'power', got {self.mode!r}")
        if self.auto_p:
            if self.mode != "power":
                raise ParameterError("automatic p selection needs power mode")
            if self.epsilon is None or self.delta is None:
                raise ParameterError("automatic p selection needs --epsilon and --delta")
            if not (0.0 < self.epsilon < 1.0) or not (0.0 < self.delta < 1.0):
                raise ParameterError("epsilon and delta must lie in (0, 1)")


@dataclass
class ExperimentRow:
    dataset: str
    mode: str
    p: int | None
    embed_seconds: float
    kmeans_seconds: float
    nmi: float | None
    objective: float
    gap: float | None
    proj_dist: float | None
    embed_seconds_norm: float | None = None

    def as_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "mode": self.mode,
            "p": self.p,
            "embed_seconds": self.embed_seconds,
            "embed_seconds_norm": self.embed_seconds_norm,
            "kmeans_seconds": self.kmeans_seconds,
            "nmi": self.nmi,
            "objective": self.objective,
            "gap": self.gap,
            "proj_dist": self.proj_dist,
        }


@dataclass
class LoadedSource:
    """Graph input plus optional ground truth, ready for embedding."""

    name: str
    g: graph.SimilarityGraph
    truth: clst.Clustering | None = None
    points: np.ndarray | None = field(default=None, repr=False)


def parse_gen_spec(spec: str, seed: int):
    """Parse generator strings like `rings:n_per_ring=200,r_inner=1,...`.

    Known generators: rings (n_per_ring, r_inner, r_outer, noise_sd),
    blobs (k, n_per_blob, d, separation), sbm (sizes=a+b+..., p_in, p_out,
    jitter).  Returns (name, Dataset or weight matrix, truth labels).
    """
    name, sep, rest = spec.partition(":")
    params: dict[str, str] = {}
    if sep:
        for item in rest.split(","):
            if not item:
                continue
            key, eq, value = item.partition("=")
            if not eq:
                raise ParseError(f"generator parameter {item!r} is not key=value")
            params[key.strip()] = value.strip()

    def pop_float(key, default=None):
        if key in params:
            return float(params.pop(key))
        if default is None:
            raise ParseError(f"generator {name!r} needs parameter {key!r}")
        return default

    def pop_int(key, default=None):
        return int(pop_float(key, default))

    if name == "rings":
        ds = dataio.gen_two_rings(
            n_per_ring=pop_int("n_per_ring", 200),
            r_inner=pop_float("r_inner", 1.0),
            r_outer=pop_float("r_outer", 3.0),
            noise_sd=pop_float("noise_sd", 0.1),
            seed=seed,
        )
    elif name == "blobs":
        ds = dataio.gen_blobs(
            k=pop_int("k", 2),
            n_per_blob=pop_int("n_per_blob", 100),
            d=pop_int("d", 2),
            separation=pop_float("separation", 10.0),
            seed=seed,
        )
    elif name == "sbm":
        sizes_s = params.pop("sizes", "100+100")
        try:
            sizes = [int(s) for s in sizes_s.split("+")]
        except ValueError:
            raise ParseError(f"bad sbm sizes {sizes_s!r}; use e.g. 100+100") from None
        w = dataio.gen_sbm(
            sizes=sizes,
            p_in=pop_float("p_in", 0.9),
            p_out=pop_float("p_out", 0.05),
            seed=seed,
            jitter=pop_float("jitter", 0.0),
        )
        if params:
            raise ParseError(f"unknown sbm parameters: {sorted(params)}")
        return "sbm", w, dataio.sbm_labels(sizes)
    else:
        raise ParseError(f"unknown generator {name!r} (rings, blobs or sbm)")
    if params:
        raise ParseError(f"unknown {name} parameters: {sorted(params)}")
    return name, ds, ds.labels


def _bandwidth(cfg: RunConfig) -> graph.SigmaMode:
    if cfg.sigma is not None:
        return graph.FixedBandwidth(cfg.sigma)
    return graph.SelfTuningBandwidth(cfg.self_tuning_l)


def load_source(cfg: RunConfig) -> LoadedSource:
    if cfg.gen_spec:
        name, data, labels = parse_gen_spec(cfg.gen_spec, cfg.seed)
        if isinstance(data, dataio.Dataset):
            w = graph.build_similarity(data.points, _bandwidth(cfg))
            g = graph.build_graph(w)
            points = data.points
        else:
            g = graph.build_graph(data)
            points = None
        truth = clst.Clustering(labels=labels, k=int(labels.max()) + 1)
        return LoadedSource(name=name, g=g, truth=truth, points=points)
    if cfg.w_path:
        with open(cfg.w_path) as fh:
            w = dataio.read_square_csv(fh.read())
        return LoadedSource(name=cfg.w_path, g=graph.build_graph(w))
    with open(cfg.dataset_path) as fh:
        text = fh.read()
    if cfg.dataset_path.endswith(".csv"):
        ds = dataio.read_dataset_csv(text)
    else:
        ds = dataio.parse_libsvm(text, name=cfg.dataset_path)
    w = graph.build_similarity(ds.points, _bandwidth(cfg))
    truth = clst.Clustering(labels=ds.labels, k=ds.n_classes)
    return LoadedSource(
        name=ds.name, g=graph.build_graph(w), truth=truth, points=ds.points
    )


def _embed(source: LoadedSource, cfg: RunConfig, p: int | None):
    """Timed embedding step; returns (embedding, seconds, gap or None)."""
    g = source.g
    gap_value = None
    if cfg.mode == "exact":
        t0 = time.perf_counter()
        emb = spectral.exact_embedding(g, cfg.k)
        seconds = time.perf_counter() - t0
        gap_value = spectral.eigen_gap(g, cfg.k).gap
        return emb, seconds, gap_value
    if p is None:  # auto
        report = spectral.eigen_gap(g, cfg.k)
        if not report.gap_is_infinite and report.gap <= 1.0:
            raise GapError(
                f"eigen-gap at k={cfg.k} is {report.gap:.6g} <= 1; automatic p "
                f"selection is impossible -- pick a larger k whose gap exceeds 1"
            )
        p = spectral.required_iterations(
            g.n, cfg.k, cfg.epsilon, cfg.delta, report.gap
        )
        gap_value = report.gap
    t0 = time.perf_counter()
    emb = spectral.power_embedding(g, cfg.k, p, cfg.seed)
    seconds = time.perf_counter() - t0
    return emb, seconds, gap_value


def run_cluster(cfg: RunConfig) -> tuple[ExperimentRow, np.ndarray]:
    """Full pipeline: load, embed (timed), cluster (timed), score."""
    if cfg.mode == "power" and not cfg.auto_p and cfg.p is None:
        raise ParameterError("power mode needs --p or --auto-p")
    source = load_source(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        emb, embed_seconds, gap_value = _embed(
            source, cfg, None if cfg.auto_p else cfg.p
        )
        t0 = time.perf_counter()
        km = clst.lloyd_kmeans(
            emb.y,
            cfg.k,
            replicates=cfg.replicates,
            max_iter=cfg.max_iter,
            seed=cfg.seed,
        )
        kmeans_seconds = time.perf_counter() - t0
        proj = None
        if cfg.mode == "power" and cfg.with_exact:
            exact = spectral.exact_embedding(source.g, cfg.k)
            proj = spectral.projection_distance(exact, emb)
            if gap_value is None:
                gap_value = spectral.eigen_gap(source.g, cfg.k).gap
    score = None
    if source.truth is not None:
        score = clst.nmi(km.clustering, source.truth)
    row = ExperimentRow(
        dataset=source.name,
        mode=cfg.mode,
        p=emb.p,
        embed_seconds=embed_seconds,
        kmeans_seconds=kmeans_seconds,
        nmi=score,
        objective=km.objective,
        gap=gap_value,
        proj_dist=proj,
    )
    return row, km.clustering.labels


def run_sweep(cfg: RunConfig, p_max: int) -> list[ExperimentRow]:
    """One power-mode row per p in [0, p_max], with p=0-normalized times."""
    if p_max < 0:
        raise ParameterError("p_max must be nonnegative")
    if cfg.mode != "power":
        raise ParameterError("sweep runs in power mode only")
    source = load_source(cfg)
    rows: list[ExperimentRow] = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        exact = None
        gap_value = None
        if cfg.with_exact:
            exact = spectral.exact_embedding(source.g, cfg.k)
            gap_value = spectral.eigen_gap(source.g, cfg.k).gap
        for p in range(p_max + 1):
            t0 = time.perf_counter()
            emb = spectral.power_embedding(source.g, cfg.k, p, cfg.seed)
            embed_seconds = time.perf_counter() - t0
            t0 = time.perf_counter()
            km = clst.lloyd_kmeans(
                emb.y,
                cfg.k,
                replicates=cfg.replicates,
                max_iter=cfg.max_iter,
                seed=cfg.seed,
            )
            kmeans_seconds = time.perf_counter() - t0
            score = None
            if source.truth is not None:
                score = clst.nmi(km.clustering, source.truth)
            proj = None
            if exact is not None:
                proj = spectral.projection_distance(exact, emb)
            rows.append(
                ExperimentRow(
                    dataset=source.name,
                    mode="power",
                    p=p,
                    embed_seconds=embed_seconds,
                    kmeans_seconds=kmeans_seconds,
                    nmi=score,
                    objective=km.objective,
                    gap=gap_value,
                    proj_dist=proj,
                )
            )
    base = rows[0].embed_seconds
    for row in rows:
        row.embed_seconds_norm = row.embed_seconds / base if base > 0 else None
    return rows


def run_bound_check(
    cfg: RunConfig,
    trials: int,
    check: str = "projection",
    p_override: int | None = None,
) -> dict:
    """Repeated bound trials with per-trial reports and a pass-rate summary."""
    if trials < 1:
        raise ParameterError("trials must be positive")
    if check not in ("projection", "kmeans"):
        raise ParameterError("check must be 'projection' or 'kmeans'")
    if cfg.epsilon is None or cfg.delta is None:
        raise ParameterError("bound checks need --epsilon and --delta")
    source = load_source(cfg)
    master = dataio.RngStream(cfg.seed)
    reports = []
    for t in range(trials):
        trial_seed = master.child(t).seed
        if check == "projection":
            rep = spectral.check_projection_bound(
                source.g, cfg.k, cfg.epsilon, cfg.delta, trial_seed, p_override
            )
        else:
            rep = spectral.check_kmeans_bound(
                source.g, cfg.k, cfg.epsilon, cfg.delta, trial_seed, p_override
            )
        reports.append(rep)
    projection_passes = sum(1 for r in reports if r.projection_ok)
    summary = {
        "schema": "speclust-bound-check v1",
        "dataset": source.name,
        "check": check,
        "k": cfg.k,
        "epsilon": cfg.epsilon,
        "delta": cfg.delta,
        "trials": trials,
        "projection_passes": projection_passes,
        "projection_pass_rate": projection_passes / trials,
        "reports": [
            {
                "epsilon": r.epsilon,
                "delta": r.delta,
                "p_required": r.p_required,
                "p_used": r.p_used,
                "proj_dist": r.proj_dist,
                "projection_ok": r.projection_ok,
                "kmeans_lhs": r.kmeans_lhs,
                "kmeans_rhs": r.kmeans_rhs,
                "kmeans_ok": r.kmeans_ok,
                "oracle": r.oracle,
            }
            for r in reports
        ],
    }
    if check == "kmeans":
        judged = [r for r in reports if r.projection_ok]
        summary["kmeans_judged"] = len(judged)
        summary["kmeans_passes"] = sum(1 for r in judged if r.kmeans_ok)
    return summary


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def rows_to_csv(rows: list[ExperimentRow]) -> str:
    lines = [f"# {CSV_SCHEMA}", ",".join(CSV_COLUMNS)]
    for row in rows:
        record = row.as_dict()
        lines.append(",".join(_format_cell(record[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def rows_to_json(rows: list[ExperimentRow]) -> str:
    return json.dumps(
        {"schema": CSV_SCHEMA, "rows": [r.as_dict() for r in rows]}, indent=2
    ) + "\n"


def curve_rows(x_min: float, x_max: float, steps: int) -> list[tuple[float, float]]:
    """Sample the iteration-count curve at steps+1 evenly spaced points."""
    if not (0.0 <= x_min < x_max < 0.5):
        raise ParameterError("need 0 <= x_min < x_max < 0.5")
    if steps < 1:
        raise ParameterError("steps must be >= 1")
    xs = [x_min + (x_max - x_min) * i / steps for i in range(steps + 1)]
    return spectral.iteration_curve(xs)


def curve_to_csv(rows: list[tuple[float, float]]) -> str:
    lines = ["# speclust-curve v1", "x,f_x"]
    for x, fx in rows:
        lines.append(f"{float(x)!r},{float(fx)!r}")
    return "\n".join(lines) + "\n"
