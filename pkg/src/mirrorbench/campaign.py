"""Directory-per-campaign pipeline: generate, compile, mirror, simulate, analyze, report.

Every stage reads the artifacts persisted by the stages before it, so any
suffix of the pipeline can be replayed from disk.  Seeds derive from the
root seed and the ``(n, d, circuit, stage)`` coordinates of each item.
"""
from __future__ import annotations

import hashlib
import json
import os
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .analysis import (
    IllConditionedError,
    PolarizationEstimate,
    QV_THRESHOLD,
    UndefinedRescaling,
    average_polarization,
    estimate_fidelity,
    heavy_output_probability,
    heavy_output_set,
    normalized_classical_fidelity,
    observed_polarization,
    qv_decision,
    rescale_hop_per_circuit,
    rescale_hop_standard,
    volumetric_fit,
    write_volumetric_csv,
)
from .circuit import Circuit, statevector_of, unitary_of
from .compiler import CompilationError, CompiledCircuit, ConnectivityGraph, compile_exact, external_preprocess
from .generators import CircuitShape, generate
from .mirror import MIRROR_KINDS, MirrorSuite, build_suite, make_reference
from .sim import ErrorModel, ErrorModelError, OutcomeCounts, exact_polarization, simulate_counts
from .sim.simulator import POLARIZATION_ORACLE_LIMIT

STAGES = ("generate", "compile", "mirror", "simulate", "analyze", "report")
FAMILIES = ("qv", "grid", "line", "hamsim")
MANIFEST = "manifest.json"
MANIFEST_VERSION = 1

# Config fields each stage depends on, in addition to everything upstream.
_STAGE_FIELDS = {
    "generate": ("family", "shapes", "circuits_per_shape", "seed", "family_options"),
    "compile": ("graph", "dd", "random_placement", "preprocessor"),
    "mirror": ("k", "perm_trick"),
    "simulate": ("shots", "error_model", "method", "heavy_output", "classical"),
    "analyze": ("oracle", "bootstrap_resamples", "confidence", "fill_shapes", "width_fallback_above", "fallback_depths"),
    "report": (),
}


class ConfigError(ValueError):
    """Invalid or inconsistent campaign configuration."""


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class CampaignConfig:
    family: str = "qv"
    shapes: tuple[tuple[int, int], ...] = ((3, 3),)
    circuits_per_shape: int = 10
    k: tuple[int, int, int] = (50, 50, 50)
    shots: int = 1000
    error_model: str | dict | None = None
    graph: str = "heavy-hexagon"
    seed: int = 0
    stage_seeds: dict[str, int] = field(default_factory=dict)
    output_dir: str = "campaign"
    perm_trick: bool = True
    dd: bool = False
    random_placement: bool = False
    preprocessor: tuple[str, ...] | None = None
    method: str = "auto"
    heavy_output: bool | None = None
    classical: bool | None = None
    oracle: bool = True
    bootstrap_resamples: int = 1000
    confidence: float = 0.95
    fill_shapes: tuple[tuple[int, int], ...] = ()
    width_fallback_above: int = 6
    fallback_depths: tuple[int, ...] = (1,)
    family_options: dict[str, Any] = field(default_factory=dict)
    base_dir: str = field(default=".", compare=False)

    def __post_init__(self) -> None:
        norm = object.__setattr__
        norm(self, "shapes", tuple(tuple(int(v) for v in s) for s in self.shapes))
        norm(self, "fill_shapes", tuple(tuple(int(v) for v in s) for s in self.fill_shapes))
        norm(self, "k", tuple(int(v) for v in self.k))
        norm(self, "fallback_depths", tuple(int(v) for v in self.fallback_depths))
        norm(self, "stage_seeds", {str(a): int(b) for a, b in dict(self.stage_seeds).items()})
        if self.preprocessor is not None:
            norm(self, "preprocessor", tuple(str(a) for a in self.preprocessor))
        if self.heavy_output is None:
            norm(self, "heavy_output", self.family == "qv")
        if self.classical is None:
            norm(self, "classical", self.family == "hamsim")

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not self.shapes:
            raise ConfigError("shapes must be nonempty")
        for s in self.shapes + self.fill_shapes:
            if len(s) != 2 or min(s) < 1:
                raise ConfigError(f"invalid shape {s}")
        if self.circuits_per_shape < 1 or self.shots < 1:
            raise ConfigError("circuits_per_shape and shots must be positive")
        if len(self.k) != 3 or min(self.k) < 1:
            raise ConfigError("k must hold three positive counts")
        if set(self.stage_seeds) - set(STAGES):
            raise ConfigError(f"unknown stages in stage_seeds: {sorted(set(self.stage_seeds) - set(STAGES))}")
        if self.method not in ("auto", "exact", "trajectory"):
            raise ConfigError(f"unknown simulation method {self.method!r}")
        if not 0 < self.confidence < 1:
            raise ConfigError("confidence must lie in (0, 1)")
        if self.bootstrap_resamples < 0:
            raise ConfigError("bootstrap_resamples must be nonnegative")
        try:
            for n in sorted({s[0] for s in self.shapes}):
                ConnectivityGraph.from_name(self.graph, n)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"graph: {exc}") from exc
        self.resolve_error_model()

    def resolve_error_model(self) -> ErrorModel:
        em = self.error_model
        try:
            if em is None:
                return ErrorModel()
            if isinstance(em, dict):
                return ErrorModel.from_json(em)
            path = Path(em)
            if not path.is_absolute():
                path = Path(self.base_dir) / path
            if not path.is_file():
                raise ConfigError(f"error-model file not found: {path}")
            return ErrorModel.load(path)
        except (ErrorModelError, TypeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"error model: {exc}") from exc

    def stage_seed(self, stage: str) -> int:
        return self.stage_seeds.get(stage, self.seed)

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("base_dir")
        d["shapes"] = [list(s) for s in self.shapes]
        d["fill_shapes"] = [list(s) for s in self.fill_shapes]
        d["k"] = list(self.k)
        d["fallback_depths"] = list(self.fallback_depths)
        d["preprocessor"] = list(self.preprocessor) if self.preprocessor is not None else None
        return d

    @classmethod
    def from_json(cls, d: dict[str, Any], base_dir: str | Path = ".") -> CampaignConfig:
        known = {f.name for f in fields(cls)} - {"base_dir"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**d, base_dir=str(base_dir))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> CampaignConfig:
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_json(data, path.parent)

    def with_overrides(self, **kw: Any) -> CampaignConfig:
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


def _canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def stage_hash(cfg: CampaignConfig, stage: str) -> str:
    """Hash of every config field that ``stage`` or its upstream depends on."""
    d = cfg.to_json()
    d["error_model"] = cfg.resolve_error_model().to_json()
    sub: dict[str, Any] = {}
    for s in STAGES[: STAGES.index(stage) + 1]:
        for name in _STAGE_FIELDS[s]:
            sub[name] = d[name]
        if s in cfg.stage_seeds:
            sub[f"seed:{s}"] = cfg.stage_seeds[s]
    return hashlib.sha256(_canonical(sub).encode()).hexdigest()[:16]


def config_hash(cfg: CampaignConfig) -> str:
    return stage_hash(cfg, STAGES[-1])


def item_seed(cfg: CampaignConfig, stage: str, n: int, d: int, j: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(cfg.stage_seed(stage), spawn_key=(n, d, j, STAGES.index(stage)))


def int_seed(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _shape_dir(n: int, d: int) -> str:
    return f"n{n}_d{d}"


def _items(cfg: CampaignConfig) -> list[tuple[int, int, int]]:
    return [(n, d, j) for n, d in cfg.shapes for j in range(cfg.circuits_per_shape)]


def _item_path(kind: str, n: int, d: int, j: int, suffix: str = ".json") -> str:
    return f"{kind}/{_shape_dir(n, d)}/c{j:04d}{suffix}"


# -- manifest -----------------------------------------------------------------


def read_manifest(root: Path) -> dict[str, Any]:
    path = root / MANIFEST
    if not path.is_file():
        raise StageError("replay", f"no campaign manifest in {root}")
    return json.loads(path.read_text())


def _write_manifest(root: Path, manifest: dict[str, Any]) -> None:
    (root / MANIFEST).write_text(_dumps(manifest))


def _open_manifest(root: Path) -> dict[str, Any]:
    path = root / MANIFEST
    if path.is_file():
        return json.loads(path.read_text())
    return {"version": MANIFEST_VERSION, "stages": {}}


# -- per-item workers (top level so process pools can pickle them) -----------


def _persisted_config(cfg: CampaignConfig) -> dict[str, Any]:
    """Config as stored in the manifest; file references become absolute."""
    d = cfg.to_json()
    em = cfg.error_model
    if isinstance(em, str) and not Path(em).is_absolute():
        d["error_model"] = str((Path(cfg.base_dir) / em).resolve())
    return d


def _cfg_from(payload: dict[str, Any]) -> CampaignConfig:
    return CampaignConfig.from_json(payload["config"], payload["base_dir"])


def _generate_one(payload: dict[str, Any], n: int, d: int, j: int) -> str:
    cfg = _cfg_from(payload)
    root = Path(payload["root"])
    seed = int_seed(item_seed(cfg, "generate", n, d, j))
    c = generate(cfg.family, CircuitShape(n, d), seed, **cfg.family_options)
    c = c.with_metadata(
        seed=seed, family=cfg.family, shape=[n, d], index=j, config_hash=payload["hash"]
    )
    rel = _item_path("circuits", n, d, j)
    (root / rel).parent.mkdir(parents=True, exist_ok=True)
    c.dump(root / rel)
    return rel


def _compile_one(payload: dict[str, Any], n: int, d: int, j: int) -> str:
    cfg = _cfg_from(payload)
    root = Path(payload["root"])
    c = Circuit.load(root / _item_path("circuits", n, d, j))
    graph = ConnectivityGraph.from_name(cfg.graph, n)
    seed = int_seed(item_seed(cfg, "compile", n, d, j))
    if cfg.preprocessor:
        cc = external_preprocess(c, root / "exchange", list(cfg.preprocessor), graph=graph)
    else:
        rng = np.random.default_rng(seed)
        cc = compile_exact(c, graph, rng, random_placement=cfg.random_placement, dd=cfg.dd)
    cc = replace(cc, circuit=cc.circuit.with_metadata(seed=seed, source=_item_path("circuits", n, d, j), config_hash=payload["hash"]))
    rel = _item_path("compiled", n, d, j)
    (root / rel).parent.mkdir(parents=True, exist_ok=True)
    cc.dump(root / rel)
    return rel


def _mirror_one(payload: dict[str, Any], n: int, d: int, j: int) -> str:
    cfg = _cfg_from(payload)
    root = Path(payload["root"])
    c = Circuit.load(root / _item_path("circuits", n, d, j))
    cc = CompiledCircuit.load(root / _item_path("compiled", n, d, j))
    graph = ConnectivityGraph.from_name(cc.connectivity, n)
    seed = int_seed(item_seed(cfg, "mirror", n, d, j))
    ref = make_reference(c, cc, graph, perm_trick=cfg.perm_trick)
    suite = build_suite(
        cc,
        ref,
        *cfg.k,
        np.random.default_rng(seed),
        source_id=_item_path("compiled", n, d, j),
        reference_id=_item_path("suites", n, d, j, "/reference"),
    )
    suite.metadata.update(seed=seed, config_hash=payload["hash"])
    rel = _item_path("suites", n, d, j, "")
    target = root / rel
    if target.exists():
        shutil.rmtree(target)
    suite.dump(target)
    (target / "reference").mkdir()
    ref.forward.dump(target / "reference" / "forward.json")
    ref.reverse.dump(target / "reference" / "reverse.json")
    return rel + "/manifest.json"


def _simulate_one(payload: dict[str, Any], n: int, d: int, j: int) -> str:
    cfg = _cfg_from(payload)
    root = Path(payload["root"])
    em = ErrorModel.from_json(payload["error_model"])
    seed = int_seed(item_seed(cfg, "simulate", n, d, j))
    rng = np.random.default_rng(seed)
    suite_rel = _item_path("suites", n, d, j, "")
    suite = MirrorSuite.load(root / suite_rel)
    runs = []
    for kind in MIRROR_KINDS:
        for i, mc in enumerate(suite.by_kind(kind)):
            oc = simulate_counts(mc.circuit, em, cfg.shots, rng, target=mc.target, method=cfg.method)
            runs.append({"kind": kind, "index": i, "target": mc.target, "shots": oc.shots, "counts": oc.counts})
    direct = None
    if cfg.heavy_output or cfg.classical:
        cc = CompiledCircuit.load(root / _item_path("compiled", n, d, j))
        oc = simulate_counts(cc.circuit, em, cfg.shots, rng, method=cfg.method)
        direct = {"shots": oc.shots, "counts": oc.counts}
    out = {"seed": seed, "config_hash": payload["hash"], "suite": suite_rel, "mirror": runs, "direct": direct}
    rel = _item_path("counts", n, d, j)
    (root / rel).parent.mkdir(parents=True, exist_ok=True)
    (root / rel).write_text(_dumps(out))
    return rel


def logical_distribution(counts: dict[str, int], shots: int, cc: CompiledCircuit) -> np.ndarray:
    """Outcome frequencies of a compiled circuit, relabelled to logical qubits."""
    n = cc.width
    p = np.zeros(1 << n)
    for s, v in counts.items():
        p[int(s, 2)] += v
    p /= shots
    return p[cc.permutation.index_map()]


def _analyze_one(payload: dict[str, Any], n: int, d: int, j: int) -> dict[str, Any]:
    cfg = _cfg_from(payload)
    root = Path(payload["root"])
    em = ErrorModel.from_json(payload["error_model"])
    data = json.loads((root / _item_path("counts", n, d, j)).read_text())
    pols: dict[str, list[float]] = {k: [] for k in MIRROR_KINDS}
    for run in data["mirror"]:
        oc = OutcomeCounts(run["counts"], run["shots"], run["target"])
        pols[run["kind"]].append(observed_polarization(oc))
    rng = np.random.default_rng(item_seed(cfg, "analyze", n, d, j))
    est = estimate_fidelity(
        pols["M1"], pols["M2"], pols["M3"], n, rng, cfg.bootstrap_resamples, cfg.confidence, (n, d)
    )
    rec: dict[str, Any] = {
        "id": _item_path("circuits", n, d, j, ""),
        "mcfe": est.to_json(),
        "mean_observed": {k: float(np.mean(v)) for k, v in pols.items()},
    }
    need_ideal = cfg.oracle or data.get("direct") is not None
    if need_ideal:
        c = Circuit.load(root / _item_path("circuits", n, d, j))
        cc = CompiledCircuit.load(root / _item_path("compiled", n, d, j))
    if cfg.oracle and n <= POLARIZATION_ORACLE_LIMIT:
        rec["exact_pol"] = exact_polarization(cc.circuit, em, cc.target_unitary(unitary_of(c)))
    direct = data.get("direct")
    if direct is not None:
        ideal = np.abs(statevector_of(c)) ** 2
        observed = logical_distribution(direct["counts"], direct["shots"], cc)
        if cfg.heavy_output:
            h = heavy_output_set(ideal / ideal.sum(), atol=1e-6)
            p_obs = heavy_output_probability(h, observed)
            rec["hop_ideal"] = h.ideal_hop
            rec["hop_observed"] = p_obs
            rec["hop_rescaled"] = rescale_hop_standard(p_obs)
            try:
                rec["hop_rescaled_per_circuit"] = rescale_hop_per_circuit(p_obs, h.ideal_hop)
            except UndefinedRescaling:
                rec["hop_rescaled_per_circuit"] = None
        if cfg.classical:
            try:
                rec["classical_fid"] = normalized_classical_fidelity(ideal / ideal.sum(), observed, atol=1e-6)
            except IllConditionedError:
                rec["classical_fid"] = None
    return rec


# -- stages -------------------------------------------------------------------


def _parallel(fn: Callable[..., Any], payload: dict[str, Any], items: Sequence[tuple[int, int, int]], jobs: int) -> list[Any]:
    if jobs <= 1 or len(items) <= 1:
        return [fn(payload, *it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, payload, *it) for it in items]
        return [f.result() for f in futures]


def _payload(cfg: CampaignConfig, root: Path, stage: str, em: ErrorModel | None = None) -> dict[str, Any]:
    return {
        "config": cfg.to_json(),
        "base_dir": cfg.base_dir,
        "root": str(root),
        "hash": stage_hash(cfg, stage),
        "error_model": (em or ErrorModel()).to_json(),
    }


def _stage_generate(cfg: CampaignConfig, root: Path, jobs: int) -> list[str]:
    return _parallel(_generate_one, _payload(cfg, root, "generate"), _items(cfg), jobs)


def _stage_compile(cfg: CampaignConfig, root: Path, jobs: int) -> list[str]:
    return _parallel(_compile_one, _payload(cfg, root, "compile"), _items(cfg), jobs)


def _stage_mirror(cfg: CampaignConfig, root: Path, jobs: int) -> list[str]:
    return _parallel(_mirror_one, _payload(cfg, root, "mirror"), _items(cfg), jobs)


def _stage_simulate(cfg: CampaignConfig, root: Path, jobs: int) -> list[str]:
    em = cfg.resolve_error_model()
    (root / "error_model.json").write_text(_dumps(em.to_json()))
    return _parallel(_simulate_one, _payload(cfg, root, "simulate", em), _items(cfg), jobs) + ["error_model.json"]


def _aggregate(values: Iterable[float | None], rng: np.random.Generator, cfg: CampaignConfig, shape) -> PolarizationEstimate:
    return average_polarization(
        [v for v in values if v is not None], rng, cfg.bootstrap_resamples, cfg.confidence, shape
    )


def _stage_analyze(cfg: CampaignConfig, root: Path, jobs: int) -> list[str]:
    em = ErrorModel.from_json(json.loads((root / "error_model.json").read_text()))
    recs = _parallel(_analyze_one, _payload(cfg, root, "analyze", em), _items(cfg), jobs)
    by_shape: dict[tuple[int, int], list[dict]] = {}
    for (n, d, _), rec in zip(_items(cfg), recs):
        by_shape.setdefault((n, d), []).append(rec)
    shapes_out = []
    grids: dict[str, dict[tuple[int, int], PolarizationEstimate]] = {"mcfe_pol": {}, "hop_rescaled": {}, "classical_fid": {}}
    for (n, d), rs in by_shape.items():
        rng = np.random.default_rng(item_seed(cfg, "analyze", n, d, 1 << 20))
        entry: dict[str, Any] = {"n": n, "d": d, "circuits": rs}
        points = [r["mcfe"]["point"] for r in rs]
        mcfe = _aggregate(points, rng, cfg, (n, d))
        entry["mcfe_pol"] = mcfe.to_json()
        entry["unavailable"] = sum(p is None for p in points)
        grids["mcfe_pol"][(n, d)] = mcfe
        if any("exact_pol" in r for r in rs):
            exact = [r["exact_pol"] for r in rs]
            entry["exact_pol_mean"] = float(np.mean(exact))
            pairs = [(r["mcfe"]["point"], r["exact_pol"]) for r in rs if r["mcfe"]["point"] is not None]
            if pairs:
                entry["mean_abs_deviation"] = float(np.mean([abs(a - b) for a, b in pairs]))
                entry["mean_deviation"] = float(np.mean([a - b for a, b in pairs]))
        for metric in ("hop_rescaled", "classical_fid"):
            vals = [r.get(metric) for r in rs if metric in r]
            if vals:
                est = _aggregate(vals, rng, cfg, (n, d))
                entry[metric] = est.to_json()
                grids[metric][(n, d)] = est
        shapes_out.append(entry)
    results: dict[str, Any] = {"config_hash": stage_hash(cfg, "analyze"), "shapes": shapes_out}
    if cfg.family == "qv":
        square = {n: est for (n, d), est in grids["mcfe_pol"].items() if n == d}
        dec = qv_decision(square, QV_THRESHOLD)
        results["qv"] = {
            "threshold": QV_THRESHOLD,
            "largest_passing": dec.largest_passing,
            "quantum_volume": dec.quantum_volume,
            "passing": list(dec.passing),
            "summary": dec.describe(),
        }
    fill = list(cfg.fill_shapes)
    vgrids = [
        volumetric_fit(g, fill, cfg.width_fallback_above, cfg.fallback_depths, metric)
        for metric, g in grids.items()
        if g
    ]
    results["fits"] = {
        g.metric: {
            "rows": {str(n): [f.A, f.p] for n, f in sorted(g.row_fits.items())},
            "cols": {str(d): [f.A, f.p] for d, f in sorted(g.col_fits.items())},
        }
        for g in vgrids
    }
    (root / "results.json").write_text(_dumps(results))
    write_volumetric_csv(root / "volumetric.csv", vgrids)
    return ["results.json", "volumetric.csv"]


def _fmt(est: dict[str, Any] | None) -> str:
    if not est or not est.get("available", True) or est.get("point") is None:
        return "n/a"
    return f"{est['point']:.4f} [{est['ci_low']:.4f}, {est['ci_high']:.4f}]"


def render_report(results: dict[str, Any]) -> str:
    lines = ["# Campaign report", "", f"config hash: `{results['config_hash']}`", ""]
    lines.append("| n | d | MCFE polarization | exact (mean) | rescaled HOP | classical fidelity |")
    lines.append("|---|---|---|---|---|---|")
    for e in results["shapes"]:
        exact = f"{e['exact_pol_mean']:.4f}" if "exact_pol_mean" in e else "n/a"
        lines.append(
            f"| {e['n']} | {e['d']} | {_fmt(e['mcfe_pol'])} | {exact} | {_fmt(e.get('hop_rescaled'))} | {_fmt(e.get('classical_fid'))} |"
        )
    if "qv" in results:
        lines += ["", f"Quantum volume: {results['qv']['summary']}"]
    return "\n".join(lines) + "\n"


def _stage_report(cfg: CampaignConfig, root: Path, jobs: int) -> list[str]:
    results = json.loads((root / "results.json").read_text())
    (root / "report.md").write_text(render_report(results))
    return ["report.md"]


_RUNNERS = {
    "generate": _stage_generate,
    "compile": _stage_compile,
    "mirror": _stage_mirror,
    "simulate": _stage_simulate,
    "analyze": _stage_analyze,
    "report": _stage_report,
}


def run_stage(cfg: CampaignConfig, stage: str, root: str | Path | None = None, jobs: int = 1) -> list[str]:
    """Run one stage against the campaign at ``root``.

    Upstream stages must be complete and produced by the same upstream
    configuration; downstream records are dropped because they are stale.
    """
    if stage not in STAGES:
        raise ConfigError(f"unknown stage {stage!r}")
    cfg.validate()
    root = Path(root if root is not None else cfg.output_dir)
    manifest = _open_manifest(root)
    idx = STAGES.index(stage)
    for up in STAGES[:idx]:
        rec = manifest["stages"].get(up)
        if rec is None:
            raise StageError(stage, f"upstream stage {up!r} has not been run")
        if rec["hash"] != stage_hash(cfg, up):
            raise ConfigError(f"configuration for stage {up!r} differs from the persisted bundle; rerun from {up!r}")
    root.mkdir(parents=True, exist_ok=True)
    manifest["config"] = _persisted_config(cfg)
    manifest["config_hash"] = config_hash(cfg)
    try:
        artifacts = _RUNNERS[stage](cfg, root, jobs)
    except (ConfigError, StageError):
        raise
    except (CompilationError, ErrorModelError, ValueError, OSError, KeyError) as exc:
        raise StageError(stage, f"{type(exc).__name__}: {exc}") from exc
    manifest["stages"][stage] = {"hash": stage_hash(cfg, stage), "artifacts": sorted(artifacts)}
    for down in STAGES[idx + 1 :]:
        manifest["stages"].pop(down, None)
    _write_manifest(root, manifest)
    return artifacts


def run_campaign(cfg: CampaignConfig, root: str | Path | None = None, jobs: int = 1) -> dict[str, Any]:
    """Execute every stage and return the results bundle."""
    cfg.validate()
    root = Path(root if root is not None else cfg.output_dir)
    for stage in STAGES:
        run_stage(cfg, stage, root, jobs)
    return json.loads((root / "results.json").read_text())


def load_campaign_config(root: str | Path) -> CampaignConfig:
    manifest = read_manifest(Path(root))
    return CampaignConfig.from_json(manifest["config"], Path(root))


def replay(root: str | Path, stage: str, cfg: CampaignConfig | None = None, jobs: int = 1) -> dict[str, Any]:
    """Recompute ``stage`` and everything downstream from persisted artifacts."""
    root = Path(root)
    if stage not in STAGES:
        raise ConfigError(f"unknown stage {stage!r}")
    manifest = read_manifest(root)
    if cfg is None:
        cfg = CampaignConfig.from_json(manifest["config"], root)
        try:
            cfg.resolve_error_model()
        except ConfigError:
            # a relative path from the original config dir; use the persisted copy
            if not (root / "error_model.json").is_file():
                raise
            cfg = replace(cfg, error_model=json.loads((root / "error_model.json").read_text()))
    for up in STAGES[: STAGES.index(stage)]:
        if up not in manifest["stages"]:
            raise StageError(stage, f"bundle incomplete: stage {up!r} missing")
    for s in STAGES[STAGES.index(stage) :]:
        run_stage(cfg, s, root, jobs)
    return json.loads((root / "results.json").read_text())


def default_jobs() -> int:
    return max(1, os.cpu_count() or 1)
