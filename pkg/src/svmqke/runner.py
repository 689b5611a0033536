"""Experiment configuration, seeded suites and report emission.

Every suite runs one pure function per seed, so results are identical
whatever the worker count. Reports are written as JSON plus CSV; wall-clock
information goes to a separate ``*.meta.json`` so the report files
themselves are byte-reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import partial
from pathlib import Path
from typing import Callable

import numpy as np

from . import challenge as chl
from . import diagnostics as diag
from .concepts import Concept, generate_dataset, random_residues
from .errors import DomainError
from .feature_kernel import FeatureConfig, k_for_sample_size, k_from_t
from .group_arith import GroupParams, random_group
from .qke_sim import NoisePolicy, build_kernel_matrix, transform_bias
from .svm_solver import DEFAULT_LAMBDA, predict_many, train

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs of an experiment; randomness derives only from the seeds here.

    The group is either explicit (``p``, ``g``) or drawn from ``bits`` and
    ``group_seed``. ``k`` wins over ``t``; with neither, ``k`` follows the
    sample-size rule ``t = c/3`` for ``m = n**c``. ``shots`` is ``None``
    (exact), an integer, or ``"auto"`` for ``m**4``.
    """

    bits: int = 20
    group_seed: int = 0
    p: int | None = None
    g: int | None = None
    k: int | None = None
    t: float | None = None
    m: int = 200
    m_test: int = 1000
    lam: float = DEFAULT_LAMBDA
    shots: int | str | None = None
    seeds: tuple[int, ...] = tuple(range(30))
    concept_s: int | None = None

    def group(self) -> GroupParams:
        if self.p is not None:
            if self.g is None:
                raise DomainError("an explicit p needs an explicit g")
            return GroupParams(self.p, self.g)
        return random_group(self.bits, self.group_seed)

    def feature_config(self, params: GroupParams | None = None, m: int | None = None) -> FeatureConfig:
        params = params or self.group()
        if self.k is not None:
            k = self.k
        elif self.t is not None:
            k = k_from_t(params.n, self.t)
        else:
            k = k_for_sample_size(params.n, m or self.m)
        return FeatureConfig(k, params)

    def resolved_shots(self, m: int | None = None) -> int | None:
        if self.shots is None or self.shots == "exact":
            return None
        if self.shots == "auto":
            return (m or self.m) ** 4
        return int(self.shots)

    def concept(self, params: GroupParams | None = None) -> Concept:
        params = params or self.group()
        s = self.concept_s
        if s is None:
            s = int(np.random.default_rng([self.group_seed, 7]).integers(0, params.order))
        return Concept(s % params.order, params)

    def to_json(self) -> dict:
        out = asdict(self)
        out["seeds"] = list(self.seeds)
        return out

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------- per-seed jobs

def accuracy_job(cfg: ExperimentConfig, seed: int) -> dict:
    params = cfg.group()
    concept = Concept(int(np.random.default_rng([seed, 1]).integers(0, params.order)), params)
    fc = cfg.feature_config(params)
    shots = cfg.resolved_shots()
    rng = np.random.default_rng(seed)
    samples = generate_dataset(concept, cfg.m, rng)
    test = generate_dataset(concept, cfg.m_test, rng)
    t0 = time.perf_counter()
    model = train(samples, fc, NoisePolicy(shots, seed), cfg.lam)
    pred = predict_many([t.x for t in test], model)
    elapsed = time.perf_counter() - t0
    acc = float(np.mean(pred == np.array([t.y for t in test])))
    return {"seed": seed, "m": cfg.m, "k": fc.k, "shots": shots, "accuracy": acc,
            "sweeps": model.sweeps, "residual": model.residual, "_seconds": elapsed}


def robustness_job(cfg: ExperimentConfig, seed: int) -> list[dict]:
    params = cfg.group()
    concept = cfg.concept(params)
    fc = cfg.feature_config(params)
    shots_list = [cfg.resolved_shots()] if cfg.shots is not None else [cfg.m ** 2, cfg.m ** 3, cfg.m ** 4]
    return [{"seed": seed, "R": R,
             "deviation": diag.robustness_trial(concept, cfg.m, R, fc, seed, cfg.m_test, cfg.lam)}
            for R in shots_list]


def perturbation_job(cfg: ExperimentConfig, seed: int) -> dict:
    params = cfg.group()
    concept = cfg.concept(params)
    fc = cfg.feature_config(params)
    shots = cfg.resolved_shots() or cfg.m ** 2
    samples, K, ys = diag.exact_kernel_instance(concept, fc, cfg.m, seed)
    xs = [s.x for s in samples]
    Kn = transform_bias(build_kernel_matrix(xs, fc, NoisePolicy(shots, seed)))
    rep = diag.perturbation_check(K, Kn, ys, cfg.lam)
    return {"seed": seed, "R": shots, **rep.to_json()}


def baselines_job(cfg: ExperimentConfig, seed: int, exhaustive: bool = True) -> dict:
    params = cfg.group()
    concept = Concept(int(np.random.default_rng([seed, 1]).integers(0, params.order)), params)
    rng = np.random.default_rng(seed)
    samples = generate_dataset(concept, cfg.m, rng)
    test = None if exhaustive else random_residues(params, cfg.m_test, rng)
    row = {"seed": seed}
    for kind in ("rbf", "linear"):
        row[kind] = diag.classical_baseline_accuracy(kind, samples, concept, test, cfg.lam)
        row[f"{kind}_control"] = diag.control_accuracy(kind, params, cfg.m, seed, cfg.m_test, cfg.lam)
    return row


def challenge_job(cfg: ExperimentConfig, seed: int) -> dict:
    params = cfg.group()
    fc = cfg.feature_config(params)
    ch = chl.make_challenge(params, cfg.m, cfg.m_test, seed)
    shots = cfg.resolved_shots()
    row = {"seed": seed}
    answers = {
        "svmqke": chl.prover_svmqke(ch.S, ch.T, fc, NoisePolicy(shots, seed), cfg.lam),
        "dlog": chl.prover_dlog(ch.S, ch.T, params),
        "classical": chl.prover_classical(ch.S, ch.T, params, "rbf", cfg.lam),
    }
    for name, ans in answers.items():
        v = chl.verify(ans, ch)
        row[f"{name}_accuracy"] = v.accuracy
        row[f"{name}_accepted"] = v.accepted
    return row


def census_job(cfg: ExperimentConfig, seed: int) -> dict:
    params = cfg.group()
    concept = cfg.concept(params)
    fc = cfg.feature_config(params)
    rep = diag.margin_census(concept, fc)
    return {"seed": seed, "p": params.p, "k": fc.k, "s": concept.s, **rep.to_json()}


def _flatten(results: list) -> list[dict]:
    rows = []
    for r in results:
        rows.extend(r if isinstance(r, list) else [r])
    return rows


def _summarise(suite: str, rows: list[dict]) -> dict:
    if suite == "accuracy":
        accs = [r["accuracy"] for r in rows]
        return {"passing": sum(a >= 0.99 for a in accs), "runs": len(accs),
                "median_accuracy": statistics.median(accs)}
    if suite == "robustness":
        by_r: dict = {}
        for r in rows:
            by_r.setdefault(r["R"], []).append(r["deviation"])
        return {"median_deviation": {str(R): statistics.median(v) for R, v in by_r.items()},
                "within_0.01": {str(R): sum(d <= 0.01 for d in v) for R, v in by_r.items()}}
    if suite == "perturbation":
        app = [r for r in rows if r["applicable"]]
        return {"applicable": len(app), "holds": sum(r["holds"] for r in app)}
    if suite == "baselines":
        return {k: statistics.median(r[k] for r in rows)
                for k in ("rbf", "linear", "rbf_control", "linear_control")}
    if suite == "challenge":
        return {f"{n}_accepted": sum(r[f"{n}_accepted"] for r in rows) for n in ("svmqke", "dlog", "classical")} | {
            "dlog_median_accuracy": statistics.median(r["dlog_accuracy"] for r in rows), "runs": len(rows)}
    if suite == "census":
        return {"violating_fraction": rows[0]["violating_fraction"]} if rows else {}
    return {}


SUITES: dict[str, Callable] = {
    "accuracy": accuracy_job,
    "robustness": robustness_job,
    "perturbation": perturbation_job,
    "baselines": baselines_job,
    "challenge": challenge_job,
    "census": census_job,
}

PLOT_COLUMNS = {
    "robustness": ("R", "deviation"),
    "accuracy": ("m", "accuracy"),
    "perturbation": ("eps", "alpha_delta"),
}


def run_suite(suite: str, cfg: ExperimentConfig, workers: int = 1) -> dict:
    """Run ``suite`` over ``cfg.seeds`` and return the report (rows in seed order)."""
    if suite not in SUITES:
        raise DomainError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    job = partial(SUITES[suite], cfg)
    seeds = list(cfg.seeds) if suite != "census" else list(cfg.seeds[:1])
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(job, seeds))
    else:
        results = [job(s) for s in seeds]
    rows = _flatten(results)
    timing = [r.pop("_seconds") for r in rows if "_seconds" in r]
    return {
        "schema_version": SCHEMA_VERSION,
        "suite": suite,
        "config": cfg.to_json(),
        "config_hash": cfg.digest(),
        "rows": rows,
        "summary": _summarise(suite, rows),
        "_timing": timing,
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    return obj


def write_report(report: dict, out_dir, stem: str | None = None) -> dict[str, Path]:
    """Write ``<stem>.json``, ``<stem>.csv``, optional ``<stem>.plot.csv`` and ``<stem>.meta.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = stem or report["suite"]
    report = dict(report)
    timing = report.pop("_timing", [])
    paths = {"json": out_dir / f"{stem}.json", "csv": out_dir / f"{stem}.csv",
             "meta": out_dir / f"{stem}.meta.json"}
    paths["json"].write_text(json.dumps(_jsonable(report), sort_keys=True, indent=1) + "\n")

    rows = _jsonable(report["rows"])
    cols = sorted({k for r in rows for k in r})
    with open(paths["csv"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["config_hash", *cols])
        for r in rows:
            w.writerow([report["config_hash"], *(r.get(c, "") for c in cols)])

    if report["suite"] in PLOT_COLUMNS:
        xcol, ycol = PLOT_COLUMNS[report["suite"]]
        paths["plot"] = out_dir / f"{stem}.plot.csv"
        with open(paths["plot"], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["seed", "x", "y"])
            for r in rows:
                w.writerow([r["seed"], r[xcol], r[ycol]])

    paths["meta"].write_text(json.dumps(
        {"config_hash": report["config_hash"], "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
         "seconds_per_seed": timing}, indent=1) + "\n")
    return paths


def config_with(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})
