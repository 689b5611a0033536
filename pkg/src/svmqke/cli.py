"""Command-line entry point: ``svmqke {gen,train,eval,experiment,challenge}``.

Exit codes: 0 success, 2 usage or domain error, 3 solver failure,
4 challenge answer rejected.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import challenge as chl
from .concepts import Concept, exact_accuracy, generate_dataset, read_dataset, write_dataset
from .errors import ConvergenceError, DomainError
from .feature_kernel import FeatureConfig
from .group_arith import GroupParams
from .qke_sim import NoisePolicy
from .runner import SUITES, ExperimentConfig, run_suite, write_report
from .svm_solver import MAX_SWEEPS, SvmModel, predict_many, train

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_REJECT = 0, 2, 3, 4


class UsageError(Exception):
    pass


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"0-29"``, ``"1,4,9"`` or a mix such as ``"0-4,10"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty seed list")
    return tuple(out)


def parse_shots(text: str):
    if text in ("exact", "auto"):
        return None if text == "exact" else "auto"
    try:
        value = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"shots must be 'exact', 'auto' or an integer, not {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("shots must be positive")
    return value


def _group_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--bits", type=int, default=20, help="bit length of a random prime (default 20)")
    ap.add_argument("--group-seed", type=int, default=0, help="seed for the random prime and generator")
    ap.add_argument("--p", type=int, help="explicit prime, overrides --bits")
    ap.add_argument("--g", type=int, help="generator for --p")


def _model_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--k", type=int, help="interval exponent; overrides --t")
    ap.add_argument("--t", type=float, help="k = n - ceil(t log2 n); default t = c/3 with m = n**c")
    ap.add_argument("--lam", type=float, default=0.5, help="regularisation lambda (default 0.5)")
    ap.add_argument("--shots", type=parse_shots, default=None,
                    help="'exact' (default), 'auto' for m**4, or a shot count")
    ap.add_argument("--noise-seed", type=int, default=0, help="seed of the shot-noise streams")


def _config(ns, **extra) -> ExperimentConfig:
    fields = {k: getattr(ns, k, None) for k in ("bits", "group_seed", "p", "g", "k", "t", "m", "m_test",
                                                 "lam", "shots", "seeds", "concept_s")}
    fields.update(extra)
    return ExperimentConfig(**{k: v for k, v in fields.items() if v is not None})


def _policy(ns, m: int) -> NoisePolicy:
    shots = ns.shots
    if shots == "auto":
        shots = m ** 4
    return NoisePolicy(shots, ns.noise_seed)


def _feature_config(ns, params: GroupParams, m: int) -> FeatureConfig:
    return ExperimentConfig(k=ns.k, t=ns.t, m=m).feature_config(params, m)


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=1)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


# ---------------------------------------------------------------- commands

def cmd_gen(ns) -> int:
    cfg = _config(ns)
    params = cfg.group()
    if ns.k is not None or ns.t is not None:
        cfg.feature_config(params)  # reject an infeasible k before writing anything
    if ns.kind == "challenge":
        if not ns.secret:
            raise UsageError("--secret is required for challenge datasets")
        ch = chl.make_challenge(params, ns.m, ns.m_test, ns.seed)
        ch.write(ns.out, ns.secret)
        print(json.dumps({"prover_file": ns.out, "secret_file": ns.secret, "m": ns.m, "m_test": ns.m_test}))
        return EXIT_OK
    rng = np.random.default_rng(ns.seed)
    s = ns.concept_s if ns.concept_s is not None else int(rng.integers(0, params.order, dtype=np.uint64))
    concept = Concept(s % params.order, params)
    samples = generate_dataset(concept, ns.m, rng)
    write_dataset(ns.out, samples, params, ns.seed, s=str(concept.s))
    print(json.dumps({"dataset": ns.out, "m": ns.m, "s": str(concept.s), "p": str(params.p)}))
    return EXIT_OK


def cmd_train(ns) -> int:
    samples, params, _ = read_dataset(ns.data)
    if not samples:
        raise UsageError("training set is empty")
    fc = _feature_config(ns, params, len(samples))
    model = train(samples, fc, _policy(ns, len(samples)), ns.lam, max_sweeps=ns.max_sweeps)
    model.save(ns.out)
    print(json.dumps({"model": ns.out, "m": len(samples), "k": fc.k, "sweeps": model.sweeps,
                      "residual": model.residual}, sort_keys=True))
    return EXIT_OK


def cmd_eval(ns) -> int:
    model = SvmModel.load(ns.model)
    params = model.config.params
    report: dict = {"model": ns.model}
    if ns.exhaustive:
        s = ns.concept_s
        if s is None and ns.data:
            _, dparams, header = read_dataset(ns.data)
            if dparams != params:
                raise DomainError("dataset and model use different groups")
            s = int(header["s"]) if "s" in header else None
        if s is None:
            raise UsageError("--exhaustive needs --concept-s or a dataset header carrying the key")
        concept = Concept(s % params.order, params)
        acc = exact_accuracy(lambda xs: predict_many(xs, model), concept, batch=ns.batch)
        report.update(mode="exhaustive", s=str(concept.s), total=params.order, accuracy=acc)
    else:
        if not ns.data:
            raise UsageError("give --data or --exhaustive")
        samples, dparams, _ = read_dataset(ns.data)
        if dparams != params:
            raise DomainError("dataset and model use different groups")
        if not samples:
            raise UsageError("test set is empty")
        pred = predict_many([t.x for t in samples], model)
        truth = np.array([t.y for t in samples])
        report.update(mode="testset", data=ns.data, total=len(samples),
                      correct=int(np.count_nonzero(pred == truth)), accuracy=float(np.mean(pred == truth)))
    if ns.csv:
        with open(ns.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            keys = sorted(report)
            w.writerow(keys)
            w.writerow([report[k] for k in keys])
    _emit(report, ns.out)
    return EXIT_OK


def cmd_experiment(ns) -> int:
    if ns.suite not in SUITES:
        raise UsageError(f"unknown suite {ns.suite!r}; choose from {', '.join(sorted(SUITES))}")
    cfg = _config(ns)
    report = run_suite(ns.suite, cfg, workers=ns.workers)
    paths = write_report(report, ns.out_dir, ns.name)
    print(json.dumps({"summary": report["summary"], "files": {k: str(v) for k, v in paths.items()}},
                     sort_keys=True, default=str))
    return EXIT_OK


def cmd_challenge_make(ns) -> int:
    params = _config(ns).group()
    ch = chl.make_challenge(params, ns.m, ns.m_test, ns.seed)
    ch.write(ns.out, ns.secret)
    print(json.dumps({"prover_file": ns.out, "secret_file": ns.secret}))
    return EXIT_OK


def cmd_challenge_respond(ns) -> int:
    S, T, params = chl.read_prover_file(ns.challenge)
    if ns.prover == "dlog":
        answer = chl.prover_dlog(S, T, params)
    elif ns.prover == "classical":
        answer = chl.prover_classical(S, T, params, ns.kernel, ns.lam)
    else:
        answer = chl.prover_svmqke(S, T, _feature_config(ns, params, len(S)), _policy(ns, len(S)), ns.lam)
    Path(ns.out).write_text(json.dumps([int(v) for v in answer]) + "\n")
    print(json.dumps({"answer": ns.out, "prover": ns.prover, "labels": len(T)}))
    return EXIT_OK


def cmd_challenge_verify(ns) -> int:
    dataset = chl.read_challenge(ns.challenge, ns.secret)
    answer = json.loads(Path(ns.answer).read_text())
    if not isinstance(answer, list):
        raise UsageError("answer file must hold a JSON array of +1/-1 labels")
    v = chl.verify(answer, dataset)
    print(json.dumps({"accepted": v.accepted, "accuracy": v.accuracy, "correct": v.correct,
                      "total": v.total}, sort_keys=True))
    return EXIT_OK if v.accepted else EXIT_REJECT


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="svmqke", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a labeled dataset or a challenge")
    _group_flags(gen)
    gen.add_argument("--kind", choices=("plain", "challenge"), default="plain")
    gen.add_argument("--m", type=int, default=200)
    gen.add_argument("--m-test", type=int, default=1000)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--concept-s", type=int, help="concept key (default: drawn from --seed)")
    gen.add_argument("--k", type=int, help="validate this k against the group")
    gen.add_argument("--t", type=float)
    gen.add_argument("--out", required=True)
    gen.add_argument("--secret", help="verifier secret file (challenge kind)")
    gen.set_defaults(func=cmd_gen)

    tr = sub.add_parser("train", help="fit an SVM-QKE model to a dataset")
    tr.add_argument("--data", required=True)
    tr.add_argument("--out", required=True)
    tr.add_argument("--max-sweeps", type=int, default=MAX_SWEEPS, help="solver sweep cap")
    _model_flags(tr)
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="score a model on a test set or exhaustively")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data")
    ev.add_argument("--exhaustive", action="store_true")
    ev.add_argument("--concept-s", type=int)
    ev.add_argument("--batch", type=int, default=4096)
    ev.add_argument("--out", help="accuracy JSON")
    ev.add_argument("--csv", help="accuracy CSV")
    ev.set_defaults(func=cmd_eval)

    ex = sub.add_parser("experiment", help="run a seeded diagnostics suite")
    ex.add_argument("suite", help=f"one of {', '.join(sorted(SUITES))}")
    _group_flags(ex)
    _model_flags(ex)
    ex.add_argument("--m", type=int, default=200)
    ex.add_argument("--m-test", type=int, default=1000)
    ex.add_argument("--seeds", type=parse_seeds, default=tuple(range(30)))
    ex.add_argument("--concept-s", type=int)
    ex.add_argument("--workers", type=int, default=1)
    ex.add_argument("--out-dir", default="results")
    ex.add_argument("--name", help="file stem (default: suite name)")
    ex.set_defaults(func=cmd_experiment)

    ch = sub.add_parser("challenge", help="verifier/prover protocol")
    chsub = ch.add_subparsers(dest="action", required=True)
    mk = chsub.add_parser("make")
    _group_flags(mk)
    mk.add_argument("--m", type=int, default=200)
    mk.add_argument("--m-test", type=int, default=1000)
    mk.add_argument("--seed", type=int, default=0)
    mk.add_argument("--out", required=True, help="prover-facing JSON Lines")
    mk.add_argument("--secret", required=True, help="verifier secret JSON")
    mk.set_defaults(func=cmd_challenge_make)
    rs = chsub.add_parser("respond")
    rs.add_argument("--challenge", required=True)
    rs.add_argument("--prover", choices=("svmqke", "dlog", "classical"), default="svmqke")
    rs.add_argument("--kernel", choices=("rbf", "linear", "poly"), default="rbf")
    rs.add_argument("--out", required=True, help="answer JSON array")
    _model_flags(rs)
    rs.set_defaults(func=cmd_challenge_respond)
    vf = chsub.add_parser("verify")
    vf.add_argument("--challenge", required=True)
    vf.add_argument("--secret", required=True)
    vf.add_argument("--answer", required=True)
    vf.set_defaults(func=cmd_challenge_verify)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except ConvergenceError as exc:
        print(json.dumps({"error": "solver", "message": str(exc), "residual": exc.residual,
                          "sweeps": exc.sweeps}), file=sys.stderr)
        return EXIT_SOLVER
    except (UsageError, DomainError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        print(f"svmqke: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
