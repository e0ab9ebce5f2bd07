"""Command-line interface: train, predict, eval, verify.

Exit codes are a stable contract:
    0  success (and, for verify, PASS)
    1  data error (unreadable/malformed files, dimension mismatches)
    2  usage error (bad flags)
    3  verification FAIL (a harness ran but its PASS criteria did not hold)
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time

import numpy as np

from . import __version__, backend
from .baselines import fit_ridge, predict_ridge
from .dmr import bias_correct, fit, predict_class
from .errors import (
    InvalidHyperparameter,
    InvalidInput,
    ModelFormatError,
    OverflowGuard,
    SingularGram,
)
from .features import apply_pca, fit_pca
from .gp import fit_gp, predict_gp
from .metrics_io import (
    evaluate,
    load_classifier,
    load_feature_csv,
    save_classifier,
    time_fit,
    write_json_report,
)
from .synth import (
    canonical_bias_spec,
    canonical_clt_spec,
    canonical_consistency_spec,
    canonical_invariance_spec,
    generate_onehot,
    run_bias_check,
    run_clt,
    run_consistency,
    run_invariance_grid,
)

_EVAL_SEED_OFFSET = 1_000_003


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jacobiprior",
        description="Closed-form multinomial classification and its verification harnesses",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="fit a classifier on a feature CSV")
    train.add_argument("features", help="input CSV: label,f0,...,f{p-1}")
    train.add_argument("--method", choices=("dmr", "gp", "ridge"), default="dmr")
    train.add_argument("--a", type=float, default=None, help="prior shape (> 0); default 1/n")
    train.add_argument("--b", type=float, default=None, help="prior rate (> 0); default 1/n")
    train.add_argument("--alpha", type=float, default=1.0, help="ridge penalty")
    train.add_argument("--bias-correct", action="store_true",
                       help="apply the closed-form moderate-rate correction (dmr only)")
    train.add_argument("--pca", type=int, default=None, metavar="D",
                       help="project onto the top D principal components first")
    train.add_argument("--length-scale", type=float, default=None)
    train.add_argument("--signal-var", type=float, default=None)
    train.add_argument("--noise-var", type=float, default=None)
    train.add_argument("-o", "--output", required=True, help="model file to write")
    train.set_defaults(func=cmd_train)

    predict = sub.add_parser("predict", help="predict class names for a feature CSV")
    predict.add_argument("model")
    predict.add_argument("features")
    predict.add_argument("-o", "--output", required=True, help="predictions CSV to write")
    predict.set_defaults(func=cmd_predict)

    evalp = sub.add_parser("eval", help="evaluate a model against labeled features")
    evalp.add_argument("model")
    evalp.add_argument("features")
    evalp.add_argument("-o", "--output", required=True, help="report JSON to write")
    evalp.set_defaults(func=cmd_eval)

    verify = sub.add_parser("verify", help="run a Monte Carlo verification harness")
    verify.add_argument("--what", required=True,
                        choices=("consistency", "clt", "bias", "invariance"))
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--sizes", default="500,5000,50000",
                        help="consistency ladder, comma-separated")
    verify.add_argument("--trials", type=int, default=20)
    verify.add_argument("--n", type=int, default=None)
    verify.add_argument("--replications", type=int, default=500)
    verify.add_argument("--s-n", dest="s_n", type=float, default=None,
                        help="intensity scale (consistency default 1, clt default 100)")
    verify.add_argument("--rate", type=float, default=1.0,
                        help="constant rate for the bias check, in [1, 5]")
    verify.add_argument("--p", type=int, default=20, help="invariance feature count")
    verify.add_argument("--classes", type=int, default=3, help="invariance class count")
    verify.add_argument("--eval-n", type=int, default=500)
    verify.add_argument("-o", "--output", required=True, help="report JSON to write")
    verify.set_defaults(func=cmd_verify)
    return parser


def _usage(message: str) -> int:
    print(f"usage error: {message}", file=sys.stderr)
    return 2


def cmd_train(args) -> int:
    dataset = load_feature_csv(args.features)
    warnings: list[str] = []
    if args.bias_correct and args.method != "dmr":
        return _usage("--bias-correct applies to --method dmr only")

    X = dataset.features
    pca = None
    if args.pca is not None:
        if args.pca < 1:
            return _usage("--pca must be a positive component count")
        pca = fit_pca(X, args.pca)
        X = apply_pca(pca, X)

    labels = dataset.labels
    names = dataset.class_names
    if args.method == "dmr":
        def closure():
            model = fit(X, labels, a=args.a, b=args.b, class_names=names)
            if args.bias_correct:
                model = bias_correct(model, X)
            return model
        seconds, model = time_fit(closure)
        hyper = {"a": model.a, "b": model.b}
    elif args.method == "gp":
        warnings.append(
            f"gp model stores all {dataset.n} training rows; its payload grows "
            "linearly with the training set"
        )
        seconds, model = time_fit(lambda: fit_gp(
            X, labels, a=args.a, b=args.b, length_scale=args.length_scale,
            signal_var=args.signal_var, noise_var=args.noise_var, class_names=names,
        ))
        hyper = {
            "a": model.a, "b": model.b,
            "length_scale": model.length_scale,
            "signal_var": model.signal_var,
            "noise_var": model.noise_var,
        }
    else:
        if not (args.alpha > 0):
            return _usage("--alpha must be positive")
        seconds, model = time_fit(
            lambda: fit_ridge(X, labels, alpha=args.alpha, class_names=names)
        )
        hyper = {"alpha": model.alpha}

    save_classifier(args.output, model, pca)
    sidecar = {
        "method": args.method,
        "n": dataset.n,
        "p_input": dataset.p,
        "p_model": X.shape[1],
        "num_classes": len(names),
        "class_names": list(names),
        "bias_corrected": bool(args.bias_correct),
        "fit_seconds": seconds,
        "hyperparameters": hyper,
        "pca": None if pca is None else {
            "components": pca.d,
            "explained_variance_ratio": pca.explained_variance_ratio,
        },
        "warnings": warnings,
        "backend": backend.ACTIVE,
    }
    write_json_report(args.output + ".json", sidecar)
    for note in warnings:
        print(f"warning: {note}", file=sys.stderr)
    print(f"trained {args.method} model -> {args.output} ({seconds:.6f} s)")
    return 0


def _load_for_inference(model_path, features_path):
    model, pca, kind = load_classifier(model_path)
    dataset = load_feature_csv(features_path)
    expected = pca.mean.shape[0] if pca is not None else model.p
    if dataset.p != expected:
        raise InvalidInput(
            f"dimension mismatch: data has {dataset.p} features, model expects {expected}"
        )
    return model, pca, kind, dataset


_PREDICTORS = {"dmr": predict_class, "gp": predict_gp, "ridge": predict_ridge}


def _predict_rows(model, pca, kind, X) -> tuple[np.ndarray, float]:
    """Per-row predictions plus mean microseconds per sample."""
    predictor = _PREDICTORS[kind]
    Xt = apply_pca(pca, X) if pca is not None else X
    out = np.empty(Xt.shape[0], dtype=np.int64)
    start = time.perf_counter()
    for i in range(Xt.shape[0]):
        out[i] = predictor(model, Xt[i])
    micros = (time.perf_counter() - start) * 1e6 / max(1, Xt.shape[0])
    return out, micros


def cmd_predict(args) -> int:
    model, pca, kind, dataset = _load_for_inference(args.model, args.features)
    preds, micros = _predict_rows(model, pca, kind, dataset.features)
    with open(args.output, "w", encoding="utf-8") as handle:
        handle.write("prediction\n")
        for idx in preds:
            handle.write(model.class_names[int(idx)] + "\n")
    print(f"{preds.shape[0]} predictions -> {args.output} "
          f"({micros:.1f} us/sample mean)")
    return 0


def cmd_eval(args) -> int:
    model, pca, kind, dataset = _load_for_inference(args.model, args.features)
    name_to_model_index = {name: k for k, name in enumerate(model.class_names)}
    try:
        true = np.array(
            [name_to_model_index[dataset.class_names[lab]] for lab in dataset.labels],
            dtype=np.int64,
        )
    except KeyError as exc:
        raise InvalidInput(f"data contains a class unknown to the model: {exc}") from exc
    preds, micros = _predict_rows(model, pca, kind, dataset.features)
    report = evaluate(true, preds, model.class_names,
                      predict_micros_per_sample=round(micros, 3))
    write_json_report(args.output, report.to_dict())
    print(f"accuracy {report.accuracy:.4f}, macro-F1 {report.macro_f1:.4f} "
          f"-> {args.output}")
    return 0


def cmd_verify(args) -> int:
    what = args.what
    if args.s_n is not None and args.s_n < 1.0:
        return _usage("--s-n must be at least 1")
    if what == "consistency":
        try:
            sizes = tuple(int(s) for s in args.sizes.split(","))
        except ValueError:
            return _usage(f"--sizes must be comma-separated integers, got {args.sizes!r}")
        if args.trials < 1:
            return _usage("--trials must be >= 1")
        spec = canonical_consistency_spec(args.seed, intensity=args.s_n or 1.0)
        report = run_consistency(spec, sizes, args.trials)
    elif what == "clt":
        if args.replications < 100:
            return _usage("--replications must be at least 100 for the normality check")
        spec = canonical_clt_spec(args.seed, intensity=args.s_n or 100.0)
        report = run_clt(spec, args.n or 2000, args.replications)
    elif what == "bias":
        if args.replications < 1:
            return _usage("--replications must be >= 1")
        if not (1.0 <= args.rate <= 5.0):
            return _usage("--rate must lie in [1, 5]")
        spec = canonical_bias_spec(args.seed, rate=args.rate)
        report = run_bias_check(spec, args.n or 5000, args.replications)
    else:
        if args.p < 1 or args.classes < 2 or args.eval_n < 1:
            return _usage("invariance needs --p >= 1, --classes >= 2, --eval-n >= 1")
        spec = canonical_invariance_spec(args.seed, p=args.p, K=args.classes)
        X, labels = generate_onehot(spec, args.n or 2000)
        eval_spec = dataclasses.replace(spec, seed=spec.seed + _EVAL_SEED_OFFSET)
        eval_X, _ = generate_onehot(eval_spec, args.eval_n)
        report = run_invariance_grid(X, labels, eval_X)

    payload = report.to_dict()
    write_json_report(args.output, payload)

    if what == "invariance":
        passed = report.identical
        failing = "" if passed else (
            f"{len(report.disagreements)} grid points disagree "
            f"(first: a={report.disagreements[0]['a']}, b={report.disagreements[0]['b']})"
        )
    else:
        check = report.check()
        passed = check["passed"]
        failing = "" if passed else ", ".join(
            f"{key}={value}" for key, value in check.items() if key != "passed"
        )
    if passed:
        print(f"verify {what}: PASS -> {args.output}")
        return 0
    print(f"verify {what}: FAIL ({failing}) -> {args.output}", file=sys.stderr)
    return 3


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInput, InvalidHyperparameter, SingularGram, OverflowGuard,
            ModelFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
