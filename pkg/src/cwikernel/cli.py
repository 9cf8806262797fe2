"""Command line for the pipeline: featurize, train, tune, predict, evaluate.

Every command validates its inputs up front, writes outputs atomically, and
embeds the resolved configuration plus SHA-256 hashes of all input files in
whatever it produces, so artifacts are self-describing and re-running a
command with identical inputs yields byte-identical output.

Exit codes: 0 success, 2 usage error, 3 data error, 4 resource error,
5 solver convergence failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import Dataset, parse_dataset, targets
from .errors import ConvergenceError, DataError, ResourceError
from .features import (
    ALL_FAMILIES,
    FeatureConfig,
    featurize_dataset,
    fit_feature_space,
)
from .kernel import KernelConfig, normalized_gram
from .learn import (
    SvrModel,
    TuneGrid,
    grid_search,
    nusvr_fit,
    nusvr_predict,
    svc_fit,
    svc_predict,
)
from .metrics import classification_report, regression_report
from .resources import load_resources
from .store import (
    atomic_write_bytes,
    load_features,
    load_model,
    save_features,
    save_model,
    sha256_bytes,
    sha256_file,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_RESOURCE = 4
EXIT_CONVERGENCE = 5

_WORDNET_FILES = tuple(
    f"{kind}.{pos}"
    for kind in ("index", "data")
    for pos in ("noun", "verb", "adj", "adv")
)


# --------------------------------------------------------------------------
# shared plumbing


def _read_dataset(path: str, require_labels: bool) -> tuple[Dataset, str]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read dataset {path}: {exc}") from None
    text = raw.decode("utf-8")
    first = next((ln for ln in text.splitlines() if ln.strip()), None)
    has_labels = first is not None and len(first.split("\t")) == 11
    if require_labels and first is not None and not has_labels:
        raise DataError(f"{path}: labeled 11-column data required")
    dataset = parse_dataset(text.splitlines(), has_labels=has_labels)
    return dataset, sha256_bytes(raw)


def _load_bundle(args):
    return load_resources(args.wordnet, args.context_emb, args.grid_emb)


def _resource_hashes(args) -> dict:
    hashes = {}
    for name in _WORDNET_FILES:
        path = Path(args.wordnet) / name
        if not path.is_file():
            raise ResourceError(f"missing WordNet file: {path}")
        hashes[f"wordnet/{name}"] = sha256_file(str(path))
    for key, path in (("context_emb", args.context_emb), ("grid_emb", args.grid_emb)):
        try:
            hashes[key] = sha256_file(path)
        except OSError as exc:
            raise ResourceError(f"cannot read embeddings {path}: {exc}") from None
    return hashes


def _feature_config(args) -> FeatureConfig:
    families = tuple(args.features.split(","))
    unknown = [f for f in families if f not in ALL_FAMILIES]
    if unknown:
        raise DataError(
            f"unknown feature families {unknown}; choose from {list(ALL_FAMILIES)}"
        )
    return FeatureConfig(
        families=families,
        scaling="none" if args.no_scaling else "minmax",
    )


def _kernel_config(args) -> KernelConfig:
    return KernelConfig(
        kind=args.kernel, r=args.r if args.kernel == "rbf" else None
    )


def _run_config(args, command: str, extra: dict | None = None) -> dict:
    cfg: dict = {"command": command, "tool_version": __version__}
    for name in ("task", "kernel", "C", "r", "nu", "features", "jobs"):
        if hasattr(args, name):
            cfg[name] = getattr(args, name)
    if hasattr(args, "no_scaling"):
        cfg["scaling"] = "none" if args.no_scaling else "minmax"
    for name in ("train", "valid", "test", "wordnet", "context_emb", "grid_emb"):
        if getattr(args, name, None) is not None:
            cfg.setdefault("inputs", {})[name] = getattr(args, name)
    if extra:
        cfg.update(extra)
    return cfg


def _fitted_features(args, dataset: Dataset, dataset_sha: str, resources, config):
    """Feature space + scaled train matrix, via the on-disk cache when
    --cache-dir is set."""
    cache_path = None
    if getattr(args, "cache_dir", None):
        key_payload = {
            "config": config.to_dict(),
            "dataset": dataset_sha,
            "resources": _resource_hashes(args),
        }
        key = sha256_bytes(
            json.dumps(key_payload, sort_keys=True).encode("utf-8")
        )
        cache_dir = Path(args.cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        cache_path = cache_dir / f"features-{key[:32]}.zip"
        if cache_path.is_file():
            cached = load_features(str(cache_path), expect_sha256=dataset_sha)
            return cached.space, cached.matrix
    space, matrix = fit_feature_space(dataset.instances, resources, config)
    if cache_path is not None:
        save_features(
            str(cache_path),
            space,
            [inst.id for inst in dataset],
            matrix,
            dataset_sha,
        )
    return space, matrix


def _fit_model(K, y, args, X, kcfg, C=None):
    C = args.C if C is None else C
    if args.task == "classify":
        return svc_fit(K, y, C, vectors=X, kernel=kcfg)
    return nusvr_fit(K, y, C, args.nu, vectors=X, kernel=kcfg)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        atomic_write_bytes(path, text.encode("utf-8"))


# --------------------------------------------------------------------------
# commands


def cmd_featurize(args) -> int:
    dataset, dataset_sha = _read_dataset(args.train, require_labels=False)
    resources = _load_bundle(args)
    config = _feature_config(args)
    space, matrix = fit_feature_space(dataset.instances, resources, config)
    print(f"instances: {len(dataset)}")
    print("feature blocks:")
    print("  char stats: 6")
    print("  WordNet sense count + POS: 6")
    print("  context word similarity: 3")
    print("  context sense similarity: 3")
    orders = "/".join(str(o) for o in config.ngram_orders)
    print(
        f"  hashed char n-grams (orders {orders}): {config.ngram_block_len}"
    )
    sizes = "/".join(str(s) for s in config.grid_sizes)
    print(f"  spatial grid one-hot (sizes {sizes}): {config.grid_block_len}")
    print(f"  total: {config.total_len}")
    if args.out:
        save_features(
            args.out,
            space,
            [inst.id for inst in dataset],
            matrix,
            dataset_sha,
            extra_meta={
                "config": _run_config(args, "featurize"),
                "input_hashes": {
                    "train": dataset_sha,
                    **_resource_hashes(args),
                },
            },
        )
        print(f"wrote {args.out}")
    return EXIT_OK


def _train_on(args, C: float, kcfg: KernelConfig, X, y):
    K = normalized_gram(X, X, kcfg, jobs=args.jobs)
    return _fit_model(K, y, args, X, kcfg, C=C)


def cmd_train(args) -> int:
    dataset, dataset_sha = _read_dataset(args.train, require_labels=True)
    y = targets(dataset, args.task)
    resources = _load_bundle(args)
    config = _feature_config(args)
    space, X = _fitted_features(args, dataset, dataset_sha, resources, config)
    kcfg = _kernel_config(args)
    model = _train_on(args, args.C, kcfg, X, y)
    provenance = {
        "config": _run_config(args, "train"),
        "input_hashes": {"train": dataset_sha, **_resource_hashes(args)},
    }
    save_model(args.out, model, space, provenance)
    kind = "classify" if args.task == "classify" else "regress"
    print(
        f"trained {kind} model: {len(model.dual_coefs)} support vectors, "
        f"bias {model.bias:.6f}"
    )
    if isinstance(model, SvrModel):
        print(f"estimated tube width epsilon {model.epsilon:.6f}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_tune(args) -> int:
    train_ds, train_sha = _read_dataset(args.train, require_labels=True)
    valid_ds, valid_sha = _read_dataset(args.valid, require_labels=True)
    y_train = targets(train_ds, args.task)
    y_valid = targets(valid_ds, args.task)
    resources = _load_bundle(args)
    config = _feature_config(args)
    space, X_train = _fitted_features(args, train_ds, train_sha, resources, config)
    X_valid = featurize_dataset(valid_ds.instances, resources, space)
    grid = TuneGrid(nu=args.nu)
    result = grid_search(
        X_train, y_train, X_valid, y_valid, args.task, args.kernel, grid
    )
    metric = "macro_f1" if args.task == "classify" else "mae"
    lines = [f"# tuning {args.task} kernel={args.kernel} metric={metric}"]
    lines.append("C\tr\tscore")
    for cell in result.cells:
        r_text = "-" if cell.r is None else f"{cell.r:g}"
        score = "failed" if cell.score is None else f"{cell.score:.6f}"
        lines.append(f"{cell.C:g}\t{r_text}\t{score}")
        if cell.error:
            lines.append(f"# cell C={cell.C:g} r={r_text} error: {cell.error}")
    best = result.best
    best_r = "-" if best.r is None else f"{best.r:g}"
    lines.append(f"# best C={best.C:g} r={best_r} {metric}={best.score:.6f}")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if args.report:
        _write_text(args.report, report)
    kcfg = KernelConfig(kind=args.kernel, r=best.r)
    if args.refit_with_validation:
        merged = Dataset(instances=train_ds.instances + valid_ds.instances)
        space, X_fit = fit_feature_space(merged.instances, resources, config)
        y_fit = targets(merged, args.task)
    else:
        X_fit, y_fit = X_train, y_train
    model = _train_on(args, best.C, kcfg, X_fit, y_fit)
    provenance = {
        "config": _run_config(args, "tune"),
        "input_hashes": {
            "train": train_sha,
            "valid": valid_sha,
            **_resource_hashes(args),
        },
        "tuned": {"C": best.C, "r": best.r, metric: best.score},
        "refit_with_validation": bool(args.refit_with_validation),
        "grid": [
            {"C": c.C, "r": c.r, "score": c.score, "error": c.error}
            for c in result.cells
        ],
    }
    save_model(args.out, model, space, provenance)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model, space, _provenance = load_model(args.model)
    dataset, dataset_sha = _read_dataset(args.test, require_labels=False)
    resources = _load_bundle(args)
    X = featurize_dataset(dataset.instances, resources, space)
    if isinstance(model, SvrModel):
        values = nusvr_predict(model, X, clamp=args.clamp)
        rendered = [f"{v:.6f}" for v in values]
        task = "regress"
    else:
        labels, _dec = svc_predict(model, X)
        lo, hi = model.class_labels
        rendered = [str(hi if lab > 0 else lo) for lab in labels]
        task = "classify"
    header = {
        "config": _run_config(args, "predict", {"task": task}),
        "input_hashes": {
            "model": sha256_file(args.model),
            "test": dataset_sha,
            **_resource_hashes(args),
        },
    }
    lines = [f"# cwikernel predictions task={task}"]
    lines.append("# " + json.dumps(header, sort_keys=True))
    lines += [
        f"{inst.id}\t{value}" for inst, value in zip(dataset, rendered)
    ]
    _write_text(args.out, "\n".join(lines) + "\n")
    if args.out:
        print(f"wrote {args.out} ({len(dataset)} predictions)")
    return EXIT_OK


def _read_predictions(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read predictions {path}: {exc}") from None
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise DataError(f"{path}:{lineno}: expected id<TAB>value")
        if cols[0] in out:
            raise DataError(f"{path}:{lineno}: duplicate prediction id {cols[0]!r}")
        out[cols[0]] = cols[1]
    return out


def cmd_evaluate(args) -> int:
    gold_ds, _sha = _read_dataset(args.test, require_labels=True)
    if len(gold_ds) == 0:
        raise DataError(f"{args.test}: no gold instances to evaluate")
    preds = _read_predictions(args.pred)
    gold_ids = [inst.id for inst in gold_ds]
    missing = [i for i in gold_ids if i not in preds]
    if missing:
        raise DataError(f"predictions missing gold id {missing[0]!r}")
    extra = set(preds) - set(gold_ids)
    if extra:
        raise DataError(f"prediction id {sorted(extra)[0]!r} not in gold data")
    gold = targets(gold_ds, args.task)
    if args.task == "classify":
        mapping = {"0": -1.0, "1": 1.0, "-1": -1.0, "+1": 1.0}
        try:
            pred = np.array([mapping[preds[i]] for i in gold_ids])
        except KeyError as exc:
            raise DataError(f"non-binary predicted label {exc.args[0]!r}") from None
        report = classification_report(pred, gold)
        selected = (
            report.f1_positive if args.f1 == "positive" else report.f1_macro
        )
    else:
        try:
            pred = np.array([float(preds[i]) for i in gold_ids])
        except ValueError:
            raise DataError("non-numeric predicted score") from None
        report = regression_report(pred, gold)
        selected = None
    print(report.render_text())
    if selected is not None and args.f1 == "positive":
        print(f"selected F1 (positive class): {selected:.4f}")
    if args.out:
        keyvalues = report.render_keyvalues()
        if selected is not None:
            keyvalues += f"\nf1={selected:.6f}"
        _write_text(args.out, keyvalues + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cwikernel",
        description=(
            "Complex-word identification with hand-rolled kernel SVMs: "
            "lexical and semantic features, normalized Gram matrices, SMO."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    res = argparse.ArgumentParser(add_help=False)
    res.add_argument("--wordnet", required=True, metavar="DIR",
                     help="directory with index.POS/data.POS files")
    res.add_argument("--context-emb", required=True, metavar="FILE",
                     dest="context_emb",
                     help="embeddings for context-similarity features")
    res.add_argument("--grid-emb", required=True, metavar="FILE",
                     dest="grid_emb",
                     help="embeddings for the 2-D projection grid")

    feats = argparse.ArgumentParser(add_help=False)
    feats.add_argument("--features", default=",".join(ALL_FAMILIES),
                       metavar="LIST",
                       help="comma-separated feature families "
                            f"(default: {','.join(ALL_FAMILIES)})")
    feats.add_argument("--no-scaling", action="store_true",
                       help="skip min-max scaling of dense features")
    feats.add_argument("--cache-dir", metavar="DIR", default=None,
                       help="reuse features cached by dataset+config hash")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--task", required=True,
                        choices=("classify", "regress"))
    solver.add_argument("--kernel", default="rbf", choices=("linear", "rbf"))
    solver.add_argument("-C", type=float, default=1.0, dest="C",
                        help="soft-margin cost (default 1.0)")
    solver.add_argument("-r", type=float, default=1.0, dest="r",
                        help="RBF width parameter (default 1.0)")
    solver.add_argument("--nu", type=float, default=0.5,
                        help="nu-SVR support/violation bound (default 0.5)")

    jobs = argparse.ArgumentParser(add_help=False)
    jobs.add_argument("--jobs", type=int, default=1, metavar="N",
                      help="worker threads for Gram blocks (default 1)")

    p = sub.add_parser("featurize", parents=[res, feats, jobs],
                       help="extract features and report block dimensions")
    p.add_argument("--train", required=True, metavar="PATH")
    p.add_argument("--out", metavar="PATH", default=None,
                   help="write a features archive")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", parents=[res, feats, solver, jobs],
                       help="fit one model with fixed hyperparameters")
    p.add_argument("--train", required=True, metavar="PATH")
    p.add_argument("--out", required=True, metavar="PATH",
                   help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tune", parents=[res, feats, solver, jobs],
                       help="grid-search C and r on a validation split, "
                            "then fit the best model")
    p.add_argument("--train", required=True, metavar="PATH")
    p.add_argument("--valid", required=True, metavar="PATH")
    p.add_argument("--out", required=True, metavar="PATH",
                   help="best-cell model file to write")
    p.add_argument("--report", metavar="PATH", default=None,
                   help="also write the score table here")
    p.add_argument("--refit-with-validation", action="store_true",
                   dest="refit_with_validation",
                   help="train the final model on train+valid combined")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("predict", parents=[res, jobs],
                       help="apply a trained model to a dataset")
    p.add_argument("--model", required=True, metavar="PATH")
    p.add_argument("--test", required=True, metavar="PATH")
    p.add_argument("--out", metavar="PATH", default=None,
                   help="predictions TSV (default: stdout)")
    p.add_argument("--clamp", action="store_true",
                   help="clip regression scores into [0, 1]")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[],
                       help="score a predictions file against gold labels")
    p.add_argument("--pred", required=True, metavar="PATH")
    p.add_argument("--test", required=True, metavar="PATH",
                   help="gold labeled dataset")
    p.add_argument("--task", required=True, choices=("classify", "regress"))
    p.add_argument("--f1", default="macro", choices=("macro", "positive"),
                   help="which F1 the summary f1= key reports")
    p.add_argument("--out", metavar="PATH", default=None,
                   help="write machine-readable key=value report")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
