"""End-to-end command-line tests on the shipped synthetic fixture.

Commands run in-process through ``cli.main`` so exit codes and output can
be asserted directly.  A module-scoped fixture trains one classifier and
one regressor once; the predict/evaluate tests reuse them.
"""

import contextlib
import io
import json
import subprocess
import sys
from pathlib import Path
from types import SimpleNamespace

import pytest

from cwikernel import __version__, synthetic_data_dir
from cwikernel.cli import main
from cwikernel.errors import ConvergenceError
from cwikernel.learn import SvmModel, SvrModel
from cwikernel.store import load_features, load_model


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def env(tmp_path_factory):
    data = synthetic_data_dir()
    work = tmp_path_factory.mktemp("cli")
    res = [
        "--wordnet", str(data / "wordnet"),
        "--context-emb", str(data / "context.vec"),
        "--grid-emb", str(data / "grid.vec"),
    ]
    train = str(data / "train.tsv")
    valid = str(data / "valid.tsv")
    test = str(data / "test.tsv")

    small_train = work / "small-train.tsv"
    small_train.write_text(
        "\n".join(Path(train).read_text().splitlines()[:60]) + "\n"
    )
    small_valid = work / "small-valid.tsv"
    small_valid.write_text(
        "\n".join(Path(valid).read_text().splitlines()[:30]) + "\n"
    )

    cls_model = work / "cls.model"
    code, out, err = run_cli(
        ["train", *res, "--task", "classify", "--train", train,
         "--out", str(cls_model)]
    )
    assert code == 0, err
    reg_model = work / "reg.model"
    code, out, err = run_cli(
        ["train", *res, "--task", "regress", "--train", train,
         "--out", str(reg_model)]
    )
    assert code == 0, err
    return SimpleNamespace(
        res=res, train=train, valid=valid, test=test, work=work,
        small_train=str(small_train), small_valid=str(small_valid),
        cls_model=str(cls_model), reg_model=str(reg_model),
    )


# --------------------------------------------------------------------------
# featurize


def test_featurize_reports_blocks_and_writes_archive(env, tmp_path):
    out_path = tmp_path / "train.features"
    code, out, _ = run_cli(
        ["featurize", *env.res, "--train", env.train, "--out", str(out_path)]
    )
    assert code == 0
    assert "instances: 200" in out
    assert "char stats: 6" in out
    assert "hashed char n-grams (orders 1/2/3/4): 16384" in out
    assert "spatial grid one-hot (sizes 2/4/8/16/32): 1364" in out
    assert "total: 17766" in out
    assert f"wrote {out_path}" in out
    archive = load_features(str(out_path))
    assert len(archive.ids) == 200
    assert archive.matrix.shape == (200, 17766)
    assert archive.meta["input_hashes"]["train"] == archive.dataset_sha256


def test_featurize_without_out_writes_nothing(env, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, out, _ = run_cli(["featurize", *env.res, "--train", env.small_train])
    assert code == 0
    assert "wrote" not in out
    assert list(tmp_path.iterdir()) == []


# --------------------------------------------------------------------------
# train


def test_train_outputs(env):
    model, space, provenance = load_model(env.cls_model)
    assert isinstance(model, SvmModel)
    assert model.class_labels == (0, 1)
    assert 0 < len(model.dual_coefs) <= 200
    assert provenance["config"]["command"] == "train"
    assert provenance["config"]["task"] == "classify"
    assert set(provenance["input_hashes"]) >= {"train", "context_emb", "grid_emb"}
    assert space.scaler is not None

    model, _, _ = load_model(env.reg_model)
    assert isinstance(model, SvrModel)
    assert model.nu == 0.5
    assert model.epsilon >= 0.0


def test_train_prints_summary(env, tmp_path):
    out_path = tmp_path / "m.model"
    code, out, _ = run_cli(
        ["train", *env.res, "--task", "regress", "--train", env.small_train,
         "--kernel", "linear", "--out", str(out_path)]
    )
    assert code == 0
    assert "trained regress model:" in out
    assert "estimated tube width epsilon" in out
    assert f"wrote {out_path}" in out


def test_train_requires_labels(env, tmp_path):
    unlabeled = tmp_path / "unlabeled.tsv"
    lines = [
        "\t".join(line.split("\t")[:5])
        for line in Path(env.test).read_text().splitlines()[:5]
    ]
    unlabeled.write_text("\n".join(lines) + "\n")
    code, _, err = run_cli(
        ["train", *env.res, "--task", "classify", "--train", str(unlabeled),
         "--out", str(tmp_path / "x.model")]
    )
    assert code == 3
    assert "labeled 11-column data required" in err


# --------------------------------------------------------------------------
# predict


def test_predict_classify_format_and_determinism(env, tmp_path):
    outputs = []
    for name in ("p1.tsv", "p2.tsv"):
        path = tmp_path / name
        code, out, _ = run_cli(
            ["predict", *env.res, "--model", env.cls_model,
             "--test", env.test, "--out", str(path)]
        )
        assert code == 0
        assert f"wrote {path} (60 predictions)" in out
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1], "predict output is not byte-stable"

    lines = outputs[0].decode().splitlines()
    assert lines[0] == "# cwikernel predictions task=classify"
    header = json.loads(lines[1][2:])
    assert header["config"]["command"] == "predict"
    assert "model" in header["input_hashes"]
    body = lines[2:]
    assert len(body) == 60
    for line in body:
        inst_id, value = line.split("\t")
        assert inst_id.startswith("SYNTE")
        assert value in ("0", "1")


def test_predict_stdout_mode(env):
    code, out, _ = run_cli(
        ["predict", *env.res, "--model", env.cls_model, "--test", env.test]
    )
    assert code == 0
    assert out.startswith("# cwikernel predictions task=classify\n")
    assert "wrote" not in out


def test_predict_regress_clamped(env, tmp_path):
    path = tmp_path / "reg.tsv"
    code, _, _ = run_cli(
        ["predict", *env.res, "--model", env.reg_model,
         "--test", env.test, "--out", str(path), "--clamp"]
    )
    assert code == 0
    values = [
        float(line.split("\t")[1])
        for line in path.read_text().splitlines()
        if not line.startswith("#")
    ]
    assert len(values) == 60
    assert all(0.0 <= v <= 1.0 for v in values)


def test_predict_accepts_unlabeled_input(env, tmp_path):
    unlabeled = tmp_path / "unlabeled.tsv"
    lines = [
        "\t".join(line.split("\t")[:5])
        for line in Path(env.test).read_text().splitlines()[:5]
    ]
    unlabeled.write_text("\n".join(lines) + "\n")
    code, out, _ = run_cli(
        ["predict", *env.res, "--model", env.cls_model, "--test", str(unlabeled)]
    )
    assert code == 0
    assert len([l for l in out.splitlines() if not l.startswith("#")]) == 5


# --------------------------------------------------------------------------
# evaluate


def _predict_to(env, model, out_path, clamp=False):
    argv = ["predict", *env.res, "--model", model, "--test", env.test,
            "--out", str(out_path)]
    if clamp:
        argv.append("--clamp")
    code, _, err = run_cli(argv)
    assert code == 0, err
    return str(out_path)


def test_evaluate_classify(env, tmp_path):
    pred = _predict_to(env, env.cls_model, tmp_path / "p.tsv")
    report_path = tmp_path / "report.txt"
    code, out, _ = run_cli(
        ["evaluate", "--task", "classify", "--pred", pred, "--test", env.test,
         "--out", str(report_path)]
    )
    assert code == 0
    assert "task: classify" in out
    assert "instances: 60" in out
    accuracy = float(next(l for l in out.splitlines() if "accuracy" in l).split()[-1])
    assert accuracy > 0.6, "model should beat chance clearly on the fixture"
    keyvalues = dict(
        line.split("=", 1) for line in report_path.read_text().splitlines()
    )
    assert keyvalues["task"] == "classify"
    assert keyvalues["count"] == "60"
    assert float(keyvalues["accuracy"]) == pytest.approx(accuracy, abs=1e-4)
    assert {"f1_macro", "true_positive", "false_negative"} <= set(keyvalues)


def test_evaluate_f1_positive_switch(env, tmp_path):
    pred = _predict_to(env, env.cls_model, tmp_path / "p.tsv")
    out_path = tmp_path / "kv.txt"
    code, out, _ = run_cli(
        ["evaluate", "--task", "classify", "--pred", pred, "--test", env.test,
         "--f1", "positive", "--out", str(out_path)]
    )
    assert code == 0
    assert "selected F1 (positive class):" in out
    assert any(
        line.startswith("f1=") for line in out_path.read_text().splitlines()
    )


def test_evaluate_regress(env, tmp_path):
    pred = _predict_to(env, env.reg_model, tmp_path / "r.tsv", clamp=True)
    code, out, _ = run_cli(
        ["evaluate", "--task", "regress", "--pred", pred, "--test", env.test]
    )
    assert code == 0
    assert "task: regress" in out
    mae = float(next(l for l in out.splitlines() if "MAE" in l).split()[-1])
    assert mae < 0.2, "regression error should be small on the fixture"


def test_evaluate_id_mismatches(env, tmp_path):
    pred = Path(_predict_to(env, env.cls_model, tmp_path / "p.tsv"))
    lines = pred.read_text().splitlines()
    body = [l for l in lines if not l.startswith("#")]

    missing = tmp_path / "missing.tsv"
    missing.write_text("\n".join(body[1:]) + "\n")
    code, _, err = run_cli(
        ["evaluate", "--task", "classify", "--pred", str(missing),
         "--test", env.test]
    )
    assert code == 3 and "missing gold id" in err

    extra = tmp_path / "extra.tsv"
    extra.write_text("\n".join(body + ["GHOST0001\t1"]) + "\n")
    code, _, err = run_cli(
        ["evaluate", "--task", "classify", "--pred", str(extra),
         "--test", env.test]
    )
    assert code == 3 and "not in gold data" in err

    dup = tmp_path / "dup.tsv"
    dup.write_text("\n".join(body + [body[0]]) + "\n")
    code, _, err = run_cli(
        ["evaluate", "--task", "classify", "--pred", str(dup), "--test", env.test]
    )
    assert code == 3 and "duplicate prediction id" in err

    bad_label = tmp_path / "bad.tsv"
    bad_label.write_text(
        "\n".join([body[0].split("\t")[0] + "\tmaybe"] + body[1:]) + "\n"
    )
    code, _, err = run_cli(
        ["evaluate", "--task", "classify", "--pred", str(bad_label),
         "--test", env.test]
    )
    assert code == 3 and "non-binary predicted label" in err

    malformed = tmp_path / "cols.tsv"
    malformed.write_text("A\tB\tC\n")
    code, _, err = run_cli(
        ["evaluate", "--task", "classify", "--pred", str(malformed),
         "--test", env.test]
    )
    assert code == 3 and "expected id<TAB>value" in err


# --------------------------------------------------------------------------
# tune


def test_tune_grid_table_and_model(env, tmp_path):
    model_path = tmp_path / "tuned.model"
    report_path = tmp_path / "tune.txt"
    code, out, err = run_cli(
        ["tune", *env.res, "--task", "classify", "--kernel", "rbf",
         "--train", env.small_train, "--valid", env.small_valid,
         "--out", str(model_path), "--report", str(report_path)]
    )
    assert code == 0, err
    lines = out.splitlines()
    assert lines[0] == "# tuning classify kernel=rbf metric=macro_f1"
    assert lines[1] == "C\tr\tscore"
    cells = [l for l in lines if l[:1].isdigit()]
    assert len(cells) == 16  # 4 C values x 4 r values
    assert any(l.startswith("# best C=") for l in lines)
    # report file holds the same table that went to stdout
    assert report_path.read_text() in out + "\n" or out.startswith(
        report_path.read_text()
    )
    model, _, provenance = load_model(str(model_path))
    assert isinstance(model, SvmModel)
    assert provenance["tuned"]["C"] in (0.1, 1.0, 10.0, 100.0)
    assert provenance["tuned"]["r"] in (0.5, 1.0, 1.5, 2.0)
    assert len(provenance["grid"]) == 16
    assert provenance["refit_with_validation"] is False


def test_tune_linear_has_four_cells(env, tmp_path):
    code, out, _ = run_cli(
        ["tune", *env.res, "--task", "regress", "--kernel", "linear",
         "--train", env.small_train, "--valid", env.small_valid,
         "--out", str(tmp_path / "lin.model")]
    )
    assert code == 0
    cells = [l for l in out.splitlines() if l[:1].isdigit()]
    assert len(cells) == 4
    assert all(l.split("\t")[1] == "-" for l in cells)  # no r for linear


def test_tune_refit_with_validation(env, tmp_path):
    model_path = tmp_path / "refit.model"
    code, _, err = run_cli(
        ["tune", *env.res, "--task", "classify", "--kernel", "linear",
         "--train", env.small_train, "--valid", env.small_valid,
         "--out", str(model_path), "--refit-with-validation"]
    )
    assert code == 0, err
    model, _, provenance = load_model(str(model_path))
    assert provenance["refit_with_validation"] is True
    # support indices may now point into the merged 60+30 instance set
    assert max(model.support_indices) < 90


# --------------------------------------------------------------------------
# feature cache


def test_cache_dir_reuse(env, tmp_path):
    cache = tmp_path / "cache"
    models = []
    for name in ("a.model", "b.model"):
        path = tmp_path / name
        code, _, err = run_cli(
            ["train", *env.res, "--task", "classify", "--train", env.small_train,
             "--cache-dir", str(cache), "--out", str(path)]
        )
        assert code == 0, err
        models.append(path.read_bytes())
    cached = list(cache.glob("features-*.zip"))
    assert len(cached) == 1, "second run should reuse the cached features"
    assert models[0] == models[1]
    # the cache key includes the config: changing it adds a second entry
    code, _, _ = run_cli(
        ["train", *env.res, "--task", "classify", "--train", env.small_train,
         "--features", "chars", "--cache-dir", str(cache),
         "--out", str(tmp_path / "c.model")]
    )
    assert code == 0
    assert len(list(cache.glob("features-*.zip"))) == 2


# --------------------------------------------------------------------------
# exit codes and plumbing


def test_usage_errors_exit_2(env):
    with pytest.raises(SystemExit) as excinfo:
        run_cli(["not-a-command"])
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit) as excinfo:
        run_cli(["train", *env.res, "--train", env.train, "--out", "x"])
    assert excinfo.value.code == 2  # --task is required


def test_missing_dataset_exits_3(env, tmp_path):
    code, _, err = run_cli(
        ["train", *env.res, "--task", "classify",
         "--train", str(tmp_path / "nope.tsv"), "--out", str(tmp_path / "m")]
    )
    assert code == 3
    assert "cannot read dataset" in err


def test_broken_resources_exit_4(env, tmp_path):
    empty = tmp_path / "empty-wordnet"
    empty.mkdir()
    code, _, err = run_cli(
        ["train", "--wordnet", str(empty),
         "--context-emb", env.res[3], "--grid-emb", env.res[5],
         "--task", "classify", "--train", env.small_train,
         "--out", str(tmp_path / "m.model")]
    )
    assert code == 4
    assert "error:" in err


def test_convergence_failure_exits_5(env, tmp_path, monkeypatch):
    import cwikernel.cli as cli_mod

    def stubborn(*args, **kwargs):
        raise ConvergenceError("iteration limit reached")

    monkeypatch.setattr(cli_mod, "svc_fit", stubborn)
    code, _, err = run_cli(
        ["train", *env.res, "--task", "classify", "--train", env.small_train,
         "--out", str(tmp_path / "m.model")]
    )
    assert code == 5
    assert "iteration limit reached" in err


def test_version_flag():
    with pytest.raises(SystemExit) as excinfo:
        run_cli(["--version"])
    assert excinfo.value.code == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cwikernel.cli", "--version"],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    assert __version__ in proc.stdout
