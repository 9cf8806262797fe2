"""Artifact persistence: a zip container for feature matrices and a JSON
model file, both byte-deterministic for identical inputs.

Determinism rules: zip members are written in sorted name order with a
fixed 1980 timestamp, JSON is dumped with sorted keys and no NaN, and no
absolute paths are embedded.  Writes go through a temp file in the target
directory followed by an atomic rename, so readers never observe a partial
artifact.  Feature files record the SHA-256 of the dataset they came from;
loaders can verify it and refuse stale artifacts.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import tempfile
import zipfile
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .features import FeatureConfig, FeatureSpace, GridBounds, ScalerState
from .kernel import KernelConfig
from .learn import SvmModel, SvrModel
from .numeric import PcaModel

FEATURES_FORMAT = "cwikernel-features"
MODEL_FORMAT = "cwikernel-model"
FORMAT_VERSION = 1
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def atomic_write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(payload) -> bytes:
    text = json.dumps(
        payload, sort_keys=True, separators=(",", ":"), allow_nan=False
    )
    return text.encode("utf-8")


def _npy_bytes(array: np.ndarray) -> bytes:
    buf = io.BytesIO()
    np.save(buf, np.ascontiguousarray(array), allow_pickle=False)
    return buf.getvalue()


def _zip_bytes(members: dict[str, bytes]) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for name in sorted(members):
            info = zipfile.ZipInfo(name, date_time=_ZIP_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, members[name])
    return buf.getvalue()


# --------------------------------------------------------------------------
# feature space (de)serialization


def _space_to_dict(space: FeatureSpace) -> dict:
    out: dict = {"config": space.config.to_dict()}
    out["scaler"] = (
        None
        if space.scaler is None
        else {
            "mins": [float(v) for v in space.scaler.mins],
            "maxs": [float(v) for v in space.scaler.maxs],
        }
    )
    out["pca"] = (
        None
        if space.pca is None
        else {
            "mean": [float(v) for v in space.pca.mean],
            "components": [[float(v) for v in row] for row in space.pca.components],
            "explained_variance": [float(v) for v in space.pca.explained_variance],
        }
    )
    out["bounds"] = (
        None
        if space.bounds is None
        else {
            "min1": space.bounds.min1,
            "max1": space.bounds.max1,
            "min2": space.bounds.min2,
            "max2": space.bounds.max2,
        }
    )
    return out


def _space_from_dict(payload: dict) -> FeatureSpace:
    config = FeatureConfig.from_dict(payload["config"])
    scaler = None
    if payload.get("scaler") is not None:
        scaler = ScalerState(
            mins=np.asarray(payload["scaler"]["mins"], dtype=np.float64),
            maxs=np.asarray(payload["scaler"]["maxs"], dtype=np.float64),
        )
    pca = None
    if payload.get("pca") is not None:
        pca = PcaModel(
            mean=np.asarray(payload["pca"]["mean"], dtype=np.float64),
            components=np.asarray(payload["pca"]["components"], dtype=np.float64),
            explained_variance=np.asarray(
                payload["pca"]["explained_variance"], dtype=np.float64
            ),
        )
    bounds = None
    if payload.get("bounds") is not None:
        b = payload["bounds"]
        bounds = GridBounds(
            min1=float(b["min1"]),
            max1=float(b["max1"]),
            min2=float(b["min2"]),
            max2=float(b["max2"]),
        )
    return FeatureSpace(config=config, pca=pca, bounds=bounds, scaler=scaler)


# --------------------------------------------------------------------------
# features file


@dataclass(frozen=True)
class FeaturesFile:
    space: FeatureSpace
    ids: tuple[str, ...]
    matrix: np.ndarray
    dataset_sha256: str
    meta: dict


def save_features(
    path: str,
    space: FeatureSpace,
    ids: list[str] | tuple[str, ...],
    matrix: np.ndarray,
    dataset_sha256: str,
    extra_meta: dict | None = None,
) -> None:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != len(ids):
        raise DataError("feature matrix does not match instance ids")
    meta = {
        "format": FEATURES_FORMAT,
        "format_version": FORMAT_VERSION,
        "count": len(ids),
        "dim": int(matrix.shape[1]),
        "dataset_sha256": dataset_sha256,
        "space": _space_to_dict(space),
    }
    if extra_meta:
        meta.update(extra_meta)
    members = {
        "meta.json": _dump_json(meta),
        "ids.json": _dump_json(list(ids)),
        "matrix.npy": _npy_bytes(matrix),
    }
    atomic_write_bytes(path, _zip_bytes(members))


def load_features(path: str, expect_sha256: str | None = None) -> FeaturesFile:
    try:
        with zipfile.ZipFile(path) as zf:
            meta = json.loads(zf.read("meta.json"))
            ids = tuple(json.loads(zf.read("ids.json")))
            matrix = np.load(io.BytesIO(zf.read("matrix.npy")), allow_pickle=False)
    except (OSError, KeyError, ValueError, zipfile.BadZipFile) as exc:
        raise DataError(f"cannot read features file {path!r}: {exc}") from exc
    if meta.get("format") != FEATURES_FORMAT:
        raise DataError(f"{path!r} is not a features file")
    if meta.get("format_version") != FORMAT_VERSION:
        raise DataError(
            f"unsupported features format version {meta.get('format_version')!r}"
        )
    if expect_sha256 is not None and meta["dataset_sha256"] != expect_sha256:
        raise DataError(
            "features file is stale: dataset hash "
            f"{meta['dataset_sha256'][:12]} does not match input "
            f"{expect_sha256[:12]}"
        )
    if len(ids) != matrix.shape[0]:
        raise DataError(f"corrupt features file {path!r}: id/matrix mismatch")
    return FeaturesFile(
        space=_space_from_dict(meta["space"]),
        ids=ids,
        matrix=matrix,
        dataset_sha256=meta["dataset_sha256"],
        meta=meta,
    )


# --------------------------------------------------------------------------
# model file


def _sparse_rows(matrix: np.ndarray) -> list[list[list]]:
    rows = []
    for row in matrix:
        nz = np.flatnonzero(row != 0.0)
        rows.append([[int(j), float(row[j])] for j in nz])
    return rows


def _dense_rows(rows: list, dim: int) -> np.ndarray:
    out = np.zeros((len(rows), dim))
    for i, entries in enumerate(rows):
        for j, value in entries:
            out[i, int(j)] = float(value)
    return out


def save_model(
    path: str,
    model: SvmModel | SvrModel,
    space: FeatureSpace,
    provenance: dict | None = None,
) -> None:
    is_svr = isinstance(model, SvrModel)
    payload: dict = {
        "format": MODEL_FORMAT,
        "format_version": FORMAT_VERSION,
        "task": "regress" if is_svr else "classify",
        "kernel": model.kernel.to_dict(),
        "C": float(model.C),
        "bias": float(model.bias),
        "support": {
            "count": int(model.support_vectors.shape[0]),
            "dim": int(model.support_vectors.shape[1]),
            "indices": [int(i) for i in model.support_indices],
            "coefs": [float(v) for v in model.dual_coefs],
            "rows": _sparse_rows(model.support_vectors),
        },
        "feature_space": _space_to_dict(space),
        "provenance": provenance or {},
    }
    if is_svr:
        payload["nu"] = float(model.nu)
        payload["epsilon"] = float(model.epsilon)
    else:
        payload["class_labels"] = list(model.class_labels)
    atomic_write_bytes(path, _dump_json(payload) + b"\n")


def load_model(path: str) -> tuple[SvmModel | SvrModel, FeatureSpace, dict]:
    try:
        with open(path, "rb") as handle:
            payload = json.loads(handle.read())
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read model file {path!r}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise DataError(f"{path!r} is not a model file")
    if payload.get("format_version") != FORMAT_VERSION:
        raise DataError(
            f"unsupported model format version {payload.get('format_version')!r}"
        )
    try:
        support = payload["support"]
        vectors = _dense_rows(support["rows"], int(support["dim"]))
        common = dict(
            support_vectors=vectors,
            support_indices=np.asarray(support["indices"], dtype=np.int64),
            dual_coefs=np.asarray(support["coefs"], dtype=np.float64),
            bias=float(payload["bias"]),
            kernel=KernelConfig.from_dict(payload["kernel"]),
            C=float(payload["C"]),
        )
        if payload["task"] == "regress":
            model: SvmModel | SvrModel = SvrModel(
                nu=float(payload["nu"]),
                epsilon=float(payload["epsilon"]),
                **common,
            )
        else:
            model = SvmModel(
                class_labels=tuple(payload.get("class_labels", (0, 1))),
                **common,
            )
        space = _space_from_dict(payload["feature_space"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"corrupt model file {path!r}: {exc}") from exc
    return model, space, payload.get("provenance", {})
