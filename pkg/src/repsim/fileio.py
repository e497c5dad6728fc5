"""Reading activations, writing reports, and checkpoint directories.

Activation files are either NPY version 1.0 (2-D, little-endian ``<f4`` or
``<f8``, C order) or CSV of reals with an optional header line. Rows are
neurons and columns are datapoints; ``transpose=True`` flips that on load.
"""
from __future__ import annotations

import ast
import csv
import io as _io
import json
import struct
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .analysis import ClusterAssignment, DistanceMatrix
from .dynamics import CheckpointSeries
from .errors import IoFailure, MalformedHeader, NonFiniteValue, UnsupportedFormat
from .similarity import DistanceReport

SCHEMA_VERSION = 1
NPY_MAGIC = b"\x93NUMPY"
_SUPPORTED_DESCR = ("<f4", "<f8")


# --- NPY ---------------------------------------------------------------------

def parse_npy(buf: bytes) -> np.ndarray:
    if len(buf) < 10 or buf[:6] != NPY_MAGIC:
        raise UnsupportedFormat("not an NPY file (bad magic bytes)")
    major, minor = buf[6], buf[7]
    if (major, minor) != (1, 0):
        raise UnsupportedFormat(f"NPY version {major}.{minor} is not supported (need 1.0)")
    (hlen,) = struct.unpack("<H", buf[8:10])
    if len(buf) < 10 + hlen:
        raise MalformedHeader("file ends inside the header")
    try:
        header = ast.literal_eval(buf[10 : 10 + hlen].decode("latin1"))
    except (ValueError, SyntaxError, UnicodeDecodeError) as exc:
        raise MalformedHeader(f"cannot parse header: {exc}") from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise MalformedHeader("header must be a dict with descr, fortran_order, shape")
    descr, fortran, shape = header["descr"], header["fortran_order"], header["shape"]
    if descr not in _SUPPORTED_DESCR:
        raise UnsupportedFormat(f"dtype {descr!r} is not supported")
    if fortran is not False:
        raise UnsupportedFormat("fortran_order arrays are not supported")
    if not isinstance(shape, tuple) or not all(isinstance(s, int) and s >= 0 for s in shape):
        raise MalformedHeader(f"invalid shape {shape!r}")
    if len(shape) != 2:
        raise UnsupportedFormat(f"only 2-D arrays are supported, got {len(shape)}-D")
    dtype = np.dtype(descr)
    count = shape[0] * shape[1]
    body = buf[10 + hlen :]
    if len(body) != count * dtype.itemsize:
        raise MalformedHeader(f"expected {count * dtype.itemsize} data bytes, found {len(body)}")
    return np.frombuffer(body, dtype=dtype).reshape(shape).copy()


def format_npy(array: np.ndarray) -> bytes:
    arr = np.asarray(array)
    if arr.ndim != 2:
        raise UnsupportedFormat("only 2-D arrays can be written")
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(np.float64)
    arr = np.ascontiguousarray(arr.astype(arr.dtype.newbyteorder("<")))
    header = "{'descr': %r, 'fortran_order': False, 'shape': %r, }" % (arr.dtype.str, tuple(arr.shape))
    # total preamble is padded to a multiple of 64 bytes and ends in a newline
    pad = 64 - (10 + len(header) + 1) % 64
    header = header + " " * (pad % 64) + "\n"
    return NPY_MAGIC + b"\x01\x00" + struct.pack("<H", len(header)) + header.encode("latin1") + arr.tobytes()


# --- activations ---------------------------------------------------------------

def _parse_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(_io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise UnsupportedFormat("empty CSV")
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        rows = rows[1:]  # header line
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise UnsupportedFormat(f"non-numeric CSV entry: {exc}") from exc
    if data.ndim != 2 or data.size == 0:
        raise UnsupportedFormat("CSV rows must all have the same length")
    return data


def load_activations(path, transpose: bool = False) -> np.ndarray:
    """Load an activation matrix from an NPY or CSV file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if raw[:6] == NPY_MAGIC:
        arr = parse_npy(raw)
    elif path.suffix.lower() == ".npy":
        raise UnsupportedFormat(f"{path} has a .npy suffix but no NPY magic")
    else:
        try:
            arr = _parse_csv(raw.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise UnsupportedFormat(f"{path} is neither NPY nor text CSV") from exc
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{path} contains NaN or Inf")
    return arr.T.copy() if transpose else arr


def save_activations(path, array) -> Path:
    path = Path(path)
    _write_bytes(path, format_npy(array))
    return path


# --- JSON helpers ----------------------------------------------------------------

def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _write_bytes(path: Path, data: bytes) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    body = {"schema_version": SCHEMA_VERSION, **to_jsonable(payload)}
    _write_bytes(path, (json.dumps(body, indent=2, allow_nan=True) + "\n").encode())
    return path


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UnsupportedFormat(f"{path} is not valid JSON: {exc}") from exc


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence], provenance: dict | None = None) -> Path:
    """CSV with an optional leading ``# spec: {...}`` comment line."""
    buf = _io.StringIO()
    if provenance is not None:
        buf.write("# spec: " + json.dumps(to_jsonable(provenance), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    path = Path(path)
    _write_bytes(path, buf.getvalue().encode())
    return path


# --- reports -------------------------------------------------------------------------

def report_to_dict(report: DistanceReport, provenance: dict | None = None) -> dict:
    return to_jsonable({
        "metric": report.metric,
        "distance": float(report.distance),
        "weights": report.weights,
        "k_significant": report.k_significant,
        "direction": report.direction,
        "metadata": report.metadata,
        "provenance": provenance or {},
    })


def save_report(report: DistanceReport, path, provenance: dict | None = None) -> Path:
    """Write a distance report as JSON; floats are stored at full precision."""
    return write_json(path, report_to_dict(report, provenance))


def load_report(path) -> tuple[DistanceReport, dict]:
    body = read_json(path)
    if body.get("schema_version") != SCHEMA_VERSION:
        raise UnsupportedFormat(f"unsupported schema_version {body.get('schema_version')!r}")
    weights = body.get("weights")
    report = DistanceReport(
        metric=body["metric"],
        distance=body["distance"],
        weights=None if weights is None else np.asarray(weights, dtype=float),
        k_significant=body.get("k_significant"),
        direction=body.get("direction"),
        metadata=body.get("metadata") or {},
    )
    return report, body.get("provenance") or {}


def save_matrix(d: DistanceMatrix, path, csv_path=None, provenance: dict | None = None) -> Path:
    path = write_json(path, {
        "metric": d.metric,
        "labels": d.labels,
        "values": d.values,
        "max_asymmetry": d.asymmetry,
        "provenance": provenance or {},
    })
    if csv_path is not None:
        write_csv(csv_path, ["label", *d.labels],
                  [[lab, *row] for lab, row in zip(d.labels, d.values.tolist())], provenance)
    return path


def load_matrix(path) -> DistanceMatrix:
    body = read_json(path)
    if body.get("schema_version") != SCHEMA_VERSION:
        raise UnsupportedFormat(f"unsupported schema_version {body.get('schema_version')!r}")
    return DistanceMatrix(list(body["labels"]), np.asarray(body["values"], dtype=float), body.get("metric", ""))


def save_clusters(c: ClusterAssignment, path, provenance: dict | None = None) -> Path:
    return write_json(path, {
        "assignments": c.assignments,
        "merge_heights": c.merge_heights,
        "chosen_k": c.chosen_k,
        "provenance": provenance or {},
    })


# --- checkpoint directories ------------------------------------------------------------
#
# <dir>/manifest.json  {"schema_version": 1, "steps": [...], "layers": [...], ...}
# <dir>/step_<step:08d>_<layer>.npy

def checkpoint_file(directory, step: int, layer: str) -> Path:
    return Path(directory) / f"step_{int(step):08d}_{layer}.npy"


def save_checkpoints(directory, checkpoints, layer_names: Sequence[str] | None = None,
                     provenance: dict | None = None) -> Path:
    """Persist :class:`~repsim.toy_nets.ToyNetCheckpoint` objects to a directory."""
    directory = Path(directory)
    depth = len(checkpoints[0].per_layer_activations)
    names = list(layer_names) if layer_names else [f"layer{i}" for i in range(depth)]
    for ck in checkpoints:
        for name, act in zip(names, ck.per_layer_activations):
            save_activations(checkpoint_file(directory, ck.step, name), act)
    write_json(directory / "manifest.json", {
        "steps": [ck.step for ck in checkpoints],
        "layers": names,
        "train_loss": [ck.train_loss for ck in checkpoints],
        "provenance": provenance or {},
    })
    return directory


def load_checkpoint_series(directory, layer: str) -> CheckpointSeries:
    directory = Path(directory)
    manifest = read_json(directory / "manifest.json")
    if layer not in manifest.get("layers", []):
        raise UnsupportedFormat(f"layer {layer!r} not in manifest {manifest.get('layers')}")
    steps = manifest["steps"]
    acts = [load_activations(checkpoint_file(directory, s, layer)) for s in steps]
    return CheckpointSeries(tuple(steps), tuple(acts))


def checkpoint_layers(directory) -> list[str]:
    return list(read_json(Path(directory) / "manifest.json")["layers"])
