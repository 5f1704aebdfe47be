"""File formats: JSONL records, CSV trajectories, manifests, hashing.

All record files are JSON Lines with sorted keys so reruns are
byte-identical; configuration documents are single JSON files. Trajectory
rows may carry poses (t, x, y, heading), rates (t, v, omega), or the full
state chain (t, v, a, j, omega, theta[, x, y]); a ``clip_id`` field
groups rows into clips and defaults to a single clip when absent.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from . import __version__
from .errors import ConfigError
from .kinematics import (
    PoseSample,
    SmoothingConfig,
    StateSequence,
    derive_states,
    derive_states_from_rates,
    resample_rate_log,
    resample_uniform,
)

DEFAULT_CLIP_ID = "clip_000"


def write_jsonl(path: str | Path, records: Iterable[Mapping[str, Any]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False))
            handle.write("\n")


def read_jsonl(path: str | Path) -> list[dict]:
    records = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def write_json(path: str | Path, payload: Mapping[str, Any]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _read_rows(path: str | Path) -> list[dict]:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with path.open("r", encoding="utf-8", newline="") as handle:
            rows = []
            for row in csv.DictReader(handle):
                parsed = {}
                for key, value in row.items():
                    if key == "clip_id" or key == "source":
                        parsed[key] = value
                    elif value not in (None, ""):
                        parsed[key] = float(value)
                rows.append(parsed)
            return rows
    return read_jsonl(path)


def read_trajectory_clips(path: str | Path) -> dict[str, list[dict]]:
    """Group trajectory rows by clip id, preserving first-seen order."""
    clips: dict[str, list[dict]] = {}
    for row in _read_rows(path):
        clip_id = str(row.get("clip_id", DEFAULT_CLIP_ID))
        clips.setdefault(clip_id, []).append(row)
    return clips


_FULL_STATE_KEYS = {"t", "v", "a", "j", "omega", "theta"}


def rows_to_sequence(
    rows: list[dict],
    rate_hz: float = 10.0,
    window_s: float = 3.0,
    smoothing: SmoothingConfig | None = None,
) -> StateSequence:
    """Build a StateSequence from one clip's rows, whatever their schema."""
    if not rows:
        raise ConfigError("clip has no rows")
    keys = set(rows[0])
    if _FULL_STATE_KEYS <= keys:
        kwargs = {
            name: np.array([row[name] for row in rows], dtype=float)
            for name in _FULL_STATE_KEYS
        }
        if {"x", "y"} <= keys:
            kwargs["x"] = np.array([row["x"] for row in rows], dtype=float)
            kwargs["y"] = np.array([row["y"] for row in rows], dtype=float)
        return StateSequence(**kwargs)
    if {"t", "x", "y", "heading"} <= keys:
        poses = [
            PoseSample(row["t"], row["x"], row["y"], row["heading"]) for row in rows
        ]
        grid = resample_uniform(poses, rate_hz, window_s)
        return derive_states(grid, smoothing)
    if {"t", "v", "omega"} <= keys:
        t = np.array([row["t"] for row in rows], dtype=float)
        v = np.array([row["v"] for row in rows], dtype=float)
        omega = np.array([row["omega"] for row in rows], dtype=float)
        grid_t, grid_v, grid_w = resample_rate_log(t, v, omega, rate_hz, window_s)
        return derive_states_from_rates(grid_t, grid_v, grid_w, smoothing)
    raise ConfigError(
        "trajectory rows must carry (t,x,y,heading), (t,v,omega), or the "
        f"full state chain; got fields {sorted(keys)}"
    )


def sequence_to_rows(clip_id: str, seq: StateSequence) -> list[dict]:
    rows = []
    for i in range(seq.n):
        row = {
            "clip_id": clip_id,
            "t": float(seq.t[i]),
            "v": float(seq.v[i]),
            "a": float(seq.a[i]),
            "j": float(seq.j[i]),
            "omega": float(seq.omega[i]),
            "theta": float(seq.theta[i]),
        }
        if seq.has_position():
            row["x"] = float(seq.x[i])
            row["y"] = float(seq.y[i])
        rows.append(row)
    return rows


def read_source_manifest(path: str | Path) -> dict[str, str]:
    """clip_id -> source mapping from a two-column CSV."""
    sources = {}
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            sources[row["clip_id"]] = row["source"]
    return sources


def read_predictions(path: str | Path) -> list[dict]:
    """Prediction rows: clip_id, question_id, and response text.

    Rows may instead carry a pre-parsed label under ``parsed``; an
    optional ``model`` field tags multi-model files.
    """
    rows = read_jsonl(path)
    for row in rows:
        if "clip_id" not in row or "question_id" not in row:
            raise ConfigError("prediction rows need clip_id and question_id")
        if "response" not in row and "parsed" not in row:
            raise ConfigError("prediction rows need a response or parsed field")
    return rows


def write_manifest(
    out_dir: str | Path,
    command: str,
    config: Mapping[str, Any],
    inputs: Mapping[str, str | Path],
    outputs: Mapping[str, str | Path],
) -> Path:
    """Record config and content hashes of a run next to its outputs."""
    config_text = json.dumps(config, sort_keys=True, ensure_ascii=False)
    manifest = {
        "command": command,
        "config": json.loads(config_text),
        "config_sha256": sha256_text(config_text),
        "inputs": {
            name: {"path": str(path), "sha256": sha256_file(path)}
            for name, path in sorted(inputs.items())
        },
        "outputs": {
            name: {"path": str(path), "sha256": sha256_file(path)}
            for name, path in sorted(outputs.items())
        },
        "version": __version__,
    }
    path = Path(out_dir) / "manifest.json"
    write_json(path, manifest)
    return path
