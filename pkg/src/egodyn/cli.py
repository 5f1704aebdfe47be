"""Command-line front end.

Usage: ``egodyn <command> --config <path> [--alpha ...] [--encoding ...]
[--seed N] [--out DIR]``. Commands read a JSON config document; the
command-line flags override the matching config fields. Every run writes
a ``manifest.json`` with content hashes of the config, inputs, and
outputs so results can be verified and reproduced byte for byte.

``EGODYN_THREADS`` caps the worker threads used for clip-parallel
labeling (default 1, fully serial); output order never depends on it.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import balancer, baselines, io, metrics, report
from .encodings import ENCODING_MODES, encode_trajectory
from .errors import ConfigError, EgodynError
from .kinematics import stratification_bin, stratification_tags, summarize
from .oracle import label_all
from .questions import QUESTION_ORDER
from .synth import generate_suite
from .thresholds import ThresholdConfig, calibrate_thresholds

COMMANDS = (
    "label",
    "balance",
    "evaluate",
    "sweep",
    "parse",
    "baseline",
    "synth",
    "calibrate-thresholds",
)

_READ_PATH_KEYS = ("input", "truth", "predictions", "trajectories", "proxies",
                   "labels", "sources", "thresholds")


@dataclass
class RunConfig:
    """Merged command configuration (config file plus CLI overrides)."""

    command: str
    params: dict = field(default_factory=dict)
    out_dir: Path = Path("egodyn_out")
    seed: int | None = None
    alphas: list[float] | None = None
    encoding: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for key in _READ_PATH_KEYS:
            value = self.params.get(key)
            paths = value.values() if isinstance(value, dict) else [value]
            for path in paths:
                if isinstance(path, str) and not Path(path).exists():
                    raise ConfigError(f"{key} path does not exist: {path}")
        if self.command == "sweep":
            alphas = self.alphas or self.params.get("alphas")
            if not alphas or 1.0 not in [float(a) for a in alphas]:
                raise ConfigError("sweep alpha list must include 1.0")
        if self.encoding is not None and self.encoding not in ENCODING_MODES:
            raise ConfigError(f"unknown encoding mode {self.encoding!r}")


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("EGODYN_THREADS", "1")))
    except ValueError:
        return 1


def _map_clips(fn, items):
    workers = _worker_count()
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _load_thresholds(cfg: RunConfig) -> ThresholdConfig:
    path = cfg.params.get("thresholds")
    return ThresholdConfig.from_json(path) if path else ThresholdConfig()


def _load_clips(cfg: RunConfig, key: str = "input"):
    path = cfg.params[key]
    rate = float(cfg.params.get("rate_hz", 10.0))
    window = float(cfg.params.get("window_s", 3.0))
    clips = io.read_trajectory_clips(path)
    return [
        (clip_id, io.rows_to_sequence(rows, rate, window))
        for clip_id, rows in clips.items()
    ]


def _write_prompts(cfg: RunConfig, sequences, out_dir: Path) -> Path:
    n_steps = int(cfg.params.get("encoding_steps", 10))
    rows = []
    for clip_id, seq in sequences:
        summary = summarize(seq)
        rows.append(
            {
                "clip_id": clip_id,
                "mode": cfg.encoding,
                "text": encode_trajectory(seq, summary, cfg.encoding, n_steps),
            }
        )
    path = out_dir / "prompts.jsonl"
    io.write_jsonl(path, rows)
    return path


def _cmd_label(cfg: RunConfig) -> dict[str, Path]:
    thresholds = _load_thresholds(cfg)
    sequences = _load_clips(cfg)
    out = cfg.out_dir

    def label_one(item):
        clip_id, seq = item
        summary = summarize(seq, heading_mode=thresholds.heading_total_mode)
        records = label_all(seq, summary, thresholds, clip_id)
        tags = stratification_tags(seq, summary, thresholds)
        meta = {
            "clip_id": clip_id,
            "summary": summary.as_dict(),
            "tags": tags,
            "stratification_bin": stratification_bin(tags),
        }
        return records, meta

    results = _map_clips(label_one, sequences)
    label_rows = [r.to_dict() for records, _ in results for r in records]
    meta_rows = [meta for _, meta in results]
    outputs = {}
    io.write_jsonl(out / "labels.jsonl", label_rows)
    outputs["labels"] = out / "labels.jsonl"
    io.write_jsonl(out / "clip_summaries.jsonl", meta_rows)
    outputs["clip_summaries"] = out / "clip_summaries.jsonl"
    if cfg.encoding:
        outputs["prompts"] = _write_prompts(cfg, sequences, out)
    return outputs


def _cmd_synth(cfg: RunConfig) -> dict[str, Path]:
    count = int(cfg.params.get("count", 100))
    seed = cfg.seed if cfg.seed is not None else int(cfg.params.get("seed", 0))
    mix = cfg.params.get("regime_mix")
    suite = generate_suite(count, seed=seed, regime_mix=mix)
    out = cfg.out_dir
    traj_rows = []
    label_rows = []
    for clip in suite:
        traj_rows.extend(io.sequence_to_rows(clip.clip_id, clip.seq))
        for question in QUESTION_ORDER:
            label_rows.append(
                {
                    "clip_id": clip.clip_id,
                    "question_id": question,
                    "answer": clip.expected[question],
                    "template": clip.template,
                }
            )
    outputs = {}
    io.write_jsonl(out / "trajectories.jsonl", traj_rows)
    outputs["trajectories"] = out / "trajectories.jsonl"
    io.write_jsonl(out / "expected_labels.jsonl", label_rows)
    outputs["expected_labels"] = out / "expected_labels.jsonl"
    if cfg.encoding:
        outputs["prompts"] = _write_prompts(
            cfg, [(c.clip_id, c.seq) for c in suite], out
        )
    return outputs


def _read_truth(path) -> dict[tuple[str, str], str]:
    truth = {}
    for row in io.read_jsonl(path):
        truth[(row["clip_id"], row["question_id"])] = row["answer"]
    return truth


def _cmd_evaluate(cfg: RunConfig) -> dict[str, Path]:
    truth = _read_truth(cfg.params["truth"])
    rows = io.read_predictions(cfg.params["predictions"])
    parsed = report.parse_predictions(rows)
    doc = report.build_evaluation_report(truth, parsed)
    out = cfg.out_dir
    io.write_json(out / "report.json", doc)
    io.write_jsonl(out / "parsed_predictions.jsonl", parsed)
    return {
        "report": out / "report.json",
        "parsed_predictions": out / "parsed_predictions.jsonl",
    }


def _cmd_sweep(cfg: RunConfig) -> dict[str, Path]:
    thresholds = _load_thresholds(cfg)
    sequences = _load_clips(cfg, key="trajectories")
    alphas = [float(a) for a in (cfg.alphas or cfg.params.get("alphas"))]
    pred_spec = cfg.params["predictions"]
    if not isinstance(pred_spec, dict):
        raise ConfigError("sweep predictions must map model name -> file path")
    model_predictions = {}
    for model, path in pred_spec.items():
        parsed = report.parse_predictions(io.read_predictions(path))
        model_predictions[model] = {
            (row["clip_id"], row["question_id"]): (
                None if row["parsed"] == "unparsed" else row["parsed"]
            )
            for row in parsed
        }
    results = metrics.sensitivity_sweep(sequences, model_predictions, thresholds, alphas)
    out = cfg.out_dir
    io.write_json(out / "sweep.json", {"results": [r.to_dict() for r in results]})
    report.write_sweep_csv(out / "sweep.csv", results)
    return {"sweep": out / "sweep.json", "sweep_csv": out / "sweep.csv"}


def _cmd_parse(cfg: RunConfig) -> dict[str, Path]:
    rows = io.read_predictions(cfg.params["predictions"])
    parsed = report.parse_predictions(rows)
    rates = report.parse_rate_report(rows)
    out = cfg.out_dir
    io.write_jsonl(out / "parsed_predictions.jsonl", parsed)
    io.write_json(out / "parse_report.json", rates)
    return {
        "parsed_predictions": out / "parsed_predictions.jsonl",
        "parse_report": out / "parse_report.json",
    }


def _cmd_baseline(cfg: RunConfig) -> dict[str, Path]:
    kind = cfg.params.get("kind", "flow")
    if kind not in baselines.BASELINE_THRESHOLD_SETS:
        raise ConfigError("baseline kind must be one of flow|vo|vo_learned")
    thresholds = baselines.BASELINE_THRESHOLD_SETS[kind]
    clips = io.read_trajectory_clips(cfg.params["proxies"])
    import numpy as np

    rows = []
    for clip_id, clip_rows in clips.items():
        keys = set(clip_rows[0])
        t = np.array([r["t"] for r in clip_rows], dtype=float)
        if {"s_turn", "s_exp", "m_mag"} <= keys:
            series = baselines.FlowProxySeries(
                t=t,
                s_turn=np.array([r["s_turn"] for r in clip_rows], dtype=float),
                s_exp=np.array([r["s_exp"] for r in clip_rows], dtype=float),
                m_mag=np.array([r["m_mag"] for r in clip_rows], dtype=float),
            )
            if kind != "flow":
                raise ConfigError("flow proxy rows require kind=flow")
            records = baselines.flow_answers(series, thresholds, clip_id)
        elif {"m_disp", "theta_deg"} <= keys:
            series = baselines.OdomProxySeries(
                t=t,
                m_disp=np.array([r["m_disp"] for r in clip_rows], dtype=float),
                theta_deg=np.array([r["theta_deg"] for r in clip_rows], dtype=float),
            )
            if kind == "flow":
                raise ConfigError("odometry proxy rows require kind=vo|vo_learned")
            records = baselines.vo_answers(series, thresholds, clip_id)
        else:
            raise ConfigError(
                "proxy rows must carry (t,s_turn,s_exp,m_mag) or (t,m_disp,theta_deg)"
            )
        rows.extend(r.to_dict() for r in records)
    out = cfg.out_dir
    io.write_jsonl(out / "baseline_labels.jsonl", rows)
    return {"baseline_labels": out / "baseline_labels.jsonl"}


def _cmd_balance(cfg: RunConfig) -> dict[str, Path]:
    label_rows = io.read_jsonl(cfg.params["labels"])
    answers: dict[str, dict[str, str]] = {}
    for row in label_rows:
        answers.setdefault(row["clip_id"], {})[row["question_id"]] = row["answer"]
    sources = (
        io.read_source_manifest(cfg.params["sources"])
        if cfg.params.get("sources")
        else {}
    )
    pool = [
        balancer.PoolClip(clip_id, sources.get(clip_id, "real"), clip_answers)
        for clip_id, clip_answers in answers.items()
    ]
    n = int(cfg.params["n"])
    caps = cfg.params.get("caps")
    caps = {k: int(v) for k, v in caps.items()} if caps else None
    selected_ids = balancer.balance(pool, n, caps=caps)
    by_id = {clip.clip_id: clip for clip in pool}
    selected = [by_id[cid] for cid in selected_ids]
    out = cfg.out_dir
    io.write_json(out / "selected_clips.json", {"selected": selected_ids})
    io.write_json(
        out / "imbalance_report.json", balancer.imbalance_report(selected)
    )
    return {
        "selected_clips": out / "selected_clips.json",
        "imbalance_report": out / "imbalance_report.json",
    }


def _cmd_calibrate(cfg: RunConfig) -> dict[str, Path]:
    base = _load_thresholds(cfg)
    sequences = _load_clips(cfg)
    summaries = [summarize(seq) for _, seq in sequences]
    calibrated = calibrate_thresholds(summaries, base)
    out = cfg.out_dir
    calibrated.to_json(out / "thresholds.json")
    return {"thresholds": out / "thresholds.json"}


_RUNNERS = {
    "label": _cmd_label,
    "balance": _cmd_balance,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "parse": _cmd_parse,
    "baseline": _cmd_baseline,
    "synth": _cmd_synth,
    "calibrate-thresholds": _cmd_calibrate,
}

_INPUT_KEYS = ("input", "truth", "trajectories", "proxies", "labels", "sources",
               "thresholds")


def run(cfg: RunConfig) -> int:
    """Dispatch one command and write its manifest; returns exit status."""
    cfg.validate()
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    outputs = _RUNNERS[cfg.command](cfg)

    inputs: dict[str, str] = {}
    for key in _INPUT_KEYS:
        value = cfg.params.get(key)
        if isinstance(value, str):
            inputs[key] = value
    pred = cfg.params.get("predictions")
    if isinstance(pred, str):
        inputs["predictions"] = pred
    elif isinstance(pred, dict):
        for model, path in pred.items():
            inputs[f"predictions.{model}"] = path

    manifest_config = {
        "command": cfg.command,
        "params": cfg.params,
        "seed": cfg.seed,
        "alphas": cfg.alphas,
        "encoding": cfg.encoding,
    }
    io.write_manifest(cfg.out_dir, cfg.command, manifest_config, inputs, outputs)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="egodyn",
        description="Deterministic ego-motion semantics engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        cmd = sub.add_parser(command)
        cmd.add_argument("--config", help="JSON config document for the command")
        cmd.add_argument(
            "--alpha",
            help="comma-separated perturbation factors, e.g. 0.5,0.75,1.0",
        )
        cmd.add_argument("--encoding", choices=ENCODING_MODES)
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--out", help="output directory")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    params = io.read_json(args.config) if args.config else {}
    out_dir = Path(args.out or params.get("out", "egodyn_out"))
    alphas = None
    if args.alpha:
        alphas = [float(a) for a in args.alpha.split(",") if a.strip()]
    elif params.get("alphas"):
        alphas = [float(a) for a in params["alphas"]]
    return RunConfig(
        command=args.command,
        params=params,
        out_dir=out_dir,
        seed=args.seed if args.seed is not None else params.get("seed"),
        alphas=alphas,
        encoding=args.encoding or params.get("encoding"),
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return run(cfg)
    except (EgodynError, FileNotFoundError, KeyError) as exc:
        print(f"egodyn {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
