"""Output files, run manifests and the ranking table."""
from __future__ import annotations

import csv
import datetime as dt
import hashlib
import io
import json
import os
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import __version__
from .engine import StrategySummary
from .strategies import StrategyKind

TOOL = "parrondo-sim"
MANIFEST_NAME = "run_manifest.json"


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _csv_text(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def summary_csv(summaries: list[StrategySummary]) -> str:
    return _csv_text(
        ("strategy", "hint_prob", "mean_final", "std_final", "stderr"),
        ((s.strategy.value, _fmt(s.hint_prob), _fmt(s.mean_final), _fmt(s.std_final),
          _fmt(s.standard_error)) for s in summaries))


def trajectories_csv(summaries: list[StrategySummary]) -> str:
    return _csv_text(
        ("strategy", "day", "mean_value"),
        ((s.label, day, _fmt(v)) for s in summaries for day, v in enumerate(s.mean_trajectory)))


def single_run_csv(paths: dict[str, np.ndarray]) -> str:
    return _csv_text(
        ("strategy", "day", "value"),
        ((label, day, _fmt(v)) for label, values in paths.items() for day, v in enumerate(values)))


def utc_timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the clock for reproducible artifacts
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (dt.datetime.fromtimestamp(int(epoch), dt.timezone.utc) if epoch
            else dt.datetime.now(dt.timezone.utc))
    return when.replace(microsecond=0).isoformat().replace("+00:00", "Z")


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def write_outputs(out_dir: Path, files: dict[str, str], command: str, config: dict,
                  master_seed: int, input_digest: Optional[str] = None) -> dict:
    """Write ``files`` into ``out_dir`` plus a manifest carrying their digests."""
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {}
    for name, text in files.items():
        data = text.encode("utf-8")
        (out_dir / name).write_bytes(data)
        outputs[name] = digest(data)
    manifest = {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "config": config,
        "master_seed": master_seed,
        "created_utc": utc_timestamp(),
        "input_digest": input_digest,
        "outputs": outputs,
    }
    (out_dir / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8")
    return manifest


def ranking_table(summaries: list[StrategySummary]) -> str:
    lines = [f"{'rank':>4}  {'strategy':<16}{'mean final':>14}{'std':>12}{'stderr':>10}"]
    for rank, s in enumerate(summaries, 1):
        name = s.strategy.label
        if s.strategy is StrategyKind.INSIDER:
            name += f" ({s.hint_prob:g})"
        lines.append(f"{rank:>4}  {name:<16}{s.mean_final:>14.2f}{s.std_final:>12.2f}"
                     f"{s.standard_error:>10.2f}")
    return "\n".join(lines)


def summaries_json(summaries: list[StrategySummary]) -> list[dict]:
    return [{
        "strategy": s.strategy.value,
        "hint_prob": s.hint_prob,
        "mean_final": s.mean_final,
        "std_final": s.std_final,
        "stderr": s.standard_error,
    } for s in summaries]
