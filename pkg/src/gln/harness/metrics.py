"""Metrics stream: line-delimited JSON records.

The canonical metrics file holds only deterministic fields (run_id,
step, metric, value), one JSON object per line, so identical runs
produce byte-identical files.  Wall-clock timings go to a sidecar
timings file that is not part of the reproducibility contract.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass

__all__ = ["MetricsRecord", "MetricsWriter"]


@dataclass
class MetricsRecord:
    run_id: str
    step: int
    metric: str
    value: float
    wall_ms: float


class MetricsWriter:
    """Append-only writer: one record per (step, metric)."""

    def __init__(self, out_dir: str, run_id: str, filename: str = "metrics.jsonl"):
        os.makedirs(out_dir, exist_ok=True)
        self.run_id = run_id
        self.path = os.path.join(out_dir, filename)
        self.timings_path = self.path + ".timings"
        self.records: list[MetricsRecord] = []
        self._fh = open(self.path, "w", encoding="utf-8")
        self._timings = open(self.timings_path, "w", encoding="utf-8")
        self._t0 = time.monotonic()

    def emit(self, step: int, metric: str, value: float) -> MetricsRecord:
        wall_ms = (time.monotonic() - self._t0) * 1000.0
        record = MetricsRecord(self.run_id, int(step), metric, float(value), wall_ms)
        line = json.dumps(
            {"run_id": record.run_id, "step": record.step, "metric": record.metric, "value": record.value},
            sort_keys=True,
        )
        self._fh.write(line + "\n")
        self._timings.write(f"{record.step}\t{record.metric}\t{wall_ms:.1f}\n")
        self.records.append(record)
        return record

    def close(self) -> None:
        self._fh.close()
        self._timings.close()

    def __enter__(self) -> "MetricsWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
