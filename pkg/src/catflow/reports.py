"""Report serialization: trajectory/Lipschitz CSVs, JSON summaries, manifests.

All output is deterministic for a fixed config and seed: floats are
written with repr (shortest round-trip form), JSON keys are sorted, and
the manifest separates timing from the reproducible payload.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from .flows import Trajectory
from .lipschitz import LipschitzReport
from .sampling import GENERATOR_NAME

TOOL_VERSION = "0.1.0"


def write_trajectory_csv(path, trajectory: Trajectory) -> None:
    rows = trajectory.coord_rows()
    dim = rows.shape[1] - 1 if len(rows) else 0
    with open(path, "w", newline="") as fh:
        fh.write("t," + ",".join(f"x{i}" for i in range(dim)) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def write_lipschitz_csv(path, report: LipschitzReport) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("pair,d_before,d_after,ratio,displacement\n")
        for pair, db, da, ratio, disp in report.csv_rows():
            fh.write(f"{pair},{db!r},{da!r},{ratio!r},{disp!r}\n")


def write_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def config_hash(config: dict, exclude=("out",)) -> str:
    keys = [k for k in sorted(config) if k not in exclude]
    text = "\n".join(f"{k}={config[k]}" for k in keys)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


@dataclass
class CheckRecord:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0  # excluded from the reproducible payload

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


@dataclass
class RunManifest:
    """Reproducible record of one harness run.

    Identical config + seed produce identical manifests apart from the
    timing block, which is excluded from `core_payload`.
    """

    config: dict
    seed: int
    checks: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    version: str = TOOL_VERSION
    generator: str = GENERATOR_NAME

    def add(self, record: CheckRecord) -> None:
        self.checks.append(record)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def core_payload(self) -> dict:
        return {
            "config_hash": config_hash(self.config),
            "seed": self.seed,
            "version": self.version,
            "generator": self.generator,
            "checks": [c.to_dict() for c in self.checks],
            "all_pass": self.all_passed,
        }

    def payload(self) -> dict:
        out = self.core_payload()
        timing = dict(self.timing)
        timing.update({c.name: c.seconds for c in self.checks if c.seconds})
        out["timing"] = timing
        return out

    def write(self, path) -> None:
        write_json(path, self.payload())


class Stopwatch:
    def __init__(self, sink: dict, key: str):
        self.sink = sink
        self.key = key

    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.sink[self.key] = time.perf_counter() - self._t0
        return False
