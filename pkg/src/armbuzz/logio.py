"""Trial log format: one JSON object per line.

The first line is a header carrying the schema version and trial parameters;
every following line is one tick record with a fixed field order. Logs are
free of wall-clock data, so identical (config, seed) runs produce
byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import LogParseError
from .feedback import FiredRule

LOG_SCHEMA = "armbuzz-trial-log"
LOG_VERSION = 1

RECORD_FIELDS = (
    "t", "angle_deg", "velocity_deg_s", "bin", "load", "prediction",
    "tactor_on", "fired_rule", "joystick_axis", "in_contact",
)


@dataclass(frozen=True)
class TrialStepRecord:
    t: int
    angle_deg: float
    velocity_deg_s: float
    bin: int
    load: int
    prediction: float
    tactor_on: bool
    fired_rule: FiredRule
    joystick_axis: float
    in_contact: bool


@dataclass(frozen=True)
class TrialLog:
    task: str
    duration_ticks: int
    dt_ms: float
    seed: int
    num_bins: int
    records: tuple[TrialStepRecord, ...]


def _record_line(rec: TrialStepRecord) -> str:
    return json.dumps(
        {
            "t": rec.t,
            "angle_deg": rec.angle_deg,
            "velocity_deg_s": rec.velocity_deg_s,
            "bin": rec.bin,
            "load": rec.load,
            "prediction": rec.prediction,
            "tactor_on": rec.tactor_on,
            "fired_rule": rec.fired_rule.value,
            "joystick_axis": rec.joystick_axis,
            "in_contact": rec.in_contact,
        },
        separators=(",", ":"),
    )


def dump_log(log: TrialLog) -> str:
    header = json.dumps(
        {
            "schema": LOG_SCHEMA,
            "version": LOG_VERSION,
            "task": log.task,
            "duration_ticks": log.duration_ticks,
            "dt_ms": log.dt_ms,
            "seed": log.seed,
            "num_bins": log.num_bins,
        },
        separators=(",", ":"),
    )
    lines = [header]
    lines.extend(_record_line(r) for r in log.records)
    return "\n".join(lines) + "\n"


def write_log(log: TrialLog, path: str | Path) -> None:
    Path(path).write_text(dump_log(log), encoding="utf-8")


def _parse_record(obj: dict, line_number: int) -> TrialStepRecord:
    missing = [f for f in RECORD_FIELDS if f not in obj]
    if missing:
        raise LogParseError(f"record missing fields {missing}", line_number)
    try:
        return TrialStepRecord(
            t=int(obj["t"]),
            angle_deg=float(obj["angle_deg"]),
            velocity_deg_s=float(obj["velocity_deg_s"]),
            bin=int(obj["bin"]),
            load=int(obj["load"]),
            prediction=float(obj["prediction"]),
            tactor_on=bool(obj["tactor_on"]),
            fired_rule=FiredRule(obj["fired_rule"]),
            joystick_axis=float(obj["joystick_axis"]),
            in_contact=bool(obj["in_contact"]),
        )
    except (TypeError, ValueError) as exc:
        raise LogParseError(f"bad record value: {exc}", line_number) from exc


def parse_log(text: str) -> TrialLog:
    lines = text.splitlines()
    if not lines:
        raise LogParseError("empty file", 1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise LogParseError(f"header is not valid JSON: {exc}", 1) from exc
    if not isinstance(header, dict) or header.get("schema") != LOG_SCHEMA:
        raise LogParseError(f"not a {LOG_SCHEMA} file", 1)
    if header.get("version") != LOG_VERSION:
        raise LogParseError(f"unsupported log version {header.get('version')}", 1)

    records = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogParseError(f"record is not valid JSON: {exc}", i) from exc
        records.append(_parse_record(obj, i))

    expected = int(header.get("duration_ticks", len(records)))
    if expected != len(records):
        raise LogParseError(
            f"header declares {expected} records but file has {len(records)}"
        )
    for i, rec in enumerate(records):
        if rec.t != i:
            raise LogParseError(f"tick index {rec.t} out of order (expected {i})", i + 2)

    return TrialLog(
        task=str(header.get("task", "")),
        duration_ticks=expected,
        dt_ms=float(header.get("dt_ms", 50.0)),
        seed=int(header.get("seed", 0)),
        num_bins=int(header.get("num_bins", 32)),
        records=tuple(records),
    )


def read_log(path: str | Path) -> TrialLog:
    p = Path(path)
    if not p.exists():
        raise LogParseError(f"log file not found: {p}")
    return parse_log(p.read_text(encoding="utf-8"))
