"""Dome controller loop: sense -> predict -> gate -> override -> actuate.

The rain sensor is a hard, stateless override: any positive forces the dome
closed for that frame. The temperature gate is re-checked at decision time
as defense in depth even though the model was trained on gated labels. Air
conditioning is interlocked to run exactly when the dome is closed.

Actuator wire protocol: one newline-delimited ASCII line per decision,
``D:<0|1> A:<0|1>`` (dome, ac).
"""

from __future__ import annotations

import csv
import json
import socket
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from typing import IO, Callable, Optional, Sequence

from .weather import (
    TEMP_OPEN_HIGH,
    TEMP_OPEN_LOW,
    CleaningReport,
    ConditionTable,
    PathOrStream,
    SchemaError,
    UnmappedConditionError,
    WeatherObservation,
    _observation_from_row,
    _opened,
    _RowRejected,
    RAW_COLUMNS,
)

CAUSE_MODEL = "model"
CAUSE_RAIN = "rain_override"
CAUSE_TEMP = "temp_gate"
CAUSE_UNMAPPED = "unmapped_condition"
CAUSES = (CAUSE_MODEL, CAUSE_RAIN, CAUSE_TEMP, CAUSE_UNMAPPED)

#: Columns of a frames CSV: the raw weather schema plus a rain flag.
FRAME_COLUMNS = RAW_COLUMNS + ("rain",)


class SignalDeliveryError(RuntimeError):
    """Writing to the actuator sink failed; safe to retry next frame."""


@dataclass(frozen=True)
class SensorFrame:
    """Current conditions plus the rain sensor, at a monotonic tick."""

    observation: WeatherObservation
    rain_detected: bool
    tick: int


@dataclass(frozen=True)
class DomeCommand:
    dome: int  # 1 = open, 0 = close
    ac: int    # 1 = on, 0 = off
    cause: str

    def __post_init__(self):
        if self.dome not in (0, 1):
            raise ValueError(f"dome must be 0 or 1, got {self.dome!r}")
        if self.ac != 1 - self.dome:
            raise ValueError("interlock violated: ac must run exactly when closed")
        if self.cause not in CAUSES:
            raise ValueError(f"unknown cause {self.cause!r}")


def _command(dome: int, cause: str) -> DomeCommand:
    return DomeCommand(dome=dome, ac=1 - dome, cause=cause)


def decide_inputs(model_prediction: int, rain_detected: bool, temp: float,
                  low: float = TEMP_OPEN_LOW, high: float = TEMP_OPEN_HIGH) -> DomeCommand:
    """Core decision rule on bare sensor inputs.

    Rain wins over everything; a temperature outside the open interval wins
    over the model; otherwise the model's prediction drives the dome.
    """
    if model_prediction not in (0, 1):
        raise ValueError(f"model_prediction must be 0 or 1, got {model_prediction!r}")
    if rain_detected:
        return _command(0, CAUSE_RAIN)
    if not low < temp < high:
        return _command(0, CAUSE_TEMP)
    return _command(model_prediction, CAUSE_MODEL)


def decide(model_prediction: int, frame: SensorFrame) -> DomeCommand:
    """Decision for one sensor frame; see decide_inputs for the rule order."""
    return decide_inputs(model_prediction, frame.rain_detected, frame.observation.temp)


def emit_signal(command: DomeCommand, sink: IO[str]) -> str:
    """Write exactly one wire line for the command; returns the line sent.

    A failing sink raises SignalDeliveryError; nothing else changes, so the
    caller may simply retry on the next frame.
    """
    line = f"D:{command.dome} A:{command.ac}\n"
    try:
        sink.write(line)
        flush = getattr(sink, "flush", None)
        if flush is not None:
            flush()
    except (OSError, ValueError) as exc:  # closed files raise ValueError
        raise SignalDeliveryError(f"actuator sink write failed: {exc}") from exc
    return line


def parse_signal(line: str) -> tuple[int, int]:
    """Inverse of emit_signal: the (dome, ac) bits of one wire line."""
    body = line.rstrip("\n")
    parts = body.split(" ")
    if (len(parts) != 2 or not parts[0].startswith("D:")
            or not parts[1].startswith("A:")):
        raise ValueError(f"bad signal line {line!r}")
    dome, ac = parts[0][2:], parts[1][2:]
    if dome not in ("0", "1") or ac not in ("0", "1"):
        raise ValueError(f"bad signal line {line!r}")
    return int(dome), int(ac)


@dataclass(frozen=True)
class LogEntry:
    frame: SensorFrame
    command: DomeCommand
    prediction: Optional[int]  # None when featurization failed

    def as_dict(self) -> dict:
        return {"tick": self.frame.tick,
                "features": list(self.frame.observation.features()),
                "prediction": self.prediction,
                "dome": self.command.dome,
                "ac": self.command.ac,
                "cause": self.command.cause}


@dataclass
class DecisionLog:
    """One entry per input frame, in input order."""

    entries: list[LogEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def to_jsonl(self, sink: PathOrStream) -> None:
        with _opened(sink, "w") as stream:
            for entry in self.entries:
                stream.write(json.dumps(entry.as_dict(), sort_keys=True) + "\n")


def replay(model_predict_fn: Callable[[Sequence[float]], int],
           frames: Sequence[SensorFrame],
           table: Optional[ConditionTable] = None,
           sink: Optional[IO[str]] = None) -> DecisionLog:
    """Run the decision loop over recorded frames.

    Frames whose condition is missing from the table are decided closed with
    cause ``unmapped_condition`` (fail-safe) and keep a null prediction.
    Pure given its inputs: chunking the frame stream and concatenating the
    logs yields the same entries.
    """
    if len(frames) == 0:
        raise ValueError("no frames to replay")
    if table is None:
        table = ConditionTable.builtin()
    entries = []
    last_tick = None
    for frame in frames:
        if last_tick is not None and frame.tick <= last_tick:
            raise ValueError(f"frame ticks must be strictly increasing, "
                             f"got {frame.tick} after {last_tick}")
        last_tick = frame.tick
        prediction: Optional[int] = None
        if frame.observation.condition in table:
            prediction = int(model_predict_fn(frame.observation.features()))
            command = decide(prediction, frame)
        else:
            command = _command(0, CAUSE_UNMAPPED)
        if sink is not None:
            emit_signal(command, sink)
        entries.append(LogEntry(frame=frame, command=command, prediction=prediction))
    return DecisionLog(entries)


def read_frames_csv(source: PathOrStream) -> tuple[list[SensorFrame], CleaningReport]:
    """Parse a frames CSV (raw weather schema plus ``rain`` 0/1 column).

    Ticks number the accepted frames sequentially from 0.
    """
    report = CleaningReport()
    frames: list[SensorFrame] = []
    with _opened(source) as stream:
        reader = csv.DictReader(stream)
        if reader.fieldnames is None:
            raise SchemaError(f"missing required column(s): {', '.join(FRAME_COLUMNS)}")
        by_name = {name.strip().lower(): name for name in reader.fieldnames if name}
        missing = [col for col in FRAME_COLUMNS if col not in by_name]
        if missing:
            raise SchemaError(f"missing required column(s): {', '.join(missing)}")
        for raw in reader:
            report.rows_read += 1
            row = {col: raw.get(by_name[col]) or "" for col in FRAME_COLUMNS}
            try:
                observation = _observation_from_row(row)
                rain = _parse_rain(row["rain"])
            except _RowRejected as rej:
                report.reject(rej.reason)
                continue
            frames.append(SensorFrame(observation=observation, rain_detected=rain,
                                      tick=len(frames)))
            report.kept += 1
    return frames, report


def _parse_rain(text: str) -> bool:
    value = text.strip().lower()
    if value in ("0", "false", "no"):
        return False
    if value in ("1", "true", "yes"):
        return True
    raise _RowRejected("bad_rain")


@contextmanager
def open_sink(spec: str):
    """Open an actuator sink: a file path, ``tcp:host:port``, or ``-`` (stdout)."""
    if spec == "-":
        yield sys.stdout
        return
    if spec.startswith("tcp:"):
        _, _, rest = spec.partition(":")
        host, sep, port = rest.rpartition(":")
        if not sep or not host or not port.isdigit():
            raise ValueError(f"bad tcp sink spec {spec!r}; expected tcp:host:port")
        with socket.create_connection((host, int(port))) as conn:
            stream = conn.makefile("w", newline="")
            try:
                yield stream
            finally:
                stream.close()
        return
    with open(spec, "w", encoding="ascii", newline="") as stream:
        yield stream
