"""Hourly weather ingestion, condition labeling, and seeded train/test splits.

The pipeline goes raw CSV -> WeatherObservation -> LabeledSample. A 36-entry
condition table maps each weather description to a binary open-compatibility
flag, and a temperature gate turns that flag into the final dome state:
open (1) only when the flag is 1 and the temperature lies strictly between
16 and 27 degrees C.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from datetime import date as Date, datetime
from pathlib import Path
from typing import IO, Iterable, Sequence, TypeVar, Union

logger = logging.getLogger(__name__)

#: Fixed feature order of a labeled sample.
FEATURE_NAMES = ("temp", "wind", "humidity", "hour", "visibility", "barometer")

#: Required header names of the raw input CSV (any column order).
RAW_COLUMNS = ("city", "date", "time", "temp", "wind", "humidity",
               "barometer", "visibility", "weather")

#: Header of the canonical labeled-dataset CSV.
LABELED_COLUMNS = FEATURE_NAMES + ("state",)

# Open interval of the temperature gate, both boundaries excluded.
TEMP_OPEN_LOW = 16.0
TEMP_OPEN_HIGH = 27.0

PathOrStream = Union[str, Path, IO[str]]


class SchemaError(ValueError):
    """Input CSV is missing a required column."""


class UnmappedConditionError(LookupError):
    """A weather description has no entry in the condition table."""

    def __init__(self, condition: str):
        super().__init__(f"unmapped weather condition: {condition!r}")
        self.condition = condition


def normalize_condition(condition: str) -> str:
    """Case-fold a condition string and collapse internal whitespace."""
    return " ".join(condition.split()).casefold()


# The built-in 36-condition table, in table order: (condition, flag).
# flag=1 means the description alone is compatible with opening the dome.
_BUILTIN_CONDITIONS = (
    ("Clear", 1),
    ("Sunny", 0),
    ("Passing clouds", 1),
    ("Low level haze", 1),
    ("Scattered clouds", 1),
    ("Partly sunny", 1),
    ("Broken clouds", 1),
    ("Duststorm", 0),
    ("Sandstorm", 0),
    ("Pleasantly warm", 1),
    ("Thunderstorms passing clouds", 1),
    ("Thunderstorms partly sunny", 1),
    ("Thundershowers", 1),
    ("Mostly cloudy", 1),
    ("Thunderstorms Broken clouds", 1),
    ("Thunderstorms Scattered clouds", 1),
    ("Extremely hot", 0),
    ("Mild", 1),
    ("Thunderstorms Partly clouds", 1),
    ("Rain Partly cloudy", 0),
    ("Rain Scattered clouds", 0),
    ("Rain Broken clouds", 0),
    ("Haze", 1),
    ("Overcast", 1),
    ("Dense fog", 1),
    ("Rain passing clouds", 0),
    ("Rain Mostly cloudy", 0),
    ("Rain Partly sunny", 0),
    ("Fog", 1),
    ("Hail Partly sunny", 0),
    ("Thundershowers passing clouds", 1),
    ("More clouds than sun", 1),
    ("Thunderstorms more clouds than sun", 1),
    ("Thunderstorms", 1),
    ("Partly cloudy", 1),
    ("Hail", 0),
)


class ConditionTable:
    """Ordered mapping from weather description to a binary open flag.

    Lookup is case-insensitive with internal whitespace collapsed. The
    built-in table has exactly 36 entries; user-supplied tables may be any
    non-empty size but must be duplicate-free after normalization.
    """

    def __init__(self, pairs: Iterable[tuple[str, int]]):
        entries: list[tuple[int, str, int]] = []
        flags: dict[str, int] = {}
        for i, (condition, flag) in enumerate(pairs, start=1):
            key = normalize_condition(condition)
            if not key:
                raise ValueError(f"entry {i}: empty condition string")
            if int(flag) not in (0, 1):
                raise ValueError(f"entry {i}: flag must be 0 or 1, got {flag!r}")
            if key in flags:
                raise ValueError(f"entry {i}: duplicate condition {condition!r}")
            entries.append((i, condition, int(flag)))
            flags[key] = int(flag)
        if not entries:
            raise ValueError("condition table is empty")
        self.entries = tuple(entries)
        self._flags = flags

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, condition: str) -> bool:
        return normalize_condition(condition) in self._flags

    def flag(self, condition: str) -> int:
        try:
            return self._flags[normalize_condition(condition)]
        except KeyError:
            raise UnmappedConditionError(condition) from None

    @classmethod
    def builtin(cls) -> "ConditionTable":
        """The shipped 36-entry table."""
        return cls(_BUILTIN_CONDITIONS)

    @classmethod
    def from_csv(cls, source: PathOrStream) -> "ConditionTable":
        """Load a user override table from ``condition,flag`` lines.

        A first line reading exactly ``condition,flag`` is treated as a
        header and skipped.
        """
        with _opened(source) as stream:
            pairs = []
            for row in csv.reader(stream):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != 2:
                    raise ValueError(f"expected 'condition,flag' line, got {row!r}")
                cond, flag = row[0].strip(), row[1].strip()
                if (cond.casefold(), flag.casefold()) == ("condition", "flag"):
                    continue
                try:
                    pairs.append((cond, int(flag)))
                except ValueError:
                    raise ValueError(f"bad flag {flag!r} for condition {cond!r}") from None
        return cls(pairs)


def condition_flag(condition: str, table: ConditionTable) -> int:
    """Flag of the table entry matching ``condition`` (normalized).

    Raises UnmappedConditionError for unknown descriptions; the caller
    decides whether to reject the row or fail safe to 0.
    """
    return table.flag(condition)


def derive_state(flag: int, temp: float,
                 low: float = TEMP_OPEN_LOW, high: float = TEMP_OPEN_HIGH) -> int:
    """Final dome state: 1 iff ``flag`` is 1 and ``low < temp < high``.

    Both boundaries are excluded (closed at exactly 16 and 27 degrees).
    """
    return 1 if flag == 1 and low < temp < high else 0


@dataclass(frozen=True)
class WeatherObservation:
    """One raw hourly weather record after per-row normalization."""

    city: str
    date: Date
    hour: int
    temp: float
    wind: float
    humidity: float
    barometer: float
    visibility: float
    condition: str

    def __post_init__(self):
        if not 0 <= self.hour <= 23:
            raise ValueError(f"hour out of range: {self.hour}")
        if not 0.0 <= self.humidity <= 1.0:
            raise ValueError(f"humidity out of range: {self.humidity}")
        if not self.barometer > 0:
            raise ValueError(f"barometer must be positive: {self.barometer}")
        if self.visibility < 0:
            raise ValueError(f"visibility must be nonnegative: {self.visibility}")
        if not self.condition.strip():
            raise ValueError("empty condition string")

    def features(self) -> tuple[float, ...]:
        """Feature vector in the fixed order of FEATURE_NAMES."""
        return (self.temp, self.wind, self.humidity, float(self.hour),
                self.visibility, self.barometer)


@dataclass(frozen=True)
class LabeledSample:
    """6-feature vector plus binary dome state (1=open, 0=close)."""

    features: tuple[float, ...]
    label: int

    def __post_init__(self):
        if len(self.features) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} features, "
                             f"got {len(self.features)}")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass(frozen=True)
class SplitSpec:
    """Seeded holdout split: round(n * test_fraction) samples go to test."""

    test_fraction: float
    seed: int

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0,1), got {self.test_fraction}")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")


@dataclass
class CleaningReport:
    """Row accounting for one pipeline stage: kept + rejected = rows seen."""

    rows_read: int = 0
    kept: int = 0
    rejected: int = 0
    reasons: dict[str, int] = field(default_factory=dict)

    def reject(self, reason: str) -> None:
        self.rejected += 1
        self.reasons[reason] = self.reasons.get(reason, 0) + 1

    def as_dict(self) -> dict:
        return {"rows_read": self.rows_read, "kept": self.kept,
                "rejected": self.rejected, "reasons": dict(sorted(self.reasons.items()))}


class _RowRejected(Exception):
    """Internal: a raw row failed cleaning; .reason says why."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


_DATE_FORMATS = ("%Y-%m-%d", "%d-%m-%Y", "%d/%m/%Y", "%m/%d/%Y",
                 "%Y/%m/%d", "%d.%m.%Y")

_TIME_RE = re.compile(r"(\d{1,2})(?::(\d{1,2}))?(?::\d{1,2})?\s*(am|pm)?")
_NUMBER_RE = re.compile(r"\s*([-+]?\d+(?:\.\d+)?)\s*(.*)$")
_UNIT_RE = re.compile(r"[a-z°%µ/.\s]*")


def _parse_date(text: str) -> Date:
    raw = text.strip()
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(raw, fmt).date()
        except ValueError:
            continue
    raise _RowRejected("bad_date")


def _parse_hour(text: str) -> int:
    m = _TIME_RE.fullmatch(text.strip().lower())
    if not m:
        raise _RowRejected("bad_time")
    hour = int(m.group(1))
    meridiem = m.group(3)
    if meridiem == "am":
        hour = 0 if hour == 12 else hour
    elif meridiem == "pm":
        hour = 12 if hour == 12 else hour + 12
    if hour == 24:  # "24:00" rows are canonicalized to hour 0
        hour = 0
    if not 0 <= hour <= 23:
        raise _RowRejected("bad_time")
    return hour


def _parse_number(text: str, column: str) -> float:
    """Parse a numeric cell, tolerating a short unit suffix ('21 °c', '7 km/h')."""
    raw = (text or "").strip().lower()
    if column == "wind" and raw in ("no wind", "calm"):
        return 0.0
    m = _NUMBER_RE.match(raw)
    if not m:
        raise _RowRejected(f"bad_{column}")
    suffix = m.group(2).strip()
    if suffix and not _UNIT_RE.fullmatch(suffix):
        raise _RowRejected(f"bad_{column}")
    value = float(m.group(1))
    if column == "humidity":
        if "%" in suffix or value > 1.0:
            value /= 100.0
    return value


def _observation_from_row(row: dict[str, str]) -> WeatherObservation:
    try:
        return WeatherObservation(
            city=(row["city"] or "").strip(),
            date=_parse_date(row["date"]),
            hour=_parse_hour(row["time"]),
            temp=_parse_number(row["temp"], "temp"),
            wind=_parse_number(row["wind"], "wind"),
            humidity=_parse_number(row["humidity"], "humidity"),
            barometer=_parse_number(row["barometer"], "barometer"),
            visibility=_parse_number(row["visibility"], "visibility"),
            condition=(row["weather"] or "").strip(),
        )
    except ValueError as exc:  # invariant violations from __post_init__
        raise _RowRejected("invalid_values") from exc


def parse_dataset(source: PathOrStream) -> tuple[list[WeatherObservation], CleaningReport]:
    """Parse a raw weather CSV into observations plus a cleaning report.

    The header must name at least the RAW_COLUMNS (case-insensitive, any
    order); a missing column raises SchemaError. Rows with unparsable or
    out-of-range cells are dropped and counted, never fatal. Row order is
    preserved.
    """
    report = CleaningReport()
    observations: list[WeatherObservation] = []
    with _opened(source) as stream:
        reader = csv.DictReader(stream)
        if reader.fieldnames is None:
            raise SchemaError(f"missing required column(s): {', '.join(RAW_COLUMNS)}")
        by_name = {name.strip().lower(): name for name in reader.fieldnames if name}
        missing = [col for col in RAW_COLUMNS if col not in by_name]
        if missing:
            raise SchemaError(f"missing required column(s): {', '.join(missing)}")
        for raw in reader:
            report.rows_read += 1
            row = {col: raw.get(by_name[col]) or "" for col in RAW_COLUMNS}
            try:
                observations.append(_observation_from_row(row))
                report.kept += 1
            except _RowRejected as rej:
                report.reject(rej.reason)
    return observations, report


def filter_city(observations: Sequence[WeatherObservation],
                city_name: str) -> list[WeatherObservation]:
    """Observations whose city matches ``city_name`` case-insensitively."""
    if not city_name.strip():
        raise ValueError("city_name must be non-empty")
    wanted = city_name.strip().casefold()
    matched = [o for o in observations if o.city.strip().casefold() == wanted]
    if not matched:
        logger.warning("no observations match city %r", city_name)
    return matched


def to_samples(observations: Sequence[WeatherObservation],
               table: ConditionTable) -> tuple[list[LabeledSample], CleaningReport]:
    """Label observations via the condition table and temperature gate.

    Rows with conditions missing from the table are rejected and counted;
    |samples| + report.rejected == |observations|.
    """
    report = CleaningReport()
    samples: list[LabeledSample] = []
    for obs in observations:
        report.rows_read += 1
        try:
            flag = condition_flag(obs.condition, table)
        except UnmappedConditionError:
            report.reject("unmapped_condition")
            continue
        samples.append(LabeledSample(obs.features(), derive_state(flag, obs.temp)))
        report.kept += 1
    return samples, report


class SplitMix64:
    """SplitMix64: the fixed 64-bit generator behind seeded splits.

    Frozen on purpose: identical (seed, n) must yield identical splits on
    any platform, so the stream may never change.
    """

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self._state = seed & self._MASK

    def next_uint64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & self._MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)


def permutation(n: int, seed: int) -> list[int]:
    """Fisher-Yates permutation of range(n) driven by SplitMix64."""
    rng = SplitMix64(seed)
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.next_uint64() % (i + 1)
        order[i], order[j] = order[j], order[i]
    return order


T = TypeVar("T")


def split(samples: Sequence[T], spec: SplitSpec) -> tuple[list[T], list[T]]:
    """Deterministic seeded holdout split.

    The shuffled order is a pure function of (len(samples), spec.seed); the
    first round(n * test_fraction) shuffled elements form the test set.
    """
    n = len(samples)
    if n < 2:
        raise ValueError(f"need at least 2 samples to split, got {n}")
    n_test = round(n * spec.test_fraction)
    order = permutation(n, spec.seed)
    test = [samples[i] for i in order[:n_test]]
    train = [samples[i] for i in order[n_test:]]
    return train, test


def write_labeled_csv(samples: Iterable[LabeledSample], sink: PathOrStream) -> None:
    """Write samples as the canonical labeled CSV (see LABELED_COLUMNS)."""
    with _opened(sink, "w") as stream:
        writer = csv.writer(stream)
        writer.writerow(LABELED_COLUMNS)
        for s in samples:
            writer.writerow([repr(v) for v in s.features] + [s.label])


def read_labeled_csv(source: PathOrStream) -> list[LabeledSample]:
    """Read a labeled CSV produced by write_labeled_csv."""
    samples = []
    with _opened(source) as stream:
        reader = csv.DictReader(stream)
        missing = [c for c in LABELED_COLUMNS
                   if c not in (reader.fieldnames or [])]
        if missing:
            raise SchemaError(f"missing required column(s): {', '.join(missing)}")
        for row in reader:
            features = tuple(float(row[name]) for name in FEATURE_NAMES)
            samples.append(LabeledSample(features, int(row["state"])))
    return samples


class _opened:
    """Open paths for the caller, pass streams through unchanged."""

    def __init__(self, source: PathOrStream, mode: str = "r"):
        self.source = source
        self.mode = mode
        self._owned = None

    def __enter__(self):
        if isinstance(self.source, (str, Path)):
            self._owned = open(self.source, self.mode, encoding="utf-8", newline="")
            return self._owned
        return self.source

    def __exit__(self, *exc):
        if self._owned is not None:
            self._owned.close()
        return False
