"""CSV loading, cleaning, encoding, feature engineering, and the train/test split.

The input file is the sleep/lifestyle survey export: 13 columns, no missing
values, blood pressure stored as one "SYS/DIA" text field. Everything here is
a pure function; the only I/O is reading the CSV and the optional debug dump.
"""
from __future__ import annotations

import csv
import math
import re
from collections import Counter
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ClassTooSmall,
    DivisionDomain,
    EmptyFile,
    LogDomain,
    MalformedBloodPressure,
    MalformedRow,
    MissingColumn,
    UnknownCategory,
)
from .table import BINARY, NUMERIC, ONEHOT, Column, DataTable

EXPECTED_HEADER = [
    "Person ID",
    "Gender",
    "Age",
    "Occupation",
    "Sleep Duration",
    "Quality of Sleep",
    "Physical Activity Level",
    "Stress Level",
    "BMI Category",
    "Blood Pressure",
    "Heart Rate",
    "Daily Steps",
    "Sleep Disorder",
]

TARGET_CODES = {"Insomnia": 0, "None": 1, "Sleep Apnea": 2}
TARGET_NAMES = {v: k for k, v in TARGET_CODES.items()}

_BP_RE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*$")


@dataclass(frozen=True)
class RawRecord:
    person_id: int
    gender: str
    age: int
    occupation: str
    sleep_duration: float
    quality_of_sleep: int
    physical_activity: int
    stress_level: int
    bmi_category: str
    blood_pressure: str
    heart_rate: int
    daily_steps: int
    sleep_disorder: str


@dataclass(frozen=True)
class EncodingSpec:
    """Categorical-to-numeric choices, overridable per run.

    BMI midpoints are the centers of the usual clinical bands; occupations
    seen fewer than rare_occupation_threshold times collapse into "Other".
    """

    bmi_midpoints: dict
    rare_occupation_threshold: int = 5
    gender_map: dict = None

    def __post_init__(self):
        if self.gender_map is None:
            object.__setattr__(self, "gender_map", {"Female": 0, "Male": 1})

    @staticmethod
    def default() -> "EncodingSpec":
        return EncodingSpec(
            bmi_midpoints={
                "Underweight": 17.0,
                "Normal": 21.7,
                "Overweight": 27.5,
                "Obese": 32.5,
            }
        )


def parse_blood_pressure(text: str) -> tuple[int, int]:
    """Split "SYS/DIA" into two positive integers with SYS > DIA."""
    m = _BP_RE.match(text)
    if not m:
        raise MalformedBloodPressure(f"expected SYS/DIA, got {text!r}")
    systolic, diastolic = int(m.group(1)), int(m.group(2))
    if diastolic <= 0 or systolic <= diastolic:
        raise MalformedBloodPressure(
            f"need systolic > diastolic > 0, got {systolic}/{diastolic}"
        )
    return systolic, diastolic


def _req_int(value: str, field: str, line: int) -> int:
    try:
        return int(value.strip())
    except ValueError:
        raise MalformedRow(line, f"{field} is not an integer: {value!r}") from None


def _req_float(value: str, field: str, line: int) -> float:
    try:
        out = float(value.strip())
    except ValueError:
        raise MalformedRow(line, f"{field} is not a number: {value!r}") from None
    if not math.isfinite(out):
        raise MalformedRow(line, f"{field} is not finite: {value!r}")
    return out


def load_csv(path) -> list[RawRecord]:
    """Read and validate the survey CSV; every row must satisfy RawRecord rules."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile("file has no header row") from None
        header = [h.strip() for h in header]
        lowered = [h.lower() for h in header]
        for name in EXPECTED_HEADER:
            if name.lower() not in lowered:
                raise MissingColumn(name)
        if len(header) != len(EXPECTED_HEADER):
            extras = [h for h in header if h.lower() not in
                      {n.lower() for n in EXPECTED_HEADER}]
            raise MalformedRow(1, f"unexpected columns: {extras}")
        # column order in the file may differ from the canonical order
        pos = {h.lower(): i for i, h in enumerate(header)}
        idx = [pos[name.lower()] for name in EXPECTED_HEADER]

        records = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise MalformedRow(line_no, f"expected {len(header)} fields, got {len(row)}")
            f = [row[i].strip() for i in idx]
            if any(v == "" for v in f):
                raise MalformedRow(line_no, "empty field")
            try:
                parse_blood_pressure(f[9])
            except MalformedBloodPressure as exc:
                raise MalformedRow(line_no, f"blood pressure: {exc}") from None
            if f[12] not in TARGET_CODES:
                raise MalformedRow(line_no, f"unknown sleep disorder label {f[12]!r}")
            quality = _req_int(f[5], "quality of sleep", line_no)
            stress = _req_int(f[7], "stress level", line_no)
            if not 1 <= quality <= 10:
                raise MalformedRow(line_no, f"quality of sleep out of 1..10: {quality}")
            if not 1 <= stress <= 10:
                raise MalformedRow(line_no, f"stress level out of 1..10: {stress}")
            records.append(
                RawRecord(
                    person_id=_req_int(f[0], "person id", line_no),
                    gender=f[1],
                    age=_req_int(f[2], "age", line_no),
                    occupation=f[3],
                    sleep_duration=_req_float(f[4], "sleep duration", line_no),
                    quality_of_sleep=quality,
                    physical_activity=_req_int(f[6], "physical activity", line_no),
                    stress_level=stress,
                    bmi_category=f[8],
                    blood_pressure=f[9],
                    heart_rate=_req_int(f[10], "heart rate", line_no),
                    daily_steps=_req_int(f[11], "daily steps", line_no),
                    sleep_disorder=f[12],
                )
            )
    if not records:
        raise EmptyFile("file has a header but no data rows")
    return records


_BMI_ALIASES = {"Normal Weight": "Normal"}


def clean(records: list[RawRecord], spec: EncodingSpec | None = None) -> list[RawRecord]:
    """Merge BMI spelling variants and pool rare occupations into "Other".

    person_id is retired here: it survives in the returned records only so the
    dataclass shape stays uniform, and encode() never reads it.
    """
    spec = spec or EncodingSpec.default()
    freq = Counter(r.occupation for r in records)
    out = []
    for r in records:
        occ = r.occupation if freq[r.occupation] >= spec.rare_occupation_threshold else "Other"
        bmi = _BMI_ALIASES.get(r.bmi_category, r.bmi_category)
        out.append(replace(r, occupation=occ, bmi_category=bmi, person_id=-1))
    return out


def encode(records: list[RawRecord], spec: EncodingSpec | None = None) -> DataTable:
    """Turn cleaned records into an all-numeric DataTable.

    Column order is fixed: eleven base numerics, then one one-hot column per
    occupation (sorted by name). Downstream feature indices rely on it.
    """
    spec = spec or EncodingSpec.default()
    n = len(records)
    gender = np.empty(n)
    age = np.empty(n)
    duration = np.empty(n)
    quality = np.empty(n)
    activity = np.empty(n)
    stress = np.empty(n)
    bmi = np.empty(n)
    heart = np.empty(n)
    steps = np.empty(n)
    systolic = np.empty(n)
    diastolic = np.empty(n)
    labels = np.empty(n, dtype=np.int64)

    occupations = sorted({r.occupation for r in records})
    onehots = {occ: np.zeros(n) for occ in occupations}

    for i, r in enumerate(records):
        if r.gender not in spec.gender_map:
            raise UnknownCategory("Gender", r.gender)
        if r.bmi_category not in spec.bmi_midpoints:
            raise UnknownCategory("BMI Category", r.bmi_category)
        if r.sleep_disorder not in TARGET_CODES:
            raise UnknownCategory("Sleep Disorder", r.sleep_disorder)
        gender[i] = spec.gender_map[r.gender]
        age[i] = r.age
        duration[i] = r.sleep_duration
        quality[i] = r.quality_of_sleep
        activity[i] = r.physical_activity
        stress[i] = r.stress_level
        bmi[i] = spec.bmi_midpoints[r.bmi_category]
        heart[i] = r.heart_rate
        steps[i] = r.daily_steps
        systolic[i], diastolic[i] = parse_blood_pressure(r.blood_pressure)
        onehots[r.occupation][i] = 1.0
        labels[i] = TARGET_CODES[r.sleep_disorder]

    columns = [
        Column("Gender", BINARY, gender),
        Column("Age", NUMERIC, age),
        Column("Sleep Duration", NUMERIC, duration),
        Column("Quality of Sleep", NUMERIC, quality),
        Column("Physical Activity Level", NUMERIC, activity),
        Column("Stress Level", NUMERIC, stress),
        Column("BMI", NUMERIC, bmi),
        Column("Heart Rate", NUMERIC, heart),
        Column("Daily Steps", NUMERIC, steps),
        Column("Systolic BP", NUMERIC, systolic),
        Column("Diastolic BP", NUMERIC, diastolic),
    ]
    columns.extend(Column(f"Occupation={occ}", ONEHOT, onehots[occ]) for occ in occupations)
    return DataTable(columns, labels)


ENGINEERED_NAMES = [
    "stress_sleep_interaction",
    "sleep_heart_ratio",
    "sleep_steps_ratio",
    "sleep_stress_ratio",
    "bmi_activity",
    "pulse_pressure",
    "log_steps",
    "sqrt_sleep",
]


def engineer_features(table: DataTable) -> DataTable:
    """Append the eight interaction/transform columns; inputs are kept."""
    duration = table.column("Sleep Duration").values
    quality = table.column("Quality of Sleep").values
    stress = table.column("Stress Level").values
    heart = table.column("Heart Rate").values
    steps = table.column("Daily Steps").values
    bmi = table.column("BMI").values
    activity = table.column("Physical Activity Level").values
    systolic = table.column("Systolic BP").values
    diastolic = table.column("Diastolic BP").values

    if np.any(steps <= 0):
        raise LogDomain("Daily Steps must be positive to take the log")
    for name, arr in (("Quality of Sleep", quality), ("Heart Rate", heart),
                      ("Stress Level", stress)):
        if np.any(arr <= 0):
            raise DivisionDomain(f"{name} must be positive to form ratio features")
    if np.any(duration < 0):
        raise ValueError("Sleep Duration must be non-negative for sqrt")

    engineered = [
        Column(ENGINEERED_NAMES[0], NUMERIC, stress / quality),
        Column(ENGINEERED_NAMES[1], NUMERIC, duration / heart),
        Column(ENGINEERED_NAMES[2], NUMERIC, duration / steps),
        Column(ENGINEERED_NAMES[3], NUMERIC, duration / stress),
        Column(ENGINEERED_NAMES[4], NUMERIC, bmi * activity),
        Column(ENGINEERED_NAMES[5], NUMERIC, systolic - diastolic),
        Column(ENGINEERED_NAMES[6], NUMERIC, np.log(steps)),
        Column(ENGINEERED_NAMES[7], NUMERIC, np.sqrt(duration)),
    ]
    return table.append_columns(engineered)


def load_encoded(path, spec: EncodingSpec | None = None) -> DataTable:
    """Full ingest chain: load, clean, encode, engineer."""
    spec = spec or EncodingSpec.default()
    return engineer_features(encode(clean(load_csv(path), spec), spec))


def split_counts(class_counts: dict[int, int], train_fraction: float) -> dict[int, int]:
    """Per-class train counts: round each, then largest-remainder so the
    total equals round(n * fraction). Ties go to the lower class label."""
    total_target = round(sum(class_counts.values()) * train_fraction)
    keys = sorted(class_counts)
    exact = {c: class_counts[c] * train_fraction for c in keys}
    floors = {c: math.floor(exact[c]) for c in keys}
    leftover = total_target - sum(floors.values())
    order = sorted(keys, key=lambda c: (-(exact[c] - floors[c]), c))
    out = dict(floors)
    for c in order[:leftover]:
        out[c] += 1
    return out


def stratified_split(table: DataTable, train_fraction: float, seed: int) -> tuple[DataTable, DataTable]:
    """Class-proportional split; assignment is a seeded within-class shuffle."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    counts = table.class_counts()
    for c, cnt in counts.items():
        if cnt < 2:
            raise ClassTooSmall(f"class {c} has {cnt} row(s); need at least 2")
    targets = split_counts(counts, train_fraction)
    for c in sorted(counts):
        if targets[c] == 0 or targets[c] == counts[c]:
            raise ClassTooSmall(
                f"class {c}: train fraction {train_fraction} leaves an empty partition"
            )
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for c in sorted(counts):
        rows = np.flatnonzero(table.labels == c)
        perm = rng.permutation(rows.shape[0])
        rows = rows[perm]
        train_idx.extend(rows[: targets[c]].tolist())
        test_idx.extend(rows[targets[c]:].tolist())
    return table.take_rows(sorted(train_idx)), table.take_rows(sorted(test_idx))


def dump_table_csv(table: DataTable, path) -> None:
    """Debug dump: encoded matrix plus a trailing label column, full precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.names + ["label"])
        matrix = table.matrix()
        for i in range(table.n_rows):
            writer.writerow([repr(float(v)) for v in matrix[i]] + [int(table.labels[i])])
