"""Seeded generator for a survey-shaped CSV used as the bundled sample dataset.

The real survey export is not redistributable, so tests and demos run on a
synthetic file with the same schema and class balance (77/219/78), both BMI
spellings, and a couple of sub-threshold occupations.

Rows are drawn from per-class archetypes, mirroring how the survey clusters:
people sharing an occupation and condition report near-identical numbers.
Every archetype pins an exact Daily Steps value reused across classes, so the
high-magnitude column alone carries almost no class signal, while the
small-scale clinical fields separate the classes cleanly. Archetypes sharing
a steps value are pushed apart in BMI-times-activity so no cross-class pair
sits closer than same-archetype siblings.
"""
from __future__ import annotations

import csv

import numpy as np

from .dataset import EXPECTED_HEADER

CLASS_ROWS = {"Insomnia": 77, "None": 219, "Sleep Apnea": 78}

_OCCUPATIONS = ["Nurse", "Doctor", "Engineer", "Teacher", "Accountant",
                "Lawyer", "Salesperson", "Software Engineer"]

_OCCUPATION_W = {
    "Insomnia": [0.10, 0.10, 0.12, 0.20, 0.15, 0.08, 0.18, 0.07],
    "None": [0.12, 0.20, 0.18, 0.10, 0.12, 0.12, 0.06, 0.10],
    "Sleep Apnea": [0.35, 0.12, 0.08, 0.10, 0.06, 0.09, 0.12, 0.08],
}

_MALE_P = {"Insomnia": 0.45, "None": 0.50, "Sleep Apnea": 0.70}

# steps, activity, bmi, duration, quality, stress, heart, systolic, pulse, age
_ARCHETYPES = {
    "Insomnia": [
        (4800, 51, "Normal",     6.1, 5, 7, 75, 130, 45, 42),
        (5600, 65, "Overweight", 6.4, 5, 6, 73, 128, 44, 38),
        (6400, 35, "Obese",      5.9, 4, 8, 78, 133, 46, 48),
        (7200, 83, "Normal",     6.5, 6, 6, 74, 129, 44, 36),
        (8000, 53, "Overweight", 6.2, 5, 7, 76, 131, 45, 45),
    ],
    "None": [
        (4000, 53, "Normal",     7.4, 7, 5, 70, 122, 43, 43),
        (4800, 67, "Normal",     7.6, 8, 4, 69, 120, 42, 39),
        (5600, 53, "Overweight", 7.3, 7, 5, 71, 123, 43, 44),
        (6400, 83, "Normal",     7.8, 8, 3, 67, 118, 41, 31),
        (7200, 53, "Normal",     7.5, 8, 4, 68, 119, 42, 34),
        (8000, 65, "Overweight", 7.7, 8, 4, 69, 121, 42, 40),
        (8800, 69, "Normal",     8.1, 9, 3, 66, 116, 41, 28),
    ],
    "Sleep Apnea": [
        (4000, 46, "Obese",      6.7, 5, 6, 82, 138, 48, 55),
        (4800, 55, "Obese",      6.6, 5, 6, 83, 139, 48, 57),
        (5600, 40, "Overweight", 7.0, 6, 5, 79, 135, 46, 48),
        (6400, 53, "Overweight", 7.1, 7, 4, 78, 134, 46, 44),
        (7200, 53, "Overweight", 6.8, 6, 5, 80, 136, 47, 50),
    ],
}

# rows forced onto sub-threshold occupations so the "Other" pooling rule fires
_RARE = [("Sales Representative", 3), ("Manager", 2)]


def _jitter_int(rng, center: int, spread: int, lo: int = None, hi: int = None) -> int:
    v = center + int(rng.integers(-spread, spread + 1))
    if lo is not None:
        v = max(v, lo)
    if hi is not None:
        v = min(v, hi)
    return v


def generate_records(seed: int) -> list[dict]:
    """Build the full row set as dicts keyed by the canonical header names."""
    rng = np.random.default_rng(seed)
    rows = []
    for disorder, count in CLASS_ROWS.items():
        arcs = _ARCHETYPES[disorder]
        for i in range(count):
            steps, act, bmi, dur, qual, stress, heart, sys_c, pulse_c, age = arcs[i % len(arcs)]
            # one row in twenty drifts toward the class boundary so folds are
            # not uniformly perfect for strong models
            w = 2 if rng.random() < 0.05 else 1
            duration = round(dur + float(rng.uniform(-0.15 * w, 0.15 * w)), 1)
            systolic = _jitter_int(rng, sys_c, 2 * w)
            pulse = _jitter_int(rng, pulse_c, 1 * w)
            bmi_label = bmi
            if bmi_label == "Normal" and rng.random() < 0.45:
                bmi_label = "Normal Weight"
            rows.append({
                "Gender": "Male" if rng.random() < _MALE_P[disorder] else "Female",
                "Age": _jitter_int(rng, age, 4, lo=18),
                "Occupation": str(rng.choice(_OCCUPATIONS, p=_OCCUPATION_W[disorder])),
                "Sleep Duration": duration,
                "Quality of Sleep": _jitter_int(rng, qual, 1 * w, lo=1, hi=10),
                "Physical Activity Level": _jitter_int(rng, act, 2 * w, lo=5),
                "Stress Level": _jitter_int(rng, stress, 1 * w, lo=1, hi=10),
                "BMI Category": bmi_label,
                "Blood Pressure": f"{systolic}/{systolic - pulse}",
                "Heart Rate": _jitter_int(rng, heart, 2 * w),
                "Daily Steps": steps,
                "Sleep Disorder": disorder,
            })
    order = rng.permutation(len(rows))
    rows = [rows[i] for i in order]
    rare_slots = rng.choice(len(rows), size=sum(n for _, n in _RARE), replace=False)
    cursor = 0
    for name, n in _RARE:
        for slot in rare_slots[cursor:cursor + n]:
            rows[slot]["Occupation"] = name
        cursor += n
    for i, row in enumerate(rows, start=1):
        row["Person ID"] = i
    return rows


def write_csv(path, seed: int) -> int:
    """Write the generated rows in canonical column order; returns row count."""
    rows = generate_records(seed)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=EXPECTED_HEADER)
        writer.writeheader()
        writer.writerows(rows)
    return len(rows)
