#!/usr/bin/env python3
"""Regenerate the CSV snapshots shipped in src/ntklens/data/.

The tabular files are deterministic synthetic stand-ins that mirror the
shape, schema and rough statistics of the published sources (see
data/PROVENANCE.md).  The digits archive is copied from scikit-learn's
bundled 8x8 handwritten-digits snapshot.  Re-running this script must
reproduce the checked-in files byte for byte.
"""

import csv
from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "ntklens" / "data"

FUEL_ROWS = 398
FUEL_MISSING_HP = 6
GAIT_ROWS = 48
GAIT_FEATURES = 328
GAIT_CLASSES = 16
CONCRETE_ROWS = 103


def _fmt(value, decimals):
    return f"{value:.{decimals}f}"


def make_fuel(rng):
    """Auto fuel-economy style table: 7 raw columns + mpg target.

    The loader one-hot expands `origin` (drop-first) to reach 8 input
    features; 6 rows carry a '?' horsepower to exercise missing-value drops.
    """
    rows = []
    for _ in range(FUEL_ROWS):
        origin = rng.choice([1, 2, 3], p=[0.62, 0.18, 0.20])
        if origin == 1:
            cylinders = rng.choice([4, 6, 8], p=[0.35, 0.30, 0.35])
        elif origin == 2:
            cylinders = rng.choice([4, 5, 6], p=[0.80, 0.10, 0.10])
        else:
            cylinders = rng.choice([3, 4, 6], p=[0.05, 0.85, 0.10])
        disp_range = {3: (70, 80), 4: (79, 151), 5: (121, 183), 6: (145, 262), 8: (260, 455)}
        lo, hi = disp_range[int(cylinders)]
        displacement = rng.uniform(lo, hi)
        horsepower = max(46.0, 0.35 * displacement + 25.0 + rng.normal(0.0, 8.0))
        weight = float(np.clip(1500.0 + 6.5 * displacement + rng.normal(0.0, 180.0), 1600, 5200))
        acceleration = float(np.clip(26.0 - 350.0 * horsepower / weight + rng.normal(0.0, 1.2), 8.0, 24.8))
        model_year = int(rng.integers(70, 83))
        origin_bonus = {1: 0.0, 2: 1.2, 3: 1.8}[int(origin)]
        mpg = (
            62000.0 / weight
            + 0.55 * (model_year - 70)
            - 0.035 * horsepower
            + origin_bonus
            + rng.normal(0.0, 1.6)
        )
        mpg = float(np.clip(mpg, 9.0, 46.6))
        rows.append(
            [
                _fmt(mpg, 1),
                str(int(cylinders)),
                _fmt(displacement, 1),
                _fmt(horsepower, 1),
                _fmt(weight, 1),
                _fmt(acceleration, 1),
                str(model_year),
                str(int(origin)),
            ]
        )
    missing = rng.choice(FUEL_ROWS, size=FUEL_MISSING_HP, replace=False)
    for idx in missing:
        rows[int(idx)][3] = "?"
    header = ["mpg", "cylinders", "displacement", "horsepower", "weight", "acceleration", "model_year", "origin"]
    return header, rows


def make_gait(rng):
    """16 movement classes, 3 recordings each, 328 waveform-summary features."""
    header = [f"f{i}" for i in range(GAIT_FEATURES)] + ["label"]
    templates = rng.normal(0.0, 1.0, size=(GAIT_CLASSES, GAIT_FEATURES))
    rows = []
    for label in range(GAIT_CLASSES):
        for _ in range(GAIT_ROWS // GAIT_CLASSES):
            sample = templates[label] + rng.normal(0.0, 0.35, size=GAIT_FEATURES)
            rows.append([_fmt(v, 4) for v in sample] + [str(label)])
    return header, rows


def make_concrete(rng):
    """Slump-test style table: 7 mix components, 3 measured outcomes."""
    header = ["cement", "slag", "fly_ash", "water", "sp", "coarse_aggr", "fine_aggr", "slump", "flow", "strength"]
    rows = []
    for _ in range(CONCRETE_ROWS):
        cement = rng.uniform(137.0, 374.0)
        slag = rng.uniform(0.0, 193.0)
        fly_ash = rng.uniform(0.0, 260.0)
        water = rng.uniform(160.0, 240.0)
        sp = rng.uniform(4.0, 19.0)
        coarse = rng.uniform(708.0, 1049.0)
        fine = rng.uniform(640.0, 902.0)
        slump = float(np.clip(-58.0 + 0.46 * water - 0.6 * sp + 0.025 * fly_ash + rng.normal(0.0, 6.0), 0.0, 29.0))
        flow = float(np.clip(20.0 + 1.8 * slump + rng.normal(0.0, 6.0), 20.0, 78.0))
        strength = float(
            np.clip(52.0 + 0.06 * cement + 0.02 * (slag + fly_ash) - 0.165 * water + rng.normal(0.0, 2.5), 10.0, 60.0)
        )
        rows.append(
            [_fmt(cement, 1), _fmt(slag, 1), _fmt(fly_ash, 1), _fmt(water, 1), _fmt(sp, 1),
             _fmt(coarse, 1), _fmt(fine, 1), _fmt(slump, 1), _fmt(flow, 1), _fmt(strength, 2)]
        )
    return header, rows


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def write_digits(path):
    from sklearn.datasets import load_digits

    digits = load_digits()
    images = digits.images.astype(np.uint8)  # 0..16 intensity
    labels = digits.target.astype(np.uint8)
    np.savez_compressed(path, images=images, labels=labels)
    print(f"wrote {path} ({images.shape[0]} source digits)")


def main():
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    header, rows = make_fuel(np.random.default_rng(20240501))
    write_csv(DATA_DIR / "fuel.csv", header, rows)
    header, rows = make_gait(np.random.default_rng(20240502))
    write_csv(DATA_DIR / "gait.csv", header, rows)
    header, rows = make_concrete(np.random.default_rng(20240503))
    write_csv(DATA_DIR / "concrete.csv", header, rows)
    write_digits(DATA_DIR / "digits8x8.npz")


if __name__ == "__main__":
    main()
