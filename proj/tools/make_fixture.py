#!/usr/bin/env python3
"""Generate the frozen 261-week fixture panel committed under tests/fixtures.

The panel mimics the structure of a weekly US search-index download: 19
predictor terms with varying degrees of annual/semiannual periodicity plus
two decode targets ("die", "death") built as lagged, cubically-distorted
mixtures of the predictors. Deterministic: rerunning reproduces the file
byte for byte.
"""

import datetime as dt
import os
import sys

import numpy as np

T = 261
START = dt.date(2013, 12, 2)  # a Monday
WEEKS_PER_YEAR = 52.0
SERIES_SD = 10.0
DEFAULT_SEED = 20181206

# name -> list of sinusoid components (frequency cy/yr, amplitude share, phase).
# Amplitude shares are fractions of the series' total standard deviation; the
# remainder (1 - sum of squared shares) is filled with white noise. Components
# slightly off the 1.0 / 2.0 cy/yr band centers give series that look seasonal
# without tracking the targets' own seasonal cycle, and sub-annual components
# (~0.6 cy/yr) act as slow trend-like structure.
PREDICTORS = {
    "AIDS": [(1.84, 0.80, 2.2)],
    "Alzheimer": [(2.00, 0.80, 1.9)],
    "Breast Cancer": [(0.86, 0.85, 0.7)],
    "Cancer": [(1.00, 0.92, 0.3)],
    "Car Accident": [(1.00, 0.45, 1.6), (0.58, 0.62, 0.5)],
    "Cirrhosis": [(2.00, 0.82, 1.5)],
    "Diabetes": [(1.00, 0.64, 0.8), (2.00, 0.64, 1.1)],
    "Diarrhoeal": [(0.87, 0.25, 2.8), (0.56, 0.72, 2.0)],
    "Flu": [(0.855, 0.86, 1.3)],
    "Heart Disease": [(1.00, 0.88, 0.9)],
    "Kidney Cancer": [(1.00, 0.84, 1.5)],
    "Lung Cancer": [(2.00, 0.84, 1.1)],
    "Malaria": [(0.86, 0.52, 0.4), (1.86, 0.52, 2.5), (1.00, 0.36, 2.1)],
    "Obstructive Pulmonary Disease": [
        (0.865, 0.40, 1.8), (1.865, 0.40, 0.6), (0.62, 0.55, 2.9)],
    "Respiratory Infection": [(0.845, 0.86, 2.0)],
    "Sick": [(1.00, 0.80, 2.1)],
    "Stomach Cancer": [(0.875, 0.30, 0.9), (0.60, 0.76, 1.4)],
    "Stroke": [(1.00, 0.86, 2.7)],
    "Tuberculosis": [(1.75, 0.96, 0.2)],
}

# Per-target mixture weights by rank (1 = heaviest); ranks follow the
# intended importance ordering of the panel.
DIE_RANKS = [
    "Cancer", "Lung Cancer", "Diabetes", "Heart Disease", "Stroke",
    "Kidney Cancer", "Car Accident", "Cirrhosis", "Alzheimer", "Sick",
    "Stomach Cancer", "AIDS", "Breast Cancer", "Obstructive Pulmonary Disease",
    "Respiratory Infection", "Malaria", "Flu", "Diarrhoeal", "Tuberculosis",
]
DEATH_RANKS = [
    "Sick", "Lung Cancer", "Diabetes", "Heart Disease", "Cancer",
    "Cirrhosis", "Kidney Cancer", "Stroke", "Stomach Cancer", "Car Accident",
    "AIDS", "Respiratory Infection", "Flu", "Alzheimer",
    "Obstructive Pulmonary Disease", "Breast Cancer", "Malaria",
    "Diarrhoeal", "Tuberculosis",
]

# target -> (annual share, semiannual share, mixture share, noise share) of
# the target's standard deviation (14 index points around an offset of 50).
TARGETS = {
    "die": (0.78, 0.32, 0.45, 0.03),
    "death": (0.22, 0.72, 0.55, 0.25),
}
TARGET_SD = 14.0


def rank_weights(names):
    weights = {}
    for r, name in enumerate(names, start=1):
        if r <= 10:
            w = 2.0 * 0.85 ** (r - 1)
        elif r < len(names):
            w = 0.16 * 0.88 ** (r - 11)
        else:
            w = 0.0  # last-ranked term carries no signal
        weights[name] = w
    return weights


def build_predictor(components, rng):
    t = np.arange(T)
    total_share = sum(s * s for _, s, _ in components)
    series = np.full(T, 50.0)
    for freq, share, phase in components:
        series += SERIES_SD * np.sqrt(2.0) * share * np.sin(
            2.0 * np.pi * freq * t / WEEKS_PER_YEAR + phase)
    series += SERIES_SD * np.sqrt(max(0.0, 1.0 - total_share)) \
        * rng.standard_normal(T)
    return np.clip(np.rint(series), 0, 100)


def build_target(panel, names, ranks, shares, rng):
    ann, semi, mix, noise = shares
    weights = rank_weights(ranks)
    t = np.arange(T)
    u = np.zeros(T)
    for i, name in enumerate(names):
        x = panel[name]
        z = (x - x.mean()) / x.std()
        lag = i % 5
        lagged = np.roll(z, lag)
        lagged[:lag] = z[0]
        u += weights[name] * lagged
    u = (u - u.mean()) / u.std()
    signal = u + 0.05 * u**2 + 0.04 * u**3
    signal = (signal - signal.mean()) / signal.std()
    out = (
        50.0
        + TARGET_SD * np.sqrt(2.0) * ann * np.sin(2 * np.pi * t / WEEKS_PER_YEAR + 0.3)
        + TARGET_SD * np.sqrt(2.0) * semi * np.sin(4 * np.pi * t / WEEKS_PER_YEAR + 1.1)
        + TARGET_SD * mix * signal
        + TARGET_SD * noise * rng.standard_normal(T)
    )
    return np.clip(np.rint(out), 0, 100)


def main():
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_SEED
    rng = np.random.default_rng(seed)
    names = sorted(PREDICTORS)
    panel = {name: build_predictor(PREDICTORS[name], rng) for name in names}
    panel["death"] = build_target(panel, names, DEATH_RANKS, TARGETS["death"], rng)
    panel["die"] = build_target(panel, names, DIE_RANKS, TARGETS["die"], rng)

    out_path = os.path.join(
        os.path.dirname(os.path.abspath(__file__)), "..", "tests", "fixtures",
        "trends_fixture.csv")
    os.makedirs(os.path.dirname(out_path), exist_ok=True)
    columns = names + ["death", "die"]
    with open(out_path, "w", newline="\n") as f:
        f.write("date," + ",".join(columns) + "\n")
        for i in range(T):
            date = START + dt.timedelta(weeks=i)
            row = ",".join(str(int(panel[c][i])) for c in columns)
            f.write(f"{date.isoformat()},{row}\n")
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main()
