#!/usr/bin/env python3
"""Generate the bundled synthetic fixture under data/fixture/.

Six countries, years 2008-2023, one target index per country and 40 candidate
indicators per country. Everything is driven by random.Random(SEED), so the
output is byte-stable across runs and platforms.

Target: a smooth index around 2-3.5 (trend plus a slow cycle plus small
noise), kept well away from zero so MAPE is defined.

Candidates per country:
  - 8 "linked" indicators: affine images of the target plus noise, on
    assorted scales (GDP-like, percent-like, counts), some inverted
  - 4 lagged/smoothed versions of the target
  - 22 unrelated random walks on assorted scales
  - 3 sparse series (observed in fewer than 70% of years)
  - 3 series with a handful of isolated gaps

Run: python3 tools/make_fixture.py [output_dir]
"""

import math
import random
import sys
from pathlib import Path

SEED = 20240917
YEARS = list(range(2008, 2024))
COUNTRIES = ["BHR", "KWT", "OMN", "QAT", "SAU", "ARE"]


def fmt(v):
    return "" if v is None else f"{v:.6g}"


def target_series(rng):
    level = rng.uniform(2.0, 3.2)
    slope = rng.uniform(-0.02, 0.02)
    amp = rng.uniform(0.05, 0.15)
    period = rng.uniform(6.0, 10.0)
    phase = rng.uniform(0, 2 * math.pi)
    out = []
    for i, _ in enumerate(YEARS):
        v = level + slope * i + amp * math.sin(2 * math.pi * i / period + phase) + rng.gauss(0, 0.02)
        out.append(round(v, 4))
    return out


def random_walk(rng, n, start, step):
    v = start
    out = []
    for _ in range(n):
        v += rng.gauss(0, step)
        out.append(v)
    return out


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "fixture"
    outdir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)

    target_rows = []
    indicator_rows = []
    for country in COUNTRIES:
        y = target_series(rng)
        for year, v in zip(YEARS, y):
            target_rows.append((country, year, v))
        mean = sum(y) / len(y)

        series = []
        for j in range(8):
            scale = 10 ** rng.randint(0, 4)
            sign = 1 if j % 3 else -1
            noise = rng.uniform(0.01, 0.05)
            offset = rng.uniform(1, 50) * scale
            vals = [offset + sign * scale * ((v - mean) + rng.gauss(0, noise)) * 10 for v in y]
            series.append((f"LNK.{j:02d}", f"Linked indicator {j} (index units x{scale})", vals))
        for j in range(4):
            lag = 1 + j % 2
            vals = [y[max(0, i - lag)] * 40 + rng.gauss(0, 0.3) for i in range(len(y))]
            series.append((f"LAG.{j:02d}", f"Lagged indicator {j}, {lag}y", vals))
        for j in range(22):
            scale = 10 ** rng.randint(0, 5)
            vals = random_walk(rng, len(YEARS), rng.uniform(10, 100) * scale, scale * rng.uniform(0.5, 5))
            series.append((f"RW.{j:02d}", f"Unrelated random walk {j}, \"scale\" {scale}", vals))

        rows = [(code, name, list(vals)) for code, name, vals in series]
        for j in range(3):
            vals = random_walk(rng, len(YEARS), 50, 3)
            kept = sorted(rng.sample(range(len(YEARS)), 8))
            rows.append((f"SPR.{j:02d}", f"Sparse indicator {j}", [v if i in kept else None for i, v in enumerate(vals)]))
        for j in range(3):
            vals = [v * 5 + 100 + rng.gauss(0, 0.2) for v in y]
            holes = set(rng.sample(range(1, len(YEARS) - 1), 3))
            rows.append((f"GAP.{j:02d}", f"Gappy linked indicator {j}", [None if i in holes else v for i, v in enumerate(vals)]))

        for code, name, vals in rows:
            indicator_rows.append((country, code, name, vals))

    with open(outdir / "target.csv", "w", newline="\n") as f:
        f.write("country,year,value\n")
        for c, yr, v in target_rows:
            f.write(f"{c},{yr},{fmt(v)}\n")

    def quote(s):
        return '"' + s.replace('"', '""') + '"' if any(ch in s for ch in ',"') else s

    with open(outdir / "indicators.csv", "w", newline="\n") as f:
        f.write("country,indicator_code,indicator_name," + ",".join(str(y) for y in YEARS) + "\n")
        for c, code, name, vals in indicator_rows:
            f.write(f"{c},{code},{quote(name)}," + ",".join(fmt(v) for v in vals) + "\n")


if __name__ == "__main__":
    main()
