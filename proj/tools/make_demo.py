#!/usr/bin/env python3
"""Writes the synthetic demo dataset under data/demo/.

Deterministic: the same seed always produces byte-identical files.
"""

import argparse
import csv
import datetime as dt
import math
import random
from pathlib import Path

START = dt.date(2024, 1, 2)
END = dt.date(2024, 7, 17)

RELEVANT = [
    "Ukraine grain corridor {verb} as Russia {event}",
    "Russia {event}; Kyiv markets {verb}",
    "Sanctions on Russia {verb} energy traders",
    "Ukraine war {event}, investors {verb}",
    "EU weighs new sanctions after Russia {event}",
    "Kyiv talks {verb} amid war fears",
]
OTHER = [
    "Tech earnings {verb} ahead of guidance",
    "Retail sales {verb} in holiday quarter",
    "Central bank minutes {verb} bond traders",
]
VERBS = ["rally", "slump", "steady", "waver", "surge", "stall"]
EVENTS = ["escalates shelling", "signals ceasefire talks", "hits energy grid", "halts gas flows", "frees prisoners"]


def trading_days():
    d, out = START, []
    while d <= END:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def calendar_days():
    d, out = START, []
    while d <= END:
        out.append(d)
        d += dt.timedelta(days=1)
    return out


def write_series(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["date", "value"])
        for d, v in rows:
            w.writerow([d.isoformat(), f"{v:.4f}"])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "demo"))
    ap.add_argument("--seed", type=int, default=2022)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # Daily latent tone, AR(1), drives the headline logits.
    tone = {}
    level = 0.0
    for d in calendar_days():
        level = 0.7 * level + rng.gauss(0.0, 0.6)
        tone[d] = level

    headlines = []
    for d in calendar_days():
        for _ in range(rng.randint(2, 6)):
            relevant = rng.random() < 0.8
            tpl = rng.choice(RELEVANT if relevant else OTHER)
            title = tpl.format(verb=rng.choice(VERBS), event=rng.choice(EVENTS))
            t = tone[d] + rng.gauss(0.0, 1.0)
            pos = round(1.2 * t + rng.gauss(0.0, 0.5), 4)
            neg = round(-1.2 * t + rng.gauss(0.0, 0.5), 4)
            neu = round(0.8 + rng.gauss(0.0, 0.5), 4)
            headlines.append((d, "Demo Wire", title, pos, neg, neu))
    # A few records without logits exercise the lexicon fallback.
    headlines.append((dt.date(2024, 3, 6), "Demo Wire", "Ukraine talks bring strong gains and rally hopes", "", "", ""))
    headlines.append((dt.date(2024, 5, 14), "Demo Wire", "Russia sanctions deepen losses and crisis fears", "", "", ""))

    with open(out / "headlines.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["date", "source", "title", "pos", "neg", "neu"])
        for row in headlines:
            w.writerow([row[0].isoformat(), *row[1:]])

    days = trading_days()
    vix, ofr, epu_val, bond = 14.0, -1.5, 110.0, 4.0
    sp, h, eps_prev = 4700.0, 1.0e-4, 0.0
    sp_rows, vix_rows, ofr_rows, bond_rows = [], [], [], []
    for d in days:
        vix = max(9.0, vix + 0.15 * (15.0 - vix) + rng.gauss(0.0, 0.9))
        ofr = ofr + 0.1 * (-1.2 - ofr) + rng.gauss(0.0, 0.12)
        bond = bond + rng.gauss(0.0, 0.04)
        # Same-day sentiment: mean of the weekday tone pushed into log returns.
        h = 2.0e-6 + 0.08 * eps_prev ** 2 + 0.88 * h
        eps = math.sqrt(h) * rng.gauss(0.0, 1.0)
        r = 0.0004 + 0.0015 * tone[d] - 0.0004 * (vix - 15.0) + eps
        eps_prev = eps
        sp *= math.exp(r)
        sp_rows.append((d, sp))
        vix_rows.append((d, vix))
        ofr_rows.append((d, ofr))
        bond_rows.append((d, bond))
    # Missing bond prints on a few trading days.
    bond_rows = [row for i, row in enumerate(bond_rows) if i not in (17, 58, 59, 101)]

    epu_rows = []
    for d in calendar_days():
        epu_val = max(20.0, epu_val + 0.2 * (110.0 - epu_val) + rng.gauss(0.0, 12.0))
        if rng.random() < 0.12 and START < d < END:
            continue  # publication gaps
        epu_rows.append((d, epu_val))

    write_series(out / "sp500.csv", sp_rows)
    write_series(out / "vix.csv", vix_rows)
    write_series(out / "ofr.csv", ofr_rows)
    write_series(out / "bond.csv", bond_rows)
    write_series(out / "epu.csv", epu_rows)


if __name__ == "__main__":
    main()
