#!/usr/bin/env python3
"""Write the bundled classification datasets as headerless CSV plus a JSON manifest.

Each data/<name>.csv row holds the numeric features followed by an integer
class label in 0..c-1. Sources: scikit-learn's bundled copies of the UCI
iris, wine, breast cancer and optical digits sets, and the heart disease
(Cleveland) and zoo tables shipped with Orange3. Pass the directory holding
the Orange .tab files with --orange.
"""

import argparse
import csv
import json
from pathlib import Path

import numpy as np
from sklearn import datasets as skd


def write(out: Path, name: str, x: np.ndarray, labels, split_seed: int, test_fraction: float) -> None:
    classes = sorted(set(labels))
    y = np.array([classes.index(v) for v in labels])
    x = np.asarray(x, dtype=float)
    assert not np.isnan(x).any(), name
    with open(out / f"{name}.csv", "w", newline="") as f:
        w = csv.writer(f)
        for row, label in zip(x, y):
            w.writerow([repr(float(v)) for v in row] + [int(label)])
    manifest = {
        "name": name,
        "n": int(x.shape[0]),
        "d": int(x.shape[1]),
        "c": len(classes),
        "split_seed": split_seed,
        "test_fraction": test_fraction,
    }
    (out / f"{name}.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"{name}: n={manifest['n']} d={manifest['d']} c={manifest['c']}")


def read_tab(path: Path):
    """Orange .tab: names, types, flags, then rows. Returns columns and class."""
    lines = path.read_text().splitlines()
    names = lines[0].split("\t")
    types = lines[1].split("\t")
    flags = lines[2].split("\t") + [""] * len(names)
    rows = [ln.split("\t") for ln in lines[3:] if ln.strip()]
    feats, target = [], None
    for i, (n, t, fl) in enumerate(zip(names, types, flags)):
        fl = fl.strip()
        col = [r[i].strip() for r in rows]
        if fl == "class":
            target = col
        elif fl in ("meta", "ignore", "i", "m") or t == "string":
            continue
        else:
            feats.append((n, t, col))
    return feats, target


def encode_columns(feats):
    out = []
    for _name, t, col in feats:
        if t in ("c", "continuous"):
            vals = np.array([float(v) if v not in ("?", "") else np.nan for v in col])
        else:
            listed = [v.replace("\\ ", " ") for v in t.replace("\\ ", "\x00").split(" ")]
            listed = [v.replace("\x00", " ") for v in listed]
            present = sorted({v for v in col if v not in ("?", "")})
            order = listed if t != "d" and set(present) <= set(listed) else present
            vals = np.array([order.index(v) if v not in ("?", "") else np.nan for v in col], dtype=float)
        med = np.nanmedian(vals)
        vals[np.isnan(vals)] = med
        out.append(vals)
    return np.column_stack(out)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    ap.add_argument("--orange", type=Path, help="directory with heart_disease.tab and zoo.tab")
    ap.add_argument("--split-seed", type=int, default=7)
    ap.add_argument("--test-fraction", type=float, default=0.3)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for name, loader in [
        ("iris", skd.load_iris),
        ("wine", skd.load_wine),
        ("breast_cancer", skd.load_breast_cancer),
        ("digits", skd.load_digits),
    ]:
        b = loader()
        write(args.out, name, b.data, list(b.target), args.split_seed, args.test_fraction)

    if args.orange:
        for name in ("heart_disease", "zoo"):
            feats, target = read_tab(args.orange / f"{name}.tab")
            write(args.out, name, encode_columns(feats), target, args.split_seed, args.test_fraction)


if __name__ == "__main__":
    main()
