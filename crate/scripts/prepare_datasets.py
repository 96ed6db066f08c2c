#!/usr/bin/env python3
"""Convert the KEEL / UCI files bundled in the `keel-ds` and `common-datasets`
wheels into the header-first CSV layout read by `pawforest`.

Usage:
    pip download --no-deps keel-ds common-datasets -d /tmp/wheels
    python3 scripts/prepare_datasets.py /tmp/wheels data/

Nominal columns are ordinal-encoded by sorted distinct value. Rows with a
missing cell ("?" or "<null>") are dropped. The label column is always the
last column and is named `class`; raw label strings are kept so that the
loader's lexicographic label mapping applies.
"""
import csv
import glob
import os
import sys
import zipfile

KEEL = "keel_ds/data/{group}/raw/{name}.dat"
COMMON = "common_datasets/data/classification/{name}"

# output name -> (source, path, label position)
SOURCES = {
    "tic-tac-toe": ("keel", KEEL.format(group="balanced", name="tic-tac-toe"), -1),
    "mammographic-mass": ("keel", KEEL.format(group="balanced", name="mammographic"), -1),
    "ionosphere": ("keel", KEEL.format(group="balanced", name="ionosphere"), -1),
    "haberman": ("keel", KEEL.format(group="imbalanced", name="haberman"), -1),
    "wdbc": ("keel", KEEL.format(group="balanced", name="wdbc"), -1),
    "sonar": ("keel", KEEL.format(group="balanced", name="sonar"), -1),
    "diabetes": ("keel", KEEL.format(group="balanced", name="pima"), -1),
    "breast-w": ("keel", KEEL.format(group="balanced", name="wisconsin"), -1),
    "heart-statlog": ("keel", KEEL.format(group="balanced", name="heart"), -1),
    "australian": ("keel", KEEL.format(group="balanced", name="australian"), -1),
    "german-credit": ("keel", KEEL.format(group="balanced", name="german"), -1),
    "kr-vs-kp": ("keel", KEEL.format(group="balanced", name="chess"), -1),
    "hepatitis": ("common", COMMON.format(name="hepatitis") + "/hepatitis.data.txt", 0),
    "spect": ("common", [COMMON.format(name="spect_f") + "/SPECT.train.txt",
                         COMMON.format(name="spect_f") + "/SPECT.test.txt"], 0),
}


def read_rows(zf, paths):
    if isinstance(paths, str):
        paths = [paths]
    rows = []
    for path in paths:
        text = zf.read(path).decode("utf-8", errors="replace")
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("@"):
                continue
            rows.append([cell.strip() for cell in line.split(",")])
    return rows


def is_number(cell):
    try:
        float(cell)
        return True
    except ValueError:
        return False


def convert(rows, label_pos):
    rows = [r for r in rows if not any(c in ("?", "<null>", "") for c in r)]
    width = len(rows[0])
    label_pos = label_pos % width
    feature_cols = [c for c in range(width) if c != label_pos]
    codes = {}
    for c in feature_cols:
        values = [r[c] for r in rows]
        if not all(is_number(v) for v in values):
            codes[c] = {v: i for i, v in enumerate(sorted(set(values)))}
    out = []
    for r in rows:
        feats = []
        for c in feature_cols:
            feats.append(str(codes[c][r[c]]) if c in codes else r[c])
        out.append(feats + [r[label_pos]])
    header = [f"f{i}" for i in range(len(feature_cols))] + ["class"]
    return header, out


def main():
    wheels, out_dir = sys.argv[1], sys.argv[2]
    zips = {
        "keel": zipfile.ZipFile(glob.glob(os.path.join(wheels, "keel_ds-*.whl"))[0]),
        "common": zipfile.ZipFile(glob.glob(os.path.join(wheels, "common_datasets-*.whl"))[0]),
    }
    os.makedirs(out_dir, exist_ok=True)
    for name, (src, path, label_pos) in SOURCES.items():
        header, rows = convert(read_rows(zips[src], path), label_pos)
        with open(os.path.join(out_dir, f"{name}.csv"), "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        labels = [r[-1] for r in rows]
        counts = {l: labels.count(l) for l in sorted(set(labels))}
        print(f"{name}: n={len(rows)} p={len(header) - 1} labels={counts}")


if __name__ == "__main__":
    main()
