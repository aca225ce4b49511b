#!/usr/bin/env python3
"""Build data/adult.csv from the UCI Adult train and test files.

The two raw files (adult.data, adult.test) are merged into one CSV with a
header row and a binary `income` column (1 for >50K). Rows with unknown
values ("?") are kept; the category "?" is treated as its own level.

Usage:
  prepare_adult.py --raw-dir DIR [--out data/adult.csv]
  prepare_adult.py --wheel responsibly-*.whl [--out data/adult.csv]

The `responsibly` wheel on PyPI ships an unmodified copy of both raw files.
"""
import argparse
import csv
import pathlib
import zipfile

COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num",
    "marital_status", "occupation", "relationship", "race", "sex",
    "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
]


def parse(lines):
    for line in lines:
        line = line.strip()
        if not line or line.startswith("|"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != len(COLUMNS):
            raise ValueError(f"bad row: {line!r}")
        label = fields[-1].rstrip(".")
        fields[-1] = "1" if label == ">50K" else "0"
        yield fields


def main():
    ap = argparse.ArgumentParser()
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--raw-dir", type=pathlib.Path)
    src.add_argument("--wheel", type=pathlib.Path)
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("data/adult.csv"))
    args = ap.parse_args()

    if args.wheel:
        z = zipfile.ZipFile(args.wheel)
        read = lambda name: z.read(f"responsibly/dataset/adult/{name}").decode().splitlines()
    else:
        read = lambda name: (args.raw_dir / name).read_text().splitlines()

    rows = list(parse(read("adult.data"))) + list(parse(read("adult.test")))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
