#!/usr/bin/env python3
"""Export the diabetes regression dataset to the CSV layout the engine reads.

Writes 11 comma-separated numeric columns (age, sex, bmi, bp, s1..s6, target)
with one header line and 442 data rows. Features are the raw (unstandardized)
measurements; the engine min-max normalizes the target column itself.

Usage: python3 scripts/export_diabetes.py [out_csv]
"""

import sys

from sklearn.datasets import load_diabetes


def main() -> None:
    out_path = sys.argv[1] if len(sys.argv) > 1 else "data/diabetes.csv"
    bundle = load_diabetes(scaled=False)
    features = bundle.data
    targets = bundle.target
    names = list(bundle.feature_names)
    assert features.shape == (442, 10), features.shape
    with open(out_path, "w", encoding="utf-8") as out:
        out.write(",".join(names + ["target"]) + "\n")
        for row, target in zip(features, targets):
            cells = [format_number(v) for v in row] + [format_number(target)]
            out.write(",".join(cells) + "\n")
    print(f"wrote {features.shape[0]} rows to {out_path}")


def format_number(value: float) -> str:
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


if __name__ == "__main__":
    main()
