"""One-time exporter for the bundled clinical datasets.

Not part of the installed package. Converts the .rda payloads from the R
survival package source tarball into the CSVs vendored under
src/censorbias/data/. Requires pyreadr, which is deliberately NOT a runtime
dependency.

Usage:
    python tools/export_datasets.py /path/to/survival/data /root/pkg/src/censorbias/data
"""

import csv
import pathlib
import sys

import numpy as np
import pyreadr

DATASETS = ["aml", "bladder1", "bladder2", "lung", "colon", "ovarian", "veteran"]

# some .rda containers bundle several frames or live under a different name
RDA_KEYS = {"aml": ("leukemia.rda", "aml"), "bladder1": ("bladder.rda", "bladder1"),
            "bladder2": ("bladder.rda", "bladder2")}


def cell(v):
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def main(rda_dir, out_dir):
    rda_dir = pathlib.Path(rda_dir)
    out_dir = pathlib.Path(out_dir)
    for name in DATASETS:
        fname, key = RDA_KEYS.get(name, (name + ".rda", name))
        frames = pyreadr.read_r(str(rda_dir / fname))
        df = frames[key if key in frames else name]
        with open(out_dir / (name + ".csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(df.columns)
            for row in df.itertuples(index=False):
                w.writerow([cell(v) for v in row])
        print(f"{name}: {len(df)} rows")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
