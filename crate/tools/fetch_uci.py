#!/usr/bin/env python3
"""Fetch the Wisconsin breast-cancer and mushroom files from the UCI repository.

Writes data/breast-cancer-wisconsin.data and data/agaricus-lepiota.data and
checks their record counts (699 and 8124). When the UCI host is unreachable,
falls back to copies redistributed through package indexes:

  * Wisconsin: the MASS `biopsy` table shipped in the `rdatasets` wheel
    (same records; rebuilt into the original comma-separated layout).
  * Mushroom: the original file vendored in the `xgboost-sys` crate source.
"""
import argparse
import io
import lzma
import os
import pickle
import shutil
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"
SOURCES = {
    "breast-cancer-wisconsin.data": (f"{UCI}/breast-cancer-wisconsin/breast-cancer-wisconsin.data", 699),
    "agaricus-lepiota.data": (f"{UCI}/mushroom/agaricus-lepiota.data", 8124),
}


def from_uci(url):
    with urllib.request.urlopen(url, timeout=20) as resp:
        return resp.read().decode("ascii")


def wisconsin_from_rdatasets(tmp):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, "rdatasets==0.2.10"],
        check=True,
    )
    wheel = next(f for f in os.listdir(tmp) if f.startswith("rdatasets") and f.endswith(".whl"))
    blob = zipfile.ZipFile(os.path.join(tmp, wheel)).read("rdatasets/_data/MASS/biopsy.pkl.compress")
    frame = pickle.loads(lzma.decompress(blob))
    out = io.StringIO()
    for row in frame.itertuples(index=False):
        attrs = []
        for name in ("V1", "V2", "V3", "V4", "V5", "V6", "V7", "V8", "V9"):
            v = getattr(row, name)
            attrs.append("?" if v != v else str(int(v)))
        code = {"benign": "2", "malignant": "4"}[row[-1]]
        out.write(",".join([str(int(row.ID))] + attrs + [code]) + "\n")
    return out.getvalue()


def mushroom_from_crate(tmp):
    proj = os.path.join(tmp, "fetch")
    os.makedirs(os.path.join(proj, "src"))
    with open(os.path.join(proj, "Cargo.toml"), "w") as f:
        f.write('[package]\nname = "fetch"\nversion = "0.0.0"\nedition = "2021"\n\n'
                '[dependencies]\nxgboost-sys = "=0.1.2"\n')
    open(os.path.join(proj, "src", "lib.rs"), "w").close()
    meta = subprocess.run(
        ["cargo", "metadata", "--format-version", "1", "--manifest-path", os.path.join(proj, "Cargo.toml")],
        check=True, capture_output=True, text=True,
    ).stdout
    import json
    pkg = next(p for p in json.loads(meta)["packages"] if p["name"] == "xgboost-sys")
    root = os.path.dirname(pkg["manifest_path"])
    path = os.path.join(root, "xgboost", "demo", "binary_classification", "agaricus-lepiota.data")
    with open(path) as f:
        return f.read()


FALLBACKS = {
    "breast-cancer-wisconsin.data": wisconsin_from_rdatasets,
    "agaricus-lepiota.data": mushroom_from_crate,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for name, (url, expected) in SOURCES.items():
        try:
            text = from_uci(url)
        except Exception as err:  # noqa: BLE001
            print(f"{name}: UCI unreachable ({err}); using package-index fallback", file=sys.stderr)
            tmp = tempfile.mkdtemp()
            try:
                text = FALLBACKS[name](tmp)
            finally:
                shutil.rmtree(tmp, ignore_errors=True)
        records = [line for line in text.splitlines() if line.strip()]
        if len(records) != expected:
            sys.exit(f"{name}: expected {expected} records, got {len(records)}")
        with open(os.path.join(args.out, name), "w") as f:
            f.write("\n".join(records) + "\n")
        print(f"{name}: {len(records)} records")


if __name__ == "__main__":
    main()
