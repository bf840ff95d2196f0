#!/usr/bin/env python3
"""Fetch the UCI "multiple features" handwritten-digit dataset (mfeat).

Downloads the six feature files (649 columns total, 2000 rows ordered by
digit, 200 per digit) into data/mfeat/ and records SHA-256 checksums in
data/mfeat/SHA256SUMS.  On re-runs, existing files are verified against
the recorded sums instead of re-downloaded; a mismatch aborts.  The sums
are recorded on first fetch rather than pinned here because the dataset
is fetched, never redistributed with this package.

The optional digit-separation test in the test suite activates once the
files are present.

Usage: python3 scripts/fetch_mfeat.py [--dest data/mfeat]
"""
from __future__ import annotations

import argparse
import hashlib
import sys
import urllib.request
from pathlib import Path

BASE_URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/mfeat/"
FILES = (
    "mfeat-fac",
    "mfeat-fou",
    "mfeat-kar",
    "mfeat-mor",
    "mfeat-pix",
    "mfeat-zer",
)


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_sums(path: Path) -> dict[str, str]:
    sums: dict[str, str] = {}
    if path.exists():
        for line in path.read_text().splitlines():
            if line.strip():
                digest, name = line.split(None, 1)
                sums[name.strip()] = digest
    return sums


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dest", default="data/mfeat", help="download directory")
    args = parser.parse_args(argv)

    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    sums_path = dest / "SHA256SUMS"
    sums = load_sums(sums_path)

    changed = False
    for name in FILES:
        target = dest / name
        if target.exists():
            digest = sha256_of(target)
            if name in sums and sums[name] != digest:
                print(f"checksum mismatch for {target}; delete it and re-fetch", file=sys.stderr)
                return 1
            if name not in sums:
                sums[name] = digest
                changed = True
            print(f"ok       {name}  {digest[:16]}…")
            continue
        url = BASE_URL + name
        print(f"fetching {url}")
        try:
            with urllib.request.urlopen(url, timeout=60) as resp:
                data = resp.read()
        except OSError as exc:
            print(f"download failed for {url}: {exc}", file=sys.stderr)
            return 1
        target.write_bytes(data)
        digest = sha256_of(target)
        if name in sums and sums[name] != digest:
            print(f"checksum mismatch for fresh download of {name}", file=sys.stderr)
            return 1
        sums[name] = digest
        changed = True
        print(f"wrote    {target}  {digest[:16]}…")

    if changed:
        sums_path.write_text("".join(f"{sums[n]}  {n}\n" for n in FILES))
        print(f"recorded checksums in {sums_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
