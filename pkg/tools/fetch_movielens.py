#!/usr/bin/env python3
"""Download MovieLens 100K ``u.data`` into ``data/ml-100k/``.

Tries the GroupLens archive first. If that host is unreachable, falls back to
the copy of the same ratings shipped inside the RecBole wheel on PyPI
(``ml-100k.inter``, identical rows with a header line).

The dataset's license forbids redistribution, so the file is not committed.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import subprocess
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

GROUPLENS_URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
U_DATA_MD5 = "6e47046882bad158b0efbb84cd5cb987"
DEFAULT_OUT = Path(__file__).resolve().parents[1] / "data" / "ml-100k" / "u.data"


def from_grouplens(timeout: float) -> bytes:
    with urllib.request.urlopen(GROUPLENS_URL, timeout=timeout) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    return archive.read("ml-100k/u.data")


def from_recbole() -> bytes:
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "recbole", "--no-deps", "-d", tmp, "-q"],
            check=True,
        )
        wheel = next(Path(tmp).glob("recbole-*.whl"))
        with zipfile.ZipFile(wheel) as zf:
            inter = zf.read("recbole/dataset_example/ml-100k/ml-100k.inter").decode("utf-8")
    # header "user_id:token\titem_id:token\trating:float\ttimestamp:float"
    rows = inter.splitlines()[1:]
    return ("\n".join(rows) + "\n").encode("utf-8")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=DEFAULT_OUT)
    parser.add_argument("--timeout", type=float, default=20.0)
    args = parser.parse_args(argv)

    try:
        payload = from_grouplens(args.timeout)
        origin = "grouplens"
    except OSError as exc:
        print(f"GroupLens unavailable ({exc}); trying the RecBole wheel", file=sys.stderr)
        payload = from_recbole()
        origin = "recbole wheel"

    digest = hashlib.md5(payload).hexdigest()
    lines = payload.count(b"\n")
    if lines != 100_000:
        print(f"unexpected line count {lines}", file=sys.stderr)
        return 1
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_bytes(payload)
    note = "matches" if digest == U_DATA_MD5 else "differs from"
    print(f"wrote {args.out} from {origin}: {lines} ratings, md5 {digest} ({note} published u.data)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
