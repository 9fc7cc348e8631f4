#!/usr/bin/env python3
"""Download the MNIST test files into data/ and verify their checksums.

The two .gz files also ship with this repository, so running this is
only needed for a fresh data directory.
"""

import hashlib
import urllib.request
from pathlib import Path

MIRROR = "https://ossci-datasets.s3.amazonaws.com/mnist/"
FILES = {
    "t10k-images-idx3-ubyte.gz": "9fb629c4189551a2d022fa330f9573f3",
    "t10k-labels-idx1-ubyte.gz": "ec29112dd5afa0611ce80d1b7f02629c",
}
DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def main() -> int:
    DATA_DIR.mkdir(exist_ok=True)
    for name, want_md5 in FILES.items():
        dest = DATA_DIR / name
        if not dest.exists():
            print(f"downloading {name} ...")
            urllib.request.urlretrieve(MIRROR + name, dest)
        got = hashlib.md5(dest.read_bytes()).hexdigest()
        if got != want_md5:
            print(f"error: {name}: md5 {got}, expected {want_md5}")
            return 1
        print(f"{name}: ok ({got})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
