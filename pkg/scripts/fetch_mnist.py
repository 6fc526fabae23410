#!/usr/bin/env python3
"""Download the four MNIST IDX files into a data directory.

The library itself never touches the network; run this once (or drop
the canonical files in place yourself), then point [data] dir at the
directory.

Usage:
    python scripts/fetch_mnist.py [--dest data/mnist] [--base-url URL]
"""

import argparse
import gzip
import hashlib
import urllib.request
from pathlib import Path

FILES = {
    "train-images-idx3-ubyte.gz": "f68b3c2dcbeaaa9fbdd348bbdeb94873",
    "train-labels-idx1-ubyte.gz": "d53e105ee54ea40749a09fcbcd1e9432",
    "t10k-images-idx3-ubyte.gz": "9fb629c4189551a2d022fa330f9573f3",
    "t10k-labels-idx1-ubyte.gz": "ec29112dd5afa0611ce80d1b7f02629c",
}

# mirrors of the original distribution
DEFAULT_BASES = [
    "https://ossci-datasets.s3.amazonaws.com/mnist/",
    "https://storage.googleapis.com/cvdf-datasets/mnist/",
    "https://raw.githubusercontent.com/fgnt/mnist/master/",
]


def fetch(dest: Path, bases) -> int:
    dest.mkdir(parents=True, exist_ok=True)
    for name, md5 in FILES.items():
        gz_path = dest / name
        raw_path = dest / name[: -len(".gz")]
        if raw_path.exists():
            print(f"{raw_path} already present")
            continue
        data = None
        for base in bases:
            url = base.rstrip("/") + "/" + name
            try:
                print(f"fetching {url}")
                with urllib.request.urlopen(url, timeout=60) as resp:
                    data = resp.read()
                break
            except OSError as exc:
                print(f"  failed: {exc}")
        if data is None:
            print(f"could not download {name} from any mirror")
            return 1
        digest = hashlib.md5(data).hexdigest()
        if digest != md5:
            print(f"checksum mismatch for {name}: {digest} != {md5}")
            return 1
        gz_path.write_bytes(data)
        raw_path.write_bytes(gzip.decompress(data))
        gz_path.unlink()
        print(f"wrote {raw_path}")
    return 0


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", default="data/mnist")
    parser.add_argument("--base-url", action="append", default=None,
                        help="mirror base URL (repeatable)")
    args = parser.parse_args()
    bases = args.base_url or DEFAULT_BASES
    return fetch(Path(args.dest), bases)


if __name__ == "__main__":
    raise SystemExit(main())
