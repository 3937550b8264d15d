#!/usr/bin/env python3
"""Solve the homogeneous benchmark and compare against the explicit layer.

Writes profile/trace/obstacle CSVs plus the manifest under --out and prints
the layer-match verdict.
"""

import argparse
import pathlib
import sys

from nlhet.cli import main as nlhet_main

HERE = pathlib.Path(__file__).resolve().parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/homogeneous")
    ap.add_argument("--config", default=str(HERE.parent / "configs" / "homogeneous.ini"))
    ap.add_argument("--resume", action="store_true")
    args = ap.parse_args()
    argv = ["solve", args.config, "--out", args.out]
    if args.resume:
        argv.append("--resume")
    return nlhet_main(argv)


if __name__ == "__main__":
    sys.exit(main())
