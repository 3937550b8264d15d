#!/usr/bin/env python3
"""Solve the modulated model (oscillatory a with non-degeneracy windows),
then run the clean-interval and tail diagnostics on the dumped profile.
"""

import argparse
import pathlib
import sys

from nlhet.cli import main as nlhet_main

HERE = pathlib.Path(__file__).resolve().parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/modulated")
    ap.add_argument("--config", default=str(HERE.parent / "configs" / "modulated.ini"))
    args = ap.parse_args()
    code = nlhet_main(["solve", args.config, "--out", args.out])
    if code != 0:
        return code
    return nlhet_main(["diagnose", f"{args.out}/profile.csv", args.config,
                       "--checks", "clean,tail,lewy-stampacchia",
                       "--out", f"{args.out}/diagnostics"])


if __name__ == "__main__":
    sys.exit(main())
