#!/usr/bin/env python3
"""Sample plotting script for the queries-vs-b_pivot data files.

The benchmark emits plain-text plot data (one block per algorithm, lines of
"b_pivot mean_queries"); this script is a convenience wrapper that renders
one such file with matplotlib.  matplotlib is deliberately NOT a package
dependency; install it separately or feed the .dat file to gnuplot:

    plot for [i=0:*] "queries_vs_b_n100_r50.dat" index i w lp title columnhead
"""

import argparse
import sys
from pathlib import Path


def parse_blocks(text: str) -> dict:
    """{algorithm: [(b_pivot, mean_queries), ...]} from a series file."""
    blocks, current = {}, None
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("# algorithm:"):
            current = line.split(":", 1)[1].strip()
            blocks[current] = []
        elif line and not line.startswith("#") and current is not None:
            pivot, mean = line.split()
            blocks[current].append((int(pivot), float(mean)))
    return blocks


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("data_file", type=Path)
    parser.add_argument("--out", type=Path, default=None,
                        help="write a PNG instead of opening a window")
    parser.add_argument("--log-y", action="store_true")
    args = parser.parse_args()

    try:
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is not installed; install it or use gnuplot "
              "(see the module docstring)", file=sys.stderr)
        return 1

    blocks = parse_blocks(args.data_file.read_text())
    if not blocks:
        print(f"no algorithm blocks found in {args.data_file}", file=sys.stderr)
        return 1

    fig, ax = plt.subplots(figsize=(6, 4))
    for algorithm, points in sorted(blocks.items()):
        xs, ys = zip(*points)
        ax.plot(xs, ys, marker="o", label=algorithm)
    ax.set_xlabel("b_pivot")
    ax.set_ylabel("mean oracle queries")
    if args.log_y:
        ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    if args.out:
        fig.savefig(args.out, dpi=150)
        print(f"wrote {args.out}")
    else:
        plt.show()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
