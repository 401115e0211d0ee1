"""Command line: plot --input samples.csv --out fig.png --window 10 --target 25"""

from __future__ import annotations

import argparse
import sys

from .core import SchemaError, read_samples
from .render import render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render queue/pool curves from a parsim samples.csv export",
    )
    parser.add_argument("--input", required=True, help="samples.csv path")
    parser.add_argument("--out", required=True, help="output image path (png/svg/pdf)")
    parser.add_argument("--window", type=int, default=10,
                        help="moving-average window in samples (default 10)")
    parser.add_argument("--target", type=float, default=None,
                        help="draw a horizontal reference at this queue length")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.window < 1:
        print(f"error: --window must be >= 1, got {args.window}", file=sys.stderr)
        return 2
    try:
        samples = read_samples(args.input)
    except FileNotFoundError:
        print(f"error: no such file: {args.input}", file=sys.stderr)
        return 2
    except SchemaError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return 2
    render(samples, args.window, args.target, args.out)
    print(f"wrote {args.out} ({len(samples)} samples, window {args.window})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
