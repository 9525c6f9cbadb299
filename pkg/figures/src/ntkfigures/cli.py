"""`ntklens-render`: draw one figure from an ntklens result file."""

from __future__ import annotations

import argparse
import json
import sys

from .render import KINDS, FigureRequest, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ntklens-render", description=__doc__)
    parser.add_argument("render", choices=["render"], nargs="?", default="render",
                        help=argparse.SUPPRESS)
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="input_path", required=True, help="records.csv, correlation.json or comparison.csv")
    parser.add_argument("--out", dest="output_path", required=True, help="image file to write (.png or .svg)")
    parser.add_argument("--x", default=None, help="x column (scatter)")
    parser.add_argument("--y", default=None, help="y column (scatter) or metric (errorbar)")
    parser.add_argument("--color", default=None, help="color column (scatter)")
    args = parser.parse_args(argv)
    try:
        request = FigureRequest(kind=args.kind, input_path=args.input_path,
                                output_path=args.output_path, x=args.x, y=args.y, color=args.color)
        path = render(request)
    except (ValueError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
