"""Command-line entry point: render CSV artifacts into plots."""

import argparse
import sys

from .render import STYLES, FigureSpec, RenderError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ptcycle-figures",
        description="Render ptcycle CSV outputs into deterministic plots.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="draw one figure from one or more CSVs")
    p.add_argument("--csv", action="append", required=True, metavar="PATH",
                   help="input CSV; repeat for one panel per file")
    p.add_argument("--style", required=True, choices=STYLES)
    p.add_argument("--out", required=True, metavar="PATH.svg|PATH.png")
    p.add_argument("--xlabel", default="")
    p.add_argument("--ylabel", default="")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    try:
        info = render(FigureSpec(
            csv_paths=tuple(args.csv), style=args.style, out_path=args.out,
            xlabel=args.xlabel, ylabel=args.ylabel))
    except RenderError as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 2
    note = (f", {info.masked_adiabatic} adiabatic points masked"
            if info.masked_adiabatic else "")
    print(f"wrote {info.out_path}: {info.panels} panel(s), "
          f"{info.points} points{note}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
