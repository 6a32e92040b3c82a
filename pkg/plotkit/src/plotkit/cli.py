"""The ``plot`` command: render one figure from a JSON description."""

import argparse
import sys

from .figspec import FigureSpec, FigureSpecError
from .render import render
from .traces import TraceSchemaError


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render a figure from bench trace CSVs.")
    parser.add_argument("--spec", required=True,
                        help="JSON figure description (inputs, panels, output)")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec.from_file(args.spec)
        out = render(spec)
    except (FigureSpecError, TraceSchemaError) as exc:
        print(f"plot: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"plot: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
