"""``render_figures`` entry point."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .spec import FigureSpecError, parse_spec
from .render import render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="Render dqsim result CSVs into PNG figures.",
    )
    parser.add_argument(
        "--spec", required=True, nargs="+",
        help="one or more JSON figure spec files",
    )
    args = parser.parse_args(argv)
    status = 0
    for spec_path in args.spec:
        try:
            spec = parse_spec(Path(spec_path).read_text())
            out = render(spec)
            print(f"{spec.figure}: wrote {out}")
        except (OSError, FigureSpecError) as exc:
            print(f"error: {spec_path}: {exc}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
