"""Command line entry: ``plots <kind> --run DIR --out FILE``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .figures import RENDERERS, PlotSpec, plot
from .io import EmptyDataError, PlotSchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures from circumnav run logs"
    )
    parser.add_argument("kind", choices=sorted(RENDERERS))
    parser.add_argument("--run", required=True, help="run directory with CSV logs")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--format", choices=["svg", "png"], default=None,
                        help="image format (default: from --out suffix, else svg)")
    parser.add_argument("--no-shading", action="store_true",
                        help="disable occluded-window shading")
    parser.add_argument("--no-markers", action="store_true",
                        help="disable snapshot markers")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    fmt = args.format or (out.suffix.lstrip(".").lower() or "svg")
    if fmt not in ("svg", "png"):
        fmt = "svg"
    spec = PlotSpec(
        run_dir=Path(args.run),
        kind=args.kind,
        out_path=out,
        shade_windows=not args.no_shading,
        markers=not args.no_markers,
        image_format=fmt,
    )
    try:
        path = plot(spec)
    except PlotSchemaError as exc:
        print(
            json.dumps({"error": "schema", "column": exc.column, "message": str(exc)}),
            file=sys.stderr,
        )
        return 2
    except (EmptyDataError, FileNotFoundError) as exc:
        print(json.dumps({"error": "empty-data", "message": str(exc)}), file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
