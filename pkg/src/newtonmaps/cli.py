"""Command-line entry point: ``newtonmaps <suite> [options]``.

Exit status is 0 when every case passes, 1 when some case fails and 2 on a
configuration error (bad arguments, unreadable or malformed documents).
"""

from __future__ import annotations

import argparse
import sys

from .functions import Window
from .suites import ALIASES, SUITES, ConfigError, ExperimentConfig, run_suite


def _window(text: str) -> Window:
    try:
        x0, y0, x1, y1 = (float(t) for t in text.split(","))
        return Window(complex(x0, y0), complex(x1, y1))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"window must be x0,y0,x1,y1: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="newtonmaps",
                                 description="Newton maps of entire functions: experiment suites.")
    ap.add_argument("suite", choices=list(SUITES) + sorted(ALIASES))
    ap.add_argument("--spec", help="function spec (or rational map, for lefschetz) JSON file")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--path", dest="path_doc", help="integration path document (reconstruct)")
    ap.add_argument("--curve", dest="curve_doc", help="curve document (lefschetz)")
    ap.add_argument("--window", type=_window, help="render window x0,y0,x1,y1")
    for name, typ in (("width", int), ("height", int), ("budget", int),
                      ("radius", float), ("samples", int)):
        ap.add_argument(f"--{name}", type=typ)
    return ap




def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    overrides = {k: getattr(args, k) for k in ("width", "height", "budget", "radius", "samples")
                 if getattr(args, k) is not None}
    try:
        cfg = ExperimentConfig(args.suite, args.seed, args.spec, args.out, overrides,
                               args.path_doc, args.curve_doc, args.window)
        report = run_suite(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    s = report.body()["summary"]
    print(f"{report.suite}: {s['pass_count']} passed, {s['fail_count']} failed, "
          f"{s['skipped']} skipped -> {args.out}/report.json")
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
