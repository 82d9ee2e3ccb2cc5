"""Run every suite with the example config and print a per-suite summary.

    python3 scripts/run_suites.py [out_dir] [--jobs N]
"""

import argparse
import json
import sys
from pathlib import Path

from taufay import cli_report as cr

HERE = Path(__file__).resolve().parent


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("out", nargs="?", default="reports")
    ap.add_argument("--jobs", type=int, default=4)
    ap.add_argument("--config", type=Path, default=HERE / "example_config.json")
    args = ap.parse_args()
    config = json.loads(args.config.read_text())
    report, timings = cr.run(config, "all", jobs=args.jobs)
    cr.write_outputs(report, timings, Path(args.out))
    by_suite: dict = {}
    for rec in report["records"]:
        suite = rec["id"].split("/")[0]
        s = by_suite.setdefault(suite, {"checks": 0, "failed": 0, "info": 0, "seconds": 0.0})
        s["seconds"] += timings[rec["id"]]
        if rec["kind"] == "info":
            s["info"] += 1
        else:
            s["checks"] += 1
            s["failed"] += not rec["passed"]
    for suite, s in by_suite.items():
        print(f"{suite:15s} {s['checks'] - s['failed']:3d}/{s['checks']:<3d} passed  "
              f"{s['info']} info  {s['seconds']:6.2f}s cpu")
    print(f"reports written to {args.out}/")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
