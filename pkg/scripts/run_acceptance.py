"""Run the pinned-seed acceptance suite and write its JSON and CSV reports."""

import argparse
import pathlib
import sys

from hypoheat.report import emit_report
from hypoheat.suite import DEFAULT_SEED, selftest


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--quick", action="store_true", help="reduced path counts")
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    report = selftest(args.seed, args.workers, "quick" if args.quick else "full")
    out = pathlib.Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "acceptance.json").write_bytes(emit_report(report, "json"))
    (out / "acceptance.csv").write_bytes(emit_report(report, "csv"))
    print(report.table())
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
