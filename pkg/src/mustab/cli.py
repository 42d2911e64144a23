"""Command line front end.

Usage: mustab <stages> --input system.json --out outdir [--seed N]

Stages are a comma- or space-separated subset of
check, transform, criterion, simulate, fit, or the shorthand "all".
Exit code 0 means every requested verdict passed, 1 means a check was
inconclusive or refuted, 2 means the input or stage selection was invalid.
"""

from __future__ import annotations

import argparse
import json
import sys

from .pipeline import (
    STAGES,
    DocumentError,
    emit_outputs,
    parse_system,
    run_pipeline,
)
from .rates import RateError, make_mu


def _parse_stages(tokens):
    names = []
    for tok in tokens:
        names.extend(s for s in tok.replace(",", " ").split() if s)
    if "all" in names:
        return list(STAGES)
    unknown = [s for s in names if s not in STAGES]
    if unknown:
        raise DocumentError("stages: unknown %s" % unknown)
    if not names:
        raise DocumentError("stages: at least one stage is required")
    # keep canonical order regardless of how they were given
    return [s for s in STAGES if s in names]


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="mustab",
        description="Stability certification for positive delayed systems.",
    )
    ap.add_argument("stages", nargs="+",
                    help="stages to run: check transform criterion simulate fit, or all")
    ap.add_argument("--input", required=True, help="system document (JSON)")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--seed", type=int, default=0, help="RNG seed for sampled checks")
    args = ap.parse_args(argv)

    try:
        stages = _parse_stages(args.stages)
        with open(args.input) as fh:
            text = fh.read()
        doc = parse_system(text)
        report, traj, code = run_pipeline(doc, stages, seed=args.seed)
        mu = make_mu(doc.mu_spec) if traj is not None else None
        paths = emit_outputs(report, traj, args.out, mu=mu)
    except (OSError, DocumentError, RateError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2

    for stage in stages:
        ok = report.stage_pass.get(stage)
        print("%-10s %s" % (stage, "pass" if ok else "FAIL"))
    if report.criterion is not None:
        print("verdict: %s" % report.criterion.verdict)
        print("margins: %s" % json.dumps(report.criterion.to_dict()["margins"]))
    for path in paths:
        print("wrote %s" % path)
    return code


if __name__ == "__main__":
    sys.exit(main())
