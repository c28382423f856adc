"""Command line front end.

    mslsdc problem.txt [--mode decide|foar] [--max-iterations N]
                       [--oracle-depth D] [--trace PATH] [--stats] [--szs]

Exit status: 10 satisfiable, 20 unsatisfiable, 30 unknown, 1 input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .oracle import check
from .problem import ProblemError, parse
from .refinement import FOARConfig, fo_ar_solve
from .saturation import Limits, NotMSLError, decide

EXIT = {"SAT": 10, "UNSAT": 20, "UNKNOWN": 30}
WORDS = {"SAT": "SATISFIABLE", "UNSAT": "UNSATISFIABLE", "UNKNOWN": "UNKNOWN"}
SZS = {"SAT": "Satisfiable", "UNSAT": "Unsatisfiable", "UNKNOWN": "GaveUp"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mslsdc", description=(
        "Decide MSL(SDC) clause sets, or run approximation and refinement "
        "on arbitrary equality-free clause sets."))
    p.add_argument("problem", help="problem file, or - for standard input")
    p.add_argument("--mode", choices=["decide", "foar"], default="foar")
    p.add_argument("--max-iterations", type=int, default=100, metavar="N",
                   help="refinement bound in foar mode (default 100)")
    p.add_argument("--oracle-depth", type=int, default=None, metavar="D",
                   help="also run the ground oracle at term depth D and report it")
    p.add_argument("--trace", metavar="PATH", help="write per-iteration records here")
    p.add_argument("--stats", action="store_true", help="print statistics to stderr")
    p.add_argument("--szs", action="store_true", help="print an SZS status line")
    p.add_argument("--max-seconds", type=float, default=None,
                   help="wall-clock limit per saturation run")
    return p


def _write_trace(path, records, steps_text):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(rec["text"] + "\n")
            fh.write("json " + json.dumps(rec["data"], sort_keys=True, default=str) + "\n")
        if steps_text:
            fh.write("approximation steps of the last iteration:\n" + steps_text + "\n")


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = sys.stdin.read() if args.problem == "-" else open(args.problem).read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        pf = parse(text)
    except ProblemError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    limits = Limits(max_seconds=args.max_seconds)
    records, steps_text, stats = [], "", {}
    if args.mode == "decide":
        try:
            d = decide(pf.clauses, pf.sig, limits)
        except NotMSLError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        verdict = d.verdict
        stats = dict(d.result.stats)
        records.append({"text": f"decide: {verdict}", "data": {"verdict": verdict, **stats}})
    else:
        res = fo_ar_solve(pf.clauses, pf.sig,
                          FOARConfig(max_iterations=args.max_iterations, limits=limits))
        verdict = res.verdict
        stats = {"refinements": res.refinements, "iterations": len(res.trace)}
        if res.reason:
            stats["reason"] = res.reason
        for rec in res.trace:
            records.append({"text": rec.render(), "data": rec.as_dict()})
        if res.approximation is not None:
            steps_text = res.approximation.index.render()

    if args.szs:
        print(f"% SZS status {SZS[verdict]}")
    else:
        print(WORDS[verdict])
    if args.oracle_depth is not None:
        try:
            o = check(pf.clauses, pf.sig, args.oracle_depth)
            note = "refutation found" if o.verdict == "UNSAT" else "no refutation (inconclusive)"
            print(f"oracle depth {args.oracle_depth}: {note}", file=sys.stderr)
        except Exception as e:  # oracle limits are diagnostics only
            print(f"oracle depth {args.oracle_depth}: {e}", file=sys.stderr)
    if args.stats:
        for k in sorted(stats):
            print(f"{k}: {stats[k]}", file=sys.stderr)
    if args.trace:
        _write_trace(args.trace, records, steps_text)
    return EXIT[verdict]


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
