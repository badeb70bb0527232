#!/usr/bin/env python3
"""Solve an LP-format model with HiGHS and print one key=value status line.

Exit codes: 0 solved (optimal or infeasible), 2 no solver available, 1 other errors.
"""
import argparse
import sys


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("model")
    ap.add_argument("--time-limit", type=float, default=60.0)
    args = ap.parse_args()
    try:
        import highspy
    except ImportError:
        print("status=no-solver")
        return 2

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", args.time_limit)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 1e-9)
    if h.readModel(args.model) != highspy.HighsStatus.kOk:
        print("status=read-error")
        return 1
    lp = h.getLp()
    integrality = list(lp.integrality_) if len(lp.integrality_) else []
    ints = sum(1 for v in integrality if v == highspy.HighsVarType.kInteger)
    counts = f"columns={lp.num_col_} integers={ints} rows={lp.num_row_}"
    h.run()
    status = h.getModelStatus()
    if status == highspy.HighsModelStatus.kOptimal:
        print(f"status=optimal objective={h.getInfo().objective_function_value:.9f} {counts}")
        return 0
    if status == highspy.HighsModelStatus.kInfeasible:
        print(f"status=infeasible {counts}")
        return 0
    print(f"status={h.modelStatusToString(status).replace(' ', '-').lower()} {counts}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
