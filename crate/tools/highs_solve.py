#!/usr/bin/env python3
"""Solve an LP or MPS file with HiGHS and write `name value` lines.

Usage: highs_solve.py MODEL SOLUTION

Meant as a `sparks solve --solver-cmd` target:

    sparks solve ... --solver-cmd "python3 tools/highs_solve.py {model} {solution}"

Values are written with `repr`, which round-trips the solver's doubles
exactly. Exits with status 1 unless HiGHS reports an optimal solution.
"""

import sys

import highspy


def main(argv):
    if len(argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    model, solution = argv[1], argv[2]
    h = highspy.Highs()
    if h.readModel(model) != highspy.HighsStatus.kOk:
        print(f"cannot read {model}", file=sys.stderr)
        return 1
    h.run()
    status = h.getModelStatus()
    print(f"model status: {h.modelStatusToString(status)}")
    if status != highspy.HighsModelStatus.kOptimal:
        return 1
    names = h.getLp().col_names_
    values = h.getSolution().col_value
    with open(solution, "w") as out:
        out.write(f"# HiGHS, objective {h.getInfo().objective_function_value!r}\n")
        for name, value in zip(names, values):
            if value != 0.0:
                out.write(f"{name} {value!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
