#!/usr/bin/env python3
"""External LP backend used by the tests: reads an LP JSON file, solves it
with scipy's HiGHS interface and writes the solution JSON."""

import json
import sys

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix


def main(src, dst):
    with open(src) as f:
        lp = json.load(f)
    n = lp["num_vars"]
    bounds = [(lo, hi) for lo, hi in zip(lp["lower"], lp["upper"])]
    eq, ub = [], []  # (row index, sign applied, row)
    for i, r in enumerate(lp["rows"]):
        if r["sense"] == "=":
            eq.append((i, 1.0, r))
        elif r["sense"] == "<=":
            ub.append((i, 1.0, r))
        else:
            ub.append((i, -1.0, r))

    def matrix(group):
        data, rows, cols = [], [], []
        for k, (_, s, r) in enumerate(group):
            for v, a in r["coefs"]:
                rows.append(k)
                cols.append(v)
                data.append(s * a)
        rhs = [s * r["rhs"] for _, s, r in group]
        if not group:
            return None, None
        return csr_matrix((data, (rows, cols)), shape=(len(group), n)), np.array(rhs)

    a_eq, b_eq = matrix(eq)
    a_ub, b_ub = matrix(ub)
    res = linprog(lp["cost"], A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    out = {"iterations": int(getattr(res, "nit", 0) or 0)}
    if res.status == 0:
        out["status"] = "optimal"
        out["x"] = [float(v) for v in res.x]
        duals = [0.0] * len(lp["rows"])
        if eq:
            for (i, s, _), m in zip(eq, res.eqlin.marginals):
                duals[i] = s * float(m)
        if ub:
            for (i, s, _), m in zip(ub, res.ineqlin.marginals):
                duals[i] = s * float(m)
        out["duals"] = duals
    elif res.status == 2:
        out["status"] = "infeasible"
    elif res.status == 3:
        out["status"] = "unbounded"
    else:
        out["status"] = "iteration_limit"
    with open(dst, "w") as f:
        json.dump(out, f)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
