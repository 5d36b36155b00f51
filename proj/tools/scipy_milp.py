#!/usr/bin/env python3
"""MILP adapter: reads the free-MPS subset this toolkit writes, solves with
scipy's HiGHS backend, and writes a name/value solution file.

Usage: scipy_milp.py problem.mps solution.txt
"""

import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

INF = np.inf


def parse_mps(path):
    obj_row = None
    row_sense = {}
    row_order = []
    cols = {}
    col_order = []
    integrality = {}
    rhs = {}
    bounds = {}
    section = None
    in_int = False

    with open(path) as fh:
        for raw in fh:
            if raw.startswith("*"):
                continue
            toks = raw.split()
            if not toks:
                continue
            if not raw[0].isspace():
                key = toks[0]
                if key in ("NAME", "ENDATA"):
                    section = None
                    continue
                if key in ("ROWS", "COLUMNS", "RHS", "BOUNDS"):
                    section = key
                    continue
                raise SystemExit(f"unsupported MPS section: {key}")
            if section == "ROWS":
                kind, name = toks
                if kind == "N":
                    obj_row = name
                else:
                    row_sense[name] = kind
                    row_order.append(name)
            elif section == "COLUMNS":
                if len(toks) >= 3 and toks[1] == "'MARKER'":
                    in_int = toks[-1] == "'INTORG'"
                    continue
                name = toks[0]
                if name not in cols:
                    cols[name] = {}
                    col_order.append(name)
                    integrality[name] = in_int
                for row, val in zip(toks[1::2], toks[2::2]):
                    cols[name][row] = float(val)
            elif section == "RHS":
                for row, val in zip(toks[1::2], toks[2::2]):
                    rhs[row] = float(val)
            elif section == "BOUNDS":
                kind, _, name = toks[:3]
                lo, hi = bounds.get(name, (0.0, 1.0 if integrality[name] else INF))
                if kind == "BV":
                    lo, hi = 0.0, 1.0
                elif kind == "FX":
                    lo = hi = float(toks[3])
                elif kind == "LO":
                    lo = float(toks[3])
                elif kind == "UP":
                    hi = float(toks[3])
                elif kind == "MI":
                    lo = -INF
                elif kind == "PL":
                    hi = INF
                elif kind == "FR":
                    lo, hi = -INF, INF
                else:
                    raise SystemExit(f"unsupported bound type: {kind}")
                bounds[name] = (lo, hi)

    n = len(col_order)
    col_idx = {name: j for j, name in enumerate(col_order)}
    row_idx = {name: i for i, name in enumerate(row_order)}
    c = np.zeros(n)
    lb = np.zeros(n)
    ub = np.full(n, INF)
    integ = np.zeros(n)
    entries = ([], [], [])
    for name, coefs in cols.items():
        j = col_idx[name]
        integ[j] = 1.0 if integrality[name] else 0.0
        lo, hi = bounds.get(name, (0.0, 1.0 if integrality[name] else INF))
        lb[j], ub[j] = lo, hi
        for row, val in coefs.items():
            if row == obj_row:
                c[j] = val
            else:
                entries[0].append(row_idx[row])
                entries[1].append(j)
                entries[2].append(val)

    m = len(row_order)
    a = sparse.coo_matrix((entries[2], (entries[0], entries[1])), shape=(m, n))
    row_lb = np.empty(m)
    row_ub = np.empty(m)
    for name, i in row_idx.items():
        b = rhs.get(name, 0.0)
        kind = row_sense[name]
        row_lb[i] = -INF if kind == "L" else b
        row_ub[i] = INF if kind == "G" else b
    return c, a.tocsr(), row_lb, row_ub, lb, ub, integ, col_order


def main():
    if len(sys.argv) != 3:
        raise SystemExit(__doc__)
    c, a, row_lb, row_ub, lb, ub, integ, names = parse_mps(sys.argv[1])
    res = milp(
        c,
        constraints=LinearConstraint(a, row_lb, row_ub),
        bounds=Bounds(lb, ub),
        integrality=integ,
        options={"mip_rel_gap": 1e-9},
    )

    lines = []
    if res.status == 2:
        lines.append("status infeasible")
    elif res.status == 3:
        lines.append("status unbounded")
    elif res.x is not None:
        lines.append("status optimal" if res.status == 0 else "status feasible")
        lines.append(f"objective {res.fun:.17g}")
        for name, v in zip(names, res.x):
            lines.append(f"{name} {v:.17g}")
    else:
        print(f"solver failed: status {res.status} ({res.message})",
              file=sys.stderr)
        return 1
    with open(sys.argv[2], "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
