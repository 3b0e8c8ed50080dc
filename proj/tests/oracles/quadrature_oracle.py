#!/usr/bin/env python3
"""Exact integrals of the quadratic Lagrange basis, used as fixed expectations.

Prints (and writes tests/data/quadrature_oracle.csv):
  q9_mass_trace  trace of rho t int N^T N for the 18x18 elastic mass of the unit
                 square with rho = t = 1
  edge_corner    int_0^h of a corner basis function along an edge, divided by h
  edge_middle    same for the mid-side function
  prestress_tx, prestress_ty  membrane tensions for delta_p = 42524 Pa, R = 1.37 m
"""
import csv
import pathlib

import sympy as sp

x, y = sp.symbols("x y")


def lagrange(t, nodes):
    out = []
    for i, a in enumerate(nodes):
        e = sp.Integer(1)
        for j, b in enumerate(nodes):
            if i != j:
                e *= (t - b) / (a - b)
        out.append(sp.expand(e))
    return out


def main():
    nodes = [sp.Integer(0), sp.Rational(1, 2), sp.Integer(1)]
    lx, ly = lagrange(x, nodes), lagrange(y, nodes)
    trace = 0
    for q in ly:
        for p in lx:
            trace += sp.integrate(sp.integrate((p * q) ** 2, (x, 0, 1)), (y, 0, 1))
    trace *= 2  # two displacement components

    h = sp.Symbol("h", positive=True)
    le = lagrange(x, [sp.Integer(0), h / 2, h])
    corner = sp.simplify(sp.integrate(le[0], (x, 0, h)) / h)
    middle = sp.simplify(sp.integrate(le[1], (x, 0, h)) / h)

    dp, r = sp.Integer(42524), sp.Rational(137, 100)
    tx, ty = dp * r / 2, dp * r

    rows = [("q9_mass_trace", trace), ("edge_corner", corner), ("edge_middle", middle),
            ("prestress_tx", tx), ("prestress_ty", ty)]
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "quadrature_oracle.csv"
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name", "exact", "value"])
        for name, v in rows:
            w.writerow([name, str(v), sp.N(v, 20)])
            print(name, v, sp.N(v, 20))


if __name__ == "__main__":
    main()
