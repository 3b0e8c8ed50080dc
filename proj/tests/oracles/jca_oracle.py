#!/usr/bin/env python3
"""JCA equivalent-fluid values with the limp-frame density, evaluated in 40-digit
arithmetic. Writes tests/data/jca_golden.csv.

Convention e^{+i w t}. Parameters are the glass-wool set of the benchmark plus
the default ambient air.
"""
import csv
import pathlib

import mpmath as mp

mp.mp.dps = 40

AIR = dict(rho0=mp.mpf("1.213"), eta=mp.mpf("1.839e-5"), pr=mp.mpf("0.71"),
           gamma=mp.mpf("1.4"), p0=mp.mpf("101325"))
WOOL = dict(phi=mp.mpf("0.98"), sigma=mp.mpf("2e4"), alpha=mp.mpf("1.0"),
            lam=mp.mpf("1e-4"), lam_t=mp.mpf("2e-4"), rho1=mp.mpf("16"))
FREQS = ["50", "100", "250", "500", "1000", "2000"]


def jca(f, m=WOOL, a=AIR):
    w = 2 * mp.pi * mp.mpf(f)
    j = mp.mpc(0, 1)
    phi, sigma, alpha = m["phi"], m["sigma"], m["alpha"]
    rho0, eta = a["rho0"], a["eta"]

    # Johnson et al. dynamic tortuosity, written as a density.
    gv = mp.sqrt(1 + 4 * j * alpha**2 * eta * rho0 * w / (sigma**2 * m["lam"]**2 * phi**2))
    rho = alpha * rho0 * (1 + sigma * phi * gv / (j * w * rho0 * alpha))

    # Champoux-Allard bulk modulus.
    lt, pr, gamma, p0 = m["lam_t"], a["pr"], a["gamma"], a["p0"]
    gt = mp.sqrt(1 + j * rho0 * w * pr * lt**2 / (16 * eta))
    inner = 1 + 8 * eta / (j * lt**2 * pr * w * rho0) * gt
    K = gamma * p0 / (gamma - (gamma - 1) / inner)

    rho_eq, K_eq = rho / phi, K / phi
    rho_t = m["rho1"] + phi * rho0
    rho_limp = (rho_t * rho_eq - rho0**2) / (rho_t + rho_eq - 2 * rho0)
    c = mp.sqrt(K_eq / rho_limp)
    return rho, K, rho_limp, c


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "jca_golden.csv"
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["f", "re_rho_rigid", "im_rho_rigid", "re_K", "im_K",
                    "re_rho_eff", "im_rho_eff", "re_c_eff", "im_c_eff"])
        for f in FREQS:
            vals = jca(f)
            row = [f]
            for v in vals:
                row += [mp.nstr(v.real, 20), mp.nstr(v.imag, 20)]
            w.writerow(row)


if __name__ == "__main__":
    main()
