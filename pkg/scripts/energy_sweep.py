#!/usr/bin/env python3
"""Map average energy over the supply / monitoring-period grid.

Uses the bundled wake-rate table by default. Writes the full grid as CSV
and prints the per-period optimum. Short periods are dominated by service
energy, so the lowest-wake-rate supply wins; long periods are dominated by
monitoring power, which pushes the optimum to an interior supply point.
"""

import argparse

from wakesim.data import default_rates_fixture
from wakesim.energymodel import EnergyParams, RatesTable, sweep, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rates", default=None,
                    help="wake-rate CSV (vdd,vddr,p_wake_abn,p_wake_n); bundled table by default")
    ap.add_argument("--vdd", default=None,
                    help="comma-separated supply grid; table rows by default")
    ap.add_argument("--ts", default="2e-3,1e-2,1e-1,1.0",
                    help="comma-separated monitoring periods in seconds")
    ap.add_argument("--pi", type=float, default=0.01, help="abnormal prevalence")
    ap.add_argument("--out", default="sweep.csv")
    args = ap.parse_args()

    table = RatesTable.from_csv(args.rates or default_rates_fixture())
    vdds = [float(v) for v in args.vdd.split(",")] if args.vdd else table.vdds
    periods = [float(v) for v in args.ts.split(",")]
    result = sweep(EnergyParams(pi=args.pi), vdds, periods, table)

    print(f"{'t_s s':>8} {'vdd*':>5} {'e_avg J':>11} {'baseline J':>11} {'save':>7}")
    for t_s in periods:
        best = result.argmin(t_s)
        print(f"{t_s:>8g} {best.vdd:>5.2f} {best.e_avg:>11.4e} "
              f"{best.e_baseline:>11.4e} {best.e_baseline / best.e_avg:>6.2f}x")
    write_sweep_csv(args.out, result)
    print(f"full grid -> {args.out}")


if __name__ == "__main__":
    main()
