#!/usr/bin/env python3
"""Mixed-spectrum (rho_p) and inserted-LF (rho_t) scenario sweeps."""

import argparse

from fdsc.benchmark import preset_config, run_scenario


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out")
    parser.add_argument("--sweep", choices=["mixed-sweep", "inserted-lf", "both"],
                        default="both")
    args = parser.parse_args()
    names = ["mixed-sweep", "inserted-lf"] if args.sweep == "both" else [args.sweep]
    for name in names:
        bundle = run_scenario(preset_config(name), f"{args.out}/{name}")
        print(f"{name}: wrote {bundle['out_dir']}/sweep.csv")


if __name__ == "__main__":
    main()
