#!/usr/bin/env python3
"""Stationary LF and HF disturbance scenarios for all controllers."""

import argparse

from fdsc.benchmark import preset_config, run_scenario


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out")
    parser.add_argument("--scenario", choices=["lf", "hf", "both"], default="both")
    args = parser.parse_args()
    names = ["lf", "hf"] if args.scenario == "both" else [args.scenario]
    for name in names:
        bundle = run_scenario(preset_config(name), f"{args.out}/{name}")
        print(f"{name} scenario:")
        for controller, energy, ratio, switches, _ in bundle["metrics"]:
            print(f"  {controller:10s} energy={energy:12.4f} ratio={ratio:10.6f} "
                  f"switches={switches}")


if __name__ == "__main__":
    main()
