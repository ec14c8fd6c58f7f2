#!/usr/bin/env python3
"""Closed-loop singular-value sweeps for all four passive controllers."""

import argparse

from fdsc.benchmark import preset_config, run_scenario


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fig2_gains")
    args = parser.parse_args()
    bundle = run_scenario(preset_config("fig2-gains"), args.out)
    for name, path in sorted(bundle["sweeps"].items()):
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
