#!/usr/bin/env python3
"""Render CSVs emitted by the taperdyn CLI (log-log error sweeps, spectra,
densities, forecast skill).  Convenience only; not part of the package.

Usage: python scripts/plot_results.py <outdir> [--save prefix]
"""
import argparse
import sys
from pathlib import Path

import numpy as np

try:
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib is required for plotting")


def load(path):
    return np.loadtxt(path, delimiter=",", skiprows=1)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--save", default=None, help="save figures with this prefix")
    args = ap.parse_args()
    made = []

    sweep = args.outdir / "average_sweep.csv"
    if sweep.exists():
        data = np.atleast_2d(load(sweep))
        fig, ax = plt.subplots()
        ax.loglog(data[:, 0], data[:, 1], "o-", color="tab:blue", label="unweighted")
        ax.loglog(data[:, 0], np.maximum(data[:, 2], 1e-17), "o-",
                  color="tab:red", label="weighted")
        ax.set_xlabel("N")
        ax.set_ylabel("absolute error vs benchmark")
        ax.legend()
        made.append(("average_sweep", fig))

    dmd_sweep = args.outdir / "dmd_sweep.csv"
    if dmd_sweep.exists():
        data = np.atleast_2d(load(dmd_sweep))
        fig, ax = plt.subplots()
        ax.loglog(data[:, 0], data[:, 1], "-", color="tab:blue", label="matrix, unweighted")
        ax.loglog(data[:, 0], np.maximum(data[:, 2], 1e-17), "-",
                  color="tab:red", label="matrix, weighted")
        ax.set_xlabel("N")
        ax.set_ylabel("relative error vs benchmark")
        ax.legend()
        made.append(("dmd_sweep", fig))

    for name in ("dmd_eigs", "edmd_eigs", "mpedmd_eigs"):
        path = args.outdir / f"{name}.csv"
        if path.exists():
            data = np.atleast_2d(load(path))
            fig, ax = plt.subplots()
            circle = np.exp(1j * np.linspace(0, 2 * np.pi, 256))
            ax.plot(circle.real, circle.imag, ":", color="gray")
            ax.plot(data[:, 0], data[:, 1], "o")
            ax.set_aspect("equal")
            ax.set_title(name)
            made.append((name, fig))

    dens = args.outdir / "density.csv"
    if dens.exists():
        data = np.atleast_2d(load(dens))
        fig, ax = plt.subplots()
        ax.plot(data[:, 0], data[:, 1])
        ax.set_xlabel("theta")
        ax.set_ylabel("density")
        made.append(("density", fig))

    skill = args.outdir / "forecast_skill.csv"
    if skill.exists():
        data = np.atleast_2d(load(skill))
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
        ax1.plot(data[:, 0], data[:, 1], "o-", color="tab:blue", label="unweighted")
        ax1.plot(data[:, 0], data[:, 2], "o-", color="tab:red", label="weighted")
        ax1.axhline(data[0, 5], ls=":", color="gray", label="climatology")
        ax1.set_xlabel("lead (months)")
        ax1.set_ylabel("RMSE")
        ax1.legend()
        ax2.plot(data[:, 0], data[:, 3], "o-", color="tab:blue")
        ax2.plot(data[:, 0], data[:, 4], "o-", color="tab:red")
        ax2.axhline(0.0, ls=":", color="gray")
        ax2.set_xlabel("lead (months)")
        ax2.set_ylabel("correlation")
        fig.tight_layout()
        made.append(("forecast_skill", fig))

    if not made:
        sys.exit(f"no known CSV outputs found in {args.outdir}")
    if args.save:
        for name, fig in made:
            fig.savefig(f"{args.save}_{name}.png", dpi=150)
        print(f"saved {len(made)} figure(s)")
    else:
        plt.show()


if __name__ == "__main__":
    main()
