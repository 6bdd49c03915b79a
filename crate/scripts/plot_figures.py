#!/usr/bin/env python3
"""Render the catron CSV outputs with matplotlib.

Usage:
    python3 scripts/plot_figures.py OUTDIR [--save DIR]

Reads whichever of these exist in OUTDIR and draws them:
  neg_log_wigner_{exact,wkb,potential,fock}.csv   -> -ln W heat maps
  vector_field.csv + fixed_points.csv
      + instanton_uphill.csv + separatrix_downhill.csv -> phase portrait
  rate_sweep.csv                                   -> ln rate vs detuning
"""

import argparse
import csv
import math
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def read_csv(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                continue
            rows.append(line.strip())
    header = rows[0].split(",")
    data = list(csv.reader(rows[1:]))
    return header, data


def grid_from_rows(data):
    xs = sorted({float(r[0]) for r in data})
    ps = sorted({float(r[1]) for r in data})
    z = np.full((len(xs), len(ps)), np.nan)
    xi = {v: i for i, v in enumerate(xs)}
    pj = {v: j for j, v in enumerate(ps)}
    for r in data:
        v = float(r[2]) if r[2] not in ("NaN", "nan", "") else math.nan
        z[xi[float(r[0])], pj[float(r[1])]] = v
    return np.array(xs), np.array(ps), z


def plot_neg_log_maps(outdir, savedir):
    sources = ["exact", "wkb", "potential", "fock"]
    present = [s for s in sources if os.path.exists(os.path.join(outdir, f"neg_log_wigner_{s}.csv"))]
    if not present:
        return
    fig, axes = plt.subplots(1, len(present), figsize=(5 * len(present), 4.4), squeeze=False)
    for ax, s in zip(axes[0], present):
        _, data = read_csv(os.path.join(outdir, f"neg_log_wigner_{s}.csv"))
        xs, ps, z = grid_from_rows(data)
        z = np.clip(z, 0.0, 30.0)
        im = ax.pcolormesh(xs, ps, z.T, shading="auto", cmap="viridis_r")
        ax.set_title(f"-ln W ({s})")
        ax.set_xlabel("x")
        ax.set_ylabel("p")
        ax.set_aspect("equal")
        fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(os.path.join(savedir, "neg_log_wigner.png"), dpi=150)
    print("wrote neg_log_wigner.png")


def plot_phase_portrait(outdir, savedir):
    vf = os.path.join(outdir, "vector_field.csv")
    if not os.path.exists(vf):
        return
    _, data = read_csv(vf)
    x, p, dx, dp = (np.array([float(r[k]) for r in data]) for k in range(4))
    fig, ax = plt.subplots(figsize=(6, 6))
    mag = np.hypot(dx, dp) + 1e-12
    ax.quiver(x, p, dx / mag, dp / mag, mag, cmap="Greys", width=0.003, alpha=0.8)
    path = os.path.join(outdir, "separatrix_downhill.csv")
    if os.path.exists(path):
        _, rows = read_csv(path)
        ax.plot([float(r[1]) for r in rows], [float(r[2]) for r in rows], "r-", lw=2, label="downhill")
    path = os.path.join(outdir, "instanton_uphill.csv")
    if os.path.exists(path):
        _, rows = read_csv(path)
        sq2 = math.sqrt(2.0)
        ax.plot(
            [sq2 * float(r[1]) for r in rows],
            [sq2 * float(r[2]) for r in rows],
            "b-",
            lw=2,
            label="uphill",
        )
    path = os.path.join(outdir, "fixed_points.csv")
    if os.path.exists(path):
        _, rows = read_csv(path)
        for r in rows:
            marker = "o" if float(r[2]) == 0.0 else "x"
            ax.plot(float(r[0]), float(r[1]), "k" + marker, ms=10)
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    ax.set_title("classical flow with saddle trajectories")
    ax.legend()
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(os.path.join(savedir, "phase_portrait.png"), dpi=150)
    print("wrote phase_portrait.png")


def plot_rates(outdir, savedir):
    path = os.path.join(outdir, "rate_sweep.csv")
    if not os.path.exists(path):
        return
    _, data = read_csv(path)
    curves = {}
    for r in data:
        curves.setdefault(float(r[0]), []).append((float(r[1]), float(r[3])))
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for g, pts in sorted(curves.items()):
        pts.sort()
        ax.plot([d for d, _ in pts], [v for _, v in pts], label=f"G = {g:g}")
    ax.set_xlabel("Delta")
    ax.set_ylabel("ln rate")
    ax.set_title("switching-rate exponent vs detuning")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(savedir, "rate_sweep.png"), dpi=150)
    print("wrote rate_sweep.png")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir")
    ap.add_argument("--save", default=None, help="directory for the PNGs (default: OUTDIR)")
    args = ap.parse_args()
    savedir = args.save or args.outdir
    os.makedirs(savedir, exist_ok=True)
    plot_neg_log_maps(args.outdir, savedir)
    plot_phase_portrait(args.outdir, savedir)
    plot_rates(args.outdir, savedir)


if __name__ == "__main__":
    sys.exit(main())
