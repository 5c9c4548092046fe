#!/usr/bin/env python3
"""Plot the CSV outputs of the other scripts (needs matplotlib: pip install .[plots])."""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def read(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def num(rows, key):
    return np.array([float(r[key]) if r[key] else np.nan for r in rows])


def landscape(src, dst):
    rows = read(src / "landscape.csv")
    g1, g2 = num(rows, "gamma1"), num(rows, "gamma2")
    k = int(round(np.sqrt(len(rows))))
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, key, title in zip(axes, ("lsq_error", "sdp_error"), ("least squares", "SDP")):
        err = np.log10(np.maximum(num(rows, key), 1e-16)).reshape(k, k)
        im = ax.pcolormesh(g2.reshape(k, k), g1.reshape(k, k), err, shading="nearest")
        ax.set(title=f"{title}: log10 error", xlabel="gamma2", ylabel="gamma1")
        fig.colorbar(im, ax=ax)
    fig.savefig(dst / "landscape.png", dpi=120, bbox_inches="tight")


def sweep_n(src, dst):
    rows = read(src / "sweep_n.csv")
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(10, 4))
    for C_label, sel in (("C=1", lambda r: float(r["C"]) == 1.0),
                         ("C=n-1", lambda r: float(r["C"]) == float(r["n"]) - 1)):
        part = [r for r in rows if sel(r) and r["found"] == "1"]
        n = num(part, "n")
        a1.plot(n, num(part, "m_min"), "o-", label=C_label)
        a2.semilogy(n, num(part, "lambda_m_min"), "o-", label=f"{C_label}, minimal m")
        a2.semilogy(n, num(part, "lambda_m_extra"), "o--", label=f"{C_label}, five extra")
    a1.set(xlabel="n", ylabel="minimal m")
    a2.set(xlabel="n", ylabel="lambda")
    a1.legend()
    a2.legend()
    fig.savefig(dst / "sweep_n.png", dpi=120, bbox_inches="tight")


def sweep_m(src, dst):
    rows = read(src / "sweep_m.csv")
    m = num(rows, "m")
    fig, ax = plt.subplots(figsize=(5, 4))
    for key in ("lambda_C1", "lambda_Cn1"):
        lam = num(rows, key)
        ax.semilogy(m[lam > 0], lam[lam > 0], "o-", label=key)
    ax.set(xlabel="m", ylabel="lambda")
    ax.legend()
    fig.savefig(dst / "sweep_m.png", dpi=120, bbox_inches="tight")


def noise(src, dst):
    rows = [r for r in read(src / "noise_sweep.csv") if float(r["delta"]) > 0]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(num(rows, "delta"), num(rows, "error_inf"), "o-")
    ax.set(xlabel="delta", ylabel="max error")
    fig.savefig(dst / "noise_sweep.png", dpi=120, bbox_inches="tight")


def admissible(src, dst):
    rows = read(src / "admissible.csv")
    deltas = sorted({float(r["delta"]) for r in rows})
    fig, axes = plt.subplots(1, len(deltas), figsize=(4 * len(deltas), 4), squeeze=False)
    for ax, d in zip(axes[0], deltas):
        part = [r for r in rows if float(r["delta"]) == d]
        ok = np.array([r["admissible"] == "1" for r in part])
        ax.scatter(num(part, "gamma1")[ok], num(part, "gamma2")[ok], s=4)
        ax.set(title=f"delta={d:g}", xlabel="gamma1", ylabel="gamma2", xlim=(1, 3), ylim=(1, 3))
    fig.savefig(dst / "admissible.png", dpi=120, bbox_inches="tight")


PLOTS = {"landscape.csv": landscape, "sweep_n.csv": sweep_n, "sweep_m.csv": sweep_m,
         "noise_sweep.csv": noise, "admissible.csv": admissible}

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("dirs", nargs="+", type=Path, help="output directories of the experiment scripts")
    args = p.parse_args()
    for d in args.dirs:
        for name, fn in PLOTS.items():
            if (d / name).exists():
                fn(d, d)
                print(f"wrote {d / name.replace('.csv', '.png')}")
