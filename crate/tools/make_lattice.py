#!/usr/bin/env python3
"""Search for an embedded rank-1 lattice generating vector.

Greedy component-by-component search over a random subset of odd candidates,
minimising the sum over embedded sizes 2^k (k_min..k_max) of the log
shift-averaged worst-case error in the unanchored Sobolev space with product
weights. Output is the plain text format read by `GeneratingVector::load`.

    python3 tools/make_lattice.py --weights const:0.05 --dim 64 --out v.txt
"""
import argparse
import math

import numpy as np


def weight(spec, j):
    kind, _, arg = spec.partition(":")
    if kind == "const":
        return float(arg)
    if kind == "invsq":
        return 1.0 / (j * j)
    raise SystemExit(f"unknown weight spec {spec}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--weights", default="const:0.05")
    ap.add_argument("--dim", type=int, default=64)
    ap.add_argument("--log2n", type=int, default=20)
    ap.add_argument("--kmin", type=int, default=10)
    ap.add_argument("--candidates", type=int, default=128)
    ap.add_argument("--seed", type=int, default=20240101)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    n = 1 << args.log2n
    rng = np.random.default_rng(args.seed)
    x = np.arange(n, dtype=np.float64) / n
    omega = 2.0 * math.pi**2 * (x * x - x + 1.0 / 6.0)
    idx = np.arange(n, dtype=np.int64)
    strides = [1 << (args.log2n - k) for k in range(args.kmin, args.log2n + 1)]

    prod = np.ones(n)
    z = []
    for j in range(1, args.dim + 1):
        g = weight(args.weights, j)
        if j == 1:
            cands = [1]
        else:
            cands = 2 * rng.choice(n // 4, size=args.candidates, replace=False) + 1
        best = None
        for c in cands:
            q = prod * (1.0 + g * omega[(idx * int(c)) & (n - 1)])
            score = sum(math.log(q[::s].mean() - 1.0) for s in strides)
            if best is None or score < best[0]:
                best = (score, int(c), q)
        z.append(best[1])
        prod = best[2]
        print(f"dim {j}: z={best[1]} score={best[0]:.4f}", flush=True)

    with open(args.out, "w") as fh:
        fh.write(f"# embedded rank-1 lattice, weights {args.weights}, ")
        fh.write(f"sizes 2^{args.kmin}..2^{args.log2n}, {args.candidates} random odd candidates per component, seed {args.seed}\n")
        fh.write(f"{n}\n")
        for c in z:
            fh.write(f"{c}\n")


if __name__ == "__main__":
    main()
