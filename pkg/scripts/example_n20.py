#!/usr/bin/env python3
"""Desk-scale example: n = 20 partitions, m = 30 electrodes.

Runs the noiseless reconstruction of a seeded coefficient, then the noise
sweep delta = 1e-1 ... 1e-10, 0.  Writes reconstruct.json and noise_sweep.csv.
"""

import os

from _common import execute, parser

if __name__ == "__main__":
    p = parser(__doc__.splitlines()[0], "out/example_n20")
    p.add_argument("--no-bound", action="store_true",
                   help="skip the C = n - 1 criterion (a few minutes at n = 20)")
    args = p.parse_args()
    base = {"n": 20, "m": 30}
    execute("reconstruct", base, args)
    args.out = os.path.join(args.out, "noise")
    execute("noise-sweep", {**base, "with_bound": not args.no_bound}, args)
