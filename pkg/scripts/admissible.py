#!/usr/bin/env python3
"""Admissible set {gamma : F(gamma) <= Y + delta I} on a grid, without and with noise.

n = 2, true coefficient (2, 2).  Writes admissible.csv.
"""

from _common import execute, parser

if __name__ == "__main__":
    p = parser(__doc__.splitlines()[0], "out/admissible")
    p.add_argument("--grid", type=int, default=41)
    args = p.parse_args()
    execute("admissible", {"n": 2, "m": 4, "grid_resolution": args.grid,
                           "deltas": [0.0, 1e-4, 1e-3, 1e-2]}, args)
