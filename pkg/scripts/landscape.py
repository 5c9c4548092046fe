#!/usr/bin/env python3
"""Reconstruction error over a grid of true coefficients, SDP against least squares.

n = 2, m = 4, bounds [1, 3]; the least-squares baseline starts from (2, 2).
Writes landscape.csv / landscape.json.
"""

from _common import execute, parser

if __name__ == "__main__":
    p = parser(__doc__.splitlines()[0], "out/landscape")
    p.add_argument("--grid", type=int, default=21)
    p.add_argument("--m", type=int, default=4)
    args = p.parse_args()
    execute("landscape", {"n": 2, "m": args.m, "grid_resolution": args.grid}, args)
