#!/usr/bin/env python3
"""Stability constants for C = 1 and C = n - 1 at fixed n as electrodes are added.

Writes sweep_m.csv with one row per electrode count.
"""

from _common import execute, parser

if __name__ == "__main__":
    p = parser(__doc__.splitlines()[0], "out/lambda_vs_m")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--m-min", type=int, default=4)
    p.add_argument("--m-max", type=int, default=24)
    args = p.parse_args()
    execute("sweep-m", {"n": args.n, "m_values": list(range(args.m_min, args.m_max + 1))}, args)
