#!/usr/bin/env python3
"""Minimal electrode count and stability constant against the resolution n.

For each n the smallest m passing the criterion is found for C = 1
(uniqueness) and C = n - 1 (convex reformulation); lambda is also reported
with five extra electrodes.  Writes sweep_n.csv / sweep_n.json.
"""

from _common import execute, parser

if __name__ == "__main__":
    p = parser(__doc__.splitlines()[0], "out/certify_sweep")
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--m-max", type=int, default=40)
    args = p.parse_args()
    execute("sweep-n", {"n_values": list(range(2, args.n_max + 1)), "m_max": args.m_max,
                        "extra_electrodes": 5}, args)
