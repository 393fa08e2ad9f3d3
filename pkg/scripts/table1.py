#!/usr/bin/env python3
"""Placement family scaling table: spectral range and level count vs N.

Conventional columns use each family's customary units; enum columns
re-derive both numbers by brute force over the protected domain.

Usage: python3 scripts/table1.py [N ...]   (default: 4 6 8 10 12 14 16)
"""

import sys

from dfs_sense.placement import table_rows


def main(argv):
    sizes = tuple(int(a) for a in argv) or (4, 6, 8, 10, 12, 14, 16)
    print(f"{'family':<12} {'N':>3} {'range':>12} {'levels':>8} "
          f"{'enum_range':>12} {'enum_levels':>12} {'gap':>10}")
    for r in table_rows(sizes):
        print(f"{r['family']:<12} {r['N']:>3} {float(r['range']):>12.6f} "
              f"{r['levels']:>8} {float(r['enum_range']):>12.6f} "
              f"{r['enum_levels']:>12} {float(r['gap']):>10.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
