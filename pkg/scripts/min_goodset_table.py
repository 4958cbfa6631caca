#!/usr/bin/env python
"""Smallest epsilon-good unit multisets on small cyclic groups next to the Azuma sizes.

    python scripts/min_goodset_table.py --epsilon 0.1 --max-t 6
"""
from __future__ import annotations

import argparse

from qhash.errors import CapacityError
from qhash.goodset import exhaustive_min_goodset, required_size, verify_good
from qhash.groups import GroupSpec


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--max-t", type=int, default=6)
    p.add_argument("--groups", default="3,4,5,7,8,9,11,13,3x5,4x3,2x2x3")
    args = p.parse_args()

    print(f"eps={args.epsilon}")
    print(f"{'group':>8} {'|G|':>5} {'t_min':>6} {'paper':>6} {'union':>6}  delta  key")
    for text in args.groups.split(","):
        spec = GroupSpec.parse(text)
        paper = required_size(args.epsilon, spec.order)
        union = required_size(args.epsilon, spec.order, union_bound=True)
        try:
            found = exhaustive_min_goodset(spec, args.epsilon, args.max_t)
        except CapacityError as exc:
            print(f"{text:>8} {spec.order:>5} {'-':>6} {paper:>6} {union:>6}  skipped ({exc})")
            continue
        if found is None:
            print(f"{text:>8} {spec.order:>5} {'none':>6} {paper:>6} {union:>6}")
            continue
        t, key = found
        delta = verify_good(spec, key, args.epsilon).delta
        keytext = ",".join(str(k) for k in key)
        print(f"{text:>8} {spec.order:>5} {t:>6} {paper:>6} {union:>6}  {delta:.4f} {keytext}")


if __name__ == "__main__":
    main()
