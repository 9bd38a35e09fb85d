#!/usr/bin/env python3
"""Tabulate the sup-norm and L^t embedding constants across integrability
exponents s for one (K, N, p, v) geometry.

The sup-norm constant c1 is finite exactly for s > N/p; the table brackets
that threshold with a fine geometric ladder so the flip is visible in the
output.  Divergent entries print as inf.

    python3 scripts/embedding_table.py --K 2 --N 3 --p 2 --v 0.5 --t 2,4
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from talenti_kit.sobolev_embed import embedding_constants, is_divergent


def _cell(x) -> str:
    if x is None:
        return ""
    if is_divergent(x):
        return "inf"
    return f"{float(x):.17g}"


def ladder(crit: float, span: float, count: int) -> np.ndarray:
    """Geometric s-grid from crit/span to crit*span, plus the plain
    threshold itself."""
    grid = crit * np.geomspace(1.0 / span, span, count)
    return np.unique(np.append(grid, crit))


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--K", type=float, default=2.0)
    ap.add_argument("--N", type=float, default=3.0)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--v", type=float, default=0.5)
    ap.add_argument("--span", type=float, default=4.0,
                    help="s ranges over [N/p / span, N/p * span]")
    ap.add_argument("--count", type=int, default=13)
    ap.add_argument("--t", default="",
                    help="comma-separated L^t exponents for c2 (optional)")
    ap.add_argument("--out", default="out/embedding_table.csv")
    args = ap.parse_args(argv)

    if args.span <= 1.0 or args.count < 2:
        ap.error("--span must exceed 1 and --count must be at least 2")
    ts = [float(tok) for tok in args.t.split(",") if tok.strip()] or [None]

    crit = args.N / args.p
    rows = []
    for s in ladder(crit, args.span, args.count):
        for t in ts:
            row = embedding_constants(args.K, args.N, args.v, args.p,
                                      float(s), t)
            rows.append((s, t, row.c1, row.c2))

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = ["s,t,c1,c2"]
    lines += [",".join(_cell(x) for x in row) for row in rows]
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")

    finite = [r for r in rows if not is_divergent(r[2])]
    print(f"wrote {len(rows)} rows to {out} (threshold s = N/p = {crit:g})")
    if finite:
        s_min = min(r[0] for r in finite)
        print(f"  c1 finite for s >= {s_min:.6g}: "
              f"{_cell(min(r[2] for r in finite))} .. "
              f"{_cell(max(r[2] for r in finite))}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
