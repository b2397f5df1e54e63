"""Build pickup-and-delivery files from 200-customer VRPTW (Homberger) files.

Customers are first routed with a time-window insertion heuristic; then the
customers of each route are paired at random, the earlier stop becoming the
pickup.  Pairing inside a feasible route keeps every route feasible, so the
resulting instance is solvable by construction.  Output is Li & Lim format.

usage: python tools/make_surrogates.py WHEEL_OR_DIR OUT_DIR
"""

from __future__ import annotations

import argparse
import math
import random
import zipfile
from pathlib import Path

from gatx.bench import SCALE, LiLimInstance, LiLimRow, format_li_lim, parse_li_lim

WANTED = {
    "C1_2_2": "LC1_2_2", "C1_2_4": "LC1_2_4", "C1_2_6": "LC1_2_6", "C1_2_7": "LC1_2_7",
    "C1_2_8": "LC1_2_8", "C1_2_10": "LC1_2_10", "R1_2_3": "LR1_2_3", "R1_2_5": "LR1_2_5",
    "R1_2_8": "LR1_2_8", "R1_2_9": "LR1_2_9", "R1_2_10": "LR1_2_10",
}


def read_solomon(text):
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    k = next(i for i, p in enumerate(lines) if p[0] == "NUMBER")
    vehicles, cap = int(lines[k + 1][0]), int(lines[k + 1][1])
    rows = [tuple(int(float(v)) for v in p) for p in lines if len(p) == 7 and p[0].isdigit()]
    return vehicles, cap, rows


def route_customers(cap, rows):
    """Cheapest feasible insertion, customers taken by due date."""
    pts = [(r[1], r[2]) for r in rows]

    def d(a, b):
        return round(math.hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1]) * SCALE)

    def feasible(route):
        t, load = rows[0][4] * SCALE, 0
        prev = 0
        for c in route + [0]:
            t = max(t + rows[prev][6] * SCALE + d(prev, c), rows[c][4] * SCALE)
            if t > rows[c][5] * SCALE:
                return None
            load += rows[c][3]
            prev = c
        if load > cap:
            return None
        return sum(d(a, b) for a, b in zip([0] + route, route + [0]))

    routes = []
    for c in sorted(range(1, len(rows)), key=lambda c: (rows[c][5], c)):
        best = None
        for ri, r in enumerate(routes):
            base = feasible(r)
            for pos in range(len(r) + 1):
                cand = r[:pos] + [c] + r[pos:]
                cost = feasible(cand)
                if cost is not None and (best is None or cost - base < best[0]):
                    best = (cost - base, ri, cand)
        if best is None:
            if feasible([c]) is None:
                continue
            routes.append([c])
        else:
            routes[best[1]] = best[2]
    return routes, d


def build(name, text, seed):
    vehicles, cap, rows = read_solomon(text)
    routes, d = route_customers(cap, rows)
    rng = random.Random(seed)
    pairs = []
    for r in routes:
        pos = list(range(len(r)))
        rng.shuffle(pos)
        for a, b in zip(pos[::2], pos[1::2]):
            p, q = sorted((a, b))
            pairs.append((r[p], r[q]))
    # keep only orders that the depot can serve on their own
    kept = []
    for p, q in pairs:
        t = max(d(0, p), rows[p][4] * SCALE)
        ok = t <= rows[p][5] * SCALE
        t = max(t + rows[p][6] * SCALE + d(p, q), rows[q][4] * SCALE)
        ok = ok and t <= rows[q][5] * SCALE
        ok = ok and t + rows[q][6] * SCALE + d(q, 0) <= rows[0][5] * SCALE
        if ok:
            kept.append((p, q))
    used = sorted({0} | {c for pq in kept for c in pq})
    new = {old: k for k, old in enumerate(used)}
    partner = {}
    for p, q in kept:
        partner[p] = (0, new[q], rows[p][3])
        partner[q] = (new[p], 0, -rows[p][3])
    out = []
    for old in used:
        r = rows[old]
        pref, dref, dem = partner.get(old, (0, 0, 0))
        out.append(LiLimRow(new[old], r[1], r[2], dem, r[4], r[5], r[6], pref, dref))
    inst = LiLimInstance(vehicles, cap, 1.0, tuple(out), name)
    text = format_li_lim(inst)
    parse_li_lim(text)
    return text, len(routes), len(kept)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source", help="VRPSolverEasy wheel or a directory of Homberger files")
    ap.add_argument("out", type=Path)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    src = Path(args.source)
    if src.is_dir():
        read = lambda stem: (src / f"{stem}.txt").read_text()
    else:
        zf = zipfile.ZipFile(src)
        names = {Path(n).stem: n for n in zf.namelist() if "/CVRPTW/" in n}
        read = lambda stem: zf.read(names[stem]).decode()
    args.out.mkdir(parents=True, exist_ok=True)
    for stem, name in sorted(WANTED.items()):
        text, n_routes, n_orders = build(name, read(stem), args.seed)
        (args.out / f"{name}.txt").write_text(text)
        print(f"{name}: {n_routes} seed routes, {n_orders} orders")


if __name__ == "__main__":
    main()
