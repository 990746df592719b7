#!/usr/bin/env python3
"""Generate nonuniform Delaunay meshes of (x0, x1) x (0, 1) in idpmesh format.

Points start on a uniform grid; every point at least two rows/columns away
from the boundary is jittered randomly, then the set is triangulated. The two
outermost layers stay regular so that boundary triangles have no obtuse angle
facing the boundary, which keeps the off-diagonal stiffness entries
non-positive across the periodic seam y = 0 ~ y = 1. Nodes on y = 0 and y = 1
are written as periodic pairs.

Usage: make_delaunay.py NX NY OUTPUT [--seed S] [--jitter J] [--x0 A] [--x1 B]
"""

import argparse

import numpy as np
from scipy.spatial import Delaunay


def build(nx, ny, x0, x1, jitter, seed):
    rng = np.random.default_rng(seed)
    hx = (x1 - x0) / nx
    hy = 1.0 / ny
    ix, iy = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="xy")
    ix = ix.ravel()
    iy = iy.ravel()
    pts = np.column_stack([x0 + ix * hx, iy * hy])
    inner = (ix >= 2) & (ix <= nx - 2) & (iy >= 2) & (iy <= ny - 2)
    pts[inner, 0] += rng.uniform(-jitter, jitter, inner.sum()) * hx
    pts[inner, 1] += rng.uniform(-jitter, jitter, inner.sum()) * hy
    tri = Delaunay(pts)
    cells = tri.simplices.copy()
    # Orient counterclockwise.
    a, b, c = pts[cells[:, 0]], pts[cells[:, 1]], pts[cells[:, 2]]
    det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    cells[det < 0] = cells[det < 0][:, [0, 2, 1]]
    det = np.abs(det)
    keep = det > 1e-12 * hx * hy
    cells = cells[keep]
    bottom = np.where(iy == 0)[0]
    top = np.where(iy == ny)[0]
    pairs = list(zip(bottom[np.argsort(ix[bottom])], top[np.argsort(ix[top])]))
    return pts, cells, pairs


def max_offdiag_stiffness(pts, cells, pairs):
    """Largest off-diagonal P1 stiffness entry after periodic identification."""
    rep = np.arange(len(pts))
    for b, t in pairs:
        rep[t] = b
    entries = {}
    for cell in cells:
        p = pts[cell]
        J = np.array([p[1] - p[0], p[2] - p[0]]).T
        area = 0.5 * abs(np.linalg.det(J))
        G = np.linalg.inv(J).T @ np.array([[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
        K = area * G.T @ G
        for a in range(3):
            for c in range(3):
                i, j = rep[cell[a]], rep[cell[c]]
                if i != j:
                    entries[(i, j)] = entries.get((i, j), 0.0) + K[a, c]
    return max(entries.values())


def write(path, pts, cells, pairs):
    with open(path, "w") as out:
        out.write(f"idpmesh 2 {len(pts)} {len(cells)}\n")
        for x, y in pts:
            out.write(f"{x:.17g} {y:.17g}\n")
        for c in cells:
            out.write(f"{c[0]} {c[1]} {c[2]}\n")
        out.write("boundary\n")
        for b, t in pairs:
            out.write(f"{b} periodic {t}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("nx", type=int)
    ap.add_argument("ny", type=int)
    ap.add_argument("output")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--jitter", type=float, default=0.25)
    ap.add_argument("--x0", type=float, default=-0.5)
    ap.add_argument("--x1", type=float, default=1.0)
    args = ap.parse_args()
    pts, cells, pairs = build(args.nx, args.ny, args.x0, args.x1, args.jitter, args.seed)
    beta = max_offdiag_stiffness(pts, cells, pairs)
    write(args.output, pts, cells, pairs)
    print(f"{args.output}: {len(pts)} nodes, {len(cells)} cells, max off-diagonal stiffness {beta:.3e}")


if __name__ == "__main__":
    main()
