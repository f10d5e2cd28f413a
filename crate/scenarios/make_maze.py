"""Regenerates maze.json: a 5x5 perfect maze on [0, 10]^2.

Walls are 0.1 thick and centred on the cell lines. Touching wall pieces are
merged into one rectilinear polygon per connected wall component, so the
obstacles stay pairwise disjoint.
"""
import json
import random
import sys

CELLS, SIZE, HALF, PIX = 5, 2.0, 0.05, 0.05
N = round(CELLS * SIZE / PIX)


def perfect_maze(seed):
    rng = random.Random(seed)
    seen, stack, open_edges = {(0, 0)}, [(0, 0)], set()
    while stack:
        c = stack[-1]
        nbrs = [(c[0] + dx, c[1] + dy) for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))]
        nbrs = [n for n in nbrs if 0 <= n[0] < CELLS and 0 <= n[1] < CELLS and n not in seen]
        if not nbrs:
            stack.pop()
            continue
        n = rng.choice(nbrs)
        open_edges.add(frozenset((c, n)))
        seen.add(n)
        stack.append(n)
    return open_edges


def wall_rects(open_edges):
    rects = []
    for i in range(CELLS):
        for j in range(CELLS):
            if i + 1 < CELLS and frozenset(((i, j), (i + 1, j))) not in open_edges:
                x = (i + 1) * SIZE
                rects.append((x - HALF, j * SIZE - HALF, x + HALF, (j + 1) * SIZE + HALF))
            if j + 1 < CELLS and frozenset(((i, j), (i, j + 1))) not in open_edges:
                y = (j + 1) * SIZE
                rects.append((i * SIZE - HALF, y - HALF, (i + 1) * SIZE + HALF, y + HALF))
    return rects


def raster(rects):
    grid = [[False] * N for _ in range(N)]
    for x0, y0, x1, y1 in rects:
        for i in range(max(0, round(x0 / PIX)), min(N, round(x1 / PIX))):
            for j in range(max(0, round(y0 / PIX)), min(N, round(y1 / PIX))):
                grid[i][j] = True
    return grid


def components(grid):
    label, comps = {}, []
    for i in range(N):
        for j in range(N):
            if grid[i][j] and (i, j) not in label:
                comp, todo = [], [(i, j)]
                label[(i, j)] = len(comps)
                while todo:
                    a, b = todo.pop()
                    comp.append((a, b))
                    for c in ((a + 1, b), (a - 1, b), (a, b + 1), (a, b - 1)):
                        if 0 <= c[0] < N and 0 <= c[1] < N and grid[c[0]][c[1]] and c not in label:
                            label[c] = len(comps)
                            todo.append(c)
                comps.append(set(comp))
    return comps


def outline(cells):
    # directed boundary edges with the component on the left (counterclockwise)
    nxt = {}
    for i, j in cells:
        if (i, j - 1) not in cells:
            nxt[(i, j)] = (i + 1, j)
        if (i + 1, j) not in cells:
            nxt[(i + 1, j)] = (i + 1, j + 1)
        if (i, j + 1) not in cells:
            nxt[(i + 1, j + 1)] = (i, j + 1)
        if (i - 1, j) not in cells:
            nxt[(i, j + 1)] = (i, j)
    start = min(nxt)
    loop, p = [start], nxt[start]
    while p != start:
        loop.append(p)
        p = nxt[p]
    if len(loop) != len(nxt):
        raise SystemExit("wall component is not simply connected")
    corners = []
    for k, p in enumerate(loop):
        a, b = loop[k - 1], loop[(k + 1) % len(loop)]
        if (p[0] - a[0], p[1] - a[1]) != (b[0] - p[0], b[1] - p[1]):
            corners.append([round(p[0] * PIX, 6), round(p[1] * PIX, 6)])
    return corners


def main():
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 12
    grid = raster(wall_rects(perfect_maze(seed)))
    obstacles = [outline(c) for c in components(grid)]
    scenario = {
        "bounds": [0.0, 0.0, 10.0, 10.0],
        "obstacles": obstacles,
        "x_init": [1.0, 1.0, 0.0],
        "goal": {"center": [9.0, 9.0], "radius": 0.8},
        "R": 0.05,
        "collision_step": 0.005,
        "seed": 0,
    }
    lines = [f' "{k}": {json.dumps(v)}' for k, v in scenario.items() if k != "obstacles"]
    obs = ",\n".join("  " + json.dumps(o) for o in obstacles)
    lines.insert(1, ' "obstacles": [\n' + obs + "\n ]")
    print("{\n" + ",\n".join(lines) + "\n}")


if __name__ == "__main__":
    main()
