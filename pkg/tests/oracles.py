"""Quadratic-time brute-force reimplementations used as independent oracles.

Plain-Python loops only; nothing here reuses the library's algorithms.  The
published tolerance contract is shared (DELTA_EQ for equality, CLUSTER_TOL for
derived-value dedup) but every computation path is independent.
"""

import cmath
import math

DELTA_EQ = 1e-9
CLUSTER_TOL = 1e-7


def brute_min_gap(points):
    n = len(points)
    best = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            d = math.dist(points[i], points[j])
            if d < best:
                best = d
    return best


def brute_difference_set(points, cutoff):
    """All pairwise differences with norm <= cutoff (plus 0, both signs),
    merged by single-linkage at CLUSTER_TOL; returns sorted cluster means.

    Single-linkage on lexicographically sorted values reduces to merging
    neighbours: two values within CLUSTER_TOL of each other are also within
    it along the sort axis, so scanning a sorted window finds every link.
    """
    raw = [tuple(0.0 for _ in points[0])]
    n = len(points)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            v = tuple(a - b for a, b in zip(points[i], points[j]))
            if math.dist(v, [0.0] * len(v)) <= cutoff + DELTA_EQ:
                raw.append(v)
    raw.sort()
    clusters: list[list[tuple]] = [[raw[0]]]
    for v in raw[1:]:
        linked = False
        for c in reversed(clusters):
            if v[0] - c[-1][0] > CLUSTER_TOL:
                break
            if any(math.dist(v, w) <= CLUSTER_TOL for w in c):
                c.append(v)
                linked = True
                break
        if not linked:
            clusters.append([v])
    reps = [
        tuple(sum(w[d] for w in c) / len(c) for d in range(len(c[0])))
        for c in clusters
    ]
    return sorted(reps)


def brute_patch(points, anchor, radius):
    rel = []
    for q in points:
        if math.dist(q, anchor) <= radius + DELTA_EQ:
            rel.append(tuple(a - b for a, b in zip(q, anchor)))
    return sorted(rel)


def brute_patch_census(points, window_lo, window_hi, radius):
    """Partition of interior anchors by pairwise patch comparison; returns a
    list of anchor-index lists."""

    def margin(q):
        return min(
            min(a - l for a, l in zip(q, window_lo)),
            min(h - a for a, h in zip(q, window_hi)),
        )

    def patches_equal(pa, pb):
        if len(pa) != len(pb):
            return False
        return all(
            all(abs(x - y) <= DELTA_EQ for x, y in zip(u, v))
            for u, v in zip(pa, pb)
        )

    anchors = [i for i, q in enumerate(points) if margin(q) >= radius - DELTA_EQ]
    classes: list[tuple[list, list[int]]] = []
    for i in anchors:
        patch = brute_patch(points, points[i], radius)
        for rep, members in classes:
            if patches_equal(rep, patch):
                members.append(i)
                break
        else:
            classes.append((patch, [i]))
    return [members for _, members in classes]


def brute_amplitude(points, k):
    total = 0j
    for q in points:
        phase = sum(ki * qi for ki, qi in zip(k, q))
        total += cmath.exp(-2j * cmath.pi * phase)
    return total / len(points)


def brute_covering_lower(points, window_lo, window_hi, step):
    """Grid maximum of min(dist to pattern, margin), dimension 1 or 2."""

    def margin(q):
        return min(
            min(a - l for a, l in zip(q, window_lo)),
            min(h - a for a, h in zip(q, window_hi)),
        )

    axes = []
    for lo, hi in zip(window_lo, window_hi):
        m = int((hi - lo) / step + 0.5)
        axes.append([lo + i * step for i in range(m + 1)])
    if len(axes) == 1:
        grid = [(v,) for v in axes[0]]
    else:
        grid = [(u, v) for u in axes[0] for v in axes[1]]
    best = 0.0
    for q in grid:
        d = min(math.dist(q, p) for p in points)
        best = max(best, min(d, margin(q)))
    return best


def brute_circular_diameter(turns):
    """Smallest arc (radians) containing the angles 2*pi*t for t in turns."""
    if len(turns) <= 1:
        return 0.0
    t = sorted(v % 1.0 for v in turns)
    gaps = [b - a for a, b in zip(t, t[1:])]
    gaps.append(t[0] + 1.0 - t[-1])
    return 2.0 * math.pi * (1.0 - max(gaps))
