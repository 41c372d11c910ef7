"""Finite samples of point patterns and their local-geometry analyzers.

A pattern is a finite list of points in dimension 1 or 2 observed through an
axis-aligned window.  Every analyzer treats the window honestly: patches are
only taken around anchors whose ball fits inside the window, and radius-style
quantities (covering radius, repetitivity radius) come back as brackets
[lower, upper] at grid resolution, because a finite sample cannot certify an
exact supremum.

Coordinates are compared with the absolute tolerance DELTA_EQ.  Generated
patterns are algebraically exact (integers, Z[tau]), so the tolerance only has
to absorb floating-point noise, never model noise.  Derived value sets
(difference vectors, patch offsets) are grouped by single-linkage clustering
at CLUSTER_TOL instead of grid rounding: rounding at the tolerance itself may
split values that straddle a grid line, while in the supported patterns
genuinely distinct derived values stay several orders of magnitude apart.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

# Tolerance for point / patch equality (length units).
DELTA_EQ = 1e-9

# Single-linkage radius for deduplicating derived values.  Must dominate the
# worst accumulated float noise (ulp-scale) and stay far below the smallest
# true separation of distinct derived values (>= 0.1 in the shipped chains).
CLUSTER_TOL = 1e-7

# Minimal-gap floor for the difference set in meyer_check: anything below this
# is float dust, not exact discreteness.
MEYER_GAP_FLOOR = DELTA_EQ * 1e3


def worker_count() -> int:
    """Worker cap for grid-parallel loops, from APD_THREADS (default: all cores)."""
    raw = os.environ.get("APD_THREADS", "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"APD_THREADS must be an integer, got {raw!r}")
        if n < 1:
            raise ValueError("APD_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _as_points(points, dimension: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return pts.reshape(0, dimension)
    if pts.ndim == 1:
        if dimension != 1:
            raise ValueError("flat coordinate list only valid in dimension 1")
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[1] != dimension:
        raise ValueError(f"points must have shape (N, {dimension})")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    return pts


def _lex_order(pts: np.ndarray) -> np.ndarray:
    if pts.shape[1] == 1:
        return np.argsort(pts[:, 0], kind="stable")
    return np.lexsort((pts[:, 1], pts[:, 0]))


def _min_pairwise_distance(pts: np.ndarray) -> float:
    """Minimum distance over distinct pairs (N >= 2)."""
    if pts.shape[1] == 1:
        x = np.sort(pts[:, 0])
        return float(np.min(np.diff(x)))
    tree = cKDTree(pts)
    d, _ = tree.query(pts, k=2)
    return float(np.min(d[:, 1]))


def _cluster_representatives(pts: np.ndarray, tol: float) -> np.ndarray:
    """Single-linkage cluster representatives (cluster means), lex-sorted.

    Values within tol chain into one cluster; anything separated by more than
    tol from every cluster member stays distinct.
    """
    if len(pts) == 0:
        return pts
    if pts.shape[1] == 1:
        x = np.sort(pts[:, 0])
        cut = np.nonzero(np.diff(x) > tol)[0] + 1
        reps = np.array([seg.mean() for seg in np.split(x, cut)])
        return reps.reshape(-1, 1)
    order = _lex_order(pts)
    pts = pts[order]
    parent = np.arange(len(pts))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in cKDTree(pts).query_pairs(tol, output_type="ndarray"):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(pts))])
    reps = np.stack([pts[roots == r].mean(axis=0) for r in np.unique(roots)])
    return reps[_lex_order(reps)]


def _snap_indices(reps: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Index of the nearest representative for each point."""
    if reps.shape[1] == 1:
        r = reps[:, 0]
        idx = np.searchsorted(r, pts[:, 0])
        left = np.clip(idx - 1, 0, len(r) - 1)
        right = np.clip(idx, 0, len(r) - 1)
        use_right = np.abs(pts[:, 0] - r[right]) < np.abs(pts[:, 0] - r[left])
        return np.where(use_right, right, left)
    _, idx = cKDTree(reps).query(pts)
    return idx


@dataclass(frozen=True)
class Box:
    """Axis-aligned closed box given by lower and upper corners."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("corner dimensions differ")
        if any(h < l for l, h in zip(self.lo, self.hi)):
            raise ValueError("upper corner below lower corner")

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def extents(self) -> tuple[float, ...]:
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    @property
    def max_extent(self) -> float:
        return max(self.extents)

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(0.5 * (l + h) for l, h in zip(self.lo, self.hi))

    def contains_points(self, pts: np.ndarray, atol: float = DELTA_EQ) -> np.ndarray:
        lo = np.asarray(self.lo) - atol
        hi = np.asarray(self.hi) + atol
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def margins(self, pts: np.ndarray) -> np.ndarray:
        """Distance from each point to the box boundary (inf-margin, >= 0 inside)."""
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.minimum(pts - lo, hi - pts).min(axis=1)

    def contains_box(self, other: "Box", atol: float = DELTA_EQ) -> bool:
        return all(ol >= l - atol for ol, l in zip(other.lo, self.lo)) and all(
            oh <= h + atol for oh, h in zip(other.hi, self.hi)
        )

    def scaled(self, factor: float) -> "Box":
        """Box with the same center and extents multiplied by factor."""
        c = self.center
        return Box(
            tuple(ci - 0.5 * factor * e for ci, e in zip(c, self.extents)),
            tuple(ci + 0.5 * factor * e for ci, e in zip(c, self.extents)),
        )

    def grid(self, step: float) -> np.ndarray:
        """Regular grid covering the box, boundary included, as (M, d) array."""
        axes = [
            np.arange(l, h + 0.5 * step, step) for l, h in zip(self.lo, self.hi)
        ]
        if self.dimension == 1:
            return axes[0].reshape(-1, 1)
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def as_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi)}


class PointPattern:
    """Finite sample of a point set with its observation window.

    Points are stored sorted lexicographically, deduplicated within DELTA_EQ,
    and verified to lie inside the window.  Instances are immutable after
    construction (the coordinate array is write-protected) and safe to share
    across threads; per-radius patch censuses are memoized internally.
    """

    def __init__(self, dimension: int, points, window: Box, label: str = ""):
        if dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if window.dimension != dimension:
            raise ValueError("window dimension mismatch")
        pts = _as_points(points, dimension)
        pts = self._dedup(pts)
        inside = window.contains_points(pts)
        if not np.all(inside):
            bad = pts[~inside][0]
            raise ValueError(f"point {tuple(bad)} lies outside window")
        pts.setflags(write=False)
        self.dimension = dimension
        self.points = pts
        self.window = window
        self.label = label
        self._census_cache: dict[int, "PatchCensus"] = {}

    @staticmethod
    def _dedup(pts: np.ndarray) -> np.ndarray:
        if len(pts) == 0:
            return pts
        order = _lex_order(pts)
        pts = pts[order].copy()
        if len(pts) > 1:
            if pts.shape[1] == 1:
                keep = np.concatenate([[True], np.diff(pts[:, 0]) > DELTA_EQ])
                pts = pts[keep]
            else:
                pairs = cKDTree(pts).query_pairs(DELTA_EQ, output_type="ndarray")
                if len(pairs):
                    drop = np.unique(pairs.max(axis=1))
                    pts = np.delete(pts, drop, axis=0)
        return pts

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return (
            f"PointPattern(dim={self.dimension}, n={len(self)}, "
            f"window={self.window.lo}..{self.window.hi}, label={self.label!r})"
        )

    @property
    def coords(self) -> np.ndarray:
        """1d coordinate view for dimension-1 patterns."""
        if self.dimension != 1:
            raise ValueError("coords view is 1d only")
        return self.points[:, 0]

    def restrict(self, window: Box, label: str | None = None) -> "PointPattern":
        """Sub-sample observed through a smaller window."""
        if not self.window.contains_box(window):
            raise ValueError("restriction window not contained in pattern window")
        keep = window.contains_points(self.points)
        return PointPattern(
            self.dimension,
            self.points[keep],
            window,
            self.label if label is None else label,
        )

    def translate(self, shift) -> "PointPattern":
        t = np.asarray(shift, dtype=float).reshape(self.dimension)
        win = Box(
            tuple(l + s for l, s in zip(self.window.lo, t)),
            tuple(h + s for h, s in zip(self.window.hi, t)),
        )
        return PointPattern(self.dimension, self.points + t, win, self.label)

    def interior_anchor_indices(self, radius: float) -> np.ndarray:
        """Indices of points whose closed radius-ball lies inside the window."""
        if radius < 0:
            raise ValueError("radius must be >= 0")
        return np.nonzero(self.window.margins(self.points) >= radius - DELTA_EQ)[0]

    def census(self, radius: float) -> "PatchCensus":
        key = int(round(radius / DELTA_EQ))
        got = self._census_cache.get(key)
        if got is None:
            got = patch_census(self, radius, _skip_cache=True)
            self._census_cache[key] = got
        return got


class Patch:
    """Local configuration within a radius, anchored so the anchor sits at 0."""

    def __init__(self, radius: float, relative_points):
        pts = np.asarray(relative_points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise ValueError("relative_points must be (N, d)")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms > radius + DELTA_EQ):
            raise ValueError("patch point outside its ball")
        pts = pts[_lex_order(pts)]
        pts.setflags(write=False)
        self.radius = float(radius)
        self.relative_points = pts

    def __len__(self) -> int:
        return len(self.relative_points)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Patch)
            and abs(self.radius - other.radius) <= DELTA_EQ
            and len(self) == len(other)
            and bool(
                np.all(
                    np.abs(self.relative_points - other.relative_points) <= DELTA_EQ
                )
            )
        )

    __hash__ = None  # tolerance-based equality is not hashable

    def __repr__(self) -> str:
        return f"Patch(radius={self.radius}, n={len(self)})"


@dataclass(frozen=True)
class PatchClass:
    representative: Patch
    members: np.ndarray  # anchor indices into the source pattern


@dataclass(frozen=True)
class PatchCensus:
    """Partition of the interior anchors into classes of equal patches.

    The class count is the finite-local-complexity counting function c(R):
    bounded in R for FLC patterns, growing with sample size when FLC fails.
    """

    radius: float
    anchors: np.ndarray          # interior anchor indices, ascending
    labels: np.ndarray           # labels[i] = class index of anchors[i]
    classes: tuple[PatchClass, ...]

    @property
    def class_count(self) -> int:
        return len(self.classes)


def same_patch_classes(a: PatchCensus, b: PatchCensus) -> bool:
    """True when the two censuses exhibit exactly the same patch classes
    (members aside: the observation windows may differ)."""
    if a.class_count != b.class_count:
        return False
    used = [False] * b.class_count
    for ca in a.classes:
        hit = False
        for j, cb in enumerate(b.classes):
            if not used[j] and ca.representative == cb.representative:
                used[j] = True
                hit = True
                break
        if not hit:
            return False
    return True


@dataclass(frozen=True)
class DifferenceSet:
    """Deduplicated pairwise difference vectors up to a cutoff norm."""

    vectors: np.ndarray
    source_window: Box

    def __len__(self) -> int:
        return len(self.vectors)

    def min_gap(self) -> float:
        """Smallest distance between distinct difference vectors."""
        if len(self.vectors) < 2:
            raise ValueError("insufficient vectors")
        return _min_pairwise_distance(self.vectors)


# ---------------------------------------------------------------------------
# geometric analyzers


def min_gap(p: PointPattern) -> float:
    """Minimal distance between distinct points (uniform discreteness scale)."""
    if len(p) < 2:
        raise ValueError("insufficient points")
    return _min_pairwise_distance(p.points)


def _distances_to(pts_sorted: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Distance from each query to the nearest of pts_sorted (lex-sorted, (N,d))."""
    if pts_sorted.shape[1] == 1:
        x = pts_sorted[:, 0]
        q = queries[:, 0]
        idx = np.searchsorted(x, q)
        left = np.clip(idx - 1, 0, len(x) - 1)
        right = np.clip(idx, 0, len(x) - 1)
        return np.minimum(np.abs(q - x[left]), np.abs(q - x[right]))
    d, _ = cKDTree(pts_sorted).query(queries)
    return d


def covering_radius(p: PointPattern, grid_step: float | None = None) -> tuple[float, float]:
    """Bracket [lower, upper] on the covering radius of the sample.

    R covers when every window location at boundary margin >= R lies within R
    of a pattern point; the margin condition discounts locations whose true
    nearest neighbours may sit outside the observation window.  The smallest
    such R equals max over x of min(dist(x, pattern), margin(x)), estimated on
    a grid of the given step (default min_gap/10).  Both dist and margin are
    1-Lipschitz, so the grid maximum is a certified lower bound and the upper
    bound adds one grid step.
    """
    if len(p) == 0:
        raise ValueError("empty pattern")
    if grid_step is None:
        grid_step = min_gap(p) / 10.0 if len(p) > 1 else p.window.max_extent / 100.0
    if grid_step <= 0:
        raise ValueError("grid_step must be > 0")
    grid = p.window.grid(grid_step)
    dist = _distances_to(p.points, grid)
    margin = p.window.margins(grid)
    lower = float(np.max(np.minimum(dist, margin)))
    return lower, lower + grid_step


def r_patch(p: PointPattern, anchor_index: int, radius: float) -> Patch:
    """Patch of the pattern within `radius` of the anchor, moved to the origin.

    The anchor ball must fit inside the window; a patch truncated by the
    window would reflect the observation, not the pattern.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    anchor = p.points[anchor_index]
    if p.window.margins(anchor.reshape(1, -1))[0] < radius - DELTA_EQ:
        raise ValueError("anchor too close to boundary")
    rel = p.points - anchor
    if p.dimension == 1:
        x = rel[:, 0]
        lo = np.searchsorted(x, -radius - DELTA_EQ)
        hi = np.searchsorted(x, radius + DELTA_EQ, side="right")
        rel = rel[lo:hi]
    else:
        keep = np.linalg.norm(rel, axis=1) <= radius + DELTA_EQ
        rel = rel[keep]
    return Patch(radius, rel)


def patch_census(p: PointPattern, radius: float, _skip_cache: bool = False) -> PatchCensus:
    """Group every interior anchor by exact patch equality (within DELTA_EQ).

    All relative offsets occurring in the census are first snapped to their
    CLUSTER_TOL cluster representatives, so grouping is immune to accumulated
    float noise while keeping genuinely distinct offsets apart.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if not _skip_cache:
        return p.census(radius)
    anchors = p.interior_anchor_indices(radius)
    if len(anchors) == 0:
        raise ValueError("no interior anchors: window too small for this radius")
    pts = p.points
    by_key: dict = {}
    rep_patch: dict = {}
    if p.dimension == 1:
        # A 1d patch is its leading offset plus its gap sequence.  Gaps and
        # leading offsets are differences of nearby coordinates (ulp-scale
        # noise), snapped to their cluster representatives; genuinely distinct
        # values in the supported chains stay >= 0.1 apart.
        x = pts[:, 0]
        ax = x[anchors]
        los = np.searchsorted(x, ax - radius - DELTA_EQ)
        his = np.searchsorted(x, ax + radius + DELTA_EQ, side="right")
        gaps = np.diff(x).reshape(-1, 1)
        if len(gaps):
            gap_reps = _cluster_representatives(gaps, CLUSTER_TOL)
            dtype = np.uint8 if len(gap_reps) < 256 else np.uint32
            gap_idx = _snap_indices(gap_reps, gaps).astype(dtype)
        else:
            gap_idx = np.empty(0, dtype=np.uint8)
        lead = (x[los] - ax).reshape(-1, 1)
        lead_idx = _snap_indices(_cluster_representatives(lead, CLUSTER_TOL), lead)
        for a, lo, hi, li in zip(anchors, los, his, lead_idx):
            key = (int(li), gap_idx[lo : hi - 1].tobytes())
            if key not in by_key:
                by_key[key] = []
                rep_patch[key] = Patch(radius, x[lo:hi] - x[a])
            by_key[key].append(a)
    else:
        tree = cKDTree(pts)
        hits = tree.query_ball_point(pts[anchors], radius + DELTA_EQ)
        offsets = []
        for a, idx in zip(anchors, hits):
            rel = pts[np.sort(idx)] - pts[a]
            offsets.append(rel[_lex_order(rel)])
        flat = np.vstack(offsets)
        reps = _cluster_representatives(flat, CLUSTER_TOL)
        snapped = _snap_indices(reps, flat).astype(np.int64)
        pos = 0
        for a, off in zip(anchors, offsets):
            n = len(off)
            idx = snapped[pos : pos + n]
            pos += n
            key = idx.tobytes()
            if key not in by_key:
                by_key[key] = []
                rep_patch[key] = Patch(radius, reps[np.sort(idx)])
            by_key[key].append(a)
    items = sorted(by_key.items(), key=lambda kv: kv[1][0])
    classes = tuple(
        PatchClass(rep_patch[k], np.asarray(v, dtype=np.intp)) for k, v in items
    )
    anchor_label = np.empty(len(anchors), dtype=np.intp)
    where = {a: i for i, a in enumerate(anchors)}
    for lbl, (_, members) in enumerate(items):
        for a in members:
            anchor_label[where[a]] = lbl
    return PatchCensus(radius, anchors, anchor_label, classes)


@dataclass(frozen=True)
class RepetitivityResult:
    lower: float
    upper: float
    verdict: str                 # "repetitive" | "not_repetitive"
    singleton_classes: tuple[int, ...]
    detail: str

    def as_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "verdict": self.verdict,
            "singleton_classes": list(self.singleton_classes),
            "detail": self.detail,
        }


def repetitivity_radius(
    p: PointPattern, radius: float, grid_step: float | None = None
) -> RepetitivityResult:
    """Bracket the smallest M such that every ball of radius M inside the
    window holds an anchor of every patch class.

    Same self-referential margin treatment as covering_radius: the estimate is
    max over window locations x of min(max_class dist(x, class anchors),
    margin(x)).  When that estimate scales with the window instead of staying
    local (threshold: a quarter of the window extent), the sample is flagged
    as not repetitive at this window rather than given a number.
    """
    census = p.census(radius)
    if grid_step is None:
        grid_step = min_gap(p) / 10.0
    grid = p.window.grid(grid_step)
    worst = np.zeros(len(grid))
    for cls in census.classes:
        pos = p.points[cls.members]
        np.maximum(worst, _distances_to(pos, grid), out=worst)
    margin = p.window.margins(grid)
    lower = float(np.max(np.minimum(worst, margin)))
    upper = lower + grid_step
    singletons = tuple(
        i for i, cls in enumerate(census.classes) if len(cls.members) == 1
    )
    flag = upper >= 0.25 * p.window.max_extent
    if flag:
        detail = (
            f"return gap {upper:.3g} scales with the window "
            f"(extent {p.window.max_extent:.3g})"
        )
        if singletons:
            detail += f"; classes {list(singletons)} occur once"
        return RepetitivityResult(lower, upper, "not_repetitive", singletons, detail)
    return RepetitivityResult(lower, upper, "repetitive", singletons, "")


def difference_set(p: PointPattern, cutoff: float) -> DifferenceSet:
    """All pairwise difference vectors with norm <= cutoff, deduplicated.

    Always contains the zero vector and is closed under negation.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be > 0")
    pts = p.points
    if p.dimension == 1:
        x = pts[:, 0]
        diffs = []
        j = 1
        while j < len(x):
            d = x[j:] - x[:-j]
            d = d[d <= cutoff + DELTA_EQ]
            if len(d) == 0:
                break
            diffs.append(d)
            j += 1
        pos = np.concatenate(diffs) if diffs else np.empty(0)
        vec = np.concatenate([pos, -pos]).reshape(-1, 1)
    else:
        pairs = cKDTree(pts).query_pairs(cutoff + DELTA_EQ, output_type="ndarray")
        d = pts[pairs[:, 0]] - pts[pairs[:, 1]] if len(pairs) else np.zeros((0, 2))
        vec = np.vstack([d, -d])
    vec = _cluster_representatives(vec, CLUSTER_TOL)
    vec = np.vstack([vec, np.zeros((1, p.dimension))])
    vec = vec[_lex_order(vec)]
    vec.setflags(write=False)
    return DifferenceSet(vec, p.window)


def window_ladder(p: PointPattern, steps: int = 4, ratio: float = 2.0) -> list[Box]:
    """Nested observation windows centered in the pattern window, growing by
    `ratio` per step up to the full window.  Used by every "as the window
    grows" check."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if ratio <= 1:
        raise ValueError("ratio must be > 1")
    return [p.window.scaled(ratio ** -(steps - 1 - i)) for i in range(steps)]


@dataclass(frozen=True)
class MeyerCheck:
    delta_min_gap: float
    relatively_dense_gap: float
    verdict: str                 # "pass" | "fail" | "inconclusive"
    per_window: tuple[dict, ...]
    detail: str

    def as_dict(self) -> dict:
        return {
            "delta_min_gap": self.delta_min_gap,
            "relatively_dense_gap": self.relatively_dense_gap,
            "verdict": self.verdict,
            "per_window": list(self.per_window),
            "detail": self.detail,
        }


def meyer_check(
    p: PointPattern,
    cutoff: float,
    steps: int = 4,
    ratio: float = 2.0,
    gap_floor: float = MEYER_GAP_FLOOR,
) -> MeyerCheck:
    """Empirical Meyer test: the difference set must stay uniformly discrete
    across a ladder of growing windows, and the pattern must be relatively
    dense.

    The discreteness gap of each ladder window's difference set must exceed
    `gap_floor`; a genuinely discrete difference set keeps an exact gap while
    incommensurate perturbations send it to zero as the window grows.
    Relative denseness is proxied by a finite covering-radius bracket well
    below the window extent.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be > 0")
    ladder = window_ladder(p, steps=steps, ratio=ratio)
    per_window = []
    gaps = []
    for box in ladder:
        sub = p.restrict(box)
        if len(sub) < 2:
            return MeyerCheck(
                math.nan,
                math.nan,
                "inconclusive",
                tuple(per_window),
                f"ladder window {box.lo}..{box.hi} holds {len(sub)} point(s); "
                "sample too small",
            )
        delta = difference_set(sub, cutoff)
        if len(delta) < 2:
            return MeyerCheck(
                math.nan,
                math.nan,
                "inconclusive",
                tuple(per_window),
                "difference set within cutoff is trivial; increase cutoff",
            )
        g = delta.min_gap()
        gaps.append(g)
        per_window.append(
            {"window": box.as_dict(), "points": len(sub), "delta_size": len(delta),
             "delta_min_gap": g}
        )
    # relative denseness on the full sample; a coarse grid certifies finiteness
    cov_lo, cov_hi = covering_radius(p, grid_step=max(min_gap(p), DELTA_EQ * 10))
    dense_ok = cov_hi <= 0.25 * p.window.max_extent
    discrete_ok = all(g >= gap_floor for g in gaps)
    verdict = "pass" if (dense_ok and discrete_ok) else "fail"
    detail = ""
    if not discrete_ok:
        detail = f"difference-set gap fell to {min(gaps):.3g} (floor {gap_floor:.3g})"
    if not dense_ok:
        detail += ("; " if detail else "") + (
            f"covering radius {cov_hi:.3g} is not small against the window"
        )
    return MeyerCheck(float(min(gaps)), cov_hi, verdict, tuple(per_window), detail)


@dataclass(frozen=True)
class EpsilonDualResult:
    epsilon: float
    accepted: tuple[tuple[tuple[float, ...], float], ...]  # (k, max deviation)
    largest_gap: float

    def accepted_k(self) -> np.ndarray:
        return np.asarray([k for k, _ in self.accepted])

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "accepted": [{"k": list(k), "deviation": d} for k, d in self.accepted],
            "largest_gap": self.largest_gap,
        }


def epsilon_dual(p: PointPattern, epsilon: float, k_grid) -> EpsilonDualResult:
    """Wave vectors whose plane wave stays within epsilon of 1 on every point.

    For each grid k the deviation is max over pattern points x of
    |e^(2 pi i k.x) - 1| = 2 |sin(pi k.x)|; k is accepted when the deviation
    is <= epsilon.  The largest gap between accepted k's (1d: along the sorted
    list; 2d: worst grid distance to the accepted set) is the finite-sample
    proxy for relative denseness of the dual set.

    Acceptance regions shrink with the sample: around a dual vector the
    deviation grows like 2 pi |dk| max|x|, so the grid step must stay below
    roughly epsilon / (2 pi max|x|) or the scan walks straight over them.
    """
    if not (0 < epsilon < 2):
        raise ValueError("epsilon must be in (0, 2)")
    ks = np.asarray(k_grid, dtype=float)
    if ks.size == 0:
        raise ValueError("empty k grid")
    if ks.ndim == 1:
        ks = ks.reshape(-1, 1) if p.dimension == 1 else ks.reshape(1, -1)
    if ks.shape[1] != p.dimension:
        raise ValueError("k grid dimension mismatch")
    x = p.points
    dev = np.empty(len(ks))
    chunk = max(1, int(2e6) // max(len(x), 1))
    for i in range(0, len(ks), chunk):
        block = ks[i : i + chunk]
        dev[i : i + chunk] = 2.0 * np.abs(np.sin(np.pi * block @ x.T)).max(axis=1)
    mask = dev <= epsilon
    accepted = tuple(
        (tuple(float(v) for v in k), float(d)) for k, d in zip(ks[mask], dev[mask])
    )
    if mask.sum() >= 2:
        if p.dimension == 1:
            kk = np.sort(ks[mask, 0])
            gap = float(np.max(np.diff(kk)))
        else:
            d, _ = cKDTree(ks[mask]).query(ks)
            gap = float(np.max(d))
    else:
        gap = math.inf
    return EpsilonDualResult(epsilon, accepted, gap)


# ---------------------------------------------------------------------------
# file formats


def save_pattern(p: PointPattern, path: str, fmt: str | None = None) -> None:
    """Write a pattern as JSON or plain text (shortest round-trip decimals)."""
    fmt = fmt or ("text" if str(path).endswith(".txt") else "json")
    if fmt == "json":
        doc = {
            "dimension": p.dimension,
            "label": p.label,
            "window": p.window.as_dict(),
            "points": [[float(v) for v in row] for row in p.points],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)
            fh.write("\n")
    elif fmt == "text":
        lo = ",".join(repr(float(v)) for v in p.window.lo)
        hi = ",".join(repr(float(v)) for v in p.window.hi)
        with open(path, "w") as fh:
            fh.write(f"# dim={p.dimension} window={lo}..{hi}\n")
            for row in p.points:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")
    else:
        raise ValueError(f"unknown pattern format {fmt!r}")


def load_pattern(path: str) -> PointPattern:
    with open(path) as fh:
        head = fh.read(1)
        fh.seek(0)
        if head == "{":
            doc = json.load(fh)
            window = Box(tuple(doc["window"]["lo"]), tuple(doc["window"]["hi"]))
            return PointPattern(
                int(doc["dimension"]), doc["points"], window, doc.get("label", "")
            )
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError("text pattern file must start with a '# dim=...' header")
        fields = dict(
            item.split("=", 1) for item in header.lstrip("# ").split() if "=" in item
        )
        dim = int(fields["dim"])
        lo_s, hi_s = fields["window"].split("..")
        window = Box(
            tuple(float(v) for v in lo_s.split(",")),
            tuple(float(v) for v in hi_s.split(",")),
        )
        rows = [
            [float(v) for v in line.split()]
            for line in fh
            if line.strip() and not line.lstrip().startswith("#")
        ]
        return PointPattern(dim, rows, window, "")
