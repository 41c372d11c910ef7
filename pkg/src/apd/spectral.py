"""Finite-volume diffraction and phase-coherence tests for point patterns.

The per-point amplitude A(k) = (1/N) sum_x e^(-2 pi i k.x) makes true Bragg
peaks stabilize at Theta(1) intensity while diffuse backgrounds decay like
1/N, so scanning a ladder of nested windows separates the two cleanly.

A wave vector is accepted as a continuous (topological) eigenvalue when the
phase 2 pi k.x, read only through the local configuration at x, is pinned
ever more tightly as the configuration radius grows: anchors sharing an
R-patch must share their phase up to a spread that shrinks along a radius
ladder.  Vectors passing this test while carrying no diffraction intensity
are the extinct Bragg peaks.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .pointset import (
    DELTA_EQ,
    Box,
    PatchCensus,
    PointPattern,
    window_ladder,
    worker_count,
)

# Stability threshold for Bragg candidates (intensity on every ladder window).
THETA_BRAGG = 0.01
# Final phase-spread bound for the eigenvalue verdict (radians).
EPS_PE = 0.05
# Allowed relative increase between consecutive ladder spreads (sample noise).
DELTA_MONO = 0.10
# Intensity below which a topological eigenvalue counts as extinct.
EPS_EXT = 1e-3

VERDICT_TOPOLOGICAL = "topological"
VERDICT_EXTINCT = "extinct_topological"
VERDICT_L2_ONLY = "l2_candidate_only"
VERDICT_NONE = "none"

TWO_PI = 2.0 * math.pi


def _as_wavevector(k, dimension: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(k, dtype=float))
    if arr.shape != (dimension,):
        raise ValueError(f"wave vector must have {dimension} component(s)")
    if not np.all(np.isfinite(arr)):
        raise ValueError("wave vector components must be finite")
    return arr


def diffraction_amplitude(p: PointPattern, k) -> complex:
    """Per-point scattering amplitude A(k) = (1/N) sum_x e^(-2 pi i k.x)."""
    if len(p) == 0:
        raise ValueError("empty pattern")
    kv = _as_wavevector(k, p.dimension)
    phase = p.points @ kv
    return complex(np.mean(np.exp(-2j * np.pi * phase)))


def _intensity_on_grid(points: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """|A(k)|^2 for each row of ks, chunked to bound memory."""
    out = np.empty(len(ks))
    if len(points) == 0:
        out[:] = 0.0
        return out
    chunk = max(1, int(4e6) // len(points))

    def work(i):
        block = ks[i : i + chunk]
        amp = np.exp(-2j * np.pi * (block @ points.T)).mean(axis=1)
        return i, np.abs(amp) ** 2

    starts = range(0, len(ks), chunk)
    workers = min(worker_count(), 8)
    if workers > 1 and len(ks) > chunk:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, vals in pool.map(work, starts):
                out[i : i + len(vals)] = vals
    else:
        for i in starts:
            j, vals = work(i)
            out[j : j + len(vals)] = vals
    return out


def _golden_max(f, lo: float, hi: float, iters: int) -> float:
    """Golden-section maximizer of f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class SpectrumEntry:
    k: tuple[float, ...]
    intensity: float
    per_window_intensity: tuple[float, ...]
    phase_spread_ladder: tuple[tuple[float, float], ...]  # (radius, spread)
    verdict: str

    def as_dict(self) -> dict:
        return {
            "k": list(self.k),
            "intensity": self.intensity,
            "per_window_intensity": list(self.per_window_intensity),
            "phase_spread_ladder": [list(t) for t in self.phase_spread_ladder],
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class SpectrumReport:
    entries: tuple[SpectrumEntry, ...]
    window_stats: tuple[dict, ...]
    params: dict
    grid_k: np.ndarray | None = field(default=None, compare=False)
    grid_intensity: np.ndarray | None = field(default=None, compare=False)

    def candidates(self, include_zero: bool = False) -> list[SpectrumEntry]:
        out = [e for e in self.entries if e.verdict != VERDICT_NONE]
        if not include_zero:
            out = [e for e in out if any(abs(v) > DELTA_EQ for v in e.k)]
        return out

    def as_dict(self) -> dict:
        return {
            "params": self.params,
            "window_stats": list(self.window_stats),
            "entries": [e.as_dict() for e in self.entries],
        }

    def write_csv(self, path: str) -> None:
        radii = []
        for e in self.entries:
            if e.phase_spread_ladder:
                radii = [r for r, _ in e.phase_spread_ladder]
                break
        dim = len(self.entries[0].k) if self.entries else 1
        cols = [f"k{i}" for i in range(dim)] + ["intensity"]
        cols += [f"spread@{r:g}" for r in radii] + ["verdict"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for e in self.entries:
                spread = dict(e.phase_spread_ladder)
                row = list(e.k) + [repr(e.intensity)]
                row += [repr(spread[r]) if r in spread else "" for r in radii]
                row.append(e.verdict)
                w.writerow(row)

    def plot_svg(self, path: str) -> None:
        """Intensity vs k with verdict color coding (dimension 1 only)."""
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(8, 4))
        if self.grid_k is not None and self.grid_k.ndim == 2 and self.grid_k.shape[1] == 1:
            ax.plot(self.grid_k[:, 0], self.grid_intensity, lw=0.5, color="0.6",
                    label="grid scan (smallest window)")
        colors = {
            VERDICT_TOPOLOGICAL: "tab:green",
            VERDICT_EXTINCT: "tab:purple",
            VERDICT_L2_ONLY: "tab:blue",
            VERDICT_NONE: "tab:red",
        }
        seen = set()
        for e in self.entries:
            lbl = e.verdict if e.verdict not in seen else None
            seen.add(e.verdict)
            ax.plot([e.k[0], e.k[0]], [0, e.intensity], color=colors[e.verdict], lw=1.5)
            ax.plot(e.k[0], e.intensity, "o", ms=4, color=colors[e.verdict], label=lbl)
        ax.set_xlabel("k")
        ax.set_ylabel("|A(k)|^2")
        ax.set_yscale("symlog", linthresh=1e-4)
        ax.legend(loc="upper right", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg")
        plt.close(fig)


def _validate_ladder(p: PointPattern, ladder: list[Box]) -> list[Box]:
    if len(ladder) < 3:
        raise ValueError("window ladder needs at least 3 windows")
    for small, big in zip(ladder, ladder[1:]):
        if not big.contains_box(small):
            raise ValueError("ladder windows are not nested")
    if not p.window.contains_box(ladder[-1]):
        raise ValueError("ladder exceeds the pattern window")
    return ladder


def bragg_scan(
    p: PointPattern,
    k_grid,
    ladder: list[Box] | None = None,
    theta: float = THETA_BRAGG,
    refine_iters: int = 40,
    radius_ladder=None,
    epsilon: float = EPS_PE,
    keep_grid: bool = True,
) -> SpectrumReport:
    """Scan |A(k)|^2 over a k grid and keep the stable peaks.

    Detection runs on the smallest ladder window, whose peak width 1/L should
    not be much finer than the grid step.  Each detected cluster is refined by
    golden-section search on |A| within one grid cell, window by window with a
    bracket shrinking to the previous window's resolution (a raw grid scan
    misses irrational peak locations on long windows).  A k is a Bragg
    candidate when its refined intensity stays >= theta on every ladder step.
    k = 0 is always reported; callers exclude it from group statistics.

    With a radius_ladder the candidates are additionally classified through
    the phase-spread eigenvalue test.
    """
    if p.dimension != 1:
        raise ValueError("bragg_scan supports dimension 1")
    ks = np.asarray(k_grid, dtype=float).reshape(-1)
    if ks.size < 2:
        raise ValueError("k grid too small")
    step = float(np.min(np.diff(np.sort(ks))))
    ladder = _validate_ladder(p, ladder or window_ladder(p))
    subs = [p.restrict(b) for b in ladder]
    order = np.argsort(ks)
    ks = ks[order]

    grid_int = _intensity_on_grid(subs[0].points, ks.reshape(-1, 1))

    # above-threshold clusters on the detection window; generous threshold to
    # survive the sub-grid offset of an irrational peak
    hot = grid_int >= 0.5 * theta
    clusters = []
    i = 0
    while i < len(ks):
        if hot[i]:
            j = i
            while j + 1 < len(ks) and hot[j + 1]:
                j += 1
            clusters.append(i + int(np.argmax(grid_int[i : j + 1])))
            i = j + 1
        else:
            i += 1

    def refine(k0: float) -> float:
        khat, half = k0, step
        for sub in subs:
            lo, hi = khat - half, khat + half
            amp = lambda k: abs(diffraction_amplitude(sub, k))
            khat = _golden_max(amp, lo, hi, refine_iters)
            half = min(half, 0.75 / sub.window.max_extent)
        return khat

    peaks = sorted(refine(ks[c]) for c in clusters)
    merged: list[float] = []
    for k in peaks:
        if abs(k) < DELTA_EQ:
            k = 0.0
        if merged and abs(k - merged[-1]) < 0.5 * step:
            continue
        merged.append(k)

    entries = []
    zero_seen = False
    for k in merged:
        per_w = tuple(
            float(abs(diffraction_amplitude(sub, k)) ** 2) for sub in subs
        )
        if min(per_w) < theta:
            continue
        if abs(k) < 0.5 * step:
            zero_seen = True
        entries.append((k, per_w))
    if not zero_seen and ks[0] <= 0.0 <= ks[-1]:
        per_w = tuple(float(abs(diffraction_amplitude(sub, 0.0)) ** 2) for sub in subs)
        entries.insert(0, (0.0, per_w))
    entries.sort(key=lambda t: t[0])

    final_entries = []
    for k, per_w in entries:
        ladder_spread: tuple[tuple[float, float], ...] = ()
        verdict = VERDICT_L2_ONLY
        if radius_ladder is not None:
            ev = topological_eigenvalue_test(p, k, radius_ladder, epsilon=epsilon)
            ladder_spread = ev.ladder
            if ev.verdict:
                verdict = VERDICT_EXTINCT if per_w[-1] <= EPS_EXT else VERDICT_TOPOLOGICAL
        final_entries.append(
            SpectrumEntry((float(k),), per_w[-1], per_w, ladder_spread, verdict)
        )

    stats = tuple(
        {"window": b.as_dict(), "points": len(s)} for b, s in zip(ladder, subs)
    )
    params = {
        "theta_bragg": theta,
        "grid": {"min": float(ks[0]), "max": float(ks[-1]), "step": step},
        "refine_iters": refine_iters,
    }
    return SpectrumReport(
        tuple(final_entries),
        stats,
        params,
        grid_k=ks.reshape(-1, 1) if keep_grid else None,
        grid_intensity=grid_int if keep_grid else None,
    )


def _circular_diameter(turns: np.ndarray) -> float:
    """Smallest arc (radians) containing the given angles, angles in turns."""
    if len(turns) <= 1:
        return 0.0
    t = np.sort(np.mod(turns, 1.0))
    gaps = np.diff(np.concatenate([t, [t[0] + 1.0]]))
    return TWO_PI * float(1.0 - np.max(gaps))


def phase_spread(
    p: PointPattern, k, radius: float, census: PatchCensus | None = None
) -> float:
    """Worst phase scatter of e^(2 pi i k.x) over anchors sharing an R-patch.

    For each census class with at least two members the circular diameter of
    {k.x mod 1} is taken; the maximum over classes is returned.  The sup-style
    diameter (not a variance) matches the |f(x) - f(y)| < eps reading of
    pattern equivariance.
    """
    kv = _as_wavevector(k, p.dimension)
    if census is None:
        census = p.census(radius)
    best = -1.0
    for cls in census.classes:
        if len(cls.members) < 2:
            continue
        turns = p.points[cls.members] @ kv
        best = max(best, _circular_diameter(turns))
    if best < 0:
        raise ValueError("window too small: no patch class has two members")
    return best


@dataclass(frozen=True)
class EigenvalueTest:
    k: tuple[float, ...]
    ladder: tuple[tuple[float, float], ...]  # (radius, spread)
    final_spread: float
    epsilon: float
    monotone_ok: bool
    verdict: bool

    def as_dict(self) -> dict:
        return {
            "k": list(self.k),
            "ladder": [list(t) for t in self.ladder],
            "final_spread": self.final_spread,
            "epsilon": self.epsilon,
            "monotone_ok": self.monotone_ok,
            "verdict": "topological" if self.verdict else "not_topological",
        }


def topological_eigenvalue_test(
    p: PointPattern,
    k,
    radius_ladder,
    epsilon: float = EPS_PE,
    delta_mono: float = DELTA_MONO,
) -> EigenvalueTest:
    """Continuous-eigenvalue verdict for k: the phase-spread ladder must be
    non-increasing (within a delta_mono relative slack for finite-sample
    noise) and end at or below epsilon."""
    radii = [float(r) for r in radius_ladder]
    if len(radii) < 3 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radius ladder must be increasing with >= 3 entries")
    kv = _as_wavevector(k, p.dimension)
    spreads = [phase_spread(p, kv, r) for r in radii]
    monotone = all(
        s1 <= s0 * (1.0 + delta_mono) + 1e-9 for s0, s1 in zip(spreads, spreads[1:])
    )
    verdict = monotone and spreads[-1] <= epsilon
    return EigenvalueTest(
        tuple(float(v) for v in kv),
        tuple(zip(radii, spreads)),
        spreads[-1],
        epsilon,
        monotone,
        verdict,
    )


def refine_eigenvalue(
    p: PointPattern,
    k0: float,
    halfwidth: float,
    radius_ladder,
    epsilon: float = EPS_PE,
    delta_mono: float = DELTA_MONO,
    iters: int = 40,
    top_classes: int = 12,
    pool_radius: float | None = None,
) -> EigenvalueTest:
    """Eigenvalue verdict for the best k within [k0 - halfwidth, k0 + halfwidth].

    The phase spread of a patch class is V-shaped around an eigenvalue
    location: an offset d adds about 2 pi |d| L where L is the spatial extent
    of the class members, so the basin is only ~1/L wide.  The search
    therefore ladders the extent: class members are first restricted to a
    sub-interval short enough that the basin covers the whole bracket, then
    the bracket and the sub-interval are tightened together - the phase-side
    analogue of refining a Bragg candidate on |A| over nested windows.  The
    returned verdict re-runs the full spread ladder at the refined k.
    Dimension 1 only.
    """
    if p.dimension != 1:
        raise ValueError("refine_eigenvalue supports dimension 1")
    if halfwidth <= 0:
        raise ValueError("halfwidth must be > 0")
    radii = [float(r) for r in radius_ladder]
    if pool_radius is None:
        pool_radius = max(radii[0] / 4.0, 1.0)
    census = p.census(pool_radius)
    pools = sorted(census.classes, key=lambda c: -len(c.members))[:top_classes]
    pools = [p.points[c.members, 0] for c in pools if len(c.members) >= 2]
    if not pools:
        raise ValueError("window too small: no patch class has two members")
    x_lo = min(float(xs[0]) for xs in pools)
    full = p.window.max_extent

    def spread_restricted(k: float, extent: float) -> float:
        worst = 0.0
        for xs in pools:
            sel = xs[xs <= x_lo + extent]
            if len(sel) >= 2:
                worst = max(worst, _circular_diameter(k * sel))
        return worst

    khat = float(k0)
    bracket = halfwidth
    extent = 0.5 / halfwidth  # basin halfwidth 1/(2 extent) covers the bracket
    while True:
        extent = min(extent, full)
        khat = _golden_max(
            lambda k: -spread_restricted(k, extent),
            khat - bracket,
            khat + bracket,
            iters,
        )
        if extent >= full:
            break
        bracket = 0.25 / extent
        extent *= 2.0
    return topological_eigenvalue_test(p, khat, radii, epsilon, delta_mono)


def classify_wavevector(
    p: PointPattern,
    k,
    radius_ladder,
    ladder: list[Box] | None = None,
    epsilon: float = EPS_PE,
    delta_mono: float = DELTA_MONO,
    eps_ext: float = EPS_EXT,
) -> SpectrumEntry:
    """Full verdict for one wave vector: eigenvalue test plus finite-volume
    intensity on a window ladder; a passing vector with intensity <= eps_ext
    on the largest window is an extinct Bragg peak."""
    ladder = _validate_ladder(p, ladder or window_ladder(p))
    ev = topological_eigenvalue_test(p, k, radius_ladder, epsilon, delta_mono)
    per_w = tuple(
        float(abs(diffraction_amplitude(p.restrict(b), k)) ** 2) for b in ladder
    )
    if not ev.verdict:
        verdict = VERDICT_NONE
    elif per_w[-1] <= eps_ext:
        verdict = VERDICT_EXTINCT
    else:
        verdict = VERDICT_TOPOLOGICAL
    return SpectrumEntry(ev.k, per_w[-1], per_w, ev.ladder, verdict)


def torus_coordinates(p: PointPattern, basis, x) -> np.ndarray:
    """Coordinates (k_j . x mod 1) of the translate by x under the character
    basis; callers should pass vectors that passed the eigenvalue test."""
    basis = np.atleast_1d(np.asarray(basis, dtype=float))
    if basis.size == 0:
        raise ValueError("empty character basis")
    if basis.ndim == 1:
        if p.dimension != 1:
            raise ValueError("flat basis only valid in dimension 1")
        basis = basis.reshape(-1, 1)
    xv = np.atleast_1d(np.asarray(x, dtype=float)).reshape(p.dimension)
    return np.mod(basis @ xv, 1.0)


@dataclass(frozen=True)
class CollisionReport:
    radius: float
    tol: float
    n_anchors: int
    n_close: int
    n_collide: int
    conclusive: bool

    @property
    def fraction(self) -> float:
        return self.n_collide / self.n_close if self.n_close else math.nan

    def as_dict(self) -> dict:
        return {
            "radius": self.radius,
            "tol": self.tol,
            "anchors": self.n_anchors,
            "close_pairs": self.n_close,
            "colliding_pairs": self.n_collide,
            "fraction": self.fraction,
            "conclusive": self.conclusive,
        }


def fiber_collision_sample(
    p: PointPattern,
    basis,
    radius: float,
    tol: float,
    max_anchors: int = 2500,
    min_pairs: int = 100,
    seed: int = 0,
) -> CollisionReport:
    """Empirical probe of torus-fiber multiplicity at one patch radius.

    Counts anchor pairs whose torus coordinates agree within tol on every
    basis character ("coordinate-close") and, among them, those whose
    R-patches differ ("colliding").  Genuine fiber multiplicity keeps the
    collision fraction up no matter how small tol gets; merely-nearby fibers
    wash out as tol shrinks (see fiber_collision_ladder).  Subsampling to
    max_anchors uses a fixed-seed generator for reproducibility.
    """
    if tol <= 0 or tol >= 0.5:
        raise ValueError("tol must be in (0, 0.5)")
    census = p.census(radius)
    anchors = census.anchors
    labels = census.labels
    if len(anchors) > max_anchors:
        pick = np.sort(
            np.random.default_rng(seed).choice(len(anchors), max_anchors, replace=False)
        )
        anchors = anchors[pick]
        labels = labels[pick]
    basis_arr = np.atleast_1d(np.asarray(basis, dtype=float))
    if basis_arr.ndim == 1:
        basis_arr = basis_arr.reshape(-1, 1)
    coords = np.mod(p.points[anchors] @ basis_arr.T, 1.0)
    n = len(anchors)
    n_close = 0
    n_collide = 0
    chunk = max(1, int(4e6) // max(n * coords.shape[1], 1))
    for i0 in range(0, n, chunk):
        i1 = min(i0 + chunk, n)
        d = np.abs(coords[i0:i1, None, :] - coords[None, :, :])
        d = np.minimum(d, 1.0 - d)
        close = (d <= tol).all(axis=2)
        upper = np.arange(n)[None, :] > np.arange(i0, i1)[:, None]
        close &= upper
        n_close += int(close.sum())
        differ = labels[i0:i1, None] != labels[None, :]
        n_collide += int((close & differ).sum())
    return CollisionReport(
        float(radius), float(tol), n, n_close, n_collide, n_close >= min_pairs
    )


def fiber_collision_ladder(
    p: PointPattern,
    basis,
    radii,
    tol: float,
    schedule: str = "quadratic",
    max_anchors: int = 2500,
    min_pairs: int = 100,
    seed: int = 0,
) -> list[CollisionReport]:
    """Collision fractions over a radius ladder with a coordinate tolerance
    tightening as the patch radius grows.

    At fixed tolerance the fraction of coordinate-close pairs separated by a
    patch boundary grows linearly with the radius for any aperiodic chain, so
    a fixed-tol ladder says nothing about fiber multiplicity.  The quadratic
    schedule tol_R = tol (R0/R)^2 shrinks the admitted coordinate mismatch
    faster than the patch partition refines: contamination from nearby fibers
    then decays, while pairs reflecting genuine multiple fibers (coordinates
    exactly equal) survive every tolerance.  schedule="fixed" keeps tol as
    given for diagnostic runs.
    """
    radii = [float(r) for r in radii]
    if not radii:
        raise ValueError("empty radius ladder")
    if schedule not in ("quadratic", "fixed"):
        raise ValueError("schedule must be 'quadratic' or 'fixed'")
    out = []
    for r in radii:
        tol_r = tol * (radii[0] / r) ** 2 if schedule == "quadratic" else tol
        out.append(
            fiber_collision_sample(
                p, basis, r, tol_r, max_anchors=max_anchors,
                min_pairs=min_pairs, seed=seed,
            )
        )
    return out
