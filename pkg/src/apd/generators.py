"""Constructors for the example patterns: periodic lattices, substitution
sequences and cut & project chains.

Substitution systems rewrite letters into words and realize words as tilings
of the line whose left tile endpoints form the point pattern.  Cut & project
schemes embed Z^2 by an invertible basis whose rows are the physical and
internal coordinates; lattice points whose internal coordinate falls in the
acceptance window project to the chain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .pointset import DELTA_EQ, Box, PointPattern

TAU = (1.0 + math.sqrt(5.0)) / 2.0
TAU_CONJ = 1.0 - TAU  # algebraic conjugate (1 - sqrt 5)/2

# Character basis of the Fibonacci chain's continuous eigenvalue group,
# computed from the dual of the canonical embedding lattice below:
# dual generators project to 1/(tau+2) and tau/(tau+2) in physical space.
FIBONACCI_EIGEN_BASIS = (1.0 / (TAU + 2.0), TAU / (TAU + 2.0))


class SubstitutionSystem:
    """Primitive substitution on a finite alphabet of single-letter symbols.

    rules maps each symbol to a nonempty image word; tile_lengths assigns the
    geometric length of each letter's tile (default 1).  Primitivity (some
    power maps every letter to a word containing every letter) is checked at
    construction.  constant_length is set automatically when all images share
    one symbolic length.
    """

    def __init__(
        self,
        alphabet,
        rules: dict[str, str],
        tile_lengths: dict[str, float] | None = None,
        name: str = "",
    ):
        alphabet = tuple(alphabet)
        if not alphabet:
            raise ValueError("alphabet is empty")
        if any(len(a) != 1 for a in alphabet):
            raise ValueError("symbols must be single characters")
        if len(set(alphabet)) != len(alphabet):
            raise ValueError("alphabet has repeated symbols")
        symbols = set(alphabet)
        if set(rules) != symbols:
            raise ValueError("rules must cover exactly the alphabet")
        for a, img in rules.items():
            if not img:
                raise ValueError(f"rule image of {a!r} is empty")
            if not set(img) <= symbols:
                raise ValueError(f"rule image of {a!r} uses unknown symbols")
        if tile_lengths is None:
            tile_lengths = {a: 1.0 for a in alphabet}
        if set(tile_lengths) != symbols:
            raise ValueError("tile_lengths must cover exactly the alphabet")
        if any(l <= 0 for l in tile_lengths.values()):
            raise ValueError("tile lengths must be positive")

        self.alphabet = alphabet
        self.rules = dict(rules)
        self.tile_lengths = {a: float(l) for a, l in tile_lengths.items()}
        self.name = name
        lengths = {len(img) for img in rules.values()}
        self.constant_length = lengths.pop() if len(lengths) == 1 else None
        if not self._is_primitive():
            raise ValueError("substitution is not primitive")

    def incidence_matrix(self) -> np.ndarray:
        """M[i, j] = occurrences of letter i in the image of letter j."""
        n = len(self.alphabet)
        idx = {a: i for i, a in enumerate(self.alphabet)}
        m = np.zeros((n, n), dtype=np.int64)
        for j, a in enumerate(self.alphabet):
            for c in self.rules[a]:
                m[idx[c], j] += 1
        return m

    def _is_primitive(self) -> bool:
        # some single power of the incidence matrix must be entrywise positive
        # (irreducibility alone is not enough: a pure letter swap fails);
        # Wielandt: it happens within (n-1)^2 + 1 powers or never
        reach = self.incidence_matrix() > 0
        power = reach.copy()
        n = len(self.alphabet)
        for _ in range((n - 1) ** 2 + 1):
            if power.all():
                return True
            power = power @ reach
        return bool(power.all())

    def substitute(self, seed: str, iterations: int) -> str:
        """Apply the rewrite `iterations` times to the seed word."""
        if iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not seed:
            raise ValueError("seed word is empty")
        bad = set(seed) - set(self.alphabet)
        if bad:
            raise ValueError(f"symbol(s) {sorted(bad)} not in alphabet")
        word = seed
        for _ in range(iterations):
            word = "".join(self.rules[c] for c in word)
        return word

    def realize(
        self,
        word: str,
        origin: float = 0.0,
        select: set[str] | None = None,
        label: str | None = None,
    ) -> PointPattern:
        """Lay the word's tiles left to right from `origin` and emit the left
        endpoint of every tile whose symbol is selected (default: all)."""
        if not word:
            raise ValueError("word is empty")
        bad = set(word) - set(self.alphabet)
        if bad:
            raise ValueError(f"symbol(s) {sorted(bad)} not in alphabet")
        if select is not None:
            select = set(select)
            if not select:
                raise ValueError("empty selection yields an empty pattern")
        # positions from exact integer tile counts, not a running float sum:
        # error stays at a few ulp regardless of word length
        codes = np.frombuffer(word.encode(), dtype=np.uint8)
        lefts = np.full(len(word), float(origin))
        total = 0.0
        for sym in self.alphabet:
            mask = codes == ord(sym)
            count = np.cumsum(mask)
            lefts += self.tile_lengths[sym] * (count - mask)
            total += self.tile_lengths[sym] * int(count[-1])
        if select is not None:
            keep = np.isin(codes, [ord(s) for s in select])
            lefts = lefts[keep]
        if len(lefts) == 0:
            raise ValueError("selection matches no tile")
        win = Box((origin,), (origin + total,))
        return PointPattern(
            1, lefts, win, label if label is not None else (self.name or "substitution")
        )

    def bi_infinite_seed(self, max_power: int = 4) -> tuple[str, str, int]:
        """A seed pair (left, right) and power p with sigma^p(left) ending in
        left and sigma^p(right) starting with right; realizing
        sigma^(p k)(left).sigma^(p k)(right) around the origin then nests as k
        grows."""
        candidates = []
        for power in range(1, max_power + 1):
            images = {a: self.substitute(a, power) for a in self.alphabet}
            lefts = [a for a in self.alphabet if images[a].endswith(a)]
            rights = [b for b in self.alphabet if images[b].startswith(b)]
            candidates.append((power, lefts, rights))
            if lefts and rights:
                return lefts[0], rights[0], power
        raise ValueError(
            f"no two-sided seed up to power {max_power}; candidates per power: "
            + "; ".join(
                f"p={p}: left-fixing {l or '-'}, right-fixing {r or '-'}"
                for p, l, r in candidates
            )
        )

    def realize_two_sided(
        self,
        left: str,
        right: str,
        iterations: int,
        select: set[str] | None = None,
        label: str | None = None,
    ) -> PointPattern:
        """Realize sigma^iterations(left).sigma^iterations(right) with the
        junction at the origin (left word ends at 0, right word starts at 0).

        Nested growth as iterations increase requires (left, right) to be a
        valid seed pair, see bi_infinite_seed.
        """
        lw = self.substitute(left, iterations)
        rw = self.substitute(right, iterations)
        left_total = sum(self.tile_lengths[c] for c in lw)
        p = self.realize(lw + rw, origin=-left_total, select=select, label=label)
        return p

    def as_dict(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "rules": dict(self.rules),
            "lengths": dict(self.tile_lengths),
        }

    @classmethod
    def from_json(cls, doc: dict | str, name: str = "custom") -> "SubstitutionSystem":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls(
            doc["alphabet"],
            doc["rules"],
            doc.get("lengths"),
            name=doc.get("name", name),
        )

    def __repr__(self) -> str:
        rules = ", ".join(f"{a}->{w}" for a, w in self.rules.items())
        return f"SubstitutionSystem({self.name or rules})"


def lattice(dimension: int, spacings, window: Box, label: str = "lattice") -> PointPattern:
    """All points of the product lattice spacing_i * Z inside the window."""
    if dimension not in (1, 2):
        raise ValueError("dimension must be 1 or 2")
    sp = np.atleast_1d(np.asarray(spacings, dtype=float))
    if len(sp) != dimension:
        raise ValueError("one spacing per dimension required")
    if np.any(sp <= 0):
        raise ValueError("spacings must be > 0")
    axes = []
    for s, lo, hi in zip(sp, window.lo, window.hi):
        n0 = math.ceil((lo - DELTA_EQ) / s)
        n1 = math.floor((hi + DELTA_EQ) / s)
        if n1 < n0:
            raise ValueError("window too small to contain any lattice point")
        axes.append(s * np.arange(n0, n1 + 1))
    if dimension == 1:
        pts = axes[0]
    else:
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
    return PointPattern(dimension, pts, window, label)


class CutProjectScheme:
    """One-dimensional cut & project scheme over Z^2.

    basis columns are the two lattice generators in (physical, internal)
    coordinates; window = (lo, hi) is the acceptance interval in internal
    space, half-open [lo, hi) by default ("closed" includes both ends).  The
    boundary of an interval always has measure zero, so schemes built here
    are regular; the flag is kept for report metadata.

    With validate=True (default) the construction checks, on a large lattice
    sample, that the physical projection is injective on the lattice and that
    the internal projection is dense (the acceptance condition is meaningless
    otherwise).
    """

    def __init__(
        self,
        basis,
        window: tuple[float, float],
        closure: str = "half-open",
        name: str = "",
        validate: bool = True,
    ):
        b = np.asarray(basis, dtype=float)
        if b.shape != (2, 2):
            raise ValueError("basis must be a 2x2 matrix")
        if abs(np.linalg.det(b)) < 1e-12:
            raise ValueError("degenerate lattice basis")
        lo, hi = float(window[0]), float(window[1])
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("acceptance window must be bounded")
        if hi - lo <= 0:
            raise ValueError("acceptance window has empty interior")
        if closure not in ("half-open", "closed"):
            raise ValueError("closure must be 'half-open' or 'closed'")
        self.basis = b
        self.basis.setflags(write=False)
        self.window = (lo, hi)
        self.closure = closure
        self.name = name
        self.regular = True
        if validate:
            self._validate_projections()

    def _validate_projections(self, span: int = 35) -> None:
        m, n = np.meshgrid(np.arange(-span, span + 1), np.arange(-span, span + 1))
        mn = np.column_stack([m.ravel(), n.ravel()])
        phys, internal = (self.basis @ mn.T)
        phys = np.sort(phys)
        if np.min(np.diff(phys)) < DELTA_EQ:
            raise ValueError("physical projection is not injective on the lattice")
        # density of the internal projection <=> irrational slope of the
        # internal row; test: fractional parts of n * (i2/i1) leave no gap
        i1, i2 = self.basis[1]
        if abs(i1) < abs(i2):
            i1, i2 = i2, i1
        if abs(i1) < 1e-12:
            raise ValueError("internal projection is not dense (degenerate row)")
        frac = np.sort(np.mod(np.arange(1, 400) * (i2 / i1), 1.0))
        gaps = np.diff(np.concatenate([frac, [frac[0] + 1.0]]))
        if np.max(gaps) > 0.05:
            raise ValueError(
                "internal projection is not dense (rational dependence detected)"
            )
        del internal

    def star_map(self, m: int, n: int) -> tuple[float, float]:
        """Physical and internal coordinates of the lattice point (m, n)."""
        phys, internal = self.basis @ np.array([m, n], dtype=float)
        return float(phys), float(internal)

    def accepts(self, internal: float) -> bool:
        lo, hi = self.window
        if self.closure == "closed":
            return (internal >= lo - DELTA_EQ) and (internal <= hi + DELTA_EQ)
        return (internal >= lo - DELTA_EQ) and (internal < hi - DELTA_EQ)

    def cut_project(
        self, physical_window: tuple[float, float], label: str | None = None
    ) -> PointPattern:
        """Chain of physical coordinates of lattice points accepted by the
        internal window, restricted to the physical window.

        Enumeration bounds: with basis rows (p1 p2; q1 q2), a lattice point
        (m, n) satisfies p1 m + p2 n in [P0, P1] and q1 m + q2 n in [W0, W1].
        Eliminating m via the inverse basis gives
            n in [min, max] of (B^-1 (P, W)) over the four corner pairs,
        and for each integer n both rows constrain m to an interval whose
        integer points are enumerated directly.
        """
        p0, p1 = float(physical_window[0]), float(physical_window[1])
        if not (math.isfinite(p0) and math.isfinite(p1) and p1 > p0):
            raise ValueError("physical window must be a bounded interval")
        w0, w1 = self.window
        inv = np.linalg.inv(self.basis)
        corners = np.array([[p, w] for p in (p0, p1) for w in (w0, w1)])
        mn = corners @ inv.T
        n_lo = math.floor(mn[:, 1].min()) - 1
        n_hi = math.ceil(mn[:, 1].max()) + 1
        (b00, b01), (b10, b11) = self.basis
        points = []
        for n in range(n_lo, n_hi + 1):
            m_lo, m_hi = -math.inf, math.inf
            feasible = True
            for (c0, c1, lo, hi) in ((b00, b01, p0, p1), (b10, b11, w0, w1)):
                rest_lo, rest_hi = lo - c1 * n, hi - c1 * n
                if abs(c0) < 1e-15:
                    if rest_lo > DELTA_EQ or rest_hi < -DELTA_EQ:
                        feasible = False
                        break
                    continue
                a, b = rest_lo / c0, rest_hi / c0
                if a > b:
                    a, b = b, a
                m_lo, m_hi = max(m_lo, a), min(m_hi, b)
            if not feasible or m_lo > m_hi + 1:
                continue
            for m in range(math.ceil(m_lo - 1), math.floor(m_hi + 1) + 1):
                phys = b00 * m + b01 * n
                internal = b10 * m + b11 * n
                if phys < p0 - DELTA_EQ or phys > p1 + DELTA_EQ:
                    continue
                if self.accepts(internal):
                    points.append(phys)
        if not points:
            raise ValueError("no lattice point accepted in this physical window")
        win = Box((p0,), (p1,))
        return PointPattern(1, points, win, label or (self.name or "cut-project"))

    def as_dict(self) -> dict:
        return {
            "basis": self.basis.tolist(),
            "window": [self.window[0], self.window[1], self.closure],
            "regular": self.regular,
        }

    @classmethod
    def from_json(cls, doc: dict | str, name: str = "custom") -> "CutProjectScheme":
        if isinstance(doc, str):
            doc = json.loads(doc)
        w = doc["window"]
        closure = w[2] if len(w) > 2 else "half-open"
        return cls(doc["basis"], (w[0], w[1]), closure=closure, name=name)

    def __repr__(self) -> str:
        return (
            f"CutProjectScheme({self.name or self.basis.tolist()}, "
            f"window={self.window}, {self.closure})"
        )


# ---------------------------------------------------------------------------
# presets


def thue_morse() -> SubstitutionSystem:
    return SubstitutionSystem(
        "01", {"0": "0110", "1": "1001"}, {"0": 1.0, "1": 1.0}, name="thue_morse"
    )


def fibonacci_sub() -> SubstitutionSystem:
    return SubstitutionSystem(
        "ab", {"a": "ab", "b": "a"}, {"a": TAU, "b": 1.0}, name="fibonacci_sub"
    )


def period_doubling() -> SubstitutionSystem:
    return SubstitutionSystem(
        "ab", {"a": "ab", "b": "aa"}, {"a": 1.0, "b": 1.0}, name="period_doubling"
    )


def fibonacci_cp() -> CutProjectScheme:
    """Canonical Fibonacci scheme: lattice generated by (1, 1) and
    (tau, tau'), acceptance window [-1, tau-1).  Chosen so the projected
    chain's gaps are exactly {1, tau} and 0 belongs to the chain; the
    half-open window avoids double boundary hits."""
    return CutProjectScheme(
        [[1.0, TAU], [1.0, TAU_CONJ]],
        (-1.0, TAU - 1.0),
        closure="half-open",
        name="fibonacci_cp",
    )


SUBSTITUTION_PRESETS = {
    "thue_morse": thue_morse,
    "fibonacci_sub": fibonacci_sub,
    "period_doubling": period_doubling,
}

SCHEME_PRESETS = {
    "fibonacci_cp": fibonacci_cp,
}


def thue_morse_ones(iterations: int, label: str = "thue_morse_ones") -> PointPattern:
    """Positions of the digit 1 in the Thue-Morse expansion of '0'."""
    s = thue_morse()
    return s.realize(s.substitute("0", iterations), select={"1"}, label=label)


def fibonacci_chain(iterations: int, label: str = "fibonacci_chain") -> PointPattern:
    """Left tile endpoints of the Fibonacci tiling from seed 'a'."""
    s = fibonacci_sub()
    return s.realize(s.substitute("a", iterations), label=label)
