"""Quantized fuzzy sets, grey-level maps, and the fuzzy set-image machinery.

Membership values live on the lattice {0, 1/L, ..., 1} and are stored as
integer ticks, so set-level identities can be checked exactly. Grid-backed
sets are dense integer arrays indexed [row, col]; finite-backed sets keep a
sparse point -> tick dict over the support.
"""

import math
from typing import Iterable, Sequence

import numpy as np
from scipy.ndimage import distance_transform_edt

from .ifs import IfsSystem
from .spaces import CompactSet, GridSpace, SpaceError, hausdorff

DEFAULT_LEVELS = 255


class FuzzyError(ValueError):
    """Malformed fuzzy set, grey map, or system."""


def quantize(value: float, levels: int) -> int:
    """Nearest lattice tick for a membership value; ties round up."""
    if value <= 0.0:
        return 0
    if value >= 1.0:
        return levels
    return min(levels, int(math.floor(value * levels + 0.5)))


class FuzzySet:
    """Membership function with quantized values over one space backend."""

    def __init__(self, space, levels: int, data):
        if levels < 1:
            raise FuzzyError("levels must be >= 1")
        self.space = space
        self.levels = int(levels)
        if isinstance(space, GridSpace):
            arr = np.asarray(data, dtype=np.int32)
            if arr.shape != (space.height, space.width):
                raise FuzzyError(f"grid data must be {space.height}x{space.width}")
            if arr.min() < 0 or arr.max() > levels:
                raise FuzzyError("tick outside [0, levels]")
            arr = arr.copy()
            arr.setflags(write=False)
            self.data = arr
        else:
            clean = {}
            for p, k in dict(data).items():
                if not space.contains(p):
                    raise FuzzyError(f"point {p!r} not in space")
                k = int(k)
                if k < 0 or k > levels:
                    raise FuzzyError("tick outside [0, levels]")
                if k > 0:
                    clean[p] = k
            self.data = clean

    @property
    def is_grid(self) -> bool:
        return isinstance(self.space, GridSpace)

    @classmethod
    def from_ticks(cls, space, levels, mapping):
        if isinstance(space, GridSpace):
            arr = np.zeros((space.height, space.width), dtype=np.int32)
            for p, k in mapping.items():
                c, r = space.check(p)
                arr[r, c] = int(k)
            return cls(space, levels, arr)
        return cls(space, levels, mapping)

    @classmethod
    def from_values(cls, space, levels, mapping):
        """Quantize a point -> float mapping onto the tick lattice."""
        return cls.from_ticks(space, levels,
                              {p: quantize(v, levels) for p, v in mapping.items()})

    def tick(self, p) -> int:
        if self.is_grid:
            c, r = self.space.check(p)
            return int(self.data[r, c])
        return self.data.get(p, 0)

    def value(self, p) -> float:
        return self.tick(p) / self.levels

    def max_tick(self) -> int:
        if self.is_grid:
            return int(self.data.max())
        return max(self.data.values(), default=0)

    @property
    def is_normal(self) -> bool:
        return self.max_tick() == self.levels

    def attained_ticks(self):
        """Sorted positive ticks actually taken somewhere."""
        if self.is_grid:
            ticks = np.unique(self.data)
            return [int(k) for k in ticks if k > 0]
        return sorted(set(self.data.values()))

    def cut(self, k: int) -> CompactSet:
        """Points with tick >= k, for k in 1..levels."""
        if not 1 <= k <= self.levels:
            raise FuzzyError(f"cut tick {k} outside 1..{self.levels}")
        if self.is_grid:
            rows, cols = np.nonzero(self.data >= k)
            if len(rows) == 0:
                raise FuzzyError(f"empty cut at tick {k} (set not normal)")
            return CompactSet(self.space, zip(cols.tolist(), rows.tolist()))
        pts = [p for p, t in self.data.items() if t >= k]
        if not pts:
            raise FuzzyError(f"empty cut at tick {k} (set not normal)")
        return CompactSet(self.space, pts)

    def support_points(self):
        if self.is_grid:
            rows, cols = np.nonzero(self.data)
            return list(zip(cols.tolist(), rows.tolist()))
        return list(self.data.keys())

    def to_tick_dict(self) -> dict:
        """Sparse point -> tick view of the support."""
        if self.is_grid:
            rows, cols = np.nonzero(self.data)
            return {(int(c), int(r)): int(self.data[r, c]) for c, r in zip(cols, rows)}
        return dict(self.data)

    def __eq__(self, other):
        if not isinstance(other, FuzzySet):
            return NotImplemented
        if self.space != other.space or self.levels != other.levels:
            return False
        if self.is_grid:
            return np.array_equal(self.data, other.data)
        return self.data == other.data

    def __hash__(self):
        return hash(frozenset(self.to_tick_dict().items()))

    def __repr__(self):
        supp = self.support_points()
        return f"FuzzySet(L={self.levels}, |supp|={len(supp)})"


def delta(space, x, levels: int = DEFAULT_LEVELS) -> FuzzySet:
    """Full membership at one point, zero elsewhere."""
    if not space.contains(x):
        raise SpaceError(f"point {x!r} not in space")
    return FuzzySet.from_ticks(space, levels, {x: levels})


def indicator(space, points, levels: int = DEFAULT_LEVELS) -> FuzzySet:
    """Crisp set as a fuzzy set: tick L on the given points."""
    pts = list(points.members) if isinstance(points, CompactSet) else list(points)
    if not pts:
        raise FuzzyError("indicator needs at least one point")
    return FuzzySet.from_ticks(space, levels, {p: levels for p in pts})


def ramp(space, center, radius: float, levels: int = DEFAULT_LEVELS) -> FuzzySet:
    """Cone of membership 1 - d(x, center)/radius, clipped to [0, 1]."""
    if radius <= 0:
        raise FuzzyError("radius must be positive")
    if not space.contains(center):
        raise SpaceError(f"point {center!r} not in space")
    vals = {}
    for p in space.points:
        v = 1.0 - space.distance(p, center) / radius
        if v > 0:
            vals[p] = v
    return FuzzySet.from_values(space, levels, vals)


def support(u: FuzzySet) -> CompactSet:
    """Points with positive membership (closed already on these backends)."""
    pts = u.support_points()
    if not pts:
        raise FuzzyError("all-zero fuzzy set has no support")
    return CompactSet(u.space, pts)


def level_set(u: FuzzySet, alpha: float) -> CompactSet:
    """The cut {u >= alpha} for alpha in (0, 1]."""
    if not 0.0 < alpha <= 1.0:
        raise FuzzyError("alpha must lie in (0, 1]")
    k = max(1, int(math.ceil(alpha * u.levels - 1e-9)))
    return u.cut(k)


def core(u: FuzzySet) -> CompactSet:
    """The tick-L cut: points with full membership."""
    return u.cut(u.levels)


def pushforward(f, u: FuzzySet) -> FuzzySet:
    """Fuzzy image under a map: value at y is the max of u over the preimage."""
    if f.space != u.space:
        raise SpaceError("map and fuzzy set live on different spaces")
    if u.is_grid:
        out = np.zeros_like(u.data)
        rows, cols = np.nonzero(u.data)
        if len(rows):
            pts = list(zip(cols.tolist(), rows.tolist()))
            imgs = f.apply_points(pts)
            vals = u.data[rows, cols]
            ic = np.fromiter((p[0] for p in imgs), dtype=np.int64, count=len(imgs))
            ir = np.fromiter((p[1] for p in imgs), dtype=np.int64, count=len(imgs))
            np.maximum.at(out, (ir, ic), vals)
        return FuzzySet(u.space, u.levels, out)
    out = {}
    for p, k in u.data.items():
        q = f(p)
        if k > out.get(q, 0):
            out[q] = k
    return FuzzySet(u.space, u.levels, out)


class PiecewiseLinearGrey:
    """Non-decreasing right-continuous map of [0,1] built from linear pieces.

    Segment k covers [breaks[k], breaks[k+1]) running linearly from
    starts[k] to ends[k] (the end value is a one-sided limit, not attained);
    the value at 1 is explicit. rho(0) = 0 is enforced structurally.
    """

    def __init__(self, breaks: Sequence[float], starts: Sequence[float],
                 ends: Sequence[float], at_one: float):
        breaks = [float(t) for t in breaks]
        starts = [float(v) for v in starts]
        ends = [float(v) for v in ends]
        if len(breaks) < 2 or breaks[0] != 0.0 or breaks[-1] != 1.0:
            raise FuzzyError("breakpoints must run from 0 to 1")
        if any(b >= c for b, c in zip(breaks, breaks[1:])):
            raise FuzzyError("breakpoints must be strictly increasing")
        if len(starts) != len(breaks) - 1 or len(ends) != len(starts):
            raise FuzzyError("need one (start, end) pair per segment")
        allv = starts + ends + [at_one]
        if any(v < 0 or v > 1 for v in allv):
            raise FuzzyError("grey values must lie in [0, 1]")
        if starts[0] != 0.0:
            raise FuzzyError("grey map must send 0 to 0")
        for a, b in zip(starts, ends):
            if b < a:
                raise FuzzyError("segment decreases")
        for b_prev, a_next in zip(ends, starts[1:]):
            if a_next < b_prev:
                raise FuzzyError("downward jump between segments")
        if at_one < ends[-1]:
            raise FuzzyError("value at 1 below the last segment")
        if max(allv) == 0.0:
            raise FuzzyError("grey map must not be identically zero")
        self.breaks = tuple(breaks)
        self.starts = tuple(starts)
        self.ends = tuple(ends)
        self.at_one = float(at_one)

    @classmethod
    def identity(cls):
        return cls([0.0, 1.0], [0.0], [1.0], 1.0)

    @classmethod
    def step(cls, threshold: float):
        """0 below the threshold, 1 from the threshold on."""
        if not 0.0 < threshold < 1.0:
            raise FuzzyError("threshold must lie strictly inside (0, 1)")
        return cls([0.0, threshold, 1.0], [0.0, 1.0], [0.0, 1.0], 1.0)

    @classmethod
    def scale(cls, gain: float):
        """t -> gain * t."""
        if not 0.0 < gain <= 1.0:
            raise FuzzyError("gain must lie in (0, 1]")
        return cls([0.0, 1.0], [0.0], [gain], gain)

    def __call__(self, t: float) -> float:
        if not 0.0 <= t <= 1.0:
            raise FuzzyError("grey maps are defined on [0, 1]")
        if t == 1.0:
            return self.at_one
        for k in range(len(self.breaks) - 1):
            lo, hi = self.breaks[k], self.breaks[k + 1]
            if lo <= t < hi:
                return self.starts[k] + (self.ends[k] - self.starts[k]) * (t - lo) / (hi - lo)
        raise FuzzyError(f"value {t} not covered")  # unreachable

    @property
    def fixes_one(self) -> bool:
        return self.at_one == 1.0

    def lookup(self, levels: int) -> np.ndarray:
        return np.asarray([quantize(self(k / levels), levels) for k in range(levels + 1)],
                          dtype=np.int32)

    def spec(self) -> dict:
        return {"kind": "piecewise", "breaks": list(self.breaks),
                "starts": list(self.starts), "ends": list(self.ends),
                "at_one": self.at_one}


class LookupGrey:
    """Grey map given directly as a non-decreasing tick table of length L+1."""

    def __init__(self, levels: int, table: Iterable[int]):
        table = tuple(int(v) for v in table)
        if len(table) != levels + 1:
            raise FuzzyError(f"table must have {levels + 1} entries")
        if table[0] != 0:
            raise FuzzyError("grey map must send 0 to 0")
        if any(v < 0 or v > levels for v in table):
            raise FuzzyError("table value outside 0..levels")
        if any(b < a for a, b in zip(table, table[1:])):
            raise FuzzyError("table must be non-decreasing")
        if max(table) == 0:
            raise FuzzyError("grey map must not be identically zero")
        self.levels = int(levels)
        self.table = table

    @classmethod
    def from_function(cls, levels: int, fn):
        """Sample a [0,1] -> [0,1] function onto the lattice (fn(0) must be 0)."""
        return cls(levels, [quantize(fn(k / levels), levels) for k in range(levels + 1)])

    def __call__(self, t: float) -> float:
        k = quantize(t, self.levels)
        return self.table[k] / self.levels

    @property
    def fixes_one(self) -> bool:
        return self.table[-1] == self.levels

    def lookup(self, levels: int) -> np.ndarray:
        if levels != self.levels:
            raise FuzzyError(f"lookup grey quantized at {self.levels}, system at {levels}")
        return np.asarray(self.table, dtype=np.int32)

    def spec(self) -> dict:
        return {"kind": "table", "values": list(self.table)}


def apply_grey(rho, u: FuzzySet) -> FuzzySet:
    """Compose a grey map with a fuzzy set, re-quantized (ties up)."""
    lut = rho.lookup(u.levels)
    if u.is_grid:
        return FuzzySet(u.space, u.levels, lut[u.data])
    return FuzzySet(u.space, u.levels,
                    {p: int(lut[k]) for p, k in u.data.items() if lut[k] > 0})


def sup_family(us: Sequence[FuzzySet]) -> FuzzySet:
    """Pointwise max of a non-empty finite family on one space."""
    if not us:
        raise FuzzyError("empty family")
    first = us[0]
    for u in us[1:]:
        if u.space != first.space or u.levels != first.levels:
            raise FuzzyError("family must share space and quantization")
    if first.is_grid:
        return FuzzySet(first.space, first.levels,
                        np.maximum.reduce([u.data for u in us]))
    out = {}
    for u in us:
        for p, k in u.data.items():
            if k > out.get(p, 0):
                out[p] = k
    return FuzzySet(first.space, first.levels, out)


class OrbitalFuzzySystem:
    """Certified map system paired with one admissible grey map per map."""

    def __init__(self, ifs: IfsSystem, greys: Sequence, levels: int = DEFAULT_LEVELS):
        if len(greys) != len(ifs.maps):
            raise FuzzyError("need exactly one grey map per system map")
        if not any(g.fixes_one for g in greys):
            raise FuzzyError("inadmissible greys: none fixes 1")
        self.ifs = ifs
        self.greys = tuple(greys)
        self.levels = int(levels)
        self._luts = tuple(g.lookup(self.levels) for g in greys)

    @property
    def space(self):
        return self.ifs.space

    @property
    def maps(self):
        return self.ifs.maps

    @property
    def orbital_factor(self) -> float:
        return self.ifs.orbital_factor

    def __repr__(self):
        return f"OrbitalFuzzySystem({len(self.maps)} maps, L={self.levels})"


def hb_apply(sys: OrbitalFuzzySystem, u: FuzzySet) -> FuzzySet:
    """One application of the fuzzy operator: max over maps of grey(image of u)."""
    if u.space != sys.space:
        raise SpaceError("fuzzy set not on the system's space")
    if u.levels != sys.levels:
        raise FuzzyError("quantization mismatch with the system")
    if u.is_grid:
        acc = None
        for f, lut in zip(sys.maps, sys._luts):
            term = lut[pushforward(f, u).data]
            acc = term if acc is None else np.maximum(acc, term)
        return FuzzySet(u.space, u.levels, acc)
    acc = {}
    for f, lut in zip(sys.maps, sys._luts):
        for p, k in u.data.items():
            q = f(p)
            v = int(lut[k])
            if v > acc.get(q, 0):
                acc[q] = v
    return FuzzySet(u.space, u.levels, acc)


def d_infinity(u: FuzzySet, v: FuzzySet) -> float:
    """Sup over membership levels of the Hausdorff distance between cuts.

    The sup over alpha in (0,1] is a max over the ticks attained by either
    argument: the cut pair is constant between consecutive attained levels.
    Both arguments must be normal so every cut is non-empty.
    """
    if u.space != v.space or u.levels != v.levels:
        raise FuzzyError("operands must share space and quantization")
    if not u.is_normal or not v.is_normal:
        raise FuzzyError("d_infinity needs normal fuzzy sets (some cut would be empty)")
    if u == v:
        return 0.0
    ticks = sorted(set(u.attained_ticks()) | set(v.attained_ticks()))
    if u.is_grid:
        return _d_infinity_grid(u, v, ticks)
    return max(hausdorff(u.cut(k), v.cut(k)) for k in ticks)


def _d_infinity_grid(u: FuzzySet, v: FuzzySet, ticks) -> float:
    """Dense route: per-cut Hausdorff via exact Euclidean distance transforms."""
    best = 0.0
    for k in ticks:
        mu = u.data >= k
        mv = v.data >= k
        if np.array_equal(mu, mv):
            continue
        du = distance_transform_edt(~mu)  # distance to the nearest point of mu
        dv = distance_transform_edt(~mv)
        best = max(best, float(dv[mu].max()), float(du[mv].max()))
    return best * u.space.spacing
