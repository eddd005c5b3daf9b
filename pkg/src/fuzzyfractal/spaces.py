"""Metric space backends, compact point sets, and the Hausdorff-Pompeiu metric.

Two backends are supported: a finite point set with an explicit distance
matrix (exact computations) and a uniform 2-D Euclidean grid (rendering
target). Compact sets are finite sets of point ids in either backend.
"""

import math
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

MAX_FINITE_POINTS = 64
_METRIC_TOL = 1e-9


class SpaceError(ValueError):
    """Invalid space construction or mismatched space operands."""


class ConvergenceError(RuntimeError):
    """A sequence failed to settle within the allowed budget."""


class FiniteSpace:
    """Finite metric space given by point labels and a full distance matrix.

    The matrix is validated at construction: symmetric, zero exactly on the
    diagonal, non-negative, and triangle inequality over all triples.
    """

    def __init__(self, labels: Sequence[str], dist):
        labels = tuple(labels)
        if len(labels) == 0:
            raise SpaceError("finite space needs at least one point")
        if len(labels) > MAX_FINITE_POINTS:
            raise SpaceError(f"finite space limited to {MAX_FINITE_POINTS} points")
        if len(set(labels)) != len(labels):
            raise SpaceError("duplicate point labels")
        mat = np.asarray(dist, dtype=float)
        n = len(labels)
        if mat.shape != (n, n):
            raise SpaceError(f"distance matrix must be {n}x{n}")
        if np.any(mat < 0):
            raise SpaceError("negative distance")
        if np.any(np.abs(mat - mat.T) > _METRIC_TOL):
            raise SpaceError("distance matrix not symmetric")
        if np.any(np.diagonal(mat) != 0.0):
            raise SpaceError("diagonal must be exactly zero")
        for i in range(n):
            for j in range(i + 1, n):
                if mat[i, j] == 0.0:
                    raise SpaceError(f"zero distance between distinct points {labels[i]}, {labels[j]}")
        # O(n^3) exhaustive triangle check; fine at <= 64 points.
        for k in range(n):
            viol = mat - (mat[:, k:k + 1] + mat[k:k + 1, :])
            if np.any(viol > _METRIC_TOL):
                i, j = np.unravel_index(np.argmax(viol), viol.shape)
                raise SpaceError(
                    f"triangle inequality fails: d({labels[i]},{labels[j]}) > "
                    f"d({labels[i]},{labels[k]}) + d({labels[k]},{labels[j]})")
        self.labels = labels
        self._index = {lab: i for i, lab in enumerate(labels)}
        self.matrix = mat
        self.matrix.setflags(write=False)

    @classmethod
    def from_lower_triangle(cls, labels, rows):
        """Build from a lower-triangular listing: row i holds d(labels[i], labels[j]) for j < i."""
        n = len(labels)
        if len(rows) != n - 1:
            raise SpaceError(f"expected {n - 1} lower-triangle rows, got {len(rows)}")
        mat = np.zeros((n, n))
        for i, row in enumerate(rows, start=1):
            if len(row) != i:
                raise SpaceError(f"row {i} must have {i} entries")
            for j, v in enumerate(row):
                mat[i, j] = mat[j, i] = float(v)
        return cls(labels, mat)

    @classmethod
    def from_coordinates(cls, labels, coords):
        """Euclidean embedding; the triangle inequality then holds by construction."""
        pts = np.asarray(coords, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        diff = pts[:, None, :] - pts[None, :, :]
        mat = np.sqrt((diff * diff).sum(axis=-1))
        np.fill_diagonal(mat, 0.0)
        return cls(labels, mat)

    @property
    def points(self):
        return self.labels

    def contains(self, p) -> bool:
        return p in self._index

    def index(self, p) -> int:
        try:
            return self._index[p]
        except KeyError:
            raise SpaceError(f"unknown point {p!r}") from None

    def distance(self, p, q) -> float:
        return float(self.matrix[self.index(p), self.index(q)])

    def __eq__(self, other):
        return (isinstance(other, FiniteSpace) and self.labels == other.labels
                and np.array_equal(self.matrix, other.matrix))

    def __repr__(self):
        return f"FiniteSpace({len(self.labels)} points)"


class GridSpace:
    """Uniform 2-D grid; points are (col, row) pairs, metric is Euclidean.

    Point (col, row) sits at origin + spacing * (col, row).
    """

    def __init__(self, origin=(0.0, 0.0), spacing=1.0, width=1, height=1):
        if spacing <= 0:
            raise SpaceError("spacing must be positive")
        if width < 1 or height < 1:
            raise SpaceError("grid must have positive width and height")
        self.origin = (float(origin[0]), float(origin[1]))
        self.spacing = float(spacing)
        self.width = int(width)
        self.height = int(height)

    @property
    def points(self):
        return [(c, r) for r in range(self.height) for c in range(self.width)]

    def contains(self, p) -> bool:
        try:
            c, r = p
        except (TypeError, ValueError):
            return False
        return (isinstance(c, (int, np.integer)) and isinstance(r, (int, np.integer))
                and 0 <= c < self.width and 0 <= r < self.height)

    def check(self, p):
        if not self.contains(p):
            raise SpaceError(f"point {p!r} not on grid")
        return (int(p[0]), int(p[1]))

    def coords(self, p):
        c, r = self.check(p)
        return (self.origin[0] + self.spacing * c, self.origin[1] + self.spacing * r)

    def distance(self, p, q) -> float:
        pc, pr = self.check(p)
        qc, qr = self.check(q)
        return self.spacing * math.hypot(pc - qc, pr - qr)

    def snap(self, xy):
        """Nearest grid point to a real coordinate; ties break toward smaller col, then row.

        Raises SpaceError when the coordinate leaves the grid rectangle.
        """
        tc = (xy[0] - self.origin[0]) / self.spacing
        tr = (xy[1] - self.origin[1]) / self.spacing
        slack = _METRIC_TOL
        if tc < -slack or tc > self.width - 1 + slack or tr < -slack or tr > self.height - 1 + slack:
            raise SpaceError(f"coordinate {xy!r} outside grid rectangle")
        c = min(max(int(math.ceil(tc - 0.5)), 0), self.width - 1)
        r = min(max(int(math.ceil(tr - 0.5)), 0), self.height - 1)
        return (c, r)

    def diameter(self) -> float:
        return self.spacing * math.hypot(self.width - 1, self.height - 1)

    def coord_array(self, points):
        """(n, 2) array of real coordinates for an iterable of grid points."""
        idx = np.asarray([(p[0], p[1]) for p in points], dtype=float)
        return np.asarray(self.origin) + self.spacing * idx

    def __eq__(self, other):
        return (isinstance(other, GridSpace) and self.origin == other.origin
                and self.spacing == other.spacing and self.width == other.width
                and self.height == other.height)

    def __repr__(self):
        return f"GridSpace({self.width}x{self.height}, spacing={self.spacing})"


class CompactSet:
    """Non-empty finite set of points of one space; the hyperspace element."""

    __slots__ = ("space", "members")

    def __init__(self, space, members: Iterable):
        members = frozenset(members)
        if not members:
            raise SpaceError("compact set must be non-empty")
        for p in members:
            if not space.contains(p):
                raise SpaceError(f"point {p!r} not in space")
        if isinstance(space, GridSpace):
            members = frozenset((int(c), int(r)) for c, r in members)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "members", members)

    def __setattr__(self, name, value):
        raise AttributeError("CompactSet is immutable")

    def __contains__(self, p):
        return p in self.members

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __eq__(self, other):
        return (isinstance(other, CompactSet) and self.space == other.space
                and self.members == other.members)

    def __hash__(self):
        return hash(self.members)

    def sorted_members(self):
        return sorted(self.members)

    def union(self, other):
        if self.space != other.space:
            raise SpaceError("union across different spaces")
        return CompactSet(self.space, self.members | other.members)

    def issubset(self, other) -> bool:
        return self.members <= other.members

    def __repr__(self):
        shown = self.sorted_members()[:6]
        more = "..." if len(self.members) > 6 else ""
        return f"CompactSet({shown}{more})"


def point_distance(space, p, q) -> float:
    """d(p, q) in the given space."""
    return space.distance(p, q)


def set_distance(x, K: CompactSet) -> float:
    """Distance from a point to a compact set: min over members."""
    space = K.space
    if isinstance(space, GridSpace):
        c, r = space.check(x)
        arr = np.asarray(list(K.members), dtype=float)
        d = np.hypot(arr[:, 0] - c, arr[:, 1] - r)
        return space.spacing * float(d.min())
    return min(space.distance(x, q) for q in K.members)


def diameter(K: CompactSet) -> float:
    """Largest pairwise distance within the set."""
    space = K.space
    if isinstance(space, GridSpace):
        arr = np.asarray(list(K.members), dtype=float)
        if len(arr) == 1:
            return 0.0
        diff = arr[:, None, :] - arr[None, :, :]
        return space.spacing * float(np.sqrt((diff * diff).sum(-1)).max())
    pts = list(K.members)
    best = 0.0
    for i, p in enumerate(pts):
        for q in pts[i + 1:]:
            best = max(best, space.distance(p, q))
    return best


def hausdorff(K1: CompactSet, K2: CompactSet) -> float:
    """Hausdorff-Pompeiu distance: max of the two directed sup-min terms."""
    if K1.space != K2.space:
        raise SpaceError("hausdorff over different spaces")
    space = K1.space
    if K1.members == K2.members:
        return 0.0
    if isinstance(space, FiniteSpace):
        i1 = [space.index(p) for p in K1.members]
        i2 = [space.index(p) for p in K2.members]
        sub = space.matrix[np.ix_(i1, i2)]
        return float(max(sub.min(axis=1).max(), sub.min(axis=0).max()))
    a = space.coord_array(K1.members)
    b = space.coord_array(K2.members)
    if len(a) * len(b) <= 250_000:
        diff = a[:, None, :] - b[None, :, :]
        d = np.sqrt((diff * diff).sum(-1))
        return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
    d_ab, _ = cKDTree(b).query(a, k=1)
    d_ba, _ = cKDTree(a).query(b, k=1)
    return float(max(d_ab.max(), d_ba.max()))


class HyperspaceLimit:
    """Outcome of scanning a compact-set sequence for a settled tail."""

    def __init__(self, limit, increment, steps, exact):
        self.limit = limit
        self.increment = increment
        self.steps = steps
        self.exact = exact

    def __repr__(self):
        tag = "exact" if self.exact else f"increment={self.increment:g}"
        return f"HyperspaceLimit(steps={self.steps}, {tag})"


def hyperspace_limit(sets: Sequence[CompactSet], tol: float) -> HyperspaceLimit:
    """First term of the sequence whose step to the next falls below tol.

    Equal consecutive sets give the exact limit. Raises ConvergenceError when
    no consecutive pair gets below tol within the supplied sequence.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not sets:
        raise ValueError("empty sequence")
    if len(sets) == 1:
        raise ConvergenceError("need at least two terms to detect a settled tail")
    for n in range(len(sets) - 1):
        inc = hausdorff(sets[n], sets[n + 1])
        if inc == 0.0:
            return HyperspaceLimit(sets[n + 1], 0.0, n + 1, True)
        if inc < tol:
            return HyperspaceLimit(sets[n + 1], inc, n + 1, False)
    raise ConvergenceError(
        f"no consecutive increment below {tol:g} within {len(sets)} terms")
