"""Map systems over a space: the set-valued fractal operator, orbits, attractors.

Maps come in two backends matching the spaces: explicit tables on finite
spaces and affine maps (with nearest-point snapping) on grids. A system
carries a certificate that its maps contract along orbits.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .spaces import (CompactSet, ConvergenceError, FiniteSpace, GridSpace,
                     SpaceError, hausdorff)

DEFAULT_ORBIT_DEPTH = 40


class TableMap:
    """Total point-to-point map on a finite space."""

    def __init__(self, space: FiniteSpace, mapping: dict):
        if not isinstance(space, FiniteSpace):
            raise SpaceError("TableMap requires a finite space")
        missing = [p for p in space.labels if p not in mapping]
        if missing:
            raise SpaceError(f"table map misses points {missing}")
        for p, q in mapping.items():
            if not space.contains(p) or not space.contains(q):
                raise SpaceError(f"table entry {p!r} -> {q!r} leaves the space")
        self.space = space
        self.mapping = {p: mapping[p] for p in space.labels}

    def __call__(self, p):
        return self.mapping[p]

    def apply_points(self, pts):
        return [self.mapping[p] for p in pts]

    def __repr__(self):
        return f"TableMap({self.mapping})"


class AffineMap:
    """Affine self-map of a grid: x -> M x + b, snapped to the nearest grid point.

    Snapping ties break toward the smaller column, then the smaller row.
    An image leaving the grid rectangle raises at application time.
    """

    def __init__(self, space: GridSpace, matrix, offset):
        if not isinstance(space, GridSpace):
            raise SpaceError("AffineMap requires a grid space")
        m = np.asarray(matrix, dtype=float)
        if m.shape != (2, 2):
            raise SpaceError("matrix must be 2x2")
        b = np.asarray(offset, dtype=float)
        if b.shape != (2,):
            raise SpaceError("offset must be a pair")
        self.space = space
        self.matrix = m
        self.offset = b

    def operator_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def __call__(self, p):
        x, y = self.space.coords(p)
        img = self.matrix @ np.array([x, y]) + self.offset
        return self.space.snap((img[0], img[1]))

    def apply_points(self, pts):
        space = self.space
        arr = np.asarray([[p[0], p[1]] for p in pts], dtype=float)
        xy = np.asarray(space.origin) + space.spacing * arr
        img = xy @ self.matrix.T + self.offset
        t = (img - np.asarray(space.origin)) / space.spacing
        lo = -1e-9
        if (np.any(t[:, 0] < lo) or np.any(t[:, 0] > space.width - 1 - lo)
                or np.any(t[:, 1] < lo) or np.any(t[:, 1] > space.height - 1 - lo)):
            bad = t[(t[:, 0] < lo) | (t[:, 0] > space.width - 1 - lo)
                    | (t[:, 1] < lo) | (t[:, 1] > space.height - 1 - lo)][0]
            raise SpaceError(f"affine image at grid offset {tuple(bad)} outside grid rectangle")
        snapped = np.ceil(t - 0.5).astype(int)
        snapped[:, 0] = np.clip(snapped[:, 0], 0, space.width - 1)
        snapped[:, 1] = np.clip(snapped[:, 1], 0, space.height - 1)
        return [(int(c), int(r)) for c, r in snapped]

    def __repr__(self):
        return f"AffineMap({self.matrix.tolist()}, {self.offset.tolist()})"


def apply_map(f, p):
    """Image of a single point under a map."""
    return f(p)


@dataclass
class OrbitalCheck:
    """Result of certifying the orbit-wise contraction condition.

    factor is the smallest certified contraction constant; on grids it
    includes a spacing/diameter slack covering snap perturbation. witness
    is (map index, orbit root, y, z) for a violating orbit pair.
    """

    passed: bool
    factor: float
    orbital_ratio: float
    global_ratio: Optional[float]
    kind: str
    witness: Optional[tuple] = None

    @property
    def globally_contractive(self) -> bool:
        return self.global_ratio is not None and self.global_ratio < 1.0


def _orbit_points(space, maps, start):
    """Reachability closure of {start} under all maps (finite spaces)."""
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for p in frontier:
            for f in maps:
                q = f(p)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return seen


def check_orbital_condition(space, maps, declared_c=None) -> OrbitalCheck:
    """Certify d(f_i(y), f_i(z)) <= C d(y, z) for y, z sharing an orbit.

    Finite spaces are scanned exhaustively over every point's orbit; affine
    grid maps are certified analytically through operator norms (a global
    Lipschitz bound implies the orbital one).
    """
    if not maps:
        raise SpaceError("system needs at least one map")
    if isinstance(space, FiniteSpace):
        worst = 0.0
        witness = None
        for x in space.labels:
            orbit_pts = sorted(_orbit_points(space, maps, x))
            for ai, y in enumerate(orbit_pts):
                for z in orbit_pts[ai + 1:]:
                    dyz = space.distance(y, z)
                    for i, f in enumerate(maps):
                        ratio = space.distance(f(y), f(z)) / dyz
                        if ratio > worst:
                            worst = ratio
                            witness = (i, x, y, z)
        global_worst = 0.0
        for ai, y in enumerate(space.labels):
            for z in space.labels[ai + 1:]:
                dyz = space.distance(y, z)
                for f in maps:
                    global_worst = max(global_worst, space.distance(f(y), f(z)) / dyz)
        bound = 1.0 if declared_c is None else declared_c + 1e-12
        passed = worst < bound
        return OrbitalCheck(passed=passed, factor=worst, orbital_ratio=worst,
                            global_ratio=global_worst, kind="exhaustive",
                            witness=None if passed else witness)
    if not all(isinstance(f, AffineMap) for f in maps):
        raise SpaceError("grid certification supports affine maps only")
    norms = [f.operator_norm() for f in maps]
    worst = max(norms)
    diam = space.diameter()
    slack = space.spacing / diam if diam > 0 else 0.0
    factor = worst + slack
    bound = 1.0 if declared_c is None else declared_c + 1e-12
    passed = factor < bound
    witness = None if passed else (int(np.argmax(norms)), None, None, None)
    return OrbitalCheck(passed=passed, factor=factor, orbital_ratio=worst,
                        global_ratio=worst, kind="operator-norm", witness=witness)


class IfsSystem:
    """Finite family of self-maps with a certified orbital contraction factor."""

    def __init__(self, space, maps, certificate: OrbitalCheck):
        if not maps:
            raise SpaceError("system needs at least one map")
        for f in maps:
            if f.space != space:
                raise SpaceError("map space mismatch")
        if not certificate.passed:
            raise SpaceError("cannot build a system from a failed certificate")
        self.space = space
        self.maps = tuple(maps)
        self.certificate = certificate

    @classmethod
    def certified(cls, space, maps, declared_c=None):
        check = check_orbital_condition(space, maps, declared_c)
        if not check.passed:
            raise SpaceError(
                f"orbital condition fails: factor {check.factor:.6g}, witness {check.witness}")
        return cls(space, maps, check)

    @property
    def orbital_factor(self) -> float:
        return self.certificate.factor

    @property
    def is_grid(self) -> bool:
        return isinstance(self.space, GridSpace)

    def __repr__(self):
        return f"IfsSystem({len(self.maps)} maps, C={self.orbital_factor:.4g})"


def fractal_operator(sys: IfsSystem, K: CompactSet) -> CompactSet:
    """Union of the images of K under every system map, deduplicated."""
    if K.space != sys.space:
        raise SpaceError("set not in the system's space")
    pts = list(K.members)
    out = set()
    for f in sys.maps:
        out.update(f.apply_points(pts))
    return CompactSet(sys.space, out)


class OrbitResult:
    """Orbit of a set: the set plus all finite map-word images of it.

    complete is True when the closure saturated; False means the depth
    budget truncated the enumeration.
    """

    def __init__(self, points, complete, depth_reached):
        self.points = points
        self.complete = complete
        self.depth_reached = depth_reached

    def __repr__(self):
        state = "complete" if self.complete else "truncated"
        return f"OrbitResult({len(self.points)} points, {state} at depth {self.depth_reached})"


def orbit(sys: IfsSystem, B: CompactSet, depth=None) -> OrbitResult:
    """Breadth-first orbit enumeration; exact fixpoint on finite spaces.

    Grids always run depth-bounded (default DEFAULT_ORBIT_DEPTH) since the
    backend stands in for a continuum.
    """
    if B.space != sys.space:
        raise SpaceError("set not in the system's space")
    if sys.is_grid and depth is None:
        depth = DEFAULT_ORBIT_DEPTH
    seen = set(B.members)
    frontier = list(B.members)
    d = 0
    while frontier and (depth is None or d < depth):
        nxt = set()
        for f in sys.maps:
            nxt.update(f.apply_points(frontier))
        frontier = [p for p in nxt if p not in seen]
        seen.update(frontier)
        d += 1
    complete = not frontier
    return OrbitResult(CompactSet(sys.space, seen), complete, d)


def attractor(sys: IfsSystem, K: CompactSet, tol: float, budget: int = 200) -> CompactSet:
    """Limit of the fractal-operator iterates of K.

    Exact on finite backends (iterates become constant); on grids the loop
    also reaches an exact fixpoint in practice, with tol as the fallback
    stopping rule.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    prev = K
    for _ in range(budget):
        nxt = fractal_operator(sys, prev)
        if nxt == prev:
            return prev
        if hausdorff(prev, nxt) < tol:
            return nxt
        prev = nxt
    raise ConvergenceError(f"attractor iteration did not settle within {budget} steps")


def orbit_closure(sys: IfsSystem, x, tol=None, depth=None) -> CompactSet:
    """Orbit of a point together with the attractor seeded at it.

    On finite backends this equals the orbit itself (discrete closure);
    on grids it is the depth-truncated orbit joined with the attractor.
    """
    if tol is None:
        tol = sys.space.spacing / 2 if sys.is_grid else 1e-9
    base = orbit(sys, CompactSet(sys.space, [x]), depth=depth).points
    tail = attractor(sys, CompactSet(sys.space, [x]), tol)
    return base.union(tail)
