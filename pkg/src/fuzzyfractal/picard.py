"""Picard iteration of the fuzzy operator, with certificates and decomposition.

The iteration limit of the fuzzy operator from a seed u is computed together
with a convergence certificate (per-step distances against the geometric
a-priori bound). The seed splits into orbit-wise parts: for each support
point x, iterating from the point mass at x reaches a fixed point, and the
pointwise max of these parts reproduces the limit of the whole seed.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

from .fuzzy import (FuzzyError, FuzzySet, OrbitalFuzzySystem, d_infinity,
                    delta, hb_apply, sup_family, support)
from .ifs import fractal_operator, orbit, orbit_closure
from .spaces import CompactSet, ConvergenceError, GridSpace, diameter

DEFAULT_BUDGET = 500
DEFAULT_EPS_FINITE = 1e-6

EXACT_FIXED_POINT = "exact-fixed-point"
TOLERANCE_REACHED = "tolerance-reached"
BUDGET_EXHAUSTED = "budget-exhausted"


class ClassMembershipError(ValueError):
    """Seed falls outside the supported class: some support point has no witness."""


def default_eps(sys: OrbitalFuzzySystem) -> float:
    if isinstance(sys.space, GridSpace):
        return sys.space.spacing / 2
    return DEFAULT_EPS_FINITE


def apriori_steps(factor: float, diam0: float, eps: float) -> int:
    """Steps guaranteeing the geometric tail bound factor^n/(1-factor)*diam0 <= eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0.0 <= factor < 1.0:
        raise ValueError("contraction factor must lie in [0, 1)")
    if diam0 <= 0:
        return 0
    if factor == 0.0:
        return 0 if diam0 / 1.0 <= eps else 1
    ratio = eps * (1.0 - factor) / diam0
    if ratio >= 1.0:
        return 0
    return int(math.ceil(math.log(ratio) / math.log(factor) - 1e-12))


@dataclass
class ConvergenceCertificate:
    """Evidence trail for one Picard run.

    per_step_distance[n] is the distance from iterate n to iterate n+1;
    apriori_bound[n] = factor^n/(1-factor) * diam0 bounds the distance from
    iterate n to the limit. trace (optional) holds iterates 0..steps.
    """

    steps: int
    per_step_distance: list
    apriori_bound: list
    terminal: str
    factor: float
    diam0: float
    eps: float
    trace: Optional[list] = field(default=None, repr=False)

    def bound_at(self, n: int) -> float:
        if self.diam0 == 0.0:
            return 0.0
        return self.factor ** n / (1.0 - self.factor) * self.diam0

    def distances_to_terminal(self, terminal: FuzzySet):
        """d-infinity from each traced iterate to the returned limit."""
        if self.trace is None:
            raise ValueError("certificate was built without a trace")
        return [d_infinity(u, terminal) for u in self.trace]


def seed_diameter(sys: OrbitalFuzzySystem, u: FuzzySet) -> float:
    """Diameter of supp u joined with its one-step image under all maps."""
    supp = support(u)
    image = fractal_operator(sys.ifs, supp)
    return diameter(supp.union(image))


def picard_limit(sys: OrbitalFuzzySystem, u: FuzzySet, eps: Optional[float] = None,
                 budget: int = DEFAULT_BUDGET, keep_trace: bool = False,
                 check_class: bool = False):
    """Iterate the fuzzy operator from u to its fixed point.

    Finite backends run to an exact fixed point (the quantized state space is
    finite); grids stop at the a-priori step count for eps unless an exact
    fixed point appears earlier. Returns (limit, certificate).
    """
    if u.space != sys.space or u.levels != sys.levels:
        raise FuzzyError("seed does not match the system's space or quantization")
    if not u.is_normal:
        raise ClassMembershipError("seed must be normal (attain full membership)")
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if check_class:
        for x in sorted(u.support_points()):
            find_witness(sys, u, x)
    if eps is None:
        eps = default_eps(sys)
    factor = sys.orbital_factor
    diam0 = seed_diameter(sys, u)
    on_grid = isinstance(sys.space, GridSpace)
    n_ap = apriori_steps(factor, diam0, eps)

    cur = u
    dists = []
    trace = [u] if keep_trace else None
    seen = {} if not on_grid else None
    terminal = None
    while True:
        if not on_grid:
            key = frozenset(cur.data.items())
            if key in seen:
                raise ConvergenceError(
                    f"iteration cycled (length {len(dists) - seen[key]}) without fixing; "
                    "this contradicts orbital convergence")
            seen[key] = len(dists)
        nxt = hb_apply(sys, cur)
        if nxt == cur:
            terminal = EXACT_FIXED_POINT
            break
        if on_grid and len(dists) >= n_ap:
            terminal = TOLERANCE_REACHED
            break
        if len(dists) >= budget:
            cert = ConvergenceCertificate(
                steps=len(dists), per_step_distance=dists,
                apriori_bound=[_bound(factor, diam0, n) for n in range(len(dists) + 1)],
                terminal=BUDGET_EXHAUSTED, factor=factor, diam0=diam0, eps=eps,
                trace=trace)
            err = ConvergenceError(f"no fixed point within budget {budget}")
            err.certificate = cert
            raise err
        dists.append(d_infinity(cur, nxt))
        cur = nxt
        if keep_trace:
            trace.append(cur)
    steps = len(dists)
    cert = ConvergenceCertificate(
        steps=steps, per_step_distance=dists,
        apriori_bound=[_bound(factor, diam0, n) for n in range(steps + 1)],
        terminal=terminal, factor=factor, diam0=diam0, eps=eps, trace=trace)
    return cur, cert


def _bound(factor: float, diam0: float, n: int) -> float:
    if diam0 == 0.0:
        return 0.0
    return factor ** n / (1.0 - factor) * diam0


def find_witness(sys: OrbitalFuzzySystem, u: FuzzySet, x):
    """Witness pair (w, y) with x and y in the orbit of w and u(y) = 1.

    Searched in deterministic order: x itself (with early exit as soon as
    its orbit reaches a full-membership point), then the support of u, then
    (finite backends only) the rest of the space. Failure means u lies
    outside the class for which the decomposition theory is stated.
    """
    if u.tick(x) <= 0:
        raise ClassMembershipError(f"{x!r} is outside the support of the seed")
    core_pts = set(u.cut(u.levels).members) if u.is_normal else set()
    if not core_pts:
        raise ClassMembershipError("seed must be normal (attain full membership)")
    if x in core_pts:
        return x, x
    hit = _orbit_core_hit(sys, x, core_pts)
    if hit is not None:
        return x, hit
    candidates = [p for p in sorted(u.support_points()) if p != x]
    if not isinstance(sys.space, GridSpace):
        in_list = set(candidates) | {x}
        candidates += [p for p in sys.space.points if p not in in_list]
    for w in candidates:
        pts = orbit(sys.ifs, CompactSet(sys.space, [w])).points
        if x not in pts:
            continue
        hits = sorted(p for p in pts.members if p in core_pts)
        if hits:
            return w, hits[0]
    raise ClassMembershipError(
        f"no witness for {x!r}: its orbit never reaches a full-membership point "
        f"and no common orbit root exists (searched {len(candidates) + 1} roots)")


def _orbit_core_hit(sys: OrbitalFuzzySystem, x, core_pts):
    """First full-membership point reached by the orbit of x, or None.

    Single-map trails are walked first (cheap, catches cores sitting at map
    fixed points), then a breadth-first sweep with early exit.
    """
    for f in sys.maps:
        p = x
        seen = {p}
        while True:
            p = f(p)
            if p in core_pts:
                return p
            if p in seen:
                break
            seen.add(p)
    depth_cap = None if not sys.ifs.is_grid else 4 * max(sys.space.width, sys.space.height)
    seen = {x}
    frontier = [x]
    depth = 0
    while frontier and (depth_cap is None or depth < depth_cap):
        nxt = set()
        for f in sys.maps:
            nxt.update(f.apply_points(frontier))
        hits = sorted(p for p in nxt if p in core_pts)
        if hits:
            return hits[0]
        frontier = [p for p in nxt if p not in seen]
        seen.update(frontier)
        depth += 1
    return None


def restrict(sys: OrbitalFuzzySystem, u: FuzzySet, x, witness=None) -> FuzzySet:
    """u on the orbit closure of x's witness root, zero elsewhere."""
    if witness is None:
        witness = find_witness(sys, u, x)
    w, y = witness
    closure = orbit_closure(sys.ifs, w)
    kept = {p: k for p, k in u.to_tick_dict().items() if p in closure}
    out = FuzzySet.from_ticks(u.space, u.levels, kept)
    if not out.is_normal:
        raise ClassMembershipError(
            f"restriction at {x!r} lost normality; witness {witness!r} is invalid")
    return out


def orbit_fractal(sys: OrbitalFuzzySystem, u: FuzzySet, x, eps: Optional[float] = None,
                  budget: int = DEFAULT_BUDGET) -> FuzzySet:
    """The part attached to x: the iteration limit seeded at the point mass at x.

    Iterating from the point mass and from the restriction of u reach the
    same limit, so the cheaper seed is used.
    """
    find_witness(sys, u, x)
    part, _ = picard_limit(sys, delta(sys.space, x, sys.levels), eps=eps, budget=budget)
    return part


@dataclass
class Decomposition:
    """The limit of a seed split into orbit-wise parts.

    parts maps each support point to its part; representatives maps each
    support point to the first point sharing its orbit family (parts are
    computed once per family). envelope is the pointwise max of parts over
    the support; core_envelope the max over full-membership points only.
    """

    whole: FuzzySet
    parts: dict
    representatives: dict
    envelope: FuzzySet
    core_envelope: FuzzySet
    gap: float
    core_gap: float
    certificate: ConvergenceCertificate

    @property
    def distinct_parts(self):
        """Parts keyed by representative (one per orbit family)."""
        return {rep: self.parts[rep] for rep in sorted(set(self.representatives.values()))}


def decompose(sys: OrbitalFuzzySystem, u: FuzzySet, eps: Optional[float] = None,
              budget: int = DEFAULT_BUDGET) -> Decomposition:
    """Split the limit of u into orbit-wise parts and rebuild it as their max.

    Support points sharing an orbit family share a part (a point inside the
    orbit closure of another point has the same iteration limit), so each
    family is iterated once.
    """
    whole, cert = picard_limit(sys, u, eps=eps, budget=budget)
    support_pts = sorted(u.support_points())
    core_pts = set(u.cut(u.levels).members)

    one_family = sys.ifs.certificate.globally_contractive
    families = []  # (representative, closure CompactSet, part)
    parts = {}
    representatives = {}
    for x in support_pts:
        find_witness(sys, u, x)
        placed = False
        if one_family and families:
            # A global contraction has a unique fixed point, so every part
            # coincides with the first one.
            rep, _, part = families[0]
            parts[x] = part
            representatives[x] = rep
            placed = True
        else:
            for rep, closure, part in families:
                if x in closure:
                    parts[x] = part
                    representatives[x] = rep
                    placed = True
                    break
        if placed:
            continue
        closure = orbit_closure(sys.ifs, x)
        part, _ = picard_limit(sys, delta(sys.space, x, sys.levels), eps=eps, budget=budget)
        families.append((x, closure, part))
        parts[x] = part
        representatives[x] = x

    envelope = sup_family([parts[x] for x in support_pts])
    core_envelope = sup_family([parts[x] for x in support_pts if x in core_pts])
    return Decomposition(
        whole=whole, parts=parts, representatives=representatives,
        envelope=envelope, core_envelope=core_envelope,
        gap=d_infinity(whole, envelope),
        core_gap=d_infinity(envelope, core_envelope),
        certificate=cert)
