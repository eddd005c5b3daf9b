"""Ground-truth oracle: literal-definition computations on small finite instances.

Everything here is deliberately naive — plain dicts, plain lists, triple
loops transcribed from the definitions — and shares no computational code
with the engine modules. The oracle is the independent second route: engine
results must match it exactly on every generated instance.

Instances are small on purpose (<= 12 points, <= 3 maps, <= 16 membership
levels) so the reachable set of quantized fuzzy states stays tiny and the
iteration can be driven to literal repetition with full cycle detection.
"""

import json
import math
import random

ORACLE_MAX_POINTS = 12
ORACLE_MAX_MAPS = 3
ORACLE_MAX_LEVELS = 16


class OracleError(ValueError):
    """Malformed oracle instance."""


class OracleCycleError(RuntimeError):
    """Iteration revisited an earlier non-fixed state.

    On a valid orbital instance this would falsify convergence, so it is
    raised loudly instead of being folded into a result.
    """

    def __init__(self, message, cycle):
        super().__init__(message)
        self.cycle = cycle


class OracleInstance:
    """Plain-data instance: labels, distance table, point maps, grey tables, seed.

    dist is a nested dict dist[a][b]; maps is a list of total label->label
    dicts; greys is a list of tick tables of length levels+1; seed is a
    label->tick dict with positive ticks only.
    """

    def __init__(self, name, labels, dist, maps, greys, levels, seed):
        labels = list(labels)
        if not 1 <= len(labels) <= ORACLE_MAX_POINTS:
            raise OracleError(f"instance must have 1..{ORACLE_MAX_POINTS} points")
        if len(set(labels)) != len(labels):
            raise OracleError("duplicate labels")
        for a in labels:
            for b in labels:
                dab = dist[a][b]
                if a == b and dab != 0:
                    raise OracleError("nonzero self-distance")
                if a != b and dab <= 0:
                    raise OracleError(f"non-positive distance {a!r}-{b!r}")
                if abs(dab - dist[b][a]) > 1e-9:
                    raise OracleError("asymmetric distance")
        for a in labels:
            for b in labels:
                for c in labels:
                    if dist[a][b] > dist[a][c] + dist[c][b] + 1e-9:
                        raise OracleError("triangle inequality fails")
        if not 1 <= len(maps) <= ORACLE_MAX_MAPS:
            raise OracleError(f"instance must have 1..{ORACLE_MAX_MAPS} maps")
        for m in maps:
            for a in labels:
                if m.get(a) not in labels:
                    raise OracleError(f"map not total at {a!r}")
        if not 1 <= levels <= ORACLE_MAX_LEVELS:
            raise OracleError(f"levels must be 1..{ORACLE_MAX_LEVELS}")
        if len(greys) != len(maps):
            raise OracleError("need one grey table per map")
        for g in greys:
            if len(g) != levels + 1 or g[0] != 0:
                raise OracleError("grey table must have levels+1 entries starting at 0")
            if any(v < 0 or v > levels for v in g):
                raise OracleError("grey tick out of range")
            if any(b < a for a, b in zip(g, g[1:])):
                raise OracleError("grey table must be non-decreasing")
            if max(g) == 0:
                raise OracleError("grey table must not be identically zero")
        if not any(g[levels] == levels for g in greys):
            raise OracleError("inadmissible greys: none fixes full membership")
        if not seed:
            raise OracleError("empty seed")
        for p, k in seed.items():
            if p not in labels or not 1 <= k <= levels:
                raise OracleError(f"bad seed entry {p!r}: {k}")
        if max(seed.values()) != levels:
            raise OracleError("seed must be normal")
        self.name = name
        self.labels = labels
        self.dist = {a: {b: float(dist[a][b]) for b in labels} for a in labels}
        self.maps = [dict(m) for m in maps]
        self.greys = [list(g) for g in greys]
        self.levels = int(levels)
        self.seed = dict(seed)

    def to_dict(self):
        return {"name": self.name, "labels": self.labels,
                "dist": {a: self.dist[a] for a in self.labels},
                "maps": self.maps, "greys": self.greys,
                "levels": self.levels, "seed": self.seed}

    @classmethod
    def from_dict(cls, d):
        return cls(d["name"], d["labels"], d["dist"], d["maps"], d["greys"],
                   d["levels"], {p: int(k) for p, k in d["seed"].items()})

    def __repr__(self):
        return (f"OracleInstance({self.name!r}, {len(self.labels)} points, "
                f"{len(self.maps)} maps, L={self.levels})")


def save_instances(path, instances):
    with open(path, "w") as fh:
        json.dump([inst.to_dict() for inst in instances], fh, indent=1, sort_keys=True)


def load_instances(path):
    with open(path) as fh:
        return [OracleInstance.from_dict(d) for d in json.load(fh)]


def oracle_orbit(inst, x):
    """Orbit of a point: x plus all finite map-word images, by saturation."""
    seen = [x]
    while True:
        new = []
        for p in seen:
            for m in inst.maps:
                q = m[p]
                if q not in seen and q not in new:
                    new.append(q)
        if not new:
            return sorted(seen)
        seen.extend(new)


def oracle_orbital_scan(inst):
    """(worst within-orbit ratio, worst global ratio) over all map/pair combos."""
    worst_orbital = 0.0
    for x in inst.labels:
        pts = oracle_orbit(inst, x)
        for y in pts:
            for z in pts:
                if y == z:
                    continue
                for m in inst.maps:
                    r = inst.dist[m[y]][m[z]] / inst.dist[y][z]
                    worst_orbital = max(worst_orbital, r)
    worst_global = 0.0
    for y in inst.labels:
        for z in inst.labels:
            if y == z:
                continue
            for m in inst.maps:
                worst_global = max(worst_global, inst.dist[m[y]][m[z]] / inst.dist[y][z])
    return worst_orbital, worst_global


def oracle_in_class(inst, u=None):
    """Witness table {x: (w, y)} for each support point, or None if some x has none."""
    if u is None:
        u = inst.seed
    witnesses = {}
    for x in sorted(u):
        found = None
        for w in sorted(inst.labels):
            pts = oracle_orbit(inst, w)
            if x not in pts:
                continue
            full = [y for y in pts if u.get(y, 0) == inst.levels]
            if full:
                found = (w, full[0])
                break
        if found is None:
            return None
        witnesses[x] = found
    return witnesses


def oracle_hausdorff(inst, A, B):
    """Two-sided sup-min distance between label collections, straight loops."""
    if not A or not B:
        raise OracleError("hausdorff needs non-empty sets")
    worst = 0.0
    for a in A:
        best = min(inst.dist[a][b] for b in B)
        worst = max(worst, best)
    for b in B:
        best = min(inst.dist[b][a] for a in A)
        worst = max(worst, best)
    return worst


def oracle_d_infinity(inst, u, v):
    """Scan every membership level 1..L and take the worst cut distance."""
    if max(u.values()) != inst.levels or max(v.values()) != inst.levels:
        raise OracleError("d-infinity needs normal operands")
    worst = 0.0
    for k in range(1, inst.levels + 1):
        cu = [p for p in inst.labels if u.get(p, 0) >= k]
        cv = [p for p in inst.labels if v.get(p, 0) >= k]
        worst = max(worst, oracle_hausdorff(inst, cu, cv))
    return worst


def oracle_z(inst, u):
    """One application of the fuzzy operator, from the definition.

    Image of u under a map: value at y is the max of u over the preimage of
    y (zero when empty); each image goes through its grey table; the result
    is the pointwise max over maps.
    """
    out = {}
    for y in inst.labels:
        best = 0
        for m, g in zip(inst.maps, inst.greys):
            pre = [x for x in inst.labels if m[x] == y]
            val = 0
            for x in pre:
                val = max(val, u.get(x, 0))
            best = max(best, g[val])
        if best > 0:
            out[y] = best
    return out


def oracle_sup(us):
    """Pointwise max of label->tick dicts."""
    out = {}
    for u in us:
        for p, k in u.items():
            if k > out.get(p, 0):
                out[p] = k
    return out


class OracleTrace:
    """Full iterate record: states[0] is the seed, states[-1] the fixed point."""

    def __init__(self, states):
        self.states = states

    @property
    def limit(self):
        return self.states[-1]

    @property
    def steps(self):
        return len(self.states) - 1

    def __repr__(self):
        return f"OracleTrace({self.steps} steps)"


def oracle_fixed_points(inst, u0=None, max_states=100_000):
    """Iterate the operator until literal repetition; the repeat must be a fix.

    The quantized state space is finite, so repetition is guaranteed. A
    repeat of anything other than the immediately preceding state is a
    cycle, which contradicts convergence on a valid instance and raises
    OracleCycleError with the offending segment.
    """
    if u0 is None:
        u0 = inst.seed
    states = [dict(u0)]
    keys = {_state_key(u0): 0}
    while len(states) <= max_states:
        nxt = oracle_z(inst, states[-1])
        key = _state_key(nxt)
        if key in keys:
            at = keys[key]
            if at == len(states) - 1:
                return OracleTrace(states)
            raise OracleCycleError(
                f"state cycle of length {len(states) - at} from step {at}",
                cycle=states[at:])
        keys[key] = len(states)
        states.append(nxt)
    raise OracleError(f"no repetition within {max_states} states")


def _state_key(u):
    return tuple(sorted(u.items()))


# ---------------------------------------------------------------------------
# Seeded generators. Same seed, same arguments -> identical instances.


def _spread_coords(rng, n, box=10.0, min_gap=0.5):
    while True:
        pts = [(rng.uniform(0, box), rng.uniform(0, box)) for _ in range(n)]
        ok = all(math.hypot(p[0] - q[0], p[1] - q[1]) >= min_gap
                 for i, p in enumerate(pts) for q in pts[i + 1:])
        if ok:
            return pts


def _dist_from_coords(labels, pts):
    return {a: {b: math.hypot(pa[0] - pb[0], pa[1] - pb[1])
                for b, pb in zip(labels, pts)}
            for a, pa in zip(labels, pts)}


def _random_grey(rng, levels, fix_one):
    if rng.random() < 0.3:
        table = list(range(levels + 1))
    else:
        table = [0]
        for _ in range(levels):
            table.append(min(levels, table[-1] + rng.choice([0, 1, 1, 2])))
        if fix_one:
            table[-1] = levels
        elif max(table) == 0:
            table[-1] = rng.randint(1, levels)
    return table


def _shrink_map(rng, labels, pts):
    """Map pulling every point toward a random anchor, snapped to the point set."""
    anchor = rng.choice(labels)
    ax, ay = pts[labels.index(anchor)]
    lam = rng.uniform(0.15, 0.55)
    out = {}
    for lab, (x, y) in zip(labels, pts):
        tx, ty = ax + lam * (x - ax), ay + lam * (y - ay)
        best = min(labels,
                   key=lambda c: math.hypot(pts[labels.index(c)][0] - tx,
                                            pts[labels.index(c)][1] - ty))
        out[lab] = best
    return out


def _random_seed_fuzzy(rng, inst_labels, maps, levels):
    """Support built from whole orbits so every point has a witness by design."""
    def orbit_of(x):
        seen = [x]
        while True:
            new = [m[p] for p in seen for m in maps if m[p] not in seen]
            if not new:
                return seen
            seen.extend(dict.fromkeys(new))
    roots = rng.sample(inst_labels, rng.randint(1, min(3, len(inst_labels))))
    seed = {}
    for r in roots:
        pts = orbit_of(r)
        carrier = [p for p in pts if rng.random() < 0.8] or [pts[0]]
        for p in carrier:
            seed[p] = max(seed.get(p, 0), rng.randint(1, levels))
        full = rng.choice(pts)
        seed[full] = levels
    return seed


def generate_instances(seed, count, mode="orbital", attempts=400):
    """Deterministic pseudo-random valid instances, rejection-sampled.

    Modes: "orbital" accepts any instance passing the orbital scan with some
    C < 1; "global" additionally demands global contraction (worst ratio
    over all pairs < 1); "targeted" builds two far-apart clusters whose maps
    funnel each cluster to its own anchor — orbitally contractive with
    factor 0 but not globally contractive, so two starting point masses
    reach two distinct fixed points.
    """
    if mode not in ("orbital", "global", "targeted"):
        raise OracleError(f"unknown mode {mode!r}")
    rng = random.Random(seed)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > attempts * count:
            raise OracleError(
                f"generator budget exhausted: {len(out)}/{count} instances in {tries} tries")
        name = f"{mode}-{seed}-{len(out)}"
        inst = (_targeted_candidate(rng, name) if mode == "targeted"
                else _plain_candidate(rng, name))
        if inst is None:
            continue
        worst_orbital, worst_global = oracle_orbital_scan(inst)
        if worst_orbital >= 1.0:
            continue
        if mode == "global" and worst_global >= 1.0:
            continue
        if mode == "targeted":
            if worst_global < 1.0 or not _has_two_limits(inst):
                continue
        if oracle_in_class(inst) is None:
            continue
        out.append(inst)
    return out


def _plain_candidate(rng, name):
    n = rng.randint(3, ORACLE_MAX_POINTS)
    labels = [f"p{i}" for i in range(n)]
    pts = _spread_coords(rng, n)
    dist = _dist_from_coords(labels, pts)
    n_maps = rng.randint(1, ORACLE_MAX_MAPS)
    maps = []
    for _ in range(n_maps):
        if rng.random() < 0.25:
            target = rng.choice(labels)
            maps.append({lab: target for lab in labels})
        else:
            maps.append(_shrink_map(rng, labels, pts))
    levels = rng.choice([4, 8, 16])
    greys = [_random_grey(rng, levels, fix_one=(i == 0)) for i in range(n_maps)]
    seed_fz = _random_seed_fuzzy(rng, labels, maps, levels)
    try:
        return OracleInstance(name, labels, dist, maps, greys, levels, seed_fz)
    except OracleError:
        return None


def _targeted_candidate(rng, name):
    """Two clusters on a line, anchors at the far ends, fringes adjacent."""
    a1 = 0.0
    f1 = rng.uniform(2.0, 4.0)
    f2 = f1 + rng.uniform(1.0, 2.0)
    a2 = f2 + rng.uniform(4.0, 6.0)
    labels = ["left-anchor", "left-fringe", "right-fringe", "right-anchor"]
    coords = [(a1, 0.0), (f1, 0.0), (f2, 0.0), (a2, 0.0)]
    extras = rng.randint(0, 2)
    for i in range(extras):
        side = rng.choice([0, 1])
        base = (a1, f1) if side == 0 else (f2, a2)
        labels.append(f"mid{i}")
        coords.append((rng.uniform(base[0] + 0.3, base[1] - 0.3), 0.0))
    dist = _dist_from_coords(labels, coords)
    split = (f1 + f2) / 2

    def anchor_of(lab):
        x = coords[labels.index(lab)][0]
        return "left-anchor" if x < split else "right-anchor"

    funnel = {lab: anchor_of(lab) for lab in labels}
    maps = [funnel]
    if rng.random() < 0.5:
        maps.append(dict(funnel))
    levels = rng.choice([4, 8, 16])
    greys = [_random_grey(rng, levels, fix_one=True) for _ in maps]
    seed_fz = {"left-fringe": levels, "right-fringe": levels}
    try:
        return OracleInstance(name, labels, dist, maps, greys, levels, seed_fz)
    except OracleError:
        return None


def _has_two_limits(inst):
    """Do two starting point masses settle on distinct fixed points?"""
    limits = set()
    for p in inst.labels:
        trace = oracle_fixed_points(inst, {p: inst.levels})
        limits.add(_state_key(trace.limit))
        if len(limits) > 1:
            return True
    return False
