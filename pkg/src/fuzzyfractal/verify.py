"""Executable checks for the structural claims behind the decomposition.

Each identity the engine relies on runs as a PASS/FAIL check: exactly on
small finite instances (where the oracle provides a fully independent
second route) and within discretization tolerance on grid scenarios. A
failure on a valid finite instance indicates an implementation bug, never
an acceptable regression.
"""

import json
from dataclasses import dataclass

import numpy as np

from .fuzzy import (FuzzySet, LookupGrey, OrbitalFuzzySystem,
                    PiecewiseLinearGrey, d_infinity, delta, hb_apply,
                    indicator, ramp, sup_family, support)
from .ifs import (AffineMap, IfsSystem, TableMap, attractor, fractal_operator,
                  orbit_closure)
from .oracle import (OracleInstance, oracle_fixed_points, oracle_in_class,
                     oracle_orbit, oracle_sup, oracle_z)
from .picard import decompose, find_witness, picard_limit, restrict
from .spaces import CompactSet, FiniteSpace, GridSpace, hausdorff


@dataclass
class CheckResult:
    """One verdict: check name, what it ran on, outcome, and the worst gap."""

    name: str
    subject: str
    passed: bool
    detail: str
    gap: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}\t{self.name}\t{self.subject}\t{self.gap:.6g}\t{self.detail}"


def failures(results):
    return [r for r in results if not r.passed]


def engine_system(inst: OracleInstance):
    """Engine-side view of an oracle instance (system plus seed fuzzy set)."""
    matrix = [[inst.dist[a][b] for b in inst.labels] for a in inst.labels]
    space = FiniteSpace(inst.labels, matrix)
    maps = [TableMap(space, m) for m in inst.maps]
    ifs = IfsSystem.certified(space, maps)
    greys = [LookupGrey(inst.levels, g) for g in inst.greys]
    sys = OrbitalFuzzySystem(ifs, greys, levels=inst.levels)
    seed = FuzzySet.from_ticks(space, inst.levels, inst.seed)
    return sys, seed


def _part(sys, x, cache):
    """Limit seeded at the point mass at x, memoized per instance."""
    if x not in cache:
        cache[x], _ = picard_limit(sys, delta(sys.space, x, sys.levels))
    return cache[x]


def check_orbit_limit_invariance(sys, u, subject, cache=None) -> CheckResult:
    """Every start inside one orbit closure reaches the same limit.

    For each support point x with witness root w: iterating from the point
    mass at any s in the closure of w's orbit, or from the restriction of u
    to that closure, must give the part attached to x.
    """
    cache = {} if cache is None else cache
    checked = 0
    for x in sorted(u.support_points()):
        w, _y = find_witness(sys, u, x)
        closure = orbit_closure(sys.ifs, w)
        ref = _part(sys, x, cache)
        for s in closure.sorted_members():
            if _part(sys, s, cache) != ref:
                return CheckResult("orbit-limit-invariance", subject, False,
                                   f"limit from {s!r} differs from the part at {x!r}",
                                   gap=d_infinity(_part(sys, s, cache), ref))
            checked += 1
        from_restriction, _ = picard_limit(sys, restrict(sys, u, x, witness=(w, _y)))
        if from_restriction != ref:
            return CheckResult("orbit-limit-invariance", subject, False,
                               f"restricted-seed limit differs at {x!r}",
                               gap=d_infinity(from_restriction, ref))
    return CheckResult("orbit-limit-invariance", subject, True,
                       f"{checked} start points over {len(u.support_points())} closures")


def check_part_consistency(sys, u, subject, cache=None) -> CheckResult:
    """Points inside a part's support own the same part."""
    cache = {} if cache is None else cache
    pairs = 0
    for x in sorted(u.support_points()):
        px = _part(sys, x, cache)
        for y in sorted(px.support_points()):
            if _part(sys, y, cache) != px:
                return CheckResult("part-consistency", subject, False,
                                   f"part at {y!r} differs from part at {x!r}",
                                   gap=d_infinity(_part(sys, y, cache), px))
            pairs += 1
    return CheckResult("part-consistency", subject, True, f"{pairs} (x, y) pairs")


def check_limit_map_continuity(sys, u, subject, sequence=None, tol=0.0,
                               cache=None) -> CheckResult:
    """Part of x_n approaches part of x along a convergent point sequence.

    On finite backends a convergent sequence is eventually constant, so the
    tail distances must vanish exactly; on grids the tail must fall to tol.
    """
    cache = {} if cache is None else cache
    supp = sorted(u.support_points())
    if sequence is None:
        sequence = supp + [supp[0]] * 3
    target = sequence[-1]
    ref = _part(sys, target, cache)
    dists = [d_infinity(_part(sys, p, cache), ref) for p in sequence]
    tail = [d for p, d in zip(sequence, dists) if p == target]
    ok = all(d <= tol for d in tail)
    detail = f"tail distances {['%.4g' % d for d in tail]} over {len(sequence)} terms"
    return CheckResult("limit-map-continuity", subject, ok, detail,
                       gap=max(tail) if tail else 0.0)


def check_cut_union_identity(sys, u, subject, cache=None) -> CheckResult:
    """Each cut of the envelope is the union of the parts' cuts, exactly."""
    cache = {} if cache is None else cache
    supp = sorted(u.support_points())
    parts = [_part(sys, x, cache) for x in supp]
    env = sup_family(parts)
    ticks = set(env.attained_ticks())
    for p in parts:
        ticks.update(p.attained_ticks())
    for k in sorted(ticks):
        lhs = set(env.cut(k).members)
        rhs = set()
        for p in parts:
            if p.max_tick() >= k:
                rhs.update(p.cut(k).members)
        if lhs != rhs:
            return CheckResult("cut-union-identity", subject, False,
                               f"cut mismatch at tick {k}: {sorted(lhs ^ rhs)[:4]}")
    return CheckResult("cut-union-identity", subject, True,
                       f"{len(ticks)} attained levels, {len(parts)} parts")


def check_core_part_equality(sys, u, subject, cache=None) -> CheckResult:
    """Parts collected over the support equal parts over full-membership points."""
    cache = {} if cache is None else cache
    supp = sorted(u.support_points())
    core = sorted(u.cut(u.levels).members)
    canon = lambda f: frozenset(f.to_tick_dict().items())
    set_supp = {canon(_part(sys, x, cache)) for x in supp}
    set_core = {canon(_part(sys, x, cache)) for x in core}
    if set_supp != set_core:
        return CheckResult("core-part-equality", subject, False,
                           f"{len(set_supp)} support parts vs {len(set_core)} core parts")
    env_supp = sup_family([_part(sys, x, cache) for x in supp])
    env_core = sup_family([_part(sys, x, cache) for x in core])
    if env_supp != env_core:
        return CheckResult("core-part-equality", subject, False,
                           "envelopes over support and core differ",
                           gap=d_infinity(env_supp, env_core))
    return CheckResult("core-part-equality", subject, True,
                       f"{len(set_supp)} distinct parts either way")


def check_envelope_wellformed(sys, u, subject, cache=None) -> CheckResult:
    """Envelope is normal, attains its sup pointwise, and lives in the attractor.

    Support containment: each part's support sits inside the attractor
    seeded at its point; the envelope's support inside the attractor of the
    seed's support.
    """
    cache = {} if cache is None else cache
    supp = sorted(u.support_points())
    parts = {x: _part(sys, x, cache) for x in supp}
    env = sup_family(list(parts.values()))
    if not env.is_normal:
        return CheckResult("envelope-wellformed", subject, False, "envelope not normal")
    tol = sys.space.spacing / 1000 if isinstance(sys.space, GridSpace) else 1e-9
    for x in supp:
        ax = attractor(sys.ifs, CompactSet(sys.space, [x]), tol)
        if not support(parts[x]).issubset(ax):
            return CheckResult("envelope-wellformed", subject, False,
                               f"part at {x!r} leaves its attractor")
    a_supp = attractor(sys.ifs, support(u), tol)
    if not support(env).issubset(a_supp):
        return CheckResult("envelope-wellformed", subject, False,
                           "envelope support leaves the attractor of the seed support")
    for p in env.support_points():
        vals = [parts[x].tick(p) for x in supp]
        if env.tick(p) != max(vals):
            return CheckResult("envelope-wellformed", subject, False,
                               f"sup not attained at {p!r}")
    return CheckResult("envelope-wellformed", subject, True,
                       f"normal, attained, contained; {len(supp)} parts")


def check_whole_equals_envelope(sys, u, subject, tol=0.0) -> CheckResult:
    """The limit of the whole seed is the pointwise max of its parts.

    Exact (gap 0 and equal fuzzy sets) on finite backends; within tol on
    grids. Also demands the support-indexed and core-indexed envelopes agree.
    """
    dec = decompose(sys, u)
    worst = max(dec.gap, dec.core_gap)
    exact_needed = not isinstance(sys.space, GridSpace)
    ok = worst <= tol
    if exact_needed and ok:
        ok = dec.whole == dec.envelope == dec.core_envelope
    detail = (f"gap {dec.gap:.6g}, core gap {dec.core_gap:.6g}, "
              f"{len(dec.distinct_parts)} distinct parts")
    return CheckResult("whole-equals-envelope", subject, ok, detail, gap=worst)


def check_iterate_splitting(sys, u, subject, upto=10) -> CheckResult:
    """Iterates of the seed equal the max of iterates of its restrictions.

    Finite backends only: restriction uses exact orbit closures there.
    """
    if isinstance(sys.space, GridSpace):
        raise ValueError("iterate splitting is checked on finite backends only")
    supp = sorted(u.support_points())
    pieces = [restrict(sys, u, x) for x in supp]
    whole = u
    for n in range(upto + 1):
        combined = sup_family(pieces)
        if combined != whole:
            return CheckResult("iterate-splitting", subject, False,
                               f"split iterate differs at step {n}",
                               gap=d_infinity(combined, whole))
        whole = hb_apply(sys, whole)
        pieces = [hb_apply(sys, p) for p in pieces]
    return CheckResult("iterate-splitting", subject, True,
                       f"steps 0..{upto}, {len(pieces)} restrictions")


def check_apriori_bound(sys, u, subject, slack=0.0) -> CheckResult:
    """Distance from each iterate to the terminal stays under the geometric bound."""
    limit, cert = picard_limit(sys, u, keep_trace=True)
    dists = cert.distances_to_terminal(limit)
    worst = 0.0
    for n, dn in enumerate(dists):
        excess = dn - (cert.bound_at(n) + slack)
        worst = max(worst, excess)
    if worst > 0:
        return CheckResult("apriori-bound", subject, False,
                           f"bound violated by {worst:.6g}", gap=worst)
    return CheckResult("apriori-bound", subject, True,
                       f"{len(dists)} steps within bound (factor {cert.factor:.4g}, "
                       f"start diameter {cert.diam0:.4g})", gap=0.0)


def check_crisp_reduction(sys, seed_set, subject, budget=200) -> CheckResult:
    """With identity greys the fuzzy iteration is the crisp set iteration.

    At each step the fuzzy iterate must be the indicator of the set-operator
    iterate, and the final support must land within one spacing of the
    attractor (exactly coincide on finite backends).
    """
    for g in sys.greys:
        lut = g.lookup(sys.levels)
        if not np.array_equal(lut, np.arange(sys.levels + 1)):
            raise ValueError("crisp reduction requires identity greys")
    u = indicator(sys.space, seed_set, sys.levels)
    K = seed_set if isinstance(seed_set, CompactSet) else CompactSet(sys.space, seed_set)
    K0 = K
    steps = 0
    for _ in range(budget):
        nu = hb_apply(sys, u)
        nK = fractal_operator(sys.ifs, K)
        if nu != indicator(sys.space, nK, sys.levels):
            return CheckResult("crisp-reduction", subject, False,
                               f"fuzzy iterate left the crisp track at step {steps + 1}")
        if nu == u:
            break
        u, K = nu, nK
        steps += 1
    else:
        return CheckResult("crisp-reduction", subject, False,
                           f"no fixed point within {budget} steps")
    on_grid = isinstance(sys.space, GridSpace)
    tol = sys.space.spacing / 1000 if on_grid else 1e-9
    A = attractor(sys.ifs, K0, tol, budget=budget)
    gap = hausdorff(support(u), A)
    allowed = sys.space.spacing if on_grid else 0.0
    ok = gap <= allowed
    return CheckResult("crisp-reduction", subject, ok,
                       f"fixed after {steps} steps, support vs attractor gap {gap:.6g}",
                       gap=gap)


def check_oracle_agreement(inst: OracleInstance, subject=None) -> CheckResult:
    """Engine limit, steps, and per-point parts coincide exactly with the oracle."""
    subject = subject or inst.name
    sys, u0 = engine_system(inst)
    eng_limit, cert = picard_limit(sys, u0)
    trace = oracle_fixed_points(inst)
    if eng_limit.to_tick_dict() != trace.limit:
        return CheckResult("oracle-agreement", subject, False,
                           "engine limit differs from oracle limit")
    if cert.steps != trace.steps:
        return CheckResult("oracle-agreement", subject, False,
                           f"engine took {cert.steps} steps, oracle {trace.steps}")
    for x in sorted(inst.seed):
        eng_part, _ = picard_limit(sys, delta(sys.space, x, sys.levels))
        orc_part = oracle_fixed_points(inst, {x: inst.levels}).limit
        if eng_part.to_tick_dict() != orc_part:
            return CheckResult("oracle-agreement", subject, False,
                               f"part at {x!r} differs between engine and oracle")
    return CheckResult("oracle-agreement", subject, True,
                       f"limit, {cert.steps} steps, {len(inst.seed)} parts identical")


def oracle_confirmations(inst: OracleInstance, upto=10) -> list:
    """Re-derive the core identities with oracle primitives only.

    No engine code is involved: parts, envelopes, cuts, and split iterates
    all come from the naive implementations.
    """
    subject = inst.name
    out = []
    trace = oracle_fixed_points(inst)
    limit = trace.limit
    supp = sorted(inst.seed)
    core = sorted(p for p, k in inst.seed.items() if k == inst.levels)
    parts = {x: oracle_fixed_points(inst, {x: inst.levels}).limit for x in supp}
    env = oracle_sup([parts[x] for x in supp])
    env_core = oracle_sup([parts[x] for x in core])

    ok = limit == env == env_core
    out.append(CheckResult("oracle-whole-equals-envelope", subject, ok,
                           "seed limit vs part envelopes (support and core indexed)"
                           if ok else "oracle envelope mismatch"))

    bad = [x for x in supp if oracle_z(inst, parts[x]) != parts[x]]
    out.append(CheckResult("oracle-part-fixed", subject, not bad,
                           f"{len(supp)} parts are exact fixed points" if not bad
                           else f"non-fixed parts at {bad}"))

    ok = True
    detail = "parts constant on their supports"
    for x in supp:
        for y in sorted(parts[x]):
            if oracle_fixed_points(inst, {y: inst.levels}).limit != parts[x]:
                ok, detail = False, f"part at {y!r} differs from part at {x!r}"
                break
        if not ok:
            break
    out.append(CheckResult("oracle-part-consistency", subject, ok, detail))

    ok = True
    detail = f"all {inst.levels} levels"
    for k in range(1, inst.levels + 1):
        lhs = {p for p in env if env[p] >= k}
        rhs = {p for x in supp for p in parts[x] if parts[x][p] >= k}
        if lhs != rhs:
            ok, detail = False, f"cut mismatch at level {k}"
            break
    out.append(CheckResult("oracle-cut-union", subject, ok, detail))

    wit = oracle_in_class(inst)
    ok = wit is not None
    if ok:
        restrictions = {}
        for x in supp:
            w, _y = wit[x]
            closure = set(oracle_orbit(inst, w))
            restrictions[x] = {p: k for p, k in inst.seed.items() if p in closure}
        cur = dict(inst.seed)
        cur_parts = {x: dict(r) for x, r in restrictions.items()}
        detail = f"steps 0..{upto}"
        for n in range(upto + 1):
            if oracle_sup(list(cur_parts.values())) != cur:
                ok, detail = False, f"split iterate differs at step {n}"
                break
            cur = oracle_z(inst, cur)
            cur_parts = {x: oracle_z(inst, r) for x, r in cur_parts.items()}
    else:
        detail = "witness table missing"
    out.append(CheckResult("oracle-splitting", subject, ok, detail))

    ok = True
    detail = "limits constant over witness orbits"
    if wit:
        for x in supp:
            w, _y = wit[x]
            for s in oracle_orbit(inst, w):
                if oracle_fixed_points(inst, {s: inst.levels}).limit != parts[x]:
                    ok, detail = False, f"limit from {s!r} differs from part at {x!r}"
                    break
            if not ok:
                break
    out.append(CheckResult("oracle-orbit-invariance", subject, ok, detail))
    return out


def run_finite_suite(instances, upto=10) -> list:
    """Engine checks, oracle confirmations, and cross-agreement per instance."""
    results = []
    for inst in instances:
        sys, u0 = engine_system(inst)
        cache = {}
        results.append(check_orbit_limit_invariance(sys, u0, inst.name, cache))
        results.append(check_part_consistency(sys, u0, inst.name, cache))
        results.append(check_limit_map_continuity(sys, u0, inst.name, cache=cache))
        results.append(check_cut_union_identity(sys, u0, inst.name, cache))
        results.append(check_core_part_equality(sys, u0, inst.name, cache))
        results.append(check_envelope_wellformed(sys, u0, inst.name, cache))
        results.append(check_whole_equals_envelope(sys, u0, inst.name))
        results.append(check_iterate_splitting(sys, u0, inst.name, upto=upto))
        results.append(check_apriori_bound(sys, u0, inst.name))
        results.append(check_oracle_agreement(inst))
        results.extend(oracle_confirmations(inst, upto=upto))
    return results


def sierpinski_system(size=65, grey_kind="identity", levels=255) -> OrbitalFuzzySystem:
    """Three half-scale corner maps on a square grid (right-triangle gasket).

    size should be a power of two plus one so the half-points are exact.
    grey_kind "identity" keeps the iteration crisp; "graded" dims two maps.
    """
    space = GridSpace((0.0, 0.0), 1.0, size, size)
    half = (size - 1) / 2
    m = [[0.5, 0.0], [0.0, 0.5]]
    maps = [AffineMap(space, m, (0.0, 0.0)),
            AffineMap(space, m, (half, 0.0)),
            AffineMap(space, m, (0.0, half))]
    ifs = IfsSystem.certified(space, maps)
    if grey_kind == "identity":
        greys = [PiecewiseLinearGrey.identity()] * 3
    elif grey_kind == "graded":
        greys = [PiecewiseLinearGrey.identity(),
                 PiecewiseLinearGrey.scale(0.5),
                 PiecewiseLinearGrey.scale(0.75)]
    else:
        raise ValueError(f"unknown grey_kind {grey_kind!r}")
    return OrbitalFuzzySystem(ifs, greys, levels=levels)


def run_grid_suite(size=65) -> list:
    """Two grid scenarios: crisp corner-map system and a graded two-seed one."""
    results = []
    crisp = sierpinski_system(size, "identity")
    space = crisp.space
    spacing = space.spacing
    far = (size - 1, size - 1)
    corner = (size - 1, 0)

    subject = f"grid-crisp-{size}"
    results.append(check_crisp_reduction(crisp, [far], subject))
    seed2 = sup_family([delta(space, (0, 0), crisp.levels),
                        delta(space, corner, crisp.levels)])
    results.append(check_apriori_bound(crisp, seed2, subject, slack=2 * spacing))
    results.append(check_whole_equals_envelope(crisp, seed2, subject, tol=2 * spacing))
    seq = []
    p = far
    for _ in range(8):
        seq.append(p)
        p = crisp.maps[0](p)
    seq += [(0, 0)] * 3
    results.append(check_limit_map_continuity(crisp, ramp(space, (0, 0), 2.0 * size,
                                                          crisp.levels),
                                              subject, sequence=seq, tol=2 * spacing))

    graded = sierpinski_system(size, "graded")
    subject = f"grid-graded-{size}"
    results.append(check_apriori_bound(graded, seed2, subject, slack=2 * spacing))
    results.append(check_whole_equals_envelope(graded, seed2, subject, tol=2 * spacing))
    return results


def fixture_expectations(inst: OracleInstance) -> dict:
    """Oracle-computed ground truth worth freezing next to an instance."""
    trace = oracle_fixed_points(inst, inst.seed)
    deltas = {}
    for lab in inst.labels:
        deltas[lab] = oracle_fixed_points(inst, {lab: inst.levels}).limit
    distinct = []
    for lim in deltas.values():
        if lim not in distinct:
            distinct.append(lim)
    return {"seed_limit": trace.limit,
            "seed_steps": trace.steps,
            "delta_limits": deltas,
            "distinct_delta_limits": len(distinct)}


def save_fixture(path, inst: OracleInstance, expected: dict) -> None:
    with open(path, "w") as fh:
        json.dump({"instance": inst.to_dict(), "expected": expected}, fh,
                  indent=1, sort_keys=True)


def load_fixture(path):
    with open(path) as fh:
        d = json.load(fh)
    inst = OracleInstance.from_dict(d["instance"])
    exp = d["expected"]
    exp["seed_limit"] = {p: int(k) for p, k in exp["seed_limit"].items()}
    exp["delta_limits"] = {x: {p: int(k) for p, k in lim.items()}
                           for x, lim in exp["delta_limits"].items()}
    return inst, exp


def check_fixture(inst: OracleInstance, expected: dict) -> list:
    """Recompute a fixture's frozen values by oracle and engine and compare."""
    results = []
    subject = inst.name

    trace = oracle_fixed_points(inst, inst.seed)
    ok = (trace.limit == expected["seed_limit"]
          and trace.steps == expected["seed_steps"])
    results.append(CheckResult(
        "fixture-seed-limit", subject, ok,
        f"oracle steps={trace.steps} expected={expected['seed_steps']}"))

    sys, u0 = engine_system(inst)
    lim, cert = picard_limit(sys, u0)
    ok = lim.to_tick_dict() == expected["seed_limit"]
    results.append(CheckResult(
        "fixture-engine-limit", subject, ok,
        f"engine terminal={cert.terminal} steps={cert.steps}"))

    bad = []
    deltas = {}
    for lab, want in sorted(expected["delta_limits"].items()):
        got = oracle_fixed_points(inst, {lab: inst.levels}).limit
        deltas[lab] = got
        if got != want:
            bad.append(lab)
    results.append(CheckResult(
        "fixture-delta-limits", subject, not bad,
        f"{len(expected['delta_limits'])} starting points, "
        f"mismatches={bad!r}"))

    distinct = []
    for lim in deltas.values():
        if lim not in distinct:
            distinct.append(lim)
    want_n = expected.get("distinct_delta_limits", 1)
    results.append(CheckResult(
        "fixture-distinct-limits", subject, len(distinct) == want_n,
        f"found {len(distinct)} distinct limits, expected {want_n}"))
    return results
