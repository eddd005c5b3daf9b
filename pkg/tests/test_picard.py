import pytest

from fuzzyfractal.fuzzy import (FuzzyError, FuzzySet, OrbitalFuzzySystem,
                                PiecewiseLinearGrey, delta, indicator,
                                sup_family)
from fuzzyfractal.ifs import AffineMap, IfsSystem, TableMap
from fuzzyfractal.picard import (ClassMembershipError, apriori_steps,
                                 decompose, find_witness, orbit_fractal,
                                 picard_limit, restrict, seed_diameter)
from fuzzyfractal.spaces import ConvergenceError, FiniteSpace, GridSpace


def _chain_system():
    sp = FiniteSpace.from_coordinates(["a", "b", "c"], [0.0, 1.0, 1.5])
    ifs = IfsSystem.certified(sp, [TableMap(sp, {"a": "b", "b": "c", "c": "c"})])
    return OrbitalFuzzySystem(ifs, [PiecewiseLinearGrey.step(0.5)], levels=4)


def _funnel_system():
    sp = FiniteSpace.from_coordinates(["L", "l", "r", "R"], [0.0, 3.0, 5.0, 10.0])
    ifs = IfsSystem.certified(
        sp, [TableMap(sp, {"L": "L", "l": "L", "r": "R", "R": "R"})])
    return OrbitalFuzzySystem(ifs, [PiecewiseLinearGrey.identity()], levels=4)


def _gasket_system(size=65):
    g = GridSpace((0, 0), 1.0, size, size)
    half = (size - 1) / 2
    m = [[0.5, 0.0], [0.0, 0.5]]
    ifs = IfsSystem.certified(g, [AffineMap(g, m, (0, 0)),
                                  AffineMap(g, m, (half, 0)),
                                  AffineMap(g, m, (0, half))])
    return OrbitalFuzzySystem(ifs, [PiecewiseLinearGrey.identity()] * 3,
                              levels=255)


def test_apriori_steps_formula():
    # [DERIVED] by hand: 0.5^n * 4 / 0.5 <= 1e-3 first holds at n = 13
    assert apriori_steps(0.5, 4.0, 1e-3) == 13
    assert apriori_steps(0.5, 0.0, 1e-3) == 0
    assert apriori_steps(0.5, 4.0, 100.0) == 0
    assert apriori_steps(0.0, 4.0, 1.0) == 1
    assert apriori_steps(0.0, 0.5, 1.0) == 0
    with pytest.raises(ValueError):
        apriori_steps(0.5, 4.0, 0.0)
    with pytest.raises(ValueError):
        apriori_steps(1.0, 4.0, 1e-3)


def test_picard_limit_hand_trace_certificate():
    sys_ = _chain_system()
    u0 = FuzzySet.from_ticks(sys_.space, 4, {"a": 4, "b": 2, "c": 1})
    assert seed_diameter(sys_, u0) == 1.5
    lim, cert = picard_limit(sys_, u0, keep_trace=True)
    assert lim.to_tick_dict() == {"c": 4}
    assert cert.terminal == "exact-fixed-point"
    assert cert.steps == 2
    # [DERIVED] by hand over the trace (1,1/2,1/4) -> (0,1,1) -> (0,0,1):
    # consecutive distances 1.5 then 0.5, geometric bound 3, 1.5, 0.75.
    assert cert.per_step_distance == [1.5, 0.5]
    assert cert.apriori_bound == [3.0, 1.5, 0.75]
    assert cert.bound_at(2) == 0.75
    gaps = cert.distances_to_terminal(lim)
    assert gaps == [1.5, 0.5, 0.0]
    assert all(g <= b for g, b in zip(gaps, cert.apriori_bound))


def test_picard_limit_rejects_bad_seeds():
    sys_ = _chain_system()
    sp = sys_.space
    with pytest.raises(ClassMembershipError):
        picard_limit(sys_, FuzzySet.from_ticks(sp, 4, {"a": 2}))
    with pytest.raises(FuzzyError):
        picard_limit(sys_, FuzzySet.from_ticks(sp, 8, {"a": 8}))
    other = FiniteSpace.from_coordinates(["a", "b", "c"], [0.0, 1.0, 9.0])
    with pytest.raises(FuzzyError):
        picard_limit(sys_, FuzzySet.from_ticks(other, 4, {"a": 4}))
    with pytest.raises(ValueError):
        picard_limit(sys_, delta(sp, "a", 4), budget=0)


def test_picard_limit_grid_short_circuit_when_bound_already_met():
    sys_ = _gasket_system(65)
    u0 = delta(sys_.space, (64, 64), 255)
    big = seed_diameter(sys_, u0) / (1 - sys_.orbital_factor) + 1.0
    lim, cert = picard_limit(sys_, u0, eps=big)
    assert cert.steps == 0 and cert.terminal == "tolerance-reached"
    assert lim == u0


def test_picard_limit_budget_exhaustion_attaches_certificate():
    sys_ = _gasket_system(65)
    u0 = delta(sys_.space, (64, 64), 255)
    with pytest.raises(ConvergenceError) as err:
        picard_limit(sys_, u0, eps=0.5, budget=2)
    cert = err.value.certificate
    assert cert.terminal == "budget-exhausted" and cert.steps == 2


def test_find_witness_prefers_cheap_roots():
    sys_ = _funnel_system()
    u = indicator(sys_.space, ["l", "r"], 4)
    assert find_witness(sys_, u, "l") == ("l", "l")  # full membership itself
    u2 = FuzzySet.from_ticks(sys_.space, 4, {"l": 4, "L": 1})
    # L itself never reaches full membership, but the support point l roots
    # an orbit holding both L and the full point l.
    assert find_witness(sys_, u2, "L") == ("l", "l")


def test_find_witness_walks_orbits_to_the_core():
    sys_ = _chain_system()
    u = FuzzySet.from_ticks(sys_.space, 4, {"a": 2, "c": 4})
    # the orbit of a reaches the full-membership point c
    assert find_witness(sys_, u, "a") == ("a", "c")
    u2 = FuzzySet.from_ticks(sys_.space, 4, {"a": 4, "b": 2})
    # b is not full and never reaches a full point, but sits on a's orbit
    assert find_witness(sys_, u2, "b") == ("a", "a")


def test_find_witness_failures_name_the_point():
    sys_ = _funnel_system()
    u = FuzzySet.from_ticks(sys_.space, 4, {"l": 4, "r": 2})
    with pytest.raises(ClassMembershipError) as err:
        find_witness(sys_, u, "r")
    assert "'r'" in str(err.value)
    with pytest.raises(ClassMembershipError):
        find_witness(sys_, u, "R")  # outside the support entirely


def test_restrict_keeps_the_orbit_closure_slice():
    sys_ = _funnel_system()
    u = FuzzySet.from_ticks(sys_.space, 4, {"l": 4, "r": 4, "L": 1})
    assert restrict(sys_, u, "l").to_tick_dict() == {"l": 4, "L": 1}
    assert restrict(sys_, u, "r").to_tick_dict() == {"r": 4}
    with pytest.raises(ClassMembershipError):
        restrict(sys_, u, "l", witness=("R", "R"))  # slice loses normality


def test_orbit_fractal_agrees_with_restriction_route():
    sys_ = _funnel_system()
    u = indicator(sys_.space, ["l", "r"], 4)
    part_l = orbit_fractal(sys_, u, "l")
    assert part_l.to_tick_dict() == {"L": 4}
    alt, _ = picard_limit(sys_, restrict(sys_, u, "l"))
    assert part_l == alt
    assert orbit_fractal(sys_, u, "r").to_tick_dict() == {"R": 4}


def test_decompose_splits_the_funnel_into_two_parts():
    sys_ = _funnel_system()
    u = indicator(sys_.space, ["l", "r"], 4)
    dec = decompose(sys_, u)
    assert dec.whole.to_tick_dict() == {"L": 4, "R": 4}
    assert dec.envelope == dec.whole
    assert dec.core_envelope == dec.whole
    assert dec.gap == 0.0 and dec.core_gap == 0.0
    assert dec.representatives == {"l": "l", "r": "r"}
    assert set(dec.distinct_parts) == {"l", "r"}
    assert dec.parts["l"].to_tick_dict() == {"L": 4}
    assert dec.parts["r"].to_tick_dict() == {"R": 4}


def test_decompose_shares_parts_along_one_orbit_family():
    sys_ = _chain_system()
    u = FuzzySet.from_ticks(sys_.space, 4, {"a": 4, "b": 2, "c": 1})
    dec = decompose(sys_, u)
    assert dec.representatives == {"a": "a", "b": "a", "c": "a"}
    assert len(dec.distinct_parts) == 1
    assert dec.whole == dec.envelope == dec.core_envelope
    assert dec.whole.to_tick_dict() == {"c": 4}


def test_decompose_grid_uses_the_unique_fixed_point():
    sys_ = _gasket_system(65)
    seed = sup_family([delta(sys_.space, (0, 0), 255),
                       delta(sys_.space, (64, 0), 255)])
    dec = decompose(sys_, seed)
    assert sys_.ifs.certificate.globally_contractive
    assert len(dec.distinct_parts) == 1
    assert dec.gap <= 2 * sys_.space.spacing
    assert dec.core_gap == 0.0
    assert dec.envelope == dec.core_envelope


def test_picard_limit_check_class_flag():
    sys_ = _funnel_system()
    u = FuzzySet.from_ticks(sys_.space, 4, {"l": 4, "r": 2})
    picard_limit(sys_, u)  # iteration itself is fine
    with pytest.raises(ClassMembershipError):
        picard_limit(sys_, u, check_class=True)


def test_decompose_rejects_out_of_class_seeds():
    sys_ = _funnel_system()
    u = FuzzySet.from_ticks(sys_.space, 4, {"l": 4, "r": 2})
    with pytest.raises(ClassMembershipError) as err:
        decompose(sys_, u)
    assert "'r'" in str(err.value)
