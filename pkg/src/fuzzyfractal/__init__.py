"""Fuzzy fractals of orbital function systems.

Build a system from contractive-on-orbits maps and grey level maps, iterate
the fuzzy set operator to its fixed point, split that fixed point into
per-point parts, and check the structural identities relating them.
"""

from .fuzzy import (FuzzyError, FuzzySet, LookupGrey, OrbitalFuzzySystem,
                    PiecewiseLinearGrey, apply_grey, d_infinity, delta,
                    hb_apply, indicator, pushforward, ramp, sup_family)
from .ifs import (AffineMap, IfsSystem, OrbitalCheck, TableMap, attractor,
                  check_orbital_condition, fractal_operator, orbit,
                  orbit_closure)
from .picard import (ClassMembershipError, ConvergenceCertificate,
                     Decomposition, apriori_steps, decompose, find_witness,
                     orbit_fractal, picard_limit, restrict)
from .spaces import (CompactSet, ConvergenceError, FiniteSpace, GridSpace,
                     SpaceError, hausdorff, hyperspace_limit)

__version__ = "0.1.0"

__all__ = [
    "AffineMap", "ClassMembershipError", "CompactSet",
    "ConvergenceCertificate", "ConvergenceError", "Decomposition",
    "FiniteSpace", "FuzzyError", "FuzzySet", "GridSpace", "IfsSystem",
    "LookupGrey", "OrbitalCheck", "OrbitalFuzzySystem",
    "PiecewiseLinearGrey", "SpaceError", "TableMap", "apply_grey", "apriori_steps",
    "attractor", "check_orbital_condition", "d_infinity", "decompose",
    "delta", "find_witness", "fractal_operator", "hausdorff", "hb_apply",
    "hyperspace_limit", "indicator", "orbit", "orbit_closure",
    "orbit_fractal", "picard_limit", "pushforward", "ramp", "restrict",
    "sup_family",
]
