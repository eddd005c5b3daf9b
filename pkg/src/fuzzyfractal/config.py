"""YAML run configuration: space, maps, greys, seed fuzzy set, iteration knobs.

A config document describes one system and one seed. Example (grid):

    space: {kind: grid, origin: [0, 0], spacing: 1.0, width: 65, height: 65}
    maps:
      - {kind: affine, matrix: [[0.5, 0], [0, 0.5]], offset: [0, 0]}
    greys:
      - {kind: identity}
    levels: 255
    seed: {kind: delta, point: [64, 64]}
    eps: 0.5
    budget: 500

Finite spaces use labels plus lower-triangle distance rows, table maps, and
label-keyed seeds.
"""

from dataclasses import dataclass
from typing import Optional

import yaml

from .fuzzy import (DEFAULT_LEVELS, FuzzySet, LookupGrey, OrbitalFuzzySystem,
                    PiecewiseLinearGrey, delta, indicator, ramp)
from .ifs import AffineMap, IfsSystem, TableMap
from .spaces import FiniteSpace, GridSpace, SpaceError


class ConfigError(ValueError):
    """Malformed run configuration."""


@dataclass
class RunSpec:
    """Everything a command needs: system, seed, and iteration knobs."""

    system: OrbitalFuzzySystem
    seed: FuzzySet
    eps: Optional[float]
    budget: int


def _need(d, key, where):
    if key not in d:
        raise ConfigError(f"{where}: missing key {key!r}")
    return d[key]


def build_space(d):
    kind = _need(d, "kind", "space")
    if kind == "grid":
        return GridSpace(tuple(d.get("origin", (0.0, 0.0))),
                         float(d.get("spacing", 1.0)),
                         int(_need(d, "width", "space")),
                         int(_need(d, "height", "space")))
    if kind == "finite":
        labels = [str(s) for s in _need(d, "labels", "space")]
        rows = _need(d, "distances", "space")
        return FiniteSpace.from_lower_triangle(labels, rows)
    raise ConfigError(f"space: unknown kind {kind!r}")


def build_map(space, d, i):
    kind = _need(d, "kind", f"maps[{i}]")
    if kind == "affine":
        if not isinstance(space, GridSpace):
            raise ConfigError(f"maps[{i}]: affine maps need a grid space")
        return AffineMap(space, _need(d, "matrix", f"maps[{i}]"),
                         _need(d, "offset", f"maps[{i}]"))
    if kind == "table":
        if not isinstance(space, FiniteSpace):
            raise ConfigError(f"maps[{i}]: table maps need a finite space")
        return TableMap(space, {str(a): str(b)
                                for a, b in _need(d, "mapping", f"maps[{i}]").items()})
    raise ConfigError(f"maps[{i}]: unknown kind {kind!r}")


def build_grey(d, levels, i):
    kind = _need(d, "kind", f"greys[{i}]")
    if kind == "identity":
        return PiecewiseLinearGrey.identity()
    if kind == "scale":
        return PiecewiseLinearGrey.scale(float(_need(d, "gain", f"greys[{i}]")))
    if kind == "step":
        return PiecewiseLinearGrey.step(float(_need(d, "threshold", f"greys[{i}]")))
    if kind == "piecewise":
        return PiecewiseLinearGrey(_need(d, "breaks", f"greys[{i}]"),
                                   _need(d, "starts", f"greys[{i}]"),
                                   _need(d, "ends", f"greys[{i}]"),
                                   float(_need(d, "at_one", f"greys[{i}]")))
    if kind == "table":
        return LookupGrey(levels, _need(d, "values", f"greys[{i}]"))
    if kind == "power":
        p = float(_need(d, "exponent", f"greys[{i}]"))
        if p <= 0:
            raise ConfigError(f"greys[{i}]: exponent must be positive")
        return LookupGrey.from_function(levels, lambda t: t ** p)
    raise ConfigError(f"greys[{i}]: unknown kind {kind!r}")


def _as_point(space, raw, where):
    if isinstance(space, GridSpace):
        try:
            c, r = raw
            return (int(c), int(r))
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: grid points are [col, row] pairs") from None
    return str(raw)


def build_seed(space, levels, d):
    kind = _need(d, "kind", "seed")
    if kind == "delta":
        return delta(space, _as_point(space, _need(d, "point", "seed"), "seed"), levels)
    if kind == "indicator":
        pts = [_as_point(space, p, "seed") for p in _need(d, "points", "seed")]
        return indicator(space, pts, levels)
    if kind == "rect":
        if not isinstance(space, GridSpace):
            raise ConfigError("seed: rect needs a grid space")
        c0, r0 = (int(v) for v in _need(d, "low", "seed"))
        c1, r1 = (int(v) for v in _need(d, "high", "seed"))
        pts = [(c, r) for r in range(r0, r1 + 1) for c in range(c0, c1 + 1)]
        if not pts:
            raise ConfigError("seed: empty rectangle")
        return indicator(space, pts, levels)
    if kind == "ramp":
        return ramp(space, _as_point(space, _need(d, "center", "seed"), "seed"),
                    float(_need(d, "radius", "seed")), levels)
    if kind == "ticks":
        vals = _need(d, "values", "seed")
        return FuzzySet.from_ticks(space, levels,
                                   {_as_point(space, p, "seed"): int(k)
                                    for p, k in vals.items()})
    raise ConfigError(f"seed: unknown kind {kind!r}")


def build_runspec(doc) -> RunSpec:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    try:
        space = build_space(_need(doc, "space", "config"))
        raw_maps = _need(doc, "maps", "config")
        if not raw_maps:
            raise ConfigError("maps: need at least one")
        maps = [build_map(space, m, i) for i, m in enumerate(raw_maps)]
        levels = int(doc.get("levels", DEFAULT_LEVELS))
        raw_greys = _need(doc, "greys", "config")
        if len(raw_greys) != len(maps):
            raise ConfigError("greys: need exactly one per map")
        greys = [build_grey(g, levels, i) for i, g in enumerate(raw_greys)]
        declared = doc.get("orbital_factor")
        ifs = IfsSystem.certified(space, maps,
                                  None if declared is None else float(declared))
        system = OrbitalFuzzySystem(ifs, greys, levels)
        seed = build_seed(space, levels, _need(doc, "seed", "config"))
    except (SpaceError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    eps = doc.get("eps")
    eps = None if eps is None else float(eps)
    budget = int(doc.get("budget", 500))
    return RunSpec(system=system, seed=seed, eps=eps, budget=budget)


def load_config(path) -> RunSpec:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    return build_runspec(doc)
