"""Refinement studies: observed convergence orders and diagnostic reports."""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .constants import MIN_ORDER, REPORT_SCHEMA_VERSION, RESIDUAL_PASSES


def roundoff_floor(ds, passes=RESIDUAL_PASSES, scale=1.0, gain=1.5):
    """Size of the round-off noise left after ``passes`` chained derivative passes.

    Each accuracy-4 first-derivative pass amplifies sampling noise by at most
    about ``gain / ds`` with ``gain = 1.5`` (a second-derivative pass counts as
    two passes with ``gain`` about 2.5).  A safety factor of 10 is applied.
    """
    return 10.0 * np.finfo(float).eps * (gain / ds) ** passes * scale


def observed_orders(spacings, norms):
    """Pairwise orders log(e_i/e_{i+1}) / log(h_i/h_{i+1}) between consecutive grids."""
    h = np.asarray(spacings, dtype=float)
    e = np.asarray(norms, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])


@dataclass
class RefinementStudy:
    """Sup-norms of one residual over a ladder of grids and the verdict.

    A pair of consecutive grids passes if its observed order is at least
    ``min_order`` or if the finer norm is already below the round-off floor.
    """

    name: str
    grids: list
    spacings: list
    sup_norms: list
    floors: list
    min_order: float = MIN_ORDER
    orders: list = field(init=False)
    estimated_order: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        self.sup_norms = [float(x) for x in self.sup_norms]
        self.spacings = [float(x) for x in self.spacings]
        self.floors = [float(x) for x in self.floors]
        self.grids = [int(x) for x in self.grids]
        orders = observed_orders(self.spacings, self.sup_norms)
        exact = [self.sup_norms[i + 1] <= self.floors[i + 1] for i in range(len(orders))]
        self.orders = [float(o) for o in orders]
        effective = [np.inf if ex else o for o, ex in zip(orders, exact)]
        self.estimated_order = float(np.min(effective)) if effective else float("nan")
        self.passed = bool(np.all([ex or o >= self.min_order for o, ex in zip(orders, exact)]))

    @property
    def at_roundoff(self):
        return self.sup_norms[-1] <= self.floors[-1]

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        d["estimated_order"] = _json_float(self.estimated_order)
        d["orders"] = [_json_float(o) for o in self.orders]
        return d


def _json_float(x):
    if np.isinf(x):
        return "inf"
    if np.isnan(x):
        return "nan"
    return x


def study(name, builder, residual_norm, ladder, passes=RESIDUAL_PASSES, scale=1.0,
          min_order=MIN_ORDER, gain=1.5):
    """Run ``residual_norm(builder(n))`` over ``ladder`` and wrap the result.

    ``builder(n)`` returns an object with a ``ds`` attribute (a grid).
    ``scale`` is a number or a callable of the grid giving the magnitude of
    the sampled data that round-off acts on.
    """
    grids, spacings, norms, floors = [], [], [], []
    for n in ladder:
        g = builder(n)
        grids.append(n)
        spacings.append(g.ds)
        norms.append(residual_norm(g))
        sc = scale(g) if callable(scale) else scale
        floors.append(roundoff_floor(g.ds, passes, sc, gain))
    return RefinementStudy(name, grids, spacings, norms, floors, min_order)


@dataclass
class DiagnosticReport:
    """Collection of named checks, serialisable to versioned JSON.

    ``verdict`` overrides the conjunction of all entries when the entries are
    alternatives rather than requirements.
    """

    title: str
    studies: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    verdict: bool = None

    def add_study(self, s):
        self.studies.append(s)
        return s

    def add_check(self, name, value, passed, **extra):
        entry = {"name": name, "value": _to_jsonable(value), "pass": bool(passed)}
        entry.update({k: _to_jsonable(v) for k, v in extra.items()})
        self.checks.append(entry)
        return entry

    @property
    def passed(self):
        if self.verdict is not None:
            return bool(self.verdict)
        return all(s.passed for s in self.studies) and all(c["pass"] for c in self.checks)

    def to_dict(self):
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "title": self.title,
            "pass": self.passed,
            "meta": _to_jsonable(self.meta),
            "identities": [s.to_dict() for s in self.studies],
            "checks": self.checks,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _to_jsonable(v):
    if isinstance(v, dict):
        return {str(k): _to_jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_to_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return _json_float(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return _to_jsonable(v.tolist())
    return v
