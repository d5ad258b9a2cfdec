"""Possibility contours and the operations defined on them.

A contour assigns each candidate value a plausibility in [0, 1] with
supremum (numerically) one.  Consonance makes the upper probability of an
assertion the supremum of the contour over it, and the lower probability
follows by duality.  Everything downstream of the Monte Carlo engines --
cuts, marginalization by extension, combination -- lives here.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import (
    AlphaOutOfRangeError,
    EmptyAssertionError,
    PossimError,
    ShapeMismatchError,
    UnsupportedStrategyError,
)

# Default supremum tolerances: how far below 1 the grid max may sit before
# the contour is considered inconsistent with consonance.
TOL_SUP_MC = 5e-3
TOL_SUP_CLOSED = 1e-9

KINDS = ("closed-form", "grid", "monte-carlo")


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class GridDomain:
    """1-D evaluation grid with a name for serialization and CSV headers."""

    name: str
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ShapeMismatchError("grid domain needs a 1-D array of >= 2 nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ShapeMismatchError("grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])

    @property
    def span(self) -> float:
        return self.hi - self.lo

    def with_extra_nodes(self, extra) -> "GridDomain":
        pts = np.asarray(extra, dtype=float)
        pts = pts[(pts >= self.lo) & (pts <= self.hi)]
        if pts.size == 0:
            return self
        merged = np.unique(np.concatenate([self.nodes, pts]))
        return GridDomain(self.name, merged)


@dataclass(frozen=True)
class FiniteDomain:
    """Finite label set, e.g. categories of a single future draw."""

    name: str
    labels: tuple

    def __post_init__(self):
        if len(self.labels) == 0:
            raise ShapeMismatchError("finite domain needs at least one label")
        object.__setattr__(self, "labels", tuple(self.labels))

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise EmptyAssertionError(f"label {label!r} not in domain")


@dataclass(frozen=True)
class ProductDomain:
    """Rectangular grid in d dimensions (product of 1-D grids)."""

    axes: tuple

    def __post_init__(self):
        if len(self.axes) < 2:
            raise ShapeMismatchError("product domain needs >= 2 axes")
        object.__setattr__(self, "axes", tuple(self.axes))

    @property
    def shape(self):
        return tuple(ax.nodes.size for ax in self.axes)

    def mesh(self):
        """All grid points, shape (prod(shape), d), row-major."""
        grids = np.meshgrid(*[ax.nodes for ax in self.axes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)


@dataclass(frozen=True)
class LatticeDomain:
    """Explicit point list (e.g. a simplex lattice); no interpolation."""

    name: str
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ShapeMismatchError("lattice needs a (m, d) point array")
        object.__setattr__(self, "points", pts)


# ---------------------------------------------------------------------------
# contour


class PossibilityContour:
    """Plausibility contour over a domain.

    kind is one of:
      "closed-form"  -- exact evaluator, no Monte Carlo error
      "grid"         -- node values, linear interpolation between nodes
      "monte-carlo"  -- evaluator backed by simulation (fresh or cached)

    Grid values of NaN mark points with no information (e.g. empty fibers
    after extension); they are treated as missing, never as zero.
    """

    def __init__(self, domain, *, kind, values=None, evaluator=None,
                 mc_se=None, tol_sup=None, meta=None):
        if kind not in KINDS:
            raise PossimError(f"unknown contour kind {kind!r}")
        if kind == "grid" and values is None:
            raise PossimError("grid contour needs node values")
        if kind != "grid" and evaluator is None:
            raise PossimError(f"{kind} contour needs an evaluator")
        self.domain = domain
        self.kind = kind
        self.evaluator = evaluator
        self.meta = dict(meta or {})
        if values is not None:
            values = np.asarray(values, dtype=float)
            bad = values[~np.isnan(values)]
            if bad.size and (bad.min() < -1e-9 or bad.max() > 1 + 1e-9):
                raise PossimError("contour values must lie in [0, 1]")
            values = np.clip(values, 0.0, 1.0, out=values.copy())
        self.values = values
        self.mc_se = None if mc_se is None else np.asarray(mc_se, dtype=float)
        if tol_sup is None:
            tol_sup = TOL_SUP_CLOSED if kind == "closed-form" else TOL_SUP_MC
        self.tol_sup = float(tol_sup)

    # -- evaluation --------------------------------------------------------

    def __call__(self, x):
        if isinstance(self.domain, FiniteDomain):
            xs = np.atleast_1d(x) if not np.isscalar(x) and not isinstance(x, str) else [x]
            out = np.array([self.values[self.domain.index(lab)] for lab in xs])
            return float(out[0]) if len(out) == 1 else out
        if self.kind == "grid":
            return self._interp(x)
        return self.evaluator(x)

    def _interp(self, x):
        if isinstance(self.domain, GridDomain):
            x = np.asarray(x, dtype=float)
            vals = np.interp(x, self.domain.nodes, self.values, left=0.0, right=0.0)
            # propagate missing nodes: any NaN neighbour poisons np.interp already
            return float(vals) if vals.ndim == 0 else vals
        if isinstance(self.domain, ProductDomain):
            from scipy.interpolate import RegularGridInterpolator

            interp = RegularGridInterpolator(
                [ax.nodes for ax in self.domain.axes],
                self.values,
                bounds_error=False,
                fill_value=0.0,
            )
            x = np.atleast_2d(np.asarray(x, dtype=float))
            out = interp(x)
            return float(out[0]) if out.size == 1 else out
        raise PossimError("interpolation unsupported on this domain")

    def grid_values(self) -> np.ndarray:
        """Contour over the domain's nodes (evaluating if necessary)."""
        if self.values is not None:
            return self.values
        if isinstance(self.domain, GridDomain):
            vals = np.array([float(self.evaluator(t)) for t in self.domain.nodes])
        elif isinstance(self.domain, ProductDomain):
            vals = np.array([float(self.evaluator(p)) for p in self.domain.mesh()])
            vals = vals.reshape(self.domain.shape)
        elif isinstance(self.domain, LatticeDomain):
            vals = np.array([float(self.evaluator(p)) for p in self.domain.points])
        else:
            raise PossimError("cannot tabulate this domain")
        self.values = np.clip(vals, 0.0, 1.0)
        return self.values

    def max_value(self) -> float:
        vals = self.grid_values()
        return float(np.nanmax(vals))

    def check_consonance(self):
        if self.max_value() < 1.0 - self.tol_sup:
            raise PossimError(
                f"grid max {self.max_value():.6f} below 1 - tol_sup; "
                "evaluation grid likely misses the plausibility peak"
            )


# ---------------------------------------------------------------------------
# assertions and cut regions


@dataclass(frozen=True)
class SubsetAssertion:
    """A subset of a finite domain's labels."""

    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))


@dataclass(frozen=True)
class IntervalsAssertion:
    """Union of closed intervals of a 1-D domain."""

    intervals: tuple  # of (lo, hi)

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        for a, b in ivs:
            if not a <= b:
                raise PossimError(f"interval ({a}, {b}) is empty")
        object.__setattr__(self, "intervals", ivs)


@dataclass(frozen=True)
class CurveAssertion:
    """One-parameter family {curve(w) : lo <= w <= hi} inside the domain."""

    curve: object  # callable w -> domain point
    lo: float
    hi: float
    n_scan: int = 201


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_unbounded: bool = False
    hi_unbounded: bool = False

    def __str__(self):
        left = "-inf" if self.lo_unbounded else f"{self.lo:.6g}"
        right = "inf" if self.hi_unbounded else f"{self.hi:.6g}"
        return f"({left}, {right})"


@dataclass
class Region:
    """An alpha-cut: union of intervals (1-D) or a label subset (finite)."""

    level: float
    intervals: list = field(default_factory=list)
    labels: tuple = ()

    def contains(self, x) -> bool:
        if self.labels:
            return x in self.labels
        return any(iv.lo <= x <= iv.hi for iv in self.intervals)

    @property
    def unbounded(self) -> bool:
        return any(iv.lo_unbounded or iv.hi_unbounded for iv in self.intervals)

    def __str__(self):
        if self.labels:
            return "{" + ", ".join(map(str, self.labels)) + "}"
        if not self.intervals:
            return "{}"
        return " u ".join(str(iv) for iv in self.intervals)


# ---------------------------------------------------------------------------
# upper / lower probability


def _refine_max(fn, lo, hi, best_x, best_v):
    """Polish a grid argmax with bounded scalar maximization."""
    if hi <= lo:
        return best_v
    res = optimize.minimize_scalar(
        lambda t: -fn(t), bounds=(lo, hi), method="bounded",
        options={"xatol": max(1e-10, 1e-9 * (hi - lo))},
    )
    cand = -float(res.fun)
    return max(best_v, cand)


def upper_probability(contour: PossibilityContour, assertion) -> float:
    """sup of the contour over the assertion (consonance)."""
    dom = contour.domain
    if isinstance(assertion, SubsetAssertion):
        if not isinstance(dom, FiniteDomain):
            raise ShapeMismatchError("subset assertion needs a finite domain")
        if not assertion.labels:
            raise EmptyAssertionError("empty assertion")
        vals = contour.grid_values()
        idx = [dom.index(lab) for lab in assertion.labels]
        return float(np.max(vals[idx]))

    if isinstance(assertion, IntervalsAssertion):
        if not isinstance(dom, GridDomain):
            raise ShapeMismatchError("interval assertion needs a 1-D grid domain")
        nodes = dom.nodes
        fn = contour.__call__ if contour.kind != "grid" else contour._interp
        best = -np.inf
        touched = False
        for a, b in assertion.intervals:
            a_c, b_c = max(a, dom.lo), min(b, dom.hi)
            if a_c > b_c:
                continue
            touched = True
            inside = nodes[(nodes >= a_c) & (nodes <= b_c)]
            cand_x = np.unique(np.concatenate([inside, [a_c, b_c]]))
            cand_v = np.array([float(fn(x)) for x in cand_x])
            j = int(np.nanargmax(cand_v))
            best = max(best, cand_v[j])
            # local refinement between neighbouring candidates
            lo_b = cand_x[max(j - 1, 0)]
            hi_b = cand_x[min(j + 1, len(cand_x) - 1)]
            best = _refine_max(lambda t: float(fn(t)), lo_b, hi_b, cand_x[j], best)
        if not touched:
            raise EmptyAssertionError("assertion does not meet the domain")
        return float(min(1.0, best))

    if isinstance(assertion, CurveAssertion):
        fn = lambda w: float(contour(assertion.curve(w)))
        ws = np.linspace(assertion.lo, assertion.hi, assertion.n_scan)
        vals = np.array([fn(w) for w in ws])
        j = int(np.argmax(vals))
        best = float(vals[j])
        lo_b = ws[max(j - 1, 0)]
        hi_b = ws[min(j + 1, len(ws) - 1)]
        best = _refine_max(fn, lo_b, hi_b, ws[j], best)
        return float(min(1.0, best))

    raise PossimError(f"unknown assertion type {type(assertion)!r}")


def _complement(assertion, dom):
    if isinstance(assertion, SubsetAssertion):
        rest = tuple(lab for lab in dom.labels if lab not in assertion.labels)
        return SubsetAssertion(rest) if rest else None
    if isinstance(assertion, IntervalsAssertion):
        ivs = sorted((max(a, dom.lo), min(b, dom.hi)) for a, b in assertion.intervals
                     if max(a, dom.lo) <= min(b, dom.hi))
        gaps = []
        cursor = dom.lo
        for a, b in ivs:
            if a > cursor:
                gaps.append((cursor, a))
            cursor = max(cursor, b)
        if cursor < dom.hi:
            gaps.append((cursor, dom.hi))
        return IntervalsAssertion(tuple(gaps)) if gaps else None
    raise UnsupportedStrategyError(
        "lower probability needs an assertion with a representable complement"
    )


def lower_probability(contour: PossibilityContour, assertion) -> float:
    """1 - upper probability of the complement (duality)."""
    comp = _complement(assertion, contour.domain)
    if comp is None:
        # assertion covers the whole domain: complement empty, sup over it 0
        return 1.0
    return 1.0 - upper_probability(contour, comp)


# ---------------------------------------------------------------------------
# alpha cuts


def _bisect_crossing(fn, alpha, x_above, x_below, n_iter=80):
    """Point where fn crosses alpha between a node above and a node below."""
    a, b = x_above, x_below
    for _ in range(n_iter):
        m = 0.5 * (a + b)
        if fn(m) > alpha:
            a = m
        else:
            b = m
        if abs(b - a) <= 1e-15 * max(1.0, abs(a), abs(b)):
            break
    return 0.5 * (a + b)


def alpha_cut(contour: PossibilityContour, alpha: float) -> Region:
    """{x : contour(x) > alpha}; the 100(1-alpha)% plausibility region."""
    if not (0.0 <= alpha < 1.0):
        raise AlphaOutOfRangeError(f"alpha must be in [0, 1), got {alpha}")
    dom = contour.domain
    if isinstance(dom, FiniteDomain):
        vals = contour.grid_values()
        labs = tuple(lab for lab, v in zip(dom.labels, vals) if v > alpha)
        return Region(level=alpha, labels=labs)
    if not isinstance(dom, GridDomain):
        raise ShapeMismatchError("alpha_cut needs a 1-D or finite domain")

    nodes = dom.nodes
    vals = contour.grid_values()
    fn = contour.__call__ if contour.kind != "grid" else contour._interp
    above = np.where(np.isnan(vals), False, vals > alpha)
    if not above.any():
        return Region(level=alpha, intervals=[])

    intervals = []
    i = 0
    n = len(nodes)
    while i < n:
        if not above[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and above[j + 1]:
            j += 1
        if i == 0:
            lo, lo_unb = float(nodes[0]), True
        else:
            lo = float(_bisect_crossing(lambda t: float(fn(t)), alpha,
                                        nodes[i], nodes[i - 1]))
            lo_unb = False
        if j == n - 1:
            hi, hi_unb = float(nodes[-1]), True
        else:
            hi = float(_bisect_crossing(lambda t: float(fn(t)), alpha,
                                        nodes[j], nodes[j + 1]))
            hi_unb = False
        intervals.append(Interval(lo, hi, lo_unb, hi_unb))
        i = j + 1
    return Region(level=alpha, intervals=intervals)


# ---------------------------------------------------------------------------
# extension (marginalization of a contour through a feature map)


def extend(contour: PossibilityContour, f, target: GridDomain) -> PossibilityContour:
    """Contour of phi = f(theta) by the extension principle.

    Each source point contributes its plausibility to both target nodes
    bracketing f(theta), and nodes keep the running max.  Under linear
    interpolation this guarantees the extension dominates the source:
    pi_f(f(theta)) >= pi(theta) at every tabulated theta.  Nodes whose
    fiber is empty are recorded as NaN (missing), never zero.
    """
    dom = contour.domain
    if isinstance(dom, GridDomain):
        points = dom.nodes.reshape(-1, 1)
    elif isinstance(dom, ProductDomain):
        points = dom.mesh()
    elif isinstance(dom, LatticeDomain):
        points = dom.points
    else:
        raise ShapeMismatchError("extend needs a grid, product, or lattice domain")

    source_vals = np.asarray(contour.grid_values(), dtype=float).ravel()
    try:
        fv = np.asarray(f(points), dtype=float).ravel()
        if fv.shape[0] != points.shape[0]:
            raise ValueError
    except Exception:
        fv = np.array([float(f(p if p.size > 1 else p[0])) for p in points])

    tnodes = target.nodes
    ok = ~np.isnan(source_vals) & ~np.isnan(fv)
    fv, sv = fv[ok], source_vals[ok]
    # indices of the bracketing nodes; outside the target range clips to the
    # nearest end node (caller should pick a covering target grid)
    right = np.searchsorted(tnodes, fv, side="left")
    left = np.clip(right - 1, 0, tnodes.size - 1)
    right = np.clip(right, 0, tnodes.size - 1)
    acc = np.full(tnodes.size, -np.inf)
    np.maximum.at(acc, left, sv)
    np.maximum.at(acc, right, sv)
    out = np.where(np.isfinite(acc), acc, np.nan)
    return PossibilityContour(target, kind="grid", values=out,
                              tol_sup=contour.tol_sup,
                              meta={"extended_from": getattr(dom, "name", "theta")})


# ---------------------------------------------------------------------------
# scalar transforms


def prob_to_poss(log_density, sampler, z, n_mc: int, rng) -> float:
    """Plausibility of z under a single probabilistic source.

    Ranks z by density: the returned value estimates the chance that a
    fresh draw is no more likely than z.  log_density of -inf at z gives 0.
    """
    ld_z = float(np.asarray(log_density(z)))
    if math.isinf(ld_z) and ld_z < 0:
        return 0.0
    draws = sampler(rng, int(n_mc))
    ld = np.asarray(log_density(draws), dtype=float)
    if ld.shape[0] != n_mc:
        raise ShapeMismatchError("log_density must vectorize over draws")
    return float(np.mean(ld <= ld_z))


def fisher_combine(u: float, v: float) -> float:
    """Combine two independent plausibilities: t(1 - log t) with t = u*v.

    Equals the chi-square(4) survival function at -2 log(u*v), with the
    convention 0 * log 0 = 0.
    """
    for w in (u, v):
        if not (-1e-12 <= w <= 1 + 1e-12):
            raise PossimError(f"plausibilities must lie in [0, 1], got {w}")
    t = float(np.clip(u, 0.0, 1.0) * np.clip(v, 0.0, 1.0))
    if t <= 0.0:
        return 0.0
    return float(min(1.0, t * (1.0 - math.log(t))))


# ---------------------------------------------------------------------------
# serialization


def _axis_names(domain):
    if isinstance(domain, GridDomain):
        return [domain.name]
    if isinstance(domain, ProductDomain):
        return [ax.name for ax in domain.axes]
    if isinstance(domain, LatticeDomain):
        return [f"{domain.name}{k + 1}" for k in range(domain.points.shape[1])]
    if isinstance(domain, FiniteDomain):
        return [domain.name]
    raise PossimError("unserializable domain")


def contour_to_csv(contour: PossibilityContour, header_meta: dict | None = None) -> str:
    """CSV text: coordinate columns, plausibility, mc_se.

    Floats are written with repr (shortest round trip), so reading the text
    back reproduces grid contours bit for bit.
    """
    dom = contour.domain
    vals = np.asarray(contour.grid_values(), dtype=float).ravel()
    se = contour.mc_se
    se = np.full(vals.shape, np.nan) if se is None else np.asarray(se, float).ravel()

    if isinstance(dom, FiniteDomain):
        coords = [[str(lab)] for lab in dom.labels]
    elif isinstance(dom, GridDomain):
        coords = [[repr(float(x))] for x in dom.nodes]
    elif isinstance(dom, ProductDomain):
        coords = [[repr(float(c)) for c in p] for p in dom.mesh()]
    elif isinstance(dom, LatticeDomain):
        coords = [[repr(float(c)) for c in p] for p in dom.points]
    else:
        raise PossimError("unserializable domain")

    meta = {"kind": contour.kind, "tol_sup": contour.tol_sup,
            "domain": _domain_to_dict(dom)}
    meta.update(contour.meta)
    if header_meta:
        meta.update(header_meta)

    buf = io.StringIO()
    buf.write("# possim-contour v1\n")
    buf.write("# meta: " + json.dumps(meta, sort_keys=True) + "\n")
    buf.write(",".join(_axis_names(dom) + ["plausibility", "mc_se"]) + "\n")
    for row, v, s in zip(coords, vals, se):
        sv = "" if np.isnan(s) else repr(float(s))
        pv = "" if np.isnan(v) else repr(float(v))
        buf.write(",".join(row + [pv, sv]) + "\n")
    return buf.getvalue()


def _domain_to_dict(dom):
    if isinstance(dom, GridDomain):
        return {"type": "grid", "name": dom.name, "nodes": [repr(float(x)) for x in dom.nodes]}
    if isinstance(dom, FiniteDomain):
        return {"type": "finite", "name": dom.name, "labels": list(dom.labels)}
    if isinstance(dom, ProductDomain):
        return {"type": "product", "axes": [_domain_to_dict(ax) for ax in dom.axes]}
    if isinstance(dom, LatticeDomain):
        return {"type": "lattice", "name": dom.name,
                "points": [[repr(float(c)) for c in p] for p in dom.points]}
    raise PossimError("unserializable domain")


def _domain_from_dict(d):
    if d["type"] == "grid":
        return GridDomain(d["name"], np.array([float(x) for x in d["nodes"]]))
    if d["type"] == "finite":
        return FiniteDomain(d["name"], tuple(d["labels"]))
    if d["type"] == "product":
        return ProductDomain(tuple(_domain_from_dict(a) for a in d["axes"]))
    if d["type"] == "lattice":
        return LatticeDomain(d["name"], np.array([[float(c) for c in p] for p in d["points"]]))
    raise PossimError(f"unknown domain type {d['type']!r}")


def contour_to_json(contour: PossibilityContour, extra: dict | None = None) -> str:
    vals = np.asarray(contour.grid_values(), dtype=float).ravel()
    se = contour.mc_se
    doc = {
        "format": "possim-contour-v1",
        "kind": contour.kind,
        "tol_sup": contour.tol_sup,
        "domain": _domain_to_dict(contour.domain),
        "values": [None if np.isnan(v) else repr(float(v)) for v in vals],
        "mc_se": None if se is None else [None if np.isnan(s) else repr(float(s))
                                          for s in np.asarray(se, float).ravel()],
        "meta": contour.meta,
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=1)


def contour_from_json(text: str) -> PossibilityContour:
    doc = json.loads(text)
    dom = _domain_from_dict(doc["domain"])
    vals = np.array([np.nan if v is None else float(v) for v in doc["values"]])
    if isinstance(dom, ProductDomain):
        vals = vals.reshape(dom.shape)
    se = doc.get("mc_se")
    if se is not None:
        se = np.array([np.nan if s is None else float(s) for s in se])
    # evaluator-backed contours materialize to grid kind on the round trip
    kind = "grid"
    return PossibilityContour(dom, kind=kind, values=vals, mc_se=se,
                              tol_sup=doc.get("tol_sup"), meta=doc.get("meta"))


def contour_from_csv(text: str) -> PossibilityContour:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    meta = {}
    body = []
    for ln in lines:
        if ln.startswith("# meta: "):
            meta = json.loads(ln[len("# meta: "):])
        elif not ln.startswith("#"):
            body.append(ln)
    if not meta:
        raise PossimError("missing meta header line")
    dom = _domain_from_dict(meta["domain"])
    rows = [ln.split(",") for ln in body[1:]]  # body[0] is the column header
    vals = np.array([np.nan if r[-2] == "" else float(r[-2]) for r in rows])
    se = np.array([np.nan if r[-1] == "" else float(r[-1]) for r in rows])
    if np.all(np.isnan(se)):
        se = None
    if isinstance(dom, ProductDomain):
        vals = vals.reshape(dom.shape)
    drop = {"kind", "tol_sup", "domain"}
    extra_meta = {k: v for k, v in meta.items() if k not in drop}
    return PossibilityContour(dom, kind="grid", values=vals, mc_se=se,
                              tol_sup=meta.get("tol_sup"), meta=extra_meta)
