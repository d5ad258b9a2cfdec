"""Contour container invariants: cuts, duality, extension, serialization.

The property tests draw arbitrary grid contours (values in [0,1] with at
least one exact 1) rather than model output, so they exercise the algebra
independently of any inference engine.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import possim as ps


def make_grid_contour(values, lo=-3.0, hi=3.0):
    values = np.asarray(values, dtype=float)
    grid = np.linspace(lo, hi, values.size)
    return ps.PossibilityContour(ps.GridDomain("phi", grid), kind="grid",
                                 values=values)


unit_floats = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def consonant_values(draw, min_size=3, max_size=40):
    vals = draw(st.lists(unit_floats, min_size=min_size, max_size=max_size))
    vals = np.asarray(vals)
    vals[draw(st.integers(0, vals.size - 1))] = 1.0
    return vals


# ---------------------------------------------------------------------------
# alpha cuts


alpha_floats = st.floats(min_value=0.0, max_value=0.999, allow_nan=False)


@given(consonant_values(), alpha_floats, alpha_floats)
@settings(max_examples=200, deadline=None)
def test_alpha_cut_nesting(vals, a1, a2):
    c = make_grid_contour(vals)
    lo, hi = sorted((a1, a2))
    inner = ps.alpha_cut(c, hi)
    outer = ps.alpha_cut(c, lo)
    for iv in inner.intervals:
        assert any(o.lo <= iv.lo and iv.hi <= o.hi for o in outer.intervals)


def test_alpha_cut_matches_plausibility_interval():
    vals = np.exp(-0.5 * np.linspace(-3, 3, 61) ** 2)
    vals[30] = 1.0
    c = make_grid_contour(vals)
    cut = ps.alpha_cut(c, 0.1)
    iv = ps.plausibility_interval(c, 0.9)
    assert cut.intervals[0].lo == iv.intervals[0].lo
    assert cut.intervals[0].hi == iv.intervals[0].hi


def test_alpha_cut_rejects_bad_level():
    c = make_grid_contour([0.2, 1.0, 0.3])
    with pytest.raises(ps.AlphaOutOfRangeError):
        ps.alpha_cut(c, 1.5)
    with pytest.raises(ps.AlphaOutOfRangeError):
        ps.alpha_cut(c, -0.1)


def test_peak_always_inside_every_cut():
    vals = np.exp(-np.abs(np.linspace(-3, 3, 121)))
    c = make_grid_contour(vals)
    peak = c.domain.nodes[int(np.argmax(c.grid_values()))]
    for a in (0.0, 0.25, 0.5, 0.9, 0.999):
        assert ps.alpha_cut(c, a).contains(peak)


# ---------------------------------------------------------------------------
# duality: lower(A) = 1 - upper(not A), exactly


@given(consonant_values(min_size=5), st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=200, deadline=None)
def test_duality_identity_exact(vals, a, b):
    # necessity of A and plausibility of the closed complement must trade
    # off exactly, with the complement built by hand through the public sup
    c = make_grid_contour(vals)
    lo, hi = sorted((a, b))
    inside = ps.IntervalsAssertion(((lo, hi),))
    complement = ps.IntervalsAssertion(((c.domain.lo, lo), (hi, c.domain.hi)))
    lower = ps.lower_probability(c, inside)
    upper_comp = ps.upper_probability(c, complement)
    assert lower == 1.0 - upper_comp


@given(consonant_values(min_size=5))
@settings(max_examples=100, deadline=None)
def test_upper_dominates_lower(vals):
    c = make_grid_contour(vals)
    A = ps.IntervalsAssertion(((-1.0, 1.0),))
    assert ps.lower_probability(c, A) <= ps.upper_probability(c, A)


def test_upper_probability_is_sup_over_assertion():
    vals = np.exp(-0.5 * np.linspace(-3, 3, 61) ** 2)
    c = make_grid_contour(vals)
    A = ps.IntervalsAssertion(((0.5, 2.0),))
    nodes = c.domain.nodes
    mask = (nodes >= 0.5) & (nodes <= 2.0)
    assert ps.upper_probability(c, A) == pytest.approx(
        float(np.max(vals[mask])), abs=1e-12)


def test_empty_assertion_rejected():
    c = make_grid_contour([0.2, 1.0, 0.3])
    with pytest.raises(ps.EmptyAssertionError):
        ps.upper_probability(c, ps.IntervalsAssertion(()))


# ---------------------------------------------------------------------------
# extension


@given(consonant_values(min_size=5, max_size=30))
@settings(max_examples=100, deadline=None)
def test_extension_dominance(vals):
    # pi^f(f(theta)) >= pi(theta) for every grid node
    c = make_grid_contour(vals)
    target = ps.GridDomain("g", np.linspace(0.0, 9.0, 25))
    ext = ps.extend(c, lambda p: p ** 2, target)
    for node, v in zip(c.domain.nodes, c.grid_values()):
        assert float(ext(node ** 2)) >= v - 1e-12


def test_extension_of_monotone_map_thickens_by_one_node():
    # each source point feeds both bracketing target nodes (that is what
    # buys the dominance guarantee), so an exact-hit monotone map yields
    # the running max of adjacent values, never anything smaller
    vals = np.exp(-0.5 * np.linspace(-3, 3, 61) ** 2)
    c = make_grid_contour(vals)
    shift = ps.extend(c, lambda p: p + 10.0,
                      ps.GridDomain("shifted", c.domain.nodes + 10.0))
    expected = np.maximum(vals, np.append(vals[1:], vals[-1]))
    assert np.allclose(shift.grid_values(), expected, atol=1e-12)


def test_extension_from_product_domain(y10):
    model = ps.NormalIID(10, interest="mean")
    plan = ps.MonteCarloPlan(np.linspace(-1, 1, 9), n_mc=200, seed=3)
    axes = (("mean", np.linspace(-1, 1, 9)), ("sd", np.geomspace(0.5, 2, 9)))
    joint = ps.contour_full_parameter(model, y10, plan, axes)
    naive = ps.extend(joint, lambda pts: pts[:, 0],
                      ps.GridDomain("mean", np.linspace(-1, 1, 9)))
    # the extension is a sup over sd fibers, so it dominates any single fiber
    sd_nodes = joint.domain.axes[1].nodes
    vals = joint.grid_values().reshape(len(joint.domain.axes[0].nodes),
                                       len(sd_nodes))
    got = np.array([float(naive(m)) for m in np.linspace(-1, 1, 9)])
    keep = np.isin(joint.domain.axes[0].nodes, np.linspace(-1, 1, 9))
    assert np.all(got >= vals[keep].max(axis=1) - 1e-12)


# ---------------------------------------------------------------------------
# serialization


def test_csv_roundtrip():
    vals = np.exp(-0.5 * np.linspace(-3, 3, 61) ** 2)
    c = make_grid_contour(vals)
    back = ps.contour_from_csv(ps.contour_to_csv(c))
    assert np.array_equal(back.grid_values(), c.grid_values())
    assert np.array_equal(back.domain.nodes, c.domain.nodes)


def test_json_roundtrip_preserves_meta():
    c = make_grid_contour([0.1, 1.0, 0.4])
    c.meta["engine"] = "unit-test"
    back = ps.contour_from_json(ps.contour_to_json(c))
    assert back.meta["engine"] == "unit-test"
    assert np.array_equal(back.grid_values(), c.grid_values())


def test_finite_domain_contour():
    dom = ps.FiniteDomain("label", ("a", "b", "c"))
    c = ps.PossibilityContour(dom, kind="grid",
                              values=np.array([1.0, 0.5, 0.25]))
    assert float(c("a")) == 1.0
    cut = ps.alpha_cut(c, 0.3)
    assert cut.contains("a") and cut.contains("b") and not cut.contains("c")
