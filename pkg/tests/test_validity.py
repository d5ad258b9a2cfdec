"""Simulation diagnostics: coverage, calibration CDFs, tail tables."""

import json

import numpy as np
import pytest

import possim as ps
from possim.validity import (ValidityReport, contour_at_truth_batch,
                             coverage_batch, directional_pvalues,
                             markdown_table, tail_bins_batch,
                             validity_cdf_batch)

PVALS = np.array([0.001, 0.01, 0.02, 0.5, 0.98, 0.99, 0.999, 1.0])


# ---------------------------------------------------------------------------
# pure bookkeeping


def test_coverage_from_pis_conventions():
    pis = np.array([0.2, 0.04, 0.96, 0.5])
    assert ps.coverage_from_pis(pis, 0.95) == 0.75  # pi > 0.05 three times
    assert ps.coverage_from_pis(pis, 0.0) == 1.0
    with pytest.raises(ps.InvalidParameterError):
        ps.coverage_from_pis(pis, 1.0)
    with pytest.raises(ps.InvalidParameterError):
        ps.coverage_from_pis(pis, -0.1)


def test_pvalue_bin_table_hand_counts():
    got = ps.pvalue_bin_table(PVALS)
    assert np.allclose(got, [12.5, 12.5, 12.5, 12.5, 12.5, 12.5, 25.0])
    with pytest.raises(ps.InvalidParameterError):
        ps.pvalue_bin_table(PVALS, bin_edges=(0.0, 0.5, 0.5, 1.0))


def test_tail_bins_hand_counts():
    got = ps.tail_bins(PVALS)
    assert np.allclose(got, [12.5, 25.0, 37.5, 50.0, 37.5, 25.0])


def test_directional_pvalues_fold_by_side():
    got = directional_pvalues([0.4, 0.6], [-1.0, 1.0], 0.0)
    assert np.allclose(got, [0.2, 0.7])


def test_markdown_table_layout():
    got = markdown_table(["a", "b"], [[1, 2], ["x", "y"]])
    assert got == "| a | b |\n| --- | --- |\n| 1 | 2 |\n| x | y |\n"


def test_validity_report_requires_monotone_cdf():
    with pytest.raises(ps.PossimError):
        ValidityReport(np.array([0.1, 0.2]), np.array([0.3, 0.1]),
                       np.array([0.01, 0.01]), n_sims=10, truth={})


def test_dominates_diagonal():
    ok = ValidityReport(np.array([0.1, 0.2]), np.array([0.05, 0.15]),
                        np.array([0.01, 0.01]), n_sims=100, truth={})
    assert ok.dominates_diagonal()
    bad = ValidityReport(np.array([0.1, 0.2]), np.array([0.2, 0.2]),
                         np.array([0.01, 0.01]), n_sims=100, truth={})
    assert not bad.dominates_diagonal()


def test_validity_report_serialization_roundtrip():
    rep = ValidityReport(np.array([0.1, 0.2]), np.array([0.05, 0.15]),
                         np.array([0.01, 0.012]), n_sims=100,
                         truth={"phi_star": 0.5})
    body = json.loads(rep.to_json())
    assert [float(x) for x in body["cdf_hat"]] == [0.05, 0.15]
    assert body["n_sims"] == 100
    lines = rep.to_csv().strip().split("\n")
    assert lines[0] == "alpha,cdf_hat,se"
    assert len(lines) == 3


# ---------------------------------------------------------------------------
# batch path on a pivot model: the contour at the truth is uniform


def test_batch_coverage_matches_nominal_on_pivot_model():
    model = ps.NormalKnownVariance(8, 1.0)
    plan = ps.MonteCarloPlan(np.linspace(-2, 2, 5), n_mc=2000, seed=3)
    cov = coverage_batch(model, 0.0, 0.0, 0.9, n_sims=2000, plan=plan)
    assert abs(cov - 0.9) <= 3 * np.sqrt(0.9 * 0.1 / 2000) + 1e-3


def test_batch_validity_cdf_hugs_diagonal_on_pivot_model():
    model = ps.NormalKnownVariance(8, 1.0)
    plan = ps.MonteCarloPlan(np.linspace(-2, 2, 5), n_mc=2000, seed=3)
    rep = validity_cdf_batch(model, 0.0, 0.0, np.linspace(0.05, 0.95, 10),
                             n_sims=2000, plan=plan)
    assert rep.dominates_diagonal(slack=4.0)
    # ... and is not wildly conservative either: a pivot is exactly uniform
    assert np.max(np.abs(rep.cdf_hat - rep.alpha_grid)) < 0.04


def test_batch_paths_share_simulated_datasets():
    model = ps.NormalKnownVariance(8, 1.0)
    plan = ps.MonteCarloPlan(np.linspace(-2, 2, 5), n_mc=500, seed=3)
    pis, phi_hats = contour_at_truth_batch(model, 0.0, 0.0, 300, plan)
    rep = validity_cdf_batch(model, 0.0, 0.0, np.array([0.1, 0.5]), 300, plan)
    assert np.allclose(rep.cdf_hat, [np.mean(pis <= 0.1), np.mean(pis <= 0.5)])
    cov = coverage_batch(model, 0.0, 0.0, 0.8, 300, plan)
    assert cov == ps.coverage_from_pis(pis, 0.8)
    assert phi_hats.shape == (300,)


def test_tail_bins_batch_symmetric_at_pivot_truth():
    model = ps.NormalKnownVariance(8, 1.0)
    plan = ps.MonteCarloPlan(np.linspace(-2, 2, 5), n_mc=2000, seed=3)
    bins = tail_bins_batch(model, 0.0, 0.0, n_sims=4000, plan=plan)
    # nominal 0.5 / 1.25 / 2.5 each side; give each 3 binomial SEs
    nominal = np.array([0.5, 1.25, 2.5, 2.5, 1.25, 0.5])
    se = 100 * np.sqrt(nominal / 100 * (1 - nominal / 100) / 4000)
    assert np.all(np.abs(bins - nominal) <= 3 * se + 0.15)


def test_nuisance_model_requires_grid_for_validity():
    model = ps.BehrensFisher(5, 7)
    plan = ps.MonteCarloPlan(np.linspace(-3, 3, 5), n_mc=200, seed=1)
    with pytest.raises(ps.InvalidParameterError):
        contour_at_truth_batch(model, (0.0, 0.0, 1.0, 1.0), 0.0, 50, plan)


# ---------------------------------------------------------------------------
# generic path: one engine call per dataset


def test_generic_coverage_with_exact_engine():
    model = ps.NormalIID(10)
    grid = np.linspace(-2.0, 2.0, 9)
    engine = lambda y: ps.contour_closed_form(model, y, "student-t", grid)
    cov = ps.estimate_coverage(engine, model, (0.0, 1.0), 0.9,
                               n_sims=1500, seed=21)
    assert abs(cov - 0.9) <= 3 * np.sqrt(0.9 * 0.1 / 1500)


def test_generic_validity_cdf_with_exact_engine():
    model = ps.NormalIID(10)
    grid = np.linspace(-2.0, 2.0, 9)
    engine = lambda y: ps.contour_closed_form(model, y, "student-t", grid)
    rep = ps.estimate_validity_cdf(engine, model, (0.0, 1.0),
                                   np.linspace(0.1, 0.9, 9),
                                   n_sims=1500, seed=21)
    assert rep.dominates_diagonal(slack=4.0)
    assert rep.truth == {"phi_star": 0.0}
    assert rep.failures == 0


def test_generic_path_counts_engine_failures():
    model = ps.NormalKnownVariance(4, 1.0)
    plan = ps.MonteCarloPlan(np.linspace(-2.0, 2.0, 5), n_mc=120, seed=0)

    def engine(y):
        if float(np.mean(y)) > 0:
            raise ps.PossimError("synthetic failure")
        return ps.contour_vacuous(model, y, plan)

    rep = ps.estimate_validity_cdf(engine, model, 0.0, np.array([0.5]),
                                   n_sims=200, seed=5)
    assert 0 < rep.failures < 200  # roughly half the sample means are positive
    assert abs(rep.failures - 100) < 50
