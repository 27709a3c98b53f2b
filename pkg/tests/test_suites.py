from fractions import Fraction

import numpy as np

from kinetic.dynamics.potentials import Potential
from kinetic.hierarchy import ObservableHierarchy, corrupted_coefficient
from kinetic.lie_poisson import Algebra
from kinetic.polyparse import parse_observable
from kinetic.schemas import AlgebraCheckConfig
from kinetic.suites import (
    SuiteResult,
    algebra_suites,
    explicit_fields_suite,
    first_failure,
    max_coefficient,
    morphism_suite,
    pullback_suite,
    vector_field_suite,
)

SMALL = dict(
    d=1,
    degree=2,
    triples=3,
    gk_levels=[1, 2],
    gn_sizes=[2, 3],
    ginf_top=2,
    eps_N_max=3,
    eps_degree=2,
    filtration_lj_max=2,
    rank_degree=1,
    definition_pairs=3,
)


def test_record_exact_and_tolerant():
    res = SuiteResult("demo")
    assert res.record(Fraction(0), dict)
    assert res.record(1e-12, dict, tol=1e-9)
    assert not res.record(Fraction(1, 7), lambda: {"where": "aquí"})
    assert res.checks == 3
    assert not res.passed
    assert res.counterexample == {"residual": "1/7", "where": "aquí"}
    assert res.as_dict()["counterexample"]["where"] == "aquí"


def test_tolerance_scales_with_magnitude():
    res = SuiteResult("scaled")
    assert res.record(5e-8, dict, tol=1e-9, scale=100.0)
    assert not res.record(5e-8, dict, tol=1e-9, scale=1.0)


def test_first_failure():
    ok, bad = SuiteResult("ok"), SuiteResult("bad", passed=False)
    assert first_failure([ok, bad]) is bad
    assert first_failure([ok]) is None


def test_max_coefficient():
    f = parse_observable("3*x1*x2 - 1/2*v1", 2, 1)
    assert max_coefficient(f) == 3
    assert max_coefficient(ObservableHierarchy(1, {2: f})) == 3
    assert max_coefficient(ObservableHierarchy(1, {})) == 0


def test_algebra_suites_pass(rng):
    results = algebra_suites(rng, **SMALL)
    assert first_failure(results) is None
    assert all(r.checks > 0 for r in results)
    names = {r.name for r in results}
    assert {"epsilon:composition", "epsilon:injectivity", "epsilon:filtration", "G_N:explicit_vs_definition"} <= names
    assert {"g_1:jacobi", "G_3:jacobi", "G_inf:jacobi"} <= names



def test_jacobi_in_two_dimensions_at_degree_three(rng):
    results = algebra_suites(
        rng, d=2, degree=3, triples=2, gk_levels=[1, 2], gn_sizes=[2], ginf_top=2, eps_N_max=2,
        eps_degree=2, filtration_lj_max=1, rank_degree=1, definition_pairs=2,
    )
    assert first_failure(results) is None
    jacobi = {r.name: r.checks for r in results if r.name.endswith(":jacobi")}
    assert jacobi == {"g_1:jacobi": 2, "g_2:jacobi": 2, "G_2:jacobi": 2, "G_inf:jacobi": 2}


def test_algebra_check_defaults_cover_two_dimensions():
    cfg = AlgebraCheckConfig()
    assert (cfg.d, cfg.degree) == (2, 3)

def test_fault_injection_is_caught(rng):
    with corrupted_coefficient(2, 2, 1):
        results = algebra_suites(rng, **{**SMALL, "gn_sizes": [3, 4], "definition_pairs": 10})
    failed = first_failure(results)
    assert failed is not None
    assert failed.counterexample is not None


def test_morphism_suites_pass(rng):
    for name in ("iota_EM", "iota_Lio", "iota_mar", "iota_factorize"):
        res = morphism_suite(rng, name, 3, d=1, degree=2, N=2, n_atoms=2)
        assert res.passed, res.counterexample



def test_morphism_trials_are_reproducible(rng):
    trials = []
    res = morphism_suite(rng, "iota_factorize", 3, d=1, degree=2, N=2, n_atoms=2, trials=trials)
    assert res.passed and len(trials) == res.checks == 3
    assert all(t.map == "iota_factorize" and t.residual == 0 for t in trials)
    again = []
    morphism_suite(np.random.default_rng(0), "iota_factorize", 3, d=1, degree=2, N=2, n_atoms=2, trials=again)
    replay = []
    morphism_suite(np.random.default_rng(0), "iota_factorize", 3, d=1, degree=2, N=2, n_atoms=2, trials=replay)
    assert again == replay

def test_morphism_suite_in_float_mode(rng):
    res = morphism_suite(rng, "iota_EM", 3, d=1, degree=2, N=3, n_atoms=2, exact=False)
    assert res.passed, res.counterexample


def test_pullback_suite_one_result_per_identity(rng):
    results = pullback_suite(rng, Potential.polynomial("x^2 + 1"), 2, d=1, N=2, n_atoms=2)
    assert len(results) == 4
    assert all(r.passed and r.checks == 2 for r in results)


def test_field_suites_pass(rng):
    assert vector_field_suite(rng, Algebra.GN(2), 2, d=1, degree=2, n_atoms=2).passed
    assert vector_field_suite(rng, Algebra.Ginf(), 2, d=1, degree=2, n_atoms=2).passed
    results = explicit_fields_suite(rng, Potential.polynomial("x^2"), 1, d=1, degree=2, N_max=2, n_atoms=2)
    assert [r.name for r in results] == ["explicit:H_BBGKY_cases", "explicit:H_VlH", "explicit:H_Vl"]
    assert all(r.passed for r in results)
