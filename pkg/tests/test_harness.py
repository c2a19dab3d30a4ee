"""Tests for the seeded generators, the grid oracle, and the suite runner."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from convexkit import marginal, restriction
from convexkit.errors import FiberTooLarge
from convexkit.functions import Polytope, evaluate, quadratic, subdifferential
from convexkit.harness import (
    RunConfig,
    brute_force_min_over_fiber,
    gen_coercive_max_affine,
    gen_flat_max_affine,
    gen_max_affine,
    gen_operator,
    gen_pd_quadratic,
    run_suite,
    trial_rng,
)
from convexkit.linalg import row_space
from convexkit.marginal import MinimizationWitness
from convexkit.report import report_to_json
from convexkit.restriction import embed


def test_trial_rng_is_keyed_by_stream_and_index():
    a = trial_rng(42, 1, 7).uniform(size=4)
    b = trial_rng(42, 1, 7).uniform(size=4)
    c = trial_rng(42, 1, 8).uniform(size=4)
    d = trial_rng(42, 2, 7).uniform(size=4)
    assert_allclose(a, b)
    assert not np.allclose(a, c)
    assert not np.allclose(a, d)


def test_gen_operator_has_requested_rank():
    rng = np.random.default_rng(3)
    for _ in range(25):
        rows = int(rng.integers(1, 6))
        cols = int(rng.integers(1, 6))
        rank = int(rng.integers(0, min(rows, cols) + 1))
        S = gen_operator(rows, cols, rank, int(rng.integers(0, 10000)))
        assert S.shape == (rows, cols)
        assert np.linalg.matrix_rank(S, tol=1e-8) == rank


def test_gen_operator_rejects_impossible_rank():
    with pytest.raises(ValueError):
        gen_operator(2, 3, 3, 0)


def test_coercive_generator_minorant():
    """The added bound pieces guarantee f(r) >= 2 max|r_j| - 2 everywhere."""
    rng = np.random.default_rng(9)
    f = gen_coercive_max_affine(4, 5, 11)
    for _ in range(200):
        r = rng.uniform(-10.0, 10.0, 4)
        assert evaluate(f, r) >= 2.0 * float(np.max(np.abs(r))) - 2.0 - 1e-12


def test_flat_generator_is_zero_near_origin():
    f = gen_flat_max_affine(3, 5, 17)
    assert evaluate(f, np.zeros(3)) == 0.0
    rng = np.random.default_rng(1)
    for _ in range(100):
        assert evaluate(f, rng.uniform(-5.0, 5.0, 3)) >= 0.0


def test_pd_quadratic_generator_spectrum():
    for seed in range(5):
        f = gen_pd_quadratic(4, seed)
        assert float(np.min(np.linalg.eigvalsh(f.Q))) >= 0.1 - 1e-12


def test_generators_accept_generator_instances():
    rng = np.random.default_rng(5)
    f = gen_max_affine(3, 4, rng)
    g = gen_max_affine(3, 4, np.random.default_rng(5))
    assert_allclose(f.matrix, g.matrix)


def test_brute_force_frozen_quadratic():
    """min r1^2 + r2^2 over r1 + r2 = 2 is 2, hit exactly at a grid node."""
    S = np.array([[1.0], [1.0]])
    value, point = brute_force_min_over_fiber(quadratic(np.eye(2)), S, [2.0], 1e-2, 5.0)
    assert_allclose(value, 2.0, atol=1e-9)
    assert_allclose(point, [1.0, 1.0], atol=1e-9)


def test_brute_force_zero_dimensional_fiber():
    value, point = brute_force_min_over_fiber(quadratic(np.eye(2)), np.eye(2), [1.0, 2.0], 1e-2, 5.0)
    assert_allclose(value, 5.0, atol=1e-10)
    assert_allclose(point, [1.0, 2.0], atol=1e-10)


def test_brute_force_rejects_large_fibers():
    f = quadratic(np.eye(5))
    with pytest.raises(FiberTooLarge):
        brute_force_min_over_fiber(f, np.ones((5, 1)), [1.0], 1e-2, 5.0)
    with pytest.raises(FiberTooLarge):
        brute_force_min_over_fiber(quadratic(np.eye(4)), np.ones((4, 1)), [1.0], 1e-3, 5.0)


def test_suites_pass_on_small_runs():
    config = RunConfig(trials=6, seed=42)
    for suite in ("lemma1", "lemma2"):
        report = run_suite(suite, config)
        assert report.suite == suite
        assert report.summary == {"pass": 6, "fail": 0, "skip": 0}
    report = run_suite("lemma3", config)
    assert report.summary["fail"] == 0
    assert report.summary["pass"] >= 2


def test_all_concatenates_with_sequential_ids():
    config = RunConfig(trials=3, seed=7)
    report = run_suite("all", config)
    assert report.suite == "all"
    assert [t.trial_id for t in report.trials] == list(range(9))
    suites = [t.instance["suite"] for t in report.trials]
    assert suites == ["lemma1"] * 3 + ["lemma2"] * 3 + ["lemma3"] * 3


def test_run_suite_is_byte_deterministic():
    config = RunConfig(trials=4, seed=11)
    a = report_to_json(run_suite("all", config))
    b = report_to_json(run_suite("all", config))
    assert a == b


def test_zero_trials_gives_empty_report():
    report = run_suite("lemma1", RunConfig(trials=0, seed=1))
    assert report.trials == []
    assert report.summary == {"pass": 0, "fail": 0, "skip": 0}


def test_unknown_suite_rejected():
    with pytest.raises(ValueError):
        run_suite("lemma9", RunConfig(trials=1))


def test_oracle_mode_appends_agreement_checks():
    report = run_suite("lemma2", RunConfig(trials=4, seed=42, oracle_pitch=1e-2))
    assert report.tolerances["oracle_pitch"] == 1e-2
    for trial in report.trials:
        oracle = [c for c in trial.checks if c.name == "oracle_agreement"]
        assert len(oracle) == 1
        assert oracle[0].passed
        assert oracle[0].gap <= 1e-2


def test_mutated_projection_fails_lemma1_suite(monkeypatch):
    """A row-space projection must be caught by the slice interval checks."""

    def rowspace_version(g, w, active_tol=1e-9):
        x = embed(g.fiber, w)
        P = subdifferential(g.f, x, active_tol)
        R = row_space(g.fiber.matrix)
        if R.dim == 0:
            return Polytope(g.fiber.ambient_dim, np.zeros((1, g.fiber.ambient_dim)))
        return Polytope(g.fiber.ambient_dim, (P.generators @ R.basis.T) @ R.basis)

    monkeypatch.setattr(restriction, "restricted_subdifferential", rowspace_version)
    report = run_suite("lemma1", RunConfig(trials=5, seed=42))
    assert report.summary["fail"] == 5
    failing = [c for c in report.trials[0].checks if not c.passed]
    assert failing and failing[0].witness is not None


def test_mutated_marginal_fails_oracle_checks(monkeypatch):
    """Returning the min-norm anchor instead of the argmin must disagree."""

    def anchor_version(h, x, **kwargs):
        fiber = restriction.make_fiber(h.S.T, x)
        value = float(evaluate(h.f, fiber.anchor))
        return MinimizationWitness(value, fiber.anchor, "exact-KKT")

    monkeypatch.setattr(marginal, "marginal_value", anchor_version)
    report = run_suite("lemma2", RunConfig(trials=6, seed=42, oracle_pitch=1e-2))
    failed = [
        t
        for t in report.trials
        if any(c.name == "oracle_agreement" and not c.passed for c in t.checks)
    ]
    assert len(failed) >= 3
