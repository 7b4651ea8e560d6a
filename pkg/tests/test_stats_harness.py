import math

import numpy as np
import pytest
from scipy.special import ndtr
from scipy.stats import kstest

from flatproc.stats_harness import (ReplicationPlan, clt_diagnostics,
                                    factorial_moment_check, ks_statistic,
                                    ks_vs_normal, replicate)


def test_replicate_constant_estimator_has_zero_variance():
    plan = ReplicationPlan(50, 1)
    out = replicate(plan, lambda rng: 4.2)
    assert out["mean"] == 4.2
    assert out["variance"] == 0.0 and out["standardError"] == 0.0


def test_replicate_is_deterministic_and_jobs_invariant():
    plan = ReplicationPlan(200, 123)
    est = lambda rng: float(rng.standard_normal())
    a = replicate(plan, est, keep_values=True)["values"]
    b = replicate(plan, est, keep_values=True)["values"]
    assert np.array_equal(a, b)
    c = replicate(plan, _normal_estimator, jobs=2, keep_values=True)["values"]
    d = replicate(plan, _normal_estimator, jobs=1, keep_values=True)["values"]
    assert np.array_equal(c, d)


def _normal_estimator(rng):
    return float(rng.standard_normal())


def test_replicate_doubling_halves_squared_standard_error():
    est = lambda rng: float(rng.standard_normal())
    small = replicate(ReplicationPlan(2_000, 7), est)
    large = replicate(ReplicationPlan(4_000, 7), est)
    ratio = large["standardError"] ** 2 / small["standardError"] ** 2
    assert 0.3 < ratio < 0.8  # 1/2 within sampling noise


def test_replicate_known_mean_within_three_se():
    plan = ReplicationPlan(500, 99)
    out = replicate(plan, lambda rng: float(np.mean(rng.random(20))))
    assert abs(out["mean"] - 0.5) < 3.0 * out["standardError"]


def test_replicate_se_consistency_meta_trial():
    hits = 0
    for trial in range(100):
        out = replicate(ReplicationPlan(100, 1000 + trial),
                        lambda rng: float(np.mean(rng.random(50))))
        if abs(out["mean"] - 0.5) < 3.0 * out["standardError"]:
            hits += 1
    assert hits >= 99


def test_replicate_vector_estimator():
    plan = ReplicationPlan(300, 5)
    out = replicate(plan, lambda rng: rng.random(2))
    assert len(out["mean"]) == 2 and len(out["standardError"]) == 2


def test_ks_statistic_quantile_construction():
    n = 200
    sample = ndtr_inverse((np.arange(1, n + 1) - 0.5) / n)
    assert ks_statistic(sample, ndtr) == pytest.approx(0.5 / n, abs=1e-12)


def ndtr_inverse(p):
    from scipy.special import ndtri

    return ndtri(p)


def test_ks_statistic_standard_normal_sample_small():
    rng = np.random.default_rng(71)
    sample = rng.standard_normal(10_000)
    d = ks_statistic(sample, ndtr)
    assert d < 0.02
    # scipy oracle computes the same supremum
    ref = kstest(sample, "norm").statistic
    assert d == pytest.approx(ref, abs=1e-12)


def test_ks_statistic_degenerate_sample():
    sample = np.zeros(100)
    assert ks_statistic(sample, ndtr) >= 0.5


def test_ks_statistic_minimum_size():
    with pytest.raises(ValueError):
        ks_statistic(np.zeros(10), ndtr)


def test_ks_vs_normal_standardizes():
    rng = np.random.default_rng(72)
    sample = 5.0 + 3.0 * rng.standard_normal(5_000)
    assert ks_vs_normal(sample) < 0.03


def _poisson_cube(rng, mean=1.0, d=2):
    count = rng.poisson(mean)
    return rng.random((count, d))


def _factorial_cube(rng, dist, d=2):
    count = int(dist.sample(1, rng)[0])
    return rng.random((count, d))


def slab_sets(r, d=2):
    edges = np.linspace(0.0, 1.0, r + 1)

    def make(i):
        lo, hi = edges[i], edges[i + 1]
        return lambda pts: (pts[:, 0] >= lo) & (pts[:, 0] < hi)

    return [make(i) for i in range(r)]


def test_factorial_moment_check_poisson_reference_passes():
    for r in (2, 3, 4):
        out = factorial_moment_check(_poisson_cube, slab_sets(r), 20_000, 80 + r)
        assert abs(out["z"]) < 3.0


def test_factorial_moment_check_count_law_matches_up_to_kappa():
    from functools import partial

    from flatproc.simulator import build_factorial_distribution

    dist = build_factorial_distribution(3)
    sampler = partial(_factorial_cube, dist=dist)
    for r in (2, 3):
        out = factorial_moment_check(sampler, slab_sets(r), 20_000, 90 + r)
        assert abs(out["z"]) < 3.0
    out4 = factorial_moment_check(sampler, slab_sets(4), 5_000, 94)
    assert out4["exactZero"] and out4["empirical"] == 0.0


def test_multivariate_correlation_matches_asymptotic_covariance():
    # the asymptotic covariance of (F_0, F_1) with one direction set is a
    # rank-one matrix: the empirical correlation must approach 1
    import math

    from flatproc._rng import replication_stream
    from flatproc.closed_form import WindowDescriptor, asymptotic_covariance
    from flatproc.derived_processes import f_alpha, proximity
    from flatproc.measures import GrassmannMeasure
    from flatproc.simulator import FlatProcessSpec, sample_poisson

    iso = GrassmannMeasure.isotropic(3, 1, 1.0)
    spec = FlatProcessSpec(3, 1, 1.0, iso)
    base = WindowDescriptor.ball(1.0)
    window = base.rescaled(4.0)
    radius = window.circumradius() + 0.5
    reps = 600
    values = np.empty((reps, 2))
    for i in range(reps):
        sample = sample_poisson(spec, radius, replication_stream(61, i))
        seg = proximity(sample, delta=1.0)
        values[i, 0] = f_alpha(seg, 0.0, window)
        values[i, 1] = f_alpha(seg, 1.0, window)
    sig = np.empty((2, 2))
    for i, ai in enumerate((0.0, 1.0)):
        for j, aj in enumerate((0.0, 1.0)):
            sig[i, j], _ = asymptotic_covariance(3, 1, 1.0, iso, 1.0, ai, aj, base)
    target = sig[0, 1] / math.sqrt(sig[0, 0] * sig[1, 1])
    empirical = float(np.corrcoef(values.T)[0, 1])
    assert abs(empirical - target) < 0.1


def test_clt_diagnostics_synthetic_trend():
    rng = np.random.default_rng(73)
    # skewness decaying in rho mimics the normalized functionals
    values = {}
    for rho, skew in ((2.0, 0.8), (4.0, 0.3), (8.0, 0.05)):
        gamma_part = rng.gamma(1.0 / skew ** 2, size=4_000)
        gamma_part = (gamma_part - gamma_part.mean()) / gamma_part.std()
        values[rho] = 10.0 + math.sqrt(rho ** 4) * gamma_part
    report = clt_diagnostics(values, n=3, k=1, target_variance=1.0)
    assert report["ksDecreasing"]
    assert report["finalKS"] < 0.06
    scaled = [row["varianceScaled"] for row in report["scales"]]
    assert all(abs(v - 1.0) < 0.2 for v in scaled)
    assert abs(report["varianceRatio"] - 1.0) < 0.2
    skews = [row["skewness"] for row in report["scales"]]
    assert skews[0] > skews[-1]
