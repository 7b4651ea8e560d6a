import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from flatproc._lp import SimplexError, linprog_max
from flatproc.flat_geometry import Subspace, haar_sample
from flatproc.measure_metrics import (EXACT_SUPPORT_LIMIT, MetricSample,
                                      bl_distance, grassmann_distances,
                                      prohorov_distance, sphere_distances,
                                      stability_harness)
from flatproc.measures import SphereMeasure


def random_metric_sample(m, rng, scale=1.0):
    pts = rng.standard_normal((m, 3))
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2) * scale
    return MetricSample(dist)


def two_point_sample(rho):
    return MetricSample(np.array([[0.0, rho], [rho, 0.0]]))


def test_simplex_against_scipy_on_random_lps():
    rng = np.random.default_rng(61)
    for _ in range(25):
        n, m = int(rng.integers(2, 7)), int(rng.integers(2, 9))
        c = rng.standard_normal(n)
        a = rng.standard_normal((m, n))
        b = rng.random(m) + 0.1
        ref = linprog(-c, A_ub=a, b_ub=b, bounds=[(0, None)] * n, method="highs")
        if ref.status == 3:  # genuinely unbounded instance
            with pytest.raises(SimplexError, match="unbounded"):
                linprog_max(c, a, b)
            continue
        assert ref.success
        x, value = linprog_max(c, a, b)
        assert value == pytest.approx(-ref.fun, abs=1e-8)
        assert np.all(a @ x <= b + 1e-8) and np.all(x >= -1e-12)


def test_simplex_detects_unbounded():
    with pytest.raises(SimplexError, match="unbounded"):
        linprog_max(np.array([1.0]), np.array([[-1.0]]), np.array([1.0]))


def test_metric_sample_validation():
    with pytest.raises(ValueError, match="symmetric"):
        MetricSample(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError, match="triangle"):
        MetricSample(np.array([[0.0, 1.0, 1.0],
                               [1.0, 0.0, 5.0],
                               [1.0, 5.0, 0.0]]))
    with pytest.raises(ValueError, match="diagonal"):
        MetricSample(np.array([[0.5]]))


def test_bl_distance_zero_for_equal_measures():
    sample = two_point_sample(1.0)
    assert bl_distance(sample, np.array([0.3, 0.7]), np.array([0.3, 0.7])) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.05, max_value=3.0))
def test_bl_distance_two_point_formula(rho):
    sample = two_point_sample(rho)
    value = bl_distance(sample, np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert value == pytest.approx(2.0 * rho / (2.0 + rho), abs=1e-9)


def test_bl_distance_lower_bound_by_constant_function():
    rng = np.random.default_rng(62)
    for _ in range(15):
        sample = random_metric_sample(5, rng)
        mu, nu = rng.random(5), rng.random(5)
        assert bl_distance(sample, mu, nu) >= abs(mu.sum() - nu.sum()) - 1e-9


def test_prohorov_two_point_cap():
    for rho in (0.4, 0.9, 1.7):
        sample = two_point_sample(rho)
        value = prohorov_distance(sample, np.array([1.0, 0.0]),
                                  np.array([0.0, 1.0]))
        assert value == pytest.approx(min(rho, 1.0), abs=2e-6)


def test_prohorov_brute_force_small_support():
    # independent brute force: discretize epsilon and scan all subsets
    rng = np.random.default_rng(63)
    sample = random_metric_sample(4, rng)
    mu, nu = rng.random(4), rng.random(4)

    def feasible(eps):
        idx = range(4)
        for w_from, w_to in ((mu, nu), (nu, mu)):
            for size in range(1, 5):
                for subset in combinations(idx, size):
                    mass = sum(w_from[i] for i in subset)
                    enlarged = [j for j in idx
                                if min(sample.dist[i, j] for i in subset) < eps]
                    if mass > sum(w_to[j] for j in enlarged) + eps + 1e-15:
                        return False
        return True

    value = prohorov_distance(sample, mu, nu)
    assert feasible(value + 1e-5)
    assert not feasible(value - 1e-5)


def test_prohorov_support_cap_and_reduced_mode():
    rng = np.random.default_rng(64)
    m = EXACT_SUPPORT_LIMIT + 3
    sample = random_metric_sample(m, rng)
    mu, nu = rng.random(m) + 0.1, rng.random(m) + 0.1
    with pytest.raises(ValueError, match="allow_reduced"):
        prohorov_distance(sample, mu, nu)
    reduced = prohorov_distance(sample, mu, nu, allow_reduced=True)
    assert 0.0 <= reduced <= float(np.max(sample.dist)) + abs(mu.sum() - nu.sum())


def test_metric_axioms_on_random_triples():
    rng = np.random.default_rng(65)
    for _ in range(8):
        sample = random_metric_sample(5, rng)
        w = [rng.random(5) for _ in range(3)]
        for d in (bl_distance, prohorov_distance):
            d01, d10 = d(sample, w[0], w[1]), d(sample, w[1], w[0])
            assert d01 == pytest.approx(d10, abs=2e-6)
            assert d(sample, w[0], w[0]) <= 2e-6
            d02, d21 = d(sample, w[0], w[2]), d(sample, w[2], w[1])
            assert d01 <= d02 + d21 + 1e-6


def test_sphere_distance_quotient_metric_table():
    units = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    sample = MetricSample.from_sphere_pairs(units)
    assert sample.dist[0, 1] == pytest.approx(math.pi / 2.0, abs=1e-12)
    # antipodal representatives coincide in the quotient
    more = MetricSample.from_sphere_pairs(np.array([[1.0, 0, 0], [-1.0, 0, 0]]))
    assert more.dist[0, 1] == pytest.approx(0.0, abs=1e-9)


def test_grassmann_metric_table_satisfies_triangle():
    rng = np.random.default_rng(66)
    subs = [haar_sample(3, 1, rng) for _ in range(6)]
    sample = MetricSample.from_subspaces(subs)  # construction validates it
    assert sample.size == 6


def contracting_family(n, t_values, rng_seed=67):
    rng = np.random.default_rng(rng_seed)
    eye = np.eye(n)
    base_units = [eye[i] for i in range(n)]
    extra = rng.standard_normal(n)
    base_units.append(extra / np.linalg.norm(extra))
    weight = 1.0 / len(base_units)
    base = SphereMeasure.atoms(n, [(u, weight) for u in base_units])
    family = []
    for t in t_values:
        moved = []
        for i, u in enumerate(base_units):
            drift = np.roll(u, 1)
            v = u + t * (i + 1) / len(base_units) * (drift - (drift @ u) * u)
            moved.append(v / np.linalg.norm(v))
        family.append((t, SphereMeasure.atoms(n, [(u, weight) for u in moved])))
    return base, family


def test_stability_harness_trivial_family_gives_zeros():
    base, _ = contracting_family(3, [])
    report = stability_harness("area-measure", base, [(0.0, base)],
                               rho=0.02, upper=2.0, order=2)
    entry = report["entries"][0]
    assert entry["d_BL_lhs"] == 0.0 and entry["d_BL_rhs"] == 0.0
    assert entry["d_P_lhs"] == 0.0 and entry["d_P_rhs"] == 0.0


@pytest.mark.parametrize("case,order", [("area-measure", 2),
                                        ("hyperplane-intersection", 2),
                                        ("line-proximity", 2)])
def test_stability_harness_contracting_trend(case, order):
    base, family = contracting_family(3, [0.2, 0.1, 0.05, 0.025])
    report = stability_harness(case, base, family, rho=0.02, upper=2.0,
                               order=order)
    lhs = [e["d_BL_lhs"] for e in report["entries"]]
    rhs = [e["d_BL_rhs"] for e in report["entries"]]
    assert all(a > b for a, b in zip(lhs, lhs[1:]))
    assert all(a > b for a, b in zip(rhs, rhs[1:]))
    assert all(math.isfinite(e["ratio"]) for e in report["entries"])
    assert report["exponent"] > 0.0


def test_stability_harness_rejects_measures_outside_class():
    base, family = contracting_family(3, [0.1])
    with pytest.raises(ValueError, match="lower bound"):
        stability_harness("area-measure", base, family, rho=0.9, upper=2.0)
    with pytest.raises(ValueError, match="upper bound"):
        stability_harness("area-measure", base, family, rho=0.02, upper=0.5)


def test_co_vanishing_of_both_metrics_on_tiny_perturbation():
    # topological consequence of metric equivalence: at the end of a
    # contracting sequence both distances are tiny together
    base, family = contracting_family(3, [1e-4])
    _, nu = family[0]
    d_bl, d_p = sphere_distances(base, nu)
    assert d_bl < 1e-4 and d_p < 1e-4
    assert d_bl > 0.0


def test_grassmann_distances_merge_equal_subspaces():
    from flatproc.measures import GrassmannMeasure

    e = np.eye(3)
    mu = GrassmannMeasure.discrete([(Subspace(e[:1]), 1.0)])
    nu = GrassmannMeasure.discrete([(Subspace(e[:1]), 1.0)])
    d_bl, d_p = grassmann_distances(mu, nu)
    assert d_bl == 0.0 and d_p == 0.0
