"""Bounded-Lipschitz and Prohorov distances between finite discrete measures
on metric supports, and the empirical stability harness relating measure
distances to distances of derived area/intersection/proximity data.

Sphere supports use the quotient geodesic metric arccos|<u,v>| on +-pairs;
Grassmannian supports use the direct-rotation metric (the square root of
`grassmann_distance`, which itself is a squared deviation and not a metric).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._lp import linprog_max
from .flat_geometry import Subspace, grassmann_metric
from .measures import GrassmannMeasure, SphereMeasure, lower_bound_check
from .zonoid_engine import area_measure, mu_Q_r

EXACT_SUPPORT_LIMIT = 20
PROHOROV_TOL = 1e-6


@dataclass(frozen=True)
class MetricSample:
    """Common finite support with a precomputed distance table.

    The table must be symmetric with zero diagonal and satisfy the triangle
    inequality within 1e-9 (validated on construction).
    """

    dist: np.ndarray

    def __post_init__(self) -> None:
        dist = np.asarray(self.dist, dtype=float)
        m = dist.shape[0]
        if dist.shape != (m, m):
            raise ValueError("distance table must be square")
        if np.max(np.abs(dist - dist.T), initial=0.0) > 1e-12:
            raise ValueError("distance table must be symmetric")
        if np.max(np.abs(np.diag(dist)), initial=0.0) > 1e-12:
            raise ValueError("distance table must have zero diagonal")
        if np.any(dist < 0):
            raise ValueError("distances must be nonnegative")
        via = np.min(dist[:, :, None] + dist[None, :, :], axis=1)
        if np.max(dist - via, initial=0.0) > 1e-9:
            raise ValueError("distance table violates the triangle inequality")
        dist.flags.writeable = False
        object.__setattr__(self, "dist", dist)

    @property
    def size(self) -> int:
        return self.dist.shape[0]

    @staticmethod
    def from_sphere_pairs(units: Sequence[np.ndarray]) -> "MetricSample":
        """Quotient geodesic metric arccos|<u, v>| on antipodal pairs."""
        u = np.vstack(list(units))
        gram = np.clip(np.abs(u @ u.T), 0.0, 1.0)
        dist = np.arccos(gram)
        np.fill_diagonal(dist, 0.0)
        return MetricSample(0.5 * (dist + dist.T))

    @staticmethod
    def from_subspaces(subspaces: Sequence[Subspace]) -> "MetricSample":
        """Direct-rotation metric table on a list of equal-dimension subspaces."""
        subs = list(subspaces)
        m = len(subs)
        dist = np.zeros((m, m))
        for i in range(m):
            for j in range(i + 1, m):
                dist[i, j] = dist[j, i] = grassmann_metric(subs[i], subs[j])
        return MetricSample(dist)


def bl_distance(sample: MetricSample, mu: np.ndarray, nu: np.ndarray) -> float:
    """Bounded-Lipschitz distance of two weight vectors on a common support.

    Maximizes sum f_i (mu_i - nu_i) over functions with sup-norm plus
    Lipschitz-norm at most 1, as a linear program: f_i split into
    nonnegative parts, |f_i| <= a, |f_i - f_j| <= b rho_ij, a + b <= 1.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    m = sample.size
    if mu.shape != (m,) or nu.shape != (m,):
        raise ValueError("weight vectors must match the support size")
    tau = mu - nu
    if np.max(np.abs(tau), initial=0.0) == 0.0:
        return 0.0
    # variables: p_0..p_{m-1}, q_0..q_{m-1}, a, b  (f = p - q)
    nv = 2 * m + 2
    rows: list[np.ndarray] = []
    rhs: list[float] = []

    def row(entries) -> np.ndarray:
        r = np.zeros(nv)
        for pos, val in entries:
            r[pos] = val
        return r

    a_pos, b_pos = 2 * m, 2 * m + 1
    for i in range(m):
        rows.append(row([(i, 1.0), (m + i, -1.0), (a_pos, -1.0)]))
        rhs.append(0.0)
        rows.append(row([(i, -1.0), (m + i, 1.0), (a_pos, -1.0)]))
        rhs.append(0.0)
        # the optimum never needs |f| parts beyond the sup-norm cap of 1;
        # bounding them keeps the polytope compact (no zero-cost rays)
        rows.append(row([(i, 1.0)]))
        rhs.append(1.0)
        rows.append(row([(m + i, 1.0)]))
        rhs.append(1.0)
    for i in range(m):
        for j in range(i + 1, m):
            rho = sample.dist[i, j]
            rows.append(row([(i, 1.0), (m + i, -1.0), (j, -1.0), (m + j, 1.0),
                             (b_pos, -rho)]))
            rhs.append(0.0)
            rows.append(row([(i, -1.0), (m + i, 1.0), (j, 1.0), (m + j, -1.0),
                             (b_pos, -rho)]))
            rhs.append(0.0)
    rows.append(row([(a_pos, 1.0), (b_pos, 1.0)]))
    rhs.append(1.0)
    c = np.concatenate([tau, -tau, [0.0, 0.0]])
    _, value = linprog_max(c, np.vstack(rows), np.array(rhs))
    return max(value, 0.0)


def _prohorov_feasible(eps: float, dist: np.ndarray, mu: np.ndarray,
                       nu: np.ndarray, allow_reduced: bool) -> bool:
    """Check mu(A) <= nu(A^eps) + eps over subsets A of supp(mu), and the
    symmetric condition; A^eps uses the strict enlargement rho(x, A) < eps."""
    for w_from, w_to in ((mu, nu), (nu, mu)):
        support = np.nonzero(w_from > 0)[0]
        s = support.size
        if s == 0:
            continue
        adjacency = dist[support] < eps  # support point i -> enlarged by eps
        if s <= EXACT_SUPPORT_LIMIT:
            count = 1 << s
            weights = w_from[support]
            adj = adjacency.astype(np.float64)
            for start in range(0, count, 1 << 16):
                stop = min(start + (1 << 16), count)
                block = np.arange(start, stop, dtype=np.uint32)
                bits = ((block[:, None] >> np.arange(s)) & 1).astype(bool)
                mass_a = bits @ weights
                mass_reach = ((bits @ adj) > 0).astype(float) @ w_to
                if np.any(mass_a > mass_reach + eps + 1e-15):
                    return False
        elif allow_reduced:
            # reduced family: all metric balls around support points and
            # unions of two balls (conservative: may miss violations)
            inner = dist[np.ix_(support, support)]
            radii = np.unique(inner)
            for rad in radii:
                balls = inner <= rad + 1e-15
                for i in range(s):
                    for members in ([balls[i]]
                                    + [balls[i] | balls[j] for j in range(i + 1, s)]):
                        mass_a = float(w_from[support[members]].sum())
                        reach = np.any(adjacency[members], axis=0)
                        if mass_a > float(w_to[reach].sum()) + eps + 1e-15:
                            return False
        else:
            raise ValueError(
                f"support size {s} exceeds the exact enumeration cap "
                f"{EXACT_SUPPORT_LIMIT}; pass allow_reduced=True for a "
                f"conservative (lower bound) evaluation")
    return True


def prohorov_distance(sample: MetricSample, mu: np.ndarray, nu: np.ndarray,
                      allow_reduced: bool = False) -> float:
    """Prohorov distance by bisection on the enlargement margin.

    Exact subset enumeration up to 20 support points per measure; larger
    supports require allow_reduced=True and are evaluated on a reduced set
    family (metric balls and pairwise unions), giving a lower bound.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    m = sample.size
    if mu.shape != (m,) or nu.shape != (m,):
        raise ValueError("weight vectors must match the support size")
    for weights in (mu, nu):
        s = int(np.count_nonzero(weights > 0))
        if s > EXACT_SUPPORT_LIMIT and not allow_reduced:
            raise ValueError(
                f"support size {s} exceeds the exact enumeration cap "
                f"{EXACT_SUPPORT_LIMIT}; pass allow_reduced=True for a "
                f"conservative (lower bound) evaluation")
    if np.array_equal(mu, nu):
        return 0.0
    diam = float(np.max(sample.dist, initial=0.0))
    hi = diam + abs(float(mu.sum() - nu.sum())) + 2.0 * PROHOROV_TOL
    if not _prohorov_feasible(hi, sample.dist, mu, nu, allow_reduced):
        raise RuntimeError("internal error: upper bisection bound infeasible")
    lo = 0.0
    while hi - lo > PROHOROV_TOL:
        mid = (lo + hi) / 2.0
        if _prohorov_feasible(mid, sample.dist, mu, nu, allow_reduced):
            hi = mid
        else:
            lo = mid
    return hi


def _merge_sphere_supports(measures: Sequence[SphereMeasure]):
    """Common +-pair support and per-measure weight vectors."""
    units: list[np.ndarray] = []
    weight_rows = []
    for mu in measures:
        if not mu.is_atomic:
            raise ValueError("metric distances require atomic measures")
    for mu in measures:
        weights = np.zeros(len(units) + len(mu.pair_atoms))
        weights[: len(units)] = 0.0
        row: dict[int, float] = {}
        for u, w in mu.pair_atoms:
            for idx, known in enumerate(units):
                if min(np.linalg.norm(known - u), np.linalg.norm(known + u)) < 1e-12:
                    row[idx] = row.get(idx, 0.0) + w
                    break
            else:
                units.append(u)
                row[len(units) - 1] = w
        weight_rows.append(row)
    vectors = [np.zeros(len(units)) for _ in measures]
    for vec, row in zip(vectors, weight_rows):
        for idx, w in row.items():
            vec[idx] = w
    return MetricSample.from_sphere_pairs(units), vectors


def _merge_grassmann_supports(measures: Sequence[GrassmannMeasure]):
    """Common subspace support and per-measure weight vectors."""
    subs: list[Subspace] = []
    rows = []
    for mu in measures:
        if mu.is_isotropic:
            raise ValueError("metric distances require atomic measures")
        row: dict[int, float] = {}
        for sub, w in mu.atoms:
            for idx, known in enumerate(subs):
                if known.same_span(sub, tol=1e-10):
                    row[idx] = row.get(idx, 0.0) + w
                    break
            else:
                subs.append(sub)
                row[len(subs) - 1] = w
        rows.append(row)
    vectors = [np.zeros(len(subs)) for _ in measures]
    for vec, row in zip(vectors, rows):
        for idx, w in row.items():
            vec[idx] = w
    return MetricSample.from_subspaces(subs), vectors


def sphere_distances(mu: SphereMeasure, nu: SphereMeasure,
                     allow_reduced: bool = False) -> tuple[float, float]:
    """(bounded-Lipschitz, Prohorov) distances of two atomic even measures."""
    sample, (w_mu, w_nu) = _merge_sphere_supports([mu, nu])
    return (bl_distance(sample, w_mu, w_nu),
            prohorov_distance(sample, w_mu, w_nu, allow_reduced))


def grassmann_distances(mu: GrassmannMeasure, nu: GrassmannMeasure,
                        allow_reduced: bool = False) -> tuple[float, float]:
    """(bounded-Lipschitz, Prohorov) distances of two atomic Grassmann
    measures under the direct-rotation metric."""
    sample, (w_mu, w_nu) = _merge_grassmann_supports([mu, nu])
    return (bl_distance(sample, w_mu, w_nu),
            prohorov_distance(sample, w_mu, w_nu, allow_reduced))


def stability_exponent(case: str, n: int, order: int) -> float:
    """Bounded-Lipschitz exponent 2 c of the stability inequality."""
    if case == "line-proximity":
        return 2.0 / (2.0 * (n + 1) * (n + 4))
    return 2.0 / (2.0 ** order * (n + 1) * (n + 4))


def _derived_measure(case: str, mu: SphereMeasure, order: int) -> GrassmannMeasure:
    """Grassmann component representation of the derived data per case."""
    n = mu.n
    if case == "area-measure":
        mixture = area_measure(mu, order)
        atoms = [(s, w) for s, w in mixture.subspheres]
        if not atoms:
            return GrassmannMeasure.zero(n, n - order)
        return GrassmannMeasure.discrete(atoms)
    if case == "hyperplane-intersection":
        scale = 1.0
        for i in range(2, order + 1):
            scale *= i
        mu_r = mu_Q_r(mu, order)
        return mu_r.scaled(1.0 / scale) if mu_r.atoms else mu_r
    if case == "line-proximity":
        # intensity-weighted directional measure of the proximity process,
        # proportional to the second-order area data of the zonotope
        from . import constants
        from .closed_form import proximity_intensity
        from .measures import line_measure_from_sphere

        q_lines = line_measure_from_sphere(mu)
        mass = q_lines.total_mass
        pi = proximity_intensity(n, 1, mass, q_lines.normalized(), 1.0)
        mixture = area_measure(mu, 2)
        total = sum(w * constants.sphere_surface(s.k) for s, w in mixture.subspheres)
        if total <= 0:
            return GrassmannMeasure.zero(n, n - 2)
        return GrassmannMeasure.discrete(
            [(s, pi * w * constants.sphere_surface(s.k) / total)
             for s, w in mixture.subspheres])
    raise ValueError(f"unknown stability case {case!r}")


def stability_harness(case: str, base: SphereMeasure,
                      family: Sequence[tuple[float, SphereMeasure]],
                      rho: float, upper: float, order: int = 2) -> dict:
    """Empirical stability report for a contracting family of even measures.

    For each (t, nu_t): the left side is the distance of the generating
    measures on the sphere; the right side is the distance of the derived
    data (area-measure components, intersection measure, or
    intensity-weighted proximity direction measure) on the Grassmannian
    under the direct-rotation metric.  The inequality constants are
    existential, so the report carries ratios and exponent estimates, not
    verdicts; callers assert boundedness and co-vanishing.

    All measures must lie in the class with cosine-moment lower bound rho
    and total mass at most upper.
    """
    for label, measure in [("base", base)] + [(f"t={t}", m) for t, m in family]:
        if measure.total_mass > upper + 1e-12:
            raise ValueError(f"{label}: total mass exceeds the upper bound")
        if not lower_bound_check(measure, rho):
            raise ValueError(f"{label}: cosine-moment lower bound violated")
    exponent = stability_exponent(case, base.n, order)
    derived_base = _derived_measure(case, base, order)
    entries = []
    for t, nu in sorted(family, key=lambda pair: -pair[0]):
        lhs_bl, lhs_p = sphere_distances(base, nu)
        rhs_bl, rhs_p = grassmann_distances(derived_base,
                                            _derived_measure(case, nu, order))
        entry = {
            "t": t,
            "d_BL_lhs": lhs_bl,
            "d_BL_rhs": rhs_bl,
            "d_P_lhs": lhs_p,
            "d_P_rhs": rhs_p,
            "ratio": lhs_bl / rhs_bl ** exponent if rhs_bl > 0 else math.inf,
            "exponent_estimate": (math.log(lhs_bl) / math.log(rhs_bl)
                                  if 0 < rhs_bl < 1 and lhs_bl > 0 else math.nan),
        }
        entries.append(entry)
    return {
        "case": case,
        "order": order,
        "exponent": exponent,
        "entries": entries,
        "max_ratio": max((e["ratio"] for e in entries), default=0.0),
        "final": entries[-1] if entries else None,
    }
