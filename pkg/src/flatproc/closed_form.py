"""Closed-form intensities, directional distributions, covariances, and
limit constants of intersection and proximity processes.

Discrete directional distributions are evaluated exactly; rotation-invariant
ones use either the integrated-subspace-determinant constant c(n, r, s) or
controlled Monte Carlo with a reported standard error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import constants
from ._rng import SeedLike, as_generator
from .flat_geometry import Subspace, complement, haar_sample, orthonormalize, subspace_determinant
from .measures import DirectionSet, GrassmannMeasure, SphereMeasure
from .zonoid_engine import mu_Q_r

DEFAULT_MC_SAMPLES = 100_000
BOX_MC_SAMPLES = 1_000_000


@dataclass(frozen=True)
class WindowDescriptor:
    """Observation window: a centered ball or box, with a scale factor.

    The box is admitted as a single open convex set; scale rho describes the
    grown window rho * A used in the large-window limits.
    """

    shape: str
    radius: float | None = None
    sides: tuple[float, ...] | None = None
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.shape not in ("ball", "box"):
            raise ValueError(f"unknown window shape {self.shape!r}")
        if self.shape == "ball" and (self.radius is None or self.radius <= 0):
            raise ValueError("ball window needs a positive radius")
        if self.shape == "box":
            if not self.sides or any(s <= 0 for s in self.sides):
                raise ValueError("box window needs positive side lengths")
        if self.scale <= 0:
            raise ValueError("window scale must be positive")

    @staticmethod
    def ball(radius: float, scale: float = 1.0) -> "WindowDescriptor":
        return WindowDescriptor(shape="ball", radius=float(radius), scale=float(scale))

    @staticmethod
    def box(sides, scale: float = 1.0) -> "WindowDescriptor":
        return WindowDescriptor(shape="box", sides=tuple(float(s) for s in sides),
                                scale=float(scale))

    @staticmethod
    def unit_cube(n: int, scale: float = 1.0) -> "WindowDescriptor":
        return WindowDescriptor.box((1.0,) * n, scale=scale)

    def dimension(self) -> int | None:
        return len(self.sides) if self.shape == "box" else None

    def base_volume(self, n: int) -> float:
        if self.shape == "ball":
            return constants.ball_volume(n) * self.radius ** n
        if len(self.sides) != n:
            raise ValueError("box side count must match the ambient dimension")
        return float(np.prod(self.sides))

    def volume(self, n: int) -> float:
        return self.base_volume(n) * self.scale ** n

    def circumradius(self) -> float:
        if self.shape == "ball":
            return self.radius * self.scale
        return 0.5 * math.sqrt(sum(s * s for s in self.sides)) * self.scale

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Closed membership test for an (m, n) array of points."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.shape == "ball":
            return np.linalg.norm(points, axis=1) <= self.radius * self.scale
        half = 0.5 * self.scale * np.asarray(self.sides)
        return np.all(np.abs(points) <= half, axis=1)

    def rescaled(self, scale: float) -> "WindowDescriptor":
        return WindowDescriptor(self.shape, self.radius, self.sides, float(scale))


def c_constant(n: int, r: int, s: int) -> float:
    """Integrated subspace determinant c(n, r, s).

    The average of [L, M] over a Haar-distributed M in G(n, s), for any
    fixed L in G(n, r):
        binom(n-r, s) kappa_{n-r} kappa_{n-s} /
        (binom(n, s) kappa_n kappa_{n-r-s}).
    """
    if not (0 < r <= n - 1 and 0 < s <= n - 1 and n - r - s >= 0):
        raise ValueError(f"need 0 < r, s <= n-1 and r + s <= n, got n={n}, r={r}, s={s}")
    kv = constants.ball_volume
    # binom(n-r, s) / binom(n, s) rewritten in the r <-> s symmetric form
    # (n-r)! (n-s)! / (n! (n-r-s)!) so the symmetry holds exactly in floats
    ratio = math.factorial(n - r) * math.factorial(n - s) \
        / (math.factorial(n) * math.factorial(n - r - s))
    return ratio * (kv(n - r) * kv(n - s)) / (kv(n) * kv(n - r - s))


def _sum_direction_measure(l_sub: Subspace, m_sub: Subspace,
                           direction_set: DirectionSet | None,
                           rng: SeedLike | None) -> tuple[float, float]:
    """sigma_{(L+M)-perp}(C intersect .) for one subspace pair."""
    if direction_set is None:
        return 1.0, 0.0
    joint = orthonormalize(np.vstack([l_sub.basis, m_sub.basis]))
    perp = complement(joint)
    return direction_set.subsphere_measure(perp, rng=rng)


def pair_integral(q1: GrassmannMeasure, q2: GrassmannMeasure,
                  direction_set: DirectionSet | None = None,
                  rng: SeedLike | None = None,
                  samples: int = DEFAULT_MC_SAMPLES) -> tuple[float, float]:
    """Double integral of [L, M] (times a direction-set factor) over Q1 x Q2.

    With direction_set None the integrand is the bare subspace determinant;
    otherwise it is [L, M] * sigma_{(L+M)-perp}(C intersect (L+M)-perp).
    Atom pairs are summed exactly; Haar components with no direction factor
    (or a full-sphere factor) use c(n, k1, k2); everything else is Monte
    Carlo with a standard error.
    """
    n = q1.n
    if q2.n != n:
        raise ValueError("measures must share the ambient dimension")
    full = direction_set is None or direction_set.kind == "full"

    if q1.is_isotropic or q2.is_isotropic:
        if full:
            value = q1.total_mass * q2.total_mass * c_constant(n, q1.k, q2.k)
            if direction_set is not None:
                value *= constants.sphere_surface(n - q1.k - q2.k)
            return value, 0.0
        gen = as_generator(rng if rng is not None else 0x1507)
        total, totsq = 0.0, 0.0
        for _ in range(samples):
            l_sub = (haar_sample(n, q1.k, gen) if q1.is_isotropic
                     else _draw_atom(q1, gen))
            m_sub = (haar_sample(n, q2.k, gen) if q2.is_isotropic
                     else _draw_atom(q2, gen))
            det = subspace_determinant([l_sub, m_sub])
            sig, _ = _sum_direction_measure(l_sub, m_sub, direction_set, gen)
            val = det * sig
            total += val
            totsq += val * val
        mean = total / samples
        var = max(totsq / samples - mean * mean, 0.0)
        mass = q1.total_mass * q2.total_mass
        return mass * mean, mass * math.sqrt(var / samples)

    total, var = 0.0, 0.0
    gen = as_generator(rng if rng is not None else 0x1507)
    for l_sub, w1 in q1.atoms:
        for m_sub, w2 in q2.atoms:
            det = subspace_determinant([l_sub, m_sub])
            if det <= 1e-14:
                continue
            sig, sig_se = _sum_direction_measure(l_sub, m_sub, direction_set, gen)
            total += w1 * w2 * det * sig
            var += (w1 * w2 * det * sig_se) ** 2
    return total, math.sqrt(var)


def _draw_atom(q: GrassmannMeasure, gen: np.random.Generator) -> Subspace:
    weights = np.array([w for _, w in q.atoms])
    idx = gen.choice(len(weights), p=weights / weights.sum())
    return q.atoms[idx][0]


def proximity_intensity(n: int, k: int, gamma: float, q: GrassmannMeasure,
                        delta: float) -> float:
    """Proximity of a single weakly stationary k-flat process.

    pi(X, delta) = (gamma^2 / 2) kappa_{n-2k} delta^{n-2k} * the double
    integral of [L, M] over the directional distribution; exact for both
    atomic and isotropic distributions.
    """
    if not 1 <= k or not 2 * k < n:
        raise ValueError("requires 2k < n and k >= 1")
    if gamma == 0.0:
        return 0.0
    integral, _ = pair_integral(q, q)
    return 0.5 * gamma * gamma * constants.ball_volume(n - 2 * k) \
        * delta ** (n - 2 * k) * integral


def proximity_intensity_two(n: int, k1: int, k2: int, gamma1: float, gamma2: float,
                            q1: GrassmannMeasure, q2: GrassmannMeasure,
                            delta: float) -> float:
    """Intensity of the proximity process of two independent flat processes."""
    if k1 < 1 or k2 < 1 or k1 + k2 >= n:
        raise ValueError("requires k1, k2 >= 1 and k1 + k2 < n")
    if gamma1 == 0.0 or gamma2 == 0.0:
        return 0.0
    integral, _ = pair_integral(q1, q2)
    return gamma1 * gamma2 * constants.ball_volume(n - k1 - k2) \
        * delta ** (n - k1 - k2) * integral


def proximity_directional(n: int, k: int, q: GrassmannMeasure,
                          direction_set: DirectionSet,
                          rng: SeedLike | None = None,
                          samples: int = DEFAULT_MC_SAMPLES) -> tuple[float, float]:
    """Directional distribution R(C) of the proximity process.

    The ratio of the pair integral with the direction-set factor to the
    normalizing pair integral; independent of the distance threshold.
    """
    if not 1 <= k or not 2 * k < n:
        raise ValueError("requires 2k < n and k >= 1")
    denom, _ = pair_integral(q, q)
    if denom <= 0:
        raise ValueError("degenerate directional distribution")
    if direction_set.kind == "full":
        return 1.0, 0.0
    num, se = pair_integral(q, q, direction_set, rng=rng, samples=samples)
    omega = constants.sphere_surface(n - 2 * k)
    return num / (omega * denom), se / (omega * denom)


def proximity_directional_measure(n: int, q: GrassmannMeasure) -> SphereMeasure:
    """Full directional measure of the proximity process of a line process.

    For an atomic line directional distribution this is the normalized
    subsphere mixture over unordered atom pairs; it coincides with the
    normalized second-order area measure of the associated zonotope.
    """
    if q.k != 1:
        raise ValueError("full directional measure implemented for lines only")
    if q.is_isotropic:
        raise ValueError("requires an atomic directional distribution")
    components: list[tuple[Subspace, float]] = []
    atoms = list(q.atoms)
    for i in range(len(atoms)):
        for j in range(i + 1, len(atoms)):
            (l_sub, w1), (m_sub, w2) = atoms[i], atoms[j]
            det = subspace_determinant([l_sub, m_sub])
            if det <= 1e-14:
                continue
            joint = orthonormalize(np.vstack([l_sub.basis, m_sub.basis]))
            components.append((complement(joint), 2.0 * w1 * w2 * det))
    total = sum(w * constants.sphere_surface(s.k) for s, w in components)
    if total <= 0:
        raise ValueError("degenerate directional distribution")
    from .zonoid_engine import merge_grassmann_atoms

    merged = merge_grassmann_atoms(components)
    return SphereMeasure.subsphere_mixture(n, [(s, w / total) for s, w in merged])


def intersection_density(n: int, dims, intensities, qs, g=None,
                         same_process: bool = False,
                         rng: SeedLike | None = None,
                         samples: int = 20_000) -> tuple[float, float]:
    """Intensity functional of an intersection process of order r.

    Computes gamma_Y * integral of g against the directional distribution of
    the intersection process: the r-fold integral of
    1 * [L_1, ..., L_r] * g(L_1 n ... n L_r) against the directional
    distributions, times the product of intensities (divided by r! when the
    r factors are one process of type (S_r)).  g defaults to 1, yielding the
    intersection density itself.  Exact for atomic distributions; Monte
    Carlo with standard error when any factor is isotropic.
    """
    dims = list(dims)
    r = len(dims)
    if r < 2:
        raise ValueError("intersection order must be at least 2")
    if sum(dims) < (r - 1) * n:
        raise ValueError("requires k_1 + ... + k_r >= (r-1) n")
    qs = list(qs)
    intensities = list(intensities)
    if len(qs) != r or len(intensities) != r:
        raise ValueError("need one intensity and one distribution per factor")
    if same_process and (len(set(dims)) != 1):
        raise ValueError("a single process has a single flat dimension")
    prefactor = float(np.prod(intensities))
    if same_process:
        prefactor /= math.factorial(r)
    if prefactor == 0.0:
        return 0.0, 0.0

    def term(subs) -> float:
        det = subspace_determinant(subs)
        if det <= 1e-14:
            return 0.0
        if g is None:
            return det
        return det * float(g(intersect_subspaces(subs)))

    if all(not q.is_isotropic for q in qs):
        total = 0.0
        stack = [(0, [], 1.0)]
        while stack:
            depth, subs, weight = stack.pop()
            if depth == r:
                total += weight * term(subs)
                continue
            for sub, w in qs[depth].atoms:
                stack.append((depth + 1, subs + [sub], weight * w))
        return prefactor * total, 0.0

    gen = as_generator(rng if rng is not None else 0x1507)
    vals = np.empty(samples)
    for i in range(samples):
        subs = [haar_sample(n, q.k, gen) if q.is_isotropic else _draw_atom(q, gen)
                for q in qs]
        vals[i] = term(subs)
    mass = float(np.prod([q.total_mass for q in qs]))
    return (prefactor * mass * float(vals.mean()),
            prefactor * mass * float(vals.std(ddof=1) / math.sqrt(samples)))


def intersect_subspaces(subs) -> Subspace:
    """Common subspace of linear subspaces in general position."""
    rows = [complement(s).basis for s in subs if s.k < s.n]
    if not rows:
        return subs[0]
    span = orthonormalize(np.vstack(rows))
    return complement(span)


def hyperplane_intersection(n: int, gamma: float, q: SphereMeasure,
                            r: int) -> GrassmannMeasure:
    """Intensity-weighted directional measure of the r-th intersection
    process of a hyperplane process: (gamma^r / r!) times the
    hyperplane-intersection measure of the even directional distribution."""
    mu = mu_Q_r(q, r)
    return mu.scaled(gamma ** r / math.factorial(r)) if mu.atoms else mu


def mean_F_alpha(n: int, k: int, gamma: float, q: GrassmannMeasure, delta: float,
                 alpha: float, window: WindowDescriptor,
                 direction_set: DirectionSet | None = None,
                 rng: SeedLike | None = None,
                 samples: int = DEFAULT_MC_SAMPLES) -> tuple[float, float]:
    """Expectation of the length-power direction functional F_alpha.

    E F_alpha(A, C) = (gamma^2/2) * delta^{n-2k+alpha} / (n-2k+alpha)
    * vol(A) * pair integral with the direction factor.  The window's scale
    enters through its volume.
    """
    if not 1 <= k or not 2 * k < n:
        raise ValueError("requires 2k < n and k >= 1")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if direction_set is None:
        direction_set = DirectionSet.full_sphere(n)
    integral, se = pair_integral(q, q, direction_set, rng=rng, samples=samples)
    power = n - 2 * k + alpha
    factor = 0.5 * gamma * gamma * delta ** power / power * window.volume(n)
    return factor * integral, factor * se


def proximity_length_interval(n: int, k: int, gamma: float, q: GrassmannMeasure,
                              b0: float, b1: float,
                              direction_set: DirectionSet | None = None,
                              rng: SeedLike | None = None,
                              samples: int = DEFAULT_MC_SAMPLES) -> tuple[float, float]:
    """Per-unit-volume intensity of segments with length in (b0, b1].

    The length component of the intensity measure integrates t^{n-2k-1}
    over the interval, so the value is (gamma^2 / 2) times
    (b1^{n-2k} - b0^{n-2k}) / (n-2k) times the pair integral with the
    direction-set factor (a full sphere contributes omega_{n-2k}, making
    the interval (0, delta] reduce to the proximity).
    """
    if not 1 <= k or not 2 * k < n:
        raise ValueError("requires 2k < n and k >= 1")
    if not 0 <= b0 <= b1:
        raise ValueError("need 0 <= b0 <= b1")
    if direction_set is None:
        direction_set = DirectionSet.full_sphere(n)
    integral, se = pair_integral(q, q, direction_set, rng=rng, samples=samples)
    power = n - 2 * k
    factor = 0.5 * gamma * gamma * (b1 ** power - b0 ** power) / power
    return factor * integral, factor * se


def b_factor(n: int, k: int, m_sub: Subspace | None, q: GrassmannMeasure,
             direction_set: DirectionSet,
             rng: SeedLike | None = None,
             samples: int = DEFAULT_MC_SAMPLES) -> tuple[float, float]:
    """Inner covariance integrand b(M; C).

    Integral over L of [L, M] sigma_{(L+M)-perp}(C intersect .) against the
    directional distribution.  For an isotropic distribution and a full
    sphere the value is omega_{n-2k} c(n, k, k), independent of M (pass
    m_sub=None then).
    """
    if q.is_isotropic and direction_set.kind == "full":
        return constants.sphere_surface(n - 2 * k) * q.total_mass \
            * c_constant(n, k, k), 0.0
    if m_sub is None:
        raise ValueError("m_sub is only optional in the isotropic full-sphere case")
    point = GrassmannMeasure.discrete([(m_sub, 1.0)])
    return pair_integral(q, point, direction_set, rng=rng, samples=samples)


def ball_cross_section_integral(n: int, k: int, radius: float) -> float:
    """integral over M-perp of vol_k(ball intersect (M + y))^2 dy.

    For a centered ball this is independent of M:
    kappa_k^2 omega_{n-k} (1/2) B(k+1, (n-k)/2) radius^{n+k}.
    """
    kv = constants.ball_volume
    beta = math.gamma(k + 1) * math.gamma((n - k) / 2) / math.gamma(k + 1 + (n - k) / 2)
    return kv(k) ** 2 * constants.sphere_surface(n - k) * 0.5 * beta * radius ** (n + k)


def _box_line_cross_section(sides: np.ndarray, direction: np.ndarray,
                            perp_basis: np.ndarray, gen: np.random.Generator,
                            samples: int) -> tuple[float, float]:
    """Monte Carlo of the squared line cross-section integral for a box."""
    n = sides.shape[0]
    half = sides / 2.0
    corners = np.array(np.meshgrid(*[(-h, h) for h in half])).T.reshape(-1, n)
    coords = corners @ perp_basis.T
    lo, hi = coords.min(axis=0), coords.max(axis=0)
    area = float(np.prod(hi - lo))
    ys = gen.random((samples, n - 1)) * (hi - lo) + lo
    base = ys @ perp_basis
    # chord length of the line base + t*direction inside the box
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (-half - base) / direction
        t2 = (half - base) / direction
    lows = np.where(direction > 0, t1, t2)
    highs = np.where(direction > 0, t2, t1)
    mask = np.abs(direction) > 1e-14
    inside = np.all(np.abs(base[:, ~mask]) <= half[~mask] + 1e-12, axis=1)
    t_lo = np.max(lows[:, mask], axis=1, initial=-np.inf)
    t_hi = np.min(highs[:, mask], axis=1, initial=np.inf)
    chords = np.where(inside, np.maximum(t_hi - t_lo, 0.0), 0.0)
    sq = chords ** 2
    return (area * float(sq.mean()),
            area * float(sq.std(ddof=1) / math.sqrt(samples)))


def cross_section_integral(n: int, k: int, window: WindowDescriptor,
                           m_sub: Subspace | None = None,
                           rng: SeedLike | None = None,
                           samples: int = BOX_MC_SAMPLES) -> tuple[float, float]:
    """integral over M-perp of vol_k(A intersect (M + y))^2 dy for window A.

    Balls have a closed radial form (independent of M); boxes are evaluated
    by Monte Carlo over the offset (lines only, k = 1).
    """
    if window.shape == "ball":
        return ball_cross_section_integral(n, k, window.radius * window.scale), 0.0
    if k != 1:
        raise ValueError("box windows support k = 1 cross-sections only")
    if m_sub is None:
        raise ValueError("box windows need the direction subspace M")
    gen = as_generator(rng if rng is not None else 0xB0C5)
    sides = np.asarray(window.sides, dtype=float) * window.scale
    direction = m_sub.basis[0]
    perp = complement(m_sub).basis
    return _box_line_cross_section(sides, direction, perp, gen, samples)


def asymptotic_covariance(n: int, k: int, gamma: float, q: GrassmannMeasure,
                          delta: float, alpha_i: float, alpha_j: float,
                          window: WindowDescriptor,
                          c_i: DirectionSet | None = None,
                          c_j: DirectionSet | None = None,
                          rng: SeedLike | None = None,
                          samples: int = DEFAULT_MC_SAMPLES) -> tuple[float, float]:
    """Asymptotic covariance sigma_ij of the normalized functionals.

    sigma_ij = gamma^3 delta^{2(n-2k)+alpha_i+alpha_j} /
    ((n-2k+alpha_i)(n-2k+alpha_j)) * I(A; C_i, C_j) with
    I = integral over M of b(M; C_i) b(M; C_j) * cross-section integral.
    Fully closed for isotropic distributions with full-sphere direction sets
    over ball windows; Monte Carlo (with standard error) otherwise.
    """
    if not 1 <= k or not 2 * k < n:
        raise ValueError("requires 2k < n and k >= 1")
    c_i = c_i if c_i is not None else DirectionSet.full_sphere(n)
    c_j = c_j if c_j is not None else DirectionSet.full_sphere(n)
    pref = gamma ** 3 * delta ** (2 * (n - 2 * k) + alpha_i + alpha_j) \
        / ((n - 2 * k + alpha_i) * (n - 2 * k + alpha_j))
    gen = as_generator(rng if rng is not None else 0xC0F)

    iso_simple = (q.is_isotropic and c_i.kind == "full" and c_j.kind == "full"
                  and window.shape == "ball")
    if iso_simple:
        b_iso, _ = b_factor(n, k, None, q, c_i)
        cross, _ = cross_section_integral(n, k, window)
        return pref * b_iso * b_iso * cross, 0.0

    def integrand(m_sub: Subspace) -> tuple[float, float]:
        bi, bi_se = b_factor(n, k, m_sub, q, c_i, rng=gen)
        bj, bj_se = b_factor(n, k, m_sub, q, c_j, rng=gen)
        cross, cross_se = cross_section_integral(
            n, k, window, m_sub, rng=gen,
            samples=min(samples, BOX_MC_SAMPLES))
        val = bi * bj * cross
        rel = math.sqrt((bi_se / bi) ** 2 + (bj_se / bj) ** 2
                        + (cross_se / cross) ** 2) if val else 0.0
        return val, abs(val) * rel

    if not q.is_isotropic:
        total, var = 0.0, 0.0
        for m_sub, w in q.atoms:
            val, se = integrand(m_sub)
            total += w * val
            var += (w * se) ** 2
        return pref * total, pref * math.sqrt(var)
    draws = max(64, samples // 1000)
    vals = np.empty(draws)
    for i in range(draws):
        vals[i], _ = integrand(haar_sample(n, k, gen))
    mass = q.total_mass
    return (pref * mass * float(vals.mean()),
            pref * mass * float(vals.std(ddof=1) / math.sqrt(draws)))


def ball_chord_power_integral(n: int, radius: float, power: float) -> float:
    """Chord-power integral of a centered ball over the invariant line measure:
    omega_{n-1} * int_0^a (2 sqrt(a^2 - r^2))^p r^{n-2} dr."""
    def f(r: float) -> float:
        return (2.0 * math.sqrt(max(radius * radius - r * r, 0.0))) ** power \
            * r ** (n - 2)

    val, _ = quad(f, 0.0, radius, limit=200)
    return constants.sphere_surface(n - 1) * val


def covariance_cpi_form(n: int, k: int, window: WindowDescriptor) -> float:
    """Isotropic full-sphere I(A; S, S) via the chord-power identity:
    (kappa_k / (k+1)) * b_iso^2 * chord-power integral of order k+1."""
    if window.shape != "ball":
        raise ValueError("chord-power cross-check implemented for balls")
    b_iso = constants.sphere_surface(n - 2 * k) * c_constant(n, k, k)
    chord = ball_chord_power_integral(n, window.radius * window.scale, k + 1)
    return constants.ball_volume(k) / (k + 1) * b_iso * b_iso * chord


def weibull_beta(n: int, k: int, gamma: float, q: GrassmannMeasure,
                 window: WindowDescriptor,
                 direction_set: DirectionSet | None = None,
                 rng: SeedLike | None = None,
                 samples: int = DEFAULT_MC_SAMPLES) -> tuple[float, float]:
    """Rate constant of the limiting law of the shortest proximity distance.

    beta = gamma^2 / (2(n-2k)) * vol(A) * pair integral with the direction
    factor; the window's base volume is used (its scale is the observation
    scale, which enters through the rescaling of the order statistics).
    """
    if not 1 <= k or not 2 * k < n:
        raise ValueError("requires 2k < n and k >= 1")
    if window.base_volume(n) <= 0:
        raise ValueError("window must have positive volume")
    if direction_set is None:
        direction_set = DirectionSet.full_sphere(n)
    integral, se = pair_integral(q, q, direction_set, rng=rng, samples=samples)
    factor = gamma * gamma / (2.0 * (n - 2 * k)) * window.base_volume(n)
    return factor * integral, factor * se


def weibull_cdf(x, beta: float, n: int, k: int, alpha: float):
    """Limit distribution function 1 - exp(-beta x^{(n-2k)/alpha}) for x > 0."""
    x = np.asarray(x, dtype=float)
    power = (n - 2 * k) / alpha
    out = np.where(x > 0, -np.expm1(-beta * np.maximum(x, 0.0) ** power), 0.0)
    return out if out.ndim else float(out)


def weibull_limit_intensity(beta: float, n: int, k: int, alpha: float,
                            b0: float, b1: float) -> float:
    """Mass the limiting point process of rescaled length powers puts on
    the interval (b0, b1]: beta * (b1^{(n-2k)/alpha} - b0^{(n-2k)/alpha})."""
    if not 0 <= b0 <= b1:
        raise ValueError("need 0 <= b0 <= b1")
    power = (n - 2 * k) / alpha
    return beta * (b1 ** power - b0 ** power)


def isoperimetric_bound(n: int, gamma: float, delta: float) -> float:
    """Upper bound for the proximity of a line process at fixed intensity:
    ((n-1)/(2n)) * kappa_{n-1}^2 / kappa_n * gamma^2 delta^{n-2}, attained
    exactly by the isotropic directional distribution."""
    if n < 3:
        raise ValueError("line proximity bound needs n >= 3")
    kv = constants.ball_volume
    return (n - 1) / (2.0 * n) * kv(n - 1) ** 2 / kv(n) * gamma ** 2 \
        * delta ** (n - 2)


def as_record(name: str, value: float, standard_error: float, inputs: dict) -> dict:
    """Uniform JSON record shape for emitted closed-form values."""
    return {"name": name, "value": value, "standardError": standard_error,
            "inputs": inputs}
