"""Samplers for stationary Poisson flat processes in ball windows and for
the non-Poisson cube-based constructions with prescribed factorial moments.

Flat samples are stored as basis/offset arrays for speed; `FlatSample.flats`
materializes the immutable Flat objects on demand.  Every sampler accepts a
seed (int or sequence) or a ready numpy Generator; identical seeds reproduce
samples byte for byte.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import constants
from ._rng import SeedLike, as_generator, seed_record
from .flat_geometry import Flat, Subspace
from .measures import GrassmannMeasure


@dataclass(frozen=True)
class SrConstruction:
    """Parameters of the non-Poisson construction: per-cube count law with
    unit factorial moments up to kappa, and the anchor subspace the point
    process lives on (dimension n - k)."""

    kappa: int
    anchor: Subspace


@dataclass(frozen=True)
class FlatProcessSpec:
    """Weakly stationary k-flat process: intensity, directional distribution,
    and the sampling construction (Poisson by default)."""

    n: int
    k: int
    gamma: float
    q: GrassmannMeasure
    kind: SrConstruction | None = None

    def __post_init__(self) -> None:
        if not (0 < self.gamma < math.inf) and self.gamma != 0.0:
            raise ValueError("intensity must be finite and nonnegative")
        if self.q.n != self.n or self.q.k != self.k:
            raise ValueError("directional distribution must live on G(n, k)")
        if abs(self.q.total_mass - 1.0) > 1e-12:
            raise ValueError("directional distribution must have total mass 1")
        if self.kind is not None and self.kind.anchor.k != self.n - self.k:
            raise ValueError("anchor subspace must have dimension n - k")


@dataclass(frozen=True)
class FlatSample:
    """Flats of one realization, all hitting the ball of the given radius."""

    n: int
    k: int
    radius: float
    bases: np.ndarray      # (m, k, n) orthonormal rows per flat
    offsets: np.ndarray    # (m, n), each orthogonal to its basis rows
    seed: str = "generator"

    def __post_init__(self) -> None:
        bases = np.asarray(self.bases, dtype=float).reshape(-1, self.k, self.n)
        offsets = np.asarray(self.offsets, dtype=float).reshape(-1, self.n)
        if bases.shape[0] != offsets.shape[0]:
            raise ValueError("bases and offsets must pair up")
        if offsets.shape[0]:
            norms = np.linalg.norm(offsets, axis=1)
            if np.max(norms) > self.radius + 1e-9:
                raise ValueError("offset norms must not exceed the window radius")
            if self.k > 0:
                rel = np.einsum("mkn,mn->mk", bases, offsets)
                if np.max(np.abs(rel)) > 1e-9:
                    raise ValueError("offsets must be orthogonal to directions")
        bases.flags.writeable = False
        offsets.flags.writeable = False
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "offsets", offsets)

    def __len__(self) -> int:
        return self.offsets.shape[0]

    @cached_property
    def flats(self) -> tuple[Flat, ...]:
        return tuple(Flat(Subspace(self.bases[i]), self.offsets[i])
                     for i in range(len(self)))

    def restrict(self, radius: float) -> "FlatSample":
        """Flats of this realization hitting the smaller ball window."""
        if radius > self.radius + 1e-12:
            raise ValueError("can only restrict to a smaller window")
        keep = np.linalg.norm(self.offsets, axis=1) <= radius
        return FlatSample(self.n, self.k, radius, self.bases[keep],
                          self.offsets[keep], seed=self.seed + f"|restrict({radius})")

    def translate(self, z: np.ndarray) -> "FlatSample":
        """Shift every flat by z (window bookkeeping enlarges as needed)."""
        z = np.asarray(z, dtype=float)
        if len(self) == 0:
            return self
        proj = np.einsum("mkn,n->mk", self.bases, z)
        offsets = self.offsets + z - np.einsum("mk,mkn->mn", proj, self.bases)
        radius = float(np.max(np.linalg.norm(offsets, axis=1), initial=self.radius))
        return FlatSample(self.n, self.k, radius, self.bases, offsets,
                          seed=self.seed + "|translated")


@dataclass(frozen=True)
class FactorialDistribution:
    """Count distribution on {0, ..., kappa-2, kappa} whose factorial moments
    E[N(N-1)...(N-m+1)] all equal 1 for m = 1..kappa."""

    kappa: int
    probabilities: np.ndarray
    exact: tuple[Fraction, ...] = field(repr=False, default=())

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (self.kappa + 1,):
            raise ValueError("probability table must have length kappa + 1")
        if np.any(p < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(float(p.sum()) - 1.0) > 1e-14:
            raise ValueError("probabilities must sum to 1")
        if self.kappa >= 1 and p[self.kappa - 1] != 0.0:
            raise ValueError("the weight at kappa - 1 must vanish")
        for m in range(1, self.kappa + 1):
            if abs(self.factorial_moment(m) - 1.0) > 1e-12:
                raise ValueError(f"factorial moment of order {m} must equal 1")
        p.flags.writeable = False
        object.__setattr__(self, "probabilities", p)

    def factorial_moment(self, m: int) -> float:
        terms = []
        for i, prob in enumerate(self.probabilities):
            if i >= m and prob > 0:
                falling = 1.0
                for j in range(m):
                    falling *= i - j
                terms.append(falling * prob)
        return math.fsum(terms)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return rng.choice(self.kappa + 1, size=size, p=self.probabilities)


def build_factorial_distribution(kappa: int) -> FactorialDistribution:
    """Construct the count law recursively in exact rational arithmetic.

    Start from P(N=0) = P(N=2) = 1/2 at kappa = 2; each step sets
    P_kappa(i) = P_{kappa-1}(i-1)/i on {1, ..., kappa-2, kappa} and puts the
    remaining mass at 0.
    """
    if kappa < 2:
        raise ValueError("kappa must be at least 2")
    table = {0: Fraction(1, 2), 2: Fraction(1, 2)}
    for k in range(3, kappa + 1):
        support = list(range(1, k - 1)) + [k]
        new = {i: table.get(i - 1, Fraction(0)) / i for i in support}
        new[0] = 1 - sum(new.values())
        table = new
    exact = tuple(table.get(i, Fraction(0)) for i in range(kappa + 1))
    probs = np.array([float(x) for x in exact])
    return FactorialDistribution(kappa=kappa, probabilities=probs, exact=exact)


def _batched_complement(bases: np.ndarray) -> np.ndarray:
    """Orthonormal complement bases, (m, n-k, n), for a stack of (k, n) bases."""
    m, k, n = bases.shape
    # full SVD of the transposed bases: the trailing left-singular vectors
    # span the orthogonal complement of each row space
    u, _, _ = np.linalg.svd(np.swapaxes(bases, 1, 2))
    return np.swapaxes(u[:, :, k:], 1, 2)


def _haar_bases(count: int, n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of Haar-distributed orthonormal (k, n) bases."""
    g = rng.standard_normal((count, n, k))
    q, _ = np.linalg.qr(g)
    return np.swapaxes(q, 1, 2)


def _ball_points(count: int, dim: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform points in the centered ball of the given radius in R^dim."""
    if dim == 0:
        return np.zeros((count, 0))
    z = rng.standard_normal((count, dim))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    radii = radius * rng.random(count) ** (1.0 / dim)
    return z * radii[:, None]


def sample_poisson(spec: FlatProcessSpec, radius: float, rng: SeedLike) -> FlatSample:
    """One realization of the stationary Poisson k-flat process in a ball.

    The number of flats hitting the window R B^n is Poisson with mean
    gamma * kappa_{n-k} * R^{n-k}; directions follow the directional
    distribution and offsets are uniform in the (n-k)-ball of the window
    radius inside the direction's orthogonal complement.
    """
    if spec.kind is not None:
        raise ValueError("spec does not describe a Poisson process")
    record = seed_record(rng)
    gen = as_generator(rng)
    n, k = spec.n, spec.k
    mean = spec.gamma * constants.ball_volume(n - k) * radius ** (n - k)
    count = int(gen.poisson(mean))
    if count == 0:
        return FlatSample(n, k, radius, np.zeros((0, k, n)), np.zeros((0, n)), record)
    if spec.q.is_isotropic:
        bases = _haar_bases(count, n, k, gen)
    else:
        weights = np.array([w for _, w in spec.q.atoms])
        idx = gen.choice(len(weights), size=count, p=weights / weights.sum())
        stack = np.stack([sub.basis for sub, _ in spec.q.atoms])
        bases = stack[idx]
    comp = _batched_complement(bases)
    local = _ball_points(count, n - k, radius, gen)
    offsets = np.einsum("mj,mjn->mn", local, comp)
    return FlatSample(n, k, radius, bases, offsets, record)


def sample_cube_process(d: int, dist: FactorialDistribution,
                        cube_index_box: Sequence[tuple[int, int]],
                        rng: SeedLike, stationarize: bool = False) -> np.ndarray:
    """Points of the cube construction over a box of unit-cube indices.

    Each cube [i_1, i_1+1) x ... x [i_d, i_d+1) receives an independent count
    from dist, placed uniformly.  With stationarize=True the process is
    generated on a box enlarged by one cube on every side, shifted by a
    common uniform vector in [0,1]^d, and reported clipped back to the
    requested box, which removes the boundary bias of the shift.
    """
    gen = as_generator(rng)
    box = [(int(lo), int(hi)) for lo, hi in cube_index_box]
    if len(box) != d or any(hi <= lo for lo, hi in box):
        raise ValueError("cube_index_box must give d nonempty index ranges")
    gen_box = [(lo - 1, hi + 1) for lo, hi in box] if stationarize else box
    sides = [hi - lo for lo, hi in gen_box]
    total = int(np.prod(sides))
    counts = dist.sample(total, gen)
    cube_of_point = np.repeat(np.arange(total), counts)
    npts = cube_of_point.shape[0]
    if npts == 0:
        return np.zeros((0, d))
    corners = np.stack(np.unravel_index(cube_of_point, sides), axis=1).astype(float)
    corners += np.array([lo for lo, _ in gen_box], dtype=float)
    points = corners + gen.random((npts, d))
    if stationarize:
        points = points + gen.random(d)
        lo = np.array([lo for lo, _ in box], dtype=float)
        hi = np.array([hi for _, hi in box], dtype=float)
        keep = np.all((points >= lo) & (points < hi), axis=1)
        points = points[keep]
    return points


def sample_q0(e0: Subspace, n: int, k: int, rng: SeedLike,
              batch: int = 64) -> Subspace:
    """One draw from the anchored directional distribution on G(n, k).

    The law has density proportional to the subspace determinant [E_0, L]
    with respect to the Haar measure, for a fixed anchor E_0 of dimension
    n - k; realized by rejection from Haar with acceptance probability
    [E_0, L].
    """
    bases = sample_q0_bases(e0, n, k, 1, rng, batch)
    return Subspace(bases[0])


def sample_q0_bases(e0: Subspace, n: int, k: int, count: int, rng: SeedLike,
                    batch: int = 4096) -> np.ndarray:
    """Vectorized rejection sampler returning (count, k, n) direction bases."""
    if e0.n != n or e0.k != n - k:
        raise ValueError("anchor must be an (n-k)-dimensional subspace of R^n")
    gen = as_generator(rng)
    anchor = e0.basis
    out = np.zeros((count, k, n))
    filled = 0
    while filled < count:
        m = min(batch, max(4 * (count - filled), 64))
        cand = _haar_bases(m, n, k, gen)
        stacked = np.concatenate(
            [np.broadcast_to(anchor, (m,) + anchor.shape), cand], axis=1)
        gram = stacked @ np.swapaxes(stacked, 1, 2)
        det = np.clip(np.linalg.det(gram), 0.0, 1.0)
        accept = gen.random(m) < np.sqrt(det)
        take = min(int(accept.sum()), count - filled)
        if take:
            out[filled:filled + take] = cand[accept][:take]
            filled += take
    return out


def sr_intensity(n: int, k: int) -> float:
    """Intensity of the anchored construction: 1 / c(n, n-k, k).

    The construction's intensity measure is the invariant measure on the
    affine k-flats scaled by the reciprocal acceptance constant, so it
    matches a Poisson process of this intensity with isotropic directions.
    """
    from .closed_form import c_constant

    return 1.0 / c_constant(n, n - k, k)


def sample_sr_flats(spec: FlatProcessSpec, radius: float, rng: SeedLike,
                    cover_radius: float | None = None) -> FlatSample:
    """One realization of the anchored non-Poisson k-flat process.

    Runs the cube construction inside the anchor subspace over cubes
    covering the disk of radius cover_radius (default: radius + 1), attaches
    an independent anchored direction to each point, and keeps the flats
    hitting the ball window.

    Flats anchored far outside the window can still hit it when their
    direction nearly contains the anchor point's direction; the default
    cover therefore undercounts slightly.  Pass a larger cover_radius when
    comparing hit counts against the closed-form intensity (the residual
    tail decays like radius/cover_radius).
    """
    if spec.kind is None:
        raise ValueError("spec does not describe the anchored construction")
    record = seed_record(rng)
    gen = as_generator(rng)
    n, k = spec.n, spec.k
    d = n - k
    anchor = spec.kind.anchor
    cover = float(cover_radius) if cover_radius is not None else radius + 1.0
    dist = build_factorial_distribution(spec.kind.kappa)
    extent = int(math.ceil(cover))
    box = [(-extent, extent)] * d
    local = sample_cube_process(d, dist, box, gen)
    if local.shape[0] == 0:
        return FlatSample(n, k, radius, np.zeros((0, k, n)), np.zeros((0, n)), record)
    points = local @ anchor.basis
    bases = sample_q0_bases(anchor, n, k, points.shape[0], gen)
    proj = np.einsum("mkn,mn->mk", bases, points)
    offsets = points - np.einsum("mk,mkn->mn", proj, bases)
    keep = np.linalg.norm(offsets, axis=1) <= radius
    return FlatSample(n, k, radius, bases[keep], offsets[keep], record)


def write_flat_sample(sample: FlatSample, path: str | Path) -> None:
    """Serialize a sample: header "n k R seed", then one flat per line as
    "k offset[n] basis[k*n]"."""
    lines = [f"{sample.n} {sample.k} {sample.radius!r} {sample.seed}"]
    for i in range(len(sample)):
        nums = [str(sample.k)]
        nums += [repr(float(x)) for x in sample.offsets[i]]
        nums += [repr(float(x)) for x in sample.bases[i].ravel()]
        lines.append(" ".join(nums))
    Path(path).write_text("\n".join(lines) + "\n")


def read_flat_sample(path: str | Path) -> FlatSample:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    head = lines[0].split()
    n, k, radius = int(head[0]), int(head[1]), float(head[2])
    seed = head[3] if len(head) > 3 else "generator"
    bases, offsets = [], []
    for ln in lines[1:]:
        parts = ln.split()
        if int(parts[0]) != k:
            raise ValueError(f"{path}: inconsistent flat dimension")
        nums = [float(tok) for tok in parts[1:]]
        if len(nums) != n + k * n:
            raise ValueError(f"{path}: flat line needs {n + k * n} floats")
        offsets.append(nums[:n])
        bases.append(np.array(nums[n:]).reshape(k, n))
    m = len(offsets)
    bases_arr = np.array(bases).reshape(m, k, n)
    offsets_arr = np.array(offsets).reshape(m, n)
    return FlatSample(n, k, radius, bases_arr, offsets_arr, seed)
