"""Zonotopes of discrete even generating measures and their area measures.

A zonotope is stored by half-length generators: the segment of a +-pair of
pair mass q runs from -(q/2)u to +(q/2)u, so the support function of the
zonotope equals the cosine-moment integral of half the generating measure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from . import constants
from .flat_geometry import Subspace, orthonormalize, complement, parallelepiped_volume
from .measures import GrassmannMeasure, SphereMeasure

DROP_TOL = 1e-10
MERGE_TOL = 1e-8


@dataclass(frozen=True)
class Zonotope:
    """Minkowski sum of centered segments [-w_i u_i, +w_i u_i].

    generators is a tuple of (canonical unit direction, half-length w_i > 0).
    """

    n: int
    generators: tuple[tuple[np.ndarray, float], ...]

    def __post_init__(self) -> None:
        for u, w in self.generators:
            if u.shape != (self.n,):
                raise ValueError("generator directions must be n-vectors")
            if w <= 0:
                raise ValueError("generator half-lengths must be positive")

    def direction_matrix(self) -> np.ndarray:
        if not self.generators:
            return np.zeros((0, self.n))
        return np.vstack([u for u, _ in self.generators])

    def half_lengths(self) -> np.ndarray:
        return np.array([w for _, w in self.generators])

    def scaled(self, factor: float) -> "Zonotope":
        return Zonotope(self.n, tuple((u, w * factor) for u, w in self.generators))


def from_measure(mu: SphereMeasure) -> Zonotope:
    """Zonotope whose support function is (1/2) * cosine moment of mu.

    Each +-pair of pair mass q contributes the segment with endpoints
    +-(q/2) u.  Only atomic measures generate zonotopes here.
    """
    if not mu.is_atomic:
        raise ValueError("zonotope construction requires an atomic even measure")
    return Zonotope(mu.n, tuple((u, w / 2.0) for u, w in mu.pair_atoms))


def support(z: Zonotope, x: np.ndarray) -> float:
    """Support function h(Z, x) = sum_i w_i |<u_i, x>|."""
    x = np.asarray(x, dtype=float)
    if not z.generators:
        return 0.0
    return float(z.half_lengths() @ np.abs(z.direction_matrix() @ x))


def intrinsic_volume(z: Zonotope, m: int) -> float:
    """m-th intrinsic volume of the zonotope.

    V_m(Z) = sum over m-subsets I of generators of the product of the full
    segment lengths (2 w_i) times the parallelepiped volume of the subset's
    directions.  V_0 = 1; subsets spanning less than m dimensions drop out.
    """
    if not 0 <= m <= z.n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={z.n}")
    if m == 0:
        return 1.0
    dirs = z.direction_matrix()
    lengths = 2.0 * z.half_lengths()
    total = 0.0
    for idx in combinations(range(len(z.generators)), m):
        sel = dirs[list(idx)]
        vol = parallelepiped_volume(sel)
        if vol > 0.0:
            total += float(np.prod(lengths[list(idx)])) * vol
    return total


def merge_grassmann_atoms(atoms, tol: float = MERGE_TOL):
    """Merge weighted subspace atoms whose projectors coincide within tol."""
    merged: list[tuple[Subspace, float]] = []
    for sub, w in atoms:
        for i, (existing, weight) in enumerate(merged):
            if np.linalg.norm(existing.projector() - sub.projector()) < tol:
                merged[i] = (existing, weight + w)
                break
        else:
            merged.append((sub, w))
    return merged


def mu_Q_r(q: SphereMeasure, r: int) -> GrassmannMeasure:
    """Hyperplane-intersection measure of an atomic even measure.

    The r-fold integral of the parallelepiped volume nabla_r over the atomic
    even measure concentrates on the subspaces u_1-perp ... u_r-perp.  Each
    unordered set of r distinct pairs {(u_i, q_i)} receives the weight

        r! * prod_i q_i * nabla_r(u_1, ..., u_r),

    which accounts for the r! orderings and the 2^r sign choices of the
    ordered tuples (each sign choice carries mass prod q_i / 2^r and leaves
    nabla_r and the intersection unchanged).  Tuples with a repeated pair
    contribute nothing since nabla_r vanishes; near-degenerate sets with
    nabla_r <= 1e-10 are dropped.
    """
    if not q.is_atomic:
        raise ValueError("requires an atomic even measure")
    if not 2 <= r <= q.n - 1:
        raise ValueError(f"need 2 <= r <= n-1, got r={r}, n={q.n}")
    units = [u for u, _ in q.pair_atoms]
    masses = [w for _, w in q.pair_atoms]
    factor = float(math.factorial(r))
    atoms: list[tuple[Subspace, float]] = []
    for idx in combinations(range(len(units)), r):
        sel = [units[i] for i in idx]
        vol = parallelepiped_volume(sel)
        if vol <= DROP_TOL:
            continue
        weight = factor * float(np.prod([masses[i] for i in idx])) * vol
        span = orthonormalize(sel)
        atoms.append((complement(span), weight))
    if not atoms:
        return GrassmannMeasure.zero(q.n, q.n - r)
    return GrassmannMeasure.discrete(merge_grassmann_atoms(atoms))


def mu_Q_r_total_mass(q: SphereMeasure, r: int) -> float:
    """Total mass of mu_Q_r without building the atoms (0 when degenerate)."""
    if not q.is_atomic:
        raise ValueError("requires an atomic even measure")
    factor = float(math.factorial(r))
    units = [u for u, _ in q.pair_atoms]
    masses = [w for _, w in q.pair_atoms]
    total = 0.0
    for idx in combinations(range(len(units)), r):
        vol = parallelepiped_volume([units[i] for i in idx])
        total += factor * float(np.prod([masses[i] for i in idx])) * vol
    return total


def area_measure(q: SphereMeasure, r: int) -> SphereMeasure:
    """r-th area measure of the zonotope of q, as a subsphere mixture.

    Lifting the hyperplane-intersection measure to the sphere and dividing by
    r! * binom(n-1, r) yields S_r(Z_q, .): the mixture has one component per
    contributing direction set, supported on the unit sphere of the
    intersection subspace.
    """
    mu = mu_Q_r(q, r)
    scale = float(math.factorial(r)) * comb(q.n - 1, r)
    return SphereMeasure.subsphere_mixture(
        q.n, [(sub, w / scale) for sub, w in mu.atoms])


def area_measure_total_mass(q: SphereMeasure, r: int) -> float:
    """Total mass S_r(Z_q, S^{n-1}); zero for degenerate configurations."""
    scale = float(math.factorial(r)) * comb(q.n - 1, r)
    return constants.sphere_surface(q.n - r) * mu_Q_r_total_mass(q, r) / scale
