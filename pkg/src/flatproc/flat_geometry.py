"""Exact linear algebra on linear and affine subspaces.

Subspaces are stored as stacks of orthonormal row vectors.  Affine flats are
a direction subspace plus an offset in its orthogonal complement.  All
operations are pure; values are immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._rng import SeedLike, as_generator

ORTHO_TOL = 1e-12
RANK_TOL = 1e-10
GENERAL_POSITION_TOL = 1e-10


class DegeneratePairError(ValueError):
    """Raised when a pair of flats is not in general position."""


def canonical_unit(u: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Normalize u and pick the lexicographically larger of +-u.

    The sign convention identifies a line in G(n,1) with a single point of
    the sphere; measures on lines become even sphere measures under it.
    """
    u = np.asarray(u, dtype=float)
    norm = float(np.linalg.norm(u))
    if norm < tol:
        raise ValueError("cannot canonicalize a near-zero vector")
    u = u / norm
    for x in u:
        if abs(x) > tol:
            return u if x > 0 else -u
    return u


@dataclass(frozen=True)
class Subspace:
    """A k-dimensional linear subspace of R^n with an orthonormal basis.

    basis has shape (k, n); rows are pairwise orthonormal within 1e-12.
    k = 0 (empty basis) denotes the trivial subspace.
    """

    basis: np.ndarray

    def __post_init__(self) -> None:
        basis = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if basis.size == 0:
            basis = basis.reshape(0, basis.shape[-1] if basis.ndim == 2 else 0)
        object.__setattr__(self, "basis", basis)
        k, n = basis.shape
        if k > n:
            raise ValueError(f"subspace dimension {k} exceeds ambient dimension {n}")
        if k > 0:
            gram = basis @ basis.T
            if not np.allclose(gram, np.eye(k), atol=1e-10):
                raise ValueError("basis rows are not orthonormal")
        basis.flags.writeable = False

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the subspace, shape (n, n)."""
        return self.basis.T @ self.basis

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection of x onto the subspace."""
        if self.k == 0:
            return np.zeros(self.n)
        return (np.asarray(x, dtype=float) @ self.basis.T) @ self.basis

    def same_span(self, other: "Subspace", tol: float = 1e-8) -> bool:
        if self.n != other.n or self.k != other.k:
            return False
        return bool(np.linalg.norm(self.projector() - other.projector()) < tol)

    @staticmethod
    def full(n: int) -> "Subspace":
        return Subspace(np.eye(n))

    @staticmethod
    def trivial(n: int) -> "Subspace":
        return Subspace(np.zeros((0, n)))

    @staticmethod
    def span(*vectors: np.ndarray) -> "Subspace":
        return orthonormalize(list(vectors))


@dataclass(frozen=True)
class Flat:
    """An affine flat E = L + x with direction L and offset x in L-perp."""

    direction: Subspace
    offset: np.ndarray

    def __post_init__(self) -> None:
        offset = np.asarray(self.offset, dtype=float)
        object.__setattr__(self, "offset", offset)
        if offset.shape != (self.direction.n,):
            raise ValueError("offset length must equal the ambient dimension")
        if self.direction.k > 0:
            inner = self.direction.basis @ offset
            if np.max(np.abs(inner), initial=0.0) >= ORTHO_TOL:
                raise ValueError("offset is not orthogonal to the direction subspace")
        offset.flags.writeable = False

    @property
    def n(self) -> int:
        return self.direction.n

    @property
    def k(self) -> int:
        return self.direction.k

    @staticmethod
    def through_point(direction: Subspace, point: np.ndarray) -> "Flat":
        """The flat with the given direction passing through point."""
        point = np.asarray(point, dtype=float)
        return Flat(direction, point - direction.project(point))

    def distance_to_point(self, x: np.ndarray) -> float:
        d = np.asarray(x, dtype=float) - self.offset
        return float(np.linalg.norm(d - self.direction.project(d)))

    def contains_flat(self, other: "Flat", tol: float = 1e-8) -> bool:
        """True if every point of `other` lies within tol of this flat."""
        if self.distance_to_point(other.offset) > tol:
            return False
        for row in other.direction.basis:
            if self.distance_to_point(other.offset + row) > tol:
                return False
        return True

    def translate(self, z: np.ndarray) -> "Flat":
        return Flat.through_point(self.direction, self.offset + np.asarray(z, dtype=float))


@dataclass(frozen=True)
class ProximitySegment:
    """The perpendicular segment realizing the distance of two flats.

    midpoint = (x_E + x_F)/2, length = |x_E - x_F|, direction the
    sign-canonicalized unit vector of x_E - x_F, indices the generating pair.
    """

    midpoint: np.ndarray
    length: float
    direction: np.ndarray
    indices: tuple[int, int] = field(default=(-1, -1))

    def __post_init__(self) -> None:
        midpoint = np.asarray(self.midpoint, dtype=float)
        direction = np.asarray(self.direction, dtype=float)
        object.__setattr__(self, "midpoint", midpoint)
        object.__setattr__(self, "direction", direction)
        if self.length <= 0:
            raise ValueError("segment length must be positive")
        if abs(np.linalg.norm(direction) - 1.0) >= ORTHO_TOL * 10:
            raise ValueError("segment direction must be a unit vector")
        midpoint.flags.writeable = False
        direction.flags.writeable = False


def orthonormalize(vectors, tol: float = RANK_TOL) -> Subspace:
    """Orthonormal basis of the span of the input vectors.

    Gram-Schmidt with re-orthogonalization; vectors whose residual falls
    below tol are treated as dependent, so the result's dimension is the
    numerical rank of the input.
    """
    vecs = [np.asarray(v, dtype=float) for v in vectors]
    if not vecs:
        raise ValueError("need at least one vector (possibly zero) to fix the ambient dimension")
    n = vecs[0].shape[0]
    rows: list[np.ndarray] = []
    for v in vecs:
        if v.shape != (n,):
            raise ValueError("all vectors must share a common length")
        w = v.copy()
        for _ in range(2):  # second pass stabilizes near-dependent input
            for b in rows:
                w -= (w @ b) * b
        norm = float(np.linalg.norm(w))
        if norm > tol:
            rows.append(w / norm)
    if not rows:
        return Subspace.trivial(n)
    return Subspace(np.vstack(rows))


def complement(u: Subspace) -> Subspace:
    """Orthogonal complement, of dimension n - k."""
    n, k = u.n, u.k
    if k == 0:
        return Subspace.full(n)
    if k == n:
        return Subspace.trivial(n)
    # columns k..n-1 of a full orthonormal extension of the basis
    full_q, _ = np.linalg.qr(u.basis.T, mode="complete")
    return Subspace(full_q[:, k:].T)


def subspace_determinant(subspaces) -> float:
    """Subspace determinant [L_1, ..., L_r] in [0, 1].

    For sum of dimensions <= n this is the volume of the parallelepiped
    spanned by the concatenated orthonormal bases; for sum of dimensions
    >= (r-1)n it is evaluated on the orthogonal complements.  Returns 0
    for dependent configurations.
    """
    subspaces = list(subspaces)
    if not subspaces:
        raise ValueError("need at least one subspace")
    n = subspaces[0].n
    if any(s.n != n for s in subspaces):
        raise ValueError("subspaces must share the ambient dimension")
    r = len(subspaces)
    total = sum(s.k for s in subspaces)
    if total <= n:
        bases = [s.basis for s in subspaces if s.k > 0]
    elif total >= (r - 1) * n:
        bases = [complement(s).basis for s in subspaces if s.k < n]
    else:
        raise ValueError("determinant undefined for these dimensions")
    if not bases:
        return 1.0
    g = np.vstack(bases)
    gram = g @ g.T
    det = float(np.linalg.det(gram))
    if det <= 0.0:
        return 0.0
    return min(np.sqrt(det), 1.0)


def parallelepiped_volume(vectors) -> float:
    """nabla_k(u_1,...,u_k): k-volume of the parallelepiped of unit vectors.

    Equals the subspace determinant of the spanned lines; evaluated directly
    from the Gram matrix so that dependent inputs yield exactly 0.
    """
    g = np.vstack([np.asarray(v, dtype=float) for v in vectors])
    det = float(np.linalg.det(g @ g.T))
    if det <= 0.0:
        return 0.0
    return min(np.sqrt(det), 1.0)


def haar_sample(n: int, k: int, rng: SeedLike) -> Subspace:
    """Haar-distributed k-dimensional subspace of R^n.

    The span of k independent standard normal vectors is rotation invariant,
    which characterizes the Haar probability measure on G(n,k).
    """
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    gen = as_generator(rng)
    while True:
        candidate = orthonormalize(gen.standard_normal((k, n)))
        if candidate.k == k:  # almost sure; guards degenerate draws
            return candidate


def random_rotation(n: int, rng: SeedLike) -> np.ndarray:
    """Haar-distributed rotation matrix (determinant +1)."""
    gen = as_generator(rng)
    q, r = np.linalg.qr(gen.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def rotate_subspace(u: Subspace, rotation: np.ndarray) -> Subspace:
    return Subspace(u.basis @ rotation.T)


def principal_angles(u1: Subspace, u2: Subspace) -> np.ndarray:
    """Principal angles between two subspaces of equal dimension."""
    if u1.k != u2.k:
        raise ValueError("subspaces must have equal dimension")
    if u1.k == 0:
        return np.zeros(0)
    sv = np.linalg.svd(u1.basis @ u2.basis.T, compute_uv=False)
    return np.arccos(np.clip(sv, 0.0, 1.0))


def grassmann_distance(u1: Subspace, u2: Subspace) -> float:
    """Squared-deviation size of the minimal rotation carrying u1 to u2.

    A rotation acting by the principal angles theta_i in orthogonal planes
    maps u1 onto u2 and has squared deviation from the identity equal to
    4 * sum_i (1 - cos theta_i); this direct rotation is minimal.
    """
    theta = principal_angles(u1, u2)
    return float(4.0 * np.sum(1.0 - np.cos(theta)))


def grassmann_metric(u1: Subspace, u2: Subspace) -> float:
    """Square root of grassmann_distance; satisfies the triangle inequality.

    grassmann_distance itself is a squared Frobenius deviation and is not a
    metric; its square root is the Frobenius distance of the direct rotation
    from the identity and is used wherever a genuine metric table is needed.
    """
    return float(np.sqrt(grassmann_distance(u1, u2)))


def closest_pair(e: Flat, f: Flat):
    """Closest-point pair of two flats, or their intersection flat.

    For dim(E) + dim(F) < n returns the ProximitySegment joining the unique
    closest points; for dim sums >= n returns the intersection Flat of
    dimension k1 + k2 - n.  Pairs that are not in general position (subspace
    determinant <= 1e-10), or that touch, raise DegeneratePairError.
    """
    n = e.n
    if f.n != n:
        raise ValueError("flats must share the ambient dimension")
    det = subspace_determinant([e.direction, f.direction])
    if det <= GENERAL_POSITION_TOL:
        raise DegeneratePairError("degenerate pair")
    if e.k + f.k < n:
        bl, bm = e.direction.basis, f.direction.basis
        if e.k + f.k == 0:
            x_e, x_f = e.offset.copy(), f.offset.copy()
        else:
            rows = [b for b in (bl, -bm) if b.shape[0] > 0]
            g = np.vstack(rows)
            # minimize |(a - b) + G^T w|; then a + w_L . B_L and b + w_M . B_M
            # are the feet and their gap is orthogonal to both directions
            w = np.linalg.solve(g @ g.T, -g @ (e.offset - f.offset))
            x_e = e.offset + (w[: e.k] @ bl if e.k else 0.0)
            x_f = f.offset + (w[e.k:] @ bm if f.k else 0.0)
        gap = x_e - x_f
        dist = float(np.linalg.norm(gap))
        if dist < 1e-12:
            raise DegeneratePairError("flats touch; no positive-length perpendicular")
        return ProximitySegment(
            midpoint=(x_e + x_f) / 2.0,
            length=dist,
            direction=canonical_unit(gap),
        )
    return _intersection_flat([e, f])


def _intersection_flat(flats) -> Flat:
    """Intersection of flats whose complement bases are independent."""
    n = flats[0].n
    rows, rhs = [], []
    for flat in flats:
        comp = complement(flat.direction).basis
        rows.append(comp)
        rhs.append(comp @ flat.offset)
    normal = np.vstack(rows)
    target = np.concatenate(rhs)
    point, _, rank, _ = np.linalg.lstsq(normal, target, rcond=None)
    if rank < normal.shape[0]:
        raise DegeneratePairError("degenerate pair")
    q = n - normal.shape[0]
    if q == 0:
        direction = Subspace.trivial(n)
    else:
        _, _, vt = np.linalg.svd(normal)
        direction = Subspace(vt[n - q:])
    return Flat.through_point(direction, point)


def intersect_flats(flats) -> Flat:
    """Intersection flat of r flats with sum of dims >= (r-1)n.

    Raises DegeneratePairError when the configuration is not in general
    position (subspace determinant of the directions <= 1e-10).
    """
    flats = list(flats)
    det = subspace_determinant([f.direction for f in flats])
    if det <= GENERAL_POSITION_TOL:
        raise DegeneratePairError("degenerate pair")
    return _intersection_flat(flats)
