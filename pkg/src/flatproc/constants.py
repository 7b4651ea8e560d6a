"""Ball volumes, sphere surface measures, and spherical cap measures."""
from __future__ import annotations

import math

from scipy.special import betainc


def ball_volume(k: int) -> float:
    """Volume kappa_k of the unit ball in R^k (kappa_0 = 1).

    Computed by the recurrence kappa_k = (2 pi / k) kappa_{k-2}, which keeps
    the small values (kappa_1 = 2, kappa_2 = pi) exact in floating point.
    """
    if k < 0:
        raise ValueError(f"dimension must be nonnegative, got {k}")
    value = 1.0 if k % 2 == 0 else 2.0
    for j in range(2 + k % 2, k + 1, 2):
        value *= 2.0 * math.pi / j
    return value


def sphere_surface(k: int) -> float:
    """Total spherical Lebesgue measure omega_k = k*kappa_k of S^{k-1} in R^k.

    For k = 1 the sphere S^0 = {-1, +1} carries counting measure, omega_1 = 2.
    """
    if k < 1:
        raise ValueError(f"dimension must be positive, got {k}")
    return k * ball_volume(k)


def cap_measure(k: int, t: float) -> float:
    """Measure of the spherical cap {v in S^{k-1} : <v, e> >= t}.

    Computed against the unnormalized spherical Lebesgue measure on the
    sphere S^{k-1} in R^k.  For k = 1 the sphere is the two-point set and
    the measure is counting measure.
    """
    if k < 1:
        raise ValueError(f"dimension must be positive, got {k}")
    if t <= -1.0:
        return sphere_surface(k)
    if t > 1.0:
        return 0.0
    if k == 1:
        # points +1 and -1
        return float(t <= 1.0) + float(t <= -1.0)
    # omega_{k-1} * int_t^1 (1-s^2)^{(k-3)/2} ds via the regularized
    # incomplete beta function (substitute s^2 = u on each half-line)
    a, b = 0.5, (k - 1) / 2.0
    full = math.gamma(a) * math.gamma(b) / math.gamma(a + b)  # Beta(a, b)
    if t >= 0.0:
        partial = 0.5 * full * (1.0 - float(betainc(a, b, t * t)))
    else:
        partial = 0.5 * full * (1.0 + float(betainc(a, b, t * t)))
    return sphere_surface(k - 1) * partial


def double_cap_measure(k: int, t: float) -> float:
    """Measure of {v in S^{k-1} : |<v, e>| >= t} for t >= 0."""
    if t <= 0.0:
        return sphere_surface(k)
    return 2.0 * cap_measure(k, t)
