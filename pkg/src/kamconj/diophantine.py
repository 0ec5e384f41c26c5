"""Small-divisor lower bounds for rotation vectors."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVector

__all__ = [
    "DiophantineVector",
    "DCReport",
    "small_divisor",
    "verify_dc",
    "verified",
    "best_gamma",
]

_RESONANCE_FLOOR = 1e-13


@dataclass(frozen=True, eq=False)
class DiophantineVector:
    """Rotation vector with claimed small-divisor constants.

    The claim is dist(k . alpha, Z) >= 1 / (gamma * |k|_1^tau) for all
    0 < |k|_1 <= verified_up_to.  Construction does not check the claim;
    call `verify_dc` (or `verified`) to establish it over a range.
    """

    alpha: np.ndarray
    gamma: float
    tau: float
    verified_up_to: int = 0

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.alpha, dtype=float)) % 1.0
        if a.size not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if not (self.gamma > 0 and self.tau > 0):
            raise ValueError("gamma and tau must be positive")
        a.flags.writeable = False
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def dim(self) -> int:
        return int(self.alpha.size)


@dataclass(frozen=True)
class DCReport:
    ok: bool
    worst_k: tuple
    worst_ratio: float
    checked_up_to: int


def _ball(dim: int, radius: int):
    """Canonical half of the punctured l1 ball: one of each +-k pair."""
    if radius < 1:
        raise ValueError("radius must be at least 1")
    if dim == 1:
        k = np.arange(1, radius + 1)[:, None]
        return k
    ax = np.arange(-radius, radius + 1)
    k1, k2 = np.meshgrid(ax, ax, indexing="ij")
    k = np.stack([k1.ravel(), k2.ravel()], axis=1)
    norms = np.abs(k).sum(axis=1)
    canonical = (k[:, 0] > 0) | ((k[:, 0] == 0) & (k[:, 1] > 0))
    return k[(norms >= 1) & (norms <= radius) & canonical]


def _dist_to_integers(t: np.ndarray) -> np.ndarray:
    r = t % 1.0
    return np.minimum(r, 1.0 - r)


def small_divisor(vec: DiophantineVector, k) -> float:
    """Magnitude of e^(2*pi*i*k.alpha) - 1, reduced mod 1 before exponentiation."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    t = float(np.dot(k, vec.alpha)) % 1.0
    return float(2.0 * abs(np.sin(np.pi * t)))


def _worst(alpha: np.ndarray, tau: float, radius: int):
    k = _ball(alpha.size, radius)
    dots = k @ alpha
    dist = _dist_to_integers(dots)
    ratio = dist * (np.abs(k).sum(axis=1).astype(float) ** tau)
    i = int(np.argmin(ratio))
    return tuple(int(x) for x in k[i]), float(ratio[i])


def verify_dc(vec: DiophantineVector, radius: int) -> DCReport:
    """Check the claimed (gamma, tau) bound for all 0 < |k|_1 <= radius.

    The distance dist(k . alpha, Z) is symmetric under k -> -k, so only a
    canonical half of the ball is enumerated.
    """
    worst_k, worst_ratio = _worst(vec.alpha, vec.tau, int(radius))
    return DCReport(
        ok=bool(worst_ratio >= 1.0 / vec.gamma),
        worst_k=worst_k,
        worst_ratio=worst_ratio,
        checked_up_to=int(radius),
    )


def verified(vec: DiophantineVector, radius: int) -> DiophantineVector:
    """Return a copy whose verified range covers `radius`, or raise DCViolation."""
    from .errors import DCViolation

    if vec.verified_up_to >= radius:
        return vec
    report = verify_dc(vec, radius)
    if not report.ok:
        raise DCViolation(
            f"dist(k.alpha, Z) * |k|^tau = {report.worst_ratio:.6e} at k={report.worst_k}, "
            f"below 1/gamma = {1.0 / vec.gamma:.6e}"
        )
    return dataclasses.replace(vec, verified_up_to=int(radius))


def best_gamma(alpha, tau: float, radius: int) -> float:
    """Smallest admissible gamma over the given frequency range.

    Raises DegenerateVector when some k.alpha is an integer to within roundoff,
    in which case no finite gamma works.
    """
    a = np.atleast_1d(np.asarray(alpha, dtype=float)) % 1.0
    worst_k, worst_ratio = _worst(a, float(tau), int(radius))
    if worst_ratio < _RESONANCE_FLOOR:
        raise DegenerateVector(f"resonance at k={worst_k}: k.alpha is an integer to roundoff")
    return 1.0 / worst_ratio
