"""Spherical trigonometry of a single weighted bigon.

A bigon is the lens cut out by two disks of radii ``r1, r2`` in ``(0, pi/2]``
on the unit sphere meeting at interior angle ``phi`` in ``(0, pi/2)``.  All
vectorised routines accept numpy arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

HALF_PI = math.pi / 2
FD_STEP = 1e-6


def _check_domain(r1, r2, phi) -> None:
    for name, r in (("r1", r1), ("r2", r2)):
        r = np.asarray(r, dtype=float)
        if not np.all((r > 0.0) & (r <= HALF_PI)):
            raise ValueError(f"{name} must lie in (0, pi/2], got {r}")
    phi = np.asarray(phi, dtype=float)
    if not np.all((phi > 0.0) & (phi < HALF_PI)):
        raise ValueError(f"phi must lie in (0, pi/2), got {phi}")


def radius_trig(r):
    """``(cos r, sin r)`` with ``cos(pi/2)`` pinned to exactly zero."""
    r = np.asarray(r, dtype=float)
    great = r == HALF_PI
    c = np.where(great, 0.0, np.cos(r))
    s = np.where(great, 1.0, np.sin(r))
    return c, s


def curvature_trig(k):
    """``(cos r, sin r)`` for ``r = arccot k``, computed without forming ``r``.

    Exact at ``k = 0`` (a great circle); ``hypot`` avoids overflow for huge k.
    """
    k = np.asarray(k, dtype=float)
    h = np.hypot(1.0, k)
    return k / h, 1.0 / h


def half_angles(c1, s1, c2, s2, cos_phi, sin_phi):
    """Half central angles subtended by each bigon side at its own disk center.

    From the triangle (center 1, center 2, corner) with sides ``r1, r2, d``
    and corner angle ``pi - phi``.  The law of sines gives the numerator, the
    law of cosines (after cancelling ``sin r_i``) the denominator.
    """
    a1 = np.arctan2(s2 * sin_phi, c2 * s1 + c1 * s2 * cos_phi)
    a2 = np.arctan2(s1 * sin_phi, c1 * s2 + c2 * s1 * cos_phi)
    return a1, a2


def side_curvatures(c1, s1, c2, s2, phi, cos_phi=None, sin_phi=None):
    """Total geodesic curvature ``(L1, L2)`` of the two sides of each bigon."""
    if cos_phi is None:
        cos_phi, sin_phi = np.cos(phi), np.sin(phi)
    a1, a2 = half_angles(c1, s1, c2, s2, cos_phi, sin_phi)
    return 2.0 * a1 * c1, 2.0 * a2 * c2


def center_distance(r1, r2, phi):
    """Distance between the two disk centers (spherical law of cosines)."""
    _check_domain(r1, r2, phi)
    c1, s1 = radius_trig(r1)
    c2, s2 = radius_trig(r2)
    cos_d = c1 * c2 - s1 * s2 * np.cos(phi)
    d = np.arccos(np.clip(cos_d, -1.0, 1.0))
    return float(d) if np.ndim(d) == 0 else d


@dataclass(frozen=True)
class BigonGeometry:
    r1: float
    r2: float
    phi: float
    d: float
    alpha1: float
    alpha2: float
    ell1: float
    ell2: float
    L1: float
    L2: float
    area: float

    def swapped(self) -> "BigonGeometry":
        return BigonGeometry(
            self.r2, self.r1, self.phi, self.d,
            self.alpha2, self.alpha1, self.ell2, self.ell1,
            self.L2, self.L1, self.area,
        )

    def to_dict(self) -> dict:
        return asdict(self)


def bigon(r1: float, r2: float, phi: float) -> BigonGeometry:
    """Full geometry of the bigon with radii ``r1, r2`` and angle ``phi``.

    Side ``i`` is the arc of circle ``i`` lying inside the other disk; it
    subtends ``2*alpha_i`` at its center, so ``ell_i = 2 alpha_i sin r_i`` and
    ``L_i = ell_i cot r_i = 2 alpha_i cos r_i``.  The area follows from
    Gauss-Bonnet.
    """
    r1, r2, phi = float(r1), float(r2), float(phi)
    d = center_distance(r1, r2, phi)
    c1, s1 = radius_trig(r1)
    c2, s2 = radius_trig(r2)
    a1, a2 = half_angles(c1, s1, c2, s2, math.cos(phi), math.sin(phi))
    a1, a2 = float(a1), float(a2)
    L1 = 2.0 * a1 * float(c1)
    L2 = 2.0 * a2 * float(c2)
    return BigonGeometry(
        r1=r1, r2=r2, phi=phi, d=d,
        alpha1=a1, alpha2=a2,
        ell1=2.0 * a1 * float(s1), ell2=2.0 * a2 * float(s2),
        L1=L1, L2=L2,
        area=2.0 * phi - (L1 + L2),
    )


def _sides_at_log(K1, K2, phi):
    c1, s1 = curvature_trig(np.exp(K1))
    c2, s2 = curvature_trig(np.exp(K2))
    return side_curvatures(c1, s1, c2, s2, phi)


def bigon_derivatives(r1: float, r2: float, phi: float, h: float = FD_STEP) -> np.ndarray:
    """Jacobian ``dL_i/dK_j`` with ``K = ln cot r``, by central differences in K.

    A side with ``r = pi/2`` sits at ``K = -inf``; its row and column are zero
    (``L`` vanishes identically there and ``K`` cannot be perturbed).
    """
    _check_domain(r1, r2, phi)
    K = [-math.inf if r == HALF_PI else math.log(1.0 / math.tan(r)) for r in (r1, r2)]
    J = np.zeros((2, 2))
    for j in range(2):
        if K[j] == -math.inf:
            continue
        plus = list(K)
        minus = list(K)
        plus[j] += h
        minus[j] -= h
        Lp = _sides_at_log(plus[0], plus[1], phi)
        Lm = _sides_at_log(minus[0], minus[1], phi)
        for i in range(2):
            if K[i] != -math.inf:
                J[i, j] = (float(Lp[i]) - float(Lm[i])) / (2.0 * h)
    return J
