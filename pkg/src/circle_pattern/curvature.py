"""Per-face total geodesic curvature, its Jacobian, and potential differences."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .bigon import FD_STEP, curvature_trig, side_curvatures
from .complex import CellComplex


@dataclass(frozen=True, eq=False)
class CurvatureState:
    """Geodesic curvatures ``k = cot r`` on every face of ``complex``.

    Faces with ``k == 0`` exactly are pinned (radius ``pi/2``); the rest are
    active and carry finite log-curvature ``K = ln k``.
    """

    complex: CellComplex
    k: np.ndarray

    def __post_init__(self):
        k = np.array(self.k, dtype=float)
        if k.shape != (self.complex.num_faces,):
            raise ValueError(f"k must have length {self.complex.num_faces}, got {k.shape}")
        if not np.all(np.isfinite(k)) or np.any(k < 0):
            raise ValueError("k must be finite and non-negative")
        k.setflags(write=False)
        object.__setattr__(self, "k", k)

    @classmethod
    def from_radii(cls, complex: CellComplex, r) -> "CurvatureState":
        r = np.asarray(r, dtype=float)
        if np.any((r <= 0) | (r > math.pi / 2)):
            raise ValueError("radii must lie in (0, pi/2]")
        c = np.where(r == math.pi / 2, 0.0, np.cos(r))
        return cls(complex, c / np.sin(r))

    @classmethod
    def from_log(cls, complex: CellComplex, K) -> "CurvatureState":
        return cls(complex, np.exp(np.asarray(K, dtype=float)))

    @property
    def pinned(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.k == 0.0).tolist())

    @property
    def active(self) -> tuple[int, ...]:
        return tuple(np.flatnonzero(self.k > 0.0).tolist())

    @property
    def r(self) -> np.ndarray:
        return np.arctan2(1.0, self.k)

    @property
    def K(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.k)


def side_values(complex: CellComplex, k: np.ndarray) -> np.ndarray:
    """Curvature ``2 alpha cos r`` of every bigon side, laid out like ``complex.side_face``.

    Hot path of every flow step, so the trig is inlined.
    """
    h = np.hypot(1.0, k)
    c = k / h
    s = 1.0 / h
    own, other = complex.side_face, complex.side_other
    c1, s1, s2 = c[own], s[own], s[other]
    alpha = np.arctan2(s2 * complex.side_sin, c[other] * s1 + c1 * s2 * complex.side_cos)
    return 2.0 * alpha * c1


def edge_sides(complex: CellComplex, k: np.ndarray):
    """Side curvatures ``(L_a, L_b)`` of every bigon, in edge order."""
    S = side_values(complex, np.asarray(k, dtype=float))
    return S[0::2], S[1::2]


def curvature_from_k(complex: CellComplex, k: np.ndarray) -> np.ndarray:
    """Total curvature vector for a raw curvature array (no state validation)."""
    # bincount accumulates in input order, i.e. by edge id
    return np.bincount(complex.side_face, side_values(complex, k), minlength=complex.num_faces)


def total_curvature(state: CurvatureState) -> np.ndarray:
    """``L_f``: sum of the side curvatures of every bigon bordering face ``f``."""
    L = curvature_from_k(state.complex, state.k)
    L[state.k == 0.0] = 0.0
    return L


def bigon_areas(complex: CellComplex, k: np.ndarray) -> np.ndarray:
    La, Lb = edge_sides(complex, k)
    return 2.0 * complex.weights - (La + Lb)


def jacobian_from_k(complex: CellComplex, k: np.ndarray, h: float = FD_STEP,
                    symmetrize: bool = True) -> np.ndarray:
    """``dL/dK`` over faces with ``k > 0``, assembled edge by edge.

    Each edge contributes a 2x2 block of central differences between its two
    faces, or a single diagonal entry when the other side is pinned.  The
    result is ``(M + M.T) / 2`` unless ``symmetrize`` is off.
    """
    k = np.asarray(k, dtype=float)
    active = np.flatnonzero(k > 0.0)
    pos = np.full(complex.num_faces, -1, dtype=np.intp)
    pos[active] = np.arange(active.size)
    fa, fb, phi = complex.face_a, complex.face_b, complex.weights
    with np.errstate(divide="ignore"):
        K = np.log(k)
    Ka, Kb = K[fa], K[fb]

    def sides(KA, KB):
        ca, sa = curvature_trig(np.exp(KA))
        cb, sb = curvature_trig(np.exp(KB))
        return side_curvatures(ca, sa, cb, sb, phi, complex.cos_w, complex.sin_w)

    La_pa, Lb_pa = sides(Ka + h, Kb)
    La_ma, Lb_ma = sides(Ka - h, Kb)
    La_pb, Lb_pb = sides(Ka, Kb + h)
    La_mb, Lb_mb = sides(Ka, Kb - h)
    inv = 1.0 / (2.0 * h)
    blocks = (
        (fa, fa, (La_pa - La_ma) * inv),
        (fa, fb, (La_pb - La_mb) * inv),
        (fb, fa, (Lb_pa - Lb_ma) * inv),
        (fb, fb, (Lb_pb - Lb_mb) * inv),
    )
    m = active.size
    flat = np.zeros(m * m)
    for rows, cols, vals in blocks:
        pr, pc = pos[rows], pos[cols]
        keep = (pr >= 0) & (pc >= 0)
        flat += np.bincount(pr[keep] * m + pc[keep], vals[keep], minlength=m * m)
    M = flat.reshape(m, m)
    return 0.5 * (M + M.T) if symmetrize else M


def jacobian(state: CurvatureState, h: float = FD_STEP, symmetrize: bool = True) -> np.ndarray:
    """Jacobian ``dL_i/dK_j`` restricted to the unpinned faces (``state.active`` order)."""
    if not state.active:
        raise ValueError("all faces are pinned; the Jacobian is empty")
    return jacobian_from_k(state.complex, state.k, h, symmetrize)


def potential(state_from: CurvatureState, state_to: CurvatureState,
              epsabs: float = 1e-13, epsrel: float = 1e-12) -> float:
    """Potential difference ``Lambda(K_to) - Lambda(K_from)``.

    Integrates ``<L(K(t)), dK/dt>`` along the straight segment between the
    two log-curvature vectors; pinned faces stay at ``K = -inf`` throughout.
    """
    if state_from.complex is not state_to.complex and state_from.complex != state_to.complex:
        raise ValueError("states belong to different complexes")
    if state_from.pinned != state_to.pinned:
        raise ValueError("states must share the same pinned set")
    active = np.array(state_from.active, dtype=np.intp)
    K0 = np.log(state_from.k[active])
    dK = np.log(state_to.k[active]) - K0
    if not np.any(dK):
        return 0.0
    complex = state_from.complex
    k = np.zeros(complex.num_faces)

    def integrand(t):
        k[active] = np.exp(K0 + t * dK)
        return float(curvature_from_k(complex, k)[active] @ dK)

    value, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=200)
    return value
