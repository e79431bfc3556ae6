"""Classify prescribed total-curvature targets against the feasibility region.

A target is realisable by a (possibly degenerate) pattern iff, on its
support ``S``, every nonempty subset ``F' <= S`` satisfies

    sum_{f in F'} L_f  <  2 * sum_{e in E_{F'}} Phi(e)

where ``E_{F'}`` is taken in the full complex.  All ``2^|S| - 1`` subsets are
enumerated exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex import CellComplex

MAX_SUPPORT = 24
BOUNDARY_TOL = 1e-12

INTERIOR = "interior"
STRATUM = "stratum"
ZERO = "zero"
INFEASIBLE = "infeasible"


class SupportTooLargeError(ValueError):
    """The target's support is too large for exhaustive classification."""


@dataclass(frozen=True)
class TargetClass:
    kind: str
    support: tuple[int, ...] = ()
    witness: tuple[int, ...] | None = None
    slack: float | None = None
    note: str | None = None

    @property
    def feasible(self) -> bool:
        return self.kind != INFEASIBLE

    def to_dict(self) -> dict:
        out: dict = {"class": self.kind}
        if self.kind == STRATUM:
            out["support"] = list(self.support)
        if self.kind == INFEASIBLE:
            out["witness"] = list(self.witness)
            out["slack"] = self.slack
            if self.note:
                out["note"] = self.note
        return out


def _zeta(values: np.ndarray, nbits: int) -> np.ndarray:
    """In-place subset-sum transform: ``out[m] = sum of values[s] over s <= m``."""
    for b in range(nbits):
        view = values.reshape(-1, 2, 1 << b)
        view[:, 1, :] += view[:, 0, :]
    return values


def subset_slacks(complex: CellComplex, L_hat, support) -> np.ndarray:
    """Slack ``sum L_hat(F') - 2 sum Phi(E_F')`` for every subset of ``support``.

    Index ``m`` encodes the subset ``{support[j] : bit j of m set}``; entry 0
    (the empty set) is zero.
    """
    support = list(support)
    n = len(support)
    if n > MAX_SUPPORT:
        raise SupportTooLargeError(
            f"support too large for exhaustive classification ({n} > {MAX_SUPPORT})"
        )
    L_hat = np.asarray(L_hat, dtype=float)
    bit = {f: 1 << j for j, f in enumerate(support)}

    lsum = np.zeros(1 << n)
    for f, b in bit.items():
        lsum[b] = L_hat[f]
    _zeta(lsum, n)

    # weight mass of edges whose support-faces all lie inside a given subset
    inside = np.zeros(1 << n)
    for e in complex.edges:
        m = bit.get(e.face_a, 0) | bit.get(e.face_b, 0)
        if m:
            inside[m] += e.weight
    _zeta(inside, n)
    total = inside[-1]
    # an edge misses F' iff its support-faces sit in the complement of F'
    budget = total - inside[::-1]
    return lsum - 2.0 * budget


def classify_target(complex: CellComplex, L_hat) -> TargetClass:
    """Exact classification of ``L_hat`` as interior, stratum, zero or infeasible."""
    L_hat = np.asarray(L_hat, dtype=float)
    if L_hat.shape != (complex.num_faces,):
        raise ValueError(f"target must have length {complex.num_faces}, got {L_hat.shape}")
    if not np.all(np.isfinite(L_hat)) or np.any(L_hat < 0):
        raise ValueError("target entries must be finite and non-negative")

    support = tuple(np.flatnonzero(L_hat > 0).tolist())
    if not support:
        return TargetClass(ZERO)

    slack = subset_slacks(complex, L_hat, support)
    slack[0] = -np.inf
    worst = slack.max()
    if worst > -BOUNDARY_TOL:
        tied = np.flatnonzero(slack == worst)
        witness = min(
            tuple(f for j, f in enumerate(support) if (int(m) >> j) & 1) for m in tied
        )
        note = "boundary-proximal" if worst < 0 else None
        return TargetClass(INFEASIBLE, support, witness, float(worst), note)
    kind = INTERIOR if len(support) == complex.num_faces else STRATUM
    return TargetClass(kind, support)


def violates(complex: CellComplex, L_hat, faces) -> bool:
    """Direct check of one subset inequality, independent of the enumeration."""
    faces = list(faces)
    lhs = float(np.sum(np.asarray(L_hat, dtype=float)[faces]))
    rhs = 2.0 * complex.weight_sum(complex.edge_set_of(faces))
    return lhs >= rhs
