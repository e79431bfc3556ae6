"""Prescribed combinatorial Ricci flows and the Newton solver.

Every flow is integrated in log-curvature coordinates ``K = ln k``, where it
reads ``dK_i/dt = -(L_i - L_hat_i)`` on the active faces: the negative
gradient flow of the convex function ``Lambda - <K, L_hat>``.  Pinned faces
sit at ``k = 0`` and are not integrated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .complex import CellComplex
from .curvature import curvature_from_k, jacobian_from_k
from .feasibility import INTERIOR, STRATUM, ZERO, TargetClass, classify_target
from .integrate import DormandPrince

log = logging.getLogger(__name__)

_K_CLIP = 700.0  # keeps exp(K) finite


class ConvergenceError(RuntimeError):
    """A solver exhausted its time or iteration budget."""


class InvalidTargetError(ValueError):
    """The target's class does not match what the solver requires."""

    def __init__(self, msg: str, target_class: TargetClass | None = None):
        super().__init__(msg)
        self.target_class = target_class


class SingularJacobianError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FlowOptions:
    dt_init: float = 0.05
    dt_max: float = 1.0
    rtol: float = 1e-8
    atol: float = 1e-10
    residual_tol: float = 1e-10
    pin_threshold: float = 1e-3
    t_max: float = 1e6
    trace_stride: int = 10
    max_iter: int = 200
    max_halvings: int = 40
    newton_max_step: float = 2.0

    def __post_init__(self):
        for name in ("dt_init", "dt_max", "rtol", "atol", "residual_tol",
                     "pin_threshold", "t_max", "trace_stride", "max_iter", "newton_max_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.residual_tol < self.pin_threshold < 1:
            raise ValueError("need residual_tol < pin_threshold < 1")


@dataclass
class TraceRow:
    t: float
    K: np.ndarray  # length |F|, -inf on pinned faces
    L: np.ndarray
    residual: float
    grad_norm: float


@dataclass
class FlowTrace:
    faces: tuple[int, ...]
    rows: list[TraceRow] = field(default_factory=list)
    steps: int = 0
    nfev: int = 0
    field_checks: int = 0
    field_violations: int = 0
    pin_events: list[tuple[float, int]] = field(default_factory=list)
    converged: bool = False

    @property
    def t(self) -> np.ndarray:
        return np.array([row.t for row in self.rows])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([row.residual for row in self.rows])

    @property
    def final(self) -> TraceRow:
        return self.rows[-1]

    def K_matrix(self) -> np.ndarray:
        return np.array([row.K[list(self.faces)] for row in self.rows])

    def write_csv(self, fh) -> None:
        m = len(self.faces)
        n = len(self.rows[0].L) if self.rows else 0
        header = ["t", "residual", "grad_norm"]
        header += [f"K_{i}" for i in range(m)] + [f"L_{i}" for i in range(n)]
        fh.write(",".join(header) + "\n")
        for row in self.rows:
            vals = [row.t, row.residual, row.grad_norm, *row.K[list(self.faces)], *row.L]
            fh.write(",".join(format(float(v), ".17g") for v in vals) + "\n")


@dataclass(frozen=True)
class NewtonResult:
    k: np.ndarray
    iterations: int
    residual: float
    target_class: TargetClass


def field_bound(complex: CellComplex) -> np.ndarray:
    """Uniform bound on ``|dK_i/dt|`` for any feasible target."""
    return 2.0 * complex.face_edge_weight_sums() + 2.0 * float(np.sum(complex.weights))


def integrate_flow(complex: CellComplex, L_hat, k0, faces, pinnable=(), opts=None,
                   divergence_limit: float | None = None):
    """Integrate ``dK/dt = -(L - L_hat)`` on ``faces``; other faces stay at ``k = 0``.

    Faces in ``pinnable`` are frozen to ``k = 0`` once ``k`` drops below
    ``opts.pin_threshold``.  No feasibility check is made here: with
    ``divergence_limit`` set, integration also stops (unconverged) once
    ``max |K|`` exceeds it, which is how infeasible targets are probed.

    Returns ``(trace, k)`` with ``k`` of length ``|F|``.
    """
    opts = opts or FlowOptions()
    L_hat = np.asarray(L_hat, dtype=float)
    k = np.zeros(complex.num_faces)
    k[list(faces)] = np.asarray(k0, dtype=float)[list(faces)]
    if np.any(k[list(faces)] <= 0):
        raise ValueError("initial curvatures must be positive on the integrated faces")
    bound = field_bound(complex)
    pin_K = math.log(opts.pin_threshold)
    pinnable = set(pinnable)
    trace = FlowTrace(faces=tuple(faces))
    active = np.array(sorted(faces), dtype=np.intp)

    def make_field(idx):
        target, cap = L_hat[idx], bound[idx]

        def fun(Ka):
            k[idx] = np.exp(np.minimum(Ka, _K_CLIP))
            v = target - curvature_from_k(complex, k)[idx]
            trace.field_checks += 1
            if (np.abs(v) > cap).any():
                trace.field_violations += 1
                log.warning("field bound violated at K=%s", Ka)
            return v
        return fun

    def record(t, Ka, v):
        k[active] = np.exp(np.minimum(Ka, _K_CLIP))
        with np.errstate(divide="ignore"):
            K_full = np.log(k)
        L = curvature_from_k(complex, k)
        L[k == 0.0] = 0.0
        res = float(np.max(np.abs(v))) if v.size else 0.0
        trace.rows.append(TraceRow(t, K_full, L, res, float(np.linalg.norm(v))))

    def pin(t, Ka):
        drop = [i for i, f in enumerate(active) if f in pinnable and Ka[i] < pin_K]
        if not drop:
            return active, Ka
        for i in drop:
            trace.pin_events.append((t, int(active[i])))
            k[active[i]] = 0.0
        keep = np.setdiff1d(np.arange(active.size), drop)
        return active[keep], Ka[keep]

    with np.errstate(divide="ignore"):
        Ka = np.log(k[active])
    active, Ka = pin(0.0, Ka)
    if active.size == 0:
        raise ValueError("nothing left to integrate")
    stepper = DormandPrince(make_field(active), Ka, 0.0, opts.dt_init, opts.dt_max,
                            opts.rtol, opts.atol)
    record(0.0, stepper.y, stepper.f)

    def done(st):
        if pinnable and pinnable.intersection(active.tolist()):
            return False
        return np.abs(st.f).max() <= opts.residual_tol

    nfev = 0
    while not done(stepper):
        if stepper.t >= opts.t_max:
            trace.nfev = nfev + stepper.nfev
            raise ConvergenceError(f"no convergence within budget (t_max={opts.t_max})")
        t, Ka = stepper.step()
        trace.steps += 1
        new_active, new_Ka = pin(t, Ka)
        if new_active.size != active.size:
            nfev += stepper.nfev
            active = new_active
            stepper = DormandPrince(make_field(active), new_Ka, t, stepper.dt,
                                    opts.dt_max, opts.rtol, opts.atol)
        if trace.steps % opts.trace_stride == 0:
            record(stepper.t, stepper.y, stepper.f)
        if divergence_limit is not None and np.max(np.abs(stepper.y)) > divergence_limit:
            break
    else:
        trace.converged = True
    if trace.rows[-1].t != stepper.t:
        record(stepper.t, stepper.y, stepper.f)
    trace.nfev = nfev + stepper.nfev
    k[active] = np.exp(np.minimum(stepper.y, _K_CLIP))
    return trace, k.copy()


def _require(complex: CellComplex, L_hat, kinds, what: str) -> TargetClass:
    tc = classify_target(complex, L_hat)
    if tc.kind not in kinds:
        raise InvalidTargetError(f"{what} requires target class {' or '.join(kinds)}, got {tc.kind}", tc)
    return tc


def flow_interior(complex: CellComplex, L_hat, k0, opts=None):
    """Flow ``dk_i/dt = -(L_i - L_hat_i) k_i`` on every face.  Returns ``(trace, k)``."""
    _require(complex, L_hat, (INTERIOR,), "flow_interior")
    k0 = np.asarray(k0, dtype=float)
    if k0.shape != (complex.num_faces,) or np.any(k0 <= 0):
        raise ValueError("k0 must be a positive vector of length |F|")
    return integrate_flow(complex, L_hat, k0, range(complex.num_faces), (), opts)


def flow_reduced(complex: CellComplex, support, L_tilde, k0_tilde, opts=None):
    """Flow on the faces of ``support`` only, everything else held at ``k = 0``.

    ``L_tilde`` and ``k0_tilde`` are indexed like ``sorted(support)``.
    Returns ``(trace, k_tilde)``; use :func:`embed` for the full vector.
    """
    support = tuple(sorted(int(f) for f in support))
    if not support or len(support) == complex.num_faces:
        raise InvalidTargetError("support must be a nonempty proper subset of the faces")
    L_full = embed(complex, support, L_tilde)
    tc = _require(complex, L_full, (STRATUM,), "flow_reduced")
    if tc.support != support:
        raise InvalidTargetError("L_tilde must be positive on the whole support", tc)
    k0_full = embed(complex, support, k0_tilde)
    trace, k = integrate_flow(complex, L_full, k0_full, support, (), opts)
    return trace, k[list(support)]


def flow_mixed(complex: CellComplex, L_hat, k0, opts=None):
    """Flow every face from a positive start: on-support faces track ``L_hat``,
    off-support faces follow ``dk_i/dt = -L_i k_i`` until pinned at ``k = 0``.
    """
    tc = _require(complex, L_hat, (STRATUM, INTERIOR), "flow_mixed")
    k0 = np.asarray(k0, dtype=float)
    if k0.shape != (complex.num_faces,) or np.any(k0 <= 0):
        raise ValueError("k0 must be a positive vector of length |F|")
    off = sorted(set(range(complex.num_faces)) - set(tc.support))
    return integrate_flow(complex, L_hat, k0, range(complex.num_faces), off, opts)


def embed(complex: CellComplex, support, values) -> np.ndarray:
    out = np.zeros(complex.num_faces)
    out[list(support)] = np.asarray(values, dtype=float)
    return out


def newton_solve(complex: CellComplex, L_hat, K0=None, opts=None) -> NewtonResult:
    """Damped Newton on ``L(K) = L_hat`` over the target's support.

    Interior targets are solved on all faces, stratum targets on the support
    with the rest pinned.  Steps longer than ``opts.newton_max_step`` (in
    the max norm) are shortened before the line search.  ``K0`` may be given on all faces or on the support
    only; it defaults to ``0`` (all radii ``pi/4``).
    """
    opts = opts or FlowOptions()
    L_hat = np.asarray(L_hat, dtype=float)
    tc = _require(complex, L_hat, (INTERIOR, STRATUM, ZERO), "newton_solve")
    n = complex.num_faces
    if tc.kind == ZERO:
        return NewtonResult(np.zeros(n), 0, 0.0, tc)
    idx = np.array(tc.support, dtype=np.intp)
    if K0 is None:
        K = np.zeros(idx.size)
    else:
        K0 = np.asarray(K0, dtype=float)
        K = K0[idx].copy() if K0.size == n else K0.copy()
        if K.shape != idx.shape or not np.all(np.isfinite(K)):
            raise ValueError("K0 must be finite, on all faces or on the support")
    k = np.zeros(n)

    def residual(Kv):
        k[idx] = np.exp(np.clip(Kv, -_K_CLIP, _K_CLIP))
        return curvature_from_k(complex, k)[idx] - L_hat[idx]

    res = residual(K)
    for it in range(opts.max_iter + 1):
        if np.max(np.abs(res)) <= opts.residual_tol:
            k[idx] = np.exp(K)
            return NewtonResult(k.copy(), it, float(np.max(np.abs(res))), tc)
        if it == opts.max_iter:
            break
        k[idx] = np.exp(np.clip(K, -_K_CLIP, _K_CLIP))
        M = jacobian_from_k(complex, k)
        try:
            step = -linalg.cho_solve(linalg.cho_factor(M), res)
        except linalg.LinAlgError as exc:
            raise SingularJacobianError(f"Jacobian not positive definite at iteration {it}") from exc
        # far from the solution L saturates and M is nearly singular; cap the step
        longest = np.abs(step).max()
        if longest > opts.newton_max_step:
            step *= opts.newton_max_step / longest
        norm0 = np.linalg.norm(res)
        lam = 1.0
        for _ in range(opts.max_halvings + 1):
            trial = K + lam * step
            res_trial = residual(trial)
            if np.linalg.norm(res_trial) < norm0:
                break
            lam *= 0.5
        else:
            raise ConvergenceError(
                f"line search stalled at residual {np.max(np.abs(res)):.3e}"
            )
        K, res = trial, res_trial
    raise ConvergenceError(f"Newton did not converge within {opts.max_iter} iterations")


def gradient_bound_check(trace: FlowTrace, K_star, K_0, grad_star=None, slack: float = 1e-9):
    """Check ``|grad h(K(t))|^2 <= |grad h(K*)|^2 + |K* - K(0)|^2 / t^2`` on each row.

    ``h`` is the flow's convex objective, so ``grad h = L - L_hat`` on the
    integrated faces.  ``grad_star`` defaults to zero, i.e. ``K_star`` is the
    solution.  Vectors may be full-length or indexed like ``trace.faces``.
    Returns ``(t, lhs, rhs, ok)`` per row with ``t > 0``.
    """
    faces = list(trace.faces)

    def restrict(v):
        v = np.asarray(v, dtype=float)
        return v[faces] if v.size != len(faces) else v

    gap = float(np.sum((restrict(K_star) - restrict(K_0)) ** 2))
    g2 = 0.0 if grad_star is None else float(np.sum(restrict(grad_star) ** 2))
    out = []
    for row in trace.rows:
        if row.t <= 0:
            continue
        lhs = row.grad_norm**2
        rhs = g2 + gap / row.t**2
        out.append((row.t, lhs, rhs, lhs <= rhs + slack))
    return out
