"""One quadratic improvement step for a near-rotation torus map.

A step solves the linearized conjugacy equation below a cutoff, pulls the map
back by the resulting corrector, and re-expresses the result relative to the
target rotation.  The translation part is left where the pullback puts it;
its distance from the target ("drift") is reported, not subtracted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cohomology import solve
from .diophantine import DiophantineVector
from .errors import InsufficientData, SmallnessViolated
from .rotation import convex_hull, hull_contains
from .spectral import (
    TorusMapLift,
    _eval_displaced,
    _round4,
    conjugate,
    cs_norm,
    deviation_norm,
    rebase,
    sampling_grid,
)

__all__ = [
    "StepConfig",
    "StepDiagnostics",
    "PosterioriReport",
    "step",
    "posteriori_check",
    "error_model_constants",
]


@dataclass(frozen=True)
class StepConfig:
    """Knobs for a single step.

    smallness_c scales the precondition C * gamma * N^(2*tau+d+2) * eps0 < 1;
    c_post scales the accepted drift against the post-step deviation;
    target_degree fixes the band of the pulled-back map (default: keep at
    least the cutoff and the incoming degree); s_report lists extra norm
    orders to record (integer orders sample derivatives, fractional ones use
    the weighted coefficient sum).
    """

    smallness_c: float = 1.0
    c_post: float = 2.0
    target_degree: int | None = None
    s_report: tuple = (0.0,)
    invert_tol: float = 1e-12
    drift_tol_abs: float = 0.0


@dataclass(frozen=True, eq=False)
class StepDiagnostics:
    cutoff: int
    smallness_margin: float
    eps0_before: float
    eps0_after: float
    eps0_after_drifted: float
    eps_s_before: tuple
    eps_s_after: tuple
    drift: np.ndarray
    drift_norm: float
    drift_bound: float
    corrector_norm0: float
    conj_residual: float
    posteriori_ok: bool
    hull_ok: bool


@dataclass(frozen=True, eq=False)
class PosterioriReport:
    drift: np.ndarray
    drift_norm: float
    eps0: float
    bound: float
    drift_ok: bool
    hull_ok: bool

    @property
    def ok(self) -> bool:
        return self.drift_ok and self.hull_ok


def _norm_method(s) -> str:
    return "grid" if float(s).is_integer() else "fourier"


def posteriori_check(
    f_next: TorusMapLift,
    vec: DiophantineVector,
    c_post: float = 2.0,
    tol_abs: float = 0.0,
) -> PosterioriReport:
    """Validate the translation drift of a stepped map.

    Two checks: the drift must not exceed c_post times the deviation from the
    drifted rotation, and the target defect f(x) - x - alpha must change sign
    (zero inside the hull of its sampled values).  The hull margin absorbs
    roundoff at the scale of the deviation itself.
    """
    f_next = rebase(f_next, vec.alpha)
    drift = f_next.rho - vec.alpha
    drift_norm = float(np.linalg.norm(drift))
    eps0 = deviation_norm(f_next, f_next.rho, 0)
    bound = c_post * eps0
    m = sampling_grid(f_next.degree)
    vals = f_next.displacement_values(m)
    pts = np.stack([drift[i] + vals[i].ravel() for i in range(f_next.dim)], axis=1)
    hull_tol = tol_abs + 1e-13 + 1e-9 * eps0
    return PosterioriReport(
        drift=drift,
        drift_norm=drift_norm,
        eps0=eps0,
        bound=bound,
        drift_ok=bool(drift_norm <= bound + tol_abs),
        hull_ok=hull_contains(convex_hull(pts), np.zeros(f_next.dim), hull_tol),
    )


def _conjugacy_residual(phi: TorusMapLift, f: TorusMapLift, f_next: TorusMapLift) -> float:
    """Sup of f_next(phi(x)) - phi(f(x)) on a shared grid; zero for an exact pushforward."""
    deg = max(f.degree, f_next.degree, phi.degree, 1)
    m = _round4(max(sampling_grid(deg), 2 * deg + 2))
    uf = f.displacement_values(m)
    uphi = phi.displacement_values(m)
    worst = 0.0
    for i in range(f.dim):
        lhs = (
            phi.rho[i]
            + uphi[i]
            + f_next.rho[i]
            + _eval_displaced(f_next.displacement[i], phi.rho, uphi, m)
        )
        rhs = (
            f.rho[i]
            + uf[i]
            + phi.rho[i]
            + _eval_displaced(phi.displacement[i], f.rho, uf, m)
        )
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def step(
    f: TorusMapLift,
    vec: DiophantineVector,
    cutoff: int,
    config: StepConfig = StepConfig(),
) -> tuple:
    """Run one improvement step; returns (next map, corrector map, diagnostics).

    Raises SmallnessViolated when the precondition fails; the caller decides
    whether to retry at a lower cutoff.
    """
    f = rebase(f, vec.alpha)
    d = f.dim
    eps0_before = deviation_norm(f, vec.alpha, 0)
    margin = vec.gamma * float(cutoff) ** (2.0 * vec.tau + d + 2.0) * eps0_before
    if config.smallness_c * margin >= 1.0:
        raise SmallnessViolated(
            f"C * gamma * N^(2tau+d+2) * eps0 = {config.smallness_c * margin:.3e} >= 1 "
            f"at cutoff {cutoff}"
        )
    eps_s_before = tuple(
        (float(s), deviation_norm(f, vec.alpha, s, _norm_method(s))) for s in config.s_report
    )

    correctors = tuple(solve(u, vec, cutoff).corrector for u in f.displacement)
    phi = TorusMapLift(np.zeros(d), correctors)
    corrector_norm0 = max(cs_norm(c, 0, "grid") for c in correctors)

    target = config.target_degree
    if target is None:
        target = max(int(cutoff), f.degree)
    f_next = rebase(conjugate(phi, f, target, config.invert_tol), vec.alpha)

    post = posteriori_check(f_next, vec, config.c_post, config.drift_tol_abs)
    eps0_after = deviation_norm(f_next, vec.alpha, 0)
    eps_s_after = tuple(
        (float(s), deviation_norm(f_next, f_next.rho, s, _norm_method(s)))
        for s in config.s_report
    )
    diags = StepDiagnostics(
        cutoff=int(cutoff),
        smallness_margin=margin,
        eps0_before=eps0_before,
        eps0_after=eps0_after,
        eps0_after_drifted=post.eps0,
        eps_s_before=eps_s_before,
        eps_s_after=eps_s_after,
        drift=post.drift,
        drift_norm=post.drift_norm,
        drift_bound=post.bound,
        corrector_norm0=corrector_norm0,
        conj_residual=_conjugacy_residual(phi, f, f_next),
        posteriori_ok=post.drift_ok,
        hull_ok=post.hull_ok,
    )
    return f_next, phi, diags


def error_model_constants(history, tau: float, d: int, s_prime: float | None = None) -> dict:
    """Fit the step error model constant from recorded diagnostics.

    For each reported order s, returns the smallest C explaining every step:

        eps_s' <= C * (N^(s+2tau+d+2) eps0^2 + N^(tau+d/2) eps0 eps_s
                       + N^(s-s'+d) (1 + N^(s+tau+d/2) eps0) eps_s')

    with s' the highest reported order unless given.  Needs at least three
    steps to be meaningful.
    """
    history = list(history)
    if len(history) < 3:
        raise InsufficientData("need at least three recorded steps to fit the model")
    orders = [s for s, _ in history[0].eps_s_before]
    sp = max(orders) if s_prime is None else float(s_prime)
    out = {}
    for s in orders:
        worst = 0.0
        for diag in history:
            n = float(diag.cutoff)
            eps0 = diag.eps0_before
            eps_s = dict(diag.eps_s_before)[s]
            eps_sp = dict(diag.eps_s_before)[sp]
            after = dict(diag.eps_s_after)[s]
            bracket = (
                n ** (s + 2.0 * tau + d + 2.0) * eps0 ** 2
                + n ** (tau + d / 2.0) * eps0 * eps_s
                + n ** (s - sp + d) * (1.0 + n ** (s + tau + d / 2.0) * eps0) * eps_sp
            )
            if bracket > 0.0:
                worst = max(worst, after / bracket)
        out[s] = worst
    return out
