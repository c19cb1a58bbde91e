"""Constrained variational layer on a ball: ground states and thresholds.

The constraint set consists of shapes whose fiber slope vanishes, so the
minimization runs over shapes with an inner one-dimensional projection: at
each iterate the shape is rescaled onto the requested stationary branch and
a preconditioned gradient step is taken from the projected point.  The
envelope theorem makes the projected gradient the plain energy gradient, and
taking absolute values after each step enforces nonnegativity for free since
the energy only sees |u|.

The same engine with the objective swapped to the ray Rayleigh quotient
minimizes the nonlinear generalized Rayleigh quotient, whose infimum is the
fold threshold for solvability; the zero-energy threshold is a fixed
multiple of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BranchAbsent, FoldEmpty, NonConvergence, Stagnation
from .exponents import sobolev_critical
from .fibering import (
    Functionals,
    PointKind,
    diagnostics as fiber_diagnostics,
    energy_rayleigh_ratio,
    fiber_energy,
    project_to_branch,
    rayleigh_lambda,
)
from .mesh import RadialMesh, sphere_area
from .shooting import RadialProfile, SolveReport, _ball_candidates

MULTIPLIER_REL = 1e-6
STOP_REL = 1e-10
STOP_PATIENCE = 50
MAX_ITER = 20000


class Branch(str, Enum):
    MIN = "MinBranch"
    MAX = "MaxBranch"


_KIND = {Branch.MIN: PointKind.MIN, Branch.MAX: PointKind.MAX}


@dataclass
class GroundState:
    report: SolveReport
    energy: float
    is_negative_energy: bool
    branch: Branch

    def as_dict(self) -> dict:
        d = self.report.as_dict()
        d.update(
            energy=self.energy,
            is_negative_energy=self.is_negative_energy,
            branch=self.branch.value,
        )
        return d


@dataclass
class ThresholdEstimate:
    lambda_star: float
    lambda_E_star: float
    minimizer_functionals: Functionals
    iterations: int
    certificate_passed: bool | None = None

    def as_dict(self) -> dict:
        f = self.minimizer_functionals
        return {
            "lambda_star": self.lambda_star,
            "lambda_E_star": self.lambda_E_star,
            "minimizer_functionals": {
                "T": f.dirichlet,
                "A": f.power_p,
                "B": f.power_q,
            },
            "iterations": self.iterations,
            "certificate_passed": self.certificate_passed,
        }


def project_to_nehari(
    f: Functionals, lam: float, p: float, q: float, branch: Branch
) -> float:
    """Scaling r putting r*u on the constraint set, on the requested branch."""
    return project_to_branch(f, lam, p, q, _KIND[branch])


def default_branch(p: float, q: float, dim: int) -> Branch:
    """Ground-state branch for the solvable exponent regimes on a ball."""
    two_star = sobolev_critical(dim)
    if 1.0 < p < min(2.0, q):
        return Branch.MIN
    if q > 1.0 and max(2.0, q) < p < two_star:
        return Branch.MAX
    if (1.0 < q < p < 2.0) or (2.0 < p < q < two_star):
        return Branch.MIN
    raise ValueError(f"no ground-state regime covers p={p}, q={q}, dim={dim}")


# ---------------------------------------------------------------------------
# shared descent engine


def _descent(mesh, u0, objective, direction, max_iter=MAX_ITER, strict=True):
    """Armijo-safeguarded preconditioned descent with BB step seeding.

    objective(u) may return +inf outside the feasible cone.  Stops when the
    relative objective change stays below STOP_REL for STOP_PATIENCE
    consecutive iterations.  With strict=False the iteration cap returns the
    best iterate instead of raising.
    """
    u = u0.copy()
    j = objective(u)
    if not math.isfinite(j):
        raise FoldEmpty("initial shape is infeasible for this objective")
    step = 1.0
    calm = 0
    prev_u = None
    prev_g = None
    for it in range(max_iter):
        g = direction(u)
        gnorm2 = float(np.sum(mesh.mass * g * g))
        if gnorm2 <= 0.0 or not math.isfinite(gnorm2):
            break
        if prev_g is not None:
            du = u - prev_u
            dg = g - prev_g
            denom = float(np.sum(mesh.mass * dg * dg))
            if denom > 0:
                bb = float(np.sum(mesh.mass * du * dg)) / denom
                if math.isfinite(bb) and bb > 0:
                    step = min(max(bb, 1e-12), 1e3)
        prev_u, prev_g = u.copy(), g
        accepted = False
        s = step
        for _ in range(50):
            trial = np.abs(u - s * g)
            j_trial = objective(trial)
            if math.isfinite(j_trial) and j_trial <= j - 1e-4 * s * gnorm2:
                accepted = True
                break
            s *= 0.5
        if not accepted:
            # flat to rounding: treat as converged progress
            calm += 1
            if calm >= STOP_PATIENCE:
                return u, j, it + 1
            continue
        rel = abs(j - j_trial) / max(abs(j_trial), 1e-300)
        u, j = trial, j_trial
        calm = calm + 1 if rel < STOP_REL else 0
        if calm >= STOP_PATIENCE:
            return u, j, it + 1
    if calm >= STOP_PATIENCE or not strict:
        return u, j, max_iter
    raise Stagnation(f"descent did not settle within {max_iter} iterations")


def _initial_bump(mesh):
    return 1.0 - (mesh.r / mesh.r_max) ** 2


def _energy_gradient(mesh, v, lam, p, q):
    grad = (
        mesh.apply_stiffness(v)
        - lam * mesh.mass * np.sign(v) * np.abs(v) ** (p - 1.0)
        + mesh.mass * np.sign(v) * np.abs(v) ** (q - 1.0)
    )
    return grad / mesh.mass


def _discrete_energy(mesh, v, lam, p, q):
    f = mesh.functionals(v, p, q)
    return 0.5 * f.dirichlet - lam * f.power_p / p + f.power_q / q


# ---------------------------------------------------------------------------
# ground states


def _fd_solve_report(mesh, u, lam, p, q, radius):
    funcs = mesh.functionals(u, p, q)
    diag = fiber_diagnostics(funcs, lam, p, q, mesh.dim)
    r_full, u_full = mesh.with_boundary(u)
    du_full = mesh.gradient_nodes(u)
    profile = RadialProfile(dim=mesh.dim, r=r_full, u=u_full, du=du_full, domain="ball")
    omega = sphere_area(mesh.dim)
    boundary = omega * radius ** mesh.dim * du_full[-1] ** 2 / (2.0 * mesh.dim)
    report = SolveReport(
        profile=profile,
        functionals=funcs,
        diagnostics=diag,
        pohozaev_residual=diag.pohozaev + boundary,
        shooting_parameter=float(u_full[0]),
        converged=True,
        p=p,
        q=q,
        lam=lam,
    )
    return report


def minimize_ground_state(
    p: float,
    q: float,
    dim: int,
    radius: float,
    lam: float,
    nodes: int = 1024,
    branch: Branch | None = None,
    cross_validate: bool = True,
) -> GroundState:
    """Constrained energy minimizer on the ball, on the regime's branch.

    Projected-gradient descent on the reduced objective u -> E(r(u) u) with
    nonnegativity enforced through |u|; validated against the shooting
    solver when requested (relative sup-norm agreement at 1e-3).
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    branch = branch or default_branch(p, q, dim)
    kind = _KIND[branch]
    mesh = RadialMesh(dim=dim, r_max=radius, n=nodes)

    def objective(u):
        f = mesh.functionals(u, p, q)
        try:
            f.require_positive()
            r = project_to_branch(f, lam, p, q, kind)
        except (BranchAbsent, ValueError):
            return math.inf
        return fiber_energy(r, f, lam, p, q)

    def direction(u):
        f = mesh.functionals(u, p, q)
        r = project_to_branch(f, lam, p, q, kind)
        v = r * u
        return _energy_gradient(mesh, v, lam, p, q)

    u0 = _initial_bump(mesh)
    if not math.isfinite(objective(u0)):
        u0 = _feasible_seed(mesh, p, q, lam, kind)

    u, energy, iters = _descent(mesh, u0, objective, direction)
    f = mesh.functionals(u, p, q)
    r = project_to_branch(f, lam, p, q, kind)
    u = r * u
    funcs = mesh.functionals(u, p, q)
    diag = fiber_diagnostics(funcs, lam, p, q, dim)
    scale = funcs.dirichlet + lam * funcs.power_p + funcs.power_q
    if abs(diag.curvature) <= MULTIPLIER_REL * scale:
        raise NonConvergence(
            "degenerate second fiber derivative: the multiplier rule does not apply"
        )

    report = _fd_solve_report(mesh, u, lam, p, q, radius)
    problems = []
    if abs(diag.slope) > 1e-8 * scale:
        problems.append(f"projection residual {diag.slope:.2e}")
    # star-shaped Pohozaev sign (second-order boundary slope, so a loose gate)
    if diag.pohozaev > 1e-4 * funcs.dirichlet:
        problems.append(f"positive Pohozaev value {diag.pohozaev:.2e} on a ball")
    if cross_validate:
        mismatch = _shooting_mismatch(report, p, q, lam, dim, radius, diag.curvature)
        if mismatch is None:
            problems.append("no matching shooting branch for cross-validation")
        elif mismatch > 1e-3:
            problems.append(f"shooting mismatch {mismatch:.2e} exceeds 1e-3")
    report.converged = not problems
    report.failure = "; ".join(problems) if problems else None
    return GroundState(
        report=report,
        energy=energy,
        is_negative_energy=energy < 0,
        branch=branch,
    )


def _shooting_mismatch(report, p, q, lam, dim, radius, curvature):
    try:
        candidates = _ball_candidates(p, q, lam, dim, radius)
    except Exception:
        return None
    best = None
    for cand in candidates:
        if cand.diagnostics.curvature * curvature <= 0:
            continue
        u_ref = np.interp(report.profile.r, cand.profile.r, cand.profile.u)
        err = float(np.max(np.abs(report.profile.u - u_ref)) / np.max(np.abs(u_ref)))
        best = err if best is None else min(best, err)
    return best


def _feasible_seed(mesh, p, q, lam, kind):
    """Rayleigh-quotient descent until the requested branch opens up."""
    u, _, _ = _rayleigh_minimize(mesh, p, q, max_iter=4000, strict=False)
    f = mesh.functionals(u, p, q)
    try:
        project_to_branch(f, lam, p, q, kind)
    except BranchAbsent:
        raise FoldEmpty(
            f"constraint set looks empty at lambda={lam}: even the quotient "
            f"minimizer sits above it"
        )
    return u


# ---------------------------------------------------------------------------
# thresholds


def _rayleigh_minimize(mesh, p, q, max_iter=MAX_ITER, strict=True):
    a_exp = (q - p) / (q - 2.0)
    b_exp = (p - 2.0) / (q - 2.0)

    def objective(u):
        f = mesh.functionals(u, p, q)
        if min(f.dirichlet, f.power_p, f.power_q) <= 0:
            return math.inf
        return rayleigh_lambda(f, p, q)

    def direction(u):
        f = mesh.functionals(u, p, q)
        j = rayleigh_lambda(f, p, q)
        grad = j * (
            a_exp * 2.0 * mesh.apply_stiffness(u) / f.dirichlet
            + b_exp * q * mesh.mass * np.sign(u) * np.abs(u) ** (q - 1.0) / f.power_q
            - p * mesh.mass * np.sign(u) * np.abs(u) ** (p - 1.0) / f.power_p
        )
        return grad / mesh.mass

    u0 = _initial_bump(mesh)
    u, j, iters = _descent(mesh, u0, objective, direction, max_iter=max_iter, strict=strict)
    u = u / math.sqrt(mesh.l2_sq(u))
    return u, j, iters


def estimate_lambda_star(
    p: float,
    q: float,
    dim: int,
    radius: float,
    nodes: int = 1024,
    certificate: bool = True,
    probes: int = 20,
    seed: int = 0,
) -> ThresholdEstimate:
    """Numerical fold and zero-energy thresholds on the ball.

    Minimizes the ray Rayleigh quotient over discretized radial shapes; the
    zero-energy threshold is the exact multiple c'(p,q) of the fold one.
    The falsification certificate checks that a ground state exists 5% above
    the estimate while every probe shape loses its branch 5% below it; the
    probe set (random nonnegative tents plus the minimizer's fiber) is a
    finite surrogate for the function-space quantifier.
    """
    two_star = sobolev_critical(dim)
    if not ((1.0 < q < p < 2.0) or (2.0 < p < q < two_star)):
        raise ValueError(
            f"thresholds live on the fold strips 1<q<p<2 and 2<p<q<2*, got p={p}, q={q}"
        )
    mesh = RadialMesh(dim=dim, r_max=radius, n=nodes)
    u_min, lam_star, iters = _rayleigh_minimize(mesh, p, q)
    lam_e_star = energy_rayleigh_ratio(p, q) * lam_star
    minimizer_functionals = mesh.functionals(u_min, p, q)

    passed = None
    if certificate:
        passed = _threshold_certificate(
            mesh, u_min, lam_star, p, q, dim, radius, probes, seed
        )
    return ThresholdEstimate(
        lambda_star=lam_star,
        lambda_E_star=lam_e_star,
        minimizer_functionals=minimizer_functionals,
        iterations=iters,
        certificate_passed=passed,
    )


def _threshold_certificate(mesh, u_min, lam_star, p, q, dim, radius, probes, seed):
    # above the fold a ground state must come out
    try:
        state = minimize_ground_state(
            p, q, dim, radius, 1.05 * lam_star,
            nodes=mesh.n, branch=Branch.MIN, cross_validate=False,
        )
    except (FoldEmpty, NonConvergence, Stagnation):
        return False
    if state.report.diagnostics.curvature <= 0:
        return False

    # below the fold every probe must lose its branch
    lam_below = 0.95 * lam_star
    rng = np.random.default_rng(seed)
    shapes = [u_min, 0.5 * u_min, 2.0 * u_min]
    while len(shapes) < probes:
        center = rng.uniform(0.1, 0.8) * radius
        width = rng.uniform(0.05, 0.4) * radius
        height = rng.uniform(0.5, 2.0)
        tent = np.clip(1.0 - np.abs(mesh.r - center) / width, 0.0, None) * height
        if mesh.power_mass(tent, 2.0) > 0:
            shapes.append(tent)
    for shape in shapes:
        f = mesh.functionals(shape, p, q)
        try:
            f.require_positive()
        except ValueError:
            continue
        try:
            project_to_branch(f, lam_below, p, q, PointKind.MIN)
            return False
        except BranchAbsent:
            pass
    return True


def ground_state_from_report(report: SolveReport) -> GroundState:
    """Wrap a converged solve as a ground-state record, branch from curvature."""
    d2 = report.diagnostics.curvature
    energy = report.diagnostics.energy
    return GroundState(
        report=report,
        energy=energy,
        is_negative_energy=energy < 0,
        branch=Branch.MIN if d2 > 0 else Branch.MAX,
    )
