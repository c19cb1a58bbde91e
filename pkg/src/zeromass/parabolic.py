"""Radial time integration of u_t = Laplace u + lam|u|^{p-2}u - |u|^{q-2}u.

One semi-implicit step solves a single tridiagonal system: the diffusion is
backward Euler, the focusing source is explicit, and the absorption enters
through a frozen nonnegative coefficient |u^k|^{q-2} multiplying u^{k+1}.
That last choice keeps the scheme one linear solve per step while making the
update an M-matrix inverse times nonnegative data, so nonnegative states
stay nonnegative even across the non-Lipschitz kink at u = 0 (plain explicit
treatment of a sublinear absorption overshoots into negative values).
Stationary states of the discrete operator are exact fixed points.

The energy identity (cumulative dissipation plus current energy equals
initial energy) is tracked along the flow and drives the step-size control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import StepSizeTooLarge, WindowTooShort
from .mesh import RadialMesh
from .nehari import GroundState
from .shooting import RadialProfile

ENERGY_RISE_ABS = 1e-10
CONVERGED_RATE = 1e-10
MAX_HALVINGS = 10


@dataclass
class Trajectory:
    mesh: RadialMesh
    times: list[float]
    states: list[np.ndarray]
    energies: list[float]
    dissipation: list[float]
    status: str = "running"
    status_info: dict = field(default_factory=dict)
    dt: float = 0.0
    domain: str = "ball"

    @property
    def snapshots(self) -> list[RadialProfile]:
        return [self.profile_at(i) for i in range(len(self.states))]

    def profile_at(self, i: int) -> RadialProfile:
        r, u = self.mesh.with_boundary(self.states[i])
        return RadialProfile(
            dim=self.mesh.dim,
            r=r,
            u=u,
            du=self.mesh.gradient_nodes(self.states[i]),
            domain=self.domain,
        )

    def identity_residuals(self) -> np.ndarray:
        e0 = self.energies[0]
        return np.abs(np.asarray(self.dissipation) + np.asarray(self.energies) - e0)


@dataclass
class PerturbationSpec:
    """Direction, size, and sign of an initial perturbation of a base state."""

    base: RadialProfile
    direction: str  # "eigenfunction" | "bump" | "dilation"
    amplitude: float
    sign: int = 1
    center: float | None = None
    width: float | None = None
    eigenfunction: RadialProfile | None = None

    def __post_init__(self):
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        if self.direction == "bump" and (self.center is None or self.width is None):
            raise ValueError("bump direction needs center and width")


def _reaction_split(u, lam, p, q):
    """Explicit source lam|u|^{p-2}u and implicit absorption coefficient |u|^{q-2}."""
    au = np.abs(u)
    source = lam * np.sign(u) * au ** (p - 1.0)
    with np.errstate(divide="ignore"):
        absorb = np.where(au > 0.0, au ** (q - 2.0), 0.0)
    absorb = np.minimum(absorb, 1e30)
    return source, absorb


def _discrete_energy(mesh, u, lam, p, q):
    f = mesh.functionals(u, p, q)
    return 0.5 * f.dirichlet - lam * f.power_p / p + f.power_q / q


def mesh_for_profile(profile: RadialProfile, nodes: int | None = None) -> RadialMesh:
    """Evolution mesh on the profile's extent (optionally resampled)."""
    if profile.r[0] != 0.0:
        raise ValueError("parabolic grids start at the center")
    n = nodes if nodes is not None else len(profile.r) - 1
    return RadialMesh(dim=profile.dim, r_max=profile.r_max, n=n)


def evolve(
    initial: RadialProfile,
    lam: float,
    p: float,
    q: float,
    dt: float,
    t_end: float,
    record_every: int = 10,
    depart_test=None,
    blowup_factor: float = 1e6,
    nodes: int | None = None,
) -> Trajectory:
    """Semi-implicit flow from the initial profile until the horizon.

    Stops early on convergence (velocity below 1e-10), blow-up (sup norm
    beyond blowup_factor times the larger of the initial sup and one), or a
    caller-supplied departure test on the state vector.  A step that raises
    the energy beyond tolerance is retried with half the step, ten times at
    most.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    mesh = mesh_for_profile(initial, nodes)
    u = mesh.sample(initial.r, initial.u)
    blow_level = blowup_factor * max(1.0, float(np.max(np.abs(u))))

    energy = _discrete_energy(mesh, u, lam, p, q)
    traj = Trajectory(
        mesh=mesh,
        times=[0.0],
        states=[u.copy()],
        energies=[energy],
        dissipation=[0.0],
        dt=dt,
        domain=initial.domain,
    )
    t = 0.0
    dissipated = 0.0
    halvings = 0
    step_index = 0
    while t < t_end - 1e-14 * max(t_end, 1.0):
        dt_step = min(dt, t_end - t)
        source, absorb = _reaction_split(u, lam, p, q)
        rhs = mesh.mass * (u + dt_step * source) / dt_step
        u_new = mesh.solve_shifted((1.0 + dt_step * absorb) / dt_step, rhs)

        if not np.all(np.isfinite(u_new)) or np.max(np.abs(u_new)) > blow_level:
            traj.status = "blowup"
            traj.status_info = {"threshold": blow_level, "time": t + dt_step}
            traj.times.append(t + dt_step)
            traj.states.append(u_new)
            traj.energies.append(float("nan"))
            traj.dissipation.append(dissipated)
            return traj

        energy_new = _discrete_energy(mesh, u_new, lam, p, q)
        if energy_new > energy + ENERGY_RISE_ABS:
            halvings += 1
            if halvings > MAX_HALVINGS:
                raise StepSizeTooLarge(
                    f"energy keeps rising after {MAX_HALVINGS} step halvings "
                    f"(dt={dt:.3e}, rise={energy_new - energy:.3e})"
                )
            dt = 0.5 * dt
            traj.dt = dt
            continue

        velocity = (u_new - u) / dt_step
        dissipated += dt_step * float(np.sum(mesh.mass * velocity * velocity))
        t += dt_step
        u, energy = u_new, energy_new
        step_index += 1

        record = (step_index % record_every == 0) or t >= t_end - 1e-14
        vnorm = math.sqrt(float(np.sum(mesh.mass * velocity * velocity)))
        departed = depart_test is not None and depart_test(u)
        converged = vnorm < CONVERGED_RATE
        if record or departed or converged:
            traj.times.append(t)
            traj.states.append(u.copy())
            traj.energies.append(energy)
            traj.dissipation.append(dissipated)
        if departed:
            traj.status = "departed"
            traj.status_info = {"time": t}
            return traj
        if converged:
            traj.status = "converged"
            traj.status_info = {"time": t, "velocity": vnorm}
            return traj
    traj.status = "horizon"
    traj.status_info = {"time": t}
    return traj


# ---------------------------------------------------------------------------
# discrete stationary refinement


def refine_stationary(
    mesh: RadialMesh, u0: np.ndarray, lam: float, p: float, q: float,
    tol: float = 1e-12, max_iter: int = 60,
) -> np.ndarray:
    """Newton-polish a state into a fixed point of the discrete flow.

    Solves K u = mass * f(u) so that the evolution sees an equilibrium to
    rounding, which matters for instability runs where any residual is
    amplified exponentially.  States with sublinear exponents and genuine
    zeros are returned unchanged (the Jacobian is unbounded there).
    """
    from scipy.linalg import solve_banded

    u = u0.copy()
    if (p < 2.0 or q < 2.0) and np.any(np.abs(u) <= 1e-13 * max(1.0, np.max(np.abs(u)))):
        return u

    def residual(v):
        au = np.abs(v)
        f = lam * np.sign(v) * au ** (p - 1.0) - np.sign(v) * au ** (q - 1.0)
        return mesh.apply_stiffness(v) - mesh.mass * f

    scale = float(np.max(np.abs(residual(np.zeros_like(u)))) + np.max(mesh.mass))
    res = residual(u)
    best = float(np.max(np.abs(res)))
    for _ in range(max_iter):
        if best <= tol * scale:
            break
        au = np.abs(u)
        w = lam * (p - 1.0) * au ** (p - 2.0) - (q - 1.0) * au ** (q - 2.0)
        ab = np.zeros((3, mesh.n))
        ab[0, 1:] = mesh.k_off
        ab[1] = mesh.k_diag - mesh.mass * w
        ab[2, :-1] = mesh.k_off
        try:
            delta = solve_banded((1, 1), ab, res)
        except Exception:
            break
        damp = 1.0
        improved = False
        for _ in range(30):
            trial = u - damp * delta
            r_trial = residual(trial)
            norm = float(np.max(np.abs(r_trial)))
            if norm < best:
                u, res, best = trial, r_trial, norm
                improved = True
                break
            damp *= 0.5
        if not improved:
            break
    return u


# ---------------------------------------------------------------------------
# stability experiments


@dataclass
class StabilityVerdict:
    outcome: str  # "Stable" | "Departed" | "BlowUp"
    max_distance: float
    epsilon: float
    amplitude: float
    horizon: float
    trajectory: Trajectory
    evidence: str = "sampled finite perturbation set; verdict is evidence, not proof"

    def as_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "max_distance": self.max_distance,
            "epsilon": self.epsilon,
            "amplitude": self.amplitude,
            "horizon": self.horizon,
            "evidence": self.evidence,
        }


def _direction_vector(mesh: RadialMesh, base: np.ndarray, spec: PerturbationSpec,
                      lam: float, p: float, q: float) -> np.ndarray:
    if spec.direction == "eigenfunction":
        if spec.eigenfunction is not None:
            w = mesh.sample(spec.eigenfunction.r, spec.eigenfunction.u)
        else:
            from .spectral import _potential_values

            pot = _potential_values(base, lam, p, q)
            _, w = mesh.min_eigenpair(pot)
    elif spec.direction == "bump":
        x = (mesh.r - spec.center) / spec.width
        w = np.where(np.abs(x) < 1.0, np.cos(0.5 * math.pi * np.clip(x, -1, 1)) ** 2, 0.0)
    elif spec.direction == "dilation":
        h = 1e-3
        r_full, u_full = mesh.with_boundary(base)
        stretched = np.interp(mesh.r / (1.0 + h), r_full, u_full)
        w = (stretched - base) / h
    else:
        raise ValueError(f"unknown perturbation direction {spec.direction!r}")
    norm = math.sqrt(mesh.dirichlet_energy(w))
    if norm <= 0:
        raise ValueError("perturbation direction has no Dirichlet energy")
    return w / norm


def dirichlet_distance(mesh: RadialMesh, u: np.ndarray, v: np.ndarray) -> float:
    """Distance in the homogeneous Sobolev seminorm.

    For entire-space states the stability notion quotients by translations
    through a center-of-mass recentring; radial evolution keeps the center
    of mass pinned at the origin, so the recentring shift vanishes
    identically and the plain seminorm is the quotient distance.
    """
    return math.sqrt(mesh.dirichlet_energy(u - v))


def stability_experiment(
    state: GroundState,
    spec: PerturbationSpec,
    epsilon: float,
    horizon: float,
    dt: float = 1e-2,
    record_every: int = 10,
    nodes: int = 1024,
    refine: bool = True,
) -> StabilityVerdict:
    """Evolve a perturbed ground state and report a sampled-evidence verdict.

    Stable means the Dirichlet-seminorm distance to the base state stays
    below epsilon up to the horizon; departure and blow-up are reported as
    such.  The base state is Newton-refined into a discrete equilibrium
    before perturbing unless refine=False.
    """
    profile = state.report.profile
    lam, p, q = state.report.lam, state.report.p, state.report.q
    mesh = mesh_for_profile(profile, nodes)
    base = mesh.sample(profile.r, profile.u)
    if refine:
        base = refine_stationary(mesh, base, lam, p, q)

    w = _direction_vector(mesh, base, spec, lam, p, q)
    v0 = base + spec.sign * spec.amplitude * w
    initial = RadialProfile(
        dim=mesh.dim,
        r=mesh.r_full,
        u=np.append(v0, 0.0),
        du=mesh.gradient_nodes(v0),
        domain=profile.domain,
    )

    def departed(u):
        return dirichlet_distance(mesh, u, base) >= epsilon

    traj = evolve(
        initial, lam, p, q, dt, horizon,
        record_every=record_every, depart_test=departed, nodes=mesh.n,
    )
    distances = [dirichlet_distance(mesh, s, base) for s in traj.states]
    max_distance = float(np.nanmax(distances))
    if traj.status == "blowup":
        outcome = "BlowUp"
    elif traj.status == "departed" or max_distance >= epsilon:
        outcome = "Departed"
    else:
        outcome = "Stable"
    return StabilityVerdict(
        outcome=outcome,
        max_distance=max_distance,
        epsilon=epsilon,
        amplitude=spec.amplitude,
        horizon=horizon,
        trajectory=traj,
    )


def growth_rate_fit(
    trajectory: Trajectory,
    reference: RadialProfile | np.ndarray,
    window_fraction: float = 0.05,
) -> float:
    """Least-squares slope of log L2-distance to the reference state.

    Restricted to the linear regime: recorded samples whose Dirichlet
    distance stays below window_fraction of the reference norm (or of the
    initial state for a zero reference).  Raises WindowTooShort without at
    least five usable samples.
    """
    mesh = trajectory.mesh
    if isinstance(reference, RadialProfile):
        ref = mesh.sample(reference.r, reference.u)
    else:
        ref = np.asarray(reference, dtype=float)
    ref_norm = math.sqrt(mesh.dirichlet_energy(ref))
    if ref_norm <= 0:
        ref_norm = math.sqrt(mesh.dirichlet_energy(trajectory.states[0]))
    gate = window_fraction * ref_norm

    times, logs = [], []
    for t, u in zip(trajectory.times, trajectory.states):
        if not np.all(np.isfinite(u)):
            continue
        d_gate = dirichlet_distance(mesh, u, ref)
        d_l2 = math.sqrt(mesh.l2_sq(u - ref))
        if d_gate < gate and d_l2 > 1e-14:
            times.append(t)
            logs.append(math.log(d_l2))
    if len(times) < 5 or times[-1] - times[0] <= 0:
        raise WindowTooShort(
            f"only {len(times)} usable samples inside the linear window"
        )
    slope = np.polyfit(np.asarray(times), np.asarray(logs), 1)[0]
    return float(slope)
