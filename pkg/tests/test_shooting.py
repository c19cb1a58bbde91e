import math

import numpy as np
import pytest

from zeromass.errors import NoSolutionBracket, TailNotResolved
from zeromass.fibering import Functionals
from zeromass.shooting import (
    RadialProfile,
    _ball_candidates,
    functionals,
    pohozaev_identity_residual,
    read_profile,
    rescale_lambda,
    scale_to_unit_lambda,
    shoot_ball,
    shoot_entire,
    shoot_exterior,
    write_profile,
)


@pytest.fixture(scope="module")
def entire_431():
    return shoot_entire(4, 3, 1)


@pytest.fixture(scope="module")
def entire_433():
    return shoot_entire(4, 3, 3)


@pytest.fixture(scope="module")
def entire_compact():
    return shoot_entire(1.5, 1.2, 10)


@pytest.fixture(scope="module")
def ball_433():
    return shoot_ball(4, 3, 1.0, 3, 1.0)


def residual_scale(report):
    f = report.functionals
    return f.dirichlet + report.lam * f.power_p + f.power_q


def test_entire_1d_amplitude_oracle(entire_431):
    # first integral: (1/2) u'^2 + lam u^p/p - u^q/q = 0 on the connecting
    # orbit, so u(0) solves lam u^p/p = u^q/q
    assert entire_431.converged
    assert entire_431.shooting_parameter == pytest.approx(4.0 / 3.0, abs=1e-6)


def test_entire_1d_first_integral(entire_431):
    prof = entire_431.profile
    F = np.abs(prof.u) ** 4 / 4.0 - np.abs(prof.u) ** 3 / 3.0
    residual = 0.5 * prof.du ** 2 + F
    assert np.max(np.abs(residual)) <= 1e-8


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_entire_exact_rational_family(dim):
    # for (p,q) = (4,3) the equation has the closed-form radial solution
    # u(r) = A / (1 + b r^2), A = 4/(4-N), b = 2/(4-N)^2 (checked by direct
    # substitution), giving an exact oracle for the shooting solver
    rep = shoot_entire(4, 3, dim)
    A = 4.0 / (4.0 - dim)
    b = 2.0 / (4.0 - dim) ** 2
    assert rep.converged
    assert rep.shooting_parameter == pytest.approx(A, rel=1e-8)
    prof = rep.profile
    exact = A / (1.0 + b * prof.r ** 2)
    # absolute agreement in the core; the far tail picks up the slow-mode
    # contamination of the finite-precision center value (grows like r)
    core = prof.r <= 50.0
    assert np.max(np.abs(prof.u - exact)[core]) <= 1e-7 * A
    mid = prof.r <= 0.5 * prof.r_max
    assert np.max((np.abs(prof.u - exact) / exact)[mid]) <= 5e-2


def test_entire_pohozaev_identity(entire_433):
    f = entire_433.functionals
    assert entire_433.converged
    assert abs(entire_433.pohozaev_residual) <= 1e-6 * f.dirichlet
    # entire-domain residual is the Pohozaev value itself
    assert entire_433.pohozaev_residual == entire_433.diagnostics.pohozaev


def test_entire_sign_dichotomy_spot_checks(entire_433, entire_compact):
    assert entire_433.diagnostics.curvature < 0  # d*(4,3,3) = -18
    assert entire_compact.diagnostics.curvature > 0  # d*(1.5,1.2,10) = 0.4
    assert entire_433.diagnostics.energy > 0
    assert entire_compact.diagnostics.energy > 0


def test_entire_nehari_membership(entire_433, entire_431, entire_compact):
    for rep in (entire_433, entire_431, entire_compact):
        assert abs(rep.diagnostics.slope) <= 1e-6 * residual_scale(rep)


def test_compact_support_structure(entire_compact):
    prof = entire_compact.profile
    assert prof.support_radius is not None
    assert prof.support_radius < prof.r_max
    u0 = entire_compact.shooting_parameter
    beyond = prof.r > prof.support_radius
    assert np.max(np.abs(prof.u[beyond]), initial=0.0) <= 1e-8 * u0
    # zero normal derivative at the support boundary
    at_support = np.argmin(np.abs(prof.r - prof.support_radius))
    assert abs(prof.du[at_support]) <= 1e-6 * u0


def test_entire_profile_starts_at_center(entire_433):
    prof = entire_433.profile
    assert prof.r[0] == 0.0
    assert prof.du[0] == 0.0


def test_entire_nonexistence_region_yields_no_validated_solution():
    # necessary conditions fail at (4,5,3); the solver must not certify
    try:
        rep = shoot_entire(4, 5, 3, allow_inadmissible=True)
    except (NoSolutionBracket, TailNotResolved):
        return
    assert not rep.converged


def test_entire_rejects_inadmissible_without_override():
    with pytest.raises(ValueError):
        shoot_entire(4, 5, 3)


def test_ball_max_branch(ball_433):
    rep = ball_433
    assert rep.converged
    prof = rep.profile
    assert np.all(np.diff(prof.u) <= 1e-12)  # decreasing
    assert np.all(prof.u >= -1e-12)
    assert prof.u[-1] == 0.0
    assert rep.diagnostics.curvature < 0  # max{2,q} < p < 2*


def test_ball_pohozaev_with_boundary_term(ball_433):
    rep = ball_433
    f = rep.functionals
    assert abs(rep.pohozaev_residual) <= 1e-6 * f.dirichlet
    # ball solutions have nonpositive Pohozaev value
    assert rep.diagnostics.pohozaev <= 1e-6 * f.dirichlet
    # residual recomputation: P + omega R^N u'(R)^2 / (2N)
    omega = 4 * math.pi
    recon = rep.diagnostics.pohozaev + omega * prof_slope_sq(rep) / 6.0
    assert recon == pytest.approx(rep.pohozaev_residual, abs=1e-12)


def prof_slope_sq(rep):
    return rep.profile.du[-1] ** 2 * rep.profile.r_max ** 3


def test_ball_fold_pair_candidates():
    cands = _ball_candidates(3, 4, 8.0, 3, 1.0)
    assert len(cands) == 2
    assert all(c.converged for c in cands)
    lo, hi = sorted(cands, key=lambda c: c.shooting_parameter)
    assert lo.diagnostics.curvature < 0 and lo.diagnostics.energy > 0
    assert hi.diagnostics.curvature > 0 and hi.diagnostics.energy < 0


def test_ball_below_fold_has_no_bracket():
    with pytest.raises(NoSolutionBracket):
        shoot_ball(3, 4, 1.0, 3, 1.0)


def test_ball_supercritical_not_validated():
    try:
        rep = shoot_ball(7, 3, 1.0, 3, 1.0, allow_inadmissible=True)
    except (NoSolutionBracket, TailNotResolved):
        return
    assert not rep.converged


def test_exterior_solution_properties():
    # existence with two powers is open; the numerical bracket at (4,3,3)
    # converges and must then satisfy the exterior Pohozaev sign
    rep = shoot_exterior(4, 3, 1.0, 3, 1.0)
    f = rep.functionals
    assert rep.converged
    assert rep.diagnostics.pohozaev >= -1e-6 * f.dirichlet
    assert abs(rep.pohozaev_residual) <= 1e-6 * f.dirichlet
    assert rep.diagnostics.curvature < 0  # d* < 0 and q < p
    assert rep.profile.u[0] == 0.0


def test_scale_identity_at_unit_lambda(entire_431):
    same = scale_to_unit_lambda(entire_431)
    assert np.array_equal(same.profile.u, entire_431.profile.u)
    assert np.array_equal(same.profile.r, entire_431.profile.r)


def test_scale_to_unit_lambda_amplitude():
    rep = shoot_entire(4, 3, 1, lam=2.0)
    unit = scale_to_unit_lambda(rep)
    assert unit.converged
    assert abs(unit.diagnostics.slope) <= 1e-6 * residual_scale(unit)
    # center value of the normalized state is (q/p)^{1/(q-p)}, lambda-free
    assert unit.shooting_parameter == pytest.approx((3 / 4) ** (1 / (3 - 4)), abs=1e-6)


def test_scale_round_trip():
    rep = shoot_entire(4, 3, 1, lam=2.0)
    back = rescale_lambda(scale_to_unit_lambda(rep), 2.0)
    assert np.max(np.abs(back.profile.u - rep.profile.u)) <= 1e-10
    assert np.max(np.abs(back.profile.r - rep.profile.r)) <= 1e-10


def test_scale_rejects_ball(ball_433):
    with pytest.raises(ValueError):
        scale_to_unit_lambda(ball_433)


def test_functionals_zero_profile():
    r = np.linspace(0, 1, 101)
    prof = RadialProfile(dim=3, r=r, u=np.zeros_like(r), du=np.zeros_like(r), domain="ball")
    f = functionals(prof, 3.0, 4.0)
    assert (f.dirichlet, f.power_p, f.power_q) == (0.0, 0.0, 0.0)


def test_functionals_linear_hat_dim1():
    # u = 1 - r on a one-dimensional ball of radius 1 (two-sided): T = 2
    r = np.linspace(0, 1, 2049)
    prof = RadialProfile(dim=1, r=r, u=1.0 - r, du=-np.ones_like(r), domain="ball")
    f = functionals(prof, 3.0, 4.0)
    assert f.dirichlet == pytest.approx(2.0, rel=1e-12)
    assert f.power_p == pytest.approx(2.0 / 4.0, rel=1e-8)


def test_functionals_simpson_order():
    # quartic-order convergence under grid halving on a smooth profile
    def build(n):
        r = np.linspace(0, 1, n)
        u = (1 - r ** 2) ** 2
        du = -4 * r * (1 - r ** 2)
        return RadialProfile(dim=3, r=r, u=u, du=du, domain="ball")

    omega = 4 * math.pi
    t_exact = omega * 128.0 / 315.0
    errs = []
    for n in (65, 129, 257):
        f = functionals(build(n), 2.0, 4.0)
        errs.append(abs(f.dirichlet - t_exact))
    assert errs[0] / errs[1] > 8.0
    assert errs[1] / errs[2] > 8.0


def test_profile_io_round_trip(tmp_path, entire_compact):
    path = tmp_path / "profile.csv"
    write_profile(path, entire_compact.profile, {"p": 1.5, "q": 1.2, "lambda": 1.0})
    prof, meta = read_profile(path)
    assert meta["p"] == 1.5
    assert meta["domain"] == "entire"
    assert prof.support_radius == entire_compact.profile.support_radius
    assert np.array_equal(prof.r, entire_compact.profile.r)
    assert np.array_equal(prof.u, entire_compact.profile.u)
    assert np.array_equal(prof.du, entire_compact.profile.du)


def test_pohozaev_zero_profile():
    r = np.linspace(0, 1, 101)
    prof = RadialProfile(dim=3, r=r, u=np.zeros_like(r), du=np.zeros_like(r), domain="ball")
    from zeromass.fibering import diagnostics
    from zeromass.shooting import SolveReport

    f = Functionals(0.0, 0.0, 0.0)
    rep = SolveReport(
        profile=prof,
        functionals=f,
        diagnostics=diagnostics(f, 1.0, 3.0, 4.0, 3),
        pohozaev_residual=0.0,
        shooting_parameter=0.0,
        converged=False,
        p=3.0,
        q=4.0,
        lam=1.0,
    )
    assert pohozaev_identity_residual(rep) == 0.0


@pytest.mark.parametrize(
    "domain,p,q,dim",
    [
        ("entire", 4.0, 5.0, 3),    # 2 < p < q below the Sobolev limit
        ("entire", 3.0, 4.0, 2),    # low dimension needs q < p
        ("entire", 2.5, 5.0, 3),
        ("ball", 7.0, 3.0, 3),      # supercritical p with q < p
        ("exterior", 3.0, 4.0, 3),  # exterior needs p above the Sobolev limit
    ],
)
def test_nonexistence_regions_never_validate(domain, p, q, dim):
    # cross-module falsification: wherever the classifier reports
    # existence_possible = False, the solver must not produce a validated
    # solution (it may find no bracket at all, or an unvalidated remnant)
    from zeromass.exponents import DomainKind, ExponentConfig, classify_region

    kind = DomainKind(domain)
    cfg = ExponentConfig(
        p=p, q=q, dim=dim, domain=kind,
        radius=None if kind is DomainKind.ENTIRE else 1.0,
    )
    assert not classify_region(cfg).existence_possible
    try:
        if domain == "ball":
            rep = shoot_ball(p, q, 1.0, dim, 1.0, allow_inadmissible=True)
        elif domain == "exterior":
            rep = shoot_exterior(p, q, 1.0, dim, 1.0, allow_inadmissible=True)
        else:
            rep = shoot_entire(p, q, dim, allow_inadmissible=True)
    except (NoSolutionBracket, TailNotResolved):
        return
    assert not rep.converged


def test_shooting_parameter_stable_under_tolerance_refinement():
    # the center value must be grid-converged: tightening the integrator
    # tolerance by 10x moves it by less than 1e-6 relative
    from zeromass.shooting import tolerance_overrides

    base = shoot_entire(3, 2.5, 3).shooting_parameter
    with tolerance_overrides(rtol=1e-11):
        fine = shoot_entire(3, 2.5, 3).shooting_parameter
    assert abs(fine - base) / abs(base) <= 1e-6


def test_tolerance_overrides_reject_unknown_names():
    from zeromass.shooting import tolerance_overrides

    with pytest.raises(ValueError):
        tolerance_overrides(bogus_tol=1.0)


def test_exterior_superlinear_pair_regime():
    # low-dimension exterior with 2 < p < q: existence is open; any
    # converged nonnegative state must have negative fiber curvature, and an
    # empty scan is a legitimate (non-fatal) outcome
    try:
        rep = shoot_exterior(3, 4, 1.0, 2, 1.0)
    except (NoSolutionBracket, TailNotResolved):
        return
    if rep.converged:
        assert rep.diagnostics.curvature < 0
