import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wafkit import ConvexityError, DomainError, make_space_form, make_weight, parse_weight
from wafkit import curve2d as c2
from wafkit import flowlab

# independent oracles, computed once with scipy quad on the parametric ellipse
ELLIPSE_LENGTH = 9.688448220547675
ELLIPSE_LHS = {"monomial:1": 15.707963267948962, "exp": 44.68490311260196, "monomial:2": 23.561944901923447}


def wobbly(space, N=512):
    a0 = 1.0 if space.K == 0 else 0.7
    return c2.from_fourier(space, a0, [0.0, 0.08 * a0, 0.02 * a0], [0.03 * a0], N)


def test_centered_circle(euclid):
    g = c2.curve_geometry(c2.circle(euclid, 2.0, 64))
    assert np.allclose(g.kappa, 0.5, atol=1e-14)
    assert np.allclose(g.u, 2.0, atol=1e-14)
    assert g.L == pytest.approx(4 * math.pi, rel=1e-14)
    assert g.A == pytest.approx(4 * math.pi, rel=1e-14)
    assert np.max(np.abs(g.grad_phi_sq)) <= 1e-14


def test_spherical_circle(sphere_space):
    r = math.pi / 3
    g = c2.curve_geometry(c2.circle(sphere_space, r, 64))
    assert np.allclose(g.kappa, 1 / math.sqrt(3), atol=1e-14)
    assert np.allclose(g.u, math.sin(r), atol=1e-14)
    assert g.L == pytest.approx(2 * math.pi * math.sin(r), rel=1e-14)
    assert g.A == pytest.approx(math.pi, rel=1e-14)


def test_ellipse_length_and_area():
    g = c2.curve_geometry(c2.ellipse(2.0, 1.0, 512))
    assert abs(g.L - ELLIPSE_LENGTH) <= 1e-8
    assert g.A == pytest.approx(2 * math.pi, rel=1e-12)


def test_invalid_curves(sphere_space, euclid):
    with pytest.raises(DomainError):
        c2.circle(sphere_space, 1.6, 64)
    with pytest.raises(DomainError):
        c2.ClosedCurve(euclid, np.r_[np.ones(15), -1.0])
    with pytest.raises(DomainError):
        c2.ellipse(1.0, 1.0, 64, center=(2.0, 0.0))


def test_weighted_kappa_examples(euclid, sphere_space):
    x = make_weight("monomial", [1])
    one = make_weight("constant", [1.0])
    assert c2.weighted_kappa_integral(c2.curve_geometry(wobbly(euclid)), one) == pytest.approx(2 * math.pi, rel=1e-12)
    assert c2.weighted_kappa_integral(c2.curve_geometry(c2.circle(euclid, 2.0, 64)), x) == pytest.approx(4 * math.pi)
    gs = c2.curve_geometry(c2.circle(sphere_space, math.pi / 3, 64))
    assert c2.weighted_kappa_integral(gs, x) == pytest.approx(math.pi / 2, rel=1e-13)


def test_Ag_area_examples(space, sphere_space, euclid):
    c = wobbly(space)
    g = c2.curve_geometry(c)
    assert c2.Ag_area(c, make_weight("monomial", [1])) == pytest.approx(g.A, rel=1e-12)
    one = make_weight("constant", [1.0])
    assert c2.Ag_area(c, one) == pytest.approx(space.K * g.A, abs=1e-12)
    assert c2.Ag_area(c2.circle(sphere_space, math.pi / 3, 64), one) == pytest.approx(math.pi, rel=1e-13)


def test_Ag_area_methods_agree(space):
    c = wobbly(space, 128)
    for w in ("exp", "cosh", "monomial:2", "exp-square", "sinh"):
        g = parse_weight(w)
        quad = c2.Ag_area(c, g, "quad")
        assert quad == pytest.approx(c2.Ag_area(c, g, "gauss"), rel=1e-11, abs=1e-13)
        assert quad == pytest.approx(c2.Ag_area(c, g, "closed"), rel=1e-11, abs=1e-13)


@pytest.mark.parametrize("w", sorted(ELLIPSE_LHS))
def test_ellipse_weighted_lhs_oracle(w):
    g = c2.curve_geometry(c2.ellipse(2.0, 1.0, 512))
    W = parse_weight(w)
    assert c2.weighted_kappa_integral(g, W) + c2.Ag_area(g, W) == pytest.approx(ELLIPSE_LHS[w], rel=1e-12)


def test_minkowski2d_rhs_examples(euclid, sphere_space):
    x = make_weight("monomial", [1])
    L = 7.3
    assert c2.minkowski2d_rhs(euclid, x, L) == pytest.approx(L * L / (2 * math.pi), rel=1e-14)
    assert c2.minkowski2d_rhs(sphere_space, x, math.pi * math.sqrt(3)) == pytest.approx(1.5 * math.pi, rel=1e-13)
    e = make_weight("exp")
    assert c2.minkowski2d_rhs(euclid, e, L) == pytest.approx(
        2 * math.pi * (2 * math.exp(L * L / (8 * math.pi**2)) - 1), rel=1e-13)
    with pytest.raises(DomainError):
        c2.minkowski2d_rhs(sphere_space, x, 7.0)
    with pytest.raises(DomainError):
        c2.minkowski2d_rhs(euclid, x, 0.0)


def test_evolution_rhs_2d_trivial(euclid):
    circ = c2.curve_geometry(c2.circle(euclid, 1.5, 64))
    shape = circ.curve
    F = flowlab.speed(circ, flowlab.FlowSpec("curve-lp"))
    assert c2.evolution_rhs_2d(circ, make_weight("monomial", [1]), F) == pytest.approx(0.0, abs=1e-13)
    g = c2.curve_geometry(wobbly(euclid, 64))
    assert c2.evolution_rhs_2d(g, make_weight("constant", [1.0]), np.ones(64)) == 0.0
    with pytest.raises(DomainError):
        c2.evolution_rhs_2d(g, make_weight("exp"), np.ones(10))
    assert shape.N == 64


def test_evolution_rhs_2d_time_difference(euclid):
    # rho = 1 + 0.1 cos 2 theta, g(x) = x, under the length-preserving flow
    c = c2.from_fourier(euclid, 1.0, [0.0, 0.1], [], 64)
    spec = flowlab.FlowSpec("curve-lp", weight=make_weight("monomial", [1]))
    fd, analytic, _scale = flowlab.time_difference_check(c, spec, "weighted2d", 1e-4)
    geom = c2.curve_geometry(c)
    direct = c2.evolution_rhs_2d(geom, spec.weight, flowlab.speed(geom, spec))
    assert direct == pytest.approx(analytic, rel=1e-10)
    assert abs(fd - direct) <= 1e-3 * abs(direct)


@pytest.mark.parametrize("N", [512])
def test_gauss_bonnet(space, N):
    g = c2.curve_geometry(wobbly(space, N))
    assert abs(g.integrate(g.kappa) - (2 * math.pi - space.K * g.A)) <= 1e-8


def test_support_derivative_identity(space):
    g = c2.curve_geometry(wobbly(space, 512))
    lhs = g.d_ds(g.u)
    rhs = g.kappa * g.d_ds(g.Phi)
    assert np.max(np.abs(lhs - rhs)) <= 1e-6


def test_integrated_laplacian_identity(space):
    g = c2.curve_geometry(wobbly(space, 512))
    assert abs(g.integrate(g.dphi - g.u * g.kappa)) <= 1e-8


def test_grad_phi_identities(space):
    g = c2.curve_geometry(wobbly(space, 512))
    assert np.allclose(g.grad_phi_sq, g.phi**2 - g.u**2, atol=1e-12)
    assert np.min(g.grad_phi_sq) >= -1e-10
    assert np.max(np.abs(g.grad_phi_sq - g.d_ds(g.Phi) ** 2)) <= 1e-6


def test_ellipse_curvature_converges_spectrally():
    def kappa_err(N):
        g = c2.curve_geometry(c2.ellipse(2.0, 1.0, N))
        t = np.arctan2(2.0 * np.sin(g.theta), np.cos(g.theta))  # parametric angle
        exact = 2.0 / (4 * np.sin(t) ** 2 + np.cos(t) ** 2) ** 1.5
        return np.max(np.abs(g.kappa - exact))

    e64, e128, e256 = kappa_err(64), kappa_err(128), kappa_err(256)
    assert e128 < e64 / 16
    assert e256 < max(e128 / 16, 1e-11)


def test_refine_is_exact_for_band_limited(euclid):
    c = c2.from_fourier(euclid, 1.0, [0.1, 0.05], [0.02], 32)
    fine = c2.refine(c, 128)
    assert np.allclose(fine.rho, c2.from_fourier(euclid, 1.0, [0.1, 0.05], [0.02], 128).rho, atol=1e-14)
    assert np.allclose(c2.refine(fine, 32).rho, c.rho, atol=1e-14)


def test_auto_resolve_keeps_good_curves(euclid):
    c = wobbly(euclid, 64)
    assert c2.auto_resolve(c).N == 64


def test_config_round_trip(euclid):
    c = wobbly(euclid, 64)
    cfg = json.loads(json.dumps(c2.to_config(c)))
    assert np.array_equal(c2.from_config(euclid, cfg).rho, c.rho)
    cfg = {"type": "radial_fourier", "a0": 1.0, "cos": [0.0, 0.1], "sin": []}
    assert c2.from_config(euclid, cfg, 64).N == 64


def test_geometry_csv_header(euclid):
    text = c2.geometry_csv(c2.curve_geometry(c2.circle(euclid, 1.0, 16)))
    lines = text.splitlines()
    assert lines[0] == "theta,rho,kappa,u,Phi,ds"
    assert len(lines) == 17


def test_translate_circle_gives_offset_circle(euclid):
    c = c2.circle(euclid, 1.0, 256)
    moved = c2.translate(c, (0.3, -0.1))
    p = c2.points(moved)
    assert np.allclose(np.hypot(p[:, 0] + 0.3, p[:, 1] - 0.1), 1.0, atol=1e-12)
    back = c2.translate(moved, (-0.3, 0.1))
    assert np.allclose(back.rho, 1.0, atol=1e-12)


def test_translate_only_euclidean(hyper):
    with pytest.raises(DomainError):
        c2.translate(c2.circle(hyper, 1.0, 32), (0.1, 0.0))


def test_weighted_center_of_offset_ellipse():
    g = c2.curve_geometry(c2.ellipse(2.0, 1.0, 512, center=(0.4, 0.2)))
    assert np.allclose(c2.weighted_center(g), (0.4, 0.2), atol=1e-10)


def test_require_convex(euclid):
    bean = c2.from_fourier(euclid, 1.0, [0.0, 0.35], [], 128)
    with pytest.raises(ConvexityError):
        c2.require_convex(c2.curve_geometry(bean))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 1.5), st.floats(-0.08, 0.08), st.floats(-0.05, 0.05), st.sampled_from([0, -1, 1]))
def test_gauss_bonnet_random(a0, c2_, s3, K):
    sp = make_space_form(K)
    a0 = min(a0, 1.2) if K == 1 else a0
    c = c2.from_fourier(sp, a0, [0.0, c2_ * a0], [0.0, 0.0, s3 * a0], 256)
    g = c2.curve_geometry(c)
    assert abs(g.integrate(g.kappa) - (2 * math.pi - K * g.A)) <= 1e-8
