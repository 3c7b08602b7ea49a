import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wafkit import ConfigError, ConvexityError, DomainError, make_space_form, make_weight, parse_weight
from wafkit import axisym as ax
from wafkit import curve2d as c2
from wafkit import inequalities as iq
from wafkit.shapes import corpus

ALL_WEIGHTS = ["constant:2", "monomial:1", "monomial:2", "monomial:3", "poly:1,0.5,0.25", "exp",
               "exp-square", "sinh", "cosh", "cosh-minus-1", "rational-plus:2"]


def cg(curve):
    return c2.curve_geometry(curve)


def ag(shape):
    return ax.axisym_geometry(shape)


def test_invert_monotone_examples():
    r = iq.invert_monotone(lambda r: 4 * math.pi * r * r, 16 * math.pi, (0.0, 5.0))
    assert r == pytest.approx(2.0, rel=1e-12)
    r = iq.invert_monotone(lambda r: 4 * math.pi * math.sinh(r) ** 2, 4 * math.pi * math.sinh(1.0) ** 2, (0.0, 3.0))
    assert r == pytest.approx(1.0, rel=1e-12)
    f = lambda r: 4 * math.pi * math.sin(r) ** 3 / 3  # noqa: E731
    assert iq.invert_monotone(f, f(0.7), (0.0, math.pi / 2)) == pytest.approx(0.7, abs=1e-12)


def test_invert_monotone_errors():
    with pytest.raises(DomainError):
        iq.invert_monotone(lambda r: r * r, 100.0, (0.0, 2.0))
    with pytest.raises(DomainError):
        iq.invert_monotone(math.sin, 0.5, (0.0, 3.0))


@settings(max_examples=50)
@given(st.floats(0.01, 50.0))
def test_invert_round_trip(y):
    xi = lambda r: 4 * math.pi * r**2  # noqa: E731
    r = iq.invert_monotone(xi, y, (0.0, 10.0))
    assert xi(r) == pytest.approx(y, rel=1e-12)


def test_report_verdicts():
    rep = iq.InequalityReport("t", {}, 1.0, 1.0 + 1e-9, 1e-6)
    assert rep.verdict == "equality" and rep.ok
    assert iq.InequalityReport("t", {}, 2.0, 1.0, 1e-6).verdict == "holds"
    bad = iq.InequalityReport("t", {}, 1.0, 2.0, 1e-6)
    assert bad.verdict == "violated" and not bad.ok
    d = json.loads(json.dumps(bad.to_dict()))
    assert d["margin"] == -1.0 and d["verdict"] == "violated" and d["tolerances"] == {"equality": 1e-6}


# ---- 2D


@pytest.mark.parametrize("w", ALL_WEIGHTS)
def test_minkowski2d_equality_on_circles(space, w):
    r = 1.0 if space.K != 1 else 0.9
    g = parse_weight(w)
    rep = iq.verify_minkowski2d(cg(c2.circle(space, r, 256)), g)
    assert abs(rep.margin) <= 1e-8 * rep.scale
    assert rep.verdict == "equality"


def test_minkowski2d_examples(sphere_space):
    x = make_weight("monomial", [1])
    rep = iq.verify_minkowski2d(cg(c2.ellipse(2.0, 1.0, 512)), x)
    assert rep.verdict == "holds" and rep.margin > 0
    rep = iq.verify_minkowski2d(cg(c2.circle(sphere_space, math.pi / 3, 128)), x)
    assert rep.lhs == pytest.approx(1.5 * math.pi, rel=1e-12)
    assert rep.rhs == pytest.approx(1.5 * math.pi, rel=1e-12)


def test_minkowski2d_constant_weight_note(euclid):
    rep = iq.verify_minkowski2d(cg(c2.ellipse(2.0, 1.0, 256)), make_weight("constant", [3.0]))
    assert rep.verdict == "equality"
    assert any("constant" in n for n in rep.notes)


def test_minkowski2d_rejects_nonconvex(euclid):
    bean = c2.from_fourier(euclid, 1.0, [0.0, 0.35], [], 128)
    with pytest.raises(ConvexityError):
        iq.verify_minkowski2d(cg(bean), make_weight("exp"))


@pytest.mark.parametrize("K", [0, 1, -1])
def test_minkowski2d_holds_on_random_curves(K):
    sp = make_space_form(K)
    for c in corpus(sp, 2, 5, seed=11, amp=0.15, N=256):
        g = iq.example_weights(K)[-1]
        assert iq.verify_minkowski2d(cg(c), g).verdict in ("holds", "equality")


def test_worked_example_counts():
    assert [len(iq.EXAMPLE_ITEMS[K]) for K in (0, 1, -1)] == [7, 5, 4]


@pytest.mark.parametrize("K,item", [(K, i + 1) for K in (0, 1, -1) for i in range(len(iq.EXAMPLE_ITEMS[K]))])
def test_closed_forms_match_general_rhs(K, item):
    assert iq.closed_form_error(make_space_form(K), item) <= 1e-10


def test_closed_form_values():
    L = 2 * math.pi
    assert iq.closed_form(0, 1, L) == pytest.approx(2 * math.pi)
    L = 3.0
    assert iq.closed_form_precise(-1, 4, L) == pytest.approx(
        L * L / (2 * math.pi) - 2 * math.pi * math.log(L * L / (4 * math.pi**2) + 1), rel=1e-14)
    assert iq.closed_form_precise(1, 4, L) == pytest.approx(
        4 * math.pi * math.log(2 * math.pi / math.sqrt(4 * math.pi**2 - L * L)), rel=1e-14)


def test_worked_examples_on_unit_circle(euclid):
    reps = iq.worked_examples_suite(cg(c2.circle(euclid, 1.0, 256)))
    assert len(reps) == 7
    assert reps[0].lhs == pytest.approx(2 * math.pi, rel=1e-12)
    assert all(r.verdict == "equality" for r in reps)


def test_worked_examples_on_ellipse():
    reps = iq.worked_examples_suite(cg(c2.ellipse(2.0, 1.0, 512)))
    assert [r.verdict for r in reps] == ["holds"] * 7
    for r in reps:
        assert r.params["closed_form_rhs"] == pytest.approx(r.rhs, rel=1e-10)


# ---- R^n


def test_afw_sphere_equality(euclid):
    R = 2.0
    g = ag(ax.sphere(euclid, 3, R, 200))
    rep = iq.verify_afw(g, make_weight("monomial", [1]), 1, 0)
    assert rep.lhs == pytest.approx(32 * math.pi, rel=1e-8)
    assert rep.rhs == pytest.approx(32 * math.pi, rel=1e-8)
    assert rep.verdict == "equality"


@pytest.mark.parametrize("k,l", [(1, -1), (1, 0), (2, -1), (2, 0), (2, 1)])
def test_afw_sphere_equality_all_indices(euclid, k, l):
    R = 1.3
    rep = iq.verify_afw(ag(ax.sphere(euclid, 3, R, 400)), make_weight("exp"), k, l)
    assert abs(rep.margin) <= 1e-8 * rep.scale
    assert rep.params["radius"] == pytest.approx(R, rel=1e-8)


def test_afw_volume_convention_recovers_radius(euclid):
    for n in (3, 4, 5):
        R = 0.9
        rep = iq.verify_afw(ag(ax.sphere(euclid, n, R, 400)), make_weight("monomial", [1]), n - 1, -1)
        assert rep.params["radius"] == pytest.approx(R, rel=1e-8)


def test_afw_offset_sphere_holds():
    g = ag(ax.offset_sphere(1.0, 0.3, 3, 800))
    rep = iq.verify_afw(g, make_weight("monomial", [2]), 1, 0)
    assert rep.lhs == pytest.approx(8.219034700321618, rel=1e-7)
    assert rep.rhs == pytest.approx(2 * math.pi, rel=1e-7)
    assert rep.verdict == "holds"
    assert iq.verify_afw(g, make_weight("exp"), 1, -1).verdict == "holds"


def test_afw_argument_checks(hyper, euclid):
    with pytest.raises(ConfigError):
        iq.verify_afw(ag(ax.sphere(hyper, 3, 1.0, 64)), make_weight("exp"), 1, 0)
    with pytest.raises(ConfigError):
        iq.verify_afw(ag(ax.sphere(euclid, 3, 1.0, 64)), make_weight("exp"), 1, 1)
    dumbbell = ag(ax.legendre_profile(euclid, 3, 1.0, [0.0, 0.6], 400))
    with pytest.raises(ConvexityError):
        iq.verify_afw(dumbbell, make_weight("exp"), 2, 0)


def test_afw_holds_on_corpus(euclid):
    for s in corpus(euclid, 3, 4, seed=5, amp=0.15, M=400, require="k-convex:2"):
        g = ag(s)
        for k, l in ((1, 0), (2, 1), (2, -1)):
            assert iq.verify_afw(g, make_weight("cosh"), k, l).ok


def test_three_term_sphere():
    R = 1.2
    rep = iq.verify_3term(ag(ax.sphere(make_space_form(0), 3, R, 400)), 1)
    assert rep.lhs == pytest.approx(10 * math.pi / 3 * R**3, rel=1e-8)
    assert rep.verdict == "equality"
    assert iq.verify_3term(ag(ax.sphere(make_space_form(0), 3, R, 400)), 2).verdict == "equality"


def test_three_term_circle_matches_planar_reduction(euclid):
    # n = 2, k = 1 with H_{-1} = u: int Phi kappa ds + int u ds / 2 = pi r^2 + pi r^2
    r = 1.7
    rep = iq.verify_3term(cg(c2.circle(euclid, r, 128)), 1)
    assert rep.verdict == "equality"
    assert rep.lhs == pytest.approx(math.pi * r**2 + math.pi * r**2, rel=1e-12)


def test_three_term_offset_sphere_holds():
    rep = iq.verify_3term(ag(ax.offset_sphere(1.0, 0.3, 3, 800)), 1)
    assert rep.verdict == "holds"
    assert any("support" in n for n in rep.notes)


def test_minkowskiH(hyper):
    r0 = 0.8
    sph = ag(ax.sphere(hyper, 3, r0, 400))
    for w in ("monomial:1", "cosh", "constant:1"):
        rep = iq.verify_minkowskiH(sph, parse_weight(w))
        assert abs(rep.margin) <= 1e-8 * rep.scale
    one = make_weight("constant", [1.0])
    pert = ag(ax.legendre_profile(hyper, 3, 0.8, [0.0, 0.04], 400))
    rep = iq.verify_minkowskiH(pert, one)
    assert rep.lhs == pytest.approx(pert.integrate(pert.H()) - 2 * pert.volume, rel=1e-10)
    assert iq.verify_minkowskiH(pert, make_weight("cosh")).verdict == "holds"


def test_minkowskiH_requires_h_convexity(hyper):
    big = ag(ax.legendre_profile(hyper, 3, 0.8, [0.0, 0.4], 400))
    with pytest.raises(ConvexityError):
        iq.verify_minkowskiH(big, make_weight("exp"))


def test_minkowskiS(sphere_space):
    sph = ag(ax.sphere(sphere_space, 3, 0.9, 400))
    assert iq.verify_minkowskiS(sph, make_weight("monomial", [1])).verdict == "equality"
    pert = ag(ax.legendre_profile(sphere_space, 3, 0.8, [0.05, 0.04], 400))
    assert iq.verify_minkowskiS(pert, make_weight("monomial", [1])).verdict == "holds"
    assert iq.verify_minkowskiS(pert, make_weight("constant", [1.0])).ok
    with pytest.raises(ConfigError):
        iq.verify_minkowskiS(ag(ax.sphere(make_space_form(-1), 3, 0.9, 64)), make_weight("exp"))


def test_shape_digest_stable(euclid):
    a = cg(c2.circle(euclid, 1.0, 64))
    b = cg(c2.circle(euclid, 1.0, 64))
    assert iq.shape_digest(a) == iq.shape_digest(b)
    assert iq.shape_digest(a) != iq.shape_digest(cg(c2.circle(euclid, 1.1, 64)))


def test_default_tolerances():
    assert iq.CURVE_TOL == 1e-6 and iq.AXISYM_TOL == 1e-4
    e = make_space_form(0)
    assert iq.default_tol(cg(c2.circle(e, 1.0, 16))) == 1e-6
    assert iq.default_tol(ag(ax.sphere(e, 3, 1.0, 16))) == 1e-4
    assert np.isfinite(iq.verify_afw(ag(ax.sphere(e, 3, 1.0, 16)), make_weight("exp"), 1, 0).margin)


def test_weight_vanishing_at_zero_is_noted(euclid):
    geom = c2.curve_geometry(c2.circle(euclid, 1.0, 64))
    rep = iq.verify_minkowski2d(geom, make_weight("monomial", [1]))
    assert any("vanishes" in n for n in rep.notes)
    assert not any("vanishes" in n for n in iq.verify_minkowski2d(geom, make_weight("exp")).notes)
