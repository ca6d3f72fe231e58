"""Domains, forms, wedge and exterior derivative, maps, registry files."""

import numpy as np
import pytest

from iterint.geometry import (
    ChartDomain,
    OneForm,
    TwoForm,
    exterior_derivative,
    is_closed,
    load_form_registry,
    parse_expression,
    pullback,
    rotation_map,
    scaling_map,
    wedge,
)


def make_annulus(inner=0.5, outer=1.5):
    def member(pts):
        r = np.hypot(pts[:, 0], pts[:, 1])
        return (r > inner) & (r < outer)

    return ChartDomain(2, member, ([-outer, -outer], [outer, outer]), name="annulus")


def make_rectangle():
    def member(pts):
        return np.all(np.abs(pts) < 1.0, axis=-1)

    return ChartDomain(
        2, member, ([-1.0, -1.0], [1.0, 1.0]), star_center=(0.0, 0.0), name="rectangle"
    )


DTHETA = ("-x2/(x1^2 + x2^2)", "x1/(x1^2 + x2^2)")
DR = ("x1/sqrt(x1^2 + x2^2)", "x2/sqrt(x1^2 + x2^2)")


def test_membership_and_sampling_deterministic():
    dom = make_annulus()
    pts = dom.sample(300, seed=11)
    assert pts.shape == (300, 2)
    assert np.all(dom.contains(pts))
    again = dom.sample(300, seed=11)
    assert np.array_equal(pts, again)
    other = dom.sample(300, seed=12)
    assert not np.array_equal(pts, other)


def test_single_point_membership():
    dom = make_annulus()
    assert dom.contains((1.0, 0.0))
    assert not dom.contains((0.1, 0.0))
    with pytest.raises(ValueError):
        dom.require_inside(np.array([[0.0, 0.0]]))


def test_star_center_validation():
    make_rectangle()  # fine
    with pytest.raises(ValueError):
        # the annulus is not star shaped about any point
        def member(pts):
            r = np.hypot(pts[:, 0], pts[:, 1])
            return (r > 0.5) & (r < 1.5)

        ChartDomain(
            2, member, ([-1.5, -1.5], [1.5, 1.5]), star_center=(1.0, 0.0), name="bad"
        )


def test_parse_expression_grammar():
    e = parse_expression("x^2 + sin(y)", 2)
    assert str(e.free_symbols) != ""
    with pytest.raises(ValueError):
        parse_expression("x + q", 2)
    with pytest.raises(ValueError):
        parse_expression("tan(x)", 2)
    with pytest.raises(ValueError):
        parse_expression("__import__('os')", 2)


def test_expression_constants_and_complex():
    dom = make_rectangle()
    form = OneForm.from_expressions(dom, ("I*x1", "pi"), name="cplx")
    vals = form.coefficients_at(np.array([[0.5, 0.0]]))
    assert vals[0, 0] == pytest.approx(0.5j)
    assert vals[0, 1] == pytest.approx(np.pi)


def test_wedge_dtheta_dr_value():
    dom = make_annulus()
    dtheta = OneForm.from_expressions(dom, DTHETA, name="dtheta")
    dr = OneForm.from_expressions(dom, DR, name="dr")
    w = wedge(dtheta, dr)
    val = w.components_at(np.array([1.0, 0.0]))
    assert val.shape == (1,)
    assert val[0] == pytest.approx(-1.0, abs=1e-12)


def test_wedge_antisymmetric_and_domain_check():
    dom = make_annulus()
    a = OneForm.from_expressions(dom, DTHETA, name="a")
    b = OneForm.from_expressions(dom, DR, name="b")
    pts = dom.sample(64, seed=3)
    ab = wedge(a, b).components_at(pts)
    ba = wedge(b, a).components_at(pts)
    assert np.allclose(ab, -ba, atol=1e-14)
    assert np.max(np.abs(wedge(a, a).components_at(pts))) < 1e-14
    other = make_rectangle()
    c = OneForm.from_expressions(other, ("0", "x1"), name="c")
    with pytest.raises(ValueError):
        wedge(a, c)


def test_exterior_derivative_analytic_matches_hand_value():
    dom = make_rectangle()
    xdy = OneForm.from_expressions(dom, ("0", "x1"), name="xdy")
    pts = dom.sample(128, seed=1)
    comps = exterior_derivative(xdy).components_at(pts)
    # d(x dy) = dx^dy, so the single component is 1 everywhere
    assert np.allclose(comps[:, 0], 1.0, atol=1e-12)


def test_exterior_derivative_finite_difference_branch():
    dom = make_rectangle()
    # black-box coefficients: no analytic partials attached
    xdy = OneForm(dom, [lambda p: np.zeros(len(p)), lambda p: p[:, 0]], name="xdy")
    inner = dom.sample(256, seed=2)
    inner = inner[np.all(np.abs(inner) < 0.9, axis=1)]
    comps = exterior_derivative(xdy).components_at(inner)
    assert np.allclose(comps[:, 0], 1.0, atol=1e-9)


def test_finite_difference_domain_exit_raises():
    def member(pts):
        return np.all((pts > 0) & (pts < 1), axis=-1)

    dom = ChartDomain(2, member, ([0, 0], [1, 1]), name="unit")
    form = OneForm(dom, [lambda p: p[:, 1], lambda p: np.zeros(len(p))], name="ydx")
    near_edge = np.array([[1e-7, 0.5]])
    with pytest.raises(ValueError):
        exterior_derivative(form).components_at(near_edge)


def test_is_closed_dtheta_and_counterexample():
    dom = make_annulus()
    dtheta = OneForm.from_expressions(dom, DTHETA, name="dtheta")
    ok, residual = is_closed(dtheta, tol=1e-8, samples=256, seed=0)
    assert ok and residual <= 1e-8
    xdy = OneForm.from_expressions(dom, ("0", "x1"), name="xdy")
    ok, residual = is_closed(xdy, tol=1e-8, samples=256, seed=0)
    assert not ok and residual == pytest.approx(1.0, abs=1e-10)


def test_is_closed_accepts_explicit_samples():
    dom = make_annulus()
    dtheta = OneForm.from_expressions(dom, DTHETA, name="dtheta")
    pts = dom.sample(32, seed=5)
    ok, _ = is_closed(dtheta, samples=pts)
    assert ok
    with pytest.raises(ValueError):
        is_closed(dtheta, samples=np.array([[0.0, 0.0]]))


def test_pullback_rotation_preserves_dtheta():
    dom = make_annulus()
    dtheta = OneForm.from_expressions(dom, DTHETA, name="dtheta")
    rot = rotation_map(dom, np.pi / 5)
    pulled = pullback(rot, dtheta)
    pts = dom.sample(128, seed=7)
    assert np.allclose(pulled.coefficients_at(pts), dtheta.coefficients_at(pts), atol=1e-12)


def test_pullback_scaling_on_radial_form():
    def member(pts):
        return np.hypot(pts[:, 0], pts[:, 1]) > 0.05

    dom = ChartDomain(2, member, ([-2, -2], [2, 2]), name="punctured")
    dr = OneForm.from_expressions(dom, DR, name="dr")
    scale = scaling_map(dom, 2.0)
    pulled = pullback(scale, dr)
    pts = dom.sample(64, seed=9)
    # r(2x) has gradient 2 * grad r evaluated pointwise
    assert np.allclose(pulled.coefficients_at(pts), 2 * dr.coefficients_at(pts) / 1, atol=1e-12)


def test_form_linear_combinations():
    dom = make_rectangle()
    dx = OneForm.from_expressions(dom, ("1", "0"), name="dx")
    dy = OneForm.from_expressions(dom, ("0", "1"), name="dy")
    combo = 2 * dx + (-3) * dy
    pts = dom.sample(16, seed=0)
    vals = combo.coefficients_at(pts)
    assert np.allclose(vals[:, 0], 2) and np.allclose(vals[:, 1], -3)


def test_two_form_algebra_and_apply():
    dom = make_rectangle()
    dx = OneForm.from_expressions(dom, ("1", "0"), name="dx")
    dy = OneForm.from_expressions(dom, ("0", "1"), name="dy")
    area = wedge(dx, dy)
    double = area + area
    pts = dom.sample(8, seed=1)
    u = np.tile([1.0, 0.0], (len(pts), 1))
    v = np.tile([0.0, 1.0], (len(pts), 1))
    assert np.allclose(double.apply(pts, u, v), 2.0)
    assert np.allclose((-area).norm_at(pts), 1.0)


def test_form_registry_round_trip(tmp_path):
    reg = tmp_path / "forms.ini"
    reg.write_text(
        "[form dtheta]\n"
        "a1 = -x2/(x1^2 + x2^2)\n"
        "a2 = x1/(x1^2 + x2^2)\n"
        "\n"
        "[form dy]\n"
        "a2 = 1\n"
    )
    dom = make_annulus()
    forms = load_form_registry(reg, dom)
    assert set(forms) == {"dtheta", "dy"}
    assert forms["dtheta"].symbol == "dtheta"
    vals = forms["dtheta"].coefficients_at(np.array([1.0, 0.0]))
    assert vals[0] == pytest.approx(0.0) and vals[1] == pytest.approx(1.0)
    zero_comp = forms["dy"].coefficients_at(np.array([1.0, 0.0]))
    assert zero_comp[0] == 0.0


def test_form_registry_errors(tmp_path):
    dom = make_rectangle()
    bad = tmp_path / "bad.ini"
    bad.write_text("[form f]\na1 = x + unknown_name\n")
    with pytest.raises(ValueError):
        load_form_registry(bad, dom)
    dup = tmp_path / "extra.ini"
    dup.write_text("[form f]\na3 = 1\n")
    with pytest.raises(ValueError):
        load_form_registry(dup, dom)
    with pytest.raises(ValueError):
        load_form_registry(tmp_path / "missing.ini", dom)
