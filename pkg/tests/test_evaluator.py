"""Iterated integral values, error estimates, and the algebraic checks."""

import numpy as np
import pytest

from iterint.evaluator import (
    check_composition,
    check_diffeo_invariance,
    check_reversal,
    check_shuffle,
    eval_element,
    eval_formal,
    iterint,
    within_tolerance,
)
from iterint.fixtures import get_domain, get_form, get_path
from iterint.geometry import OneForm, rotation_map, scaling_map
from iterint.paths import circle_path, compose, reparametrize, segment_path, smoothstep, smoothstep_slope
from iterint.word_algebra import AlgebraElement, Word

TWO_PI = 2 * np.pi


@pytest.fixture(scope="module")
def annulus_binding():
    return {
        "t": get_form("dtheta", "annulus"),
        "r": get_form("dr", "annulus"),
        "q": get_form("xdy", "annulus"),
    }


@pytest.fixture(scope="module")
def rect_binding():
    return {
        "a": get_form("dx", "rectangle"),
        "b": get_form("dy", "rectangle"),
        "q": get_form("xdy", "rectangle"),
    }


def test_winding_number(annulus_binding):
    loop = get_path("annulus-core")
    res = iterint(loop, ("t",), annulus_binding, n=512)
    assert res.value == pytest.approx(TWO_PI, abs=1e-10)
    assert res.richardson_error < 1e-8
    double = get_path("annulus-double")
    res2 = iterint(double, ("t",), annulus_binding, n=512)
    assert res2.value == pytest.approx(2 * TWO_PI, abs=1e-9)


def test_repeated_letter_gives_power_over_factorial(annulus_binding):
    loop = get_path("annulus-core")
    res = iterint(loop, ("t", "t"), annulus_binding, n=512)
    assert res.value == pytest.approx(TWO_PI**2 / 2, abs=1e-9)
    res3 = iterint(loop, ("t", "t", "t"), annulus_binding, n=512)
    assert res3.value == pytest.approx(TWO_PI**3 / 6, abs=1e-8)


def test_empty_word_is_exactly_one(annulus_binding):
    loop = get_path("annulus-core")
    res = iterint(loop, (), annulus_binding, n=64)
    assert res.value == 1.0 + 0.0j
    assert res.richardson_error == 0.0


def test_letter_order_matters(rect_binding):
    # on a straight segment from the origin area-type words detect order
    rect = get_domain("rectangle")
    seg = segment_path(rect, (0.0, 0.0), (0.8, 0.6))
    ab = iterint(seg, ("a", "b"), rect_binding, n=256).value
    ba = iterint(seg, ("b", "a"), rect_binding, n=256).value
    assert ab == pytest.approx(0.8 * 0.6 / 2, abs=1e-10)
    assert ab + ba == pytest.approx(0.8 * 0.6, abs=1e-10)


def test_binding_errors(annulus_binding):
    loop = get_path("annulus-core")
    with pytest.raises(KeyError):
        iterint(loop, ("missing",), annulus_binding)
    with pytest.raises(ValueError):
        iterint(loop, ("t",), annulus_binding, n=1)
    with pytest.raises(TypeError):
        iterint(loop, ("t",), {"t": "not a form"})


def test_complex_coefficients_integrate(rect_binding):
    rect = get_domain("rectangle")
    imag_dx = OneForm.from_expressions(rect, ("I", "0"), symbol="i")
    seg = segment_path(rect, (-0.5, 0.0), (0.5, 0.0))
    res = iterint(seg, ("i",), {"i": imag_dx}, n=64)
    assert res.value == pytest.approx(1j, abs=1e-12)


def test_richardson_estimate_bounds_error(annulus_binding):
    path = get_path("annulus-wavy-upper")
    ref = iterint(path, ("t", "q", "r"), annulus_binding, n=8192).value
    for n in (64, 128, 256):
        res = iterint(path, ("t", "q", "r"), annulus_binding, n=n)
        assert abs(res.value - ref) <= res.richardson_error


def test_iterint_second_order_convergence(annulus_binding):
    # raw trapezoid values converge at order 2; the extrapolated value is
    # faster, so check the error estimate trend which tracks N^-2
    path = get_path("annulus-wavy-upper")
    word = ("t", "q", "r")
    errs = [
        iterint(path, word, annulus_binding, n=n).richardson_error
        for n in (64, 128, 256, 512)
    ]
    for a, b in zip(errs, errs[1:]):
        assert b <= a / 3.5 or b < 1e-12


def test_eval_element_linearity(annulus_binding):
    loop = get_path("annulus-core")
    elem = AlgebraElement({Word(("t",)): 2.0, Word(()): -1.0, Word(("t", "t")): 1.0})
    res = eval_element(loop, elem, annulus_binding, n=256)
    expected = 2 * TWO_PI - 1 + TWO_PI**2 / 2
    assert res.value == pytest.approx(expected, abs=1e-9)


def test_eval_formal_combination(annulus_binding):
    loop = get_path("annulus-core")
    double = get_path("annulus-double")
    res = eval_formal([(1, double), (-2, loop)], ("t",), annulus_binding, n=256)
    assert res.value == pytest.approx(2 * TWO_PI - 2 * TWO_PI, abs=1e-9)
    res2 = eval_formal([(1, double), (-2, loop)], ("t", "t"), annulus_binding, n=256)
    expected = (2 * TWO_PI) ** 2 / 2 - 2 * TWO_PI**2 / 2
    assert res2.value == pytest.approx(expected, abs=1e-8)


def test_reparametrization_invariance(annulus_binding):
    path = get_path("annulus-wavy-upper")
    word = ("t", "q", "r")
    base = iterint(path, word, annulus_binding, n=1024).value
    for phi, dphi in (
        (smoothstep, smoothstep_slope),
        (lambda t: t**2, lambda t: 2 * t),
    ):
        warped = reparametrize(path, phi, dphi)
        moved = iterint(warped, word, annulus_binding, n=1024).value
        assert abs(moved - base) <= 1e-6


def test_composition_identity_and_convergence(rect_binding):
    rect = get_domain("rectangle")
    p = segment_path(rect, (-0.5, -0.5), (0.5, -0.2))
    q = segment_path(rect, (0.5, -0.2), (0.2, 0.6))
    word = ("q", "b", "a")
    residuals = [check_composition(p, q, word, rect_binding, n=n) for n in (64, 128, 256)]
    assert residuals[-1] <= 1e-8
    for a, b in zip(residuals, residuals[1:]):
        assert b <= a / 3.5 or b < 1e-12


def test_composition_empty_and_single_letter(annulus_binding):
    up = get_path("annulus-upper")
    down = get_path("annulus-lower")
    assert check_composition(up, down, (), annulus_binding, n=64) < 1e-14
    assert check_composition(up, down, ("t",), annulus_binding, n=256) < 1e-10


def test_shuffle_identity_and_convergence(annulus_binding):
    path = get_path("annulus-wavy-upper")
    residuals = [
        check_shuffle(path, ("t",), ("q", "r"), annulus_binding, n=n)
        for n in (32, 64, 128)
    ]
    assert residuals[-1] <= 1e-8
    for a, b in zip(residuals, residuals[1:]):
        assert b <= a / 3.5 or b < 1e-12


def test_reversal_identity(annulus_binding):
    path = get_path("annulus-wavy-upper")
    for word in (("t",), ("t", "q"), ("t", "q", "r")):
        assert check_reversal(path, word, annulus_binding, n=256) <= 1e-9


def test_reversal_on_composite(annulus_binding):
    up = get_path("annulus-upper")
    down = get_path("annulus-lower")
    loop = compose(up, down)
    assert check_reversal(loop, ("t", "q"), annulus_binding, n=256) <= 1e-9


def test_piecewise_transport_matches_direct_quadrature(annulus_binding):
    # the exact transport value and the straight-across quadrature are
    # independent computations of the same integral
    up = get_path("annulus-upper")
    down = get_path("annulus-lower")
    loop = compose(up, down)
    for word in (("t", "q"), ("q", "t", "r")):
        pw = iterint(loop, word, annulus_binding, n=512).value
        direct = iterint(loop, word, annulus_binding, n=512, direct=True).value
        assert abs(pw - direct) <= 1e-9


def test_associativity_of_composition_is_exact(annulus_binding):
    up = get_path("annulus-upper")
    down = get_path("annulus-lower")
    core = get_path("annulus-core")
    left = compose(compose(up, down), core)
    right = compose(up, compose(down, core))
    for word in (("t",), ("t", "q")):
        a = iterint(left, word, annulus_binding, n=256).value
        b = iterint(right, word, annulus_binding, n=256).value
        assert a == pytest.approx(b, abs=1e-14)


def test_diffeo_invariance_rotation_scaling():
    punctured = get_domain("punctured-plane")
    binding = {
        "t": get_form("dtheta", punctured),
        "r": get_form("dr", punctured),
    }
    loop = circle_path(punctured, radius=1.0)
    rot = rotation_map(punctured, np.pi / 3)
    scale = scaling_map(punctured, 2.0)
    for F in (rot, scale):
        for word in (("t",), ("r",), ("t", "r"), ("t", "t")):
            assert check_diffeo_invariance(loop, F, word, binding, n=512) <= 1e-6


def test_random_polynomial_identities(rect_binding):
    """Random polynomial forms and words keep the identities to 1e-6."""
    rng = np.random.default_rng(20260822)
    rect = get_domain("rectangle")
    names = "uvw"
    for trial in range(3):
        binding = {}
        for name in names:
            cx = rng.uniform(-1, 1, size=3)
            cy = rng.uniform(-1, 1, size=3)
            ex = f"{cx[0]:.6f} + {cx[1]:.6f}*x1 + {cx[2]:.6f}*x2^2"
            ey = f"{cy[0]:.6f} + {cy[1]:.6f}*x1*x2 + {cy[2]:.6f}*x2"
            binding[name] = OneForm.from_expressions(rect, (ex, ey), symbol=name)
        p = segment_path(rect, rng.uniform(-0.6, -0.2, 2), rng.uniform(0.0, 0.4, 2))
        q = segment_path(rect, p.end, rng.uniform(0.4, 0.7, 2))
        for _ in range(4):
            r = int(rng.integers(1, 4))
            word = tuple(rng.choice(list(names), size=r))
            s = int(rng.integers(1, 3))
            other = tuple(rng.choice(list(names), size=s))
            assert check_composition(p, q, word, binding, n=512) <= 1e-6
            assert check_shuffle(p, word, other, binding, n=512) <= 1e-6
            assert check_reversal(p, word, binding, n=512) <= 1e-6


def test_within_tolerance_policy():
    assert within_tolerance(5e-9)
    assert not within_tolerance(2e-8, scale=0.0)
    assert within_tolerance(2e-8, scale=1.0)
    assert within_tolerance(9e-4, scale=1e3, rel_tol=1e-6)
    assert not within_tolerance(2e-3, scale=1e3, rel_tol=1e-6)
