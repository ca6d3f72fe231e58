"""Endpoint functions on covers: caching, difference-calculus grading,
the loop pairing matrix, and the kernel inclusion."""

import numpy as np
import pytest

from iterint.cover import GroupRingElement, eta
from iterint.evaluator import eval_element
from iterint.fixtures import get_cover, get_domain, get_form
from iterint.homotopy import build_defining_system
from iterint.invariants import (
    HigherInvariant,
    chen_pairing,
    f_omega,
    kernel_inclusion_check,
    order_check,
)
from iterint.paths import segment_path
from iterint.word_algebra import AlgebraElement, Word

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def setup():
    cover = get_cover("strip-cover")
    strip = get_domain("strip")
    ann = get_domain("annulus")
    return {
        "cover": cover,
        "dx": get_form("dx", strip),
        "dy": get_form("dy", strip),
        "base": {"t": get_form("dtheta", ann), "r": get_form("dr", ann)},
    }


def winding_invariant(setup, power):
    elem = AlgebraElement.from_word(Word(("t",) * power))
    return HigherInvariant(elem, {"t": setup["dx"]}, setup["cover"])


# --- endpoint functions -----------------------------------------------------


def test_coordinate_oracle(setup):
    inv = winding_invariant(setup, 1)
    assert inv.value((2.0, 1.2)) == pytest.approx(2.0, abs=1e-12)
    assert inv.value((-1.5, 0.8)) == pytest.approx(-1.5, abs=1e-12)


def test_square_oracle(setup):
    inv = winding_invariant(setup, 2)
    assert inv.value((2.0, 1.2)) == pytest.approx(2.0, abs=1e-12)
    assert inv.value((3.0, 0.7)) == pytest.approx(4.5, abs=1e-11)


def test_value_at_base_lift_vanishes(setup):
    for power in (1, 2):
        inv = winding_invariant(setup, power)
        assert inv.value(setup["cover"].base_lift) == 0


def test_f_omega_convenience(setup):
    elem = AlgebraElement.from_word(Word(("t",)))
    value = f_omega(elem, {"t": setup["dx"]}, setup["cover"], (1.0, 1.0), n=512)
    assert value == pytest.approx(1.0, abs=1e-12)


def test_path_independence(setup):
    inv = winding_invariant(setup, 2)
    assert inv.path_independence_residual(count=16, n=1024) <= 1e-8


def test_cache_quantization(setup):
    inv = winding_invariant(setup, 1)
    a = inv.value((1.0, 1.0))
    b = inv.value((1.0 + 1e-14, 1.0))
    assert a == b
    assert len(inv._cache) == 1


def test_rejects_uncertified_element(setup):
    strip = get_domain("strip")
    crooked = get_form("xdy", strip)
    with pytest.raises(ValueError):
        HigherInvariant(AlgebraElement.from_word(Word(("q",))), {"q": crooked}, setup["cover"])


def test_degree_three_needs_certificate(setup):
    elem = AlgebraElement.from_word(Word(("t", "t", "t")))
    with pytest.raises(ValueError, match="certificate"):
        HigherInvariant(elem, {"t": setup["dx"]}, setup["cover"])
    with pytest.raises(ValueError, match="certificate"):
        HigherInvariant(
            elem, {"t": setup["dx"]}, setup["cover"], certificate=1.0
        )
    inv = HigherInvariant(elem, {"t": setup["dx"]}, setup["cover"], certificate=0.0)
    assert inv.degree == 3


def test_evaluation_outside_domain_raises(setup):
    inv = winding_invariant(setup, 1)
    with pytest.raises(ValueError):
        inv.value((0.0, 3.0))


# --- difference-calculus grading ---------------------------------------------


def test_order_check_coordinate(setup):
    report = order_check(winding_invariant(setup, 1), n=512, samples=8)
    assert report["degree"] == 1
    assert report["vanish_residual"] <= report["vanish_tolerance"]
    assert report["witness_value"] == pytest.approx(TWO_PI, rel=1e-9)
    assert report["order_exact"] is True


def test_order_check_square(setup):
    report = order_check(winding_invariant(setup, 2), n=512, samples=8)
    assert report["witness_value"] == pytest.approx(TWO_PI**2, rel=1e-9)
    assert report["vanishes"] is True
    assert report["witness_tuple"] == ((1,), (1,))


def test_order_check_constant(setup):
    inv = HigherInvariant(AlgebraElement.unit() * 3.5, {}, setup["cover"])
    report = order_check(inv, n=64, samples=4)
    assert report["degree"] == 0
    assert report["vanish_residual"] <= 1e-12
    assert report["witness_tuple"] is None
    assert report["order_exact"] is False


def test_order_check_deck_invariant_square(setup):
    # the radial square is annihilated one level early
    inv = HigherInvariant(
        AlgebraElement.from_word(Word(("r", "r"))), {"r": setup["dy"]}, setup["cover"]
    )
    report = order_check(inv, n=512, samples=8)
    assert report["vanish_residual"] <= 1e-10
    assert report["witness_value"] <= 1e-10
    assert report["order_exact"] is False


# --- loop pairing -------------------------------------------------------------


def grading_etas():
    return [
        GroupRingElement.identity(1),
        eta([(1,)], rank=1),
        eta([(1,), (1,)], rank=1),
    ]


def grading_elements():
    return [
        AlgebraElement.unit(),
        AlgebraElement.from_word(Word(("t",))),
        AlgebraElement.from_word(Word(("t", "t"))),
    ]


def test_pairing_matrix_oracle(setup):
    result = chen_pairing(
        grading_etas(), grading_elements(), setup["base"], setup["cover"], n=2048
    )
    M = result.matrix
    assert np.max(np.abs(M.imag)) <= 1e-10
    expected_diag = [1.0, TWO_PI, TWO_PI**2]
    assert np.allclose(np.diag(M.real), expected_diag, rtol=1e-9)
    assert np.max(np.abs(np.tril(M.real, -1))) <= 1e-9
    # the entry above the diagonal is the half-square of the winding
    assert M[1, 2].real == pytest.approx(TWO_PI**2 / 2, rel=1e-9)
    assert result.rank == 3


def test_pairing_identity_row(setup):
    result = chen_pairing(
        [eta([(1,)], rank=1)], [AlgebraElement.unit()], setup["base"], setup["cover"], n=64
    )
    assert result.matrix[0, 0] == 0
    assert result.rank == 0


def test_pairing_input_validation(setup):
    with pytest.raises(TypeError):
        chen_pairing([(1,)], grading_elements(), setup["base"], setup["cover"])
    with pytest.raises(ValueError, match="rank"):
        chen_pairing(
            [GroupRingElement.identity(2)],
            grading_elements(),
            setup["base"],
            setup["cover"],
        )


def test_pairing_as_dict_round_trip(setup):
    result = chen_pairing(
        grading_etas()[:2], grading_elements()[:2], setup["base"], setup["cover"], n=256
    )
    payload = result.as_dict()
    assert payload["rows"] == 2 and payload["columns"] == 2
    assert payload["matrix"][0][0] == [1.0, 0.0]


# --- kernel inclusion ----------------------------------------------------------


def test_kernel_inclusion_radial_square(setup):
    inv = HigherInvariant(
        AlgebraElement.from_word(Word(("r", "r"))), {"r": setup["dy"]}, setup["cover"]
    )
    report = kernel_inclusion_check(inv, setup["base"], n=1024)
    assert report["passed"] is True
    assert report["loop_residual"] <= 1e-10
    assert report["difference_residual"] <= 1e-8


def test_kernel_inclusion_rejects_visible_element(setup):
    with pytest.raises(ValueError, match="kernel"):
        kernel_inclusion_check(winding_invariant(setup, 1), setup["base"], n=512)


def test_kernel_inclusion_needs_positive_degree(setup):
    inv = HigherInvariant(AlgebraElement.unit(), {}, setup["cover"])
    with pytest.raises(ValueError, match="degree"):
        kernel_inclusion_check(inv, setup["base"])


def test_null_element_probe(setup):
    # vanishing pairings plus a vanishing endpoint function force
    # vanishing integrals on arbitrary paths
    strip = get_domain("strip")
    elem = AlgebraElement({Word(("a",)): 2, Word(("b",)): -1})
    cover_binding = {"a": setup["dx"], "b": 2.0 * setup["dx"]}
    base_binding = {"a": setup["base"]["t"], "b": 2.0 * setup["base"]["t"]}
    inv = HigherInvariant(elem, cover_binding, setup["cover"])
    pairing = chen_pairing(grading_etas(), [elem], base_binding, setup["cover"], n=512)
    assert np.max(np.abs(pairing.matrix)) <= 1e-10
    pts = strip.sample(16, seed=3)
    assert np.max(np.abs(inv.values(pts, n=512))) <= 1e-12
    rng = np.random.default_rng(20260822)
    for _ in range(8):
        a, b = strip.sample(2, seed=int(rng.integers(1, 10_000)))
        path = segment_path(strip, a, b)
        value = eval_element(path, elem, cover_binding, n=512).value
        assert abs(value) <= 1e-12
