"""Functions on a cover built from certified closed integrals.

A certified element of the word algebra, bound to forms pulled back to
the cover, integrates to a path-independent function of the endpoint.
Deck-group difference calculus grades these functions: an element of
degree s is annihilated by every product of s+1 generator differences,
while some product of s differences stays bounded away from zero.  The
loop pairing against the signed generator products gives the matrix
whose triangularity and rank witness that grading, and the kernel check
confirms that elements invisible to loops drop one level in the
filtration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .cover import CoverSpace, GroupRingElement, apply_group_ring, base_loop, eta
from .evaluator import eval_element
from .homotopy import check_s2_condition
from .paths import segment_path
from .word_algebra import AlgebraElement, Word

__all__ = [
    "HigherInvariant",
    "PairingResult",
    "chen_pairing",
    "f_omega",
    "kernel_inclusion_check",
    "order_check",
]

DEFAULT_GRID = 1024
_QUANTUM = 1e-12


def _quantize(point: np.ndarray) -> tuple:
    return tuple(int(round(c / _QUANTUM)) for c in point)


class HigherInvariant:
    """Endpoint function of a certified element on a cover.

    Values come from integrating along straight segments from the lifted
    base point; path independence (the content of the certification)
    makes the choice immaterial, and `path_independence_residual`
    measures it against random two-leg detours.  Degree <= 2 elements
    are certified on construction; longer elements must carry the
    residual of the defining system that produced them.  The value cache
    keys on the endpoint quantized to 1e-12; concurrent writers may race
    but agree within quadrature tolerance, so last write wins.
    """

    def __init__(
        self,
        element: AlgebraElement,
        binding,
        cover: CoverSpace,
        certificate: float | None = None,
        tol: float = 1e-6,
        samples: int = 256,
        seed: int = 0,
    ):
        self.element = element
        self.binding = dict(binding)
        self.cover = cover
        self.degree = max((len(w) for w in element.words()), default=0)
        self.order_bound = self.degree + 1
        if certificate is not None:
            residual = float(certificate)
            if residual > tol:
                raise ValueError(
                    f"certificate residual {residual:.3e} exceeds tolerance {tol:.3e}"
                )
        elif self.degree <= 2:
            residual = check_s2_condition(
                element, self.binding, samples=samples, tol=tol, seed=seed
            )
            if residual > tol:
                raise ValueError(
                    f"element failed certification with residual {residual:.3e}"
                )
        else:
            raise ValueError(
                "elements of degree above 2 must carry a defining-system certificate"
            )
        self.certificate = residual
        self._cache: dict[tuple, complex] = {}

    def _route(self, target: np.ndarray):
        return segment_path(self.cover.domain, self.cover.base_lift, target)

    def value(self, x, n: int = DEFAULT_GRID) -> complex:
        target = np.asarray(x, dtype=float)
        self.cover.domain.require_inside(target, "evaluation point")
        key = (_quantize(target), int(n))
        if key not in self._cache:
            path = self._route(target)
            self._cache[key] = eval_element(path, self.element, self.binding, n=n).value
        return self._cache[key]

    def values(self, points, n: int = DEFAULT_GRID) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.array([self.value(p, n=n) for p in pts])

    def as_function(self, n: int = DEFAULT_GRID):
        return lambda pts: self.values(pts, n=n)

    def path_independence_residual(
        self, count: int = 16, n: int = DEFAULT_GRID, seed: int = 0
    ) -> float:
        """Worst gap between the straight route and seeded two-leg detours."""
        from .paths import compose

        targets = self.cover.domain.sample(count, seed=seed)
        waypoints = self.cover.domain.sample(count, seed=seed + 1)
        worst = 0.0
        for target, waypoint in zip(targets, waypoints):
            direct = self.value(target, n=n)
            detour = compose(
                segment_path(self.cover.domain, self.cover.base_lift, waypoint),
                segment_path(self.cover.domain, waypoint, target),
            )
            other = eval_element(detour, self.element, self.binding, n=n).value
            worst = max(worst, abs(direct - other))
        return worst


def f_omega(
    element: AlgebraElement,
    binding,
    cover: CoverSpace,
    x,
    n: int = DEFAULT_GRID,
    certificate: float | None = None,
) -> complex:
    """One-shot endpoint integral; build HigherInvariant for repeated use."""
    invariant = HigherInvariant(element, binding, cover, certificate=certificate)
    return invariant.value(x, n=n)


def _generator_words(rank: int) -> list:
    gens = []
    for index in range(rank):
        word = [0] * rank
        word[index] = 1
        gens.append(tuple(word))
    return gens


def _orbit_safe_points(cover: CoverSpace, support, count: int, seed: int) -> np.ndarray:
    """Sample points whose whole orbit under the support words stays inside."""
    offsets = [cover.offset(word) for word in support]
    kept: list[np.ndarray] = []
    batch = max(4 * count, 64)
    for attempt in range(6):
        pts = cover.domain.sample(batch, seed=seed + 17 * attempt)
        good = np.ones(len(pts), dtype=bool)
        for offset in offsets:
            good &= cover.domain.contains(pts + offset)
        kept.extend(pts[good])
        if len(kept) >= count:
            return np.asarray(kept[:count])
        batch *= 2
    raise ValueError("could not find sample points with in-domain orbits")


def order_check(
    invariant: HigherInvariant,
    n: int = DEFAULT_GRID,
    samples: int = 16,
    seed: int = 0,
    tol: float = 1e-6,
) -> dict:
    """Difference-calculus grading of an invariant's endpoint function.

    Applies every product of degree+1 generator differences at sampled
    points (all must vanish) and, for positive degree, hunts a witness
    product of length degree that does not.  The vanishing tolerance is
    scaled by the witness magnitude so the report is meaningful at any
    normalization.
    """
    cover = invariant.cover
    s = invariant.degree
    gens = _generator_words(cover.rank)
    vanish_tuples = list(itertools.combinations_with_replacement(gens, s + 1))
    witness_tuples = list(itertools.combinations_with_replacement(gens, s))
    support: set = set()
    for tup in vanish_tuples + witness_tuples:
        support |= set(eta(tup, rank=cover.rank).terms)
    pts = _orbit_safe_points(cover, sorted(support), samples, seed)
    fn = invariant.as_function(n=n)

    witness_tuple = None
    witness_value = 0.0
    for tup in witness_tuples:
        if s == 0:
            break
        magnitude = float(
            np.max(np.abs(apply_group_ring(cover, eta(tup, rank=cover.rank), fn, pts)))
        )
        if magnitude > witness_value:
            witness_value = magnitude
            witness_tuple = tup

    vanish_residual = 0.0
    for tup in vanish_tuples:
        residual = float(
            np.max(np.abs(apply_group_ring(cover, eta(tup, rank=cover.rank), fn, pts)))
        )
        vanish_residual = max(vanish_residual, residual)

    scale = max(1.0, witness_value)
    return {
        "degree": s,
        "order_bound": s + 1,
        "samples": int(len(pts)),
        "grid": int(n),
        "tuples_checked": len(vanish_tuples),
        "vanish_residual": vanish_residual,
        "vanish_tolerance": tol * scale,
        "vanishes": bool(vanish_residual <= tol * scale),
        "witness_tuple": witness_tuple,
        "witness_value": witness_value,
        "order_exact": bool(
            s > 0 and vanish_residual <= tol * scale and witness_value > tol * scale
        ),
    }


@dataclass(frozen=True)
class PairingResult:
    matrix: np.ndarray
    rank: int
    etas: tuple
    elements: tuple

    def as_dict(self) -> dict:
        return {
            "rank": int(self.rank),
            "rows": len(self.etas),
            "columns": len(self.elements),
            "matrix": [
                [[float(v.real), float(v.imag)] for v in row] for row in self.matrix
            ],
        }


def chen_pairing(
    etas,
    elements,
    binding,
    cover: CoverSpace,
    n: int = DEFAULT_GRID,
    x0=None,
) -> PairingResult:
    """Loop-pairing matrix: row per group-ring element, column per word element.

    Each entry integrates a word-algebra element over the formal
    combination of base loops realizing a group-ring element; the rank
    of the matrix measures how much of the grading the chosen slices
    see.
    """
    eta_list = tuple(etas)
    elem_list = tuple(elements)
    for g in eta_list:
        if not isinstance(g, GroupRingElement):
            raise TypeError("rows must be GroupRingElements")
        if g.rank != cover.rank:
            raise ValueError("group-ring rank does not match the cover")
    loops: dict[tuple, object] = {}

    def loop_for(word):
        if word not in loops:
            loops[word] = base_loop(cover, word, x=x0)
        return loops[word]

    matrix = np.zeros((len(eta_list), len(elem_list)), dtype=complex)
    for i, g in enumerate(eta_list):
        for j, element in enumerate(elem_list):
            total = 0.0 + 0.0j
            for word, coeff in sorted(g.terms.items()):
                total += coeff * eval_element(loop_for(word), element, binding, n=n).value
            matrix[i, j] = total
    rank = int(np.linalg.matrix_rank(matrix)) if matrix.size else 0
    return PairingResult(matrix=matrix, rank=rank, etas=eta_list, elements=elem_list)


def kernel_inclusion_check(
    invariant: HigherInvariant,
    base_binding,
    n: int = DEFAULT_GRID,
    tol: float = 1e-8,
    samples: int = 16,
    seed: int = 0,
) -> dict:
    """Loop-invisible elements drop one level in the difference grading.

    Precondition: the element pairs to zero against every product of
    degree-many generator differences on base loops (checked here, and a
    violation raises).  Conclusion: the same products of differences
    already annihilate the endpoint function on the cover.
    """
    cover = invariant.cover
    s = invariant.degree
    if s < 1:
        raise ValueError("kernel inclusion concerns elements of positive degree")
    gens = _generator_words(cover.rank)
    slice_tuples = list(itertools.combinations_with_replacement(gens, s))
    pairing = chen_pairing(
        [eta(tup, rank=cover.rank) for tup in slice_tuples],
        [invariant.element],
        base_binding,
        cover,
        n=n,
    )
    loop_residual = float(np.max(np.abs(pairing.matrix))) if pairing.matrix.size else 0.0
    if loop_residual > tol:
        raise ValueError(
            f"loop pairing does not vanish (max {loop_residual:.3e}); "
            "the element is not in the kernel slice"
        )

    support: set = set()
    for tup in slice_tuples:
        support |= set(eta(tup, rank=cover.rank).terms)
    pts = _orbit_safe_points(cover, sorted(support), samples, seed)
    fn = invariant.as_function(n=n)
    difference_residual = 0.0
    for tup in slice_tuples:
        residual = float(
            np.max(np.abs(apply_group_ring(cover, eta(tup, rank=cover.rank), fn, pts)))
        )
        difference_residual = max(difference_residual, residual)
    return {
        "degree": s,
        "loop_residual": loop_residual,
        "difference_residual": difference_residual,
        "tolerance": tol,
        "passed": bool(difference_residual <= tol),
        "samples": int(len(pts)),
    }
