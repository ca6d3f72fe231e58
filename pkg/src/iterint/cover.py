"""Universal covers with translation deck actions.

Both bundled covers have a free abelian deck group acting by lattice
translations: a strip winding onto an annulus (rank 1) and a plane
wrapping onto a torus chart (rank 2).  Group elements are exponent
tuples over the generators; the group ring carries integer
coefficients.  The module also provides the signed generator products
whose loop integrals grade by word length, and a constructive
coboundary solver driven by a partition of unity over the deck orbit.

Action conventions differ between the two halves of the module and are
stated where used: `apply_group_ring` evaluates functions at translated
points, (gamma.f)(x) = f(gamma x), while cocycles and the coboundary
solver use (gamma f)(x) = f(gamma^{-1} x).
"""

from __future__ import annotations

import configparser
import itertools
import operator
from dataclasses import dataclass

import numpy as np

from .evaluator import iterint
from .geometry import ChartDomain, SmoothMap
from .paths import compose, constant_path, map_path, segment_path
from .word_algebra import Word

__all__ = [
    "CoverSpace",
    "Cocycle",
    "EtaVanishingResult",
    "GroupRingElement",
    "apply_group_ring",
    "base_loop",
    "check_eta_vanishing",
    "eta",
    "group_path",
    "load_cover_registry",
    "solve_coboundary",
    "strip_cover",
    "torus_cover",
]

_PROJECTION_TOL = 1e-8
_PARTITION_TOL = 1e-10
_SEGMENT_CHECK = 129


def _group_word(word, rank: int) -> tuple:
    if isinstance(word, GroupRingElement):
        raise TypeError("expected a single group element, got a ring element")
    try:
        exponents = tuple(word)
    except TypeError:
        exponents = (word,)
    out = []
    for k in exponents:
        if isinstance(k, bool):
            raise TypeError("exponents must be integers, not booleans")
        out.append(operator.index(k))
    if len(out) != rank:
        raise ValueError(f"group word needs {rank} exponents, got {len(out)}")
    return tuple(out)


def _int_coefficient(c) -> int:
    if isinstance(c, bool):
        raise TypeError("coefficients must be integers, not booleans")
    return operator.index(c)


class GroupRingElement:
    """Integer combination of deck transformations.

    Terms map exponent tuples to nonzero integers; multiplication adds
    exponents (the deck groups here are free abelian).  The
    augmentation is the coefficient sum, and the elements with
    augmentation zero form the ideal whose powers grade invariants.
    """

    __slots__ = ("rank", "terms")

    def __init__(self, rank: int, terms=None):
        rank = int(rank)
        if rank < 1:
            raise ValueError("rank must be at least 1")
        clean: dict[tuple, int] = {}
        for word, coeff in (terms or {}).items():
            key = _group_word(word, rank)
            value = clean.get(key, 0) + _int_coefficient(coeff)
            clean[key] = value
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "terms", {w: c for w, c in clean.items() if c != 0})

    def __setattr__(self, name, value):
        raise AttributeError("GroupRingElement is immutable")

    @classmethod
    def identity(cls, rank: int) -> "GroupRingElement":
        return cls(rank, {(0,) * rank: 1})

    @classmethod
    def generator(cls, index: int, rank: int) -> "GroupRingElement":
        word = [0] * rank
        word[index] = 1
        return cls(rank, {tuple(word): 1})

    @property
    def augmentation(self) -> int:
        return sum(self.terms.values())

    def coefficient(self, word) -> int:
        return self.terms.get(_group_word(word, self.rank), 0)

    def support(self) -> list:
        return sorted(self.terms)

    def _require_same_rank(self, other: "GroupRingElement"):
        if self.rank != other.rank:
            raise ValueError("mixed deck-group ranks")

    def __add__(self, other):
        if isinstance(other, GroupRingElement):
            self._require_same_rank(other)
            terms = dict(self.terms)
            for word, coeff in other.terms.items():
                terms[word] = terms.get(word, 0) + coeff
            return GroupRingElement(self.rank, terms)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, GroupRingElement):
            return self + (-1) * other
        return NotImplemented

    def __neg__(self):
        return (-1) * self

    def __mul__(self, other):
        if isinstance(other, GroupRingElement):
            self._require_same_rank(other)
            terms: dict[tuple, int] = {}
            for u, a in self.terms.items():
                for v, b in other.terms.items():
                    key = tuple(i + j for i, j in zip(u, v))
                    terms[key] = terms.get(key, 0) + a * b
            return GroupRingElement(self.rank, terms)
        coeff = _int_coefficient(other)
        return GroupRingElement(
            self.rank, {w: coeff * c for w, c in self.terms.items()}
        )

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, GroupRingElement)
            and self.rank == other.rank
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.rank, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        if not self.terms:
            return "GroupRingElement(0)"
        bits = [f"{c}*g{list(w)}" for w, c in sorted(self.terms.items())]
        return "GroupRingElement(" + " + ".join(bits) + ")"


def eta(generators, rank: int | None = None) -> GroupRingElement:
    """Signed expansion of the product of (generator - 1) factors.

    With s factors the expanded product has one signed term per subset
    of the factors; its augmentation vanishes for s >= 1, as does the
    augmentation of every partial product.
    """
    gens = list(generators)
    if rank is None:
        if not gens:
            raise ValueError("rank is required for an empty product")
        rank = len(_group_word(gens[0], len(tuple(gens[0]))))
    out = GroupRingElement.identity(rank)
    one = GroupRingElement.identity(rank)
    for g in gens:
        factor = GroupRingElement(rank, {_group_word(g, rank): 1}) - one
        out = out * factor
    return out


def _bump_profile(t: np.ndarray) -> np.ndarray:
    # C^2 cutoff with support |t| < 1
    return np.clip(1.0 - t * t, 0.0, None) ** 3


class CoverSpace:
    """Covering of a base chart by lattice translations.

    The deck group is generated by the rows of `lattice`; `project`
    carries cover points to the base and intertwines every generator
    with the identity there.  A bump over the fundamental cell,
    normalized by its own orbit sum, provides the partition function
    used by the coboundary solver.  Construction fails if the sampled
    projection does not descend or the partition does not sum to one.
    """

    def __init__(
        self,
        domain: ChartDomain,
        base_domain: ChartDomain,
        project: SmoothMap,
        lattice,
        base_lift,
        bump_center=None,
        bump_width: float = 0.8,
        name: str = "cover",
    ):
        self.domain = domain
        self.base_domain = base_domain
        self.project = project
        self.lattice = np.asarray(lattice, dtype=float)
        if self.lattice.ndim != 2 or self.lattice.shape[1] != domain.dim:
            raise ValueError("lattice must be (rank, dim)")
        self.rank = self.lattice.shape[0]
        if np.linalg.matrix_rank(self.lattice) != self.rank:
            raise ValueError("lattice rows must be independent")
        self.base_lift = np.asarray(base_lift, dtype=float)
        domain.require_inside(self.base_lift, "base lift")
        self.base_point = project(self.base_lift)
        base_domain.require_inside(self.base_point, "projected base point")
        center = self.base_lift if bump_center is None else bump_center
        self.bump_center = np.asarray(center, dtype=float)
        self.bump_width = float(bump_width)
        if not 0.5 < self.bump_width <= 1.0:
            raise ValueError("bump width must lie in (1/2, 1] lattice units")
        self.name = name
        gram = self.lattice @ self.lattice.T
        self._coord_matrix = np.linalg.solve(gram, self.lattice)
        self._validate()

    def _validate(self, count: int = 128, seed: int = 0):
        pts = self.domain.sample(count, seed=seed)
        base = self.project(pts)
        for index in range(self.rank):
            gen = [0] * self.rank
            gen[index] = 1
            moved = self.project(self.act(tuple(gen), pts))
            gap = np.max(np.abs(moved - base))
            if gap > _PROJECTION_TOL:
                raise ValueError(
                    f"cover {self.name!r}: generator {index} does not descend "
                    f"through the projection (gap {gap:.3e})"
                )
        report = self.partition_report(samples=count, seed=seed)
        if report["max_deviation"] > _PARTITION_TOL:
            raise ValueError(
                f"cover {self.name!r}: partition of unity sums to 1 only "
                f"within {report['max_deviation']:.3e}"
            )

    # --- deck action ------------------------------------------------

    def offset(self, word) -> np.ndarray:
        word = _group_word(word, self.rank)
        return np.asarray(word, dtype=float) @ self.lattice

    def act(self, word, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts + self.offset(word)

    def lattice_coords(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return (pts - self.bump_center) @ self._coord_matrix.T

    # --- partition of unity -----------------------------------------

    def _bump_on_coords(self, coords: np.ndarray) -> np.ndarray:
        return np.prod(_bump_profile(coords / self.bump_width), axis=-1)

    def _support_shifts(self, coords: np.ndarray) -> list:
        flat = coords.reshape(-1, self.rank)
        lo = np.ceil(flat.min(axis=0) - self.bump_width - 1e-12).astype(int)
        hi = np.floor(flat.max(axis=0) + self.bump_width + 1e-12).astype(int)
        axes = [range(a, b + 1) for a, b in zip(lo, hi)]
        return [np.asarray(m, dtype=float) for m in itertools.product(*axes)]

    def bump(self, points) -> np.ndarray:
        return self._bump_on_coords(np.atleast_2d(self.lattice_coords(points)))

    def partition(self, points) -> np.ndarray:
        """Bump normalized by its orbit sum; the sum over the orbit is 1."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        coords = np.atleast_2d(self.lattice_coords(pts))
        total = np.zeros(len(coords))
        for shift in self._support_shifts(coords):
            total += self._bump_on_coords(coords - shift)
        if np.any(total <= 0.0):
            raise ValueError("bump translates fail to cover the sampled points")
        out = self._bump_on_coords(coords) / total
        return out[0] if single else out

    def partition_report(self, samples: int = 512, seed: int = 0) -> dict:
        pts = self.domain.sample(samples, seed=seed)
        coords = self.lattice_coords(pts)
        shifts = self._support_shifts(coords)
        sums = np.zeros(len(pts))
        active = np.zeros(len(pts), dtype=int)
        for shift in shifts:
            # each term recomputes its own normalization at tau^{-1} x
            term = self.partition(pts - shift @ self.lattice)
            sums += term
            active += term > 0.0
        return {
            "samples": int(samples),
            "seed": int(seed),
            "max_deviation": float(np.max(np.abs(sums - 1.0))),
            "max_active_terms": int(np.max(active)),
        }

    def __repr__(self):
        return (
            f"CoverSpace({self.name!r}: {self.domain.name!r} -> "
            f"{self.base_domain.name!r}, rank {self.rank})"
        )


# --- paths realizing deck words ------------------------------------------


def _checked_segment(cover: CoverSpace, start, end):
    seg = segment_path(cover.domain, start, end)
    ts = np.linspace(0.0, 1.0, _SEGMENT_CHECK)
    inside = cover.domain.contains(seg.point(ts))
    if not np.all(inside):
        raise ValueError(
            f"cover {cover.name!r}: segment from {np.asarray(start).tolist()} "
            f"to {np.asarray(end).tolist()} exits the cover domain"
        )
    return seg


def group_path(cover: CoverSpace, word, x=None):
    """Path in the cover from x to its translate under the deck word.

    Straight segment when the chord stays inside; otherwise the word is
    split into elementary generator steps and the legs are composed.
    Raises when even the subdivided legs leave the domain.
    """
    word = _group_word(word, cover.rank)
    start = np.asarray(cover.base_lift if x is None else x, dtype=float)
    cover.domain.require_inside(start, "group path start")
    if not any(word):
        return constant_path(cover.domain, start)
    end = start + cover.offset(word)
    try:
        return _checked_segment(cover, start, end)
    except ValueError:
        pass
    steps = []
    for axis, count in enumerate(word):
        step = [0] * cover.rank
        step[axis] = 1 if count > 0 else -1
        steps.extend([tuple(step)] * abs(count))
    path = None
    current = start
    for step in steps:
        target = current + cover.offset(step)
        leg = _checked_segment(cover, current, target)
        path = leg if path is None else compose(path, leg)
        current = target
    return path


def base_loop(cover: CoverSpace, word, x=None):
    """Projection of a deck-word path: a loop at the projected start."""
    return map_path(cover.project, group_path(cover, word, x=x))


# --- loop integrals graded by difference products -------------------------


@dataclass(frozen=True)
class EtaVanishingResult:
    value: complex
    expected: complex
    residual: float
    differences: int
    length: int

    @property
    def passed(self) -> bool:
        return bool(self.residual <= 1e-8 * max(1.0, abs(self.expected)))


def check_eta_vanishing(
    cover: CoverSpace,
    generators,
    word,
    binding,
    n: int = 1024,
    x0=None,
) -> EtaVanishingResult:
    """Integral of a word over the signed generator-product combination.

    Short words (length below the number of difference factors) must
    integrate to zero; words of matching length factor into the product
    of single-letter integrals over the individual generator loops.
    """
    gens = [_group_word(g, cover.rank) for g in generators]
    s = len(gens)
    w = word if isinstance(word, Word) else Word(tuple(word))
    r = len(w)
    if r > s:
        raise ValueError(
            "no grading statement for words longer than the difference count"
        )
    element = eta(gens, rank=cover.rank) if gens else GroupRingElement.identity(cover.rank)
    start = None if x0 is None else np.asarray(x0, dtype=float)
    loops: dict[tuple, object] = {}

    def loop_for(gw):
        if gw not in loops:
            loops[gw] = base_loop(cover, gw, x=start)
        return loops[gw]

    value = 0.0
    for gw, coeff in sorted(element.terms.items()):
        value += coeff * iterint(loop_for(gw), w, binding, n=n).value
    if r == s:
        expected = 1.0
        for g, letter in zip(gens, w):
            expected *= iterint(loop_for(g), Word((letter,)), binding, n=n).value
    else:
        expected = 0.0
    return EtaVanishingResult(
        value=complex(value),
        expected=complex(expected),
        residual=float(abs(value - expected)),
        differences=s,
        length=r,
    )


def apply_group_ring(cover: CoverSpace, element: GroupRingElement, fn, points):
    """Weighted orbit sum of a cover function: sum of c * f(gamma x).

    The action here evaluates at the translated point, matching the
    difference calculus used by the order checks.
    """
    if element.rank != cover.rank:
        raise ValueError("element rank does not match the cover")
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    pieces = [
        coeff * np.asarray(fn(cover.act(word, pts)))
        for word, coeff in sorted(element.terms.items())
    ]
    out = np.sum(pieces, axis=0) if pieces else np.zeros(len(pts))
    return out[0] if single else out


# --- cocycles and the coboundary solver -----------------------------------


def _zero_field(points):
    return np.zeros(len(np.atleast_2d(np.asarray(points, dtype=float))))


class Cocycle:
    """Deck-group cocycle valued in functions on the cover.

    Stores one function per generator and extends to arbitrary words
    through the cocycle relation, folded left to right; the group acts
    by (gamma f)(x) = f(gamma^{-1} x).  Free abelian deck groups make
    the extension order-independent exactly when the relation holds,
    which `relation_residual` measures.
    """

    def __init__(self, cover: CoverSpace, generator_values):
        self.cover = cover
        values = tuple(generator_values)
        if len(values) != cover.rank:
            raise ValueError("need one generator value per lattice row")
        self._generator_values = values

    def _step_value(self, step: tuple):
        axis = max(range(self.cover.rank), key=lambda i: abs(step[i]))
        raw = self._generator_values[axis]
        if step[axis] > 0:
            return lambda pts: np.asarray(raw(pts), dtype=float)
        offset = self.cover.offset(tuple(-k for k in step))
        # alpha(g^{-1})(x) = -alpha(g)(g x)
        return lambda pts: -np.asarray(raw(np.atleast_2d(pts) + offset), dtype=float)

    def value(self, word):
        """Function alpha(word), extended by alpha(g.w) = g.alpha(w) + alpha(g)."""
        word = _group_word(word, self.cover.rank)
        steps = []
        for axis, count in enumerate(word):
            step = [0] * self.cover.rank
            step[axis] = 1 if count > 0 else -1
            steps.extend([tuple(step)] * abs(count))
        if not steps:
            return _zero_field

        def build(remaining):
            if not remaining:
                return _zero_field
            head, rest = remaining[0], remaining[1:]
            head_fn = self._step_value(head)
            tail_fn = build(rest)
            offset = self.cover.offset(head)

            def fn(points):
                pts = np.atleast_2d(np.asarray(points, dtype=float))
                return tail_fn(pts - offset) + head_fn(pts)

            return fn

        return build(tuple(steps))

    def relation_residual(self, pairs, points) -> float:
        """Worst violation of alpha(g t)(x) = alpha(t)(g^{-1} x) + alpha(g)(x)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        worst = 0.0
        for left, right in pairs:
            left = _group_word(left, self.cover.rank)
            right = _group_word(right, self.cover.rank)
            combined = tuple(a + b for a, b in zip(left, right))
            lhs = self.value(combined)(pts)
            rhs = self.value(right)(pts - self.cover.offset(left)) + self.value(left)(pts)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst


def _relation_test_pairs(cover: CoverSpace, seed: int):
    pairs = []
    for i in range(cover.rank):
        for j in range(cover.rank):
            gi = [0] * cover.rank
            gj = [0] * cover.rank
            gi[i] = 1
            gj[j] = 1
            pairs.append((tuple(gi), tuple(gj)))
    rng = np.random.default_rng(seed)
    for _ in range(3):
        left = tuple(int(k) for k in rng.integers(-2, 3, size=cover.rank))
        right = tuple(int(k) for k in rng.integers(-2, 3, size=cover.rank))
        pairs.append((left, right))
    return pairs


def solve_coboundary(
    alpha: Cocycle,
    samples: int = 256,
    seed: int = 0,
    relation_tol: float = 1e-8,
    partition_tol: float = _PARTITION_TOL,
):
    """Function whose deck differences reproduce the cocycle.

    Builds f(x) = -sum over tau of alpha(tau)(x) u(tau^{-1} x) with u
    the cover's partition function; then f(gamma^{-1} x) - f(x) equals
    alpha(gamma)(x).  Refuses cocycles violating the relation on tested
    pairs and partitions that fail to sum to one.
    """
    cover = alpha.cover
    report = cover.partition_report(samples=samples, seed=seed)
    if report["max_deviation"] > partition_tol:
        raise ValueError(
            f"partition of unity sum is off by {report['max_deviation']:.3e}"
        )
    pts = cover.domain.sample(samples, seed=seed)
    residual = alpha.relation_residual(_relation_test_pairs(cover, seed), pts)
    if residual > relation_tol:
        raise ValueError(f"cocycle relation violated by {residual:.3e}")

    def solution(points):
        raw = np.asarray(points, dtype=float)
        single = raw.ndim == 1
        flat = np.atleast_2d(raw)
        coords = cover.lattice_coords(flat)
        out = np.zeros(len(flat))
        for shift in cover._support_shifts(coords):
            word = tuple(int(k) for k in shift)
            weight = cover.partition(flat - cover.offset(word))
            if not np.any(weight):
                continue
            out -= np.asarray(alpha.value(word)(flat), dtype=float) * weight
        return out[0] if single else out

    for index in range(cover.rank):
        gen = [0] * cover.rank
        gen[index] = 1
        gen = tuple(gen)
        check = solution(pts - cover.offset(gen)) - solution(pts)
        gap = float(np.max(np.abs(check - alpha.value(gen)(pts))))
        if gap > max(relation_tol, 10.0 * residual):
            raise ValueError(
                f"coboundary identity fails for generator {index} by {gap:.3e}"
            )
    return solution


# --- bundled covers --------------------------------------------------------


def strip_cover(
    strip_domain: ChartDomain, base_domain: ChartDomain, bump_width: float = 0.8
) -> CoverSpace:
    """Strip (angle, radius) winding onto an annulus; deck group Z."""

    def fn(pts):
        angle, radius = pts[:, 0], pts[:, 1]
        return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)

    def jacobian(pts):
        angle, radius = pts[:, 0], pts[:, 1]
        J = np.empty((len(pts), 2, 2))
        J[:, 0, 0] = -radius * np.sin(angle)
        J[:, 0, 1] = np.cos(angle)
        J[:, 1, 0] = radius * np.cos(angle)
        J[:, 1, 1] = np.sin(angle)
        return J

    project = SmoothMap(strip_domain, base_domain, fn, jacobian, name="wind")
    return CoverSpace(
        domain=strip_domain,
        base_domain=base_domain,
        project=project,
        lattice=[[2.0 * np.pi, 0.0]],
        base_lift=(0.0, 1.0),
        bump_width=bump_width,
        name="strip-cover",
    )


def torus_cover(plane_domain: ChartDomain, bump_width: float = 0.8) -> CoverSpace:
    """Plane wrapping onto the unit fundamental square; deck group Z^2."""

    def fn(pts):
        return pts - np.floor(pts)

    def jacobian(pts):
        return np.broadcast_to(np.eye(2), (len(pts), 2, 2)).copy()

    project = SmoothMap(plane_domain, plane_domain, fn, jacobian, name="wrap")
    return CoverSpace(
        domain=plane_domain,
        base_domain=plane_domain,
        project=project,
        lattice=np.eye(2),
        base_lift=(0.5, 0.5),
        bump_width=bump_width,
        name="plane-cover",
    )


# --- registry ---------------------------------------------------------------


def _parse_number(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        pass
    import sympy as sp

    expr = sp.parse_expr(text.replace("^", "**"), local_dict={"pi": sp.pi})
    if expr.free_symbols:
        raise ValueError(f"not a constant: {text!r}")
    return float(expr)


def _parse_lattice(text: str) -> list:
    rows = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            rows.append([_parse_number(v) for v in chunk.split()])
    return rows


def load_cover_registry(path) -> dict:
    """Named covers from a structured text file.

    Sections are `[cover NAME]` with keys: projection (wind or wrap),
    domain and base (bundled domain names), lattice (rows separated by
    semicolons), lift, and optional center and width.
    """
    from .fixtures import get_domain

    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"cannot read cover registry {path!r}")
    covers: dict[str, CoverSpace] = {}
    for section in parser.sections():
        if not section.startswith("cover "):
            raise ValueError(f"unexpected section {section!r} in {path!r}")
        name = section[len("cover "):].strip()
        body = parser[section]
        known = {"projection", "domain", "base", "lattice", "lift", "center", "width"}
        unknown = set(body) - known
        if unknown:
            raise ValueError(f"unknown keys {sorted(unknown)} in {section!r}")
        projection = body.get("projection", "")
        domain = get_domain(body["domain"])
        width = _parse_number(body.get("width", "0.8"))
        if projection == "wind":
            base = get_domain(body["base"])
            cover = strip_cover(domain, base, bump_width=width)
        elif projection == "wrap":
            cover = torus_cover(domain, bump_width=width)
        else:
            raise ValueError(f"unknown projection {projection!r} in {section!r}")
        if "lattice" in body:
            stated = np.asarray(_parse_lattice(body["lattice"]), dtype=float)
            if stated.shape != cover.lattice.shape or not np.allclose(
                stated, cover.lattice, atol=1e-12
            ):
                raise ValueError(f"lattice in {section!r} does not match its projection")
        if "lift" in body:
            stated = np.asarray(_parse_lattice(body["lift"]), dtype=float).reshape(-1)
            if not np.allclose(stated, cover.base_lift, atol=1e-12):
                raise ValueError(f"lift in {section!r} does not match its projection")
        covers[name] = cover
    if not covers:
        raise ValueError(f"no cover sections in {path!r}")
    return covers
