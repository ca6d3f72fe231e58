"""Homotopy-invariance certificates for iterated integral elements.

A degree <= 2 element sum(c_i a_i b_i) + gamma + const has a
homotopy-invariant integral on endpoint-fixed deformations exactly when
every a_i, b_i is closed and sum(c_i a_i ^ b_i) + d(gamma) = 0.  On a
star-shaped domain the primitive operator K inverts d on 2-forms, which
both certifies such elements (gamma = -K of the wedge sum) and extends
to longer words: the defining system attaches to every consecutive
block (i..j) of a closed tuple a 1-form built recursively as -K of the
block's two-part wedge sum, and the block equations certify the lifted
element.  Certification is numeric: residuals are measured on a seeded
sample set against a stated tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .evaluator import eval_element
from .geometry import OneForm, TwoForm, exterior_derivative, is_closed, wedge
from .paths import DEFAULT_GRID, perturb
from .word_algebra import AlgebraElement, Word

__all__ = [
    "check_s2_condition",
    "poincare_primitive",
    "DefiningSystem",
    "build_defining_system",
    "empirical_invariance",
    "DEFAULT_SAMPLES",
]

DEFAULT_SAMPLES = 512
_GL_NODES = 64


def _split_element(element: AlgebraElement, binding):
    """Sort a degree <= 2 element into pair, single, and constant parts."""
    pairs = []
    singles = []
    constant = 0j
    for word, coeff in element.terms.items():
        if len(word) > 2:
            raise ValueError(
                f"element has degree {element.degree}; the closedness "
                "condition here covers degree <= 2 only"
            )
        if len(word) == 2:
            pairs.append((complex(coeff), word[0], word[1]))
        elif len(word) == 1:
            singles.append((complex(coeff), word[0]))
        else:
            constant += complex(coeff)
    for _, *letters in pairs + singles:
        for letter in letters:
            if letter not in binding:
                raise KeyError(f"no 1-form bound to symbol {letter!r}")
    return pairs, singles, constant


def check_s2_condition(
    element: AlgebraElement,
    binding,
    samples=DEFAULT_SAMPLES,
    tol: float = 1e-8,
    seed: int = 0,
) -> float:
    """Residual of the invariance condition for a degree <= 2 element.

    Requires every letter of a two-letter word to be bound to a closed
    form (certified on the same sample set); returns the max sample norm
    of the wedge sum plus d of the single-letter part.  The constant
    term never matters.
    """
    binding = {getattr(k, "id", k): v for k, v in binding.items()}
    pairs, singles, _ = _split_element(element, binding)
    forms = [binding[a] for _, a, b in pairs] + [binding[b] for _, a, b in pairs]
    forms += [binding[s] for _, s in singles]
    if not forms:
        return 0.0
    domain = forms[0].domain
    if any(f.domain is not domain for f in forms):
        raise ValueError("all bound forms must share one domain")
    if np.isscalar(samples):
        points = domain.sample(int(samples), seed=seed)
    else:
        points = np.asarray(samples, dtype=float)
        domain.require_inside(points, "certification samples")

    for coeff, a, b in pairs:
        for letter in (a, b):
            ok, residual = is_closed(binding[letter], tol=tol, samples=points)
            if not ok:
                raise ValueError(
                    f"symbol {letter!r} in a two-letter word is bound to a "
                    f"non-closed form (d residual {residual:.3e} > {tol:.1e})"
                )

    total = None
    for coeff, a, b in pairs:
        term = coeff * wedge(binding[a], binding[b])
        total = term if total is None else total + term
    gamma = None
    for coeff, s in singles:
        term = coeff * binding[s]
        gamma = term if gamma is None else gamma + term
    if gamma is not None:
        dgamma = exterior_derivative(gamma)
        total = dgamma if total is None else total + dgamma
    if total is None:
        return 0.0
    return float(np.max(total.norm_at(points)))


def poincare_primitive(beta: TwoForm, center=None) -> OneForm:
    """A 1-form primitive of a 2-form on a star-shaped domain.

    Contracts beta along straight rays from the center:
    a_k(x) = integral over t in [0,1] of t * sum_i beta_ik(c + t(x-c))
    (x-c)_i, by 64-point Gauss-Legendre quadrature, which is exact for
    polynomial coefficients of any realistic degree.  Rays must stay in
    the domain; the star center default comes from the domain itself.
    Values are cached per sample grid, keyed by the point array bytes.
    """
    domain = beta.domain
    if center is None:
        center = domain.star_center
    if center is None:
        raise ValueError(f"domain {domain.name!r} has no star center")
    center = np.asarray(center, dtype=float)
    nodes, weights = np.polynomial.legendre.leggauss(_GL_NODES)
    ts = (nodes + 1.0) / 2.0
    ws = weights / 2.0
    pairs = beta.pairs
    dim = domain.dim
    cache: dict[bytes, np.ndarray] = {}

    def matrix(points):
        pts = np.asarray(points, dtype=float)
        key = pts.tobytes()
        hit = cache.get(key)
        if hit is not None:
            return hit.copy()
        offsets = pts - center
        rays = center + ts[:, None, None] * offsets[None, :, :]
        flat = rays.reshape(-1, dim)
        inside = np.atleast_1d(domain.contains(flat))
        if not np.all(inside):
            raise ValueError(
                f"ray to the star center leaves the domain {domain.name!r}"
            )
        comps = beta.components_at(flat).reshape(_GL_NODES, len(pts), len(pairs))
        out = np.zeros((len(pts), dim), dtype=np.result_type(comps.dtype, float))
        tw = (ts * ws)[:, None]
        # a_k = sum_i B_ik (x-c)_i with B the antisymmetric component matrix
        for k, (i, j) in enumerate(pairs):
            integral = np.sum(comps[:, :, k] * tw, axis=0)  # (m,)
            out[:, j] += integral * offsets[:, i]
            out[:, i] -= integral * offsets[:, j]
        if len(cache) > 8:
            cache.clear()
        cache[key] = out
        return out.copy()

    return OneForm(domain, matrix_fn=matrix, name=f"K({beta.name})")


@dataclass
class DefiningSystem:
    """Interval forms for a closed tuple, with certification residuals.

    forms[(i, j)] is the 1-form attached to the consecutive block i..j
    (0-based, inclusive); the diagonal holds the input forms.  residuals
    maps each non-diagonal block to the sample norm of its defining
    equation.
    """

    base_forms: tuple
    forms: dict
    residuals: dict
    tol: float
    samples: int
    seed: int
    closed_residuals: tuple = field(default_factory=tuple)

    @property
    def size(self) -> int:
        return len(self.base_forms)

    def form(self, i: int, j: int) -> OneForm:
        return self.forms[(i, j)]

    def report(self) -> dict:
        eqs = []
        for (i, j), residual in sorted(self.residuals.items()):
            eqs.append(
                {
                    "block": f"{i}..{j}",
                    "residual": float(residual),
                    "tolerance": self.tol,
                    "passed": bool(residual <= self.tol),
                }
            )
        return {
            "size": self.size,
            "samples": self.samples,
            "seed": self.seed,
            "closedness_residuals": [float(r) for r in self.closed_residuals],
            "equations": eqs,
            "passed": all(e["passed"] for e in eqs),
        }

    def closed_element(self, prefix: str = "w"):
        """The lifted element and its binding.

        Sums, over all splittings of 0..s-1 into consecutive blocks, the
        word of block symbols; with the defining equations satisfied its
        integral is invariant under endpoint-fixed deformations.
        """
        s = self.size
        binding = {}
        names = {}
        for (i, j), form in self.forms.items():
            name = f"{prefix}{i}" if i == j else f"{prefix}{i}_{j}"
            names[(i, j)] = name
            binding[name] = form
        terms = {}
        for mask in range(2 ** (s - 1)) if s else []:
            splits = [i + 1 for i in range(s - 1) if mask & (1 << i)]
            bounds = [0] + splits + [s]
            word = Word(
                tuple(
                    names[(bounds[k], bounds[k + 1] - 1)]
                    for k in range(len(bounds) - 1)
                )
            )
            terms[word] = terms.get(word, 0) + 1
        return AlgebraElement(terms), binding


def build_defining_system(
    forms,
    center=None,
    tol: float = 1e-6,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> DefiningSystem:
    """Certified interval forms for a tuple of closed 1-forms.

    Each block form is -K applied to the block's wedge sum; every block
    equation (wedge sum plus d of the block form) is measured on the
    sample set and must come in under tol, otherwise the first violated
    block is reported.
    """
    forms = tuple(forms)
    if len(forms) < 2:
        raise ValueError("a defining system needs at least two forms")
    domain = forms[0].domain
    if any(f.domain is not domain for f in forms):
        raise ValueError("all forms must share one domain")
    points = domain.sample(samples, seed=seed)
    closed_residuals = []
    for k, form in enumerate(forms):
        ok, residual = is_closed(form, tol=tol, samples=points)
        closed_residuals.append(residual)
        if not ok:
            raise ValueError(
                f"form {k} ({form.name}) is not closed: residual {residual:.3e}"
            )
    s = len(forms)
    interval_forms = {(i, i): forms[i] for i in range(s)}
    residuals = {}
    for span in range(1, s):
        for i in range(s - span):
            j = i + span
            wedge_sum = None
            for m in range(i, j):
                term = wedge(interval_forms[(i, m)], interval_forms[(m + 1, j)])
                wedge_sum = term if wedge_sum is None else wedge_sum + term
            block = -1 * poincare_primitive(wedge_sum, center=center)
            interval_forms[(i, j)] = block
            residual = float(
                np.max((wedge_sum + exterior_derivative(block)).norm_at(points))
            )
            residuals[(i, j)] = residual
            if residual > tol:
                raise ValueError(
                    f"defining equation for block {i}..{j} failed: "
                    f"residual {residual:.3e} > {tol:.1e}"
                )
    return DefiningSystem(
        base_forms=forms,
        forms=interval_forms,
        residuals=residuals,
        tol=tol,
        samples=samples,
        seed=seed,
        closed_residuals=tuple(closed_residuals),
    )


def empirical_invariance(
    element: AlgebraElement,
    binding,
    base_path,
    family,
    amplitudes,
    n: int = DEFAULT_GRID,
) -> float:
    """Largest deviation of the element's integral across family members.

    Evaluates on the base path and on the perturbed path at each
    amplitude; certified elements stay flat, uncertified ones drift.
    Members must stay inside the domain, so over-large amplitudes raise.
    """
    base_value = eval_element(base_path, element, binding, n=n).value
    worst = 0.0
    for amplitude in amplitudes:
        member = perturb(family, amplitude)
        value = eval_element(member, element, binding, n=n).value
        worst = max(worst, abs(value - base_value))
    return worst
