"""Chart domains and differential 1- and 2-forms with numeric coefficients.

A domain is an open subset of R^n given by a vectorized membership
predicate plus a bounding box used for low-discrepancy sampling.  Forms
carry coefficient callables that accept an (..., n) array of points and
return an (...,) array of (possibly complex) values.  Closed-form
coefficients can be built from a restricted expression grammar, in which
case analytic partial derivatives come along for free; otherwise the
exterior derivative falls back to central differences.
"""

from __future__ import annotations

import configparser
from itertools import combinations

import numpy as np
import sympy as sp
from scipy.stats import qmc

__all__ = [
    "ChartDomain",
    "OneForm",
    "TwoForm",
    "SmoothMap",
    "wedge",
    "exterior_derivative",
    "is_closed",
    "pullback",
    "rotation_map",
    "scaling_map",
    "parse_expression",
    "coordinate_names",
    "load_form_registry",
    "FD_STEP",
]

FD_STEP = 1e-5  # central-difference step for d on black-box coefficients


class ChartDomain:
    """Open subset of R^n with membership test and seeded sampling.

    bounds is a (lo, hi) pair of length-n sequences; sampling draws a
    scrambled Halton sequence in the box and keeps points that pass the
    membership predicate.  A star center, when given, is validated at
    construction by checking segments from the center to a sample set.
    """

    def __init__(self, dim, membership, bounds, star_center=None, name="domain"):
        self.dim = int(dim)
        self._membership = membership
        lo, hi = bounds
        self.bounds = (np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
        if self.bounds[0].shape != (self.dim,) or self.bounds[1].shape != (self.dim,):
            raise ValueError("bounds must match the dimension")
        if not np.all(self.bounds[0] < self.bounds[1]):
            raise ValueError("empty bounding box")
        self.name = name
        self.star_center = None
        if star_center is not None:
            center = np.asarray(star_center, dtype=float)
            if center.shape != (self.dim,):
                raise ValueError("star center must be a point of the domain")
            self.star_center = center
            self._check_star_shape()

    def _check_star_shape(self, count=128, fractions=17):
        pts = self.sample(count, seed=0)
        ts = np.linspace(0.0, 1.0, fractions)
        seg = self.star_center + ts[:, None, None] * (pts - self.star_center)
        ok = self.contains(seg.reshape(-1, self.dim))
        if not np.all(ok):
            raise ValueError(
                f"domain {self.name!r}: segment to the star center leaves the domain"
            )

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        if pts.shape[-1] != self.dim:
            raise ValueError(f"points must have dimension {self.dim}")
        out = np.asarray(self._membership(pts), dtype=bool)
        return out[0] if single else out

    def require_inside(self, points, what="points"):
        ok = np.atleast_1d(self.contains(points))
        if not np.all(ok):
            bad = np.asarray(points, dtype=float).reshape(-1, self.dim)[~ok][0]
            raise ValueError(
                f"{what} leave the domain {self.name!r}, first offender {bad.tolist()}"
            )

    def sample(self, count, seed=0) -> np.ndarray:
        """count domain points from a scrambled Halton sequence."""
        engine = qmc.Halton(d=self.dim, scramble=True, seed=seed)
        lo, hi = self.bounds
        kept = []
        total = 0
        for _ in range(64):
            raw = engine.random(max(count, 64))
            pts = lo + raw * (hi - lo)
            pts = pts[self.contains(pts)]
            if len(pts):
                kept.append(pts)
                total += len(pts)
            if total >= count:
                break
        else:
            raise ValueError(
                f"domain {self.name!r}: sampling box rejects almost all points"
            )
        return np.concatenate(kept, axis=0)[:count]

    def __repr__(self):
        return f"ChartDomain({self.name!r}, dim={self.dim})"


# ---------------------------------------------------------------------------
# expression grammar


_ALLOWED_FUNCTIONS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "exp": sp.exp,
    "log": sp.log,
    "atan2": sp.atan2,
    "sqrt": sp.sqrt,
}
_CONSTANTS = {"pi": sp.pi, "E": sp.E, "I": sp.I}
_ALIASES = {1: (), 2: ("x", "y"), 3: ("x", "y", "z")}


def coordinate_names(dim: int) -> list[str]:
    return [f"x{k + 1}" for k in range(dim)]


def _coordinate_symbols(dim: int):
    return [sp.Symbol(n, real=True) for n in coordinate_names(dim)]


def parse_expression(text: str, dim: int, extra: dict | None = None) -> sp.Expr:
    """Parse a coefficient expression over x1..xn (aliases x, y, z).

    The grammar is arithmetic (+, -, *, /, ** and ^), the functions sin,
    cos, exp, log, atan2, sqrt, and the constants pi, E, I.  Anything
    else raises ValueError.
    """
    from sympy.parsing.sympy_parser import (
        convert_xor,
        parse_expr,
        standard_transformations,
    )

    coords = _coordinate_symbols(dim)
    local = {s.name: s for s in coords}
    for alias, target in zip(_ALIASES.get(dim, ()), coords):
        local[alias] = target
    local.update(_ALLOWED_FUNCTIONS)
    local.update(_CONSTANTS)
    if extra:
        local.update(extra)
    # minimal global namespace: just the constructors the tokenizer emits,
    # so unknown names surface as symbols or undefined functions below
    builders = {
        "Integer": sp.Integer,
        "Float": sp.Float,
        "Rational": sp.Rational,
        "Symbol": sp.Symbol,
        "Function": sp.Function,
    }
    try:
        expr = parse_expr(
            text,
            local_dict=local,
            global_dict=builders,
            transformations=standard_transformations + (convert_xor,),
            evaluate=True,
        )
    except Exception as exc:
        raise ValueError(f"cannot parse expression {text!r}: {exc}") from None
    if not isinstance(expr, sp.Expr):
        raise ValueError(f"expression {text!r} is not a scalar formula")
    allowed_symbols = set(coords) | {v for v in (extra or {}).values() if isinstance(v, sp.Symbol)}
    stray = expr.free_symbols - allowed_symbols
    if stray:
        names = ", ".join(sorted(s.name for s in stray))
        raise ValueError(f"unknown names in expression {text!r}: {names}")
    undefined = expr.atoms(sp.core.function.AppliedUndef)
    if undefined:
        names = ", ".join(sorted(f.func.__name__ for f in undefined))
        raise ValueError(f"unknown functions in expression {text!r}: {names}")
    return expr


def _lambdify_on_points(expr: sp.Expr, dim: int):
    coords = _coordinate_symbols(dim)
    fn = sp.lambdify(coords, expr, modules="numpy")

    def call(points):
        pts = np.asarray(points, dtype=float)
        vals = np.asarray(fn(*(pts[..., k] for k in range(dim))))
        if not np.issubdtype(vals.dtype, np.inexact):
            vals = vals.astype(float)
        if vals.shape != pts.shape[:-1]:
            vals = np.broadcast_to(vals, pts.shape[:-1]).copy()
        return vals

    return call


# ---------------------------------------------------------------------------
# forms


class OneForm:
    """A 1-form sum(a_i dx_i) with callable coefficients.

    Either per-component callables or a joint matrix callable (points ->
    (m, n) coefficient matrix) may be supplied.  Analytic partials, when
    present, are used by the exterior derivative; otherwise it falls
    back to finite differences.
    """

    def __init__(
        self,
        domain,
        coefficients=None,
        partials=None,
        symbol=None,
        name=None,
        matrix_fn=None,
    ):
        self.domain = domain
        if (coefficients is None) == (matrix_fn is None):
            raise ValueError("give either per-component coefficients or matrix_fn")
        if coefficients is not None:
            coefficients = list(coefficients)
            if len(coefficients) != domain.dim:
                raise ValueError("one coefficient per coordinate")
        self._coefficients = coefficients
        self._matrix_fn = matrix_fn
        self.partials = partials  # partials[i][j] = d a_i / d x_j, or None
        self.symbol = symbol
        self.name = name or symbol or "omega"

    @classmethod
    def from_expressions(cls, domain, expressions, symbol=None, name=None):
        """Build from coefficient expression strings; partials come from
        symbolic differentiation."""
        dim = domain.dim
        exprs = [
            e if isinstance(e, sp.Expr) else parse_expression(str(e), dim)
            for e in expressions
        ]
        if len(exprs) != dim:
            raise ValueError("one expression per coordinate")
        coords = _coordinate_symbols(dim)
        coeffs = [_lambdify_on_points(e, dim) for e in exprs]
        parts = [
            [_lambdify_on_points(sp.diff(e, c), dim) for c in coords] for e in exprs
        ]
        form = cls(domain, coeffs, partials=parts, symbol=symbol, name=name)
        form.expressions = exprs
        return form

    def coefficients_at(self, points) -> np.ndarray:
        """(m, n) matrix of coefficient values at the given points."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        if self._matrix_fn is not None:
            mat = np.asarray(self._matrix_fn(pts))
        else:
            cols = [np.asarray(a(pts)) for a in self._coefficients]
            mat = np.stack(cols, axis=-1)
        return mat[0] if single else mat

    def apply(self, points, vectors) -> np.ndarray:
        """Pair the form with tangent vectors: sum_i a_i(p) v_i."""
        mat = self.coefficients_at(points)
        return np.sum(mat * np.asarray(vectors), axis=-1)

    def __add__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        if other.domain is not self.domain:
            raise ValueError("forms live on different domains")

        def matrix(points):
            return self.coefficients_at(points) + other.coefficients_at(points)

        return OneForm(self.domain, matrix_fn=matrix, name=f"({self.name}+{other.name})")

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, scalar):
        def matrix(points):
            return scalar * self.coefficients_at(points)

        return OneForm(self.domain, matrix_fn=matrix, name=f"({scalar}*{self.name})")

    __rmul__ = __mul__

    def __neg__(self):
        return (-1) * self

    def __repr__(self):
        return f"OneForm({self.name!r} on {self.domain.name!r})"


def _pair_index(dim):
    return list(combinations(range(dim), 2))


class TwoForm:
    """An antisymmetric 2-form, stored as components over index pairs i<j.

    components_fn(points) returns an (m, P) array aligned with
    itertools.combinations(range(n), 2).
    """

    def __init__(self, domain, components_fn, name="beta"):
        self.domain = domain
        self.pairs = _pair_index(domain.dim)
        self._components_fn = components_fn
        self.name = name

    @classmethod
    def from_component_functions(cls, domain, funcs: dict, name="beta"):
        """funcs maps (i, j) with i<j to a callable; missing pairs are zero."""
        pairs = _pair_index(domain.dim)
        for key in funcs:
            if key not in pairs:
                raise ValueError(f"component key {key} is not an ordered pair")

        def components(points):
            pts = np.asarray(points, dtype=float)
            m = pts.shape[0]
            cols = []
            for pair in pairs:
                fn = funcs.get(pair)
                cols.append(np.zeros(m) if fn is None else np.asarray(fn(pts)))
            return np.stack(cols, axis=-1)

        return cls(domain, components, name=name)

    def components_at(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        out = np.asarray(self._components_fn(pts))
        return out[0] if single else out

    def norm_at(self, points) -> np.ndarray:
        """Max absolute component value, pointwise."""
        comps = self.components_at(points)
        return np.max(np.abs(comps), axis=-1)

    def apply(self, points, u, v) -> np.ndarray:
        """Evaluate on a pair of tangent vectors."""
        comps = self.components_at(points)
        u = np.asarray(u)
        v = np.asarray(v)
        total = 0
        for k, (i, j) in enumerate(self.pairs):
            total = total + comps[..., k] * (u[..., i] * v[..., j] - u[..., j] * v[..., i])
        return total

    def __add__(self, other):
        if not isinstance(other, TwoForm):
            return NotImplemented
        if other.domain is not self.domain:
            raise ValueError("forms live on different domains")

        def components(points):
            return self.components_at(points) + other.components_at(points)

        return TwoForm(self.domain, components, name=f"({self.name}+{other.name})")

    def __mul__(self, scalar):
        def components(points):
            return scalar * self.components_at(points)

        return TwoForm(self.domain, components, name=f"({scalar}*{self.name})")

    __rmul__ = __mul__

    def __neg__(self):
        return (-1) * self

    def __repr__(self):
        return f"TwoForm({self.name!r} on {self.domain.name!r})"


def wedge(alpha: OneForm, beta: OneForm) -> TwoForm:
    """Wedge product of two 1-forms on the same domain."""
    if alpha.domain is not beta.domain:
        raise ValueError("wedge needs both forms on the same domain")
    pairs = _pair_index(alpha.domain.dim)

    def components(points):
        a = alpha.coefficients_at(points)
        b = beta.coefficients_at(points)
        cols = [a[..., i] * b[..., j] - a[..., j] * b[..., i] for i, j in pairs]
        return np.stack(cols, axis=-1)

    return TwoForm(alpha.domain, components, name=f"({alpha.name}^{beta.name})")


def _coefficient_jacobian(form: OneForm, points, h: float) -> np.ndarray:
    """D[k, :, i] ~ d a_i / d x_k at each point, by central differences."""
    pts = np.asarray(points, dtype=float)
    dim = form.domain.dim
    rows = []
    for k in range(dim):
        step = np.zeros(dim)
        step[k] = h
        plus = pts + step
        minus = pts - step
        form.domain.require_inside(plus, "finite-difference probes")
        form.domain.require_inside(minus, "finite-difference probes")
        rows.append((form.coefficients_at(plus) - form.coefficients_at(minus)) / (2 * h))
    return np.stack(rows, axis=0)


def exterior_derivative(form: OneForm, h: float = FD_STEP) -> TwoForm:
    """d(form), with components (i,j) -> d a_j/d x_i - d a_i/d x_j.

    Uses the form's analytic partials when available, otherwise central
    differences of step h; the difference probes must stay inside the
    domain.
    """
    pairs = _pair_index(form.domain.dim)

    if form.partials is not None:
        parts = form.partials

        def components(points):
            pts = np.asarray(points, dtype=float)
            cols = [
                np.asarray(parts[j][i](pts)) - np.asarray(parts[i][j](pts))
                for i, j in pairs
            ]
            return np.stack(cols, axis=-1)

    else:

        def components(points):
            D = _coefficient_jacobian(form, points, h)
            cols = [D[i, ..., j] - D[j, ..., i] for i, j in pairs]
            return np.stack(cols, axis=-1)

    return TwoForm(form.domain, components, name=f"d({form.name})")


def is_closed(form: OneForm, tol: float = 1e-8, samples=512, seed: int = 0, h: float = FD_STEP):
    """Whether d(form) vanishes on a sample set; returns (flag, residual).

    samples may be a point array or a count to draw from the domain.
    """
    if np.isscalar(samples):
        pts = form.domain.sample(int(samples), seed=seed)
    else:
        pts = np.asarray(samples, dtype=float)
        form.domain.require_inside(pts, "closedness samples")
    residual = float(np.max(exterior_derivative(form, h=h).norm_at(pts)))
    return residual <= tol, residual


# ---------------------------------------------------------------------------
# smooth maps and pullback


class SmoothMap:
    """A smooth map between chart domains, with an explicit Jacobian.

    fn(points) -> image points, jacobian(points) -> (m, n_out, n_in).
    An inverse map may be attached when the map is a diffeomorphism.
    """

    def __init__(self, domain, codomain, fn, jacobian, name="F", inverse=None):
        self.domain = domain
        self.codomain = codomain
        self._fn = fn
        self._jacobian = jacobian
        self.name = name
        self.inverse = inverse

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        out = np.asarray(self._fn(pts), dtype=float)
        return out[0] if single else out

    def jacobian_at(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        out = np.asarray(self._jacobian(pts))
        return out[0] if single else out

    def push_vectors(self, points, vectors) -> np.ndarray:
        J = self.jacobian_at(points)
        return np.einsum("...ij,...j->...i", J, np.asarray(vectors))

    def __repr__(self):
        return f"SmoothMap({self.name!r}: {self.domain.name!r} -> {self.codomain.name!r})"


def pullback(F: SmoothMap, form: OneForm) -> OneForm:
    """Pull a 1-form on the codomain back along F.

    The coefficients are a'_i(x) = sum_j a_j(F(x)) J_ji(x), so pairing
    the result with v equals pairing the original with the pushed
    vector.
    """
    if form.domain is not F.codomain:
        raise ValueError("form must live on the codomain of the map")

    def matrix(points):
        image = F(points)
        F.codomain.require_inside(image, f"image of {F.name}")
        a = form.coefficients_at(image)
        J = F.jacobian_at(points)
        return np.einsum("...j,...ji->...i", a, J)

    return OneForm(F.domain, matrix_fn=matrix, name=f"{F.name}*({form.name})")


def rotation_map(domain, angle: float, codomain=None) -> SmoothMap:
    """Rotation of the plane about the origin."""
    if domain.dim != 2:
        raise ValueError("rotation_map is for planar domains")
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s], [s, c]])
    Rinv = R.T
    codomain = codomain or domain

    def fn(pts):
        return pts @ R.T

    def jac(pts):
        return np.broadcast_to(R, (pts.shape[0], 2, 2))

    def inv_fn(pts):
        return pts @ Rinv.T

    def inv_jac(pts):
        return np.broadcast_to(Rinv, (pts.shape[0], 2, 2))

    inv = SmoothMap(codomain, domain, inv_fn, inv_jac, name=f"rot({-angle:.3g})")
    return SmoothMap(domain, codomain, fn, jac, name=f"rot({angle:.3g})", inverse=inv)


def scaling_map(domain, factor: float, codomain=None) -> SmoothMap:
    """Dilation x -> factor * x about the origin."""
    if factor == 0:
        raise ValueError("zero is not a dilation factor")
    codomain = codomain or domain
    dim = domain.dim
    J = factor * np.eye(dim)
    Jinv = np.eye(dim) / factor

    def fn(pts):
        return factor * pts

    def jac(pts):
        return np.broadcast_to(J, (pts.shape[0], dim, dim))

    def inv_fn(pts):
        return pts / factor

    def inv_jac(pts):
        return np.broadcast_to(Jinv, (pts.shape[0], dim, dim))

    inv = SmoothMap(codomain, domain, inv_fn, inv_jac, name=f"scale(1/{factor:.3g})")
    return SmoothMap(domain, codomain, fn, jac, name=f"scale({factor:.3g})", inverse=inv)


# ---------------------------------------------------------------------------
# form registry files


def load_form_registry(path, domain) -> dict[str, OneForm]:
    """Read named forms from an INI file and bind them to a domain.

    Each section [form NAME] holds coefficient expressions under keys
    a1..an; missing components default to zero.  The section name
    doubles as the form's symbol id.
    """
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#", ";"), interpolation=None
    )
    parser.optionxform = str
    read = parser.read(path)
    if not read:
        raise ValueError(f"cannot read form registry {path!r}")
    forms: dict[str, OneForm] = {}
    for section in parser.sections():
        if not section.startswith("form "):
            continue
        name = section.split(None, 1)[1].strip()
        if not name:
            raise ValueError(f"empty form name in section {section!r}")
        if name in forms:
            raise ValueError(f"duplicate form {name!r} in registry")
        keys = parser[section]
        exprs = []
        for k in range(domain.dim):
            exprs.append(keys.get(f"a{k + 1}", "0"))
        unknown = set(keys) - {f"a{k + 1}" for k in range(domain.dim)}
        if unknown:
            raise ValueError(f"unknown keys {sorted(unknown)} for form {name!r}")
        forms[name] = OneForm.from_expressions(domain, exprs, symbol=name, name=name)
    if not forms:
        raise ValueError(f"no [form NAME] sections in {path!r}")
    return forms
