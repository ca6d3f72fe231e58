"""Paths in chart coordinates, with exact piecewise bookkeeping.

Every path is parametrized on [0, 1] and knows its smooth pieces: the
atomic subpaths, each affinely renormalized to [0, 1], in traversal
order.  Concatenation never smooths the junction; downstream quadrature
either works piece by piece (exact transport across junctions) or, when
integrating straight across, averages the one-sided velocities at a
junction node so the trapezoid rule keeps second order.
"""

from __future__ import annotations

import configparser

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline

from .geometry import SmoothMap, _lambdify_on_points, parse_expression

__all__ = [
    "SampledPath",
    "AnalyticPath",
    "GriddedPath",
    "CompositePath",
    "PathFamily",
    "compose",
    "inverse",
    "reparametrize",
    "perturb",
    "map_path",
    "constant_path",
    "segment_path",
    "arc_path",
    "circle_path",
    "polyline_path",
    "smoothstep",
    "load_path_specs",
    "DEFAULT_GRID",
]

DEFAULT_GRID = 1024
_ENDPOINT_TOL = 1e-10
_CHECK_GRID = 257


def _as_t_array(t):
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


class SampledPath:
    """Base class: a piecewise-smooth parametrized path on [0, 1]."""

    domain = None

    def point(self, t) -> np.ndarray:
        raise NotImplementedError

    def velocity(self, t) -> np.ndarray:
        raise NotImplementedError

    def pieces(self) -> list["SampledPath"]:
        """Smooth pieces in traversal order, each on its own [0, 1]."""
        return [self]

    @property
    def start(self) -> np.ndarray:
        return self.point(0.0)

    @property
    def end(self) -> np.ndarray:
        return self.point(1.0)

    def sample(self, n: int):
        """Points and velocities on the uniform grid with n intervals."""
        ts = np.linspace(0.0, 1.0, n + 1)
        return self.point(ts), self.velocity(ts)

    def inverse(self) -> "SampledPath":
        return _ReversedPath(self)

    def _validate_inside(self, n=_CHECK_GRID):
        ts = np.linspace(0.0, 1.0, n)
        self.domain.require_inside(self.point(ts), "path points")

    def __repr__(self):
        return f"{type(self).__name__}(on {self.domain.name!r})"


class AnalyticPath(SampledPath):
    """Path given by closed-form point and velocity callables over t."""

    def __init__(self, domain, point_fn, velocity_fn, name="path", check=True):
        self.domain = domain
        self._point_fn = point_fn
        self._velocity_fn = velocity_fn
        self.name = name
        if check:
            self._validate_inside()

    def point(self, t):
        ts, single = _as_t_array(t)
        out = np.asarray(self._point_fn(ts if not single else ts[None]))
        return out[0] if single else out

    def velocity(self, t):
        ts, single = _as_t_array(t)
        out = np.asarray(self._velocity_fn(ts if not single else ts[None]))
        return out[0] if single else out

    def inverse(self):
        return AnalyticPath(
            self.domain,
            lambda ts: self._point_fn(1.0 - ts),
            lambda ts: -np.asarray(self._velocity_fn(1.0 - ts)),
            name=f"{self.name}^-1",
            check=False,
        )


class GriddedPath(SampledPath):
    """Path known through uniformly spaced sample points.

    Off-grid values come from a clamped cubic spline.  When velocities
    are supplied they must agree with central differences of the points
    to second order in the grid spacing; that guards against a velocity
    track that belongs to a different path.
    """

    def __init__(self, domain, points, velocities=None, name="grid-path", check=True):
        self.domain = domain
        self.name = name
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 4:
            raise ValueError("need at least 4 sample points")
        if pts.shape[1] != domain.dim:
            raise ValueError("sample points must match the domain dimension")
        self.grid_points = pts
        n = pts.shape[0] - 1
        ts = np.linspace(0.0, 1.0, n + 1)
        self._point_spline = CubicSpline(ts, pts, axis=0)
        if velocities is None:
            vel = self._point_spline(ts, 1)
        else:
            vel = np.asarray(velocities, dtype=float)
            if vel.shape != pts.shape:
                raise ValueError("velocities must align with the sample points")
            self._check_velocity_consistency(pts, vel, n)
        self.grid_velocities = vel
        self._velocity_spline = CubicSpline(ts, vel, axis=0)
        if check:
            self._validate_inside()

    @staticmethod
    def _check_velocity_consistency(pts, vel, n):
        h = 1.0 / n
        central = (pts[2:] - pts[:-2]) / (2 * h)
        # |p'''| h^2 / 6 bounds the central-difference error; estimate p'''
        # from third differences and allow a generous safety factor
        third = np.diff(pts, 3, axis=0)
        scale = np.max(np.abs(third)) / (6 * h) if len(third) else 0.0
        tol = 10.0 * scale + 1e-9 * (1 + np.max(np.abs(vel)))
        err = np.max(np.abs(vel[1:-1] - central))
        if err > tol:
            raise ValueError(
                f"velocities disagree with the sampled points: {err:.3e} > {tol:.3e}"
            )

    def point(self, t):
        ts, single = _as_t_array(t)
        out = self._point_spline(ts)
        return out

    def velocity(self, t):
        ts, single = _as_t_array(t)
        return self._velocity_spline(ts)

    def sample(self, n):
        own = self.grid_points.shape[0] - 1
        if n == own:
            return self.grid_points, self.grid_velocities
        return super().sample(n)

    def inverse(self):
        return GriddedPath(
            self.domain,
            self.grid_points[::-1],
            -self.grid_velocities[::-1],
            name=f"{self.name}^-1",
            check=False,
        )


class CompositePath(SampledPath):
    """Two paths glued end to start, on affinely squeezed half intervals.

    point(t) follows the first factor on [0, 1/2] and the second on
    [1/2, 1].  velocity(t) carries the factor-of-two chain rule; at the
    junction parameter exactly it returns the mean of the one-sided
    limits, which keeps trapezoid sums across the corner second order.
    """

    def __init__(self, first, second, tol=_ENDPOINT_TOL):
        if first.domain is not second.domain:
            raise ValueError("cannot concatenate paths on different domains")
        gap = np.max(np.abs(np.asarray(first.end) - np.asarray(second.start)))
        if gap > tol:
            raise ValueError(
                f"endpoint mismatch under concatenation: gap {gap:.3e}"
            )
        self.domain = first.domain
        self.first = first
        self.second = second
        self.name = f"({getattr(first, 'name', 'p')}.{getattr(second, 'name', 'q')})"

    def point(self, t):
        ts, single = _as_t_array(t)
        ts = np.atleast_1d(ts)
        left = ts <= 0.5
        out = np.empty(ts.shape + (self.domain.dim,))
        out[left] = self.first.point(np.clip(2 * ts[left], 0.0, 1.0))
        out[~left] = self.second.point(np.clip(2 * ts[~left] - 1.0, 0.0, 1.0))
        return out[0] if single else out

    def velocity(self, t):
        ts, single = _as_t_array(t)
        ts = np.atleast_1d(ts)
        left = ts < 0.5
        mid = ts == 0.5
        right = ~left & ~mid
        out = np.empty(ts.shape + (self.domain.dim,))
        out[left] = 2 * self.first.velocity(2 * ts[left])
        out[right] = 2 * self.second.velocity(np.clip(2 * ts[right] - 1.0, 0.0, 1.0))
        if np.any(mid):
            avg = self.first.velocity(1.0) + self.second.velocity(0.0)
            out[mid] = avg  # mean of the two one-sided limits, times 2
        return out[0] if single else out

    def pieces(self):
        return self.first.pieces() + self.second.pieces()

    def inverse(self):
        return CompositePath(self.second.inverse(), self.first.inverse())


class _ReversedPath(SampledPath):
    """Orientation reversal of an arbitrary path; involutive by identity."""

    def __init__(self, base):
        self.domain = base.domain
        self.base = base
        self.name = f"{getattr(base, 'name', 'p')}^-1"

    def point(self, t):
        ts, single = _as_t_array(t)
        return self.base.point(1.0 - ts)

    def velocity(self, t):
        ts, single = _as_t_array(t)
        return -np.asarray(self.base.velocity(1.0 - ts))

    def pieces(self):
        return [p.inverse() for p in reversed(self.base.pieces())]

    def inverse(self):
        return self.base


class _ReparametrizedPath(SampledPath):
    def __init__(self, base, phi, dphi, name=None):
        self.domain = base.domain
        self.base = base
        self.phi = phi
        self.dphi = dphi
        self.name = name or f"{getattr(base, 'name', 'p')}∘phi"

    def point(self, t):
        ts, single = _as_t_array(t)
        return self.base.point(np.clip(self.phi(ts), 0.0, 1.0))

    def velocity(self, t):
        ts, single = _as_t_array(t)
        s = np.clip(self.phi(ts), 0.0, 1.0)
        v = np.asarray(self.base.velocity(s))
        return v * np.asarray(self.dphi(ts))[..., None]


class _PerturbedPath(SampledPath):
    """base(t) + amplitude * field(t), with the matching velocity."""

    def __init__(self, base, field, field_velocity, amplitude, span=(0.0, 1.0), check=True):
        self.domain = base.domain
        self.base = base
        self.field = field
        self.field_velocity = field_velocity
        self.amplitude = float(amplitude)
        self.span = span
        self.name = f"{getattr(base, 'name', 'p')}+{amplitude:.3g}b"
        if check:
            self._validate_inside()

    def _global_t(self, ts):
        a, b = self.span
        return a + (b - a) * ts

    def point(self, t):
        ts, single = _as_t_array(t)
        base = np.asarray(self.base.point(ts))
        bump = np.asarray(self.field(self._global_t(ts)))
        return base + self.amplitude * bump

    def velocity(self, t):
        ts, single = _as_t_array(t)
        base = np.asarray(self.base.velocity(ts))
        a, b = self.span
        bump = np.asarray(self.field_velocity(self._global_t(ts))) * (b - a)
        return base + self.amplitude * bump

    def pieces(self):
        base_pieces = _spans(self.base)
        if len(base_pieces) == 1:
            return [self]
        out = []
        for piece, (a, b) in base_pieces:
            ga, gb = self.span
            sub = (ga + (gb - ga) * a, ga + (gb - ga) * b)
            out.append(
                _PerturbedPath(
                    piece, self.field, self.field_velocity, self.amplitude,
                    span=sub, check=False,
                )
            )
        return out


def _spans(path, lo=0.0, hi=1.0):
    """Atomic pieces of a path with their global parameter intervals."""
    if isinstance(path, CompositePath):
        mid = (lo + hi) / 2
        return _spans(path.first, lo, mid) + _spans(path.second, mid, hi)
    if isinstance(path, _ReversedPath):
        inner = _spans(path.base)
        out = []
        for piece, (a, b) in reversed(inner):
            span = (lo + (hi - lo) * (1.0 - b), lo + (hi - lo) * (1.0 - a))
            out.append((piece.inverse(), span))
        return out
    if isinstance(path, _MappedPath):
        return [
            (_MappedPath(path.map, piece, check=False), span)
            for piece, span in _spans(path.base, lo, hi)
        ]
    return [(path, (lo, hi))]


class _MappedPath(SampledPath):
    """Image of a path under a smooth map, velocities via the Jacobian."""

    def __init__(self, F: SmoothMap, base, check=True):
        if base.domain is not F.domain:
            raise ValueError("path does not live on the map's source domain")
        self.domain = F.codomain
        self.map = F
        self.base = base
        self.name = f"{F.name}({getattr(base, 'name', 'p')})"
        if check:
            self._validate_inside()

    def point(self, t):
        return self.map(self.base.point(t))

    def velocity(self, t):
        pts = self.base.point(t)
        return self.map.push_vectors(pts, self.base.velocity(t))

    def pieces(self):
        base_pieces = self.base.pieces()
        if len(base_pieces) == 1:
            return [self]
        return [_MappedPath(self.map, p, check=False) for p in base_pieces]


# ---------------------------------------------------------------------------
# operations


def compose(p: SampledPath, q: SampledPath, tol: float = _ENDPOINT_TOL) -> CompositePath:
    """Concatenate p then q; the end of p must match the start of q."""
    return CompositePath(p, q, tol=tol)


def inverse(p: SampledPath) -> SampledPath:
    """Orientation reversal; applying it twice returns the original data."""
    return p.inverse()


def reparametrize(p: SampledPath, phi, dphi, check_points: int = 65) -> SampledPath:
    """Precompose with a parameter change phi fixing 0 and 1.

    phi must be monotone increasing with phi(0)=0 and phi(1)=1; the
    derivative is required to be positive at interior check points only,
    so a change like t**2 with a single boundary zero is admitted.
    """
    ts = np.linspace(0.0, 1.0, check_points)
    vals = np.asarray(phi(ts), dtype=float)
    if abs(vals[0]) > 1e-12 or abs(vals[-1] - 1.0) > 1e-12:
        raise ValueError("parameter change must fix 0 and 1")
    if np.any(np.diff(vals) <= 0):
        raise ValueError("parameter change must be strictly increasing")
    dvals = np.asarray(dphi(ts), dtype=float)
    if np.any(dvals[1:-1] <= 0) or np.any(dvals < 0):
        raise ValueError("parameter change must have positive slope inside (0, 1)")
    if len(p.pieces()) != 1:
        raise ValueError("reparametrize expects a single smooth piece")
    return _ReparametrizedPath(p, phi, dphi)


def smoothstep(t):
    return 3 * t**2 - 2 * t**3


def smoothstep_slope(t):
    return 6 * t - 6 * t**2


class PathFamily:
    """A path plus a perturbation field vanishing at both endpoints.

    Members of the family share start and end with the base path, so
    they represent endpoint-fixed deformations.
    """

    def __init__(self, base: SampledPath, field, field_velocity, name="family"):
        self.base = base
        self.field = field
        self.field_velocity = field_velocity
        self.name = name
        for t in (0.0, 1.0):
            v = np.asarray(field(np.array([t])))
            if np.max(np.abs(v)) > 1e-12:
                raise ValueError("perturbation field must vanish at the endpoints")

    def member(self, amplitude: float) -> SampledPath:
        return _PerturbedPath(self.base, self.field, self.field_velocity, amplitude)


def perturb(family: PathFamily, amplitude: float) -> SampledPath:
    """The family member at the given amplitude; errors if it leaves the
    domain."""
    return family.member(amplitude)


def map_path(F: SmoothMap, p: SampledPath) -> SampledPath:
    """Push a path forward through a smooth map."""
    return _MappedPath(F, p)


# ---------------------------------------------------------------------------
# constructors


def constant_path(domain, point, name="const") -> AnalyticPath:
    c = np.asarray(point, dtype=float)
    domain.require_inside(c[None, :], "constant path point")

    def pt(ts):
        return np.broadcast_to(c, ts.shape + c.shape).copy()

    def vel(ts):
        return np.zeros(ts.shape + c.shape)

    return AnalyticPath(domain, pt, vel, name=name, check=False)


def segment_path(domain, a, b, name=None) -> AnalyticPath:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    def pt(ts):
        return a + ts[..., None] * (b - a)

    def vel(ts):
        return np.broadcast_to(b - a, ts.shape + a.shape).copy()

    return AnalyticPath(domain, pt, vel, name=name or "segment")


def arc_path(domain, center, radius, angle0, angle1, name=None) -> AnalyticPath:
    center = np.asarray(center, dtype=float)
    sweep = angle1 - angle0

    def pt(ts):
        ang = angle0 + sweep * ts
        return center + radius * np.stack([np.cos(ang), np.sin(ang)], axis=-1)

    def vel(ts):
        ang = angle0 + sweep * ts
        return radius * sweep * np.stack([-np.sin(ang), np.cos(ang)], axis=-1)

    return AnalyticPath(domain, pt, vel, name=name or "arc")


def circle_path(domain, center=(0.0, 0.0), radius=1.0, winds=1, start_angle=0.0, name=None):
    """Closed circle traversed winds times (negative winds go clockwise)."""
    total = 2 * np.pi * winds
    return arc_path(
        domain, center, radius, start_angle, start_angle + total,
        name=name or f"circle[{winds}]",
    )


def polyline_path(domain, vertices, name="polyline") -> GriddedPath:
    """Gridded path through the given vertices with spline velocities."""
    verts = np.asarray(vertices, dtype=float)
    if len(verts) < 4:
        # densify short vertex lists so the spline has enough knots
        ts = np.linspace(0.0, 1.0, len(verts))
        fine = np.linspace(0.0, 1.0, 9)
        cols = [np.interp(fine, ts, verts[:, k]) for k in range(verts.shape[1])]
        verts = np.stack(cols, axis=-1)
    return GriddedPath(domain, verts, name=name)


# ---------------------------------------------------------------------------
# path spec files


def load_path_specs(path, domain) -> dict[str, SampledPath]:
    """Read named paths from an INI file.

    A section [path NAME] either gives coordinate expressions in t under
    keys x1..xn, or a point list under the single key points, rows
    separated by semicolons.
    """
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#", ";"), interpolation=None
    )
    parser.optionxform = str
    read = parser.read(path)
    if not read:
        raise ValueError(f"cannot read path spec {path!r}")
    t = sp.Symbol("t", real=True)
    out: dict[str, SampledPath] = {}
    for section in parser.sections():
        if not section.startswith("path "):
            continue
        name = section.split(None, 1)[1].strip()
        keys = parser[section]
        if "points" in keys:
            rows = [row.strip() for row in keys["points"].split(";") if row.strip()]
            verts = [[float(v) for v in row.split()] for row in rows]
            out[name] = polyline_path(domain, verts, name=name)
            continue
        exprs = []
        for k in range(domain.dim):
            key = f"x{k + 1}"
            if key not in keys:
                raise ValueError(f"path {name!r} is missing coordinate {key}")
            exprs.append(parse_expression(keys[key], 1, extra={"t": t}))
        vel_exprs = [sp.diff(e, t) for e in exprs]

        def make(exprs=exprs, vel_exprs=vel_exprs):
            fns = [sp.lambdify([t], e, modules="numpy") for e in exprs]
            vns = [sp.lambdify([t], e, modules="numpy") for e in vel_exprs]

            def stack(fs):
                def call(ts):
                    cols = [np.broadcast_to(np.asarray(f(ts)), ts.shape) for f in fs]
                    return np.stack(cols, axis=-1)

                return call

            return stack(fns), stack(vns)

        pt_fn, vel_fn = make()
        out[name] = AnalyticPath(domain, pt_fn, vel_fn, name=name)
    if not out:
        raise ValueError(f"no [path NAME] sections in {path!r}")
    return out
