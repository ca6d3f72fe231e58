"""Bundled domains, forms, paths, and covers used by tests and the CLI.

Instances are cached so that repeated lookups return identical objects;
form and wedge operations require their operands to share a domain
object, and the cache guarantees that for fixture users.
"""

from __future__ import annotations

import numpy as np

from .geometry import ChartDomain, OneForm
from .paths import arc_path, circle_path, compose, constant_path, segment_path

__all__ = [
    "get_domain",
    "get_form",
    "get_path",
    "get_cover",
    "list_fixtures",
    "FORM_EXPRESSIONS",
]

_domain_cache: dict[str, ChartDomain] = {}
_form_cache: dict[tuple, OneForm] = {}
_path_cache: dict[str, object] = {}
_cover_cache: dict[str, object] = {}

HOLE_RADIUS = 0.05  # punctures are small closed disks, kept away from probes


def _annulus():
    def member(pts):
        r = np.hypot(pts[:, 0], pts[:, 1])
        return (r > 0.5) & (r < 1.5)

    return ChartDomain(2, member, ([-1.5, -1.5], [1.5, 1.5]), name="annulus")


def _disk():
    def member(pts):
        return np.hypot(pts[:, 0], pts[:, 1]) < 1.0

    return ChartDomain(
        2, member, ([-1.0, -1.0], [1.0, 1.0]), star_center=(0.0, 0.0), name="disk"
    )


def _rectangle():
    def member(pts):
        return np.all(np.abs(pts) < 1.0, axis=-1)

    return ChartDomain(
        2, member, ([-1.0, -1.0], [1.0, 1.0]), star_center=(0.0, 0.0), name="rectangle"
    )


def _punctured_plane():
    def member(pts):
        return np.hypot(pts[:, 0], pts[:, 1]) > HOLE_RADIUS

    return ChartDomain(2, member, ([-2.0, -2.0], [2.0, 2.0]), name="punctured-plane")


def _twice_punctured_plane():
    def member(pts):
        left = np.hypot(pts[:, 0] + 1.0, pts[:, 1]) > HOLE_RADIUS
        right = np.hypot(pts[:, 0] - 1.0, pts[:, 1]) > HOLE_RADIUS
        return left & right

    return ChartDomain(
        2, member, ([-2.5, -2.5], [2.5, 2.5]), name="twice-punctured-plane"
    )


def _strip():
    # angular coordinate x1 is unrestricted; the radial band is open
    def member(pts):
        return (pts[:, 1] > 0.5) & (pts[:, 1] < 1.5)

    return ChartDomain(
        2,
        member,
        ([-2 * np.pi, 0.5], [4 * np.pi, 1.5]),
        star_center=(0.0, 1.0),
        name="strip",
    )


def _plane():
    def member(pts):
        return np.ones(len(pts), dtype=bool)

    return ChartDomain(
        2, member, ([-1.5, -1.5], [2.5, 2.5]), star_center=(0.5, 0.5), name="plane"
    )


_DOMAINS = {
    "annulus": _annulus,
    "disk": _disk,
    "rectangle": _rectangle,
    "punctured-plane": _punctured_plane,
    "twice-punctured-plane": _twice_punctured_plane,
    "strip": _strip,
    "plane": _plane,
}


# coefficient expressions, usable on any 2d fixture domain where they
# are finite
FORM_EXPRESSIONS = {
    "dtheta": ("-x2/(x1^2 + x2^2)", "x1/(x1^2 + x2^2)"),
    "dr": ("x1/sqrt(x1^2 + x2^2)", "x2/sqrt(x1^2 + x2^2)"),
    "dx": ("1", "0"),
    "dy": ("0", "1"),
    "xdy": ("0", "x1"),
    "ydx": ("x2", "0"),
    "dtheta-left": (
        "-x2/((x1 + 1)^2 + x2^2)",
        "(x1 + 1)/((x1 + 1)^2 + x2^2)",
    ),
    "dtheta-right": (
        "-x2/((x1 - 1)^2 + x2^2)",
        "(x1 - 1)/((x1 - 1)^2 + x2^2)",
    ),
    "periodic-x": ("1 + cos(2*pi*x1)/2", "0"),
    "periodic-y": ("0", "1 + sin(2*pi*x2)/2"),
}


def get_domain(name: str) -> ChartDomain:
    if name not in _DOMAINS:
        raise KeyError(f"unknown domain fixture {name!r}")
    if name not in _domain_cache:
        _domain_cache[name] = _DOMAINS[name]()
    return _domain_cache[name]


def get_form(name: str, domain="annulus") -> OneForm:
    """A named fixture form bound to a fixture domain (or a given one)."""
    if name not in FORM_EXPRESSIONS:
        raise KeyError(f"unknown form fixture {name!r}")
    if isinstance(domain, str):
        domain = get_domain(domain)
    key = (name, id(domain))
    if key not in _form_cache:
        _form_cache[key] = OneForm.from_expressions(
            domain, FORM_EXPRESSIONS[name], symbol=name, name=name
        )
    return _form_cache[key]


def _wavy_arc(domain, theta0, theta1, name):
    """Half loop on the annulus with a radial wave; the wave vanishes at
    the ends so wavy arcs concatenate smoothly with plain arcs."""
    from .paths import AnalyticPath

    sweep = theta1 - theta0

    def radius(ts):
        return 1.0 + 0.3 * np.sin(np.pi * ts) ** 2 * np.cos(3 * (theta0 + sweep * ts))

    def radius_slope(ts):
        th = theta0 + sweep * ts
        return 0.3 * (
            np.pi * np.sin(2 * np.pi * ts) * np.cos(3 * th)
            - 3 * sweep * np.sin(np.pi * ts) ** 2 * np.sin(3 * th)
        )

    def pt(ts):
        th = theta0 + sweep * ts
        return radius(ts)[..., None] * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def vel(ts):
        th = theta0 + sweep * ts
        r = radius(ts)
        dr = radius_slope(ts)
        c, s = np.cos(th), np.sin(th)
        return np.stack(
            [dr * c - r * s * sweep, dr * s + r * c * sweep], axis=-1
        )

    return AnalyticPath(domain, pt, vel, name=name)


def _keyhole_loop(domain, center, radius, base, name):
    """Loop around one puncture from a common base point: straight in,
    once around, straight back."""
    center = np.asarray(center, dtype=float)
    base = np.asarray(base, dtype=float)
    direction = center - base
    gate = center - radius * direction / np.linalg.norm(direction)
    approach = segment_path(domain, base, gate, name=f"{name}-in")
    angle = np.arctan2(base[1] - center[1], base[0] - center[0])
    loop = circle_path(domain, center, radius, winds=1, start_angle=angle, name=f"{name}-around")
    return compose(compose(approach, loop), approach.inverse())


def _build_paths():
    ann = get_domain("annulus")
    rect = get_domain("rectangle")
    twice = get_domain("twice-punctured-plane")
    out = {
        "annulus-core": lambda: circle_path(ann, radius=1.0, name="annulus-core"),
        "annulus-double": lambda: circle_path(ann, radius=1.0, winds=2, name="annulus-double"),
        "annulus-upper": lambda: arc_path(ann, (0, 0), 1.0, 0.0, np.pi, name="annulus-upper"),
        "annulus-lower": lambda: arc_path(ann, (0, 0), 1.0, np.pi, 2 * np.pi, name="annulus-lower"),
        "annulus-wavy-upper": lambda: _wavy_arc(ann, 0.0, np.pi, "annulus-wavy-upper"),
        "annulus-wavy-lower": lambda: _wavy_arc(ann, np.pi, 2 * np.pi, "annulus-wavy-lower"),
        "annulus-base": lambda: constant_path(ann, (1.0, 0.0), name="annulus-base"),
        "rect-diagonal": lambda: segment_path(rect, (-0.5, -0.5), (0.5, 0.5), name="rect-diagonal"),
        "rect-bent": lambda: compose(
            segment_path(rect, (-0.5, -0.5), (0.5, -0.2), name="rect-bent-a"),
            segment_path(rect, (0.5, -0.2), (0.2, 0.6), name="rect-bent-b"),
        ),
        "left-loop": lambda: _keyhole_loop(twice, (-1.0, 0.0), 0.4, (0.0, 0.0), "left-loop"),
        "right-loop": lambda: _keyhole_loop(twice, (1.0, 0.0), 0.4, (0.0, 0.0), "right-loop"),
    }
    return out


def get_path(name: str):
    if name not in _path_cache:
        builders = _build_paths()
        if name not in builders:
            raise KeyError(f"unknown path fixture {name!r}")
        _path_cache[name] = builders[name]()
    return _path_cache[name]


def get_cover(name: str):
    if name not in _cover_cache:
        from .cover import strip_cover, torus_cover

        if name == "strip-cover":
            _cover_cache[name] = strip_cover(
                get_domain("strip"), get_domain("annulus")
            )
        elif name == "plane-cover":
            _cover_cache[name] = torus_cover(get_domain("plane"))
        else:
            raise KeyError(f"unknown cover fixture {name!r}")
    return _cover_cache[name]


def list_fixtures() -> dict[str, list[str]]:
    """Names of everything bundled, grouped by kind."""
    return {
        "domains": sorted(_DOMAINS),
        "forms": sorted(FORM_EXPRESSIONS),
        "paths": sorted(_build_paths()),
        "covers": ["plane-cover", "strip-cover"],
    }
