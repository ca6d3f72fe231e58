"""Path construction, concatenation, reversal, reparametrization."""

import numpy as np
import pytest

from iterint.geometry import ChartDomain, rotation_map
from iterint.paths import (
    AnalyticPath,
    GriddedPath,
    PathFamily,
    arc_path,
    circle_path,
    compose,
    constant_path,
    inverse,
    load_path_specs,
    map_path,
    perturb,
    polyline_path,
    reparametrize,
    segment_path,
    smoothstep,
    smoothstep_slope,
)


def make_annulus():
    def member(pts):
        r = np.hypot(pts[:, 0], pts[:, 1])
        return (r > 0.5) & (r < 1.5)

    return ChartDomain(2, member, ([-1.5, -1.5], [1.5, 1.5]), name="annulus")


def make_plane():
    def member(pts):
        return np.ones(len(pts), dtype=bool)

    return ChartDomain(2, member, ([-2, -2], [2, 2]), name="plane")


def test_circle_endpoints_and_velocity():
    dom = make_annulus()
    c = circle_path(dom, radius=1.0)
    assert np.allclose(c.start, [1.0, 0.0], atol=1e-12)
    assert np.allclose(c.end, [1.0, 0.0], atol=1e-12)
    pts, vels = c.sample(8)
    assert pts.shape == (9, 2) and vels.shape == (9, 2)
    assert np.allclose(vels[0], [0.0, 2 * np.pi], atol=1e-12)


def test_path_outside_domain_rejected():
    dom = make_annulus()
    with pytest.raises(ValueError):
        segment_path(dom, (-1.0, 0.0), (1.0, 0.0))  # crosses the hole


def test_compose_endpoint_check_and_pieces():
    dom = make_annulus()
    upper = arc_path(dom, (0, 0), 1.0, 0.0, np.pi)
    lower = arc_path(dom, (0, 0), 1.0, np.pi, 2 * np.pi)
    loop = compose(upper, lower)
    assert np.allclose(loop.point(0.25), upper.point(0.5))
    assert np.allclose(loop.point(0.75), lower.point(0.5))
    assert len(loop.pieces()) == 2
    with pytest.raises(ValueError):
        compose(upper, upper)


def test_composite_velocity_scaling_and_junction_mean():
    dom = make_plane()
    a = segment_path(dom, (0, 0), (1, 0))
    b = segment_path(dom, (1, 0), (1, 1))
    ab = compose(a, b)
    assert np.allclose(ab.velocity(0.25), [2.0, 0.0])
    assert np.allclose(ab.velocity(0.75), [0.0, 2.0])
    assert np.allclose(ab.velocity(0.5), [1.0, 1.0])  # mean of (2,0) and (0,2)


def test_nested_composition_flattens_in_order():
    dom = make_plane()
    a = segment_path(dom, (0, 0), (1, 0), name="a")
    b = segment_path(dom, (1, 0), (1, 1), name="b")
    c = segment_path(dom, (1, 1), (0, 1), name="c")
    left = compose(compose(a, b), c)
    right = compose(a, compose(b, c))
    assert [p.name for p in left.pieces()] == ["a", "b", "c"]
    assert [p.name for p in right.pieces()] == ["a", "b", "c"]


def test_inverse_is_involution_and_reverses_pieces():
    dom = make_plane()
    a = segment_path(dom, (0, 0), (1, 0), name="a")
    b = segment_path(dom, (1, 0), (1, 1), name="b")
    ab = compose(a, b)
    rev = inverse(ab)
    assert np.allclose(rev.start, ab.end)
    assert np.allclose(rev.point(0.3), ab.point(0.7))
    assert np.allclose(rev.velocity(0.3), -np.asarray(ab.velocity(0.7)))
    names = [p.name for p in rev.pieces()]
    assert names == ["b^-1", "a^-1"]


def test_gridded_inverse_exact_involution():
    dom = make_plane()
    ts = np.linspace(0.0, 1.0, 33)
    pts = np.stack([ts, ts**2], axis=-1)
    g = GriddedPath(dom, pts)
    back = g.inverse().inverse()
    assert np.array_equal(back.grid_points, g.grid_points)
    assert np.array_equal(back.grid_velocities, g.grid_velocities)


def test_gridded_velocity_consistency_guard():
    dom = make_plane()
    ts = np.linspace(0.0, 1.0, 65)
    pts = np.stack([np.cos(ts), np.sin(ts)], axis=-1)
    good_vel = np.stack([-np.sin(ts), np.cos(ts)], axis=-1)
    GriddedPath(dom, pts, good_vel)  # consistent track accepted
    with pytest.raises(ValueError):
        GriddedPath(dom, pts, -good_vel)


def test_gridded_sample_returns_stored_grid():
    dom = make_plane()
    ts = np.linspace(0.0, 1.0, 17)
    pts = np.stack([ts, np.zeros_like(ts)], axis=-1)
    g = GriddedPath(dom, pts)
    got_pts, got_vel = g.sample(16)
    assert np.array_equal(got_pts, pts)
    assert got_vel.shape == pts.shape


def test_reparametrize_preserves_points():
    dom = make_annulus()
    c = circle_path(dom)
    warped = reparametrize(c, smoothstep, smoothstep_slope)
    ts = np.linspace(0, 1, 11)
    assert np.allclose(warped.point(ts), c.point(smoothstep(ts)), atol=1e-12)
    # velocity carries the slope factor
    assert np.allclose(
        warped.velocity(0.5),
        np.asarray(c.velocity(0.5)) * smoothstep_slope(0.5),
        atol=1e-12,
    )


def test_reparametrize_admits_boundary_degenerate_slope():
    dom = make_annulus()
    c = circle_path(dom)
    warped = reparametrize(c, lambda t: t**2, lambda t: 2 * t)
    assert np.allclose(warped.start, c.start)


def test_reparametrize_rejects_bad_changes():
    dom = make_annulus()
    c = circle_path(dom)
    with pytest.raises(ValueError):
        reparametrize(c, lambda t: t + 0.1, lambda t: np.ones_like(t))
    with pytest.raises(ValueError):
        reparametrize(c, lambda t: np.sin(2 * np.pi * t) * 0.3 + t, lambda t: 2 * np.pi * 0.3 * np.cos(2 * np.pi * t) + 1)


def test_family_perturbation_and_domain_exit():
    dom = make_annulus()
    c = circle_path(dom)

    def field(ts):
        return np.stack([np.zeros_like(ts), np.sin(np.pi * ts)], axis=-1)

    def field_vel(ts):
        return np.stack([np.zeros_like(ts), np.pi * np.cos(np.pi * ts)], axis=-1)

    fam = PathFamily(c, field, field_vel)
    member = perturb(fam, 0.1)
    assert np.allclose(member.start, c.start)
    assert np.allclose(member.end, c.end)
    assert not np.allclose(member.point(0.5), c.point(0.5))
    with pytest.raises(ValueError):
        perturb(fam, 5.0)  # leaves the annulus


def test_family_requires_vanishing_field():
    dom = make_annulus()
    c = circle_path(dom)
    with pytest.raises(ValueError):
        PathFamily(
            c,
            lambda ts: np.stack([np.ones_like(ts), np.zeros_like(ts)], axis=-1),
            lambda ts: np.zeros(ts.shape + (2,)),
        )


def test_map_path_points_and_velocities():
    dom = make_annulus()
    c = circle_path(dom)
    rot = rotation_map(dom, np.pi / 2)
    moved = map_path(rot, c)
    assert np.allclose(moved.point(0.0), [0.0, 1.0], atol=1e-12)
    v0 = np.asarray(moved.velocity(0.0))
    assert np.allclose(v0, [-2 * np.pi, 0.0], atol=1e-12)


def test_constant_path_and_segment():
    dom = make_plane()
    const = constant_path(dom, (0.5, 0.5))
    assert np.allclose(const.point(0.7), [0.5, 0.5])
    assert np.allclose(const.velocity(0.3), [0.0, 0.0])
    seg = segment_path(dom, (0, 0), (1, 1))
    assert np.allclose(seg.point(0.5), [0.5, 0.5])


def test_polyline_path():
    dom = make_plane()
    p = polyline_path(dom, [(0, 0), (1, 0), (1, 1)])
    assert np.allclose(p.start, [0, 0]) and np.allclose(p.end, [1, 1])


def test_load_path_specs(tmp_path):
    spec = tmp_path / "paths.ini"
    spec.write_text(
        "[path whole]\n"
        "x1 = cos(2*pi*t)\n"
        "x2 = sin(2*pi*t)\n"
        "\n"
        "[path straight]\n"
        "points = 1 0; 1.2 0; 1.4 0; 1.2 0.2; 1 0.4\n"
    )
    dom = make_annulus()
    paths = load_path_specs(spec, dom)
    assert set(paths) == {"whole", "straight"}
    circle = paths["whole"]
    assert np.allclose(circle.point(0.25), [0.0, 1.0], atol=1e-12)
    v = np.asarray(circle.velocity(0.0))
    assert np.allclose(v, [0.0, 2 * np.pi], atol=1e-10)


def test_load_path_specs_errors(tmp_path):
    dom = make_plane()
    bad = tmp_path / "bad.ini"
    bad.write_text("[path broken]\nx1 = cos(t)\n")
    with pytest.raises(ValueError):
        load_path_specs(bad, dom)
    with pytest.raises(ValueError):
        load_path_specs(tmp_path / "nothere.ini", dom)
