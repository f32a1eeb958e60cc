import numpy as np
import pytest

from nlos_ssl.geometry.bvh import segment_blocked
from nlos_ssl.raytrace.models import SegmentKind
from nlos_ssl.synth.paths import (
    containing_triangle,
    diffraction_paths,
    direct_path,
    fermat_point,
    forward_paths,
    has_short_leg,
    image_source_paths,
    surface_planes,
)

LISTENER = np.array([1.5, 1.5, 1.0])
HIDDEN_SOURCE = np.array([5.5, 4.0, 1.0])


def test_shoebox_has_six_planes(room_mesh):
    planes = surface_planes(room_mesh)

    assert len(planes) == 6
    assert sorted(len(plane.triangles) for plane in planes) == [2] * 6
    for plane in planes:
        # inward-facing walls: the room centre is on every plane's air side
        assert plane.signed_distance([3.5, 3.5, 1.5]) > 0.0


def test_mirror_reflects_across_the_plane(room_mesh):
    floor = next(p for p in surface_planes(room_mesh) if np.allclose(p.normal, [0.0, 0.0, 1.0]))

    np.testing.assert_allclose(floor.mirror([1.0, 2.0, 0.7]), [1.0, 2.0, -0.7])
    assert floor.signed_distance([1.0, 2.0, 0.7]) == pytest.approx(0.7)


def test_containing_triangle_picks_lowest_id_on_shared_edge(room_mesh):
    floor = next(p for p in surface_planes(room_mesh) if np.allclose(p.normal, [0.0, 0.0, 1.0]))

    # the floor diagonal from (0, 0) to (7, 7) is shared by both floor triangles
    assert containing_triangle(room_mesh, floor, [3.0, 3.0, 0.0]) == min(floor.triangles)
    assert containing_triangle(room_mesh, floor, [8.0, 3.0, 0.0]) is None


def test_direct_path(room_mesh, nlos_mesh):
    source = np.array([5.0, 5.0, 1.2])

    path = direct_path(source, LISTENER, room_mesh)

    assert path.is_direct
    np.testing.assert_allclose(path.arrival_direction, (LISTENER - source) / np.linalg.norm(LISTENER - source))
    assert direct_path(HIDDEN_SOURCE, LISTENER, nlos_mesh) is None
    with pytest.raises(ValueError):
        direct_path(LISTENER, LISTENER, room_mesh)


def test_first_order_images_in_a_shoebox(room_mesh):
    source = np.array([5.0, 5.0, 1.2])

    paths = image_source_paths(source, LISTENER, room_mesh, max_order=1)

    assert len(paths) == 7
    assert sum(path.is_direct for path in paths) == 1
    planes = surface_planes(room_mesh)
    for path in paths[1:]:
        assert path.kinds == (SegmentKind.DIRECT, SegmentKind.REFLECTION)
        bounce = path.vertices[1]
        plane = next(p for p in planes if path.surfaces[0] in p.triangles)
        assert plane.signed_distance(bounce) == pytest.approx(0.0, abs=1e-9)
        # unfolded length equals the distance to the image source
        assert path.length == pytest.approx(np.linalg.norm(plane.mirror(source) - LISTENER))


def test_short_leg_detection(room_mesh):
    eps = room_mesh.settings.self_intersection_eps

    assert has_short_leg([[1.0, 1.0, 1.0], [1.0, 1.0, 1.0 + eps], [2.0, 2.0, 2.0]], room_mesh)
    assert not has_short_leg([[1.0, 1.0, 1.0], [1.0, 1.0, 1.0 + 10.0 * eps], [2.0, 2.0, 2.0]], room_mesh)


def test_corner_chains_with_tiny_legs_are_rejected(room_mesh):
    eps = room_mesh.settings.self_intersection_eps
    source = np.array([1.0, 1.00001, 1.5])
    listener = np.array([2.0, 2.0, 1.0])

    paths = image_source_paths(source, listener, room_mesh, max_order=3)

    assert len(paths) > 7
    for path in paths:
        legs = np.linalg.norm(np.diff(np.array(path.vertices), axis=0), axis=1)
        assert legs.min() > 2.0 * eps


def test_second_order_paths_obey_the_law_of_reflection(room_mesh):
    source = np.array([5.0, 5.0, 1.2])
    planes = surface_planes(room_mesh)

    paths = image_source_paths(source, LISTENER, room_mesh, max_order=2)

    second = [path for path in paths if path.order == 2]
    assert second
    assert len({path.key() for path in paths}) == len(paths)
    for path in second:
        for i, tri in enumerate(path.surfaces):
            normal = room_mesh.normals[tri]
            incoming = path.vertices[i + 1] - path.vertices[i]
            outgoing = path.vertices[i + 2] - path.vertices[i + 1]
            incoming /= np.linalg.norm(incoming)
            outgoing /= np.linalg.norm(outgoing)
            np.testing.assert_allclose(outgoing, incoming - 2.0 * (incoming @ normal) * normal, atol=1e-9)
        assert next(p for p in planes if path.surfaces[0] in p.triangles) is not next(
            p for p in planes if path.surfaces[1] in p.triangles
        )


def test_fermat_point_balances_both_legs(l_wall_mesh):
    from nlos_ssl.geometry.wedges import extract_wedges
    from tests.conftest import WEDGE_THRESHOLD

    wedge = extract_wedges(l_wall_mesh, WEDGE_THRESHOLD)[0]

    np.testing.assert_allclose(fermat_point([-1.0, 0.0, 0.3], [0.0, -2.0, 0.9], wedge), [0.0, 0.0, 0.5], atol=1e-6)
    np.testing.assert_allclose(fermat_point([-1.0, 0.0, 0.5], [0.0, -1.0, 0.5], wedge), [0.0, 0.0, 0.5], atol=1e-6)


def test_fermat_point_is_clamped_to_the_edge(l_wall_mesh):
    from nlos_ssl.geometry.wedges import extract_wedges
    from tests.conftest import WEDGE_THRESHOLD

    wedge = extract_wedges(l_wall_mesh, WEDGE_THRESHOLD)[0]

    np.testing.assert_allclose(fermat_point([-1.0, 0.0, 2.0], [0.0, -1.0, 3.0], wedge), [0.0, 0.0, 1.0])
    np.testing.assert_allclose(fermat_point([-1.0, 0.0, -2.0], [0.0, -1.0, -1.0], wedge), [0.0, 0.0, 0.0])


def test_hidden_source_is_heard_around_the_corner(nlos_mesh, nlos_wedges):
    paths = diffraction_paths(HIDDEN_SOURCE, LISTENER, nlos_wedges, nlos_mesh)

    corners = [path.vertices[1] for path in paths]
    assert any(np.allclose(point, [4.0, 2.0, 1.0], atol=1e-6) for point in corners)
    for path in paths:
        assert path.has_diffraction
        assert path.kinds == (SegmentKind.DIRECT, SegmentKind.DIFFRACTION)
        for a, b in zip(path.vertices, path.vertices[1:]):
            assert not segment_blocked(nlos_mesh, a, b)


def test_no_diffraction_when_the_listener_is_lit(nlos_mesh, nlos_wedges):
    # listener and source on the same open side of the obstacle
    assert diffraction_paths([1.0, 6.0, 1.0], [2.0, 1.0, 1.0], nlos_wedges, nlos_mesh) == []


def test_forward_paths_for_the_hidden_source(nlos_mesh, nlos_wedges):
    with_diffraction = forward_paths(HIDDEN_SOURCE, LISTENER, nlos_mesh, nlos_wedges, max_order=1)
    without = forward_paths(HIDDEN_SOURCE, LISTENER, nlos_mesh, nlos_wedges, max_order=1, include_diffraction=False)

    assert not any(path.is_direct for path in with_diffraction)
    assert any(path.has_diffraction for path in with_diffraction)
    assert not any(path.has_diffraction for path in without)
    assert len(with_diffraction) > len(without) > 0
    for path in with_diffraction:
        for a, b in zip(path.vertices, path.vertices[1:]):
            assert not segment_blocked(nlos_mesh, a, b)


def test_reflected_diffraction_paths_bounce_before_the_edge(nlos_mesh, nlos_wedges):
    paths = diffraction_paths(HIDDEN_SOURCE, LISTENER, nlos_wedges, nlos_mesh, via_reflection=True)

    reflected = [path for path in paths if path.order == 2]
    for path in reflected:
        assert path.kinds == (SegmentKind.DIRECT, SegmentKind.REFLECTION, SegmentKind.DIFFRACTION)
        assert path.surfaces[1] in {wedge.id for wedge in nlos_wedges}
