import dataclasses
import math

import numpy as np
import pytest

from nlos_ssl.geometry.wedges import extract_wedges
from nlos_ssl.raytrace.diffraction import diffractability, shadow_sector
from nlos_ssl.raytrace.models import Observation, SegmentKind, TraceConfig
from nlos_ssl.raytrace.tracer import AcousticRayTracer, reflect, trace_frame, trace_recursive
from nlos_ssl.synth.scenes import plane
from tests.conftest import WEDGE_THRESHOLD, random_unit_vectors

ROOM = np.array([7.0, 7.0, 3.0])


def fold(points: np.ndarray, size: np.ndarray) -> np.ndarray:
    """Map unfolded image-space coordinates back into the box [0, size]."""
    wrapped = np.mod(points, 2.0 * size)
    return np.where(wrapped > size, 2.0 * size - wrapped, wrapped)


def unit(*components):
    v = np.array(components, dtype=float)
    return v / np.linalg.norm(v)


def observation(position, direction, index=0, frame=0):
    return Observation(frame=frame, index=index, position=np.asarray(position, float), direction=unit(*direction))


@pytest.fixture
def corner_wedge(nlos_wedges):
    """Vertical obstacle edge at x = 3, y = 2."""
    for wedge in nlos_wedges:
        if abs(wedge.e_z[2]) > 0.99 and np.allclose(wedge.start[:2], [3.0, 2.0]):
            return wedge
    raise AssertionError("corner wedge missing")


def test_reflect_preserves_tangential_component():
    reflected = reflect(unit(1.0, 1.0, 0.0), [-1.0, 0.0, 0.0])

    np.testing.assert_allclose(reflected, unit(-1.0, 1.0, 0.0))


def test_axis_ray_bounces_between_walls(room_mesh):
    tracer = AcousticRayTracer(room_mesh, [], TraceConfig(max_order=3))

    tree = tracer.trace_recursive([1.5, 1.5, 1.0], [1.0, 0.0, 0.0])

    chain = tree.reflection_chain()
    assert len(tree) == 4
    assert [segment.order for segment in chain] == [0, 1, 2, 3]
    assert [segment.kind for segment in chain] == [SegmentKind.DIRECT] + [SegmentKind.REFLECTION] * 3
    np.testing.assert_allclose([segment.length for segment in chain], [5.5, 7.0, 7.0, 7.0])
    np.testing.assert_allclose(chain[1].direction, [-1.0, 0.0, 0.0])
    assert tree.children_of(3) == []


def test_reflection_chain_matches_image_sources(room_mesh, rng):
    tracer = AcousticRayTracer(room_mesh, [], TraceConfig(max_order=3))
    origin = np.array([2.0, 3.0, 1.2])

    for direction in random_unit_vectors(rng, 25):
        chain = tracer.trace_recursive(origin, direction).reflection_chain()
        travelled = 0.0
        for segment in chain:
            travelled += segment.length
            np.testing.assert_allclose(segment.end, fold(origin + travelled * direction, ROOM), atol=1e-7)


def test_escaping_ray_stops_at_max_length():
    tracer = AcousticRayTracer(plane(), [], TraceConfig(max_ray_length=12.0))

    tree = tracer.trace_recursive([0.5, 0.5, 1.0], [0.0, 0.0, 1.0])

    assert len(tree) == 1
    assert tree.root.length == 12.0
    assert tree.root.hit_triangle is None


def test_grazing_corner_spawns_reflection_then_diffraction(nlos_mesh, nlos_wedges, corner_wedge):
    config = TraceConfig(n_d=5, max_order=1)
    origin = np.array([1.5, 3.5, 1.0])
    direction = unit(1.5, -1.52, 0.0)

    tree = trace_recursive(origin, direction, nlos_mesh, nlos_wedges, config)

    root = tree.root
    kids = tree.children_of(root.id)
    assert len(tree) == 7
    assert kids[0].kind is SegmentKind.REFLECTION
    assert [kid.kind for kid in kids[1:]] == [SegmentKind.DIFFRACTION] * 5
    assert root.event_wedge == corner_wedge.id
    assert 0.0 < root.event_param <= root.length
    for kid in tree.diffraction_children(root.id):
        assert kid.source_wedge == corner_wedge.id
        assert kid.order == 1
        np.testing.assert_allclose(kid.origin, [3.0, 2.0, 1.0], atol=1e-9)
        # horizontal parent, so the cone degenerates to the horizontal plane
        assert kid.direction[2] == pytest.approx(0.0, abs=1e-12)
        # shadowed side of the corner lies below the front face
        assert kid.direction[1] < 0.0


def test_no_diffraction_mode_keeps_only_reflections(nlos_mesh, nlos_wedges):
    config = TraceConfig(n_d=0, max_order=2)

    tree = trace_recursive([1.5, 3.5, 1.0], unit(1.5, -1.52, 0.0), nlos_mesh, nlos_wedges, config)

    assert tree.count_by_kind()[SegmentKind.DIFFRACTION] == 0
    assert len(tree) == 3
    assert tree.root.event_wedge is None


def test_low_diffractability_ray_has_no_event(nlos_mesh, nlos_wedges):
    tree = trace_recursive([1.5, 3.5, 1.0], [0.0, 1.0, 0.0], nlos_mesh, nlos_wedges, TraceConfig(max_order=1))

    assert tree.root.event_wedge is None
    assert tree.count_by_kind() == {SegmentKind.DIRECT: 1, SegmentKind.REFLECTION: 1, SegmentKind.DIFFRACTION: 0}


def test_diffraction_children_never_rediffract_on_source_wedge(nlos_mesh, nlos_wedges):
    config = TraceConfig(n_d=3, max_order=3)

    tree = trace_recursive([1.5, 3.5, 1.0], unit(1.5, -1.52, 0.0), nlos_mesh, nlos_wedges, config)

    for segment in tree.segments:
        if segment.kind is SegmentKind.DIFFRACTION:
            assert segment.event_wedge != segment.source_wedge
    assert tree.depth <= 3
    assert all(segment.order <= 3 for segment in tree.segments)


def test_tree_is_breadth_first_and_consistent(nlos_mesh, nlos_wedges):
    tree = trace_recursive([1.5, 3.5, 1.0], unit(1.5, -1.52, 0.2), nlos_mesh, nlos_wedges, TraceConfig(max_order=3))

    assert [segment.id for segment in tree.segments] == list(range(len(tree)))
    for segment in tree.segments[1:]:
        assert segment.parent < segment.id
        assert segment.id in tree.children[segment.parent]
        assert segment.order == tree.segments[segment.parent].order + 1
        assert np.linalg.norm(segment.direction) == pytest.approx(1.0)
    graph = tree.to_graph()
    assert graph.number_of_nodes() == len(tree)
    assert graph.number_of_edges() == len(tree) - 1


def test_depth_beyond_max_order_is_rejected(room_mesh):
    tracer = AcousticRayTracer(room_mesh, [], TraceConfig(max_order=2))

    with pytest.raises(ValueError):
        tracer.trace_recursive([1.0, 1.0, 1.0], [1.0, 0.0, 0.0], depth=3)
    assert len(tracer.trace_recursive([1.0, 1.0, 1.0], [1.0, 0.0, 0.0], depth=2)) == 1


def test_trace_frame_reverses_arrival_direction(room_mesh):
    obs = observation([3.5, 3.5, 1.5], (-1.0, 0.0, 0.0))

    [tree] = trace_frame([obs], room_mesh, [], TraceConfig(max_order=0))

    np.testing.assert_allclose(tree.root.direction, [1.0, 0.0, 0.0])
    assert tree.root.length == pytest.approx(3.5)
    assert tree.observation == 0
    assert tree.frame == 0


def test_trace_frame_rejects_mixed_frames(room_mesh):
    observations = [observation([1, 1, 1], (1, 0, 0), frame=0), observation([1, 1, 1], (0, 1, 0), index=1, frame=1)]

    with pytest.raises(ValueError):
        trace_frame(observations, room_mesh, [])


def test_empty_frame_gives_no_trees(room_mesh):
    assert trace_frame([], room_mesh, []) == []


def test_tracing_is_deterministic_and_thread_independent(nlos_mesh, rng):
    wedges = extract_wedges(nlos_mesh, WEDGE_THRESHOLD)
    directions = random_unit_vectors(rng, 12)
    observations = [observation([1.5, 3.5, 1.0], d, index=i) for i, d in enumerate(directions)]
    tracer = AcousticRayTracer(nlos_mesh, wedges, TraceConfig(n_d=3, max_order=2))

    serial = tracer.trace_frame(observations, threads=1)
    again = tracer.trace_frame(observations, threads=1)
    threaded = tracer.trace_frame(observations, threads=4)

    for a, b, c in zip(serial, again, threaded):
        assert a.observation == b.observation == c.observation
        assert a.children == b.children == c.children
        for arrays in zip(a.segment_arrays(), b.segment_arrays(), c.segment_arrays()):
            np.testing.assert_array_equal(arrays[0], arrays[1])
            np.testing.assert_array_equal(arrays[0], arrays[2])


def test_cone_angle_of_horizontal_ray_is_right_angle(corner_wedge):
    from nlos_ssl.raytrace.diffraction import cone_angle

    assert cone_angle(corner_wedge, unit(1.0, -1.0, 0.0)) == pytest.approx(math.pi / 2)


def test_diffracting_segment_keeps_its_full_length(nlos_mesh, nlos_wedges):
    origin = [1.5, 3.5, 1.0]
    direction = unit(1.5, -1.52, 0.0)

    with_events = trace_recursive(origin, direction, nlos_mesh, nlos_wedges, TraceConfig(n_d=5, max_order=1))
    without = trace_recursive(origin, direction, nlos_mesh, nlos_wedges, TraceConfig(n_d=0, max_order=1))

    root = with_events.root
    assert root.event_wedge is not None
    assert root.length == pytest.approx(without.root.length)
    assert root.hit_triangle == without.root.hit_triangle
    assert root.event_param < root.length


def test_shadowless_best_wedge_falls_back_to_next_candidate(nlos_mesh, nlos_wedges, corner_wedge):
    # same edge, but the solid fills almost the whole turn so no shadow sector exists
    blocked = dataclasses.replace(corner_wedge, id=1000, angle=2.0 * math.pi - 0.01)
    wedges = [blocked] + list(nlos_wedges)
    config = TraceConfig(n_d=5, max_order=1)

    tree = trace_recursive([1.5, 3.5, 1.0], unit(1.5, -1.52, 0.0), nlos_mesh, wedges, config)

    assert shadow_sector(blocked, tree.root.direction) is None
    assert tree.root.event_wedge == corner_wedge.id
    assert len(tree.diffraction_children(tree.root.id)) == 5


def test_ray_past_shared_vertex_diffracts_on_single_best_wedge(nlos_mesh, nlos_wedges):
    config = TraceConfig(n_d=5, max_order=1)
    origin = np.array([1.5, 1.5, 1.0])
    direction = unit(*(np.array([3.0, 1.99, 1.51]) - origin))

    tree = trace_recursive(origin, direction, nlos_mesh, nlos_wedges, config)

    root = tree.root
    usable = []
    for wedge in nlos_wedges:
        v_d, _ = diffractability(root, wedge)
        if v_d > config.v_th and shadow_sector(wedge, root.direction) is not None:
            usable.append((v_d, wedge.id))
    candidates = [wedge for wedge in nlos_wedges if diffractability(root, wedge)[0] > config.v_th]
    assert len(candidates) >= 2
    assert usable
    top = max(usable)[0]
    assert root.event_wedge in {wedge_id for v_d, wedge_id in usable if v_d >= top - 1e-9}
    kids = tree.diffraction_children(root.id)
    assert len(kids) == 5
    assert {kid.source_wedge for kid in kids} == {root.event_wedge}


def test_wedge_order_does_not_change_the_tree(nlos_mesh, nlos_wedges):
    config = TraceConfig(n_d=3, max_order=3)
    origin = [1.5, 3.5, 1.0]
    direction = unit(1.5, -1.52, 0.1)

    forward = trace_recursive(origin, direction, nlos_mesh, nlos_wedges, config)
    backward = trace_recursive(origin, direction, nlos_mesh, list(reversed(nlos_wedges)), config)

    assert forward.children == backward.children
    for a, b in zip(forward.segments, backward.segments):
        assert a.kind is b.kind
        assert a.source_wedge == b.source_wedge
        assert a.event_wedge == b.event_wedge
        np.testing.assert_allclose(a.origin, b.origin, atol=1e-12)
        np.testing.assert_allclose(a.direction, b.direction, atol=1e-12)
