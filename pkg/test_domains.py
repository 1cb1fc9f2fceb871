#!/usr/bin/env python3
"""
Tests for the domain catalog and boundary meshes
"""

import numpy as np
import pytest

from szegolab.domains import Cube, Difference, Disk, Polygon, build_domain, mesh_nodes_for, validate_mesh
from szegolab.exceptions import DomainError, InvalidParameterError
from szegolab.models import DomainConfig, SmoothnessLabel


@pytest.mark.parametrize("domain", [
    Disk(dimension=2, radius=1.0),
    Disk(dimension=3, radius=0.5),
    Cube(dimension=2, half_width=1.5),
    Cube(dimension=3, half_width=1.0),
    Polygon(vertices=((0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0))),
    Difference(outer=Disk(dimension=2, radius=2.0), inner=Disk(dimension=2, radius=0.5)),
])
def test_boundary_meshes_are_valid(domain):
    report = validate_mesh(domain, 512)
    assert report.valid, report
    assert report.orientation_failures == 0


@pytest.mark.parametrize("domain, volume, area", [
    (Disk(dimension=2, radius=2.0), 4.0 * np.pi, 4.0 * np.pi),
    (Disk(dimension=3, radius=1.0), 4.0 / 3.0 * np.pi, 4.0 * np.pi),
    (Cube(dimension=2, half_width=0.5), 1.0, 4.0),
    (Cube(dimension=3, half_width=1.0), 8.0, 24.0),
])
def test_volume_and_surface(domain, volume, area):
    assert domain.volume() == pytest.approx(volume)
    assert domain.surface_area() == pytest.approx(area)
    _, weights = domain.volume_quadrature()
    assert weights.sum() == pytest.approx(volume, rel=1e-10)
    assert domain.boundary_mesh(600).weights.sum() == pytest.approx(area, rel=1e-10)


def test_polygon_reoriented_counter_clockwise():
    clockwise = Polygon(vertices=((0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)))
    assert clockwise.volume() == pytest.approx(1.0)
    assert clockwise.surface_area() == pytest.approx(4.0)
    _, weights = clockwise.volume_quadrature(8)
    assert weights.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("vertices", [((0.0, 0.0), (1.0, 0.0)), ((0.0, 0.0), (1.0, 1.0), (2.0, 2.0))])
def test_degenerate_polygons_rejected(vertices):
    with pytest.raises(ValueError):
        Polygon(vertices=vertices)


def test_polygon_indicator():
    triangle = Polygon(vertices=((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))
    inside = triangle.indicator(np.array([[0.2, 0.2], [0.6, 0.6], [-0.1, 0.5]]))
    assert inside.tolist() == [True, False, False]


def test_difference_volume_and_indicator():
    annulus = Difference(outer=Disk(dimension=2, radius=2.0), inner=Disk(dimension=2, radius=1.0))
    assert annulus.volume() == pytest.approx(3.0 * np.pi)
    assert annulus.surface_area() == pytest.approx(6.0 * np.pi)
    assert annulus.indicator(np.array([[0.5, 0.0], [1.5, 0.0], [2.5, 0.0]])).tolist() == [False, True, False]
    _, weights = annulus.volume_quadrature()
    assert weights.sum() == pytest.approx(3.0 * np.pi, rel=1e-10)


def test_indicator_rejects_wrong_dimension(unit_disk):
    with pytest.raises(DomainError):
        unit_disk.indicator(np.zeros((4, 3)))


def test_build_domain_catalog():
    disk = build_domain({"kind": "disk", "params": {"radius": 2.0, "center": [1.0, 0.0]}})
    assert isinstance(disk, Disk)
    assert disk.diameter == pytest.approx(4.0)
    np.testing.assert_allclose(disk.center, [1.0, 0.0])

    square = build_domain(DomainConfig(kind="square", params={"side": 3.0}), dimension=3)
    assert square.half_width == 1.5
    assert square.dimension == 3

    annulus = build_domain({"kind": "difference", "params": {
        "outer": {"kind": "disk", "params": {"radius": 2.0}},
        "inner": {"kind": "disk", "params": {"radius": 1.0}},
    }})
    assert annulus.smoothness == SmoothnessLabel.LIPSCHITZ


@pytest.mark.parametrize("config", [
    {"kind": "hexagon"},
    {"kind": "polygon"},
    {"kind": "polygon", "params": {"vertices": [[0, 0], [1, 0]]}},
    {"kind": "disk", "params": {"radius": -1.0}},
])
def test_build_domain_rejects_bad_entries(config):
    with pytest.raises(InvalidParameterError):
        build_domain(config)


def test_mesh_nodes_grow_with_alpha(unit_disk):
    assert mesh_nodes_for(unit_disk, 1.0) == 256
    assert mesh_nodes_for(unit_disk, 32.0) == int(np.ceil(8.0 * 32.0 * 2.0 * np.pi))
