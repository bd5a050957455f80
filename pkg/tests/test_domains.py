import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blaschke_lab import DomainError, disk, moebius_image, unit_disk, whole_plane
from blaschke_lab.domains import disk_rect_area


def test_inner_domain_must_be_compactly_contained():
    with pytest.raises(DomainError):
        unit_disk(inner=disk(0, 1.0))
    with pytest.raises(DomainError):
        unit_disk(inner=disk(0.6, 0.5))
    assert unit_disk(inner=disk(0, 0.5)).inner.radius == 0.5


def test_inner_domain_cannot_be_plane():
    with pytest.raises(DomainError):
        unit_disk(inner=whole_plane())


def test_degenerate_moebius_rejected():
    with pytest.raises(DomainError):
        moebius_image(1, 2, 2, 4)


def test_disk_chart_round_trip():
    d = disk(0.5 - 0.25j, 2.0)
    z = np.array([0.1, 1.3j, -1.2 + 0.4j])
    np.testing.assert_allclose(d.from_disk(d.to_disk(z)), z, atol=1e-15)
    assert d.to_disk(0.5 - 0.25j) == 0


def test_moebius_image_of_half_plane():
    # w -> (1 + w) / (1 - w) maps the unit disk onto Re z > 0
    d = moebius_image(1, 1, -1, 1)
    assert d.contains(np.array([0.5 + 3j]))[0]
    assert not d.contains(np.array([-0.1 + 0j]))[0]
    assert d.distance_to_boundary(2 + 1j) == pytest.approx(2.0)


def test_moebius_image_of_disk_distance():
    # w -> w / 2 + 1 is the disk D(1, 1/2)
    d = moebius_image(0.5, 1, 0, 1)
    assert d.distance_to_boundary(1.1) == pytest.approx(0.4)
    assert d.contains(np.array([1.4]))[0]
    assert not d.contains(np.array([1.6]))[0]


def test_concentric_subdisk():
    d = disk(1j, 2.0).concentric(0.5)
    assert d.distance_to_boundary(1j) == pytest.approx(1.0)


def test_describe_lists_inner_domain():
    assert unit_disk(inner=disk(0, 0.5)).describe() == "unitdisk minus disk:0.0,0.5"


def test_exact_disk_rectangle_area():
    rect = np.array([[-2.0, -2.0, 2.0, 2.0], [0.0, 0.0, 1.0, 1.0], [2.0, 2.0, 3.0, 3.0]])
    area = disk_rect_area(0j, 1.0, rect)
    np.testing.assert_allclose(area, [np.pi, np.pi / 4, 0.0], atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.01, 0.7), st.floats(0.01, 0.7))
def test_cut_cell_fraction_matches_monte_carlo(x0, y0, w, hgt):
    rect = np.array([[x0, y0, x0 + w, y0 + hgt]])
    frac = unit_disk().cell_fraction(rect)[0]
    rng = np.random.default_rng(3)
    pts = (x0 + w * rng.uniform(size=40000)) + 1j * (y0 + hgt * rng.uniform(size=40000))
    assert frac == pytest.approx(np.mean(np.abs(pts) < 1), abs=0.02)
