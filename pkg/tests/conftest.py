from pathlib import Path
import pytest
from gaugecheck.bundles import SU2Bundle, SU3Bundle, U1Bundle
from gaugecheck.geometry import FrameField, MetricField
from gaugecheck.utils import sample_points

@pytest.fixture(scope="package")
def resources() -> Path:
    return Path(Path(__file__).parent.resolve(), "resources")

@pytest.fixture(scope="package")
def points():
    return sample_points(count=20, seed=7)

@pytest.fixture(scope="package")
def polar_points():
    """Samples with x1 in [0.5, 1.5], away from the polar axis"""
    return sample_points(box=((-1, 1), (0.5, 1.5), (-1, 1), (-1, 1)),
                         count=100, seed=3)

@pytest.fixture(scope="package")
def coordinate_frame(points) -> FrameField:
    return FrameField.coordinate(points)

@pytest.fixture(scope="package")
def minkowski(points) -> MetricField:
    return MetricField.minkowski(points)

@pytest.fixture(scope="package")
def orthonormal_bundles(points) -> dict:
    return {1: U1Bundle.orthonormal(points),
            2: SU2Bundle.orthonormal(points),
            3: SU3Bundle.orthonormal(points)}
