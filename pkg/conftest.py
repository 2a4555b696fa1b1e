"""
Shared fixtures for the ModDens tests
"""
import pytest

from src.config import get_settings
from src.graph import Graph, Partition


@pytest.fixture(autouse=True)
def fresh_settings():
    """Settings are cached; tests that touch MODDENS_* need a fresh read"""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def triangle():
    return Graph.from_edges([(0, 1), (1, 2), (2, 0)])


@pytest.fixture
def k4():
    return Graph.from_edges([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


@pytest.fixture
def two_triangles():
    """Two K3 cliques joined by the bridge 2-3"""
    return Graph.from_edges([(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)])


@pytest.fixture
def two_triangles_split():
    return Partition([0, 0, 0, 1, 1, 1])


@pytest.fixture
def write_file(tmp_path):
    def _write(name, content):
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return path
    return _write
