"""
Pytest configuration and shared fixtures for nesphere tests.
"""
import shutil
import tempfile
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from nesphere.dictionary import NeDictionary, NeType
from nesphere.embeddings import EmbeddingSpace, save_embeddings
from nesphere.hypersphere import Hypersphere
from nesphere.synth import ClusterSpec, SynthSpec, TransformSpec


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    temp_dir = tempfile.mkdtemp()
    yield Path(temp_dir)
    shutil.rmtree(temp_dir)


@pytest.fixture(autouse=True)
def mock_config_path(tmp_path):
    """Point the settings file at a temporary location."""
    config_file = tmp_path / "nesphere-config" / "config.yaml"
    with patch("nesphere.config.config_path", config_file):
        yield config_file


@pytest.fixture(autouse=True)
def isolate_environment(monkeypatch):
    """Isolate test environment from system environment."""
    monkeypatch.delenv("NESPHERE_CONFIG", raising=False)
    monkeypatch.delenv("NESPHERE_LOG_LEVEL", raising=False)


@pytest.fixture
def line_space():
    """Five points on a line plus one off-axis point."""
    return EmbeddingSpace.from_vectors(
        {
            "alpha": [0.0, 0.0],
            "beta": [1.0, 0.0],
            "gamma": [2.0, 0.0],
            "delta": [3.0, 0.0],
            "epsilon": [10.0, 0.0],
            "zeta": [0.0, 5.0],
        }
    )


@pytest.fixture
def cluster_space():
    """A tight PER cluster around the origin and far background words."""
    rng = np.random.default_rng(7)
    members = rng.normal(0.0, 0.5, (40, 4))
    background = rng.uniform(-20, 20, (200, 4))
    background = background[np.linalg.norm(background, axis=1) > 6]
    tokens = [f"PER_{i}" for i in range(len(members))] + [f"bg_{i}" for i in range(len(background))]
    space = EmbeddingSpace(tokens=tuple(tokens), matrix=np.vstack([members, background]))
    entries = frozenset((f"PER_{i}",) for i in range(len(members)))
    return space, entries


@pytest.fixture
def unit_sphere_2d():
    return Hypersphere(center=np.zeros(2), radius=1.0, ne_type=NeType.PER)


@pytest.fixture
def small_spec():
    """A quick synthetic benchmark with a planted similarity transform."""
    return SynthSpec(
        dim=4,
        clusters={t: ClusterSpec(members=30, spread=0.5) for t in NeType},
        background=100,
        center_scale=5.0,
        background_extent=10.0,
        transform=TransformSpec(scale=1.7, rotate=True),
        seed=3,
    )


@pytest.fixture
def embedding_file(temp_dir, line_space):
    path = temp_dir / "line.txt"
    save_embeddings(line_space, path)
    return path


@pytest.fixture
def sample_dictionary():
    return NeDictionary(
        {
            NeType.PER: frozenset({("alpha",), ("beta",), ("gamma",)}),
            NeType.LOC: frozenset({("epsilon",), ("zeta",)}),
        }
    )


# CLI testing helpers
@pytest.fixture
def cli_invoke():
    """Helper function to invoke CLI commands with proper error handling."""
    from typer.testing import CliRunner

    runner = CliRunner()

    def invoke(app, args, **kwargs):
        result = runner.invoke(app, args, **kwargs)
        if result.exception and not isinstance(result.exception, SystemExit):
            raise result.exception
        return result

    return invoke
