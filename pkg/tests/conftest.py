import os
from pathlib import Path

import numpy as np
import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = Path(os.environ.get("RINGSNN_DATA_DIR", REPO_ROOT / "data" / "mnist"))


def mnist_available() -> bool:
    return (DATA_DIR / "train-images-idx3-ubyte").exists() or (
        DATA_DIR / "train-images-idx3-ubyte.gz"
    ).exists()


needs_mnist = pytest.mark.skipif(
    not mnist_available(), reason="MNIST IDX files not found (see scripts/fetch_mnist.py)"
)


@pytest.fixture(scope="session")
def data_dir():
    if not mnist_available():
        pytest.skip("MNIST IDX files not found")
    return DATA_DIR


@pytest.fixture(scope="session")
def mnist_train(data_dir):
    from ringsnn import dataio

    return dataio.load_mnist(data_dir, "train")


@pytest.fixture(scope="session")
def mnist_test(data_dir):
    from ringsnn import dataio

    return dataio.load_mnist(data_dir, "test")


@pytest.fixture(scope="session")
def small_model(mnist_train):
    """MLP trained on a small subset; shared by conversion tests."""
    from ringsnn import dataio
    from ringsnn.ann import MlpClassifier

    X = dataio.normalize(mnist_train.flat_images[:10000])
    y = mnist_train.labels[:10000]
    return MlpClassifier(hidden=(128,), epochs=5, seed=42).fit(X, y)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
