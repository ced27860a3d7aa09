"""Test module for the package version."""
import steerdistil


def test_pkg_version():
    assert steerdistil.__version__ == steerdistil._version.__version__
