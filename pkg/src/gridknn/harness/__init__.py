"""Dataset synthesis, serialization, verification and benchmarks."""

from . import bench, cli, datasets, fileio, verify

__all__ = ["bench", "cli", "datasets", "fileio", "verify"]
