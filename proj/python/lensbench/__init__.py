"""Python bindings for the lens benchmark core."""

from ._core import (  # noqa: F401
    ConfigError,
    DataError,
    full_grid_cost,
    grid_options,
    plan,
    replay,
    run_benchmark,
    __version__,
)

__all__ = [
    "ConfigError",
    "DataError",
    "full_grid_cost",
    "grid_options",
    "plan",
    "replay",
    "run_benchmark",
    "__version__",
]
