"""Rare-event reliability toolkit.

Subset simulation with adaptive conditional sampling, accelerated by local
Gaussian-process surrogates and partial-least-squares dimension reduction.
"""

from ._raresim import (
    __version__,
    benchmark_ids,
    evaluate,
    run,
    run_experiment,
)

__all__ = [
    "__version__",
    "benchmark_ids",
    "evaluate",
    "run",
    "run_experiment",
]
