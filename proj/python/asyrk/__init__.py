"""Sparse row-projection solvers with asynchronous shared-memory execution.

The compiled core exposes instance generation, system statistics, the
staleness-aware step-size rule, the serial and lock-free parallel solvers,
the bounded-delay simulator, the least-squares extension, and the invariant
self-check suites. Matrices cross the boundary as triplet lists
(rows, cols, vals); rows are normalized inside every entry point that needs
it, with the right-hand side rescaled identically.
"""

try:
    from ._asyrk import (  # type: ignore[attr-defined]
        generate,
        system_stats,
        step_params,
        solve_rk,
        solve_parallel,
        simulate,
        lsq,
        selfcheck,
    )
except ImportError:  # development layout: module next to the build tree
    from _asyrk import (  # type: ignore[no-redef]
        generate,
        system_stats,
        step_params,
        solve_rk,
        solve_parallel,
        simulate,
        lsq,
        selfcheck,
    )

__all__ = [
    "generate",
    "system_stats",
    "step_params",
    "solve_rk",
    "solve_parallel",
    "simulate",
    "lsq",
    "selfcheck",
]

__version__ = "0.1.0"
