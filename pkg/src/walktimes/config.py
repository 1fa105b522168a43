"""Numerical tolerances and size caps used throughout the package.

All identity checks compare against these constants so that every
tolerance lives in one place. Functions take an optional ``tol``
argument; the module-level ``TOL`` is the default everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # construction-time checks
    row_sum: float = 1e-12              # rows of a transition matrix sum to 1
    density_residual: float = 1e-10     # residual of a supplied invariant density
    stationary_residual: float = 1e-12  # residual of a freshly solved density
    inout_balance: float = 1e-10        # in-sum vs out-sum of the edge density

    # linear solvers
    direct_solve_residual: float = 1e-10  # relative residual accepted from LU
    iteration_tol: float = 1e-12          # sup-norm step size at convergence
    divergence_threshold: float = 1e15    # iterate above this counts as infinite
    max_sweeps: int = 100_000
    finite_probability: float = 1e-9      # reach prob >= 1 - this counts as sure
    power_iteration_tol: float = 1e-13
    power_iteration_threshold: int = 50_000  # states above this use power iteration

    # identity checks
    kac_agreement: float = 1e-10        # return time vs reciprocal density mass
    kemeny_spread: float = 1e-8         # density-weighted row means of T agree
    t_matrix_residual: float = 1e-8     # linear equation satisfied by T
    subset_identity: float = 1e-8       # set hitting vs weighted singleton columns
    subset_offset_spread: float = 1e-9  # the subtracted constant is constant
    weight_sum: float = 1e-10           # decomposition weights sum to 1
    equivalence: float = 1e-10          # direct vs line-graph second-order times
    route_agreement: float = 1e-8       # aggregated vs lifted hitting matrix
    return_agreement: float = 1e-9      # formula vs reciprocal-density return time
    access_spread: float = 1e-9         # per-edge return times constant per node
    pullback_entry: float = 1e-12       # pullback chain entries

    # size caps
    dense_edge_cap: int = 20_000        # refuse dense edge-by-edge matrices above
    simulation_step_cap: int = 1_000_000


TOL = Tolerances()

# number of significant digits in user-facing numeric output
OUTPUT_DIGITS = 12


def fmt(x: float) -> str:
    """Format a float with the standard number of significant digits."""
    if x != x:
        return "nan"
    if x == float("inf"):
        return "inf"
    if x == float("-inf"):
        return "-inf"
    return f"{x:.{OUTPUT_DIGITS}g}"
