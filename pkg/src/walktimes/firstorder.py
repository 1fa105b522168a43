"""Hitting and return statistics of first-order Markov chains.

Works for any chain exposing a row-stochastic ``matrix``; in this
package that is a chain on graph nodes or on directed edges. Expected
hitting times of a set S solve, in minimal nonnegative form,

    tau_i = 0                        for i in S,
    tau_i = 1 + sum_j P_ij tau_j     otherwise,

and are infinite exactly for states that miss S with positive
probability. Return times, the dense pairwise time matrix, and the
decomposition of set hitting times into weighted singleton columns
all come with their defining identities checked at runtime.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._solvers import expected_steps, reach_probabilities
from .chains import stationary_density
from .config import TOL, Tolerances
from .errors import InvariantViolation, SizeCapError

__all__ = [
    "HittingSolution",
    "ReturnData",
    "TimeMatrix",
    "SubsetDecomposition",
    "hitting_probabilities",
    "mean_hitting_times",
    "return_times",
    "hitting_matrix",
    "subset_decomposition",
]


def _target_mask(n: int, S) -> np.ndarray:
    idx = np.asarray(sorted(set(int(s) for s in S)), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("target set is empty")
    if idx[0] < 0 or idx[-1] >= n:
        raise ValueError(f"target state out of range for {n} states")
    mask = np.zeros(n, dtype=bool)
    mask[idx] = True
    return mask


@dataclass(frozen=True)
class HittingSolution:
    """Per-state reach probabilities and expected times into a set."""

    target: tuple[int, ...]
    probability: np.ndarray   # chance of ever entering the target
    time: np.ndarray          # expected steps, inf where divergent
    finite: np.ndarray        # bool mask, time[finite] is finite


@dataclass(frozen=True)
class ReturnData:
    """Mean return times to a set, with the reciprocal-mass identity."""

    target: tuple[int, ...]
    per_state: np.ndarray     # mean return time from each target state, 0 elsewhere
    set_mean: float           # density-weighted mean over the target
    density_mass: float       # invariant mass of the target


@dataclass(frozen=True)
class TimeMatrix:
    """Dense matrix of expected travel times between all state pairs."""

    matrix: np.ndarray        # [i, k] = expected steps from i to k, zero diagonal
    kappa: float              # density-weighted row mean, constant over rows
    kappa_spread: float       # relative spread of the row means


@dataclass(frozen=True)
class SubsetDecomposition:
    """Set hitting times as a weighted sum of singleton columns."""

    target: tuple[int, ...]
    weights: np.ndarray       # per-state weights, zero off the target set
    offset: float             # constant subtracted from the weighted sum


def hitting_probabilities(chain, S, tol: Tolerances = TOL) -> np.ndarray:
    """Probability of ever reaching the state set S, per start state."""
    mask = _target_mask(chain.n_states, S)
    return reach_probabilities(chain.matrix, mask, tol=tol)


def mean_hitting_times(chain, S, tol: Tolerances = TOL) -> HittingSolution:
    """Expected steps to reach the state set S, per start state.

    States already in S take 0 steps. A state that reaches S with
    probability below one has infinite expected time.
    """
    mask = _target_mask(chain.n_states, S)
    time, finite, phi = expected_steps(chain.matrix, mask, tol=tol)
    return HittingSolution(
        target=tuple(int(i) for i in np.flatnonzero(mask)),
        probability=phi,
        time=time,
        finite=finite,
    )


def _entry_times(chain, mask, pi, tol) -> np.ndarray:
    """Expected steps to S per state, skipping the reach solve.

    Valid when an invariant density exists: the chain is irreducible,
    so every state surely reaches every target.
    """
    time, finite, _ = expected_steps(chain.matrix, mask, assume_sure=True, tol=tol)
    if not finite.all():
        raise InvariantViolation("hitting time diverged on an irreducible chain")
    return time


def return_times(chain, S, pi=None, tol: Tolerances = TOL) -> ReturnData:
    """Mean time to come back to the set S, started inside it.

    For each i in S the one-step shift gives
    tau_plus_i = 1 + sum_j P_ij tau_j with tau the hitting times of S.
    The density-weighted mean over S must equal the reciprocal of the
    invariant mass of S; the identity is enforced here.
    """
    if pi is None:
        pi = stationary_density(chain, tol=tol)
    mask = _target_mask(chain.n_states, S)
    tau = _entry_times(chain, mask, pi, tol)
    idx = np.flatnonzero(mask)
    tau_plus = 1.0 + (chain.matrix[idx] @ tau)
    mass = float(pi[idx].sum())
    set_mean = float(pi[idx] @ tau_plus) / mass
    expected = 1.0 / mass
    if abs(set_mean - expected) > tol.kac_agreement * max(1.0, expected):
        raise InvariantViolation(
            f"return time {set_mean!r} disagrees with reciprocal mass {expected!r}"
        )
    per_state = np.zeros(chain.n_states)
    per_state[idx] = tau_plus
    return ReturnData(
        target=tuple(int(i) for i in idx),
        per_state=per_state,
        set_mean=set_mean,
        density_mass=mass,
    )


def hitting_matrix(chain, pi=None, tol: Tolerances = TOL) -> TimeMatrix:
    """Dense matrix of expected travel times between all state pairs.

    Column k holds the expected steps to reach k. Checked here:
    the density-weighted row means agree across rows (the random
    target identity) and the matrix satisfies its defining linear
    equation with zero diagonal.
    """
    n = chain.n_states
    if n > tol.dense_edge_cap:
        raise SizeCapError(
            f"dense time matrix for {n} states exceeds the cap "
            f"({tol.dense_edge_cap}); raise Tolerances.dense_edge_cap to force"
        )
    if pi is None:
        pi = stationary_density(chain, tol=tol)
    T = np.zeros((n, n))
    mask = np.zeros(n, dtype=bool)
    for k in range(n):
        mask[k] = True
        T[:, k] = _entry_times(chain, mask, pi, tol)
        mask[k] = False

    row_means = T @ pi
    kappa = float(row_means.mean())
    spread = float((row_means.max() - row_means.min()) / max(1.0, abs(kappa)))
    if spread > tol.kemeny_spread:
        raise InvariantViolation(
            f"density-weighted row means of the time matrix vary by {spread:.3e}"
        )
    # (I - P) T = ones - diag(1/pi), with a zero diagonal
    lhs = T - chain.matrix @ T
    rhs = np.ones((n, n))
    rhs[np.diag_indices(n)] = 1.0 - 1.0 / pi
    resid = np.abs(lhs - rhs).max()
    if resid > tol.t_matrix_residual * max(1.0, np.abs(T).max() * 1e-6):
        raise InvariantViolation(
            f"time matrix violates its linear equation: residual {resid:.3e}"
        )
    return TimeMatrix(matrix=T, kappa=kappa, kappa_spread=spread)


def subset_decomposition(chain, S, pi=None, T=None,
                         tol: Tolerances = TOL) -> SubsetDecomposition:
    """Express hitting times of a set through its singleton columns.

    The hitting time vector of S equals a convex combination of the
    singleton hitting columns of the members, minus a constant:
    weights_i = pi_i * (mean return time to S started at i), and the
    constant is the weighted mean time from any member of S to the
    members (independent of the chosen member). Both facts are
    verified numerically before returning.

    ``T`` may carry a precomputed time matrix to reuse its columns.
    """
    if pi is None:
        pi = stationary_density(chain, tol=tol)
    n = chain.n_states
    mask = _target_mask(n, S)
    idx = np.flatnonzero(mask)
    tau = _entry_times(chain, mask, pi, tol)
    tau_plus = 1.0 + (chain.matrix[idx] @ tau)

    weights = np.zeros(n)
    weights[idx] = pi[idx] * tau_plus
    wsum = weights.sum()
    if abs(wsum - 1.0) > tol.weight_sum:
        raise InvariantViolation(
            f"decomposition weights sum to {wsum!r}, expected 1"
        )

    if T is not None:
        cols = T[:, idx]
    else:
        cols = np.empty((n, idx.size))
        single = np.zeros(n, dtype=bool)
        for c, k in enumerate(idx):
            single[k] = True
            cols[:, c] = _entry_times(chain, single, pi, tol)
            single[k] = False

    # the constant, evaluated at every member of S, must not vary
    offsets = cols[idx] @ weights[idx]
    off = float(offsets.mean())
    off_spread = float(np.abs(offsets - off).max())
    if off_spread > tol.subset_offset_spread * max(1.0, abs(off)):
        raise InvariantViolation(
            f"decomposition offset varies over the set by {off_spread:.3e}"
        )

    recon = cols @ weights[idx] - off
    resid = np.abs(recon - tau).max()
    if resid > tol.subset_identity * max(1.0, np.abs(tau).max() * 1e-6):
        raise InvariantViolation(
            f"subset decomposition identity failed: residual {resid:.3e}"
        )
    return SubsetDecomposition(
        target=tuple(int(i) for i in idx),
        weights=weights,
        offset=off,
    )
